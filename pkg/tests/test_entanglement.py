import numpy as np
import pytest

from prodlocc.entanglement import (
    CompletionError,
    DensityMatrix,
    EntanglementError,
    choi_map,
    choi_witness_min_eig,
    choi_witness_operator,
    complement_mixed_state,
    complete_product_basis,
    distribution_report,
    eq8_unitary,
    ppt_check,
    separability_certificate,
)
from prodlocc.partitions import Partition, coarse_grain
from prodlocc.states import StateSet, bennett_qutrit_basis, eq2_set, six_state_set, verify_set

P = Partition.parse

# regression constants, reproduced by an independent script at 1e-12
WITNESS_ROTATED = -0.0009009653160920586
WITNESS_IDENTITY = 0.008648203639131817


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_density(rng, n, rank=None):
    a = random_complex(rng, n, rank or n)
    m = a @ a.conj().T
    return m / np.trace(m)


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def choi_oracle(m, rest, u):
    """(Λ ⊗ I) on (U ⊗ I) m (U ⊗ I)† via the matrix units of the qutrit."""
    big = np.kron(u, np.eye(rest))
    m = big @ m @ big.conj().T
    out = np.zeros_like(m)
    for k in range(3):
        for l in range(3):
            e = np.zeros((3, 3))
            e[k, l] = 1
            out += np.kron(choi_map(e), m[k * rest:(k + 1) * rest, l * rest:(l + 1) * rest])
    return out


def pt_oracle(m, dims, party):
    n = len(dims)
    t = m.reshape(tuple(dims) * 2)
    t = np.swapaxes(t, party, n + party)
    return t.reshape(m.shape)


@pytest.fixture(scope="module")
def rho6():
    return complement_mixed_state(six_state_set())


# -- Choi map ------------------------------------------------------------------------------


def test_choi_map_example():
    assert np.allclose(choi_map(np.eye(3)), np.eye(3))
    e01 = np.zeros((3, 3))
    e01[0, 1] = 1
    assert np.allclose(choi_map(e01), -e01 / 2)


def test_choi_map_properties():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = random_complex(rng, 3, 3)
        h = a + a.conj().T
        assert np.isclose(np.trace(choi_map(a)), np.trace(a))
        assert np.allclose(choi_map(h), choi_map(h).conj().T)
        v = random_complex(rng, 3)
        assert np.linalg.eigvalsh(choi_map(np.outer(v, v.conj()))).min() >= -1e-12


def test_choi_map_is_not_completely_positive():
    # the Choi matrix of the map has a negative eigenvalue
    c = sum(np.kron(np.outer(np.eye(3)[k], np.eye(3)[l]), choi_map(np.outer(np.eye(3)[k], np.eye(3)[l])))
            for k in range(3) for l in range(3))
    assert np.linalg.eigvalsh(c).min() < -0.1


def test_choi_map_shape_check():
    with pytest.raises(EntanglementError):
        choi_map(np.eye(2))


def test_witness_operator_matches_oracle(rho6):
    rng = np.random.default_rng(1)
    for u in [eq8_unitary(), np.eye(3), random_unitary(rng, 3)]:
        assert np.allclose(choi_witness_operator(rho6, u), choi_oracle(rho6.matrix, 4, u), atol=1e-13)


def test_witness_regression_values(rho6):
    assert abs(choi_witness_min_eig(rho6) - WITNESS_ROTATED) <= 1e-12
    assert abs(choi_witness_min_eig(rho6, np.eye(3)) - WITNESS_IDENTITY) <= 1e-12


def test_eq8_unitary_is_unitary():
    u = eq8_unitary()
    assert np.allclose(u @ u.conj().T, np.eye(3))


def test_witness_nonnegative_on_separable_states():
    rng = np.random.default_rng(2)
    for _ in range(20):
        m = sum(
            w * np.kron(random_density(rng, 3, 1), random_density(rng, 4))
            for w in rng.dirichlet(np.ones(5))
        )
        rho = DensityMatrix((3, 2, 2), m)
        assert rho.check()
        for u in (eq8_unitary(), random_unitary(rng, 3)):
            assert choi_witness_min_eig(rho, u) >= -1e-9


def test_witness_rejects_bad_inputs(rho6):
    with pytest.raises(EntanglementError):
        choi_witness_operator(rho6, np.ones((3, 3)))
    with pytest.raises(EntanglementError):
        choi_witness_operator(DensityMatrix((2, 2), np.eye(4) / 4))


# -- complement state and PPT ---------------------------------------------------------------


def test_complement_state_properties(rho6):
    m = rho6.matrix
    assert rho6.check()
    assert np.allclose(m @ m, m / 6)
    assert np.allclose(np.sort(np.linalg.eigvalsh(m)), [0] * 6 + [1 / 6] * 6)
    for st in six_state_set():
        v = st.vector()
        assert abs(v.conj() @ m @ v) < 1e-12


def test_complement_of_complete_set_raises():
    with pytest.raises(EntanglementError):
        complement_mixed_state(bennett_qutrit_basis())


def test_density_matrix_shape_check():
    with pytest.raises(EntanglementError):
        DensityMatrix((2, 2), np.eye(3))


def test_ppt_examples():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    bell = DensityMatrix((2, 2), np.outer(v, v))
    assert np.isclose(ppt_check(bell, P("1|2")), -0.5)
    prod = DensityMatrix((2, 2), np.diag([1.0, 0, 0, 0]))
    assert ppt_check(prod, P("1|2")) >= -1e-12


def test_complement_state_is_ppt_everywhere(rho6):
    for text in ("1|2,3", "2|1,3", "3|1,2"):
        assert ppt_check(rho6, P(text)) >= -1e-9


def test_pt_across_permuted_bipartition_matches_in_place_oracle():
    rng = np.random.default_rng(3)
    rho = DensityMatrix((3, 2, 2), random_density(rng, 12))
    for party in range(3):
        others = ",".join(str(q + 1) for q in range(3) if q != party)
        got = ppt_check(rho, P(f"{party + 1}|{others}"))
        want = np.linalg.eigvalsh(pt_oracle(rho.matrix, (3, 2, 2), party)).min()
        assert abs(got - want) < 1e-12


def test_ppt_needs_bipartition(rho6):
    with pytest.raises(EntanglementError):
        ppt_check(rho6, P("1|2|3"))


# -- product completion ----------------------------------------------------------------------


def test_complete_empty_two_qubit_set():
    s = complete_product_basis(StateSet((2, 2), [], "empty"))
    assert len(s) == 4 and verify_set(s).complete


@pytest.mark.parametrize("text,dims", [("1,2|3", (6, 2)), ("1,3|2", (6, 2))])
@pytest.mark.parametrize("seed", [0, 1, 7])
def test_completion_of_six_state_set(text, dims, seed):
    cg = coarse_grain(six_state_set(), P(text))
    assert cg.dims == dims
    done = complete_product_basis(cg, seed=seed)
    assert len(done) == 12
    assert done.labels[6:] == [f"c{k}" for k in range(1, 7)]
    assert verify_set(done).complete


def test_completion_budget_exhausted():
    cg = coarse_grain(six_state_set(), P("1,2|3"))
    with pytest.raises(CompletionError):
        complete_product_basis(cg, budget=0)


def test_completion_rejects_bad_input():
    with pytest.raises(EntanglementError):
        complete_product_basis(six_state_set())
    with pytest.raises(EntanglementError):
        complete_product_basis(coarse_grain(eq2_set(), P("1|2,3")))


def test_separability_certificate_reconstructs(rho6):
    for text in ("1,2|3", "1,3|2"):
        cert = separability_certificate(six_state_set(), P(text))
        assert cert.reconstruction_residual <= 1e-10
        assert np.isclose(sum(cert.weights), 1)
        d = cert.to_dict()
        assert d["kind"] == "separable" and len(d["decomposition"]) == 6


# -- the full report --------------------------------------------------------------------------


def test_distribution_report():
    rep = distribution_report()
    assert rep.success
    assert rep.final.verdict == "PPT-entangled"
    assert abs(rep.final.witness_min_eig - WITNESS_ROTATED) <= 1e-12
    d = rep.to_dict()
    assert d["E_fin"]["kind"] == "ppt-entangled" and d["E_in"]["bipartition"] == "1,3|2"


def test_distribution_report_identity_rotation_is_undetected():
    rep = distribution_report(u=np.eye(3))
    assert rep.final.verdict == "PPT-undetected" and not rep.success


def test_distribution_report_needs_right_dims():
    with pytest.raises(EntanglementError):
        distribution_report(bennett_qutrit_basis())
