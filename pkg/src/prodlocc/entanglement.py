"""Bound-entanglement distribution from an incomplete orthogonal product set.

The mixed state is the normalised projector onto the orthocomplement of
the set.  Across a cut with a qubit on one side the set extends to a full
orthogonal product basis, which yields an explicit separable
decomposition; across the qutrit cut the state is PPT, and the Choi map
composed with a unitary rotation exposes its entanglement.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import prod

import numpy as np

from .partitions import Partition, coarse_grain
from .states import ORTHO_TOL, ProductState, StateSet, six_state_set, verify_set
from .tensor import (
    HERMITIAN_TOL,
    is_hermitian,
    min_eigenvalue,
    null_space,
    partial_transpose,
)

log = logging.getLogger(__name__)

WITNESS_TOL = 1e-9


class EntanglementError(ValueError):
    pass


class CompletionError(RuntimeError):
    """No product completion was found within the search budget."""


@dataclass(frozen=True)
class DensityMatrix:
    dims: tuple
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        m = np.asarray(self.matrix, dtype=complex)
        n = prod(self.dims)
        if m.shape != (n, n):
            raise EntanglementError(f"matrix shape {m.shape} does not match dims {self.dims}")
        object.__setattr__(self, "matrix", m)

    def check(self, tol=HERMITIAN_TOL):
        m = self.matrix
        return (
            is_hermitian(m, tol)
            and abs(np.trace(m) - 1) <= tol
            and min_eigenvalue(m) >= -tol
        )


def permute_parties(rho, dims, order):
    """Reorder the tensor factors of an operator; ``order`` lists 0-based parties."""
    dims = tuple(dims)
    m = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    t = t.transpose(list(order) + [m + i for i in order])
    n = prod(dims)
    return t.reshape(n, n)


def as_bipartite(rho, p):
    """``rho`` reordered so the parties of each block are contiguous, plus the two block dims."""
    if p.k != 2:
        raise EntanglementError(f"{p} is not a bipartition")
    p.validate(len(rho.dims))
    order = [q - 1 for b in p.blocks for q in b]
    dims = tuple(prod(rho.dims[q - 1] for q in b) for b in p.blocks)
    return permute_parties(rho.matrix, rho.dims, order), dims


def complement_mixed_state(s):
    """Normalised projector onto the orthocomplement of an orthogonal set."""
    d = prod(s.dims)
    n = len(s)
    if n >= d:
        raise EntanglementError(f"{s.name}: set spans the whole space, complement is empty")
    v = s.vectors()
    proj = v.T @ v.conj() if n else np.zeros((d, d), dtype=complex)
    return DensityMatrix(s.dims, (np.eye(d) - proj) / (d - n))


# -- positive map witness --------------------------------------------------------------


def choi_map(a):
    """The Choi map on 3x3 matrices."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (3, 3):
        raise EntanglementError(f"Choi map acts on 3x3 matrices, got shape {a.shape}")
    out = -a.copy()
    out[0, 0] = a[0, 0] + a[1, 1]
    out[1, 1] = a[1, 1] + a[2, 2]
    out[2, 2] = a[2, 2] + a[0, 0]
    return out / 2


def eq8_unitary():
    """Rotation by 60 degrees in the ``|0>,|1>`` plane, fixing ``|2>``."""
    r = np.sqrt(3) / 2
    return np.array([[0.5, r, 0], [-r, 0.5, 0], [0, 0, 1]], dtype=complex)


def choi_witness_operator(rho, u=None):
    """``(Λ ⊗ I)[(U ⊗ I) ρ (U ⊗ I)†]`` with ``Λ`` acting on the first (qutrit) party."""
    if rho.dims[0] != 3:
        raise EntanglementError(f"first party must be a qutrit, got dimension {rho.dims[0]}")
    u = eq8_unitary() if u is None else np.asarray(u, dtype=complex)
    if u.shape != (3, 3) or np.max(np.abs(u @ u.conj().T - np.eye(3))) > HERMITIAN_TOL:
        raise EntanglementError("U must be a 3x3 unitary")
    rest = prod(rho.dims[1:])
    big_u = np.kron(u, np.eye(rest))
    m = big_u @ rho.matrix @ big_u.conj().T
    blk = m.reshape(3, rest, 3, rest).transpose(0, 2, 1, 3)  # blk[k, l] = block (k, l)
    out = -blk.copy()
    out[0, 0] = blk[0, 0] + blk[1, 1]
    out[1, 1] = blk[1, 1] + blk[2, 2]
    out[2, 2] = blk[2, 2] + blk[0, 0]
    return (out / 2).transpose(0, 2, 1, 3).reshape(3 * rest, 3 * rest)


def choi_witness_min_eig(rho, u=None):
    """Minimum eigenvalue of the rotated Choi witness; negative means entangled across the qutrit cut."""
    return min_eigenvalue(choi_witness_operator(rho, u))


def ppt_check(rho, p):
    """Minimum eigenvalue of the partial transpose across the bipartition ``p``."""
    m, dims = as_bipartite(rho, p)
    return min_eigenvalue(partial_transpose(m, dims, "first"))


# -- product completion and separable decompositions ---------------------------------


def _ray_key(v, digits=9):
    v = v / np.linalg.norm(v)
    k = int(np.flatnonzero(np.abs(v) > 1e-6)[0])
    v = v * abs(v[k]) / v[k]
    return tuple(np.round(v.real, digits)) + tuple(np.round(v.imag, digits))


def complete_product_basis(s, seed=0, budget=10_000, tol=ORTHO_TOL):
    """Extend orthogonal product states of ``C^2 ⊗ C^d`` (either order) to a full product basis.

    A qubit-side ray ``a`` is chosen from the qubit factors already present,
    their orthocomplements, and finally seeded random rays.  All product
    states ``|a>|b>`` orthogonal to the set then have ``b`` in a null space
    that is added in one step.  Dead ends backtrack until ``budget``
    candidate trials are used up.
    """
    if s.n_parties != 2 or 2 not in s.dims:
        raise EntanglementError(f"need a two-party set with a qubit side, got dims {s.dims}")
    if not verify_set(s, tol).orthogonal:
        raise EntanglementError(f"{s.name}: input states are not orthogonal")
    q = 0 if s.dims[0] == 2 else 1
    o = 1 - q
    d = s.dims[o]
    target = 2 * d
    rng = np.random.default_rng(seed)
    base = [(st.normalized_factors()[q], st.normalized_factors()[o]) for st in s.states]
    trials = 0

    def candidates(cur):
        seen, out = set(), []
        for a, _ in cur:
            for r in (a, np.array([-np.conj(a[1]), np.conj(a[0])])):
                key = _ray_key(r)
                if key not in seen:
                    seen.add(key)
                    out.append(r)
        for _ in range(4):
            r = rng.normal(size=2) + 1j * rng.normal(size=2)
            out.append(r / np.linalg.norm(r))
        if not cur:
            out[:0] = [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
        return out

    def extend(cur):
        nonlocal trials
        if len(cur) == target:
            return cur
        for a in candidates(cur):
            trials += 1
            if trials > budget:
                raise CompletionError(f"{s.name}: no product completion within {budget} trials")
            rows = [b.conj() for x, b in cur if abs(np.vdot(x, a)) > tol]
            ns = null_space(np.array(rows), 1e-8) if rows else np.eye(d, dtype=complex)
            if ns.shape[1] == 0:
                continue
            found = extend(cur + [(a, ns[:, j]) for j in range(ns.shape[1])])
            if found is not None:
                return found
        return None

    done = extend(base)
    if done is None:
        raise CompletionError(f"{s.name}: product completion search exhausted")
    states = list(s.states)
    for k, (a, b) in enumerate(done[len(base):], 1):
        facs = [None, None]
        facs[q], facs[o] = a, b
        states.append(ProductState(facs, f"c{k}"))
    out = StateSet(s.dims, states, f"{s.name}+completion")
    if not verify_set(out, tol).complete:
        raise CompletionError(f"{s.name}: completion is not an orthonormal basis")
    return out


@dataclass(frozen=True)
class SeparabilityCertificate:
    partition: Partition
    weights: tuple
    states: tuple  # ProductState across the two blocks (block order)
    reconstruction_residual: float

    def to_dict(self):
        return {
            "bipartition": str(self.partition),
            "kind": "separable",
            "reconstruction_residual": self.reconstruction_residual,
            "decomposition": [
                {
                    "weight": w,
                    "factors": [[[float(x.real), float(x.imag)] for x in f] for f in st.normalized_factors()],
                }
                for w, st in zip(self.weights, self.states)
            ],
        }

    def matrix(self):
        """``Σ w |π><π|`` in block order."""
        vs = np.array([st.vector() for st in self.states])
        return (vs.T * np.array(self.weights)) @ vs.conj()


def separability_certificate(s, p, seed=0, budget=10_000):
    """Separable decomposition of the complement state of ``s`` across ``p``.

    ``p`` must be a bipartition with a two-dimensional block.  The added
    completion states are orthogonal products spanning the complement, so
    the uniform mixture over them is the state.
    """
    if p.k != 2:
        raise EntanglementError(f"{p} is not a bipartition")
    rho = complement_mixed_state(s)
    cg = coarse_grain(s, p)
    done = complete_product_basis(cg, seed=seed, budget=budget)
    extra = done.states[len(s):]
    w = 1.0 / len(extra)
    cert = SeparabilityCertificate(p, (w,) * len(extra), tuple(extra), 0.0)
    target, _ = as_bipartite(rho, p)
    resid = float(np.max(np.abs(target - cert.matrix())))
    return SeparabilityCertificate(p, cert.weights, cert.states, resid)


# -- the protocol report -----------------------------------------------------------------


@dataclass(frozen=True)
class WitnessReport:
    partition: Partition
    pt_min_eig: float
    witness_min_eig: float
    tol: float = WITNESS_TOL

    @property
    def verdict(self):
        if self.pt_min_eig < -self.tol:
            return "NPT"
        if self.witness_min_eig < -self.tol:
            return "PPT-entangled"
        return "PPT-undetected"

    def to_dict(self):
        kind = {"PPT-entangled": "ppt-entangled", "PPT-undetected": "undetected", "NPT": "npt"}
        return {
            "bipartition": str(self.partition),
            "kind": kind[self.verdict],
            "pt_min_eig": self.pt_min_eig,
            "witness_min_eig": self.witness_min_eig,
        }


@dataclass(frozen=True)
class DistributionReport:
    initial: SeparabilityCertificate  # AC|B
    communicated: SeparabilityCertificate  # C|AB
    final: WitnessReport  # A|BC
    eigenvalues: tuple

    @property
    def success(self):
        return (
            self.initial.reconstruction_residual <= 1e-8
            and self.communicated.reconstruction_residual <= 1e-8
            and self.final.verdict == "PPT-entangled"
        )

    def to_dict(self):
        return {
            "E_in": self.initial.to_dict(),
            "E_com": self.communicated.to_dict(),
            "E_fin": self.final.to_dict(),
            "success": self.success,
        }


def distribution_report(s=None, u=None, seed=0, budget=10_000):
    """Separable across AC|B and C|AB, PPT but witness-detected across A|BC."""
    s = six_state_set() if s is None else s
    if s.dims != (3, 2, 2):
        raise EntanglementError(f"protocol needs dims (3, 2, 2), got {s.dims}")
    rho = complement_mixed_state(s)
    initial = separability_certificate(s, Partition.parse("1,3|2"), seed, budget)
    communicated = separability_certificate(s, Partition.parse("1,2|3"), seed, budget)
    a_bc = Partition.parse("1|2,3")
    final = WitnessReport(a_bc, ppt_check(rho, a_bc), choi_witness_min_eig(rho, u))
    eig = tuple(np.linalg.eigvalsh(rho.matrix).tolist())
    log.debug("distribution report: witness %.6g", final.witness_min_eig)
    return DistributionReport(initial, communicated, final, eig)
