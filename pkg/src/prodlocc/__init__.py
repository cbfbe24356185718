"""LOCC distinguishability of multipartite orthogonal product states.

Builds the product-state families, analyses them across party partitions
(protocol trees versus orthogonality-preserving-measurement certificates),
and runs the bound-entanglement distribution check.
"""

from .entanglement import (
    DensityMatrix,
    choi_map,
    choi_witness_min_eig,
    complement_mixed_state,
    complete_product_basis,
    distribution_report,
    eq8_unitary,
    ppt_check,
    separability_certificate,
)
from .locc import (
    analyze_partition,
    classify_tripartite,
    distinguishability_search,
    indistinguishability_certificate,
    opm_constraints,
    opm_triviality,
    replay_protocol,
    resource_placement_analysis,
    sweep,
    threshold_scan,
)
from .partitions import (
    Partition,
    apply_relabeling,
    coarse_grain,
    enumerate_k_partitions,
    ray_set_equal,
)
from .states import (
    ProductState,
    StateSet,
    bennett_qutrit_basis,
    bennett_subset_S,
    bennett_three_qubit_basis,
    computational_basis,
    eq2_set,
    eq3_set,
    eq5_basis,
    cyclic_tripartite_set,
    halder_tripartite_set,
    six_state_set,
    verify_set,
)
from .tensor import hermitian_eigen, kron, partial_transpose, solve_hermitian_constraints

__version__ = "0.1.0"
