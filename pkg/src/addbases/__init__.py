"""Subset sums, sumsets, additive energy and lattice coverings of the unit cube.

Finite abelian groups are products of cyclic groups; F_p^n is Z_p^n.  The
public API re-exported here covers the common entry points; submodules hold
the rest.
"""

from ._version import __version__
from .energy import (
    BoundReport,
    SqrtRational,
    additive_energy,
    best_char0_lower_bound,
    char0_lower_bound,
    char3_extremal_pair,
    character_sum_lower_bound,
    charp_lower_bound,
    energy_sumset_lower_bound,
    independent_star_energy,
    nu_difference,
    sigma_p,
)
from .errors import (
    AddBasesError,
    DeskScaleError,
    FieldTooSmallError,
    GroupMismatchError,
    InconsistentSystemError,
    InstanceError,
    InvariantBreach,
    NotObliqueError,
    SingularMatrixError,
    SynthesisError,
)
from .groups import (
    ElementMultiset,
    ElementSet,
    GroupElement,
    GroupSpec,
    elem_add,
    elem_from_index,
    elem_index,
    elem_neg,
    elem_scale,
    generates,
    group_make,
    subgroup_closure,
    subgroup_index,
    vector_space,
)
from .lattices import (
    BasisSystem,
    BlockLattice,
    IntLattice,
    covering_number,
    example_lattice,
    hermite_normal_form,
    is_p_oblique,
    lattice_from_bases,
    lattice_leq,
    phi_apply,
)
from .linalg import (
    FpMatrix,
    QMatrix,
    rank_of_vectors,
    rowspace_inclusion_solve,
    strict_upper_triangularize,
)
from .sumsets import (
    GrowthTrace,
    basis_threshold,
    char0_sumset_size,
    growth_trace,
    halving_complete,
    is_additive_basis,
    iterated_sumset,
    ruzsa_triangle_check,
    subset_sum_set,
    sumset,
)
from .synthesis import (
    SynthesisCertificate,
    bases_from_lattice,
    build_L_blocks,
    find_A_blocks,
    find_diagonal,
    invertible_combination,
    solve_block_relation,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
