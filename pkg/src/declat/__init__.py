"""declat: discrete exterior calculus on irregular tetrahedral lattices.

Oriented simplicial complexes with exact integer incidence structure,
lowest-order Whitney forms, material-weighted discrete Hodge stars and
their sparse approximate inverses, symplectic leapfrog Maxwell evolution
with perfectly conducting walls, frequency-domain absorbing layers by
metric complexification, exactly charge-conserving particle coupling, and
executable audits of the combinatorial, reciprocity, and metric
consistency properties a lattice discretization must satisfy.
"""

from .mesh import (
    MeshError,
    SimplicialComplex,
    BoundaryClassification,
    EulerReport,
    classify_boundary,
    betti_numbers,
    euler_audit,
    load_mesh,
    parse_mesh,
    write_mesh,
)
from .dual import DualComplex, barycentric_dual
from .whitney import (
    AnalyticForm,
    BarycentricPoint,
    Cochain,
    OutsideMeshError,
    WhitneyBasis,
    barycentric,
    de_rham,
    interpolate,
    interpolate_at_points,
    verify_coboundary,
    verify_partition_duality,
    whitney_eval,
)
from .hodge import (
    MaterialMap,
    SparsityPattern,
    assemble_galerkin_dual,
    assemble_hodge,
    check_spd,
    dual_pairing_check,
    spai_inverse,
)
from .maxwell import (
    DiscreteCodifferential,
    FieldState,
    MaxwellOperators,
    SimulationConfig,
    apply_pec,
    ampere_step,
    compare_inverse_modes,
    eigenmodes,
    faraday_step,
    hamiltonian,
    leapfrog_run,
    stable_timestep,
)
from .pml import (
    ComplexHodge,
    StretchProfile,
    assemble_stretched,
    harmonic_solve,
    reflection_sweep,
    stretch_tensor,
)
from .pic import (
    Particle,
    ScatterResult,
    gather,
    push,
    scatter_charge,
    scatter_current,
    verify_conservation,
)
from .dof import CorrespondenceTable, DofReport, dof_audit, hodge_correspondence
from .audit import AuditReport, audit_first_kind, audit_hodge, audit_second_kind, run_full_audit
from . import generators

__version__ = "0.1.0"
