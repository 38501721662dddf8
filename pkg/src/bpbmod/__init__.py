"""Bounds on the distance from almost-norming pairs to norming pairs in finite dimensions."""

from .attainment import (
    BpbPoint,
    NormingPair,
    PiDecomposition,
    dist_to_pi,
    dist_to_pi_euclidean,
    l1_sum_witness,
    linf_sum_witness,
    pi_decomposition,
    pi_distances,
)
from .errors import (
    BadParameter,
    BpbError,
    BudgetTooSmall,
    DegeneratePolytope,
    DimensionMismatch,
    InvalidFace,
    InvalidPolytope,
    MeshTooCoarse,
    OutOfDomain,
    SpecParseError,
    UnknownSpace,
    UnsupportedSpace,
    ZeroVector,
)
from .geometry import (
    Face,
    FaceLattice,
    Facet,
    SymmetricPolytope,
    dist_to_face,
    face_conjugate,
    face_lattice,
    hull_facets,
    pairing,
    polar,
)
from .modulus import (
    ModulusEstimate,
    a_set_shift_bound,
    phi_curve,
    phi_lower,
    phi_upper_certified,
    reference_phi,
    spherical_shift_bound,
)
from .spaces import (
    Diamond,
    DirectSum,
    Euclidean,
    Line,
    LpSpace,
    NormedSpace,
    Polytopal,
    catalog,
    dual_norm,
    dual_space,
    norm,
    support_functional,
)
from .squareness import ContainmentReport, SquareWitness, containment_check, squareness_defect

__version__ = "0.1.0"
