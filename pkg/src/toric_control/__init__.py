"""Toric patches, regular decompositions of lattice configurations and their degenerations."""
from .errors import *  # noqa: F401,F403
from .lattice_geometry import LatticeConfig, Polytope, convex_hull, face_membership, lift
from .subdivision import (
    Decomposition,
    Face,
    Lifting,
    RegularityCertificate,
    certificate_matches,
    certify_regularity,
    regular_decomposition,
    validate_decomposition,
)
from .toric_patch import (
    BinomialRelation,
    PatchSpec,
    bezier_curve,
    check_binomial_relations,
    evaluate,
    relations_from_kernel,
    tensor_patch,
    toric_basis,
    triangle_patch,
)
from .degeneration import (
    ControlSurface,
    DegenerationFamily,
    control_surface,
    convergence_sweep,
    degeneration_weights,
    hausdorff_distance,
    sample,
    support_decay_probe,
)
from .kernels import BACKEND

__version__ = "0.1.0"
