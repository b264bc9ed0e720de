"""Hidden mirror symmetries of corner-deformed rectangular cavities.

Degenerate Dirichlet modes of a rational rectangle, their parity cases, the
first-order splitting under a corner deformation, mirror-partner and Berry-sign
checks, and a full-order finite-difference reference solver.
"""
from .kernels import BACKEND
from .perturb import (
    DeformationParams,
    LoopSpec,
    RotatedParams,
    build_h1,
    check_partner,
    holonomy,
    perturbation_matrix,
    physical_slopes,
    predict_partner,
    shift_matrix,
    split_levels,
    x_eigenvalue,
)
from .spectrum import (
    CavityShape,
    DegenerateClass,
    ModeIndex,
    classify_class,
    enumerate_all_classes,
    enumerate_class,
    mode_eigenvalue,
    select_modes,
    verify_case5_absence,
)

__version__ = "0.1.0"
