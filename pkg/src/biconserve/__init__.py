"""Rotational surfaces in E4 with parallel normalized mean curvature.

Construction of the family (profile ODE, closed-form profile curve,
rotational immersion) together with an independent jet-based verification
of every claimed geometric property.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BiconserveError,
    BasePointMismatchError,
    DegenerateSpanError,
    DomainError,
    InvalidParamsError,
    NearTurningError,
    NoAdmissibleBranchError,
    OutOfChartError,
)
from .jets import Jet, extract_partial, jet_func, jet_variable  # noqa: F401
from .linalg import eig_sym2, gram_schmidt, rigid_align  # noqa: F401
from .meancurv import (  # noqa: F401
    MeanCurvatureSolution,
    ModelParams,
    conserved_quantity,
    f_turning,
    fprime_rhs,
    radicand,
    solve_f,
)
from .profile import (  # noqa: F401
    ProfileCurve,
    ProfileModel,
    closed_form_profile,
    frenet_integrate,
    kappa_of,
    tau_of,
)
from .geometry import (  # noqa: F401
    ImmersionJet,
    PointGeometry,
    biconservativity_residual,
    build_rotational_surface,
    pnmcv_residual,
    point_geometry,
    shape_operator_residuals,
    sphere_immersion,
    structure_residuals,
    verification_grid,
)
from .report import CheckResult, VerificationReport  # noqa: F401
