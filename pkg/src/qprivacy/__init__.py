"""Fisher-information privacy analysis for distributed quantum phase sensing."""

__version__ = "0.1.0"

from .bounds import bound_report, crb_scalar, crb_trace, saturable
from .errors import (
    FitDegenerate,
    FormatError,
    InsufficientData,
    InvalidInput,
    InvalidMatrix,
    InvalidModel,
    QPrivacyError,
    RankInstability,
    SingularOutcome,
)
from .fisher import ProbabilityModel, PureStateModel, cfim, qfim_pure, verify_cfim_qfim_order
from .matops import EigenSystem, complement_basis, eigensym, pinv, support_projector
from .privacy import (
    PrivacyReport,
    continuity_probe,
    identifiability_audit,
    invariance_check,
    privacy_quantifier,
)
