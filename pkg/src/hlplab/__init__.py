"""Sharp weak-type constants for Hardy-Littlewood-Polya type operators on radial functions."""
from .constants import (FormulaId, SharpConstant, Thm21Pair, holder_factor_C, kernel_constant_M,
                        thm21_constant, thm22_constant, thm31_bound)
from .errors import (DivergenceError, DomainError, HLPLabError, HypothesisWarning, IntegrandError,
                     KernelAdmissibilityError, UnboundedNormError, UnsupportedShapeError)
from .extremals import (ExtremalFamily, FamilyId, ProbeConfig, ProbeResult, SpaceParams,
                        closed_form_image, hlp_ratio, make_extremal, sharpness_probe)
from .norms import (DistributionCurve, Exactness, WeakNormResult, distribution_curve, strong_norm,
                    weak_norm, weak_norm_detail, weak_norm_numeric)
from .operators import (KernelForm, RadialKernel, apply_hlp, apply_hlp_symbolic, apply_kernel_operator,
                        hardy_kernel, hilbert_kernel, hlp_kernel, kernel_from_name, kernel_image,
                        kernel_operator_integral)
from .quad import (IntegralResult, QuadratureConfig, TailMap, integrate_1d, integrate_mc,
                   integrate_nested)
from .radialfn import PiecewisePowerLog, PowerLogTerm, format_piecewise, parse_piecewise, power_cutoff
from .spaces import (ConjugateExponent, HypothesisReport, SpaceSpec, check_thm21_hypotheses,
                     check_thm31_hypotheses, conjugate, unit_sphere_area)

__version__ = "0.1.0"

__all__ = ["FormulaId", "SharpConstant", "Thm21Pair", "holder_factor_C", "kernel_constant_M",
           "thm21_constant", "thm22_constant", "thm31_bound", "DivergenceError", "DomainError",
           "HLPLabError", "HypothesisWarning", "IntegrandError", "KernelAdmissibilityError",
           "UnboundedNormError", "UnsupportedShapeError", "ExtremalFamily", "FamilyId",
           "ProbeConfig", "ProbeResult", "SpaceParams", "closed_form_image", "hlp_ratio",
           "make_extremal", "sharpness_probe", "DistributionCurve", "Exactness", "WeakNormResult",
           "distribution_curve", "strong_norm", "weak_norm", "weak_norm_detail",
           "weak_norm_numeric", "KernelForm", "RadialKernel", "apply_hlp", "apply_hlp_symbolic",
           "apply_kernel_operator", "hardy_kernel", "hilbert_kernel", "hlp_kernel",
           "kernel_from_name", "kernel_image", "kernel_operator_integral", "IntegralResult",
           "QuadratureConfig", "TailMap", "integrate_1d", "integrate_mc", "integrate_nested",
           "PiecewisePowerLog", "PowerLogTerm", "format_piecewise", "parse_piecewise",
           "power_cutoff", "ConjugateExponent", "HypothesisReport", "SpaceSpec",
           "check_thm21_hypotheses", "check_thm31_hypotheses", "conjugate", "unit_sphere_area"]
