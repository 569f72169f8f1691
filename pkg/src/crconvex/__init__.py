"""Pseudoconvexity and local convexifiability of polynomial model hypersurfaces in C^2."""

from .algebra import Poly, RationalComplex, hessian_z, laplacian_z, real_hessian
from .convexity import (
    ConvexityVerdict,
    HarmonicCorrection,
    KNClass,
    SearchConfig,
    VerdictKind,
    brute_force_threshold,
    certificate_search,
    gamma_threshold,
    kn_classify,
    min_hessian_on_sphere,
    screen_necessary,
    screen_sufficient,
)
from .errors import (
    ConvergenceError,
    CRConvexError,
    InconsistentReport,
    ModelError,
    ParseError,
    RealityError,
    TransformError,
)
from .levi import levi_form, model_pseudoconvexity, pseudoconvexity_scan
from .model import WeightVector, analyze_model, generalized_model, kn_invariants
from .parser import format_poly, parse
from .report import AnalysisConfig, AnalysisReport, Verdict, analyze, emit_report
from .transform import (
    HoloMap,
    ShiftMap,
    apply_holomorphic,
    apply_shift,
    decompose_delta,
    parse_holomap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
