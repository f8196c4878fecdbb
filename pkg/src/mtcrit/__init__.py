"""Numerical toolkit for the existence criterion of perturbed
Moser-Trudinger extremals: Green/Robin geometry, radial correction
profiles, concentration bubbles, the limit ratio criterion, and the
constrained variational solvers, with a batch CLI front-end."""

from .perturbation import (
    PerturbationFamily,
    FamilyKind,
    AsymptoticData,
    NonAdmissibleError,
    ExponentBudgetError,
    asymptotic_data,
    eval_g,
    eval_H,
    eval_psi_N,
    phi_N,
    log_phi_N,
    g_N,
    xi,
    validate_hypotheses,
)
from .domain import (
    DomainModel,
    Shape,
    RobinReport,
    PoleCoincidenceError,
    DegenerateMaxError,
    first_bessel_zero,
    first_eigenfunction,
    lambda1,
    robin_report,
)
from .profiles import (
    RadialProfile,
    StepFailureError,
    solve_profile,
    laplacian_profile,
    profile_integrals,
    s0_explicit,
)
from .bubble import (
    BubbleSolution,
    ExpansionReport,
    BlowDownError,
    shoot_bubble,
    lambda_from_level,
    verify_expansion,
    verify_source_expansion,
    ladder_reports,
    energy_localization,
)
from .criterion import (
    CriterionReport,
    Verdict,
    Cor2Class,
    ZeroDenominatorError,
    NoLimitError,
    ratio_value,
    closed_form_l,
    limit_l,
    classify,
    cor2_classifier,
    nonasympt_condition,
    ratio_curve_csv,
    DEFAULT_GAMMA_GRID,
)
from .variational import (
    ExtremalRun,
    GridFunction,
    StallError,
    RootFailError,
    moser_functional,
    solve_subcritical,
    lambda_g,
    lambda_g_report,
    step1_testfun,
    model_testfun_energy,
)

__version__ = "1.0.0"

__all__ = [
    "PerturbationFamily", "FamilyKind", "AsymptoticData",
    "NonAdmissibleError", "ExponentBudgetError", "asymptotic_data",
    "eval_g", "eval_H", "eval_psi_N", "phi_N", "log_phi_N", "g_N", "xi",
    "validate_hypotheses",
    "DomainModel", "Shape", "RobinReport", "PoleCoincidenceError",
    "DegenerateMaxError", "first_bessel_zero", "first_eigenfunction",
    "lambda1", "robin_report",
    "RadialProfile", "StepFailureError", "solve_profile",
    "laplacian_profile", "profile_integrals", "s0_explicit",
    "BubbleSolution", "ExpansionReport", "BlowDownError", "shoot_bubble",
    "lambda_from_level", "verify_expansion", "verify_source_expansion",
    "ladder_reports", "energy_localization",
    "CriterionReport", "Verdict", "Cor2Class", "ZeroDenominatorError",
    "NoLimitError", "ratio_value", "closed_form_l", "limit_l", "classify",
    "cor2_classifier", "nonasympt_condition", "ratio_curve_csv",
    "DEFAULT_GAMMA_GRID",
    "ExtremalRun", "GridFunction", "StallError", "RootFailError",
    "moser_functional", "solve_subcritical", "lambda_g", "lambda_g_report",
    "step1_testfun", "model_testfun_energy",
    "__version__",
]
