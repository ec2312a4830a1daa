"""Exact Bergman kernel of the symmetrized polydisc and its Kähler geometry."""

from .curves import CurveSpec
from .geometry import (
    bergman_metric_at,
    diastasis_eval,
    gn_membership,
    potential_eval,
    pullback_residual,
)
from .kernel import (
    KernelFormula,
    kernel_closed_form_n2,
    kernel_direct_eval,
    kernel_formula_eval,
    log_kernel_jet,
    rationalize_kernel,
)
from .polyalg import Polynomial, RationalFunction, VariableArena
from .symfun import decompose_symmetric, fiber_roots, symmetrize_point

__version__ = "0.1.0"

__all__ = [
    "CurveSpec",
    "KernelFormula",
    "Polynomial",
    "RationalFunction",
    "VariableArena",
    "bergman_metric_at",
    "decompose_symmetric",
    "diastasis_eval",
    "fiber_roots",
    "gn_membership",
    "kernel_closed_form_n2",
    "kernel_direct_eval",
    "kernel_formula_eval",
    "log_kernel_jet",
    "potential_eval",
    "pullback_residual",
    "rationalize_kernel",
    "symmetrize_point",
]
