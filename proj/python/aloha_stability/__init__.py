import json

from . import _core
from ._core import (
    BudgetError,
    analytic_drift,
    constraint_values,
    exact_drift,
    figure_vertices,
    kernel_lemma21,
    lyapunov_value,
    symmetric_sup_lambda,
    transience_drift,
)

__version__ = _core.__version__

__all__ = [
    "BudgetError",
    "analytic_drift",
    "classify",
    "constraint_values",
    "dominance",
    "drift_report",
    "exact_drift",
    "figure_vertices",
    "kernel_lemma21",
    "lyapunov_value",
    "simulate",
    "symmetric_sup_lambda",
    "transience_drift",
]


def classify(p, lam, mode="default", tol=0.0):
    return json.loads(_core.classify_json(list(p), list(lam), mode, tol))


def simulate(p, lam, steps, seed=1, system="original", q0=None):
    return json.loads(_core.simulate_json(list(p), list(lam), steps, seed, system, q0))


def dominance(p, lam, steps, seed=1, q0=None):
    return json.loads(_core.dominance_json(list(p), list(lam), steps, seed, q0))


def drift_report(p, lam, cross_check_cap=2):
    return json.loads(_core.drift_report_json(list(p), list(lam), cross_check_cap))
