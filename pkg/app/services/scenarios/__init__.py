from app.services.scenarios.pipeline import ScenarioPipeline, resolve_curve, run_scenario, scenario_context
from app.services.scenarios.suite import (
    fermat_regression,
    hefer_corpus,
    identity_checks,
    random_homogeneous,
    verify_suite,
)

__all__ = [
    "ScenarioPipeline",
    "fermat_regression",
    "hefer_corpus",
    "identity_checks",
    "random_homogeneous",
    "resolve_curve",
    "run_scenario",
    "scenario_context",
    "verify_suite",
]
