from app.models.scenario import GridSpec, Report, ScenarioConfig, ScenarioKind, ToleranceSpec

__all__ = [
    "GridSpec",
    "Report",
    "ScenarioConfig",
    "ScenarioKind",
    "ToleranceSpec",
]
