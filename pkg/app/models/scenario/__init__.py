from app.models.scenario.schemas import GridSpec, Report, ScenarioConfig, ScenarioKind, ToleranceSpec

__all__ = ["GridSpec", "Report", "ScenarioConfig", "ScenarioKind", "ToleranceSpec"]
