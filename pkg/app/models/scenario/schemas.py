from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import settings

ScenarioKind = Literal[
    "verify-identities",
    "hefer",
    "kernel",
    "solve",
    "extend",
    "pn-solve",
    "selftest",
]


class GridSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    nodes_radial: int = Field(default=settings.GRID_NODES_RADIAL, ge=2)
    nodes_angular: int = Field(default=settings.GRID_NODES_ANGULAR, ge=4)
    exclusion_radius: float = Field(default=settings.DISCRIMINANT_EXCLUSION_RADIUS, gt=0)
    polar_levels: int = Field(default=settings.POLAR_LEVELS, ge=1)
    polar_oversampling: int = Field(default=settings.POLAR_ANGULAR_OVERSAMPLING, ge=1)
    polar_radial_nodes: int = Field(default=settings.POLAR_RADIAL_NODES, ge=2)

    @classmethod
    def square(
        cls,
        n: int,
        **overrides: Any,
    ) -> "GridSpec":
        """n × n nodes per chart disk."""
        return cls(nodes_radial=n, nodes_angular=n, **overrides)

    @property
    def label(self) -> str:
        return f"{self.nodes_radial}x{self.nodes_angular}"


class ToleranceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    koppelman: float = settings.KOPPELMAN_TOLERANCE
    wirtinger: float = settings.WIRTINGER_TOLERANCE
    extension: float = settings.EXTENSION_TOLERANCE
    pn: float = settings.PN_TOLERANCE


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: ScenarioKind
    curve: Optional[str] = None
    polynomials: list[str] = Field(default_factory=list)
    section: Optional[str] = None
    dimension: int = Field(default=2, ge=1)
    twist: Optional[int] = None
    degree: int = Field(default=0, ge=0)
    weight: Literal["alpha", "beta"] = "alpha"
    manufactured: Literal["smooth", "zero-moment", "unit-moment"] = "smooth"
    grid: GridSpec = Field(default_factory=GridSpec)
    refinements: list[int] = Field(default_factory=lambda: [16, 32, 64])
    targets: list[tuple[float, float]] = Field(default_factory=lambda: [(0.1, 0.05), (-0.2, 0.15)])
    tolerances: ToleranceSpec = Field(default_factory=ToleranceSpec)
    output: Optional[str] = None

    @field_validator("refinements")
    @classmethod
    def _increasing(
        cls,
        value: list[int],
    ) -> list[int]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("refinement levels must increase")
        return value


class Report(BaseModel):
    model_config = ConfigDict(extra="allow")

    scenario: str
    grid: Optional[dict[str, Any]] = None
    passed: bool = True
    residuals: dict[str, Any] = Field(default_factory=dict)
    slopes: dict[str, float] = Field(default_factory=dict)
    sign: dict[str, Any] = Field(default_factory=dict)
    error_estimates: dict[str, float] = Field(default_factory=dict)
    obstruction: Optional[list[list[float]]] = None
    identities: dict[str, Any] = Field(default_factory=dict)
    warnings: list[str] = Field(default_factory=list)
    data: dict[str, Any] = Field(default_factory=dict)

    def fail(
        self,
        message: str,
    ) -> "Report":
        self.passed = False
        self.warnings.append(message)
        return self
