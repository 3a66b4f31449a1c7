from pathlib import Path

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    OUTPUT_DIR: Path = Path("./data/output")
    CACHE_DIR: Path = Path("./data/cache")

    LOG_LEVEL: str = "INFO"
    WORKER_COUNT: int = 4

    # Numeric evaluation
    EVAL_POLE_FLOOR: float = 1e-14
    ON_CURVE_FLOOR: float = 1e-10

    # Fiber roots
    NEWTON_TOLERANCE: float = 1e-12
    NEWTON_MAX_ITER: int = 50
    SHEET_MATCH_TOLERANCE: float = 0.25

    # Quadrature grids
    GRID_NODES_RADIAL: int = 64
    GRID_NODES_ANGULAR: int = 64
    DISCRIMINANT_EXCLUSION_RADIUS: float = 1e-3
    POLAR_LEVELS: int = 3
    POLAR_ANGULAR_OVERSAMPLING: int = 8
    POLAR_BASE_ANGULAR: int = 8
    POLAR_RADIAL_NODES: int = 12
    TARGET_WINDOW_RADIUS: float = 0.35
    BRANCH_WINDOW_RADIUS: float = 0.5
    WINDOW_PLATEAU: float = 0.3
    BRANCH_WINDOW_PLATEAU: float = 0.1
    PN2_GRID_NODES: int = 12
    BALL_ANGULAR_NODES: int = 16

    # Acceptance tolerances
    KOPPELMAN_TOLERANCE: float = 1e-3
    WIRTINGER_TOLERANCE: float = 1e-2
    EXTENSION_TOLERANCE: float = 1e-6
    PN_TOLERANCE: float = 1e-6
    CONVERGENCE_MIN_SLOPE: float = 1.0
    NO_CONVERGENCE_SLOPE: float = 0.2
    CALIBRATION_FACTOR: float = 100.0

    # Global signs used until a self-test records calibrated ones
    CURVE_KERNEL_SIGN: int = 1
    CURVE_PROJECTION_SIGN: int = 1
    PN_SIGN: int = -1

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


settings = Settings()

settings.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
settings.CACHE_DIR.mkdir(parents=True, exist_ok=True)
