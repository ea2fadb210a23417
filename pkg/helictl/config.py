import math

from pydantic_settings import BaseSettings

# Filter cutoff unit -> multiplier to rad/s.
CUTOFF_SCALE = {"rad_s": 1.0, "hz": 2.0 * math.pi}


class Settings(BaseSettings):
    env: str = "development"  # "development" (console logs) | "production" (JSON logs)
    log_level: str = "INFO"

    # Artifacts
    output_dir: str = "out"
    metrics_file: str = ""  # Prometheus textfile path; empty = metrics not written

    # Batch execution
    max_workers: int = 1  # 1 = run scenarios sequentially in-process
    default_seed: int = 0

    # Conventions left open by the model derivation
    gain_convention: str = "torque"  # "torque" | "prescaled"
    filter_cutoff_unit: str = "rad_s"  # "rad_s" | "hz" (literal reading of "40π Hz")

    # Certificate sweeps
    cert_trajectories: int = 100
    cert_horizon_s: float = 60.0
    cert_dt: float = 5e-3

    @property
    def cutoff_scale(self) -> float:
        """Multiplier turning a configured filter cutoff into rad/s."""
        return CUTOFF_SCALE[self.filter_cutoff_unit]

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "env_prefix": "HELICTL_",
        "extra": "ignore",
    }


settings = Settings()
