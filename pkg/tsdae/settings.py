from pathlib import Path

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    app_env: str = "dev"
    log_level: str = "WARNING"
    # Numerical tolerances (problem files and --tol.NAME flags override these)
    rank_tol: float = 1e-9
    residual_tol: float = 1e-8
    invariance_tol: float = 1e-8
    step_tol: float = 1e-12
    fixtures_dir: Path = Path(__file__).resolve().parents[1] / "fixtures"
    # selftest
    selftest_seed: int = 20240531
    selftest_random_instances: int = 200
    selftest_level1_instances: int = 50
    selftest_oracle_instances: int = 50
    selftest_workers: int = 4

    class Config:
        env_file = ".env"
        env_prefix = "TSDAE_"


settings = Settings()
