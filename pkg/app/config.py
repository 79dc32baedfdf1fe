"""Application configuration using Pydantic Settings."""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix QMASK_)."""

    model_config = SettingsConfigDict(
        env_prefix="QMASK_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Runtime
    debug: bool = False
    workers: int = 4  # thread pool for per-setting / per-trial sampling

    # Sampling defaults (published hardware runs used 8192 shots, ten trials)
    seed: int = 0
    shots: int = 8192
    trials: int = 10
    ghz_theta_grid: int = 9

    # Tolerance profiles
    exact_tolerance: float = 1e-9
    experimental_tolerance: float = 0.05  # max-norm
    fidelity_floor: float = 0.98

    # Linear algebra
    hermiticity_tolerance: float = 1e-9
    eig_tolerance: float = 1e-12
    eig_max_sweeps: int = 100

    # Negative eigenvalues admitted before fidelity
    psd_clamp_bound: float = 1e-3  # shot-noise reconstructions
    printed_clamp_bound: float = 0.05  # matrices transcribed from print

    # Fixtures ("" = bundled app/data/fixtures.json)
    fixtures_path: str = ""

    # Report cache for the HTTP service ("" = memory only)
    redis_url: str = ""
    cache_ttl_report: int = 3600  # 1 hour
    rate_limit_requests: int = 100  # per client per minute


@lru_cache
def get_settings() -> Settings:
    """Return cached settings instance (singleton pattern)."""
    return Settings()


settings = get_settings()
