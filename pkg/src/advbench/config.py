"""Configuration management using environment variables."""

from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from ATTACKBENCH_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="ATTACKBENCH_",
        env_file=str(Path("~/.config/advbench/.env").expanduser()),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Benchmark
    threads: int = 1
    budget: int = 2000
    search_steps: int = 10

    # Synthetic data and zoo
    dataset_size: int = 500
    dataset_dim: int = 2
    dataset_classes: int = 3
    adv_epsilon: float = 0.05
    adv_steps: int = 10

    log_level: str = "WARNING"

    # Leaderboard store lock
    lock_attempts: int = 5
    lock_wait_max: float = 2.0

    def worker_count(self, requested: Optional[int] = None) -> int:
        """Clamp a requested pool size to the configured cap."""
        cap = max(1, self.threads)
        if requested is None:
            return cap
        return max(1, min(requested, cap))


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get cached settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def load_settings_from_env_file(env_file: Path) -> Settings:
    """Load settings from a specific env file."""
    global _settings
    _settings = Settings(_env_file=env_file)
    return _settings
