"""
Configuration Management
"""
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    PROJECT_NAME: str = "krigmix"

    # Worker cap for the thread pools (KRIG_THREADS); None means CPU count
    THREADS: Optional[int] = None

    # Logging
    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="KRIG_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",  # Ignore extra env vars not defined in Settings
    )


settings = Settings()
