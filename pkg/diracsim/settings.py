from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    threads: int = Field(default=1, ge=1)
    fft_backend: Literal["numpy", "scipy"] = "scipy"
    log_level: str = "INFO"
    log_json: bool = True
    enable_s4rk: bool = True
    metrics_file: str | None = None

    model_config = SettingsConfigDict(
        env_prefix="DIRAC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
