from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field


class Settings(BaseSettings):
    database_url: str = Field(default="sqlite:///./stflab.db")
    sentry_dsn: Optional[str] = Field(default=None)
    app_env: str = Field(default="development")
    debug: bool = Field(default=False)
    log_level: str = Field(default="INFO")

    wave_lanes: int = Field(default=32, ge=1)
    wave_cols: int = Field(default=8, ge=1)
    wave_rows: int = Field(default=4, ge=1)
    render_chunk_waves: int = Field(default=512, ge=1)
    default_seed: int = Field(default=0)
    output_dir: Path = Field(default=Path("./out"))

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
