"""Shared settings configuration."""

from typing import Optional

from pydantic import ByteSize
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""
    model_config = SettingsConfigDict(env_prefix="RAC_GRID_")

    # Logging
    log_level: str = "INFO"
    log_format: str = "{time:YYYY-MM-DD HH:mm:ss} | {level} | {message}"

    # Output bundle directory (overridden by --out)
    output_dir: str = "rac-grid-out"

    # Data model defaults (scenario files may override per run)
    file_size: ByteSize = ByteSize(1_000_000_000)
    few_percent: float = 0.05
    on_demand_min_fraction: float = 0.10

    # Storage and database proxy defaults
    proxy_latency: float = 0.01
    tape_mount_latency: float = 60.0
    tape_stream_rate: ByteSize = ByteSize(30_000_000)

    # Planning defaults
    growth_rate: ByteSize = ByteSize(10**15)
    cpu_requirement_ghz: float = 4000.0

    # Tracing configuration
    otlp_endpoint: Optional[str] = None
    trace_console: bool = False
    service_name: str = "rac-grid"
    environment: str = "development"


# Global settings instance
settings = Settings()
