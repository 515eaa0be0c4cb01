import logging
import sys
from pathlib import Path

import structlog
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    log: str = "INFO"
    log_json: bool = True
    parallelism: int = 1
    output_dir: str = "results"

    model_config = SettingsConfigDict(
        env_prefix="POISONCTL_",
        env_file=str(Path(__file__).resolve().parent / ".env"),
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()


def configure_logging(level: str | None = None, json_output: bool | None = None) -> None:
    level_name = (level or settings.log).upper()
    numeric_level = logging.getLevelName(level_name)
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO

    use_json = settings.log_json if json_output is None else json_output
    renderer = structlog.processors.JSONRenderer() if use_json else structlog.dev.ConsoleRenderer()

    structlog.configure(
        processors=[
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.add_log_level,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
