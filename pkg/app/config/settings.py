"""
Application Settings
Environment-based configuration management
"""

import logging
from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables
    """

    # Application
    APP_NAME: str = "nlclaw"
    VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Output
    OUTPUT_DIR: str = "out"

    # Concurrency (0 = serial sweeps)
    NLCLAW_THREADS: int = 0

    class Config:
        env_file = ".env"
        case_sensitive = True


# Create settings instance
settings = Settings()


def ensure_log_directory():
    """
    Create log directory if it doesn't exist
    """
    if settings.LOG_FILE:
        Path(settings.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)


def configure_logging(level: Optional[str] = None):
    """
    Root logger at LOG_LEVEL, plus a file sink when LOG_FILE is set
    """
    handlers = [logging.StreamHandler()]
    if settings.LOG_FILE:
        ensure_log_directory()
        handlers.append(logging.FileHandler(settings.LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


def print_settings():
    """
    Print current settings (for debugging)
    """
    print("\n" + "=" * 60)
    print(f"🔧 {settings.APP_NAME.upper()} CONFIGURATION")
    print("=" * 60)
    print(f"Version: {settings.VERSION}")
    print(f"Log Level: {settings.LOG_LEVEL}")
    print(f"Log File: {settings.LOG_FILE or 'stderr only'}")
    print(f"Output Dir: {settings.OUTPUT_DIR}")
    print(f"Threads: {settings.NLCLAW_THREADS or 'serial'}")
    print("=" * 60 + "\n")
