"""
Runtime configuration.

Values come from the process environment, after `.env.local` in the project
root has been loaded with python-dotenv (see env.example).
"""

import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field

project_root = Path(__file__).parent.parent.parent


class Settings(BaseModel):
    """Toolkit settings resolved from the environment."""

    cache_dir: Path = Field(
        ...,
        description="Root directory for cached frame files"
    )

    log_level: str = Field(
        default="WARNING",
        description="Log level used by the command-line tool"
    )

    sic_restarts: int = Field(
        default=64,
        ge=1,
        description="Default restart budget for the SIC fiducial search"
    )

    rotation_seeds: int = Field(
        default=16,
        ge=0,
        description="Random rotation seeds tried next to the identity rotation"
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Load settings once per process.

    Returns:
        Settings built from .env.local and the environment
    """
    load_dotenv(project_root / '.env.local')

    cache_dir = os.getenv('SNWIT_CACHE_DIR', str(Path.home() / '.cache' / 'snwit'))
    return Settings(
        cache_dir=Path(cache_dir).expanduser(),
        log_level=os.getenv('SNWIT_LOG_LEVEL', 'WARNING').upper(),
        sic_restarts=int(os.getenv('SNWIT_SIC_RESTARTS', '64')),
        rotation_seeds=int(os.getenv('SNWIT_ROTATION_SEEDS', '16')),
    )
