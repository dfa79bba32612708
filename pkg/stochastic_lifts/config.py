"""Environment-driven settings."""

import os
from fractions import Fraction
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()


class Settings(BaseModel):
    """Caps and defaults, overridable through the environment or a .env file."""

    section_cap: int = Field(default=10**6, ge=1)
    exact_ball_cap: int = Field(default=24, ge=1)
    relation_config_cap: int = Field(default=2**20, ge=1)
    saw_length_cap: int = Field(default=12, ge=0)
    bk_ground_cap: int = Field(default=20, ge=1, le=20)
    up_set_oracle_cap: int = Field(default=16, ge=1)
    delta_resolution: Fraction = Fraction(1, 64)
    delta_min_resolution: Fraction = Fraction(1, 65536)
    log_level: str = "INFO"
    log_dir: str = "logs"

    model_config = {"arbitrary_types_allowed": True}


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build the settings from environment variables."""
    return Settings(
        section_cap=int(os.getenv("SECTION_CAP", str(10**6))),
        exact_ball_cap=int(os.getenv("EXACT_BALL_CAP", "24")),
        relation_config_cap=int(os.getenv("RELATION_CONFIG_CAP", str(2**20))),
        saw_length_cap=int(os.getenv("SAW_LENGTH_CAP", "12")),
        bk_ground_cap=int(os.getenv("BK_GROUND_CAP", "20")),
        up_set_oracle_cap=int(os.getenv("UP_SET_ORACLE_CAP", "16")),
        delta_resolution=Fraction(os.getenv("DELTA_RESOLUTION", "1/64")),
        delta_min_resolution=Fraction(os.getenv("DELTA_MIN_RESOLUTION", "1/65536")),
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        log_dir=os.getenv("LOG_DIR", "logs"),
    )
