"""Configuration: environment settings and TOML defaults."""

import logging
import os
from functools import lru_cache
from pathlib import Path

try:
    import tomli as tomllib  # Python < 3.11
except ImportError:
    import tomllib  # Python >= 3.11

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from discrete_uniformization.core.constants import DEFAULT_SEED
from discrete_uniformization.core.models import GeodesicSolverOptions, SolveOptions, StudyOptions

logger = logging.getLogger(__name__)

CONFIG_PATH = Path(__file__).parent.parent.parent.parent / "config" / "solver.toml"


class Settings(BaseSettings):
    """Environment settings (prefix DU_)."""
    model_config = SettingsConfigDict(env_prefix="DU_")

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, gt=0)
    seed: int = DEFAULT_SEED
    log_level: str = "WARNING"


@lru_cache
def get_settings() -> Settings:
    """Get the cached environment settings."""
    return Settings()


def load_solver_config(path: Path | None = None) -> dict:
    """
    Load solver defaults from TOML.

    Args:
        path: Config file (defaults to config/solver.toml); missing file yields {}

    Returns:
        Parsed TOML document
    """
    config_path = path or CONFIG_PATH
    if not config_path.exists():
        logger.debug(f"No solver config at {config_path}, using built-in defaults")
        return {}

    with open(config_path, "rb") as f:
        return tomllib.load(f)


def default_solve_options(config: dict | None = None) -> SolveOptions:
    """SolveOptions from the [solve] table."""
    config = load_solver_config() if config is None else config
    return SolveOptions(**config.get("solve", {}))


def default_geodesic_options(config: dict | None = None) -> GeodesicSolverOptions:
    """GeodesicSolverOptions from the [geodesic] table."""
    config = load_solver_config() if config is None else config
    return GeodesicSolverOptions(**config.get("geodesic", {}))


def default_study_options(config: dict | None = None) -> StudyOptions:
    """StudyOptions from the [study] table."""
    config = load_solver_config() if config is None else config
    return StudyOptions(**config.get("study", {}))


def torus_presets(config: dict | None = None) -> dict[str, dict[str, float]]:
    """Named torus parameter presets."""
    config = load_solver_config() if config is None else config
    return dict(config.get("presets", {}).get("torus", {}))
