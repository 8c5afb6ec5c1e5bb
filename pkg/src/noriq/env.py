from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Mapping, MutableMapping, Optional

from dotenv import dotenv_values

DEFAULT_TEMPLATES_DIR = Path(__file__).resolve().parents[2] / "templates"
DEFAULT_MAX_SIMPLICES = 150


class ConfigurationError(RuntimeError):
    """Raised when the environment configuration is invalid."""


@dataclass(frozen=True)
class Settings:
    seed: int = 0
    templates_dir: Path = DEFAULT_TEMPLATES_DIR
    max_simplices: int = DEFAULT_MAX_SIMPLICES


def _load_dotenv(path: Path) -> Dict[str, str]:
    if not path.exists():
        raise ConfigurationError(f"Environment file {path} does not exist")
    values = dotenv_values(str(path))
    return {k: v for k, v in values.items() if v is not None}


def load_environment(
    env_path: Optional[Path] = None,
    *,
    search_paths: Iterable[Path] = (Path(".env"),),
) -> Dict[str, str]:
    """
    Load environment values from an optional .env file and the process env.

    Precedence (lowest to highest):
      1. .env files found in *search_paths* (first existing file wins)
      2. values from *env_path* if provided
      3. process environment variables
    """

    merged: Dict[str, str] = {}

    for candidate in search_paths:
        candidate_path = Path(candidate)
        if not candidate_path.is_absolute():
            candidate_path = Path.cwd() / candidate_path
        if candidate_path.exists():
            merged.update(_load_dotenv(candidate_path))
            break

    if env_path:
        target = env_path if env_path.is_absolute() else Path.cwd() / env_path
        merged.update(_load_dotenv(target))

    for key, value in os.environ.items():
        if isinstance(value, str):
            merged[key] = value

    return merged


def apply_overrides(
    env: MutableMapping[str, str],
    overrides: Mapping[str, Optional[str]],
) -> Dict[str, str]:
    """Return a new dict with *overrides* applied on top of *env*."""
    merged = dict(env)
    for key, value in overrides.items():
        if value is None:
            continue
        merged[key] = value
    return merged


def _int_setting(env: Mapping[str, str], key: str, default: int, *, minimum: int = 0) -> int:
    raw = env.get(key)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        raise ConfigurationError(f"{key} must be an integer, got '{raw}'") from None
    if value < minimum:
        raise ConfigurationError(f"{key} must be at least {minimum}")
    return value


def resolve_settings(
    env: Mapping[str, str],
    *,
    seed: Optional[int] = None,
    templates_dir: Optional[Path] = None,
) -> Settings:
    """NORIQ_SEED wins over the *seed* flag; *templates_dir* wins over NORIQ_TEMPLATES."""
    fallback_seed = 0 if seed is None else seed
    resolved_seed = _int_setting(env, "NORIQ_SEED", fallback_seed)
    if templates_dir is None:
        raw = env.get("NORIQ_TEMPLATES")
        templates_dir = Path(raw) if raw else DEFAULT_TEMPLATES_DIR
    if not templates_dir.is_dir():
        raise ConfigurationError(f"Templates directory {templates_dir} does not exist")
    cap = _int_setting(env, "NORIQ_MAX_SIMPLICES", DEFAULT_MAX_SIMPLICES, minimum=1)
    return Settings(seed=resolved_seed, templates_dir=templates_dir, max_simplices=cap)
