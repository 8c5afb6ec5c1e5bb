from pathlib import Path

import pytest

from src.noriq.env import (
    DEFAULT_MAX_SIMPLICES,
    DEFAULT_TEMPLATES_DIR,
    ConfigurationError,
    apply_overrides,
    load_environment,
    resolve_settings,
)


def test_load_environment_precedence(tmp_path: Path, monkeypatch):
    base_env = tmp_path / ".env"
    base_env.write_text("NORIQ_SEED=1\nNORIQ_MAX_SIMPLICES=40\n")

    override_env = tmp_path / "override.env"
    override_env.write_text("NORIQ_MAX_SIMPLICES=60\n")

    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("NORIQ_TEMPLATES", "system")

    values = load_environment(override_env, search_paths=[Path(".env")])

    assert values["NORIQ_SEED"] == "1"
    assert values["NORIQ_MAX_SIMPLICES"] == "60"
    assert values["NORIQ_TEMPLATES"] == "system"


def test_load_environment_missing_file(tmp_path: Path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigurationError):
        load_environment(tmp_path / "absent.env", search_paths=[])


def test_apply_overrides_skips_none():
    merged = apply_overrides({"A": "1", "B": "2"}, {"A": None, "B": "3"})
    assert merged == {"A": "1", "B": "3"}


def test_resolve_settings_defaults():
    settings = resolve_settings({})
    assert settings.seed == 0
    assert settings.templates_dir == DEFAULT_TEMPLATES_DIR
    assert settings.max_simplices == DEFAULT_MAX_SIMPLICES


def test_env_seed_wins_over_flag():
    assert resolve_settings({}, seed=5).seed == 5
    assert resolve_settings({"NORIQ_SEED": "9"}, seed=5).seed == 9


def test_templates_from_env(tmp_path: Path):
    settings = resolve_settings({"NORIQ_TEMPLATES": str(tmp_path)})
    assert settings.templates_dir == tmp_path
    with pytest.raises(ConfigurationError):
        resolve_settings({"NORIQ_TEMPLATES": str(tmp_path / "missing")})


@pytest.mark.parametrize(
    "env",
    [
        {"NORIQ_SEED": "abc"},
        {"NORIQ_SEED": "-1"},
        {"NORIQ_MAX_SIMPLICES": "0"},
    ],
)
def test_invalid_integer_settings(env):
    with pytest.raises(ConfigurationError):
        resolve_settings(env)
