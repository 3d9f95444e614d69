import json

import pytest
from pydantic import ValidationError

from numerics.errors import ConfigViolation
from services.run_config import load_config

ENV = ("ABELIAN_CONFIG", "ABELIAN_DATABASE_URL", "ABELIAN_OUT_DIR", "ABELIAN_SEED")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ENV:
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "paths": {"input": "data/h_star.json", "out_dir": str(tmp_path / "from_file")},
        "tolerances": {"value": 1e-7},
        "transport": {"dt_max": 0.02},
        "bounds": {"c_appendix": 5, "l": 2},
    }))
    return path


def test_defaults_come_from_the_config_file(config_file, tmp_path):
    config = load_config("bounds", {}, config_file)
    assert config.c_appendix == 5
    assert config.l == 2
    assert config.out_dir == tmp_path / "from_file"
    assert config.tolerances.value == pytest.approx(1e-7)
    assert config.tolerances.dt_max == pytest.approx(0.02)
    assert config.input.name == "h_star.json"
    assert config.one_form.monomial_tag == (0, 0)


def test_environment_beats_the_file_and_cli_beats_both(config_file, tmp_path, monkeypatch):
    monkeypatch.setenv("ABELIAN_OUT_DIR", str(tmp_path / "from_env"))
    monkeypatch.setenv("ABELIAN_SEED", "7")
    config = load_config("bounds", {"seed": None}, config_file)
    assert config.out_dir == tmp_path / "from_env"
    assert config.seed == 7
    config = load_config(
        "bounds",
        {"out_dir": str(tmp_path / "from_cli"), "c_appendix": 5000, "tolerance_overrides": {"value": 1e-9}},
        config_file,
    )
    assert config.out_dir == tmp_path / "from_cli"
    assert config.c_appendix == 5000
    assert config.tolerances.value == pytest.approx(1e-9)


def test_base_point_is_parsed(config_file):
    config = load_config("monodromy", {"t0": "0.1 + 0.2j"}, config_file)
    assert config.t0_value == pytest.approx(0.1 + 0.2j)
    with pytest.raises(ValidationError):
        load_config("monodromy", {"t0": "zero"}, config_file)


def test_bad_tolerance_is_rejected(config_file):
    with pytest.raises(ValidationError):
        load_config("analyze", {"tolerance_overrides": {"nope": 1.0}}, config_file)


def test_bad_form_is_rejected(config_file):
    with pytest.raises(ConfigViolation):
        load_config("count-zeros", {"form": "{not json"}, config_file)
    with pytest.raises(ValidationError):
        load_config("count-zeros", {"form": '{"monomial": [0]}'}, config_file)
    config = load_config("count-zeros", {"form": '{"monomial": [1, 0]}'}, config_file)
    assert config.one_form.monomial_tag == (1, 0)


def test_unknown_verify_group_is_rejected(config_file):
    with pytest.raises(ConfigViolation):
        load_config("verify", {"groups": ["nope"]}, config_file)
    assert load_config("verify", {"groups": ["bounds"]}, config_file).groups == ["bounds"]


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigViolation):
        load_config("bounds", {}, tmp_path / "missing.json")
