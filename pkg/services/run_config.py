import json
import logging
import os
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, field_validator

from numerics.cycles import OneForm
from numerics.errors import ConfigViolation
from numerics.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

ROOT_DIR = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG = ROOT_DIR / "config.json"
TOLERANCE_SECTIONS = ("tolerances", "transport", "quadrature", "zerocount")
COMMANDS = ("analyze", "monodromy", "count-zeros", "bounds", "verify")


class OvalSpec(BaseModel):
    """Real oval of the source polynomial: level and a seed point near it"""

    level: float = -2.5
    seed: tuple[float, float] = (1.0, 1.0)


class SectorSpec(BaseModel):
    psi_fraction: float = 0.25
    l: int = 1
    theta0: Optional[float] = None

    @field_validator("psi_fraction")
    @classmethod
    def check_psi(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError(f"psi_fraction must lie in (0, 1), got {v}")
        return v

    @field_validator("l")
    @classmethod
    def check_l(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"l must be at least 1, got {v}")
        return v


class CircleSpec(BaseModel):
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.5

    @field_validator("radius")
    @classmethod
    def check_radius(cls, v: float) -> float:
        if v <= 0:
            raise ValueError(f"Circle radius must be positive, got {v}")
        return v


class RunConfig(BaseModel):
    """Resolved settings of one CLI invocation"""

    command: Literal["analyze", "monodromy", "count-zeros", "bounds", "verify"]
    input: Path
    out_dir: Path
    t0: Optional[str] = None
    seed: int = 0
    c_appendix: int = 5000
    l: int = 1
    tolerance_overrides: dict[str, float] = {}
    oval: OvalSpec = OvalSpec()
    form: dict[str, Any] = {"monomial": [0, 0]}
    region: Literal["sigma", "sector", "circle"] = "sigma"
    sector: SectorSpec = SectorSpec()
    circle: CircleSpec = CircleSpec()
    database_url: str = "sqlite:///./abelian_runs.db"
    groups: list[str] = []
    list_groups: bool = False
    verbose: bool = False

    @field_validator("tolerance_overrides")
    @classmethod
    def check_tolerances(cls, v: dict[str, float]) -> dict[str, float]:
        DEFAULT_TOLERANCES.with_overrides(v)
        return v

    @field_validator("c_appendix")
    @classmethod
    def check_c_appendix(cls, v: int) -> int:
        if v not in (5000, 5):
            raise ValueError(f"c_appendix must be 5000 or 5, got {v}")
        return v

    @field_validator("t0")
    @classmethod
    def check_t0(cls, v: Optional[str]) -> Optional[str]:
        if v is None:
            return v
        try:
            complex(str(v).replace(" ", ""))
        except ValueError:
            raise ValueError(f"t0 is not a number: {v!r}")
        return str(v).replace(" ", "")

    @field_validator("form")
    @classmethod
    def check_form(cls, v: dict[str, Any]) -> dict[str, Any]:
        try:
            OneForm.from_dict(v)
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"Invalid one-form {v}: {str(e)}")
        return v

    @property
    def tolerances(self) -> Tolerances:
        return DEFAULT_TOLERANCES.with_overrides(self.tolerance_overrides)

    @property
    def t0_value(self) -> Optional[complex]:
        return None if self.t0 is None else complex(self.t0)

    @property
    def one_form(self) -> OneForm:
        return OneForm.from_dict(self.form)


def read_config_file(path: Optional[Path] = None) -> dict:
    """Load the JSON config; ABELIAN_CONFIG overrides the default location"""
    load_dotenv()
    path = Path(path or os.getenv("ABELIAN_CONFIG") or DEFAULT_CONFIG)
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigViolation(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigViolation(f"Config file {path} is not valid JSON: {str(e)}")


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.is_absolute() or p.exists():
        return p
    return ROOT_DIR / p


def load_config(command: str, cli: Mapping[str, Any], config_path: Optional[Path] = None) -> RunConfig:
    """
    Merge settings with precedence CLI > environment > config.json > defaults
    Args:
        command: CLI subcommand
        cli: values given on the command line (None entries are ignored)
        config_path: alternate config file
    Returns:
        Validated RunConfig
    """
    doc = read_config_file(config_path)
    tolerances: dict[str, float] = {}
    names = set(Tolerances.names())
    for section in TOLERANCE_SECTIONS:
        for key, value in doc.get(section, {}).items():
            if key in names:
                tolerances[key] = value
    zc = doc.get("zerocount", {})
    settings: dict[str, Any] = {
        "command": command,
        "input": _resolve(doc.get("paths", {}).get("input", "data/h_star.json")),
        "out_dir": Path(doc.get("paths", {}).get("out_dir", "out")),
        "c_appendix": doc.get("bounds", {}).get("c_appendix", 5000),
        "l": doc.get("bounds", {}).get("l", 1),
        "oval": doc.get("oval", {}),
        "form": zc.get("form", {"monomial": [0, 0]}),
        "region": zc.get("region", "sigma"),
        "sector": zc.get("sector", {}),
        "circle": zc.get("circle", {}),
        "database_url": doc.get("database", {}).get("url", "sqlite:///./abelian_runs.db"),
    }

    env = {
        "database_url": os.getenv("ABELIAN_DATABASE_URL"),
        "out_dir": os.getenv("ABELIAN_OUT_DIR"),
        "seed": os.getenv("ABELIAN_SEED"),
    }
    settings.update({k: v for k, v in env.items() if v is not None})

    overrides = dict(cli.get("tolerance_overrides") or {})
    tolerances.update(overrides)
    settings["tolerance_overrides"] = tolerances
    for key, value in cli.items():
        if key == "tolerance_overrides" or value is None:
            continue
        settings[key] = value
    if isinstance(settings.get("form"), str):
        try:
            settings["form"] = json.loads(settings["form"])
        except json.JSONDecodeError as e:
            raise ConfigViolation(f"--form is not valid JSON: {str(e)}")
    if command == "verify":
        from .verify_manager import GROUPS

        unknown = [g for g in settings.get("groups") or [] if g not in GROUPS]
        if unknown:
            raise ConfigViolation(f"Unknown verify groups: {unknown}")
    config = RunConfig(**settings)
    logger.debug(f"Run configuration: {config.model_dump(mode='json')}")
    return config
