from dataclasses import dataclass, fields, replace
from typing import Mapping
import logging

from .errors import ConfigViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold used by the pipeline; overridable per run with --tol.<name>"""

    # critical points and normalization
    residual: float = 1e-10
    hessian: float = 1e-8
    value: float = 1e-8
    root: float = 1e-6

    # level curves
    on_curve: float = 1e-10
    singular: float = 1e-8
    trace_step: float = 5e-3
    trace_budget: float = 200.0
    h_min: float = 1e-4
    h_max: float = 1e-2
    min_points: int = 32
    max_points: int = 20000

    # transport
    dt_max: float = 0.05
    dt_min: float = 1e-9
    step_fraction: float = 1.0

    # quadrature
    quad_rtol: float = 1e-9
    quad_atol: float = 1e-12
    quad_levels: int = 10

    # intersections and homology
    match: float = 5.0
    tangent: float = 1e-6
    cond_max: float = 1e12
    integrality: float = 1e-4
    pl_rtol: float = 1e-6

    # periods
    det_rtol: float = 1e-6
    fit_rtol: float = 1e-6
    max_fit_degree: int = 12

    # zero counting
    zero: float = 1e-12
    max_depth: int = 40
    reality: float = 1e-7

    @property
    def match_distance(self) -> float:
        return self.match * self.h_max

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def with_overrides(self, overrides: Mapping[str, object]) -> "Tolerances":
        """
        Return a copy with the given fields replaced
        Args:
            overrides: field name -> value (strings are parsed to the field's type)
        Returns:
            New Tolerances instance
        """
        types = {f.name: f.type for f in fields(self)}
        parsed = {}
        for name, raw in overrides.items():
            if name not in types:
                raise ConfigViolation(f"Unknown tolerance '{name}'")
            try:
                value = int(float(raw)) if types[name] in (int, "int") else float(raw)
            except (TypeError, ValueError):
                raise ConfigViolation(f"Tolerance '{name}' is not a number: {raw!r}")
            if value <= 0:
                raise ConfigViolation(f"Tolerance '{name}' must be positive, got {value}")
            parsed[name] = value
        if parsed:
            logger.info(f"Tolerance overrides: {parsed}")
        return replace(self, **parsed)


DEFAULT_TOLERANCES = Tolerances()
