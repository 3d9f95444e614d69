import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .cycles import BasePath, Cycle, OneForm, integrate_form, transport_cycle
from .errors import NoStabilization, OutOfRange
from .polynomial_core import Polynomial2
from .tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


def _homogeneous_part(h: Polynomial2, degree: int) -> np.ndarray:
    """Coefficient vector of the degree part of h over x**i * y**(degree - i), i = 0..degree"""
    out = np.zeros(degree + 1, dtype=complex)
    for (i, j), c in h.terms().items():
        if i + j == degree:
            out[i] = c
    return out


def _jacobian_span(h: Polynomial2, n: int, m: int) -> np.ndarray:
    """Rows spanning the degree-m part of the ideal (h_x, h_y), in the x**i * y**(m - i) basis"""
    if m < n:
        return np.zeros((0, m + 1), dtype=complex)
    rows = []
    for g in (h.dx, h.dy):
        part = _homogeneous_part(g, n)
        for a in range(m - n + 1):
            row = np.zeros(m + 1, dtype=complex)
            row[a : a + n + 1] = part
            rows.append(row)
    return np.array(rows)


def standard_forms(n: int, H: Optional[Polynomial2] = None) -> list[OneForm]:
    """
    Deterministic standard set of n**2 forms y * x**k * y**l dx
    All (k, l) with k + l <= n - 1 come first; the remaining slots are filled by total degree,
    decreasing power of x. When H is given, a completion (k, l) is accepted only if x**k * y**l
    is independent of the already chosen monomials modulo the Jacobian ideal of the higher form.
    Args:
        n: degree of H minus one (n >= 2)
        H: optional polynomial whose higher form filters the completions
    Returns:
        list of n**2 OneForm
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    mu = n * n
    tags = [(k, d - k) for d in range(n) for k in range(d, -1, -1)]
    h = H.higher_form() if H is not None else None
    for d in range(n, 2 * n - 1):
        if len(tags) >= mu:
            break
        span = _jacobian_span(h, n, d) if h is not None else np.zeros((0, d + 1), dtype=complex)
        rank = np.linalg.matrix_rank(span, tol=1e-9) if span.size else 0
        for k in range(d, -1, -1):
            if len(tags) >= mu:
                break
            if h is not None:
                row = np.zeros((1, d + 1), dtype=complex)
                row[0, k] = 1.0
                trial = np.vstack([span, row])
                new_rank = np.linalg.matrix_rank(trial, tol=1e-9)
                if new_rank == rank:
                    continue
                span, rank = trial, new_rank
            tags.append((k, d - k))
    if len(tags) < mu:
        raise ValueError(f"Could not complete a standard set of {mu} forms for n={n}")
    return [OneForm.monomial(k, l) for k, l in tags]


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """entries[i, j] = integral of forms[i] over the j-th cycle continued along `at`"""

    entries: np.ndarray
    forms: list[OneForm]
    at: BasePath
    det: complex
    system_ref: Optional[object] = field(default=None, repr=False)

    @property
    def log_abs_det(self) -> float:
        return math.log(abs(self.det)) if self.det != 0 else -math.inf

    def to_dict(self, critical_values: Iterable[complex] = ()) -> dict:
        return {
            "entries": [[[z.real, z.imag] for z in row] for row in self.entries],
            "forms": [list(w.monomial_tag) if w.monomial_tag else w.to_dict() for w in self.forms],
            "at": [self.at.end.real, self.at.end.imag],
            "fingerprint": [float(v) for v in self.at.fingerprint(critical_values)],
            "det": [self.det.real, self.det.imag],
        }


def matrix_from_cycles(
    cycles: Sequence[Cycle],
    forms: Sequence[OneForm],
    at: BasePath,
    tol: Tolerances = DEFAULT_TOLERANCES,
    system_ref: Optional[object] = None,
) -> PeriodMatrix:
    entries = np.array([[integrate_form(c, w, tol) for c in cycles] for w in forms], dtype=complex)
    det = complex(np.linalg.det(entries)) if entries.size else 0j
    return PeriodMatrix(entries, list(forms), at, det, system_ref)


def period_matrix(system, at: Optional[BasePath] = None, tol: Optional[Tolerances] = None) -> PeriodMatrix:
    """
    Period matrix of the standard forms over the marked cycles continued along `at`
    Args:
        system: MarkedCycleSystem
        at: path from system.t0 (None for the base point)
        tol: tolerances, defaults to the system's
    Returns:
        PeriodMatrix
    """
    tol = tol or system.tol
    path = at if at is not None else BasePath([system.t0])
    cycles = system.deltas if path.length() == 0 else [transport_cycle(d, path, tol) for d in system.deltas]
    pm = matrix_from_cycles(cycles, system.forms, path, tol, system_ref=system)
    logger.debug(f"Period matrix at {path.end:.6g}: |det| = {abs(pm.det):.6e}")
    return pm


@dataclass(frozen=True)
class DeterminantLoopCheck:
    base_det: complex
    residuals: dict[str, float]
    threshold: float

    @property
    def passed(self) -> bool:
        return all(r <= self.threshold for r in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "base_det": [self.base_det.real, self.base_det.imag],
            "residuals": dict(self.residuals),
            "threshold": self.threshold,
            "passed": self.passed,
        }


def determinant_monodromy_check(
    system,
    loops: Sequence[BasePath],
    tol: Optional[Tolerances] = None,
) -> DeterminantLoopCheck:
    """Continue every marked cycle around each loop and compare the determinant with its base value"""
    tol = tol or system.tol
    base = period_matrix(system, None, tol).det
    residuals: dict[str, float] = {}
    for index, loop in enumerate(loops):
        label = loop.label or f"loop{index}"
        det = period_matrix(system, loop, tol).det
        residuals[label] = abs(det - base) / abs(base) if base != 0 else abs(det)
        logger.debug(f"Determinant after {label}: relative change {residuals[label]:.3e}")
    return DeterminantLoopCheck(complex(base), residuals, tol.det_rtol)


@dataclass(frozen=True)
class PolynomialFit:
    degree: int
    residual: float
    coefficients: np.ndarray
    samples: int

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "residual": self.residual,
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
            "samples": self.samples,
        }


def fit_polynomial(ts: Sequence[complex], values: Sequence[complex], tol: Tolerances = DEFAULT_TOLERANCES) -> PolynomialFit:
    """Least-squares fits of increasing degree until the relative residual is within fit_rtol"""
    pairs: dict[tuple[float, float], complex] = {}
    for t, v in zip(ts, values):
        pairs.setdefault((round(complex(t).real, 12), round(complex(t).imag, 12)), complex(v))
    t = np.array([complex(a, b) for a, b in pairs], dtype=complex)
    v = np.array(list(pairs.values()), dtype=complex)
    norm = float(np.linalg.norm(v))
    if norm == 0:
        return PolynomialFit(0, 0.0, np.zeros(1, dtype=complex), len(t))
    for degree in range(0, tol.max_fit_degree + 1):
        if degree + 1 >= len(t):
            break
        V = npoly.polyvander(t, degree)
        coeffs, *_ = np.linalg.lstsq(V, v, rcond=None)
        residual = float(np.linalg.norm(V @ coeffs - v)) / norm
        if residual <= tol.fit_rtol:
            return PolynomialFit(degree, residual, coeffs, len(t))
    raise NoStabilization(f"No fit of degree <= {tol.max_fit_degree} reached relative residual {tol.fit_rtol}")


def determinant_polynomiality_check(system, sample_ts: Sequence[complex], tol: Optional[Tolerances] = None) -> PolynomialFit:
    """
    Sample the determinant of periods at the given values and fit a polynomial in t
    The determinant is single-valued, so each sample is reached by any path with clearance.
    """
    tol = tol or system.tol
    values = [period_matrix(system, system.route_to(t), tol).det for t in sample_ts]
    fit = fit_polynomial(sample_ts, values, tol)
    logger.info(f"Determinant of periods fits a polynomial of degree {fit.degree} (residual {fit.residual:.2e})")
    return fit


def circle_samples(radius: float = 1.5, count: int = 10) -> list[complex]:
    return [radius * complex(math.cos(a), math.sin(a)) for a in (2 * math.pi * (np.arange(count) + 0.5) / count)]


def delta0_bound(report, n: Optional[int] = None) -> float:
    """ln of the lower bound (c')**(6n**3) * (c'')**(n**2) * n**(-62 n**3) for |det|"""
    n = n if n is not None else report.n
    c1, c2 = report.c_prime, report.c_doubleprime
    if c1 <= 0 or c2 <= 0:
        raise OutOfRange(f"Gap functions must be positive, got c'={c1}, c''={c2}")
    return 6 * n ** 3 * math.log(c1) + n * n * math.log(c2) - 62 * n ** 3 * math.log(n)


def delta0_audit(pm: PeriodMatrix, report) -> bool:
    ok = pm.log_abs_det >= delta0_bound(report)
    if not ok:
        logger.warning(f"|det| = {abs(pm.det):.3e} is below the lower bound exp({delta0_bound(report):.3f})")
    return ok
