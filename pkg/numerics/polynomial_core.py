import logging
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import minimize
from scipy.signal import convolve2d

from .errors import (
    NonIsolatedCriticalLocus,
    NotEnoughCriticalValues,
    RealityViolation,
    ZeroPolynomial,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

# generic linear change used before eliminating v: x = u + k1*v, y = k2*u + v
ELIMINATION_CHANGE = np.array([[1.0, 0.2718281828], [-0.3141592654, 1.0]])

GRID_SIZE = 256
REFINE_STARTS = 8


def _total_degree(c: np.ndarray) -> int:
    idx = np.argwhere(np.abs(c) > 0)
    if idx.size == 0:
        return -1
    return int(idx.sum(axis=1).max())


@dataclass(frozen=True, eq=False)
class Polynomial2:
    """Bivariate complex polynomial, coeffs[i, j] multiplies x**i * y**j"""

    coeffs: np.ndarray
    strict: bool = True

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        size = max(c.shape)
        square = np.zeros((size, size), dtype=complex)
        square[: c.shape[0], : c.shape[1]] = c
        deg = _total_degree(square)
        square = square[: max(deg, 0) + 1, : max(deg, 0) + 1].copy()
        square.setflags(write=False)
        object.__setattr__(self, "coeffs", square)
        if self.strict:
            if deg < 0:
                raise ZeroPolynomial("Polynomial has no nonzero coefficient")
            if deg < 3:
                raise ValueError(f"Polynomial degree must be at least 3, got {deg}")

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], complex], strict: bool = True) -> "Polynomial2":
        if not terms:
            return cls(np.zeros((1, 1)), strict=strict)
        size = max(i + j for i, j in terms) + 1
        c = np.zeros((size, size), dtype=complex)
        for (i, j), value in terms.items():
            if i < 0 or j < 0:
                raise ValueError(f"Negative exponent in term ({i}, {j})")
            c[i, j] += value
        return cls(c, strict=strict)

    @classmethod
    def from_json(cls, doc: Mapping, strict: bool = True) -> "Polynomial2":
        terms: dict[tuple[int, int], complex] = {}
        for entry in doc["coeffs"]:
            key = (int(entry["i"]), int(entry["j"]))
            terms[key] = terms.get(key, 0) + complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        poly = cls.from_terms(terms, strict=strict)
        declared = doc.get("degree")
        if declared is not None and int(declared) != poly.degree:
            raise ValueError(f"Declared degree {declared} does not match coefficients (degree {poly.degree})")
        return poly

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "coeffs": [
                {"i": i, "j": j, "re": float(c.real), "im": float(c.imag)}
                for (i, j), c in sorted(self.terms().items())
            ],
        }

    def terms(self) -> dict[tuple[int, int], complex]:
        return {(int(i), int(j)): complex(self.coeffs[i, j]) for i, j in np.argwhere(np.abs(self.coeffs) > 0)}

    @cached_property
    def degree(self) -> int:
        return _total_degree(self.coeffs)

    @property
    def n(self) -> int:
        return self.degree - 1

    @cached_property
    def scale(self) -> float:
        return max(1.0, float(np.abs(self.coeffs).max()))

    @cached_property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= 1e-12 * self.scale))

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
        c = self.coeffs
        xp = x.reshape(-1, 1) ** np.arange(c.shape[0])
        yp = y.reshape(-1, 1) ** np.arange(c.shape[1])
        out = np.einsum("ki,ij,kj->k", xp, c, yp)
        return out.reshape(x.shape)[()]

    @cached_property
    def dx(self) -> "Polynomial2":
        c = self.coeffs
        if c.shape[0] < 2:
            return Polynomial2(np.zeros((1, 1)), strict=False)
        return Polynomial2(c[1:, :] * np.arange(1, c.shape[0])[:, None], strict=False)

    @cached_property
    def dy(self) -> "Polynomial2":
        c = self.coeffs
        if c.shape[1] < 2:
            return Polynomial2(np.zeros((1, 1)), strict=False)
        return Polynomial2(c[:, 1:] * np.arange(1, c.shape[1])[None, :], strict=False)

    def gradient(self, x, y):
        return self.dx(x, y), self.dy(x, y)

    def hessian(self, x, y) -> np.ndarray:
        hxy = self.dx.dy(x, y)
        return np.array([[self.dx.dx(x, y), hxy], [hxy, self.dy.dy(x, y)]])

    def higher_form(self) -> "Polynomial2":
        d = self.degree
        c = np.zeros_like(self.coeffs)
        for i in range(d + 1):
            c[i, d - i] = self.coeffs[i, d - i]
        return Polynomial2(c, strict=False)

    def affine_value(self, a: complex, b: complex) -> "Polynomial2":
        """Return a*H + b"""
        c = np.array(self.coeffs) * a
        c[0, 0] += b
        return Polynomial2(c, strict=self.strict)

    def substitute(self, matrix, shift) -> "Polynomial2":
        """Return (u, v) -> H(matrix @ (u, v) + shift)"""
        m = np.asarray(matrix, dtype=complex)
        s = np.asarray(shift, dtype=complex)
        d = max(self.degree, 0)
        x_lin = np.zeros((2, 2), dtype=complex)
        x_lin[0, 0], x_lin[1, 0], x_lin[0, 1] = s[0], m[0, 0], m[0, 1]
        y_lin = np.zeros((2, 2), dtype=complex)
        y_lin[0, 0], y_lin[1, 0], y_lin[0, 1] = s[1], m[1, 0], m[1, 1]
        x_pows = [np.ones((1, 1), dtype=complex)]
        y_pows = [np.ones((1, 1), dtype=complex)]
        for _ in range(d):
            x_pows.append(convolve2d(x_pows[-1], x_lin))
            y_pows.append(convolve2d(y_pows[-1], y_lin))
        out = np.zeros((d + 1, d + 1), dtype=complex)
        for (i, j), coeff in self.terms().items():
            term = convolve2d(x_pows[i], y_pows[j])
            out[: term.shape[0], : term.shape[1]] += coeff * term
        return Polynomial2(out, strict=self.strict)


@dataclass(frozen=True)
class CriticalPoint:
    location: tuple[complex, complex]
    value: complex
    hessian_det: complex
    morse: bool

    @property
    def point(self) -> np.ndarray:
        return np.array(self.location, dtype=complex)

    def to_dict(self) -> dict:
        x, y = self.location
        return {
            "x": [x.real, x.imag],
            "y": [y.real, y.imag],
            "value": [self.value.real, self.value.imag],
            "hessian_det": [self.hessian_det.real, self.hessian_det.imag],
            "morse": self.morse,
        }


class CriticalSet(list):
    """Critical points in deterministic order; deficient when fewer than n**2 were found"""

    def __init__(self, points: Iterable[CriticalPoint], expected: int):
        super().__init__(points)
        self.expected = expected

    @property
    def deficient(self) -> bool:
        return len(self) < self.expected

    @property
    def values(self) -> np.ndarray:
        return np.array([cp.value for cp in self], dtype=complex)


class MorseVerdict(NamedTuple):
    ok: bool
    clause: Optional[str]
    diagnosis: str


def _sylvester(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sylvester matrix of two ascending coefficient vectors"""
    m, k = len(a) - 1, len(b) - 1
    size = m + k
    s = np.zeros((size, size), dtype=complex)
    for r in range(k):
        s[r, r : r + m + 1] = a[::-1]
    for r in range(m):
        s[k + r, r : r + k + 1] = b[::-1]
    return s


def _v_degree(c: np.ndarray) -> int:
    cols = np.nonzero(np.abs(c).max(axis=0) > 1e-14 * max(1.0, np.abs(c).max()))[0]
    return int(cols.max()) if cols.size else 0


def _v_coeffs(c: np.ndarray, u: complex, deg: int) -> np.ndarray:
    u_pows = u ** np.arange(c.shape[0])
    return (u_pows @ c)[: deg + 1]


def _newton_critical(H: Polynomial2, z: np.ndarray, iterations: int = 60) -> np.ndarray:
    for _ in range(iterations):
        g = np.array(H.gradient(z[0], z[1]), dtype=complex)
        step = np.linalg.lstsq(H.hessian(z[0], z[1]), g, rcond=None)[0]
        z = z - step
        if not np.all(np.isfinite(z)) or np.linalg.norm(z) > 1e8:
            break
        if np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(z)):
            break
    return z


def _order_key(cp: CriticalPoint):
    x, y = cp.location
    return (round(cp.value.real, 9), round(cp.value.imag, 9), x.real, x.imag, y.real, y.imag)


def critical_points(H: Polynomial2, tol: Tolerances = DEFAULT_TOLERANCES) -> CriticalSet:
    """
    Solve dH/dx = dH/dy = 0 by resultant elimination, companion-matrix roots and Newton polish
    Args:
        H: polynomial of degree n+1
        tol: residual / Hessian thresholds
    Returns:
        CriticalSet ordered by (Re value, Im value, Re x, Im x, Re y, Im y)
    """
    n = H.n
    p = H.dx.substitute(ELIMINATION_CHANGE, (0.0, 0.0)).coeffs
    q = H.dy.substitute(ELIMINATION_CHANGE, (0.0, 0.0)).coeffs
    dp, dq = _v_degree(p), _v_degree(q)

    samples = 2 * n * n + 2
    us = np.exp(2j * np.pi * np.arange(samples) / samples)
    values = np.empty(samples, dtype=complex)
    hadamard = 0.0
    for k, u in enumerate(us):
        s = _sylvester(_v_coeffs(p, u, dp), _v_coeffs(q, u, dq))
        values[k] = np.linalg.det(s) if s.size else 1.0
        if s.size:
            hadamard = max(hadamard, float(np.prod(np.linalg.norm(s, axis=1))))
    if hadamard > 0 and np.abs(values).max() <= 1e-10 * hadamard:
        raise NonIsolatedCriticalLocus("Resultant of the gradient components vanishes identically")

    coeffs = np.fft.fft(values) / samples
    coeffs = coeffs[: n * n + 1]
    big = np.abs(coeffs).max()
    keep = np.nonzero(np.abs(coeffs) > 1e-10 * big)[0]
    coeffs = coeffs[: keep.max() + 1] if keep.size else coeffs[:1]
    u_roots = npoly.polyroots(coeffs) if len(coeffs) > 1 else np.array([], dtype=complex)

    candidates = []
    for u in u_roots:
        for c, deg in ((p, dp), (q, dq)):
            vc = _v_coeffs(c, u, deg)
            if deg >= 1 and abs(vc[-1]) > 0:
                for v in npoly.polyroots(vc):
                    candidates.append(ELIMINATION_CHANGE @ np.array([u, v]))

    found: list[CriticalPoint] = []
    for z0 in candidates:
        z = _newton_critical(H, np.asarray(z0, dtype=complex))
        if not np.all(np.isfinite(z)):
            continue
        gx, gy = H.gradient(z[0], z[1])
        if max(abs(gx), abs(gy)) > tol.residual * H.scale:
            continue
        if any(np.linalg.norm(z - cp.point) <= 1e-6 * (1.0 + np.linalg.norm(z)) for cp in found):
            continue
        det = complex(np.linalg.det(H.hessian(z[0], z[1])))
        found.append(
            CriticalPoint(
                location=(complex(z[0]), complex(z[1])),
                value=complex(H(z[0], z[1])),
                hessian_det=det,
                morse=abs(det) > tol.hessian * H.scale ** 2,
            )
        )
    found.sort(key=_order_key)
    result = CriticalSet(found, expected=n * n)
    if result.deficient:
        logger.warning(f"Found {len(result)} critical points, expected {n * n}")
    return result


def higher_form_roots(H: Polynomial2) -> list[np.ndarray]:
    """Zeros of the top homogeneous form as unit vectors of C^2, repeated by multiplicity"""
    d = H.degree
    line = np.array([H.coeffs[i, d - i] for i in range(d + 1)], dtype=complex)
    if not np.any(line):
        raise ZeroPolynomial("Higher form vanishes")
    nz = np.nonzero(np.abs(line) > 1e-14 * np.abs(line).max())[0]
    top = int(nz.max())
    roots = [np.array([r, 1.0], dtype=complex) for r in (npoly.polyroots(line[: top + 1]) if top >= 1 else [])]
    roots += [np.array([1.0, 0.0], dtype=complex)] * (d - top)
    return [r / np.linalg.norm(r) for r in roots]


def fubini_study_distance(u: Sequence[complex], v: Sequence[complex]) -> float:
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    cos = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.arccos(min(1.0, cos)))


def is_ultra_morse(H: Polynomial2, tol: Tolerances = DEFAULT_TOLERANCES) -> MorseVerdict:
    n = H.n
    crit = critical_points(H, tol)
    non_morse = [cp for cp in crit if not cp.morse]
    if len(crit) != n * n or non_morse:
        return MorseVerdict(
            False, "a", f"found {len(crit)} of {n * n} critical points, {len(non_morse)} degenerate"
        )
    values = crit.values
    spread = max(1.0, float(np.abs(values).max()))
    for i, j in combinations(range(len(values)), 2):
        if abs(values[i] - values[j]) <= tol.value * spread:
            return MorseVerdict(
                False, "b", f"critical values {values[i]:.6g} and {values[j]:.6g} coincide"
            )
    roots = higher_form_roots(H)
    for u, v in combinations(roots, 2):
        if fubini_study_distance(u, v) <= tol.root:
            return MorseVerdict(False, "c", "higher form has a multiple linear factor")
    return MorseVerdict(True, None, "ultra-Morse")


def hmax_norm(h: Polynomial2) -> float:
    """Max of |h| on the unit sphere of C^2, via the phase-reduced family (cos p, e^{it} sin p)"""
    if not np.any(h.coeffs):
        raise ZeroPolynomial("Cannot take the norm of the zero polynomial")
    phi = np.linspace(0.0, np.pi / 2, GRID_SIZE)
    theta = np.linspace(0.0, 2 * np.pi, GRID_SIZE, endpoint=False)
    ph, th = np.meshgrid(phi, theta, indexing="ij")
    grid = np.abs(h(np.cos(ph), np.exp(1j * th) * np.sin(ph)))
    best = float(grid.max())

    def objective(p):
        return -abs(h(np.cos(p[0]), np.exp(1j * p[1]) * np.sin(p[0])))

    for flat in np.argsort(grid.ravel())[::-1][:REFINE_STARTS]:
        i, j = np.unravel_index(flat, grid.shape)
        res = minimize(
            objective,
            np.array([phi[i], theta[j]]),
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000},
        )
        best = max(best, float(-res.fun))
    return best


def _in_disk(disk, p: complex) -> bool:
    return disk is not None and abs(p - disk[0]) <= disk[1] * (1 + 1e-14) + 1e-300


def _diameter_disk(a: complex, b: complex):
    c = (a + b) / 2
    return c, max(abs(c - a), abs(c - b))


def _circumdisk(a: complex, b: complex, c: complex):
    ox = (min(a.real, b.real, c.real) + max(a.real, b.real, c.real)) / 2
    oy = (min(a.imag, b.imag, c.imag) + max(a.imag, b.imag, c.imag)) / 2
    o = complex(ox, oy)
    a, b, c = a - o, b - o, c - o
    d = (a.real * (b.imag - c.imag) + b.real * (c.imag - a.imag) + c.real * (a.imag - b.imag)) * 2
    if d == 0:
        return None
    x = (abs(a) ** 2 * (b.imag - c.imag) + abs(b) ** 2 * (c.imag - a.imag) + abs(c) ** 2 * (a.imag - b.imag)) / d
    y = (abs(a) ** 2 * (c.real - b.real) + abs(b) ** 2 * (a.real - c.real) + abs(c) ** 2 * (b.real - a.real)) / d
    center = complex(x, y)
    return center + o, max(abs(center - a), abs(center - b), abs(center - c))


def _cross(a: complex, b: complex, c: complex) -> float:
    return ((b - a).conjugate() * (c - a)).imag


def _disk_two_points(points: list[complex], p: complex, q: complex):
    circ = _diameter_disk(p, q)
    left = right = None
    for r in points:
        if _in_disk(circ, r):
            continue
        cross = _cross(p, q, r)
        c = _circumdisk(p, q, r)
        if c is None:
            continue
        if cross > 0 and (left is None or _cross(p, q, c[0]) > _cross(p, q, left[0])):
            left = c
        elif cross < 0 and (right is None or _cross(p, q, c[0]) < _cross(p, q, right[0])):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[1] <= right[1] else right


def _disk_one_point(points: list[complex], p: complex):
    c = (p, 0.0)
    for i, q in enumerate(points):
        if not _in_disk(c, q):
            c = _diameter_disk(p, q) if c[1] == 0.0 else _disk_two_points(points[: i + 1], p, q)
    return c


def minimal_enclosing_disk(points: Iterable[complex], seed: int = 0) -> tuple[complex, float]:
    """Randomized incremental minimal enclosing disk; returns (center, radius)"""
    shuffled = [complex(p) for p in points]
    if not shuffled:
        raise NotEnoughCriticalValues("No points to enclose")
    random.Random(seed).shuffle(shuffled)
    disk = None
    for i, p in enumerate(shuffled):
        if disk is None or not _in_disk(disk, p):
            disk = _disk_one_point(shuffled[: i + 1], p)
    return disk


def balance(
    H: Polynomial2,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = 0,
    critical: Optional[CriticalSet] = None,
) -> tuple[Polynomial2, float, complex]:
    """
    Affinely rescale the values of H so its critical values fill a disk of radius 2 about 0
    Returns:
        (G, a, b) with G = a*H + b, a > 0
    """
    crit = critical if critical is not None else critical_points(H, tol)
    values = crit.values
    if len(values) == 0:
        raise NotEnoughCriticalValues("Polynomial has no critical points")
    spread = max(1.0, float(np.abs(values).max()))
    if float(np.abs(values - values[0]).max()) <= tol.value * spread:
        raise NotEnoughCriticalValues("All critical values coincide")
    center, radius = minimal_enclosing_disk(values, seed=seed)
    if H.is_real and abs(center.imag) > 1e-9 * max(1.0, radius):
        raise RealityViolation(f"Real polynomial balanced with non-real shift (center {center})")
    a = 2.0 / radius
    b = -2.0 * center / radius
    logger.debug(f"Balanced with a={a:.12g}, b={b:.12g}")
    return H.affine_value(a, b), a, b


@dataclass(frozen=True)
class AffineFrame:
    """(x, y) = scale * (u, v) + shift"""

    scale: float
    shift: tuple[complex, complex]

    def to_source(self, u, v):
        return self.scale * np.asarray(u) + self.shift[0], self.scale * np.asarray(v) + self.shift[1]

    def from_normalized(self, u, v):
        return self.to_source(u, v)

    def to_normalized(self, x, y):
        return (np.asarray(x) - self.shift[0]) / self.scale, (np.asarray(y) - self.shift[1]) / self.scale

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "shift": [[self.shift[0].real, self.shift[0].imag], [self.shift[1].real, self.shift[1].imag]],
        }


def _origin_choice_key(cp: CriticalPoint):
    x, y = cp.location
    return (round(math.hypot(abs(x), abs(y)), 9), x.real, x.imag, y.real, y.imag)


def rescale(
    G: Polynomial2,
    tol: Tolerances = DEFAULT_TOLERANCES,
    critical: Optional[CriticalSet] = None,
) -> tuple[Polynomial2, AffineFrame]:
    """Scale so the higher form has unit max-norm, then move the smallest critical point to the origin"""
    s = hmax_norm(G.higher_form()) ** (-1.0 / G.degree)
    crit = critical if critical is not None else critical_points(G, tol)
    if not crit:
        raise NotEnoughCriticalValues("Cannot place a critical point at the origin: none found")
    origin = min(crit, key=_origin_choice_key).location
    frame = AffineFrame(scale=float(s), shift=(complex(origin[0]), complex(origin[1])))
    return G.substitute(np.eye(2) * s, origin), frame


@dataclass(frozen=True)
class NormalizationReport:
    n: int
    balanced: Polynomial2
    scale_a: float
    shift_b: complex
    rescaled: Polynomial2
    source_frame: AffineFrame
    c1: float
    c2: float
    c_prime: float
    c_doubleprime: float
    nu: float
    big_A_log: float
    critical_values: tuple[complex, ...] = field(default_factory=tuple)
    verdict: Optional[MorseVerdict] = None

    def to_source_value(self, t: complex) -> complex:
        return (t - self.shift_b) / self.scale_a

    def to_normalized_value(self, t: complex) -> complex:
        return self.scale_a * t + self.shift_b

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "balanced": self.balanced.to_json(),
            "scale_a": self.scale_a,
            "shift_b": [self.shift_b.real, self.shift_b.imag],
            "rescaled": self.rescaled.to_json(),
            "source_frame": self.source_frame.to_dict(),
            "c1": self.c1,
            "c2": self.c2,
            "c_prime": self.c_prime,
            "c_doubleprime": self.c_doubleprime,
            "nu": self.nu,
            "big_A_log": self.big_A_log,
            "critical_values": [[v.real, v.imag] for v in self.critical_values],
            "ultra_morse": None if self.verdict is None else self.verdict.ok,
        }


def gap_functions(
    H: Polynomial2,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> NormalizationReport:
    """
    Normalize H and evaluate the gap functions c', c'' and the working radius nu
    Args:
        H: ultra-Morse polynomial
        tol: tolerances
        seed: seed of the randomized minimal-disk step
    Returns:
        NormalizationReport
    """
    n = H.n
    crit = critical_points(H, tol)
    G, a, b = balance(H, tol, seed=seed, critical=crit)
    g_crit = CriticalSet(
        [
            CriticalPoint(cp.location, a * cp.value + b, a * a * cp.hessian_det, cp.morse)
            for cp in crit
        ],
        expected=crit.expected,
    )
    F, frame = rescale(G, tol, critical=g_crit)

    roots = higher_form_roots(H)
    c1 = n * min(fubini_study_distance(u, v) for u, v in combinations(roots, 2))
    values = sorted(g_crit.values, key=lambda v: (v.real, v.imag))
    c2 = n * n * min(abs(u - v) for u, v in combinations(values, 2))
    c_prime = min(c1, 1.0)
    c_doubleprime = min(c2, 1.0)
    report = NormalizationReport(
        n=n,
        balanced=G,
        scale_a=float(a),
        shift_b=complex(b),
        rescaled=F,
        source_frame=frame,
        c1=float(c1),
        c2=float(c2),
        c_prime=float(c_prime),
        c_doubleprime=float(c_doubleprime),
        nu=float(c_doubleprime / (4 * n * n)),
        big_A_log=float(n ** 4 / c_doubleprime) if c_doubleprime > 0 else math.inf,
        critical_values=tuple(complex(v) for v in values),
        verdict=is_ultra_morse(H, tol),
    )
    logger.info(
        f"Normalized degree-{H.degree} polynomial: c'={report.c_prime:.6g}, "
        f"c''={report.c_doubleprime:.6g}, nu={report.nu:.6g}"
    )
    return report


def normalize(H: Polynomial2, tol: Tolerances = DEFAULT_TOLERANCES, seed: int = 0) -> NormalizationReport:
    """Balance then rescale H; the report carries both frames"""
    return gap_functions(H, tol, seed=seed)
