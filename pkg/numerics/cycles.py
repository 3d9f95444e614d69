import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    NoConvergence,
    NotMorse,
    OpenComponent,
    ProjectionDiverged,
    ResampleOverflow,
    SingularEncounter,
    StepUnderflow,
    TangentialIntersection,
)
from .polynomial_core import CriticalPoint, Polynomial2
from .tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

PROJECTION_ITERATIONS = 30
SEED_DRIFT = 1.0


@dataclass(frozen=True, eq=False)
class OneForm:
    """omega = A dx + B dy with polynomial coefficients"""

    A: Polynomial2
    B: Polynomial2
    monomial_tag: Optional[tuple[int, int]] = None

    @classmethod
    def from_terms(
        cls,
        a_terms: Mapping[tuple[int, int], complex],
        b_terms: Mapping[tuple[int, int], complex],
    ) -> "OneForm":
        return cls(Polynomial2.from_terms(a_terms, strict=False), Polynomial2.from_terms(b_terms, strict=False))

    @classmethod
    def monomial(cls, k: int, l: int) -> "OneForm":
        """y * x**k * y**l dx"""
        return cls(
            Polynomial2.from_terms({(k, l + 1): 1.0}, strict=False),
            Polynomial2.from_terms({}, strict=False),
            monomial_tag=(k, l),
        )

    @classmethod
    def exact(cls, f: Polynomial2) -> "OneForm":
        """The differential df"""
        return cls(f.dx, f.dy)

    @property
    def p_coeffs(self) -> np.ndarray:
        return self.A.coeffs

    @property
    def q_coeffs(self) -> np.ndarray:
        return self.B.coeffs

    @property
    def degree(self) -> int:
        return max(self.A.degree, self.B.degree)

    def __add__(self, other: "OneForm") -> "OneForm":
        a = _merge_terms(self.A.terms(), other.A.terms())
        b = _merge_terms(self.B.terms(), other.B.terms())
        return OneForm.from_terms(a, b)

    def __mul__(self, scalar: complex) -> "OneForm":
        return OneForm.from_terms(
            {k: scalar * v for k, v in self.A.terms().items()},
            {k: scalar * v for k, v in self.B.terms().items()},
        )

    __rmul__ = __mul__

    def __neg__(self) -> "OneForm":
        return self * -1.0

    def __call__(self, x, y):
        return self.A(x, y), self.B(x, y)

    def to_dict(self) -> dict:
        return {
            "A": self.A.to_json()["coeffs"],
            "B": self.B.to_json()["coeffs"],
            "monomial": None if self.monomial_tag is None else list(self.monomial_tag),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "OneForm":
        if doc.get("monomial") is not None:
            k, l = doc["monomial"]
            return cls.monomial(int(k), int(l))
        a = Polynomial2.from_json({"coeffs": doc.get("A", [])}, strict=False)
        b = Polynomial2.from_json({"coeffs": doc.get("B", [])}, strict=False)
        return cls(a, b)


def _merge_terms(u: Mapping, v: Mapping) -> dict:
    out = dict(u)
    for k, value in v.items():
        out[k] = out.get(k, 0) + value
    return out


@dataclass(frozen=True, eq=False)
class Cycle:
    """Closed polyline on the level curve H = t; points[i] = (x, y)"""

    H: Polynomial2
    t: complex
    points: np.ndarray
    orientation: int = 1
    residual: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t", complex(self.t))

    def __len__(self) -> int:
        return self.points.shape[0]

    def on_level(self, t: complex, rel: float = 1e-9) -> bool:
        return abs(complex(t) - self.t) <= rel * max(1.0, abs(self.t))

    def reversed(self) -> "Cycle":
        return replace(self, points=self.points[::-1].copy(), orientation=-self.orientation)

    def spacing(self) -> np.ndarray:
        """Distances in C^2 between consecutive points, closing segment last"""
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    def length(self) -> float:
        return float(self.spacing().sum())

    def to_rows(self) -> list[list[float]]:
        return [[p[0].real, p[0].imag, p[1].real, p[1].imag] for p in self.points]


def _segment_distance(a: complex, b: complex, c: np.ndarray) -> np.ndarray:
    d = b - a
    if abs(d) == 0:
        return np.abs(c - a)
    s = np.clip(((c - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(c - (a + s * d))


def polyline_clearance(vertices: Sequence[complex], points: Iterable[complex], exclude: Iterable[complex] = ()) -> float:
    """Minimal distance from the polyline to the given points, skipping those in exclude"""
    excluded = [complex(e) for e in exclude]
    targets = np.array(
        [complex(c) for c in points if all(abs(complex(c) - e) > 1e-12 for e in excluded)],
        dtype=complex,
    )
    if targets.size == 0:
        return math.inf
    v = np.asarray(vertices, dtype=complex)
    if v.size == 1:
        return float(np.abs(targets - v[0]).min())
    return float(min(_segment_distance(v[i], v[i + 1], targets).min() for i in range(v.size - 1)))


@dataclass(frozen=True, eq=False)
class BasePath:
    """Polyline in the t-plane; cover points are identified by their path from the base point"""

    vertices: np.ndarray
    clearance: float = math.inf
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex).reshape(-1)
        if v.size == 0:
            raise ValueError("A path needs at least one vertex")
        object.__setattr__(self, "vertices", v)

    @classmethod
    def from_points(
        cls,
        points: Iterable[complex],
        critical_values: Iterable[complex] = (),
        label: str = "",
    ) -> "BasePath":
        v = np.asarray(list(points), dtype=complex)
        keep = np.concatenate([[True], np.abs(np.diff(v)) > 0]) if v.size > 1 else np.array([True])
        v = v[keep]
        clearance = polyline_clearance(v, critical_values, exclude=(v[0], v[-1]))
        return cls(v, clearance, label)

    @property
    def start(self) -> complex:
        return complex(self.vertices[0])

    @property
    def end(self) -> complex:
        return complex(self.vertices[-1])

    def length(self) -> float:
        return float(np.abs(np.diff(self.vertices)).sum())

    def reversed(self) -> "BasePath":
        return BasePath(self.vertices[::-1].copy(), self.clearance, f"{self.label}^-1" if self.label else "")

    def then(self, other: "BasePath", label: str = "") -> "BasePath":
        if abs(self.end - other.start) > 1e-9 * max(1.0, abs(self.end)):
            raise ValueError(f"Cannot join paths: {self.end} != {other.start}")
        return BasePath(
            np.concatenate([self.vertices, other.vertices[1:]]),
            min(self.clearance, other.clearance),
            label or f"{self.label}.{other.label}",
        )

    def fingerprint(self, critical_values: Iterable[complex]) -> np.ndarray:
        """Total argument increment of (t - a) along the path, one entry per critical value"""
        out = []
        for a in critical_values:
            z = self.vertices - complex(a)
            if np.any(np.abs(z) == 0):
                out.append(math.nan)
                continue
            out.append(float(np.angle(z[1:] / z[:-1]).sum()))
        return np.array(out)

    def same_cover_point(self, other: "BasePath", critical_values: Sequence[complex], atol: float = 1e-6) -> bool:
        if abs(self.end - other.end) > atol or abs(self.start - other.start) > atol:
            return False
        turns = (self.fingerprint(critical_values) - other.fingerprint(critical_values)) / (2 * math.pi)
        return bool(np.all(np.abs(turns) < 0.5))

    def densify(self, max_step: float) -> np.ndarray:
        out = [self.vertices[:1]]
        for a, b in zip(self.vertices[:-1], self.vertices[1:]):
            k = max(1, int(math.ceil(abs(b - a) / max_step)))
            out.append(a + (b - a) * np.arange(1, k + 1) / k)
        return np.concatenate(out)

    def to_rows(self) -> list[list[float]]:
        return [[t.real, t.imag] for t in self.vertices]


def _level_scale(t: complex) -> float:
    return max(1.0, abs(t))


def _project(H: Polynomial2, pts: np.ndarray, t: complex, tol: Tolerances) -> tuple[np.ndarray, float]:
    """Minimal-norm Newton projection of every point onto H = t"""
    target = tol.on_curve * _level_scale(t)
    p = np.array(pts, dtype=complex).reshape(-1, 2)
    residual = math.inf
    for _ in range(PROJECTION_ITERATIONS):
        r = H(p[:, 0], p[:, 1]) - t
        residual = float(np.abs(r).max()) if r.size else 0.0
        if not math.isfinite(residual):
            break
        if residual <= 1e-3 * target:
            return p, residual
        gx, gy = H.gradient(p[:, 0], p[:, 1])
        g2 = np.abs(gx) ** 2 + np.abs(gy) ** 2
        if np.any(g2 == 0):
            raise ProjectionDiverged("Gradient vanished during projection")
        p = p - np.stack([r * np.conj(gx) / g2, r * np.conj(gy) / g2], axis=1)
    if residual <= target:
        return p, residual
    raise ProjectionDiverged(f"Projection onto level {t:.6g} stalled at residual {residual:.3e}")


def _real_correct(H: Polynomial2, p: np.ndarray, t0: float, tol: Tolerances) -> np.ndarray:
    target = tol.on_curve * _level_scale(t0)
    for _ in range(PROJECTION_ITERATIONS):
        r = float(H(p[0], p[1]).real) - t0
        if abs(r) <= 1e-3 * target:
            break
        g = np.array([H.dx(p[0], p[1]).real, H.dy(p[0], p[1]).real])
        g2 = float(g @ g)
        if g2 <= (tol.singular * H.scale) ** 2:
            raise SingularEncounter(f"|grad H| below tolerance at ({p[0]:.6g}, {p[1]:.6g})")
        p = p - r * g / g2
    return p


def trace_real_oval(
    H: Polynomial2,
    t0: float,
    seed: Sequence[float],
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Cycle:
    """
    Trace the compact real component of H = t0 through the seed, counterclockwise
    Args:
        H: real polynomial
        t0: real level
        seed: point near the component
        tol: tolerances (trace_step, trace_budget, singular)
    Returns:
        Cycle on H = t0 with real points
    """
    if not H.is_real:
        raise ValueError("Real oval tracing needs a real polynomial")
    t0 = float(np.real(t0))
    start_seed = np.array([float(seed[0]), float(seed[1])])
    start = _real_correct(H, start_seed, t0, tol)
    if float(np.linalg.norm(start - start_seed)) > SEED_DRIFT:
        raise OpenComponent(f"No component of H = {t0} near seed {tuple(start_seed)}")

    h = tol.trace_step
    points = [start]
    p = start
    arc = 0.0
    while True:
        g = np.array([H.dx(p[0], p[1]).real, H.dy(p[0], p[1]).real])
        norm = float(np.linalg.norm(g))
        if norm < tol.singular * H.scale:
            raise SingularEncounter(f"|grad H| = {norm:.3e} at ({p[0]:.6g}, {p[1]:.6g})")
        tangent = np.array([-g[1], g[0]]) / norm
        q = _real_correct(H, p + h * tangent, t0, tol)
        arc += float(np.linalg.norm(q - p))
        if arc > tol.trace_budget:
            raise OpenComponent(f"Level {t0} did not close within arc length {tol.trace_budget}")
        if arc > 4 * h and float(np.linalg.norm(q - start)) < h:
            break
        points.append(q)
        p = q

    pts = np.array(points)
    area = 0.5 * float(np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]))
    if area < 0:
        pts = pts[::-1]
    residual = float(np.abs(H(pts[:, 0], pts[:, 1]).real - t0).max())
    logger.debug(f"Traced real oval at t={t0:.6g}: {len(pts)} points, arc {arc:.4g}, area {abs(area):.6g}")
    return Cycle(H, t0, pts.astype(complex), 1, residual)


def _morse_chart(Q: np.ndarray) -> np.ndarray:
    """M with Q(Mw, Mw) / 2 = w1**2 + w2**2"""
    candidates = [np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([[1.0, 1.0], [1.0, -1.0]])]
    T = max(candidates, key=lambda m: abs((m.T @ Q @ m)[0, 0]))
    Qt = T.T @ Q @ T
    d1 = Qt[0, 0]
    l = Qt[1, 0] / d1
    d2 = Qt[1, 1] - l * l * d1
    L = np.array([[1.0, 0.0], [l, 1.0]], dtype=complex)
    D_inv_sqrt = np.diag([1.0 / np.sqrt(complex(d1)), 1.0 / np.sqrt(complex(d2))])
    return T @ (math.sqrt(2.0) * np.linalg.inv(L.T) @ D_inv_sqrt)


def local_vanishing_cycle(
    H: Polynomial2,
    cp: CriticalPoint,
    r: complex,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Cycle:
    """
    Cycle vanishing at cp, on the level cp.value + r
    Args:
        H: polynomial
        cp: Morse critical point
        r: level offset (|r| small)
        tol: tolerances
    Returns:
        Cycle projected onto H = cp.value + r
    """
    x0, y0 = cp.location
    Q = np.asarray(H.hessian(x0, y0), dtype=complex)
    det = Q[0, 0] * Q[1, 1] - Q[0, 1] * Q[1, 0]
    if not cp.morse or abs(det) <= tol.hessian * H.scale ** 2:
        raise NotMorse(f"Critical point ({x0:.6g}, {y0:.6g}) is degenerate, det = {abs(det):.3e}")
    M = _morse_chart(Q)
    amplitude = np.sqrt(complex(r))
    rho = float(np.linalg.norm(M, 2)) * abs(amplitude)
    count = max(tol.min_points, int(math.ceil(2 * math.pi * rho / (0.5 * tol.h_max))))
    if count > tol.max_points:
        raise ResampleOverflow(f"Local cycle needs {count} points (max {tol.max_points})")
    psi = 2 * math.pi * np.arange(count) / count
    w = amplitude * np.stack([np.cos(psi), np.sin(psi)])
    pts = (M @ w).T + np.array([x0, y0])
    t = complex(cp.value) + complex(r)
    try:
        pts, residual = _project(H, pts, t, tol)
    except ProjectionDiverged as e:
        raise ProjectionDiverged(f"Local cycle at value {cp.value:.6g} with r={r}: {str(e)}")
    return Cycle(H, t, pts, 1, residual)


def _resample(H: Polynomial2, pts: np.ndarray, t: complex, tol: Tolerances) -> np.ndarray:
    """Bring consecutive spacing into [h_min, h_max] without dropping below min_points"""
    for _ in range(40):
        gaps = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        wide = np.flatnonzero(gaps > tol.h_max)
        if wide.size == 0:
            break
        if pts.shape[0] + wide.size > tol.max_points:
            raise ResampleOverflow(f"Cycle exceeds {tol.max_points} points at t={t:.6g}")
        mids = 0.5 * (pts[wide] + np.roll(pts, -1, axis=0)[wide])
        mids, _ = _project(H, mids, t, tol)
        pts = np.insert(pts, wide + 1, mids, axis=0)

    if pts.shape[0] <= tol.min_points:
        return pts
    keep = [0]
    size = pts.shape[0]
    for j in range(1, size):
        last = pts[keep[-1]]
        nxt = pts[(j + 1) % size]
        remaining = len(keep) + (size - j)
        if (
            remaining > tol.min_points
            and np.linalg.norm(pts[j] - last) < tol.h_min
            and np.linalg.norm(nxt - last) <= tol.h_max
        ):
            continue
        keep.append(j)
    return pts[keep]


def transport_cycle(c: Cycle, path: BasePath, tol: Tolerances = DEFAULT_TOLERANCES) -> Cycle:
    """
    Continue c along path, moving each point by dt * conj(grad H) / |grad H|**2 and re-projecting
    Raises:
        StepUnderflow: the step fell below dt_min (path too close to a singular fiber)
        ResampleOverflow: the cycle grew beyond max_points
    """
    if abs(path.start - c.t) > 1e-9 * _level_scale(c.t):
        raise ValueError(f"Path starts at {path.start} but the cycle lies on level {c.t}")
    if path.length() == 0:
        return c
    H = c.H
    pts = c.points
    t = c.t
    residual = c.residual
    steps = 0
    for target in path.vertices[1:]:
        target = complex(target)
        while abs(target - t) > 0:
            gx, gy = H.gradient(pts[:, 0], pts[:, 1])
            g2 = np.abs(gx) ** 2 + np.abs(gy) ** 2
            gmin = float(np.sqrt(g2.min()))
            remaining = abs(target - t)
            size = min(tol.dt_max, tol.step_fraction * tol.h_max * gmin)
            dt = target - t if remaining <= size else (target - t) / remaining * size
            while True:
                if abs(dt) < tol.dt_min and dt != target - t:
                    raise StepUnderflow(f"Step {abs(dt):.3e} below floor at t={t:.6g}")
                t_new = target if dt == target - t else t + dt
                predicted = pts + np.stack([dt * np.conj(gx) / g2, dt * np.conj(gy) / g2], axis=1)
                try:
                    moved, residual = _project(H, predicted, t_new, tol)
                except ProjectionDiverged:
                    dt = dt / 2
                    continue
                if float(np.linalg.norm(moved - pts, axis=1).max()) > 2 * tol.h_max:
                    dt = dt / 2
                    continue
                break
            pts = _resample(H, moved, t_new, tol)
            t = t_new
            steps += 1
    logger.debug(f"Transported cycle {c.t:.6g} -> {t:.6g} in {steps} steps, {pts.shape[0]} points")
    return Cycle(H, t, pts, c.orientation, residual)


def _chart_is_x(H: Polynomial2, p: np.ndarray) -> np.ndarray:
    """True where x is a local coordinate on the level curve (|H_y| >= |H_x|)"""
    gx, gy = H.gradient(p[..., 0], p[..., 1])
    return np.abs(gy) >= np.abs(gx)


def _segment_integrals(c: Cycle, form: OneForm, m: int, use_x: np.ndarray, tol: Tolerances) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid sums with m intervals on every segment, plus the matching sums of |integrand|"""
    H = c.H
    a = c.points
    b = np.roll(c.points, -1, axis=0)
    s = np.linspace(0.0, 1.0, m + 1)
    xa = np.where(use_x, a[:, 0], a[:, 1])[:, None]
    xb = np.where(use_x, b[:, 0], b[:, 1])[:, None]
    ya = np.where(use_x, a[:, 1], a[:, 0])[:, None]
    yb = np.where(use_x, b[:, 1], b[:, 0])[:, None]
    xi = xa + s * (xb - xa)
    eta = ya + s * (yb - ya)
    chart = np.broadcast_to(use_x[:, None], xi.shape)

    def split(u, v):
        return np.where(chart, u, v), np.where(chart, v, u)

    for _ in range(PROJECTION_ITERATIONS):
        x, y = split(xi, eta)
        r = H(x, y) - c.t
        if float(np.abs(r).max()) <= 1e-3 * tol.on_curve * _level_scale(c.t):
            break
        hx, hy = H.gradient(x, y)
        eta = eta - r / np.where(chart, hy, hx)
    x, y = split(xi, eta)
    hx, hy = H.gradient(x, y)
    A, B = form(x, y)
    # integrand with respect to the chart coordinate; the chart picks the larger gradient component as divisor
    lead, other = split(A, B)
    across, along = split(hx, hy)
    f = (lead - other * across / along) * (xb - xa)
    weights = np.full(m + 1, 1.0 / m)
    weights[0] = weights[-1] = 0.5 / m
    return f @ weights, np.abs(f) @ weights


def integrate_form(c: Cycle, form: OneForm, tol: Tolerances = DEFAULT_TOLERANCES) -> complex:
    """
    Integral of form over the cycle: per-segment trapezoid in a local chart with Romberg extrapolation
    Raises:
        NoConvergence: successive diagonal entries still disagree after quad_levels refinements
    """
    mids = 0.5 * (c.points + np.roll(c.points, -1, axis=0))
    use_x = _chart_is_x(c.H, mids)
    table: list[list[complex]] = []
    for k in range(tol.quad_levels + 1):
        values, magnitudes = _segment_integrals(c, form, 2 ** k, use_x, tol)
        row = [complex(values.sum())]
        for j in range(1, k + 1):
            row.append(row[j - 1] + (row[j - 1] - table[k - 1][j - 1]) / (4 ** j - 1))
        table.append(row)
        if k >= 2:
            delta = abs(row[k] - table[k - 1][k - 1])
            if delta <= tol.quad_rtol * abs(row[k]) + tol.quad_atol * float(magnitudes.sum()):
                return row[k]
    raise NoConvergence(f"Quadrature did not settle after {tol.quad_levels} refinements at t={c.t:.6g}")


def period_vector(c: Cycle, forms: Sequence[OneForm], tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    return np.array([integrate_form(c, w, tol) for w in forms], dtype=complex)


def _cross(u, v):
    return (np.conj(u) * v).imag


def intersection_index(c1: Cycle, c2: Cycle, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """
    Signed count of transversal crossings of two cycles on the same level
    The sign at a crossing is sign(Im(conj(d1) * d2)) for the tangents d1, d2 read in the
    local chart (x where |H_y| >= |H_x|, otherwise y).
    """
    if c1 is c2 or (c1.points.shape == c2.points.shape and np.array_equal(c1.points, c2.points)):
        return 0
    if not c1.on_level(c2.t, rel=1e-6):
        raise ValueError(f"Cycles lie on different levels {c1.t} and {c2.t}")
    H = c1.H
    a1, b1 = c1.points, np.roll(c1.points, -1, axis=0)
    a2, b2 = c2.points, np.roll(c2.points, -1, axis=0)

    def real4(p):
        return np.column_stack([p[:, 0].real, p[:, 0].imag, p[:, 1].real, p[:, 1].imag])

    m1 = 0.5 * (a1 + b1)
    m2 = 0.5 * (a2 + b2)
    radius = tol.match_distance + tol.h_max
    tree = cKDTree(real4(m2))
    neighbours = tree.query_ball_point(real4(m1), r=radius)

    crossings: list[tuple[np.ndarray, int]] = []
    for i, near in enumerate(neighbours):
        if not near:
            continue
        js = np.array(sorted(near))
        use_x = bool(_chart_is_x(H, m1[i]))
        k = 0 if use_x else 1
        d1 = b1[i, k] - a1[i, k]
        d2 = b2[js, k] - a2[js, k]
        w = a2[js, k] - a1[i, k]
        denom = _cross(d1, d2)
        for idx, j in enumerate(js):
            den = denom[idx]
            scale = abs(d1) * abs(d2[idx])
            if scale == 0:
                continue
            if abs(den) <= tol.tangent * scale:
                # parallel in the chart: only a problem if the segments actually touch
                gap = min(
                    float(np.linalg.norm(a1[i] - a2[j])),
                    float(np.linalg.norm(a1[i] - b2[j])),
                    float(np.linalg.norm(b1[i] - a2[j])),
                )
                if gap <= tol.h_min:
                    raise TangentialIntersection(f"Tangential contact near {a1[i]}")
                continue
            s = _cross(w[idx], d2[idx]) / den
            u = _cross(w[idx], d1) / den
            if not (0.0 <= s < 1.0 and 0.0 <= u < 1.0):
                continue
            p1 = a1[i] + s * (b1[i] - a1[i])
            p2 = a2[j] + u * (b2[j] - a2[j])
            if float(np.linalg.norm(p1 - p2)) > tol.match_distance:
                continue
            crossings.append((p1, 1 if den > 0 else -1))

    merged: list[tuple[np.ndarray, int]] = []
    for p, sign in crossings:
        if any(float(np.linalg.norm(p - q)) < tol.h_min for q, _ in merged):
            continue
        merged.append((p, sign))
    total = sum(sign for _, sign in merged)
    logger.debug(f"Intersection at t={c1.t:.6g}: {len(merged)} crossings, index {total}")
    return int(total)
