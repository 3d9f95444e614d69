import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from matplotlib.path import Path as MplPath
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .cycles import (
    BasePath,
    Cycle,
    OneForm,
    intersection_index,
    local_vanishing_cycle,
    period_vector,
    polyline_clearance,
    trace_real_oval,
    transport_cycle,
)
from .errors import (
    ClearanceViolation,
    ConfigViolation,
    DecompositionViolation,
    DiameterViolation,
    DisconnectedGraph,
    IllConditioned,
    NonIntegral,
)
from .periods import PeriodMatrix, period_matrix, standard_forms
from .polynomial_core import CriticalSet, Polynomial2, critical_points, normalize
from .tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

ARC_VERTICES_PER_TURN = 64
MAX_PATH_LENGTH = 9.0
INFINITY_RADIUS = 3.0
INFINITY_VERTICES = 256
INFINITY_ARCS = 8
REAL_TOL = 1e-9


# ---------------------------------------------------------------- geometry


def arc_polyline(center: complex, radius: float, theta1: float, theta2: float) -> np.ndarray:
    """
    Circumscribed polyline of the arc from angle theta1 to theta2 (either direction, any number of turns)
    Every edge is tangent to the circle, so the polyline stays at distance >= radius from the center.
    """
    sweep = theta2 - theta1
    k = max(1, int(math.ceil(abs(sweep) / (2 * math.pi) * ARC_VERTICES_PER_TURN)))
    delta = sweep / k
    corners = theta1 + (np.arange(k) + 0.5) * delta
    outer = radius / math.cos(delta / 2)
    return np.concatenate(
        [
            [center + radius * np.exp(1j * theta1)],
            center + outer * np.exp(1j * corners),
            [center + radius * np.exp(1j * theta2)],
        ]
    )


def _cross(u, v):
    return (np.conj(u) * v).imag


def _proper_crossings(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Boolean matrix: segment i of polyline p properly crosses segment k of polyline q"""
    p1, p2 = p[:-1, None], p[1:, None]
    q1, q2 = q[None, :-1], q[None, 1:]
    o1 = _cross(p2 - p1, q1 - p1)
    o2 = _cross(p2 - p1, q2 - p1)
    o3 = _cross(q2 - q1, p1 - q1)
    o4 = _cross(q2 - q1, p2 - q1)
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def _self_intersects(v: np.ndarray) -> bool:
    if v.size < 4:
        return False
    hits = _proper_crossings(v, v)
    i, k = np.indices(hits.shape)
    return bool(np.any(hits & (np.abs(i - k) > 1)))


def _first_circle_entry(vertices: np.ndarray, center: complex, radius: float) -> tuple[int, complex]:
    """(index of the segment, entry point) where the polyline first reaches |t - center| = radius"""
    for i in range(vertices.size - 1):
        p, q = vertices[i], vertices[i + 1]
        if abs(p - center) <= radius:
            return i, p
        d = q - p
        f = p - center
        a = abs(d) ** 2
        b = 2 * (np.conj(f) * d).real
        c = abs(f) ** 2 - radius ** 2
        disc = b * b - 4 * a * c
        if a == 0 or disc < 0:
            continue
        s = (-b - math.sqrt(disc)) / (2 * a)
        if 0.0 <= s <= 1.0:
            return i, p + s * d
    raise ClearanceViolation(f"Path never reaches the circle of radius {radius} around {center}")


# ---------------------------------------------------------------- base point and routes


def real_values(values: Iterable[complex]) -> list[float]:
    return sorted({round(complex(v).real, 12) for v in values if abs(complex(v).imag) <= REAL_TOL})


def default_t0(values: Sequence[complex]) -> float:
    """Midpoint of consecutive real critical values in (-3, 3) with the largest clearance"""
    reals = real_values(values)
    candidates = [0.5 * (u + v) for u, v in zip(reals[:-1], reals[1:]) if -3 < 0.5 * (u + v) < 3]
    if not candidates:
        return 0.0
    vals = np.asarray(values, dtype=complex)

    def key(t):
        return (-round(float(np.abs(vals - t).min()), 12), abs(t), t)

    return float(min(candidates, key=key))


def validate_t0(values: Sequence[complex], t0: complex, nu: float) -> None:
    t0 = complex(t0)
    if abs(t0) > 3:
        raise ConfigViolation(f"Base point {t0} lies outside |t| <= 3")
    clearance = float(np.abs(np.asarray(values, dtype=complex) - t0).min())
    if clearance < nu:
        raise ConfigViolation(f"Base point {t0} is {clearance:.6g} from a critical value (needs >= {nu:.6g})")


def route(t_from: complex, t_to: complex, values: Sequence[complex], clearance: float, label: str = "") -> BasePath:
    """Straight path when it keeps the clearance, otherwise a two-segment detour through a side waypoint"""
    t_from, t_to = complex(t_from), complex(t_to)
    straight = [t_from, t_to]
    if t_from == t_to or polyline_clearance(straight, values, exclude=straight) >= clearance:
        return BasePath.from_points(straight, values, label)
    d = t_to - t_from
    perp = 1j * d / abs(d)
    mid = 0.5 * (t_from + t_to)
    step = 2 * clearance + 0.1 * abs(d)
    for k in range(1, 9):
        for sign in (1, -1):
            pts = [t_from, mid + sign * k * step * perp, t_to]
            if polyline_clearance(pts, values, exclude=straight) >= clearance:
                return BasePath.from_points(pts, values, label)
    raise ClearanceViolation(f"No route from {t_from} to {t_to} keeps clearance {clearance}")


# ---------------------------------------------------------------- special paths and loops


def _lift_step(w: np.ndarray, side: float, x_start: float, count: int) -> float:
    """
    Largest height step that keeps every lifted path below the neighbouring rays on its side
    w holds the off-ray values in the frame of the ray; a ray at angle phi on the lifted side
    leaves the line y = h before x_start when h < x_start * tan(phi).
    """
    angles = side * np.angle(w)
    near = angles[(angles > 0) & (angles < 0.5 * math.pi)]
    if near.size == 0:
        return math.inf
    return x_start * math.tan(float(near.min())) / (2 * max(1, count - 1))


def special_paths(values: Sequence[complex], t0: complex, nu: float) -> list[BasePath]:
    """
    Regular paths from t0 to every critical value
    Each path follows the segment [t0, a_j]; critical values in the way are passed on arcs of radius
    nu + h around them, and paths to values on a common ray are lifted to heights h = rank * eta so
    that they stay disjoint. eta shrinks when a neighbouring ray leaves the common ray at a small
    angle, so the lifted paths never climb across it. Real configurations keep every detour in the
    upper half-plane.
    Raises:
        ClearanceViolation: a detour cannot keep nu/2 clearance or the paths cross
    """
    t0 = complex(t0)
    vals = np.asarray(values, dtype=complex)
    eta = nu / (8 * max(1, vals.size - 1))
    paths = []
    for j, a in enumerate(vals):
        offset = a - t0
        length = abs(offset)
        e = offset / length
        w = (vals - t0) / e
        on_ray = (np.abs(w.imag) <= REAL_TOL * np.maximum(1.0, np.abs(w))) & (w.real > 0)
        rank = int(np.sum(on_ray & (w.real < length - REAL_TOL)))
        side = 1.0 if e.real >= 0 else -1.0
        x_start, x_end = nu / 4, length - 0.75 * nu
        h = rank * min(eta, _lift_step(w[~on_ray], side, x_start, vals.size))
        y = side * h

        pts: list[complex] = [0j, complex(x_start, y)]
        cursor = x_start
        for k in sorted((k for k in range(vals.size) if k != j), key=lambda k: w[k].real):
            c = w[k]
            rho = nu + h
            d = c.imag - y
            if abs(d) >= rho:
                continue
            half = math.sqrt(rho * rho - d * d)
            enter, leave = c.real - half, c.real + half
            if leave <= x_start or enter >= x_end:
                continue
            if enter < cursor or leave > x_end:
                raise ClearanceViolation(f"Detours around {vals[k]} overlap on the path to {a}")
            on_line = abs(d) <= REAL_TOL * max(1.0, abs(c))
            above = side > 0 if on_line else d < 0
            phi1 = float(np.angle(complex(enter, y) - c))
            phi2 = float(np.angle(complex(leave, y) - c))
            if above:
                phi1 = phi1 % (2 * math.pi)
                phi2 = phi2 if phi2 <= phi1 else phi2 - 2 * math.pi
            else:
                phi1 = phi1 if phi1 < 0 else phi1 - 2 * math.pi
                phi2 = phi2 if phi2 >= phi1 else phi2 + 2 * math.pi
            pts.extend(arc_polyline(c, rho, phi1, phi2))
            cursor = leave
        pts.extend([complex(x_end, y), complex(length, 0.0)])
        vertices = t0 + e * np.asarray(pts, dtype=complex)
        vertices[-1] = a
        path = BasePath.from_points(vertices, vals, label=f"alpha{j}")
        if path.clearance < nu / 2:
            raise ClearanceViolation(f"Path to {a} has clearance {path.clearance:.6g} < nu/2")
        if path.length() > MAX_PATH_LENGTH:
            raise ClearanceViolation(f"Path to {a} has length {path.length():.4g} > {MAX_PATH_LENGTH}")
        if _self_intersects(path.vertices):
            raise ClearanceViolation(f"Path to {a} intersects itself")
        paths.append(path)

    for i in range(len(paths)):
        for k in range(i + 1, len(paths)):
            if np.any(_proper_crossings(paths[i].vertices, paths[k].vertices)):
                raise ClearanceViolation(f"Paths alpha{i} and alpha{k} cross outside the base point")
    logger.debug(f"Built {len(paths)} special paths from t0={t0:.6g}, eta={eta:.3g}")
    return paths


def associated_loop(alpha: BasePath, a: complex, nu: float, values: Sequence[complex] = (), label: str = "") -> BasePath:
    """alpha outside the nu-disk of a, one positive turn around the disk, then back"""
    index, entry = _first_circle_entry(alpha.vertices, complex(a), nu)
    outer = np.concatenate([alpha.vertices[: index + 1], [entry]])
    theta = float(np.angle(entry - a))
    circle = arc_polyline(complex(a), nu, theta, theta + 2 * math.pi)
    vertices = np.concatenate([outer[:-1], circle, outer[::-1][1:]])
    return BasePath.from_points(vertices, values, label=label)


# ---------------------------------------------------------------- marked systems


@dataclass(eq=False)
class MarkedCycleSystem:
    H: Polynomial2
    t0: complex
    nu: float
    critical: CriticalSet
    alphas: list[BasePath]
    lambdas: list[BasePath]
    deltas: list[Cycle]
    intersection_matrix: np.ndarray
    forms: list[OneForm]
    tol: Tolerances = DEFAULT_TOLERANCES
    orientation_record: dict = field(default_factory=dict)
    base_periods: Optional[PeriodMatrix] = None

    @property
    def mu(self) -> int:
        return len(self.deltas)

    @property
    def critical_values(self) -> list[complex]:
        return [complex(cp.value) for cp in self.critical]

    @property
    def pl_sign(self) -> int:
        return int(self.orientation_record.get("pl_sign", 1))

    def route_to(self, t: complex, label: str = "") -> BasePath:
        return route(self.t0, t, self.critical_values, self.nu / 2, label)

    def to_manifest(self) -> dict:
        return {
            "t0": [self.t0.real, self.t0.imag],
            "nu": self.nu,
            "critical_values": [[v.real, v.imag] for v in self.critical_values],
            "critical_points": [cp.to_dict() for cp in self.critical],
            "alphas": [p.to_rows() for p in self.alphas],
            "lambdas": [p.to_rows() for p in self.lambdas],
            "intersection_matrix": self.intersection_matrix.tolist(),
            "orientation_record": self.orientation_record,
            "forms": [list(w.monomial_tag) for w in self.forms],
            "period_matrix": None if self.base_periods is None else self.base_periods.to_dict(self.critical_values),
        }


def _connected(adjacency: np.ndarray, start: int = 0) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adjacency[u]):
            if int(v) not in seen:
                seen.add(int(v))
                queue.append(int(v))
    return seen


def _equilibrated_condition(P: np.ndarray) -> float:
    rows = np.abs(P).max(axis=1, keepdims=True)
    rows[rows == 0] = 1.0
    return float(np.linalg.cond(P / rows))


def build_marked_system(
    H: Polynomial2,
    t0: complex,
    nu: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    critical: Optional[CriticalSet] = None,
) -> MarkedCycleSystem:
    """
    Marked set of vanishing cycles on H = t0
    Args:
        H: normalized ultra-Morse polynomial
        t0: base point with clearance >= nu
        nu: working radius
        tol: tolerances
        critical: critical points of H (computed when omitted)
    Returns:
        MarkedCycleSystem with intersection matrix, period matrix and calibrated PL sign
    """
    crit = critical if critical is not None else critical_points(H, tol)
    values = [complex(cp.value) for cp in crit]
    t0 = complex(t0)
    alphas = special_paths(values, t0, nu)
    lambdas = [associated_loop(p, a, nu, values, label=f"lambda{j}") for j, (p, a) in enumerate(zip(alphas, values))]

    deltas = []
    for j, (cp, alpha) in enumerate(zip(crit, alphas)):
        a = values[j]
        q = alpha.vertices[-2]
        r = 0.5 * nu * (q - a) / abs(q - a)
        local = local_vanishing_cycle(H, cp, r, tol)
        back = BasePath(np.concatenate([[a + r], alpha.vertices[::-1][1:]]), alpha.clearance, f"alpha{j}^-1")
        deltas.append(transport_cycle(local, back, tol))
        logger.debug(f"Vanishing cycle {j} at value {a:.6g}: {len(deltas[-1])} points")

    mu = len(deltas)
    I = np.zeros((mu, mu), dtype=int)
    for i in range(mu):
        for k in range(i + 1, mu):
            I[i, k] = intersection_index(deltas[i], deltas[k], tol)
            I[k, i] = -I[i, k]
    if mu and len(_connected(I != 0)) != mu:
        raise DisconnectedGraph(f"Intersection graph of the {mu} vanishing cycles is not connected")

    forms = standard_forms(H.n, H)
    system = MarkedCycleSystem(
        H=H,
        t0=t0,
        nu=nu,
        critical=crit,
        alphas=alphas,
        lambdas=lambdas,
        deltas=deltas,
        intersection_matrix=I,
        forms=forms,
        tol=tol,
        orientation_record={
            "convention": "local cycle at a_j + (nu/2) toward the path, Morse chart orientation",
            "orientations": [d.orientation for d in deltas],
        },
    )
    system.base_periods = period_matrix(system, None, tol)
    cond = _equilibrated_condition(system.base_periods.entries)
    system.orientation_record["period_condition"] = cond
    if cond > tol.cond_max:
        raise IllConditioned(f"Period matrix condition number {cond:.3e} exceeds {tol.cond_max:.1e}")
    _calibrate_pl_sign(system)
    logger.info(f"Marked system at t0={t0:.6g}: mu={mu}, PL sign {system.pl_sign:+d}")
    return system


def _calibrate_pl_sign(system: MarkedCycleSystem) -> None:
    I = system.intersection_matrix
    P = system.base_periods.entries
    for j in range(system.mu):
        for k in range(system.mu):
            if I[k, j] == 0:
                continue
            moved = transport_cycle(system.deltas[k], system.lambdas[j], system.tol)
            observed = period_vector(moved, system.forms, system.tol)
            residuals = {}
            for sign in (1, -1):
                w = np.zeros(system.mu)
                w[k] = 1.0
                w[j] += sign * I[k, j]
                residuals[sign] = float(np.linalg.norm(observed - P @ w) / np.linalg.norm(observed))
            best = min(residuals, key=lambda s: (residuals[s], -s))
            system.orientation_record["pl_sign"] = best
            system.orientation_record["pl_calibration"] = {
                "loop": j,
                "cycle": k,
                "residual_plus": residuals[1],
                "residual_minus": residuals[-1],
            }
            if residuals[best] > system.tol.pl_rtol:
                logger.warning(f"PL calibration residual {residuals[best]:.3e} on (loop {j}, cycle {k})")
            return
    system.orientation_record["pl_sign"] = 1


def picard_lefschetz_apply(system: MarkedCycleSystem, j: int, v: Sequence[int]) -> np.ndarray:
    """Class of v after one circuit around lambda_j, in the delta basis"""
    v = np.asarray(v, dtype=int)
    w = v.copy()
    w[j] += system.pl_sign * int(v @ system.intersection_matrix[:, j])
    return w


def pl_continuation_residuals(
    system: MarkedCycleSystem, pairs: Optional[Iterable[tuple[int, int]]] = None
) -> dict[tuple[int, int], float]:
    """Relative mismatch between continuing delta_k around lambda_j and the PL prediction"""
    P = system.base_periods.entries
    out = {}
    targets = pairs if pairs is not None else [(j, k) for j in range(system.mu) for k in range(system.mu)]
    for j, k in targets:
        moved = transport_cycle(system.deltas[k], system.lambdas[j], system.tol)
        observed = period_vector(moved, system.forms, system.tol)
        e = np.zeros(system.mu, dtype=int)
        e[k] = 1
        predicted = P @ picard_lefschetz_apply(system, j, e)
        out[(j, k)] = float(np.linalg.norm(observed - predicted) / np.linalg.norm(predicted))
    return out


def homology_coordinates(system: MarkedCycleSystem, c: Cycle) -> np.ndarray:
    """Integer coordinates of c in the delta basis"""
    if not c.on_level(system.t0, rel=1e-6):
        raise ValueError(f"Cycle lies on level {c.t}, not on the base level {system.t0}")
    P = system.base_periods.entries
    cond = _equilibrated_condition(P)
    if cond > system.tol.cond_max:
        raise IllConditioned(f"Period matrix condition number {cond:.3e}")
    target = period_vector(c, system.forms, system.tol)
    rows = np.abs(P).max(axis=1)
    rows[rows == 0] = 1.0
    v = np.linalg.solve(P / rows[:, None], target / rows)
    rounded = np.rint(v.real).astype(int)
    residual = float(np.abs(v - rounded).max()) if v.size else 0.0
    if residual > system.tol.integrality:
        raise NonIntegral(f"Homology coordinates {np.round(v, 6)} are not integral (residual {residual:.3e})")
    return rounded


def _interior_real_points(system: MarkedCycleSystem, oval: Cycle) -> set[int]:
    polygon = MplPath(np.column_stack([oval.points[:, 0].real, oval.points[:, 1].real]))
    inside = set()
    for j, cp in enumerate(system.critical):
        x, y = cp.location
        if abs(x.imag) <= REAL_TOL and abs(y.imag) <= REAL_TOL and polygon.contains_point((x.real, y.real)):
            inside.add(j)
    return inside


def oval_decomposition(system: MarkedCycleSystem, oval: Cycle) -> np.ndarray:
    """
    Signs of the oval in the delta basis; nonzero exactly at the real critical points it encloses
    Raises:
        DecompositionViolation: an entry of modulus >= 2 or a mismatch with the enclosed critical points
    """
    signs = homology_coordinates(system, oval)
    if np.any(np.abs(signs) >= 2):
        raise DecompositionViolation(f"Oval decomposition {signs.tolist()} has entries outside {{-1, 0, 1}}")
    inside = _interior_real_points(system, oval)
    nonzero = set(int(j) for j in np.flatnonzero(signs))
    if nonzero != inside:
        raise DecompositionViolation(
            f"Nonzero entries {sorted(nonzero)} do not match enclosed critical points {sorted(inside)}"
        )
    return signs


def source_oval_decomposition(
    source: Polynomial2,
    level: float,
    seed: Sequence[float],
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[MarkedCycleSystem, np.ndarray]:
    """
    Normalize source, base a marked system at the image of the real level and decompose the oval
    through seed in its delta basis
    Returns:
        (marked system, signs of the oval)
    """
    report = normalize(source, tol)
    H = report.rescaled
    crit = critical_points(H, tol)
    t0 = float(report.to_normalized_value(level).real)
    validate_t0([complex(cp.value) for cp in crit], t0, report.nu)
    u, v = report.source_frame.to_normalized(*seed)
    oval = trace_real_oval(H, t0, (float(np.real(u)), float(np.real(v))), tol)
    system = build_marked_system(H, t0, report.nu, tol, crit)
    signs = oval_decomposition(system, oval)
    logger.info(f"Oval of level {level} decomposes as {signs.tolist()}")
    return system, signs


# ---------------------------------------------------------------- the sets K' and K


@dataclass(frozen=True)
class SigmaData:
    a: Optional[float]
    b: Optional[float]
    left: float
    right: float


def sigma_interval(values: Sequence[complex], t0: float, nu: float) -> SigmaData:
    """Nearest real critical values around t0 and the ends l(t0), r(t0) of sigma"""
    t0 = float(np.real(t0))
    reals = real_values(values)
    below = [v for v in reals if v < t0]
    above = [v for v in reals if v > t0]
    a = max(below) if below else None
    b = min(above) if above else None
    left = a + nu if a is not None else -INFINITY_RADIUS
    right = b - nu if b is not None else INFINITY_RADIUS
    return SigmaData(a, b, left, right)


def sigma_pieces(values: Sequence[complex], t0: float, nu: float, n: int) -> dict[str, BasePath]:
    """sigma(t0, nu) split at t0, and the arcs L+-, R+- (radius-3 arcs of 2(n+1)pi turns at infinite ends)"""
    sd = sigma_interval(values, t0, nu)
    t0 = float(np.real(t0))
    pieces = {
        "sigma_left": BasePath.from_points([t0, sd.left], values, "sigma_left"),
        "sigma_right": BasePath.from_points([t0, sd.right], values, "sigma_right"),
    }
    for sign, tag in ((1, "+"), (-1, "-")):
        if sd.a is not None:
            arc = arc_polyline(sd.a, nu, 0.0, sign * 2 * math.pi)
        else:
            arc = arc_polyline(0j, INFINITY_RADIUS, math.pi, math.pi + sign * 2 * (n + 1) * math.pi)
        pieces[f"L{tag}"] = BasePath.from_points(arc, values, f"L{tag}")
        if sd.b is not None:
            arc = arc_polyline(sd.b, nu, math.pi, math.pi + sign * 2 * math.pi)
        else:
            arc = arc_polyline(0j, INFINITY_RADIUS, 0.0, sign * 2 * (n + 1) * math.pi)
        pieces[f"R{tag}"] = BasePath.from_points(arc, values, f"R{tag}")
    return pieces


class _PolylineGraph:
    """Polylines glued at named junctions; edges weighted by Euclidean length in the t-plane"""

    def __init__(self):
        self.size = 0
        self.junctions: dict[str, int] = {}
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.weights: list[float] = []

    def junction(self, name: str) -> int:
        if name not in self.junctions:
            self.junctions[name] = self.size
            self.size += 1
        return self.junctions[name]

    def add(self, vertices: np.ndarray, start: str, end: str) -> None:
        ids = [self.junction(start)]
        for _ in range(vertices.size - 2):
            ids.append(self.size)
            self.size += 1
        ids.append(self.junction(end))
        for (u, v), w in zip(zip(ids[:-1], ids[1:]), np.abs(np.diff(vertices))):
            self.rows.append(u)
            self.cols.append(v)
            self.weights.append(max(float(w), 1e-15))

    def diameter(self) -> float:
        if self.size < 2:
            return 0.0
        m = coo_matrix((self.weights, (self.rows, self.cols)), shape=(self.size, self.size)).tocsr()
        first = dijkstra(m, directed=False, indices=0)
        far = int(np.argmax(np.where(np.isfinite(first), first, -1)))
        second = dijkstra(m, directed=False, indices=far)
        return float(np.max(second[np.isfinite(second)]))


@dataclass(frozen=True)
class LiftedLoop:
    parent: int
    child: int
    history: BasePath
    loop: BasePath


@dataclass(frozen=True)
class EdgeCheck:
    parent: int
    child: int
    multiple: int
    residual: float
    predicted: int

    @property
    def passed(self) -> bool:
        return self.multiple != 0 and self.residual <= 1e-6

    def to_dict(self) -> dict:
        return {
            "parent": self.parent,
            "child": self.child,
            "multiple": self.multiple,
            "residual": self.residual,
            "predicted": self.predicted,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class LiftedTreeSet:
    root: int
    tree_edges: list[tuple[int, int]]
    depths: dict[int, int]
    lifted_loops: list[LiftedLoop]
    sigma: dict[str, BasePath]
    extras: dict[str, BasePath]
    intrinsic_diameter_K_prime: float
    intrinsic_diameter_K: float
    clearance: float
    edge_checks: list[EdgeCheck]
    sigma_data: SigmaData
    value_check: Optional[dict] = None

    def polylines(self) -> dict[str, BasePath]:
        out = {f"lifted_{e.parent}_{e.child}": e.loop for e in self.lifted_loops}
        out.update(self.sigma)
        out.update(self.extras)
        return out

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "tree_edges": [list(e) for e in self.tree_edges],
            "depths": {str(k): v for k, v in sorted(self.depths.items())},
            "intrinsic_diameter_K_prime": self.intrinsic_diameter_K_prime,
            "intrinsic_diameter_K": self.intrinsic_diameter_K,
            "clearance": self.clearance,
            "edge_checks": [c.to_dict() for c in self.edge_checks],
            "sigma": {"a": self.sigma_data.a, "b": self.sigma_data.b, "l": self.sigma_data.left, "r": self.sigma_data.right},
            "value_check": self.value_check,
        }


def build_K(
    system: MarkedCycleSystem,
    oval: Optional[Cycle] = None,
    distinguished: Optional[int] = None,
    form: Optional[OneForm] = None,
) -> LiftedTreeSet:
    """
    Lift the loops lambda_j along a shortest-path tree of the intersection graph rooted at the oval
    (or at delta_l for the modified construction) and glue sigma(t0, nu) with its end arcs
    Raises:
        DiameterViolation: diam K' >= 19 n**2 or diam K >= 36 n**2
        ClearanceViolation: pi(K) comes closer than nu to a critical value
    """
    if (oval is None) == (distinguished is None):
        raise ValueError("Pass exactly one of oval or distinguished")
    mu, n, tol = system.mu, system.H.n, system.tol
    I = system.intersection_matrix
    P = system.base_periods.entries
    values = system.critical_values

    if oval is not None:
        root = mu
        root_cycle = oval
        root_coords = homology_coordinates(system, oval)
        adjacency = np.zeros((mu + 1, mu + 1), dtype=bool)
        adjacency[:mu, :mu] = I != 0
        root_row = root_coords @ I
        adjacency[mu, :mu] = root_row != 0
        adjacency[:mu, mu] = root_row != 0
    else:
        root = int(distinguished)
        root_cycle = system.deltas[root]
        root_coords = np.eye(mu, dtype=int)[root]
        adjacency = I != 0

    parent = {root: -1}
    depths = {root: 0}
    order = []
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adjacency[u]):
            v = int(v)
            if v not in depths:
                depths[v] = depths[u] + 1
                parent[v] = u
                order.append(v)
                queue.append(v)
    if len(order) != mu - (1 if oval is None else 0):
        raise DisconnectedGraph("Intersection graph with the root is not connected")

    trivial = BasePath([system.t0])
    history = {root: trivial}
    cycle_at = {root: root_cycle}
    coords = {root: root_coords}
    periods = {root: period_vector(root_cycle, system.forms, tol)}
    lifted, checks, edges = [], [], []
    for j in order:
        u = parent[j]
        loop = system.lambdas[j]
        history[j] = loop if history[u].length() == 0 else history[u].then(loop)
        cycle_at[j] = transport_cycle(cycle_at[u], loop, tol)
        periods[j] = period_vector(cycle_at[j], system.forms, tol)
        coords[j] = picard_lefschetz_apply(system, j, coords[u])
        diff = periods[j] - periods[u]
        column = P[:, j]
        multiple = int(round(float((np.vdot(column, diff) / np.vdot(column, column)).real)))
        residual = float(np.linalg.norm(diff - multiple * column) / np.linalg.norm(column))
        predicted = int(coords[j][j] - coords[u][j])
        checks.append(EdgeCheck(u, j, multiple, residual, predicted))
        lifted.append(LiftedLoop(u, j, history[u], loop))
        edges.append((u, j))
        logger.debug(f"Tree edge {u}->{j}: l_j={multiple}, residual {residual:.2e}")

    graph = _PolylineGraph()
    for item in lifted:
        graph.add(item.loop.vertices, f"tau{item.parent}", f"tau{item.child}")
    diam_prime = graph.diameter()

    pieces = sigma_pieces(values, float(system.t0.real), system.nu, n)
    sd = sigma_interval(values, float(system.t0.real), system.nu)
    graph.add(pieces["sigma_left"].vertices, f"tau{root}", "l")
    graph.add(pieces["sigma_right"].vertices, f"tau{root}", "r")
    for tag in ("+", "-"):
        graph.add(pieces[f"L{tag}"].vertices, "l", f"L{tag}_end")
        graph.add(pieces[f"R{tag}"].vertices, "r", f"R{tag}_end")

    extras: dict[str, BasePath] = {}
    excluded: list[complex] = []
    if distinguished is not None:
        a_l = values[root]
        alpha = system.alphas[root]
        index, entry = _first_circle_entry(alpha.vertices, a_l, system.nu)
        outer = np.concatenate([alpha.vertices[: index + 1], [entry]])
        theta = float(np.angle(entry - a_l))
        extras["alpha_l"] = BasePath.from_points(outer, values, "alpha_l")
        extras["disk_l"] = BasePath.from_points(arc_polyline(a_l, system.nu, theta, theta + 2 * math.pi), values, "disk_l")
        graph.add(extras["alpha_l"].vertices, f"tau{root}", "alpha_l_end")
        graph.add(extras["disk_l"].vertices, "alpha_l_end", "disk_l_end")
        excluded.append(a_l)
    diam = graph.diameter()

    clearance = math.inf
    for path in [item.loop for item in lifted] + list(pieces.values()) + list(extras.values()):
        clearance = min(clearance, polyline_clearance(path.vertices, values, exclude=excluded))

    value_check = None
    if form is not None:
        at_tau = [abs(complex(period_vector(cycle_at[k], [form], tol)[0])) for k in cycle_at]
        base = period_vector_all(system, form)
        m0 = max(at_tau)
        bound = float(np.linalg.norm(base)) / (2 * n)
        value_check = {"m0": m0, "lower_bound": bound, "passed": bool(m0 >= bound * (1 - 1e-9))}

    result = LiftedTreeSet(
        root=root,
        tree_edges=edges,
        depths=depths,
        lifted_loops=lifted,
        sigma=pieces,
        extras=extras,
        intrinsic_diameter_K_prime=diam_prime,
        intrinsic_diameter_K=diam,
        clearance=clearance,
        edge_checks=checks,
        sigma_data=sd,
        value_check=value_check,
    )
    logger.info(f"Built K: diam K'={diam_prime:.4g}, diam K={diam:.4g}, clearance={clearance:.4g}")
    if diam_prime >= 19 * n * n:
        raise DiameterViolation(f"Intrinsic diameter of K' is {diam_prime:.4g} >= {19 * n * n}")
    if diam >= 36 * n * n:
        raise DiameterViolation(f"Intrinsic diameter of K is {diam:.4g} >= {36 * n * n}")
    if clearance < system.nu * (1 - 1e-9):
        raise ClearanceViolation(f"K comes within {clearance:.6g} of a critical value (nu = {system.nu:.6g})")
    return result


def period_vector_all(system: MarkedCycleSystem, form: OneForm) -> np.ndarray:
    """Integrals of form over every marked cycle at t0"""
    return np.array([complex(period_vector(d, [form], system.tol)[0]) for d in system.deltas])


# ---------------------------------------------------------------- infinity


@dataclass(frozen=True)
class InfinityReport:
    radius: float
    circuits: int
    residuals: list[float]
    minimal_order: Optional[int]
    returned: bool

    @property
    def divides(self) -> bool:
        return self.minimal_order is not None and self.circuits % self.minimal_order == 0

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "circuits": self.circuits,
            "residuals": list(self.residuals),
            "minimal_order": self.minimal_order,
            "returned": self.returned,
            "divides": self.divides,
        }


def _extent(cycle: Cycle) -> float:
    return max(1.0, float(np.linalg.norm(cycle.points, axis=1).max()))


def _ring_tolerances(tol: Tolerances, cycle: Cycle, base_extent: float, circuits: int) -> Tolerances:
    """Resampling band scaled with the extent of the cycle on the big circle"""
    s = max(1.0, _extent(cycle) / base_extent)
    return replace(tol, h_min=tol.h_min * s, h_max=tol.h_max * s, max_points=tol.max_points * (circuits + 1))


def monodromy_at_infinity(
    H: Polynomial2,
    form: OneForm,
    radius: float,
    family: Cycle,
    values: Optional[Sequence[complex]] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    extra_forms: Sequence[OneForm] = (),
) -> InfinityReport:
    """
    Continue the family n+1 times around |t| = radius and report when its periods first return
    """
    if radius < 3:
        raise ValueError(f"Radius must be at least 3, got {radius}")
    vals = list(values) if values is not None else [complex(cp.value) for cp in critical_points(H, tol)]
    ring_gap = float(np.min(np.abs(np.abs(np.asarray(vals)) - radius))) if vals else math.inf
    if ring_gap <= tol.h_max:
        raise ClearanceViolation(f"Circle |t| = {radius} passes within {ring_gap:.3g} of a critical value")
    forms = [form, *extra_forms]
    theta = float(np.angle(family.t)) if family.t != 0 else 0.0
    start = radius * complex(math.cos(theta), math.sin(theta))
    start_gap = float(np.min(np.abs(np.asarray(vals) - family.t))) if vals else math.inf
    clearance = 0.5 * min(0.5, ring_gap, start_gap)
    approach = route(family.t, start, vals, clearance, "to_infinity")
    cycle = transport_cycle(family, approach, tol)
    turn = start * np.exp(2j * math.pi * np.arange(INFINITY_VERTICES + 1) / INFINITY_VERTICES)
    turn[-1] = start
    step = INFINITY_VERTICES // INFINITY_ARCS
    arcs = [BasePath(turn[i : i + step + 1], label="circle") for i in range(0, INFINITY_VERTICES, step)]

    base = period_vector(cycle, forms, tol)
    scale = float(np.linalg.norm(base))
    base_extent = _extent(cycle)
    residuals = []
    minimal = None
    circuits = H.n + 1
    for k in range(1, circuits + 1):
        for arc in arcs:
            cycle = transport_cycle(cycle, arc, _ring_tolerances(tol, cycle, base_extent, circuits))
        now = period_vector(cycle, forms, tol)
        residual = float(np.linalg.norm(now - base))
        residual = residual / scale if scale > 1e-9 else residual
        residuals.append(residual)
        if minimal is None and residual <= tol.pl_rtol:
            minimal = k
        logger.debug(f"Circuit {k} at |t|={radius}: residual {residual:.3e}")
    return InfinityReport(float(radius), circuits, residuals, minimal, residuals[-1] <= tol.pl_rtol)
