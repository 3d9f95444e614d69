import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from matplotlib.path import Path as MplPath
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .cycles import BasePath, Cycle, OneForm, integrate_form, intersection_index, local_vanishing_cycle, transport_cycle
from .errors import ConfigViolation, DegenerateK, RefinementOverflow, ZeroOnContour
from .tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

WINDING_CAP = math.pi / 2
VARIATION_CAP = math.pi / 8
VERTICES_PER_TURN = 256
UNDERFLOW = 1e-300
VANISHING = 1e-9


# ---------------------------------------------------------------- contours


def _arc_points(center: complex, radius: float, theta1: float, theta2: float, per_turn: int) -> np.ndarray:
    """Points on the circle from theta1 to theta2, both ends included"""
    k = max(2, int(math.ceil(abs(theta2 - theta1) / (2 * math.pi) * per_turn)))
    return center + radius * np.exp(1j * np.linspace(theta1, theta2, k + 1))


@dataclass(frozen=True, eq=False)
class Contour:
    """
    Oriented polyline in the t-plane, read on the cover of the plane minus the critical values
    history is the path from the probe's base point to the first vertex; the continuation along
    it selects the sheet. pieces maps a piece name to its [first, last] vertex indices.
    """

    vertices: np.ndarray
    closed: bool = False
    label: str = ""
    history: Optional[BasePath] = None
    pieces: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex).reshape(-1)
        if v.size == 0:
            raise ValueError("A contour needs at least one vertex")
        if self.closed and v[0] != v[-1]:
            v = np.concatenate([v, v[:1]])
        object.__setattr__(self, "vertices", v)
        if self.history is not None and abs(self.history.end - v[0]) > 1e-9 * max(1.0, abs(v[0])):
            raise ValueError(f"History ends at {self.history.end}, contour starts at {v[0]}")

    @classmethod
    def circle(
        cls,
        center: complex,
        radius: float,
        theta0: float = 0.0,
        turns: int = 1,
        history: Optional[BasePath] = None,
        label: str = "circle",
        per_turn: int = VERTICES_PER_TURN,
    ) -> "Contour":
        """Positively oriented circle starting at center + radius * exp(i theta0); turns < 0 runs clockwise"""
        pts = _arc_points(complex(center), radius, theta0, theta0 + 2 * math.pi * turns, per_turn)
        pts[-1] = pts[0]
        return cls(pts, True, label, history)

    @classmethod
    def segment(cls, a: complex, b: complex, count: int = 64, history: Optional[BasePath] = None, label: str = "segment") -> "Contour":
        return cls(complex(a) + (complex(b) - complex(a)) * np.linspace(0.0, 1.0, count + 1), False, label, history)

    @classmethod
    def polyline(
        cls,
        points: Iterable[complex],
        closed: bool = False,
        history: Optional[BasePath] = None,
        label: str = "polyline",
    ) -> "Contour":
        v = np.asarray(list(points), dtype=complex)
        keep = np.concatenate([[True], np.abs(np.diff(v)) > 0]) if v.size > 1 else np.array([True])
        return cls(v[keep], closed, label, history)

    @classmethod
    def from_path(cls, path: BasePath, history: Optional[BasePath] = None) -> "Contour":
        return cls.polyline(path.vertices, False, history, path.label or "path")

    @classmethod
    def sector(
        cls,
        a: complex,
        psi: float,
        nu: float,
        l: int = 1,
        theta0: float = 0.0,
        approach: Optional[BasePath] = None,
        per_turn: int = VERTICES_PER_TURN,
        radial_count: int = 64,
    ) -> "Contour":
        """
        Boundary of the log-sector {a + r exp(i phi): psi <= r <= nu, |phi - theta0| <= 2 pi l}
        Pieces: gamma1 (outer arc, counterclockwise), gamma2 (ray at +2 pi l, inward), gamma3 (inner arc,
        clockwise), gamma4 (ray at -2 pi l, outward). The history runs `approach` to a + nu exp(i theta0),
        then l clockwise turns at radius nu, so the contour starts on the sheet phi = theta0 - 2 pi l.
        """
        if not 0 < psi < nu:
            raise ValueError(f"Need 0 < psi < nu, got psi={psi}, nu={nu}")
        if l < 1:
            raise ValueError(f"Winding extent l must be at least 1, got {l}")
        a = complex(a)
        lo, hi = theta0 - 2 * math.pi * l, theta0 + 2 * math.pi * l
        ray = np.exp(1j * theta0)
        outer = _arc_points(a, nu, lo, hi, per_turn)
        inward = a + ray * np.linspace(nu, psi, radial_count + 1)
        inner = _arc_points(a, psi, hi, lo, per_turn)
        outward = a + ray * np.linspace(psi, nu, radial_count + 1)
        # both rays project onto the same segment; pin the shared corners exactly
        outer[-1] = inward[0] = outward[-1] = a + nu * ray
        inward[-1] = inner[0] = inner[-1] = outward[0] = a + psi * ray
        outer[0] = outward[-1]
        parts = [outer, inward[1:], inner[1:], outward[1:]]
        vertices = np.concatenate(parts)
        ends = np.cumsum([p.size for p in parts]) - 1
        pieces = {
            "gamma1": (0, int(ends[0])),
            "gamma2": (int(ends[0]), int(ends[1])),
            "gamma3": (int(ends[1]), int(ends[2])),
            "gamma4": (int(ends[2]), int(ends[3])),
        }
        turns = _arc_points(a, nu, theta0, lo, per_turn)
        turns[0] = turns[-1] = outer[0]
        unwind = BasePath(turns, label="unwind")
        history = unwind if approach is None else approach.then(unwind, "sector_history")
        return cls(vertices, True, f"sector_l{l}", history, pieces)

    @property
    def start(self) -> complex:
        return complex(self.vertices[0])

    def start_history(self) -> BasePath:
        return self.history if self.history is not None else BasePath([self.start])

    def history_to(self, index: int) -> BasePath:
        """Path from the probe's base point to vertex index along the contour"""
        head = self.start_history()
        if index == 0:
            return head
        return head.then(BasePath(self.vertices[: index + 1]), f"{self.label}[:{index}]")

    def length(self) -> float:
        return float(np.abs(np.diff(self.vertices)).sum())

    def curvature(self) -> float:
        """Total curvature: sum of absolute exterior angles, including the closing corner"""
        d = np.diff(self.vertices)
        d = d[np.abs(d) > 0]
        if self.closed and d.size:
            d = np.concatenate([d, d[:1]])
        if d.size < 2:
            return 0.0
        return float(np.abs(np.angle(d[1:] / d[:-1])).sum())

    def densify(self, max_step: float) -> "Contour":
        """Subdivide every edge longer than max_step; piece indices follow the new vertices"""
        v = self.vertices
        counts = np.maximum(1, np.ceil(np.abs(np.diff(v)) / max_step).astype(int))
        out = [v[:1]]
        for a, b, k in zip(v[:-1], v[1:], counts):
            out.append(a + (b - a) * np.arange(1, k + 1) / k)
        position = np.concatenate([[0], np.cumsum(counts)])
        pieces = {name: (int(position[s]), int(position[e])) for name, (s, e) in self.pieces.items()}
        return Contour(np.concatenate(out), self.closed, self.label, self.history, pieces)

    def piece_of(self, segment: int) -> Optional[str]:
        for name, (s, e) in self.pieces.items():
            if s <= segment < e:
                return name
        return None

    def detour(self, segment: int, t: complex, radius: float) -> "Contour":
        """
        Replace the part of the contour within radius of t (a point of the given segment) by a half-circle
        on the right of the direction of travel, which lies outside the region a ccw boundary encloses
        """
        v = self.vertices
        t = complex(t)
        d = v[segment + 1] - v[segment]
        d = d / abs(d)
        j = segment
        while j > 0 and abs(v[j] - t) < radius:
            j -= 1
        k = segment + 1
        while k < v.size - 1 and abs(v[k] - t) < radius:
            k += 1
        theta = float(np.angle(-d))
        arc = _arc_points(t, radius, theta, theta + math.pi, VERTICES_PER_TURN)
        arc[0], arc[-1] = t - radius * d, t + radius * d
        vertices = np.concatenate([v[: j + 1], arc, v[k:]])
        shift = vertices.size - v.size

        def moved(i: int) -> int:
            return i + shift if i >= k else (min(i, j + 1) if i > j else i)

        pieces = {name: (moved(s), moved(e)) for name, (s, e) in self.pieces.items()}
        return Contour(vertices, self.closed, f"{self.label}+detour", self.history, pieces)

    def fingerprint(self, critical_values: Iterable[complex]) -> list[float]:
        """Argument increments around each critical value along history and contour"""
        path = self.history_to(self.vertices.size - 1)
        return [float(x) for x in path.fingerprint(critical_values)]

    def to_rows(self) -> list[list[float]]:
        return [[t.real, t.imag] for t in self.vertices]


# ---------------------------------------------------------------- probes


@dataclass(frozen=True, eq=False)
class ProbeState:
    """A point of the cover: its projection t, the continuation payload and the turns around tracked centers"""

    t: complex
    payload: object
    turns: tuple[float, ...] = ()


class FunctionProbe(object):
    """
    Function on the cover, evaluated by continuation
    Subclasses implement start (continue from the base point along a history), advance (continue
    along the straight segment to t) and evaluate (value at a state).
    """

    centers: tuple[complex, ...] = ()

    def __init__(self):
        self.cache: dict[tuple, complex] = {}

    def start(self, history: BasePath) -> ProbeState:
        raise NotImplementedError("Implement in subclass.")

    def advance(self, state: ProbeState, t: complex) -> ProbeState:
        raise NotImplementedError("Implement in subclass.")

    def evaluate(self, state: ProbeState) -> complex:
        raise NotImplementedError("Implement in subclass.")

    def _turns(self, state: ProbeState, t: complex) -> tuple[float, ...]:
        out = []
        for c, w in zip(self.centers, state.turns):
            u, v = state.t - c, complex(t) - c
            out.append(w + (float(np.angle(v / u)) if u != 0 and v != 0 else 0.0))
        return tuple(out)

    def _initial_turns(self) -> tuple[float, ...]:
        return tuple(0.0 for _ in self.centers)

    def value(self, state: ProbeState) -> complex:
        key = (round(state.t.real, 12), round(state.t.imag, 12), tuple(round(w, 6) for w in state.turns))
        if key not in self.cache:
            self.cache[key] = complex(self.evaluate(state))
        return self.cache[key]


class AnalyticProbe(FunctionProbe):
    """
    Closed-form function; with a branch point, func receives (t, log(t - branch_point)) with the
    logarithm continued along the contour
    """

    def __init__(self, func: Callable, branch_point: Optional[complex] = None, label: str = "analytic"):
        super().__init__()
        self.func = func
        self.branch_point = None if branch_point is None else complex(branch_point)
        self.centers = () if branch_point is None else (complex(branch_point),)
        self.label = label

    def _log(self, t: complex) -> complex:
        return complex(np.log(complex(t) - self.branch_point))

    def start(self, history: BasePath) -> ProbeState:
        if self.branch_point is None:
            return ProbeState(history.end, None)
        state = ProbeState(history.start, self._log(history.start), self._initial_turns())
        for t in history.vertices[1:]:
            state = self.advance(state, complex(t))
        return state

    def advance(self, state: ProbeState, t: complex) -> ProbeState:
        t = complex(t)
        if self.branch_point is None:
            return ProbeState(t, None)
        turns = self._turns(state, t)
        log = state.payload + complex(np.log((t - self.branch_point) / (state.t - self.branch_point)))
        return ProbeState(t, log, turns)

    def evaluate(self, state: ProbeState) -> complex:
        if self.branch_point is None:
            return self.func(state.t)
        return self.func(state.t, state.payload)


class AbelianProbe(FunctionProbe):
    """I(t) = integral of form over the continuation of cycle; the state payload is the transported cycle"""

    def __init__(
        self,
        form: OneForm,
        cycle: Cycle,
        tol: Tolerances = DEFAULT_TOLERANCES,
        critical_values: Sequence[complex] = (),
        label: str = "I",
    ):
        super().__init__()
        self.form = form
        self.cycle = cycle
        self.tol = tol
        self.centers = tuple(complex(c) for c in critical_values)
        self.label = label

    @property
    def origin(self) -> complex:
        return self.cycle.t

    def start(self, history: BasePath) -> ProbeState:
        path = history
        if abs(path.start - self.origin) > 1e-12 * max(1.0, abs(self.origin)):
            path = BasePath([self.origin, path.start]).then(path)
        turns = self._initial_turns()
        for a, b in zip(path.vertices[:-1], path.vertices[1:]):
            turns = self._turns(ProbeState(complex(a), None, turns), complex(b))
        return ProbeState(path.end, transport_cycle(self.cycle, path, self.tol), turns)

    def advance(self, state: ProbeState, t: complex) -> ProbeState:
        t = complex(t)
        if t == state.t:
            return state
        cycle = transport_cycle(state.payload, BasePath([state.t, t]), self.tol)
        return ProbeState(t, cycle, self._turns(state, t))

    def evaluate(self, state: ProbeState) -> complex:
        return integrate_form(state.payload, self.form, self.tol)


class YProbe(FunctionProbe):
    """Y(t) = I(t) - l0 * log(t - a) / (2 pi i) * J(t), single-valued near a"""

    def __init__(self, I: FunctionProbe, J: FunctionProbe, a: complex, l0: int, label: str = "Y"):
        super().__init__()
        self.I = I
        self.J = J
        self.a = complex(a)
        self.l0 = int(l0)
        self.centers = (complex(a),)
        self.label = label

    def start(self, history: BasePath) -> ProbeState:
        log = complex(np.log(history.start - self.a))
        for u, v in zip(history.vertices[:-1], history.vertices[1:]):
            log += complex(np.log((v - self.a) / (u - self.a)))
        turns = (log.imag - math.atan2((history.start - self.a).imag, (history.start - self.a).real),)
        return ProbeState(history.end, (self.I.start(history), self.J.start(history), log), turns)

    def advance(self, state: ProbeState, t: complex) -> ProbeState:
        t = complex(t)
        i_state, j_state, log = state.payload
        log = log + complex(np.log((t - self.a) / (state.t - self.a)))
        return ProbeState(t, (self.I.advance(i_state, t), self.J.advance(j_state, t), log), self._turns(state, t))

    def evaluate(self, state: ProbeState) -> complex:
        i_state, j_state, log = state.payload
        return self.I.value(i_state) - self.l0 * log / (2j * math.pi) * self.J.value(j_state)


# ---------------------------------------------------------------- argument tracking


@dataclass(frozen=True, eq=False)
class SampleSet:
    ts: np.ndarray
    values: np.ndarray
    label: str = ""

    @property
    def increments(self) -> np.ndarray:
        if self.values.size < 2:
            return np.zeros(0)
        return np.angle(self.values[1:] / self.values[:-1])

    @property
    def increment(self) -> float:
        return float(self.increments.sum())

    @property
    def variation(self) -> float:
        return float(np.abs(self.increments).sum())

    @property
    def winding(self) -> int:
        return int(round(self.increment / (2 * math.pi)))

    @property
    def min_modulus(self) -> float:
        return float(np.abs(self.values).min())

    @property
    def max_modulus(self) -> float:
        return float(np.abs(self.values).max())

    def to_rows(self) -> list[list[float]]:
        return [[t.real, t.imag, abs(f), float(np.angle(f))] for t, f in zip(self.ts, self.values)]


def argument_walk(probe: FunctionProbe, contour: Contour, cap: float, tol: Tolerances = DEFAULT_TOLERANCES) -> SampleSet:
    """
    Continue f along the contour, bisecting every step whose argument change reaches cap
    Raises:
        ZeroOnContour: |f| fell below zero * max|f| (segment index attached)
        RefinementOverflow: a step needed more than max_depth bisections away from any zero
    """
    state = probe.start(contour.start_history())
    value = probe.value(state)
    peak = abs(value)
    if value == 0:
        raise ZeroOnContour(state.t, 0.0, segment=0)
    ts, values = [state.t], [value]
    v = contour.vertices
    near_zero = math.sqrt(tol.zero)
    for i in range(v.size - 1):
        floor = abs(v[i + 1] - v[i]) * 2.0 ** (-tol.max_depth)
        pending = [complex(v[i + 1])]
        while pending:
            target = pending[-1]
            nxt = probe.advance(state, target)
            f = probe.value(nxt)
            peak = max(peak, abs(f))
            if abs(f) <= tol.zero * peak:
                raise ZeroOnContour(target, abs(f), segment=i)
            if abs(float(np.angle(f / value))) >= cap:
                if abs(target - state.t) <= floor:
                    if min(abs(f), abs(value)) <= near_zero * peak:
                        raise ZeroOnContour(target, min(abs(f), abs(value)), segment=i)
                    raise RefinementOverflow(f"Argument step at t={target:.6g} unresolved after {tol.max_depth} bisections")
                pending.append(0.5 * (state.t + target))
                continue
            pending.pop()
            state, value = nxt, f
            ts.append(target)
            values.append(f)
    samples = SampleSet(np.array(ts), np.array(values), contour.label)
    logger.debug(f"Walked {contour.label}: {len(ts)} samples, increment {samples.increment:.6f}")
    return samples


def sample_contour(probe: FunctionProbe, contour: Contour, max_step: Optional[float] = None) -> SampleSet:
    """Values along the contour without argument control"""
    c = contour.densify(max_step) if max_step else contour
    state = probe.start(c.start_history())
    ts, values = [state.t], [probe.value(state)]
    for t in c.vertices[1:]:
        state = probe.advance(state, complex(t))
        ts.append(state.t)
        values.append(probe.value(state))
    return SampleSet(np.array(ts), np.array(values), c.label)


def winding_count(probe: FunctionProbe, contour: Contour, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Number of zeros inside a closed contour, counted with multiplicity"""
    if not contour.closed:
        raise ValueError("winding_count needs a closed contour")
    return argument_walk(probe, contour, WINDING_CAP, tol).winding


def variation_of_argument(probe: FunctionProbe, contour: Contour, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """(V, R): total variation and signed increment of arg f along the contour"""
    samples = argument_walk(probe, contour, VARIATION_CAP, tol)
    return samples.variation, samples.increment


@dataclass(frozen=True)
class WindingReport:
    label: str
    winding: int
    increment: float
    samples: int
    min_modulus: float
    fingerprint: list[float]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "winding": self.winding,
            "increment": self.increment,
            "samples": self.samples,
            "min_modulus": self.min_modulus,
            "fingerprint": list(self.fingerprint),
        }


def winding_report(
    probe: FunctionProbe,
    contour: Contour,
    tol: Tolerances = DEFAULT_TOLERANCES,
    critical_values: Sequence[complex] = (),
) -> tuple[WindingReport, SampleSet]:
    samples = argument_walk(probe, contour, WINDING_CAP, tol)
    report = WindingReport(
        contour.label,
        samples.winding,
        samples.increment,
        int(samples.ts.size),
        samples.min_modulus,
        contour.fingerprint(critical_values),
    )
    return report, samples


def vanishes_identically(samples: SampleSet, atol: float = VANISHING) -> bool:
    return samples.max_modulus <= atol


# ---------------------------------------------------------------- geometry of sample sets


def euclidean_diameter(points: Sequence[complex]) -> float:
    p = np.asarray(points, dtype=complex)
    if p.size < 2:
        return 0.0
    return float(pdist(np.column_stack([p.real, p.imag])).max())


def pi_gap(inner: Sequence[complex], boundary: Sequence[complex]) -> float:
    """Distance from a planar sample set to a boundary sample set"""
    b = np.asarray(boundary, dtype=complex)
    p = np.asarray(inner, dtype=complex)
    tree = cKDTree(np.column_stack([b.real, b.imag]))
    distance, _ = tree.query(np.column_stack([p.real, p.imag]))
    return float(distance.min())


def _inside(points: np.ndarray, boundary: Contour) -> bool:
    polygon = MplPath(np.column_stack([boundary.vertices.real, boundary.vertices.imag]))
    return bool(np.all(polygon.contains_points(np.column_stack([points.real, points.imag]))))


# ---------------------------------------------------------------- Bernstein index


@dataclass(frozen=True)
class BernsteinEstimate:
    value: float
    M: float
    m: float
    k_samples: int
    u_samples: int

    def to_dict(self) -> dict:
        return {"value": self.value, "M": self.M, "m": self.m, "k_samples": self.k_samples, "u_samples": self.u_samples}


def _estimate(M: float, m: float, k_count: int, u_count: int) -> BernsteinEstimate:
    if m <= UNDERFLOW:
        raise DegenerateK(f"max |f| on K is {m:.3e}; the Bernstein index is undefined")
    return BernsteinEstimate(math.log(M / m), M, m, k_count, u_count)


def bernstein_estimate(
    probe: FunctionProbe,
    K: Sequence[Contour],
    U: Sequence[Contour],
    max_step: Optional[float] = None,
) -> BernsteinEstimate:
    """
    B = log(M / m) with M = max |f| on the boundary samples of U and m = max |f| on the K samples
    f must be holomorphic on U; the maximum principle puts M on the boundary.
    """
    k = [sample_contour(probe, c, max_step) for c in K]
    u = [sample_contour(probe, c, max_step) for c in U]
    m = max(s.max_modulus for s in k)
    M = max(s.max_modulus for s in u)
    estimate = _estimate(M, m, sum(s.ts.size for s in k), sum(s.ts.size for s in u))
    logger.debug(f"Bernstein index: M={M:.6e}, m={m:.6e}, B={estimate.value:.6g}")
    return estimate


def bernstein_index(probe: FunctionProbe, K: Sequence[Contour], U: Sequence[Contour], max_step: Optional[float] = None) -> float:
    return bernstein_estimate(probe, K, U, max_step).value


def _neighbourhood_peak(probe: FunctionProbe, contour: Contour, radius: float, every: int, per_circle: int) -> tuple[float, int]:
    """max |f| on circles of the given radius around every `every`-th vertex, continued from the contour"""
    state = probe.start(contour.start_history())
    peak, count = abs(probe.value(state)), 1
    for index, t in enumerate(contour.vertices):
        if index > 0:
            state = probe.advance(state, complex(t))
            peak = max(peak, abs(probe.value(state)))
            count += 1
        if radius <= 0 or index % every:
            continue
        ring = state.t + radius * np.exp(2j * math.pi * np.arange(per_circle + 1) / per_circle)
        s = probe.advance(state, complex(ring[0]))
        for p in ring[1:]:
            s = probe.advance(s, complex(p))
            peak = max(peak, abs(probe.value(s)))
            count += 1
    return peak, count


def cover_bernstein_estimate(
    probe: FunctionProbe,
    K: Sequence[Contour],
    inner: float,
    outer: float,
    every: int = 8,
    per_circle: int = 16,
) -> BernsteinEstimate:
    """
    Bernstein index of the inner- and outer-neighbourhoods of K on the cover
    The neighbourhoods are sampled by circles around every `every`-th vertex of K; the circles
    have radius below the clearance of K, so each one lies in a single disk of the cover.
    """
    if not 0 <= inner < outer:
        raise ValueError(f"Need 0 <= inner < outer, got {inner}, {outer}")
    m, k_count = 0.0, 0
    M, u_count = 0.0, 0
    for c in K:
        peak, count = _neighbourhood_peak(probe, c, inner, every, per_circle)
        m, k_count = max(m, peak), k_count + count
        peak, count = _neighbourhood_peak(probe, c, outer, every, per_circle)
        M, u_count = max(M, peak), u_count + count
    return _estimate(M, m, k_count, u_count)


# ---------------------------------------------------------------- growth-and-zeros and KRY


@dataclass(frozen=True)
class GrowthZerosReport:
    zeros: int
    bernstein: float
    D: float
    eps: float
    ln_rhs: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "zeros": self.zeros,
            "bernstein": self.bernstein,
            "D": self.D,
            "eps": self.eps,
            "ln_rhs": self.ln_rhs,
            "passed": self.passed,
        }


def _log_holds(lhs: float, ln_rhs: float) -> bool:
    if lhs <= 0:
        return True
    return math.log(lhs) <= ln_rhs + 1e-9


def growth_zeros_check(
    probe: FunctionProbe,
    K: Sequence[Contour],
    U: Sequence[Contour],
    zeros: Sequence[complex],
    D: Optional[float] = None,
    eps: Optional[float] = None,
    max_step: Optional[float] = None,
    bernstein: Optional[BernsteinEstimate] = None,
) -> GrowthZerosReport:
    """
    #zeros in K <= exp(2D / eps) * B_{K,U}(f), compared in log space
    D defaults to the Euclidean diameter of the K samples (the intrinsic one for convex K) and
    eps to the distance from K to the boundary of U.
    """
    estimate = bernstein or bernstein_estimate(probe, K, U, max_step)
    k_points = np.concatenate([c.densify(max_step).vertices if max_step else c.vertices for c in K])
    u_points = np.concatenate([c.densify(max_step).vertices if max_step else c.vertices for c in U])
    D = euclidean_diameter(k_points) if D is None else float(D)
    eps = pi_gap(k_points, u_points) if eps is None else float(eps)
    if eps <= 0:
        raise ConfigViolation(f"K touches the boundary of U (gap {eps:.3g})")
    B = estimate.value
    ln_rhs = 2 * D / eps + math.log(B) if B > 0 else -math.inf
    report = GrowthZerosReport(len(zeros), B, D, eps, ln_rhs, _log_holds(len(zeros), ln_rhs))
    if not report.passed:
        logger.warning(f"Growth-and-zeros audit failed: {len(zeros)} zeros > exp({ln_rhs:.6g})")
    return report


@dataclass(frozen=True)
class KRYReport:
    variation: float
    increment: float
    bernstein: float
    length: float
    curvature: float
    eps: float
    D: float
    gaps: tuple[float, float, float]
    diameters: tuple[float, float]
    ln_rhs: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "variation": self.variation,
            "increment": self.increment,
            "bernstein": self.bernstein,
            "length": self.length,
            "curvature": self.curvature,
            "eps": self.eps,
            "D": self.D,
            "gaps": list(self.gaps),
            "diameters": list(self.diameters),
            "ln_rhs": self.ln_rhs,
            "passed": self.passed,
        }


def kry_check(
    probe: FunctionProbe,
    gamma: Contour,
    U2: Contour,
    U1: Contour,
    U: Contour,
    eps: float,
    D: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    gaps: Optional[tuple[float, float, float]] = None,
    diameters: Optional[tuple[float, float]] = None,
    bernstein: Optional[BernsteinEstimate] = None,
) -> KRYReport:
    """
    V_gamma(f) <= B_{U2,U}(f) * (|gamma| / eps + kappa(gamma) + 1) * exp(5 D / eps)
    U2, U1, U are nested domains given by their boundaries. For planar boundaries the gap and
    diameter conditions are measured; on the cover pass them explicitly.
    Raises:
        ConfigViolation: eps >= 1/2, D <= 1, or a gap or diameter condition fails
    """
    if not 0 < eps < 0.5:
        raise ConfigViolation(f"eps must lie in (0, 1/2), got {eps}")
    if D <= 1:
        raise ConfigViolation(f"D must exceed 1, got {D}")
    if gaps is None:
        g = gamma.vertices
        for inner, outer in ((g, U2), (U2.vertices, U1), (U1.vertices, U)):
            if not _inside(inner, outer):
                raise ConfigViolation(f"Domains are not nested: {outer.label} does not contain the inner set")
        gaps = (
            pi_gap(g, U2.vertices),
            pi_gap(U2.vertices, U1.vertices),
            pi_gap(U1.vertices, U.vertices),
        )
    if diameters is None:
        diameters = (euclidean_diameter(U2.vertices), euclidean_diameter(U1.vertices))
    if min(gaps) < eps * (1 - 1e-9):
        raise ConfigViolation(f"Gap condition fails: gaps {tuple(round(x, 6) for x in gaps)} < eps={eps}")
    if max(diameters) > D:
        raise ConfigViolation(f"Diameter condition fails: {tuple(round(x, 6) for x in diameters)} > D={D}")

    V, R = variation_of_argument(probe, gamma, tol)
    estimate = bernstein or bernstein_estimate(probe, [U2], [U])
    B = estimate.value
    length, kappa = gamma.length(), gamma.curvature()
    ln_rhs = math.log(B) + math.log(length / eps + kappa + 1) + 5 * D / eps if B > 0 else -math.inf
    report = KRYReport(V, R, B, length, kappa, eps, D, tuple(gaps), tuple(diameters), ln_rhs, _log_holds(V, ln_rhs))
    if not report.passed:
        logger.warning(f"KRY audit failed: V={V:.6g} > exp({ln_rhs:.6g})")
    return report


# ---------------------------------------------------------------- Petrov audit


@dataclass(frozen=True)
class PetrovReport:
    value: complex
    kind: str
    reality_residual: float
    reality_samples: int
    l0: int
    sign: int
    residual_plus: float
    residual_minus: float
    residual_flipped: float
    vacuous: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "kind": self.kind,
            "reality_residual": self.reality_residual,
            "reality_samples": self.reality_samples,
            "l0": self.l0,
            "sign": self.sign,
            "residual_plus": self.residual_plus,
            "residual_minus": self.residual_minus,
            "residual_flipped": self.residual_flipped,
            "vacuous": self.vacuous,
            "passed": self.passed,
        }


def _critical_kind(H, cp) -> str:
    x, y = cp.location
    Q = np.real(np.asarray(H.hessian(x, y), dtype=complex))
    if np.linalg.det(Q) < 0:
        return "saddle"
    return "minimum" if Q[0, 0] > 0 else "maximum"


def _real_value(H, cp) -> float:
    a = complex(cp.value)
    if abs(a.imag) > 1e-9 or not H.is_real:
        raise ValueError(f"Petrov audit needs a real polynomial and a real critical value, got {a}")
    return a.real


def petrov_reality(
    system,
    index: int,
    form: OneForm,
    samples: int = 50,
    radius: Optional[float] = None,
) -> tuple[str, float, int, float]:
    """
    Largest relative non-real part of J on real levels a +- s, 0 < s <= radius
    Returns:
        (kind, residual, sample count, peak |J|); the residual is |Re J| / |J| at a saddle and
        |Im J| / |J| at an extremum
    """
    H, tol = system.H, system.tol
    cp = system.critical[index]
    a = _real_value(H, cp)
    kind = _critical_kind(H, cp)
    if radius is None:
        others = [abs(v - a) for k, v in enumerate(system.critical_values) if k != index]
        radius = 0.5 * min(system.nu, *others)
    offsets = radius * np.linspace(0.25, 1.0, samples // 2)
    reality, count, peak = 0.0, 0, 0.0
    for s in np.concatenate([offsets, -offsets]):
        J = integrate_form(local_vanishing_cycle(H, cp, float(s), tol), form, tol)
        peak = max(peak, abs(J))
        part = J.real if kind == "saddle" else J.imag
        reality = max(reality, abs(part) / abs(J) if abs(J) > VANISHING else 0.0)
        count += 1
    logger.debug(f"Reality of J at {a:.6g} ({kind}): residual {reality:.2e} over {count} levels")
    return kind, reality, count, peak


def petrov_audit(
    system,
    oval: Cycle,
    index: int,
    form: OneForm,
    samples: int = 50,
    radius: Optional[float] = None,
) -> PetrovReport:
    """
    Reality of J (the integral over the cycle vanishing at a = value of critical point `index`) and the
    imaginary-part match of I over the oval continued once around a
    Near a saddle J is purely imaginary on both sides of a; near an extremum the vanishing cycle is
    conjugation-invariant and J is real, so the audit checks |Im J| there. The match uses
    Im I(a + rho exp(+-2 pi i)) = +-s l0 Im J with s calibrated on the +2 pi turn; the flipped sign
    must fail.
    """
    H, tol = system.H, system.tol
    cp = system.critical[index]
    a = _real_value(H, cp)
    others = [abs(v - a) for k, v in enumerate(system.critical_values) if k != index]
    rho = radius or 0.5 * min(system.nu, abs(oval.t.real - a), *others)
    kind, reality, sample_count, peak = petrov_reality(system, index, form, samples, rho)
    if peak <= VANISHING:
        logger.info(f"Petrov audit at {a:.6g}: form integrates to zero, vacuous pass")
        return PetrovReport(complex(a), kind, 0.0, sample_count, 0, 1, 0.0, 0.0, 0.0, True, True)

    side = 1.0 if oval.t.real > a else -1.0
    t1 = a + side * rho
    gamma = transport_cycle(oval, BasePath([oval.t, t1]), tol)
    delta = local_vanishing_cycle(H, cp, t1 - a, tol)
    l0 = intersection_index(gamma, delta, tol)
    I0 = integrate_form(gamma, form, tol)
    J = integrate_form(delta, form, tol)
    theta = 0.0 if side > 0 else math.pi
    results = {}
    for turn in (1, -1):
        pts = _arc_points(complex(a), rho, theta, theta + 2 * math.pi * turn, VERTICES_PER_TURN)
        pts[0] = pts[-1] = complex(t1)
        loop = BasePath(pts, label=f"turn{turn:+d}")
        results[turn] = integrate_form(transport_cycle(gamma, loop, tol), form, tol)

    if l0 == 0:
        logger.warning(f"Oval does not meet the cycle vanishing at {a:.6g}; continuation match skipped")
        passed = reality <= tol.reality
        return PetrovReport(complex(a), kind, reality, sample_count, 0, 1, math.nan, math.nan, math.nan, False, passed)

    scale = abs(l0 * J)

    def mismatch(value: complex, expected: float) -> float:
        return abs(value.imag - expected) / scale

    sign = min((1, -1), key=lambda s: (mismatch(results[1], s * l0 * J.imag), -s))
    plus = mismatch(results[1], sign * l0 * J.imag)
    minus = mismatch(results[-1], -sign * l0 * J.imag)
    flipped = mismatch(results[1], -sign * l0 * J.imag)
    passed = reality <= tol.reality and max(plus, minus) <= tol.pl_rtol and flipped > tol.pl_rtol
    logger.info(
        f"Petrov audit at {a:.6g} ({kind}): reality {reality:.2e}, l0={l0}, "
        f"match +{plus:.2e}/-{minus:.2e}, flipped {flipped:.2e}"
    )
    if abs(results[1].real - I0.real) > tol.pl_rtol * max(abs(I0), scale):
        logger.warning(f"Real part of I changed around {a:.6g}: {I0.real:.9g} -> {results[1].real:.9g}")
    return PetrovReport(complex(a), kind, reality, sample_count, int(l0), int(sign), plus, minus, flipped, False, passed)


# ---------------------------------------------------------------- counting


@dataclass(frozen=True)
class SectorCount:
    count: int
    sheets: int
    detours: list[complex]
    samples: SampleSet
    contour: Contour

    @property
    def per_sheet(self) -> float:
        return self.count / self.sheets

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "sheets": self.sheets,
            "per_sheet": self.per_sheet,
            "detours": [[t.real, t.imag] for t in self.detours],
            "samples": int(self.samples.ts.size),
            "min_modulus": self.samples.min_modulus,
        }


def count_zeros_in_annulus_sector(
    probe: FunctionProbe,
    a: complex,
    psi: float,
    nu: float,
    l: int = 1,
    theta0: float = 0.0,
    approach: Optional[BasePath] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    detour_budget: int = 8,
    per_turn: int = VERTICES_PER_TURN,
) -> SectorCount:
    """
    Zeros of f in the log-sector around a (2l sheets of the annulus psi < |t - a| < nu)
    Zeros met on the rays gamma2/gamma4 are bypassed by half-circles outside the sector, of radius
    half the distance to the nearest other detected zero.
    Raises:
        ZeroOnContour: a zero on an arc, or more than detour_budget zeros on the rays
    """
    contour = Contour.sector(a, psi, nu, l, theta0, approach, per_turn)
    a = complex(a)
    found: list[complex] = []
    for _ in range(detour_budget + 1):
        try:
            samples = argument_walk(probe, contour, WINDING_CAP, tol)
            break
        except ZeroOnContour as e:
            piece = contour.piece_of(e.segment) if e.segment is not None else None
            if piece not in ("gamma2", "gamma4"):
                raise
            r = abs(e.t - a)
            room = min(r - psi, nu - r)
            neighbours = [abs(e.t - z) for z in found if abs(e.t - z) > tol.h_min]
            radius = 0.5 * min([room, *neighbours]) if neighbours else 0.5 * room
            logger.info(f"Zero on {piece} at t={e.t:.6g}; detour of radius {radius:.3g}")
            contour = contour.detour(e.segment, e.t, radius)
            found.append(complex(e.t))
    else:
        raise ZeroOnContour(found[-1], 0.0)
    result = SectorCount(samples.winding, 2 * l, found, samples, contour)
    logger.info(f"Sector around {a:.6g} (l={l}, psi={psi:.3g}): {result.count} zeros on {result.sheets} sheets")
    return result


@dataclass(frozen=True)
class SigmaZero:
    t: float
    radius: float
    winding: int

    def to_dict(self) -> dict:
        return {"t": self.t, "radius": self.radius, "winding": self.winding}


@dataclass(frozen=True)
class SigmaZeros:
    zeros: list[SigmaZero]
    samples: SampleSet
    identically_zero: bool
    multiplicity_bound: int

    @property
    def count(self) -> int:
        return len(self.zeros)

    @property
    def confirmed(self) -> bool:
        return all(z.winding == 1 for z in self.zeros)

    @property
    def multiplicity_ok(self) -> bool:
        return all(z.winding <= self.multiplicity_bound for z in self.zeros)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "zeros": [z.to_dict() for z in self.zeros],
            "identically_zero": self.identically_zero,
            "confirmed": self.confirmed,
            "multiplicity_bound": self.multiplicity_bound,
            "multiplicity_ok": self.multiplicity_ok,
            "samples": int(self.samples.ts.size),
        }


def zeros_on_interval(
    probe: FunctionProbe,
    t0: float,
    left: float,
    right: float,
    n: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    count: int = 128,
    per_circle: int = 64,
) -> SigmaZeros:
    """
    Zeros of a real-valued f on [left, right] through t0, located by sign changes of Re f and each
    confirmed by the winding number on a small circle, which must not exceed n**4
    """
    t0 = float(t0)
    step = (right - left) / count
    states, ts, values = [], [], []
    for end in (left, right):
        k = max(1, int(math.ceil(abs(end - t0) / abs(step))))
        state = probe.start(BasePath([t0]))
        run = [state]
        for t in t0 + (end - t0) * np.arange(1, k + 1) / k:
            state = probe.advance(state, complex(t))
            run.append(state)
        if end == left:
            run = run[::-1]
        else:
            run = run[1:]
        states.extend(run)
    ts = np.array([s.t.real for s in states])
    values = np.array([probe.value(s) for s in states])
    samples = SampleSet(ts.astype(complex), values, "sigma")
    if vanishes_identically(samples):
        logger.info("Integral vanishes identically on the interval")
        return SigmaZeros([], samples, True, n ** 4)

    roots: list[float] = []
    for k in range(ts.size - 1):
        fa, fb = values[k].real, values[k + 1].real
        if fa == 0:
            if not roots or abs(roots[-1] - ts[k]) > tol.h_min:
                roots.append(float(ts[k]))
            continue
        if fa * fb < 0:
            base = states[k]
            root = brentq(lambda s: probe.value(probe.advance(base, complex(s))).real, ts[k], ts[k + 1], xtol=1e-12)
            roots.append(float(root))

    zeros = []
    for i, z in enumerate(roots):
        gaps = [abs(z - w) for j, w in enumerate(roots) if j != i]
        radius = min([abs(step), *[0.5 * g for g in gaps]])
        start = z - radius
        circle = Contour.circle(z, radius, theta0=math.pi, history=BasePath.from_points([t0, start]) if start != t0 else None, label=f"zero{i}", per_turn=per_circle)
        w = winding_count(probe, circle, tol)
        zeros.append(SigmaZero(z, radius, w))
        logger.debug(f"Zero at t={z:.9g}: winding {w} on radius {radius:.3g}")
    result = SigmaZeros(zeros, samples, False, n ** 4)
    if not result.confirmed:
        logger.warning(f"Unconfirmed zeros on the interval: {[z.to_dict() for z in zeros if z.winding != 1]}")
    if not result.multiplicity_ok:
        logger.warning(f"A zero exceeds the multiplicity bound {n ** 4}")
    logger.info(f"Found {result.count} zeros on [{left:.6g}, {right:.6g}]")
    return result
