import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from scipy.special import logsumexp

from .errors import Coincidence, OutOfRange, RTooSmall

logger = logging.getLogger(__name__)

APPENDIX_CONSTANTS = (5000, 5)
LN2 = math.log(2.0)


def _check_gaps(c_prime: float, c_doubleprime: float) -> None:
    if not (0 < c_prime <= 1 and 0 < c_doubleprime <= 1):
        raise OutOfRange(f"Gap functions must lie in (0, 1], got c'={c_prime}, c''={c_doubleprime}")


def _check_degree(n: int) -> None:
    if n < 2:
        raise OutOfRange(f"n must be at least 2, got {n}")


def ln_prefactor(c_prime: float) -> float:
    """ln(1 - ln c')"""
    return math.log(1.0 - math.log(c_prime))


def ln_A(n: int, c_doubleprime: float) -> float:
    """ln A = n**4 / c''"""
    return n ** 4 / c_doubleprime


def _ln_power_bound(n: int, c_prime: float, c_doubleprime: float, power: float) -> float:
    _check_degree(n)
    _check_gaps(c_prime, c_doubleprime)
    return ln_prefactor(c_prime) + power * ln_A(n, c_doubleprime)


# ---------------------------------------------------------------- zeros of real ovals


def theorem_A(n: int, c_prime: float, c_doubleprime: float, c: float = 5000) -> float:
    """ln[(1 - ln c') exp(c n**4 / c'')]; c is 5000 unless the appendix constant is read as 5"""
    if c not in APPENDIX_CONSTANTS:
        raise OutOfRange(f"Appendix constant must be one of {APPENDIX_CONSTANTS}, got {c}")
    return _ln_power_bound(n, c_prime, c_doubleprime, c)


def theorem_A1(n: int, c_prime: float, c_doubleprime: float) -> float:
    """Zeros on sigma(t0, nu): (1 - ln c') A**578"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 578)


def theorem_A2(n: int, c_prime: float, c_doubleprime: float) -> float:
    """Zeros near the ends of sigma: (1 - ln c') A**4800"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 4800)


def theorem_A_combined(n: int, c_prime: float, c_doubleprime: float) -> float:
    """2 (1 - ln c') A**4800, the sum of the A1 and A2 counts"""
    return LN2 + theorem_A2(n, c_prime, c_doubleprime)


def theorem_A_subdivided(n: int, c_prime: float, c_doubleprime: float) -> float:
    """(1 - ln c') A**4801, the count after subdividing sigma into pieces of length nu"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 4801)


def vanishing_disk_zeros(n: int, c_prime: float, c_doubleprime: float) -> float:
    """Zeros of an integral over delta_l in the nu-disk around a_l: (1 - ln c') A**578"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 578)


# ---------------------------------------------------------------- Poincare and Euclidean disks


def r_floor(n: int, c_doubleprime: float) -> float:
    return 288 * n ** 4 / c_doubleprime


def theorem_B(n: int, c_prime: float, c_doubleprime: float, l: int, R: float) -> float:
    """ln[(1 - ln c') (exp(7R) + A**4800 exp(481 l / c''))], R > 288 n**4 / c''"""
    _check_degree(n)
    _check_gaps(c_prime, c_doubleprime)
    if not R > r_floor(n, c_doubleprime):
        raise RTooSmall(f"R must exceed {r_floor(n, c_doubleprime):.6g}, got {R}")
    if l < 0:
        raise OutOfRange(f"l must be nonnegative, got {l}")
    tail = 4800 * ln_A(n, c_doubleprime) + 481 * l / c_doubleprime
    return ln_prefactor(c_prime) + float(logsumexp([7 * R, tail]))


def theorem_B1(n: int, c_prime: float, c_doubleprime: float, R: float) -> float:
    """Zeros in the Poincare disk of radius R: (1 - ln c') exp(7R), R >= 288 n**4 / c''"""
    _check_degree(n)
    _check_gaps(c_prime, c_doubleprime)
    if R < r_floor(n, c_doubleprime):
        raise RTooSmall(f"R must be at least {r_floor(n, c_doubleprime):.6g}, got {R}")
    return ln_prefactor(c_prime) + 7 * R


def theorem_B2(n: int, c_prime: float, c_doubleprime: float, l: int) -> float:
    """Zeros in D(l, a) and D(l, b): (1 - ln c') exp(4700 n**4 / c'' + 481 l / c'')"""
    if l < 0:
        raise OutOfRange(f"l must be nonnegative, got {l}")
    return _ln_power_bound(n, c_prime, c_doubleprime, 4700) + 481 * l / c_doubleprime


def euclidean_disk_zeros(n: int, c_prime: float, c_doubleprime: float, R: float, beta: float) -> float:
    """(1 - ln c') exp(9R / beta) for R >= 36 n**2 and 0 < beta <= nu / 2"""
    _check_degree(n)
    _check_gaps(c_prime, c_doubleprime)
    nu = c_doubleprime / (4 * n * n)
    if R < 36 * n * n:
        raise RTooSmall(f"R must be at least {36 * n * n}, got {R}")
    if not 0 < beta <= nu / 2:
        raise OutOfRange(f"beta must lie in (0, nu/2 = {nu / 2:.6g}], got {beta}")
    return ln_prefactor(c_prime) + 9 * R / beta


# ---------------------------------------------------------------- the Main Lemma and its constants


def main_lemma_bounds(n: int, c_prime: float, c_doubleprime: float) -> dict[str, float]:
    """
    Eq1.8: ln of the bound (1 - ln c') A**2 on the Bernstein index
    Bukpol: the polynomial bound 2700 n**18 / c'' - 30 n**6 ln c' on the same index (not a logarithm)
    """
    _check_degree(n)
    _check_gaps(c_prime, c_doubleprime)
    return {
        "Eq1.8": ln_prefactor(c_prime) + 2 * ln_A(n, c_doubleprime),
        "Bukpol": 2700 * n ** 18 / c_doubleprime - 30 * n ** 6 * math.log(c_prime),
    }


def ln_M0(n: int, c_prime: float, c_doubleprime: float) -> float:
    """2**(2600 n**16 / c'') * c'**(-28 n**4)"""
    _check_gaps(c_prime, c_doubleprime)
    return 2600 * n ** 16 / c_doubleprime * LN2 - 28 * n ** 4 * math.log(c_prime)


def ln_M1(n: int, c_prime: float, alpha_length: float, beta: float) -> float:
    """2**(10 n**12 (|alpha| + 5) / beta) * c'**(-28 n**4)"""
    if beta <= 0 or alpha_length < 0:
        raise OutOfRange(f"Need beta > 0 and |alpha| >= 0, got beta={beta}, |alpha|={alpha_length}")
    if not 0 < c_prime <= 1:
        raise OutOfRange(f"c' must lie in (0, 1], got {c_prime}")
    return 10 * n ** 12 * (alpha_length + 5) / beta * LN2 - 28 * n ** 4 * math.log(c_prime)


def ln_M2(n: int, c_prime: float, alpha_tilde: float, V: float, beta: float, t_prime: complex) -> float:
    """2**(20 n**12 (|alpha~| + V + 5) / beta) * c'**(-28 n**4) * max(1, (|t'| / 5)**2)"""
    if beta <= 0 or alpha_tilde < 0 or V < 0:
        raise OutOfRange(f"Need beta > 0 and nonnegative lengths, got beta={beta}, |alpha~|={alpha_tilde}, V={V}")
    if not 0 < c_prime <= 1:
        raise OutOfRange(f"c' must lie in (0, 1], got {c_prime}")
    return (
        20 * n ** 12 * (alpha_tilde + V + 5) / beta * LN2
        - 28 * n ** 4 * math.log(c_prime)
        + math.log(max(1.0, (abs(t_prime) / 5) ** 2))
    )


def constants_M(
    n: int,
    c_prime: float,
    c_doubleprime: float,
    alpha_length: float,
    beta: float,
    alpha_tilde: float = 0.0,
    V: float = 0.0,
    t_prime: complex = 0.0,
) -> dict[str, float]:
    """ln M0, ln M1, ln M2 and the integral bounds 2**(-2n) M1, 2**(-2n) M2"""
    m1 = ln_M1(n, c_prime, alpha_length, beta)
    m2 = ln_M2(n, c_prime, alpha_tilde, V, beta, t_prime)
    return {
        "M0": ln_M0(n, c_prime, c_doubleprime),
        "M1": m1,
        "M1_integral": m1 - 2 * n * LN2,
        "M2": m2,
        "M2_integral": m2 - 2 * n * LN2,
    }


def ln_delta0(n: int, c_prime: float, c_doubleprime: float) -> float:
    """Lower bound c'**(6 n**3) c''**(n**2) n**(-62 n**3) for |det| of the period matrix"""
    _check_gaps(c_prime, c_doubleprime)
    return 6 * n ** 3 * math.log(c_prime) + n * n * math.log(c_doubleprime) - 62 * n ** 3 * math.log(n)


def ln_m_lower(n: int, c_prime: float, c_doubleprime: float) -> float:
    """ln m0 >= ln Delta0 - (mu - 1) ln M0 - mu ln n - ln 2"""
    mu = n * n
    return ln_delta0(n, c_prime, c_doubleprime) - (mu - 1) * ln_M0(n, c_prime, c_doubleprime) - mu * math.log(n) - LN2


def bernstein_upper(n: int, c_prime: float, c_doubleprime: float) -> float:
    """B_{K,U} <= (mu + 4) ln n + mu ln M0 - ln Delta0 + ln 2 (a bound on B itself)"""
    mu = n * n
    return (mu + 4) * math.log(n) + mu * ln_M0(n, c_prime, c_doubleprime) - ln_delta0(n, c_prime, c_doubleprime) + LN2


def oval_integral_bound(n: int, c_prime: float, alpha_length: float, beta: float) -> float:
    """ln of M1 / n**2, the bound on the integral over an oval"""
    return ln_M1(n, c_prime, alpha_length, beta) - 2 * math.log(n)


def theorem_C_radius(n: int, c_prime: float) -> float:
    """ln R0 = -14 n**3 ln c' + 65 n**3 ln n"""
    if c_prime <= 0:
        raise OutOfRange(f"c' must be positive, got {c_prime}")
    return -14 * n ** 3 * math.log(c_prime) + 65 * n ** 3 * math.log(n)


# ---------------------------------------------------------------- argument increments around a


def sector_variation(n: int, c_prime: float, c_doubleprime: float, l: int = 0) -> float:
    """Variation of arg I along the nu-circle arc: (1 - ln c') A**4700 exp(481 l / c'')"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 4700) + 481 * l / c_doubleprime


def vanishing_integral_zeros(n: int, c_prime: float, c_doubleprime: float) -> float:
    """Zeros of J in the nu-disk: (1 / 2pi) (1 - ln c') A**4700"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 4700) - math.log(2 * math.pi)


def cut_increment(n: int, c_prime: float, c_doubleprime: float) -> float:
    """|R| along the cut rays: pi (1 - ln c') A**4700"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 4700) + math.log(math.pi)


def sector_zeros(n: int, c_prime: float, c_doubleprime: float) -> float:
    """Zeros in the modified sector: (1/2) (1 - ln c') A**4700"""
    return _ln_power_bound(n, c_prime, c_doubleprime, 4700) - LN2


def petrov_increment(zeros_of_J: int) -> float:
    """|R| along a detoured cut ray: pi (2N + 1)"""
    return math.pi * (2 * zeros_of_J + 1)


def inner_arc_increment(n: int) -> float:
    """|R| along the small circle around a: pi (4 n**4 + 1)"""
    return math.pi * (4 * n ** 4 + 1)


def mardesic_multiplicity(n: int) -> int:
    return n ** 4


def bernstein_growth(B0: float, l: int) -> float:
    """B1 <= B0 + ln(4l + 1)"""
    return B0 + math.log(4 * l + 1)


def gamma_length(l: int, nu: float) -> float:
    return 4 * math.pi * l * nu


def gamma_curvature(l: int) -> float:
    return 4 * math.pi * l


def kry_parameters(n: int, c_doubleprime: float, l: int = 1) -> dict[str, float]:
    """eps = nu / 6 and D = 36 n**2 + 4 l / n**2 for the nu-circle configuration"""
    nu = c_doubleprime / (4 * n * n)
    return {"eps": nu / 6, "D": 36 * n * n + 4 * l / (n * n), "nu": nu}


# ---------------------------------------------------------------- Poincare metric


def poincare_diameter(n: int, c_doubleprime: float) -> float:
    """Poincare diameter of K: 288 n**4 / c''"""
    return r_floor(n, c_doubleprime)


def rho_bound(D: float, eps: float) -> float:
    """rho <= 2D / eps"""
    if eps <= 0:
        raise OutOfRange(f"eps must be positive, got {eps}")
    return 2 * D / eps


def poincare_ratio(sigma: float) -> float:
    """(e**sigma + 1) / (e**sigma - 1), the density ratio on a set sigma-deep inside U"""
    if sigma <= 0:
        raise OutOfRange(f"sigma must be positive, got {sigma}")
    return 1.0 / math.tanh(sigma / 2)


def poincare_pab(t: complex, a: complex, b: complex) -> float:
    """Lower bound of the Poincare density of the plane minus {a, b} at t"""
    t, a, b = complex(t), complex(a), complex(b)
    if a == b:
        raise OutOfRange("a and b must be distinct")
    if t in (a, b):
        raise Coincidence(f"t = {t} coincides with a puncture")
    near = min(abs(t - a), abs(t - b))
    log_term = min(abs(math.log(abs(t - c) / abs(a - b))) for c in (a, b))
    return 1.0 / (near * (log_term + 5))


def poincare_constant(n: int, c_doubleprime: float) -> float:
    """C = 2 ln n - ln c'' + 5"""
    return 2 * math.log(n) - math.log(c_doubleprime) + 5


def poincare_pb(t: complex, a: complex, n: int, c_doubleprime: float) -> float:
    """[|t - a| (|ln|t - a|| + C)]**-1 for a critical value a of a balanced polynomial"""
    d = abs(complex(t) - complex(a))
    if d == 0:
        raise Coincidence(f"t = {t} coincides with the critical value {a}")
    return 1.0 / (d * (abs(math.log(d)) + poincare_constant(n, c_doubleprime)))


def poincare_lower_bound(t: complex, values: Iterable[complex], n: int, c_doubleprime: float) -> float:
    """Largest of the per-value bounds; each holds at t"""
    return max(poincare_pb(t, a, n, c_doubleprime) for a in values)


# ---------------------------------------------------------------- report


@dataclass
class BoundsReport:
    n: int
    c_prime: float
    c_doubleprime: float
    ln_A: float
    c_appendix: int
    l: int
    R: float
    entries: dict[str, float] = field(default_factory=dict)
    plain: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "c_prime": self.c_prime,
            "c_doubleprime": self.c_doubleprime,
            "ln_A": self.ln_A,
            "c_appendix": self.c_appendix,
            "l": self.l,
            "R": self.R,
            "entries": dict(sorted(self.entries.items())),
            "plain": dict(sorted(self.plain.items())),
        }

    def table(self) -> list[tuple[str, float, float]]:
        """(name, ln value, log10 value) rows"""
        return [(k, v, v / math.log(10)) for k, v in sorted(self.entries.items())]


def bounds_report(
    n: int,
    c_prime: float,
    c_doubleprime: float,
    c_appendix: int = 5000,
    l: int = 1,
    R: Optional[float] = None,
    alpha_length: float = 9.0,
    beta: Optional[float] = None,
    t: Optional[complex] = None,
    values: Sequence[complex] = (),
) -> BoundsReport:
    """
    Every bound for the given gap functions
    Args:
        n: degree minus one
        c_prime, c_doubleprime: gap functions in (0, 1]
        c_appendix: 5000 or 5
        l: winding extent for the B-type bounds
        R: radius for the TheoremB entries (defaults to the smallest integer above 288 n**4 / c'')
        alpha_length, beta: path data for M1 (beta defaults to nu / 2)
        t, values: point and critical values for the Poincare density bound
    Returns:
        BoundsReport with natural-log entries and plain values
    """
    _check_degree(n)
    _check_gaps(c_prime, c_doubleprime)
    nu = c_doubleprime / (4 * n * n)
    R = float(math.floor(r_floor(n, c_doubleprime)) + 1) if R is None else float(R)
    beta = nu / 2 if beta is None else beta
    lemma = main_lemma_bounds(n, c_prime, c_doubleprime)
    M = constants_M(n, c_prime, c_doubleprime, alpha_length, beta)
    report = BoundsReport(n, c_prime, c_doubleprime, ln_A(n, c_doubleprime), c_appendix, l, R)
    report.entries = {
        "TheoremA": theorem_A(n, c_prime, c_doubleprime, c_appendix),
        "TheoremA1": theorem_A1(n, c_prime, c_doubleprime),
        "TheoremA2": theorem_A2(n, c_prime, c_doubleprime),
        "TheoremA_combined": theorem_A_combined(n, c_prime, c_doubleprime),
        "TheoremA_subdivided": theorem_A_subdivided(n, c_prime, c_doubleprime),
        "VanishingDiskZeros": vanishing_disk_zeros(n, c_prime, c_doubleprime),
        "TheoremB": theorem_B(n, c_prime, c_doubleprime, l, R),
        "TheoremB1": theorem_B1(n, c_prime, c_doubleprime, R),
        "TheoremB2": theorem_B2(n, c_prime, c_doubleprime, l),
        "EuclideanDiskZeros": euclidean_disk_zeros(n, c_prime, c_doubleprime, 36 * n * n, nu / 2),
        "MainLemma_Eq1.8": lemma["Eq1.8"],
        "M0": M["M0"],
        "M1": M["M1"],
        "M1_integral": M["M1_integral"],
        "M2": M["M2"],
        "M2_integral": M["M2_integral"],
        "OvalIntegral": oval_integral_bound(n, c_prime, alpha_length, beta),
        "Delta0": ln_delta0(n, c_prime, c_doubleprime),
        "m_lower": ln_m_lower(n, c_prime, c_doubleprime),
        "TheoremC_R0": theorem_C_radius(n, c_prime),
        "SectorVariation": sector_variation(n, c_prime, c_doubleprime, l),
        "VanishingIntegralZeros": vanishing_integral_zeros(n, c_prime, c_doubleprime),
        "CutIncrement": cut_increment(n, c_prime, c_doubleprime),
        "SectorZeros": sector_zeros(n, c_prime, c_doubleprime),
        "Bukpol": math.log(lemma["Bukpol"]),
        "MardesicMultiplicity": 4 * math.log(n),
    }
    report.plain = {
        "Bukpol": lemma["Bukpol"],
        "BernsteinUpper": bernstein_upper(n, c_prime, c_doubleprime),
        "MardesicMultiplicity": float(mardesic_multiplicity(n)),
        "InnerArcIncrement": inner_arc_increment(n),
        "PoincareDiameterK": poincare_diameter(n, c_doubleprime),
        "GammaLength": gamma_length(l, nu),
        "GammaCurvature": gamma_curvature(l),
        "nu": nu,
    }
    if t is not None and values:
        lb = poincare_lower_bound(t, values, n, c_doubleprime)
        report.plain["PoincareLB"] = lb
        report.entries["PoincareLB"] = math.log(lb)
    logger.info(
        f"Bounds for n={n}, c'={c_prime:.6g}, c''={c_doubleprime:.6g}: "
        f"ln A1={report.entries['TheoremA1']:.6g}, ln A={report.entries['TheoremA']:.6g}"
    )
    return report
