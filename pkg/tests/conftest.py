import math
from pathlib import Path

import numpy as np
import pytest

from numerics.cycles import trace_real_oval
from numerics.monodromy import build_marked_system
from numerics.polynomial_core import Polynomial2, critical_points, normalize
from numerics.tolerances import DEFAULT_TOLERANCES

ROOT_DIR = Path(__file__).resolve().parent.parent
H_STAR_PATH = ROOT_DIR / "data" / "h_star.json"

# source-level oval of H* around the minimum at (1, sqrt(1/2)); (1, 1) lies on it
OVAL_LEVEL = -2.5
OVAL_SEED = (1.0, 1.0)

H_STAR_VALUES = [-2 - 1 / math.sqrt(2), -2 + 1 / math.sqrt(2), 2 - 1 / math.sqrt(2), 2 + 1 / math.sqrt(2)]
# inner critical values of H* after rescaling the outer ones to -2 and 2
H_STAR_INNER = 2 * (-2 + 1 / math.sqrt(2)) / (2 + 1 / math.sqrt(2))


@pytest.fixture(scope="session")
def h_star():
    return Polynomial2.from_terms({(3, 0): 1.0, (1, 0): -3.0, (0, 3): 1.0, (0, 1): -1.5})


@pytest.fixture(scope="session")
def h_star_report(h_star):
    return normalize(h_star, DEFAULT_TOLERANCES)


@pytest.fixture(scope="session")
def h_star_normalized(h_star_report):
    H = h_star_report.rescaled
    return H, critical_points(H, DEFAULT_TOLERANCES)


@pytest.fixture(scope="session")
def h_star_system(h_star_report, h_star_normalized):
    """Marked system of the normalized H* at t0 = 0"""
    H, crit = h_star_normalized
    return build_marked_system(H, 0.0, h_star_report.nu, DEFAULT_TOLERANCES, crit)


@pytest.fixture(scope="session")
def oval_level(h_star_report):
    return float(h_star_report.to_normalized_value(OVAL_LEVEL).real)


@pytest.fixture(scope="session")
def h_star_oval(h_star_report, h_star_normalized, oval_level):
    H, _ = h_star_normalized
    u, v = h_star_report.source_frame.to_normalized(*OVAL_SEED)
    return trace_real_oval(H, oval_level, (float(np.real(u)), float(np.real(v))), DEFAULT_TOLERANCES)


@pytest.fixture(scope="session")
def oval_system(h_star_report, h_star_normalized, oval_level):
    """Marked system based at the level of the oval"""
    H, crit = h_star_normalized
    return build_marked_system(H, oval_level, h_star_report.nu, DEFAULT_TOLERANCES, crit)
