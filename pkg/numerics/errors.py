from typing import Optional


class AbelianError(Exception):
    """Base class for every failure raised by the numerics package"""


# polynomial_core

class NonIsolatedCriticalLocus(AbelianError, ValueError):
    """Elimination resultant vanishes identically: the critical set is not finite"""


class NotEnoughCriticalValues(AbelianError, ValueError):
    """All critical values coincide, no enclosing disk of positive radius exists"""


class ZeroPolynomial(AbelianError, ValueError):
    pass


class NotUltraMorse(AbelianError):
    def __init__(self, clause: str, diagnosis: str):
        super().__init__(f"clause ({clause}) failed: {diagnosis}")
        self.clause = clause
        self.diagnosis = diagnosis


class RealityViolation(AbelianError):
    """A real polynomial produced a non-real balancing shift"""


# cycles

class OpenComponent(AbelianError, RuntimeError):
    pass


class SingularEncounter(AbelianError, RuntimeError):
    pass


class ProjectionDiverged(AbelianError, RuntimeError):
    pass


class NotMorse(AbelianError, ValueError):
    pass


class StepUnderflow(AbelianError, RuntimeError):
    pass


class ResampleOverflow(AbelianError, RuntimeError):
    pass


class NoConvergence(AbelianError, RuntimeError):
    pass


class TangentialIntersection(AbelianError, RuntimeError):
    pass


# monodromy

class ClearanceViolation(AbelianError):
    pass


class DisconnectedGraph(AbelianError):
    pass


class IllConditioned(AbelianError, RuntimeError):
    pass


class NonIntegral(AbelianError, RuntimeError):
    pass


class DecompositionViolation(AbelianError):
    pass


class DiameterViolation(AbelianError):
    pass


# periods

class NoStabilization(AbelianError, RuntimeError):
    pass


# zerocount

class ZeroOnContour(AbelianError, RuntimeError):
    def __init__(self, t: complex, modulus: float, segment: Optional[int] = None):
        super().__init__(f"|f| = {modulus:.3e} at t = {t:.6g} is below the zero threshold")
        self.t = t
        self.modulus = modulus
        self.segment = segment


class RefinementOverflow(AbelianError, RuntimeError):
    pass


class DegenerateK(AbelianError, ValueError):
    pass


class ConfigViolation(AbelianError, ValueError):
    pass


# bounds

class OutOfRange(AbelianError, ValueError):
    pass


class RTooSmall(AbelianError, ValueError):
    pass


class Coincidence(AbelianError, ValueError):
    pass
