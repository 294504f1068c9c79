"""
Certified interval arithmetic built on mpmath's interval context.

Irrational quantities (square roots, arctangents, pi) are evaluated as
mpmath.iv intervals at a working precision, and the endpoints are read
back as exact Fractions. All decisions downstream are exact comparisons
against those endpoints; when an interval is too wide the evaluation is
repeated at doubled precision.
"""

import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Callable, Optional, Tuple

from mpmath import iv, libmp

from geom_kernel import format_scalar

logger = logging.getLogger(__name__)

START_PRECISION_BITS = 64
DEFAULT_MAX_PRECISION_BITS = 4096
DEFAULT_TOLERANCE = Fraction(1, 10 ** 12)

# iv.prec is process-global state
_IV_LOCK = threading.RLock()


class PrecisionExhaustedError(ValueError):
    """An interval could not be made narrow enough within the precision cap"""


@dataclass(frozen=True)
class CertifiedInterval:
    """Closed interval [lower, upper] with exact rational endpoints"""
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"Interval lower bound {self.lower} exceeds upper bound {self.upper}")

    @classmethod
    def exact(cls, value: Fraction) -> "CertifiedInterval":
        return cls(Fraction(value), Fraction(value))

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, value: Fraction) -> bool:
        return self.lower <= value <= self.upper

    def __add__(self, other: "CertifiedInterval") -> "CertifiedInterval":
        return CertifiedInterval(self.lower + other.lower, self.upper + other.upper)

    def to_dict(self):
        return {
            "lower": format_scalar(self.lower),
            "upper": format_scalar(self.upper),
            "approx": float(self.midpoint),
        }


@contextmanager
def _working_precision(bits: int):
    with _IV_LOCK:
        saved = iv.prec
        iv.prec = bits
        try:
            yield
        finally:
            iv.prec = saved


def _iv(q: Fraction):
    """Interval enclosing an exact rational at the current precision"""
    q = Fraction(q)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def _atan(x):
    # the interval context only provides atan2
    return iv.atan2(x, iv.mpf(1))


def _endpoints(value) -> Tuple[Fraction, Fraction]:
    a, b = value._mpi_
    for end in (a, b):
        if end in (libmp.finf, libmp.fninf, libmp.fnan):
            raise PrecisionExhaustedError("Interval evaluation produced an unbounded enclosure")
    # mpz under gmpy2
    return tuple(Fraction(int(p), int(q)) for p, q in (libmp.to_rational(a), libmp.to_rational(b)))


def certify(expression: Callable[[], object], tolerance: Fraction = DEFAULT_TOLERANCE,
            max_bits: int = DEFAULT_MAX_PRECISION_BITS, label: str = "value") -> CertifiedInterval:
    """
    Evaluate an mpmath.iv expression until its enclosure is at most
    tolerance wide, doubling the working precision each round.
    """
    bits = START_PRECISION_BITS
    while True:
        with _working_precision(bits):
            lower, upper = _endpoints(expression())
        if upper - lower <= tolerance:
            return CertifiedInterval(lower, upper)
        if bits >= max_bits:
            raise PrecisionExhaustedError(
                f"Could not certify {label} to width {float(tolerance):.3g} within {max_bits} bits "
                f"(width {float(upper - lower):.3g})"
            )
        bits *= 2
        logger.debug(f"Refining {label} at {bits} bits")


def pi_bounds(tolerance: Fraction = DEFAULT_TOLERANCE, max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> CertifiedInterval:
    return certify(lambda: iv.pi * 1, tolerance, max_bits, "pi")


def sqrt_bounds(q: Fraction, tolerance: Fraction = DEFAULT_TOLERANCE,
                max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> CertifiedInterval:
    q = Fraction(q)
    if q < 0:
        raise ValueError(f"sqrt of negative value {q}")
    return certify(lambda: iv.sqrt(_iv(q)), tolerance, max_bits, f"sqrt({q})")


def arctan_bounds(q: Fraction, tolerance: Fraction = DEFAULT_TOLERANCE,
                  max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> CertifiedInterval:
    q = Fraction(q)
    if q == 0:
        return CertifiedInterval.exact(Fraction(0))
    return certify(lambda: _atan(_iv(q)), tolerance, max_bits, f"atan({q})")


def tan_phi_bounds(c_prime_sq: Fraction, cos_alpha_prime: Fraction,
                   tolerance: Fraction = DEFAULT_TOLERANCE,
                   max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> CertifiedInterval:
    """Enclosure of sin(a') / (c' + cos(a')) from the exact c'^2 and cos(a')"""
    sin_sq = 1 - cos_alpha_prime * cos_alpha_prime
    if sin_sq == 0:
        return CertifiedInterval.exact(Fraction(0))

    def expression():
        return iv.sqrt(_iv(sin_sq)) / (iv.sqrt(_iv(c_prime_sq)) + _iv(cos_alpha_prime))

    return certify(expression, tolerance, max_bits, "tan(phi_max)")


def angle_from_cosine_data(value: Fraction, dot_sign: int, tolerance: Fraction = DEFAULT_TOLERANCE,
                           max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> CertifiedInterval:
    """
    Angle in [0, pi] whose cosine is dot_sign * sqrt(value), using the
    dot sign to pick the quadrant.
    """
    value = Fraction(value)
    if not 0 <= value <= 1:
        raise ValueError(f"Squared cosine must lie in [0, 1], got {value}")
    if dot_sign == 0:
        return certify(lambda: iv.pi / 2, tolerance, max_bits, "pi/2")
    if value == 1:
        if dot_sign > 0:
            return CertifiedInterval.exact(Fraction(0))
        return pi_bounds(tolerance, max_bits)

    ratio = (1 - value) / value  # tan^2 of the acute angle

    if dot_sign > 0:
        return certify(lambda: _atan(iv.sqrt(_iv(ratio))), tolerance, max_bits, "acute angle")
    return certify(lambda: iv.pi - _atan(iv.sqrt(_iv(ratio))), tolerance, max_bits, "obtuse angle")


def inclination_bounds(u: Fraction, v: Fraction, v_scale_sq: Fraction,
                       tolerance: Fraction = DEFAULT_TOLERANCE,
                       max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> CertifiedInterval:
    """
    Inclination in [0, pi) of the line with direction (u, v / sqrt(v_scale_sq)).
    Signs are decided exactly, so the result never wraps across 0.
    """
    u, v, v_scale_sq = Fraction(u), Fraction(v), Fraction(v_scale_sq)
    if u == 0 and v == 0:
        raise ValueError("Inclination of the zero vector is undefined")
    if v == 0:
        return CertifiedInterval.exact(Fraction(0))
    if u == 0:
        return certify(lambda: iv.pi / 2, tolerance, max_bits, "pi/2")

    ratio = v / u
    if ratio > 0:
        return certify(lambda: _atan(_iv(ratio) / iv.sqrt(_iv(v_scale_sq))), tolerance, max_bits, "inclination")
    return certify(lambda: iv.pi + _atan(_iv(ratio) / iv.sqrt(_iv(v_scale_sq))), tolerance, max_bits, "inclination")


def cosine_upper_bound(degrees: Fraction, grid: int = 10 ** 12,
                       max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> Fraction:
    """Rational r with cos(degrees) <= r, on a 1/grid lattice"""
    degrees = Fraction(degrees)
    enclosure = certify(lambda: iv.cos(_iv(degrees) * iv.pi / 180), Fraction(1, grid * 10), max_bits,
                        f"cos({degrees} deg)")
    return Fraction(-floor(-enclosure.upper * grid), grid)


def floor_ratio(interval: CertifiedInterval, step: Fraction) -> Optional[int]:
    """floor(x / step) if it is the same for the whole interval, else None"""
    lo = floor(interval.lower / step)
    hi = floor(interval.upper / step)
    return lo if lo == hi else None
