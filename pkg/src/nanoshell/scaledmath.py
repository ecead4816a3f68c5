"""Scalar (mantissa, log-scale) arithmetic.

A scaled scalar is a pair ``(m, e)`` representing ``m * exp(e)`` with complex
mantissa ``m`` and real ``e``.  The multilayer recurrences run on these pairs
so that Riccati-Bessel magnitudes, which grow roughly like (2l-1)!!, stay
representable at angular momenta far beyond the physical-optics regime.
Scale factors cancel analytically in matched products, so observable
quantities collapse back to ordinary doubles at the end.
"""

import cmath
import math

from .errors import RangeError

# |log| of the largest/smallest collapsible magnitude (double precision)
LOG_HUGE = 700.0
LOG_TINY = -740.0

# renormalize mantissas once they leave this comfort band
_BIG = 1e100
_SMALL = 1e-100

ZERO = (0j, 0.0)


def canonical(m, e):
    """Pull the mantissa magnitude back into a safe band."""
    a = abs(m)
    if a == 0.0:
        return 0j, 0.0
    if _SMALL < a < _BIG:
        return m, e
    if not math.isfinite(a):
        raise RangeError("scaled mantissa overflowed; argument out of range")
    return m / a, e + math.log(a)


def mul(x, y):
    return canonical(x[0] * y[0], x[1] + y[1])


def div(x, y):
    if y[0] == 0:
        raise ZeroDivisionError("scaled division by zero")
    return canonical(x[0] / y[0], x[1] - y[1])


def add(x, y):
    mx, ex = x
    my, ey = y
    if mx == 0:
        return y
    if my == 0:
        return x
    if ex < ey:
        mx, ex, my, ey = my, ey, mx, ex
    d = ey - ex
    if d < LOG_TINY:
        return mx, ex
    return canonical(mx + my * math.exp(d), ex)


def sub(x, y):
    return add(x, (-y[0], y[1]))


def scale(x, c):
    """Multiply a scaled scalar by a plain complex factor."""
    return canonical(x[0] * c, x[1])


def from_complex(c):
    return canonical(complex(c), 0.0)


def collapse(x, context=""):
    """Return the plain complex value, 0 on underflow, RangeError on overflow."""
    m, e = x
    if m == 0:
        return 0j
    t = e + math.log(abs(m))
    if t > LOG_HUGE:
        raise RangeError(f"value overflows double precision{': ' + context if context else ''}")
    if t < LOG_TINY:
        return 0j
    return m * math.exp(e)


def log_abs(x):
    """log|x| of a scaled scalar (-inf for zero)."""
    m, e = x
    if m == 0:
        return -math.inf
    return e + math.log(abs(m))


def scaled_exp(w):
    """exp(w) for complex w as a scaled scalar (never overflows)."""
    return cmath.exp(1j * w.imag), w.real
