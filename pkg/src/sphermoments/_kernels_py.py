"""Pure-Python scalar kernels: gamma and modified Bessel machinery.

Mirrors the compiled extension ``sphermoments._kernels`` operation for
operation (same branch thresholds, same constants); ``_backend`` selects
whichever is importable.  Callers are expected to have validated their
inputs (finite, in domain) before reaching this layer.
"""

import math

from .errors import ConvergenceError

# method codes shared with the compiled backend
SERIES = 0
ASYMPTOTIC = 1
HALF_INTEGER = 2

SERIES_MAX_TERMS = 500
SERIES_RTOL = 1e-17
UNSCALED_OVERFLOW_X = 700.0
HALF_INTEGER_MIN_X = 1.0
RATIO_MAX_ITER = 50_000

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def series_cutoff(p):
    """Largest x handled by the power series for order p."""
    return max(30.0, 0.5 * p * p + 10.0)


def gamma(x):
    """Gamma function for x > 0 (Lanczos approximation, g=7, 9 terms)."""
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEFFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power so arguments up to x ~ 170 stay representable
    half_pow = math.pow(t, 0.5 * (z + 0.5))
    return math.sqrt(2.0 * math.pi) * acc * half_pow * math.exp(-t) * half_pow


def _bessel_series(p, x):
    """Power-series I_p(x); valid for x <= series_cutoff(p)."""
    half = 0.5 * x
    term = math.pow(half, p) / gamma(p + 1.0)
    acc = term
    q = half * half
    for m in range(1, SERIES_MAX_TERMS + 1):
        term *= q / (m * (p + m))
        acc += term
        if term <= acc * SERIES_RTOL:
            if not math.isfinite(acc):
                break
            return acc
    raise ConvergenceError(
        f"Bessel series did not converge in {SERIES_MAX_TERMS} terms "
        f"(p={p}, x={x})"
    )


def _bessel_asymptotic_scaled(p, x):
    """Large-x expansion of e^(-x) I_p(x), truncated at the smallest term."""
    mu = 4.0 * p * p
    acc = 1.0
    term = 1.0
    for m in range(1, 1000):
        nxt = term * (((2 * m - 1) ** 2 - mu) / (8.0 * x * m))
        if abs(nxt) >= abs(term):
            break
        term = nxt
        acc += term
        if abs(term) <= abs(acc) * SERIES_RTOL:
            break
    return acc / math.sqrt(2.0 * math.pi * x)


def _half_integer_scaled(p, x):
    """Closed-form e^(-x) I_p(x) for p in {1/2, 3/2, 5/2}."""
    s = math.sqrt(2.0 / (math.pi * x))
    em = math.exp(-2.0 * x)
    sh = 0.5 * (1.0 - em)  # e^{-x} sinh x
    ch = 0.5 * (1.0 + em)  # e^{-x} cosh x
    if p == 0.5:
        return s * sh
    if p == 1.5:
        return s * (ch - sh / x)
    return s * ((1.0 + 3.0 / (x * x)) * sh - (3.0 / x) * ch)


def bessel_i_parts(p, x):
    """Evaluate I_p(x); returns (value, scaled_value, method_code).

    scaled_value is e^(-x) I_p(x); value is +inf above the unscaled
    overflow threshold.
    """
    if x == 0.0:
        v = 1.0 if p == 0.0 else 0.0
        return v, v, SERIES
    if p in (0.5, 1.5, 2.5) and x >= HALF_INTEGER_MIN_X:
        scaled = _half_integer_scaled(p, x)
        method = HALF_INTEGER
    elif x <= series_cutoff(p):
        value = _bessel_series(p, x)
        return value, value * math.exp(-x), SERIES
    else:
        scaled = _bessel_asymptotic_scaled(p, x)
        method = ASYMPTOTIC
    if x > UNSCALED_OVERFLOW_X:
        value = math.inf
    else:
        value = scaled * math.exp(x)
    return value, scaled, method


def _ratio_lentz(p, x):
    """Continued fraction for I_p(x)/I_{p-1}(x), modified Lentz scheme."""
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    two_over_x = 2.0 / x
    for j in range(1, RATIO_MAX_ITER + 1):
        b = two_over_x * (p + j - 1.0)
        d = b + d
        if d == 0.0:
            d = tiny
        c = b + 1.0 / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return f
    raise ConvergenceError(
        f"Bessel ratio continued fraction stalled (p={p}, x={x})"
    )


_ONE_BELOW = math.nextafter(1.0, 0.0)


def bessel_ratio(p, x):
    """I_p(x) / I_{p-1}(x) without overflow; p >= 1/2, x >= 0.

    The true ratio is strictly below 1 but can round to 1.0 (tanh
    saturates for p = 1/2); results are capped one ulp below 1.
    """
    if x == 0.0:
        return 0.0
    if p == 0.5:
        r = math.tanh(x)
    elif x > series_cutoff(p):
        r = _bessel_asymptotic_scaled(p, x) / _bessel_asymptotic_scaled(p - 1.0, x)
    else:
        r = _ratio_lentz(p, x)
    return r if r < 1.0 else _ONE_BELOW
