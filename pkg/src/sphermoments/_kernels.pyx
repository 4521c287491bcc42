# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled scalar kernels: gamma and modified Bessel machinery.

Twin of ``sphermoments._kernels_py`` (same algorithms, thresholds and
constants); ``_backend`` prefers this module when the extension built.
"""

from libc.math cimport exp, fabs, isfinite, nextafter, pow, sin, sqrt, tanh, INFINITY, M_PI

from .errors import ConvergenceError

SERIES = 0
ASYMPTOTIC = 1
HALF_INTEGER = 2

SERIES_MAX_TERMS = 500
SERIES_RTOL = 1e-17
UNSCALED_OVERFLOW_X = 700.0
HALF_INTEGER_MIN_X = 1.0
RATIO_MAX_ITER = 50_000

cdef double _SERIES_RTOL = 1e-17
cdef double _OVERFLOW_X = 700.0
cdef double _HALF_INT_MIN_X = 1.0

cdef double[9] _LANCZOS_COEFFS
_LANCZOS_COEFFS[0] = 0.99999999999980993
_LANCZOS_COEFFS[1] = 676.5203681218851
_LANCZOS_COEFFS[2] = -1259.1392167224028
_LANCZOS_COEFFS[3] = 771.32342877765313
_LANCZOS_COEFFS[4] = -176.61502916214059
_LANCZOS_COEFFS[5] = 12.507343278686905
_LANCZOS_COEFFS[6] = -0.13857109526572012
_LANCZOS_COEFFS[7] = 9.9843695780195716e-6
_LANCZOS_COEFFS[8] = 1.5056327351493116e-7


cpdef double series_cutoff(double p):
    """Largest x handled by the power series for order p."""
    cdef double c = 0.5 * p * p + 10.0
    return c if c > 30.0 else 30.0


cpdef double gamma(double x):
    """Gamma function for x > 0 (Lanczos approximation, g=7, 9 terms)."""
    cdef double z, acc, t, half_pow
    cdef int i
    if x < 0.5:
        return M_PI / (sin(M_PI * x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEFFS[i] / (z + i)
    t = z + 7.5
    half_pow = pow(t, 0.5 * (z + 0.5))
    return sqrt(2.0 * M_PI) * acc * half_pow * exp(-t) * half_pow


cpdef double _bessel_series(double p, double x) except -1.0:
    cdef double half = 0.5 * x
    cdef double term = pow(half, p) / gamma(p + 1.0)
    cdef double acc = term
    cdef double q = half * half
    cdef int m
    for m in range(1, 501):
        term *= q / (m * (p + m))
        acc += term
        if term <= acc * _SERIES_RTOL:
            if not isfinite(acc):
                break
            return acc
    raise ConvergenceError(
        f"Bessel series did not converge in 500 terms (p={p}, x={x})"
    )


cpdef double _bessel_asymptotic_scaled(double p, double x):
    cdef double mu = 4.0 * p * p
    cdef double acc = 1.0
    cdef double term = 1.0
    cdef double nxt, odd
    cdef int m
    for m in range(1, 1000):
        odd = 2.0 * m - 1.0
        nxt = term * ((odd * odd - mu) / (8.0 * x * m))
        if fabs(nxt) >= fabs(term):
            break
        term = nxt
        acc += term
        if fabs(term) <= fabs(acc) * _SERIES_RTOL:
            break
    return acc / sqrt(2.0 * M_PI * x)


cpdef double _half_integer_scaled(double p, double x):
    cdef double s = sqrt(2.0 / (M_PI * x))
    cdef double em = exp(-2.0 * x)
    cdef double sh = 0.5 * (1.0 - em)
    cdef double ch = 0.5 * (1.0 + em)
    if p == 0.5:
        return s * sh
    if p == 1.5:
        return s * (ch - sh / x)
    return s * ((1.0 + 3.0 / (x * x)) * sh - (3.0 / x) * ch)


cpdef tuple bessel_i_parts(double p, double x):
    """Evaluate I_p(x); returns (value, scaled_value, method_code).

    scaled_value is e^(-x) I_p(x); value is +inf above the unscaled
    overflow threshold.
    """
    cdef double v, value, scaled
    cdef int method
    if x == 0.0:
        v = 1.0 if p == 0.0 else 0.0
        return v, v, SERIES
    if (p == 0.5 or p == 1.5 or p == 2.5) and x >= _HALF_INT_MIN_X:
        scaled = _half_integer_scaled(p, x)
        method = HALF_INTEGER
    elif x <= series_cutoff(p):
        value = _bessel_series(p, x)
        return value, value * exp(-x), SERIES
    else:
        scaled = _bessel_asymptotic_scaled(p, x)
        method = ASYMPTOTIC
    if x > _OVERFLOW_X:
        value = INFINITY
    else:
        value = scaled * exp(x)
    return value, scaled, method


cdef double _ratio_lentz(double p, double x) except -1.0:
    cdef double tiny = 1e-300
    cdef double f = tiny
    cdef double c = f
    cdef double d = 0.0
    cdef double two_over_x = 2.0 / x
    cdef double b, delta
    cdef int j
    for j in range(1, 50_001):
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
        if fabs(delta - 1.0) < 1e-16:
            return f
    raise ConvergenceError(
        f"Bessel ratio continued fraction stalled (p={p}, x={x})"
    )


cdef double _ONE_BELOW = nextafter(1.0, 0.0)


cpdef double bessel_ratio(double p, double x) except -1.0:
    """I_p(x) / I_{p-1}(x) without overflow; p >= 1/2, x >= 0.

    The true ratio is strictly below 1 but can round to 1.0 (tanh
    saturates for p = 1/2); results are capped one ulp below 1.
    """
    cdef double r
    if x == 0.0:
        return 0.0
    if p == 0.5:
        r = tanh(x)
    elif x > series_cutoff(p):
        r = _bessel_asymptotic_scaled(p, x) / _bessel_asymptotic_scaled(p - 1.0, x)
    else:
        r = _ratio_lentz(p, x)
    return r if r < 1.0 else _ONE_BELOW
