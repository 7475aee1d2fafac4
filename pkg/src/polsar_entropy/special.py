"""Scalar special functions: log-gamma, digamma, trigamma and their
multivariate versions, plus the chi-square survival function and the
standard normal quantile.

Log-gamma follows the ``ln|Gamma(x)|`` convention for negative non-integer
arguments. Digamma and trigamma are continued to negative non-integers by
the recurrences ``psi(x) = psi(x + 1) - 1/x`` and
``psi'(x) = psi'(x + 1) + 1/x**2``.
"""

import math

from scipy import special as _sp

from .errors import InputError, PoleError

__all__ = [
    "ln_abs_gamma",
    "digamma",
    "trigamma",
    "polygamma",
    "multivariate_polygamma",
    "ln_multivariate_gamma",
    "chi2_survival",
    "std_normal_quantile",
]

LN_PI = math.log(math.pi)

# recurrence is pushed up until x >= _ASYMPTOTIC_START before the series
_ASYMPTOTIC_START = 10.0

# B_{2k} / (2k) for the digamma expansion, k = 1..7
_DIGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_{2k} for the trigamma expansion, k = 1..7
_TRIGAMMA_COEFFS = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


def _check_pole(x):
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"pole at non-positive integer x={x!r}")
    if not math.isfinite(x):
        raise InputError(f"non-finite argument x={x!r}")


def ln_abs_gamma(x):
    """Return ``ln|Gamma(x)|``.

    Raises :class:`PoleError` at ``x in {0, -1, -2, ...}``.
    """
    x = float(x)
    _check_pole(x)
    return float(_sp.gammaln(x))


def digamma(x):
    """Digamma function psi(x) for real x off the poles."""
    x = float(x)
    _check_pole(x)
    acc = 0.0
    # upward recurrence: psi(x) = psi(x + 1) - 1/x
    while x < _ASYMPTOTIC_START:
        acc -= 1.0 / x
        x += 1.0
    r2 = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_DIGAMMA_COEFFS):
        series = series * r2 + c
    return acc + math.log(x) - 0.5 / x - r2 * series


def trigamma(x):
    """Trigamma function psi'(x) for real x off the poles."""
    x = float(x)
    _check_pole(x)
    acc = 0.0
    while x < _ASYMPTOTIC_START:
        acc += 1.0 / (x * x)
        x += 1.0
    r = 1.0 / x
    r2 = r * r
    series = 0.0
    for c in reversed(_TRIGAMMA_COEFFS):
        series = series * r2 + c
    # psi'(x) ~ 1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1)
    return acc + r + 0.5 * r2 + r * r2 * series


def polygamma(v, x):
    """Polygamma of order ``v`` in {0, 1}."""
    if v == 0:
        return digamma(x)
    if v == 1:
        return trigamma(x)
    raise InputError(f"polygamma order must be 0 or 1, got {v!r}")


def multivariate_polygamma(v, m, looks):
    """Sum of ``psi^(v)(L - i)`` for ``i = 0..m-1``."""
    if m < 1:
        raise InputError(f"dimension must be positive, got {m!r}")
    fn = digamma if v == 0 else trigamma if v == 1 else None
    if fn is None:
        raise InputError(f"polygamma order must be 0 or 1, got {v!r}")
    return math.fsum(fn(looks - i) for i in range(m))


def ln_multivariate_gamma(m, looks):
    """Return ``m(m-1)/2 ln(pi) + sum_k ln|Gamma(L - k)|``."""
    if m < 1:
        raise InputError(f"dimension must be positive, got {m!r}")
    return 0.5 * m * (m - 1) * LN_PI + math.fsum(
        ln_abs_gamma(looks - k) for k in range(m)
    )


def chi2_survival(s, df):
    """Upper-tail probability ``Pr(chi2_df > s)``."""
    if df < 1 or int(df) != df:
        raise InputError(f"degrees of freedom must be a positive integer, got {df!r}")
    s = float(s)
    if not s >= 0.0:
        raise InputError(f"chi-square statistic must be >= 0, got {s!r}")
    if s == 0.0:
        return 1.0
    return float(_sp.gammaincc(0.5 * df, 0.5 * s))


def std_normal_quantile(p):
    """Return z such that Phi(z) = p, for 0 < p < 1."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InputError(f"probability must lie in (0, 1), got {p!r}")
    return float(_sp.ndtri(p))

