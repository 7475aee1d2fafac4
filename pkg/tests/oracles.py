"""Independent reference computations used to freeze expected values.

Nothing here imports the package: each oracle takes a different route
(series, continued fraction, cofactor expansion, bisection) from the code
under test.
"""

import math


def trigamma_series(x, terms=2_000_000):
    """sum_k 1/(x+k)^2 with an integral tail correction."""
    s = math.fsum(1.0 / (x + k) ** 2 for k in range(terms))
    t = x + terms
    # Euler-Maclaurin tail: int_t^inf + f(t)/2 - f'(t)/12
    return s + 1.0 / t + 0.5 / t**2 + 1.0 / (6.0 * t**3)


def ln_abs_gamma_reflection(x):
    """ln|Gamma(x)| for x < 0 via Gamma(x) = pi / (sin(pi x) Gamma(1 - x))."""
    return math.log(math.pi) - math.log(abs(math.sin(math.pi * x))) - math.lgamma(1.0 - x)


def upper_incomplete_gamma_cf(a, x, eps=1e-16, max_iter=10_000):
    """Regularized Q(a, x) by the Lentz continued fraction (x > a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def lower_incomplete_gamma_series(a, x, eps=1e-17, max_iter=100_000):
    """Regularized P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    n = 0
    while n < max_iter:
        n += 1
        term *= x / (a + n)
        total += term
        if abs(term) < abs(total) * eps:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_sf_oracle(s, df):
    a, x = 0.5 * df, 0.5 * s
    if x > a + 1:
        return upper_incomplete_gamma_cf(a, x)
    return 1.0 - lower_incomplete_gamma_series(a, x)


def normal_cdf_series(z, terms=200):
    """Phi(z) from the Maclaurin series of erf."""
    x = z / math.sqrt(2.0)
    total = 0.0
    term = x
    for n in range(terms):
        total += term / (2 * n + 1)
        term *= -x * x / (n + 1)
    return 0.5 + total / math.sqrt(math.pi)


def normal_quantile_bisection(p, lo=-10.0, hi=10.0):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf_series(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def det_cofactor(a):
    """Determinant by recursive cofactor expansion along the first row."""
    n = len(a)
    if n == 1:
        return a[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        total += (-1) ** j * a[0][j] * det_cofactor(minor)
    return total


def kron(a, b):
    """Kronecker product of nested lists."""
    n, m = len(a), len(b)
    return [
        [a[i // m][j // m] * b[i % m][j % m] for j in range(n * m)]
        for i in range(n * m)
    ]
