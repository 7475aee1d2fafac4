"""Maximum likelihood fitting, Fisher information and entropy variances.

Under the scaled law the parameters ``L`` and ``Sigma`` are orthogonal, so
the likelihood equations separate: ``Sigma_hat`` is the sample mean and
``L_hat`` is a root of

    g(L) = m ln L + mean_k ln|Z_k| - ln|Z_bar| - psi_m(L).

Parameter vector ordering is ``theta = [L, vec(Sigma)]`` with column-stacking
``vec``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .entropy import BETA_ONE_TOL, EntropyKind, renyi_q
from .errors import (
    DegenerateSampleError,
    InputError,
    NoRootError,
    NumericalError,
    PoleError,
    UnsupportedKindError,
)
from .special import multivariate_polygamma
from .wishart import HermitianMatrix, SampleSet, WishartParams, log_density

__all__ = [
    "MLFit",
    "FisherBlocks",
    "vec",
    "looks_equation",
    "looks_equation_derivative",
    "safeguarded_newton",
    "estimate",
    "score_looks",
    "score_sigma",
    "fisher_information",
    "cramer_rao",
    "delta_looks",
    "entropy_variance",
    "kron_quadratic_form",
    "aic",
    "aic_from_log_likelihood",
]

L_MAX = 1e4
ROOT_TOL = 1e-8
MAX_ITER = 200
POLE_GUARD = 1e-6


def vec(a):
    """Column-stacking vectorization."""
    return np.asarray(a).reshape(-1, order="F")


@dataclass(frozen=True)
class MLFit:
    params: WishartParams
    residual: float
    iterations: int
    branch: int
    log_likelihood: float
    n: int

    @property
    def relaxed(self):
        return self.params.relaxed


def looks_equation(looks, m, data_term):
    """``g(L) = m ln L - psi_m(L) + data_term``, with
    ``data_term = mean ln|Z_k| - ln|Z_bar|`` (never positive)."""
    return m * math.log(looks) - multivariate_polygamma(0, m, looks) + data_term


def looks_equation_derivative(looks, m):
    return m / looks - multivariate_polygamma(1, m, looks)


def safeguarded_newton(f, df, lo, hi, x0=None, tol=ROOT_TOL, max_iter=MAX_ITER):
    """Root of ``f`` bracketed by ``[lo, hi]``.

    Newton steps that leave the current bracket, or are longer than half the
    previous step, are replaced by bisection. Stops once
    ``|f(x)| <= tol``. Returns ``(x, f(x), iterations)``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo, flo, 0
    if fhi == 0.0:
        return hi, fhi, 0
    if flo * fhi > 0:
        raise NoRootError(f"root not bracketed on [{lo}, {hi}]")
    # orient so that f(neg) < 0 < f(pos)
    neg, pos = (lo, hi) if flo < 0 else (hi, lo)
    x = 0.5 * (lo + hi) if x0 is None or not min(lo, hi) < x0 < max(lo, hi) else x0
    fx = f(x)
    prev_step = abs(hi - lo)
    for it in range(1, max_iter + 1):
        if abs(fx) <= tol:
            return x, fx, it - 1
        if fx < 0:
            neg = x
        else:
            pos = x
        d = df(x)
        newton_ok = False
        if d != 0.0 and math.isfinite(d):
            step = fx / d
            cand = x - step
            if min(neg, pos) < cand < max(neg, pos) and abs(step) < 0.5 * prev_step:
                newton_ok = True
        if not newton_ok:
            cand = 0.5 * (neg + pos)
            step = x - cand
        prev_step = abs(step)
        if cand == x:
            break
        x = cand
        fx = f(x)
    if abs(fx) <= tol:
        return x, fx, max_iter
    raise NoRootError(f"no convergence after {max_iter} iterations (|g|={abs(fx):.3g})")


def _branches(m, l_max):
    """Candidate intervals in search order: main branch first, then lower ones."""
    yield m - 1, (m - 1 + POLE_GUARD, l_max)
    for k in range(m - 2, -1, -1):
        yield k, (k + POLE_GUARD, k + 1 - POLE_GUARD)


def _solve_branch(m, data_term, k, bounds, tol, max_iter):
    lo, hi = bounds

    def g(x):
        return looks_equation(x, m, data_term)

    def dg(x):
        return looks_equation_derivative(x, m)

    x0 = m + 1.0 if k == m - 1 else None
    if x0 is not None and x0 >= hi:
        x0 = None
    return safeguarded_newton(g, dg, lo, hi, x0=x0, tol=tol, max_iter=max_iter)


def estimate(sample, *, branch=None, l_max=L_MAX, tol=ROOT_TOL, max_iter=MAX_ITER):
    """Maximum likelihood fit of ``(Sigma, L)``.

    ``Sigma_hat`` is the symmetrized sample mean. ``L_hat`` is searched on
    ``(m-1, l_max)`` first; if ``g(l_max) > 0`` there the sample is
    degenerate (the root lies beyond ``l_max`` or does not exist) and
    :class:`DegenerateSampleError` is raised. Every lower interval
    ``(k, k+1)`` holds exactly one root because of the digamma poles, so
    they are only tried when the main branch fails numerically, or when
    ``branch=k`` requests one explicitly.
    """
    if not isinstance(sample, SampleSet):
        sample = SampleSet(sample)
    n, m = sample.size, sample.m
    if n < 2:
        raise InputError(f"estimation needs N >= 2, got {n}")
    sigma_hat = sample.mean()
    data_term = float(np.mean(sample.log_dets())) - sigma_hat.log_det()

    candidates = list(_branches(m, l_max))
    if branch is not None:
        candidates = [c for c in candidates if c[0] == branch]
        if not candidates:
            raise InputError(f"branch must lie in 0..{m - 1}, got {branch}")

    failures = []
    for k, bounds in candidates:
        if k == m - 1 and looks_equation(bounds[1], m, data_term) > 0:
            raise DegenerateSampleError(
                f"likelihood equation has no root below L={l_max:g} "
                f"(data term {data_term:.3g})"
            )
        try:
            root, residual, iterations = _solve_branch(m, data_term, k, bounds, tol, max_iter)
        except (NoRootError, PoleError) as exc:
            failures.append(f"branch {k}: {exc}")
            continue
        params = WishartParams(sigma_hat, root)
        loglik = float(np.sum(log_density(sample, params)))
        return MLFit(params, residual, iterations, k, loglik, n)
    raise NoRootError("; ".join(failures) or "no candidate branch")


def _stack(z):
    if isinstance(z, SampleSet):
        return z.data, z.log_dets()
    if isinstance(z, HermitianMatrix):
        return z.entries[None], np.array([z.log_det()])
    s = SampleSet(np.asarray(z, dtype=complex).reshape(-1, *np.shape(z)[-2:]))
    return s.data, s.log_dets()


def score_looks(z, p):
    """``d ln f / dL`` for each matrix in ``z``."""
    data, ld = _stack(z)
    m, looks = p.m, p.looks
    sinv = p.sigma.inverse()
    tr = np.einsum("ij,nji->n", sinv, data).real
    return (
        m * (math.log(looks) + 1.0)
        + ld
        - p.log_det_sigma
        - multivariate_polygamma(0, m, looks)
        - tr
    )


def score_sigma(z, p):
    """``L vec(Sigma^-1 Z Sigma^-1 - Sigma^-1)``, one row per matrix in ``z``."""
    data, _ = _stack(z)
    sinv = p.sigma.inverse()
    inner = sinv @ data @ sinv - sinv
    return p.looks * inner.transpose(0, 2, 1).reshape(len(data), -1)


@dataclass(frozen=True)
class FisherBlocks:
    """Block-diagonal information (or its inverse).

    ``k_ll`` is the looks entry, ``k_ss`` the ``m^2 x m^2`` covariance block;
    the cross block is zero.
    """

    k_ll: float
    k_ss: np.ndarray

    @property
    def m(self):
        return math.isqrt(self.k_ss.shape[0])

    @property
    def cross(self):
        return np.zeros(self.k_ss.shape[0], dtype=complex)

    def matrix(self):
        d = self.k_ss.shape[0]
        out = np.zeros((d + 1, d + 1), dtype=complex)
        out[0, 0] = self.k_ll
        out[1:, 1:] = self.k_ss
        return out


def _info_ll(p):
    k = multivariate_polygamma(1, p.m, p.looks) - p.m / p.looks
    if not k > 0:
        raise NumericalError(f"information for L is not positive ({k:.3g}) at L={p.looks}")
    return k


def fisher_information(p):
    """``K = diag(psi_m'(L) - m/L, L Sigma^-1 (x) Sigma^-1)``."""
    sinv = p.sigma.inverse()
    return FisherBlocks(_info_ll(p), p.looks * np.kron(sinv, sinv))


def cramer_rao(p):
    """Inverse information ``diag(1/(psi_m'(L) - m/L), Sigma (x) Sigma / L)``."""
    s = p.sigma.entries
    return FisherBlocks(1.0 / _info_ll(p), np.kron(s, s) / p.looks)


def delta_looks(kind, p):
    """Derivative of the entropy with respect to ``L``."""
    m, looks = p.m, p.looks
    if kind.name == "shannon" or (kind.name == "renyi" and abs(kind.beta - 1) < BETA_ONE_TOL):
        return (m - looks) * multivariate_polygamma(1, m, looks) + m - m * m / looks
    if kind.name == "renyi":
        beta = kind.beta
        q = renyi_q(looks, m, beta)
        return (
            beta / (1 - beta) * (multivariate_polygamma(0, m, q) - multivariate_polygamma(0, m, looks))
            - m * beta * math.log(beta) / (1 - beta)
            - m * m / looks
        )
    raise UnsupportedKindError(
        f"no tractable asymptotic variance for {kind}; use shannon or renyi"
    )


def kron_quadratic_form(sigma):
    """``vec(Sigma^-1)^t (Sigma (x) Sigma) vec(Sigma^-1)`` with plain transpose."""
    if not isinstance(sigma, HermitianMatrix):
        sigma = HermitianMatrix(sigma)
    v = vec(sigma.inverse())
    s = sigma.entries
    return complex(v @ np.kron(s, s) @ v)


def entropy_variance(kind, p):
    """Asymptotic variance ``delta^t C delta`` of the plug-in entropy."""
    if isinstance(kind, str):
        kind = EntropyKind.parse(kind)
    d_l = delta_looks(kind, p)
    crb = cramer_rao(p)
    v = vec(p.m * p.sigma.inverse())
    sigma_term = complex(v @ crb.k_ss @ v).real
    return d_l * d_l * crb.k_ll + sigma_term


def aic_from_log_likelihood(log_likelihood, m, l_fixed):
    """``-2 loglik + 2 k`` with ``k = m^2`` (+1 when L is estimated)."""
    k = m * m + (0 if l_fixed else 1)
    return -2.0 * log_likelihood + 2.0 * k


def aic(sample, p, l_fixed):
    """Akaike information criterion of ``p`` on ``sample``."""
    if not isinstance(sample, SampleSet):
        sample = SampleSet(sample)
    loglik = float(np.sum(log_density(sample, p)))
    return aic_from_log_likelihood(loglik, p.m, l_fixed)

