"""Hermitian covariance matrices and the scaled complex Wishart density.

A pixel covariance ``Z`` of an ``m``-channel multilook PolSAR image follows
``W_m(Sigma, L)``; ``L * Z`` is ordinary complex Wishart with ``L`` degrees
of freedom. The density is

    f(Z) = L^{mL} |Z|^{L-m} / (|Sigma|^L Gamma_m(L)) exp(-L tr(Sigma^{-1} Z)).

Determinants, inverses and positive-definiteness checks all go through a
Cholesky factorization.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InputError, NotPositiveDefiniteError, PoleError
from .special import ln_multivariate_gamma, multivariate_polygamma

__all__ = [
    "HermitianMatrix",
    "WishartParams",
    "SampleSet",
    "cholesky",
    "log_det",
    "log_density",
    "expected_log_det",
    "normalize_covariance",
]

# relative asymmetry accepted (and averaged away) on construction
HERMITIAN_RTOL = 1e-9
MIN_PIVOT = 1e-300


def _symmetrize(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {a.shape}")
    ah = np.conj(np.swapaxes(a, -1, -2))
    scale = np.max(np.abs(a), axis=(-2, -1), keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    if np.any(np.abs(a - ah) > HERMITIAN_RTOL * scale):
        raise InputError("matrix is not Hermitian")
    return 0.5 * (a + ah)


def cholesky(a):
    """Lower Cholesky factor of a (stack of) Hermitian PD matrices."""
    a = np.asarray(a, dtype=complex)
    try:
        c = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    pivots = np.diagonal(c, axis1=-2, axis2=-1).real
    if not np.all(pivots > MIN_PIVOT):
        raise NotPositiveDefiniteError("matrix is not positive definite")
    return c


class HermitianMatrix:
    """Immutable ``m x m`` complex positive-definite Hermitian matrix.

    The input is averaged with its conjugate transpose, so the stored
    entries are exactly Hermitian. Inputs whose asymmetry exceeds ``1e-9``
    of the largest entry magnitude are rejected, as are non-PD inputs.
    """

    __slots__ = ("_entries", "_chol")

    def __init__(self, entries):
        a = _symmetrize(entries)
        if a.ndim != 2:
            raise DimensionError(f"expected a single matrix, got shape {a.shape}")
        a.flags.writeable = False
        self._chol = cholesky(a)
        self._chol.flags.writeable = False
        self._entries = a

    @classmethod
    def from_upper(cls, diagonal, upper):
        """Build from the real diagonal and the row-major strict upper triangle."""
        diagonal = np.asarray(diagonal, dtype=float)
        m = diagonal.size
        upper = np.asarray(upper, dtype=complex).ravel()
        if upper.size != m * (m - 1) // 2:
            raise DimensionError(
                f"{m}x{m} matrix needs {m * (m - 1) // 2} upper entries, got {upper.size}"
            )
        a = np.diag(diagonal).astype(complex)
        iu = np.triu_indices(m, 1)
        a[iu] = upper
        a[(iu[1], iu[0])] = np.conj(upper)
        return cls(a)

    @classmethod
    def scalar(cls, value, m):
        return cls(value * np.eye(m))

    @property
    def entries(self):
        return self._entries

    @property
    def chol(self):
        return self._chol

    @property
    def m(self):
        return self._entries.shape[0]

    def log_det(self):
        return float(2.0 * np.sum(np.log(np.diagonal(self._chol).real)))

    def trace(self):
        return float(np.trace(self._entries).real)

    def inverse(self):
        w = np.linalg.inv(self._chol)
        return w.conj().T @ w

    def scaled(self, c):
        return HermitianMatrix(c * self._entries)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries.copy()
        return self._entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    __hash__ = None

    def __repr__(self):
        return f"HermitianMatrix(m={self.m}, log_det={self.log_det():.6g})"


def _as_matrix(a):
    return a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)


def _check_looks(looks, m):
    if not (math.isfinite(looks) and looks > 0):
        raise InputError(f"looks must be a positive finite number, got {looks!r}")
    for i in range(m):
        x = looks - i
        if x <= 0 and x == math.floor(x):
            raise PoleError(f"looks={looks!r} hits a gamma pole at L-{i}={x!r}")


@dataclass(frozen=True)
class WishartParams:
    """Parameters ``(Sigma, L)`` of the scaled complex Wishart law.

    ``L < m`` is admitted (the "relaxed" regime of fitted data) as long as no
    ``L - i`` is a non-positive integer.
    """

    sigma: HermitianMatrix
    looks: float
    _log_det: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sigma = _as_matrix(self.sigma)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "looks", float(self.looks))
        _check_looks(self.looks, sigma.m)
        object.__setattr__(self, "_log_det", sigma.log_det())

    @classmethod
    def from_log_det(cls, m, looks, log_det_sigma):
        """Parameters with ``Sigma = c I`` chosen to have the given log-determinant.

        Entropies and their variances depend on ``Sigma`` only through its
        determinant, so this is how scalar summaries of a fit are evaluated.
        """
        c = math.exp(log_det_sigma / m)
        return cls(HermitianMatrix.scalar(c, m), looks)

    @property
    def m(self):
        return self.sigma.m

    @property
    def log_det_sigma(self):
        return self._log_det

    @property
    def relaxed(self):
        """True when ``L < m``, outside the textbook domain of the density."""
        return self.looks < self.m

    def with_looks(self, looks):
        return WishartParams(self.sigma, looks)

    def with_sigma(self, sigma):
        return WishartParams(sigma, self.looks)


class SampleSet:
    """An ordered collection of ``N`` Hermitian PD matrices of equal order.

    Stored as a single ``(N, m, m)`` complex array; every item is validated.
    """

    __slots__ = ("_data", "_chol")

    def __init__(self, items):
        if isinstance(items, SampleSet):
            data = items._data
        elif isinstance(items, np.ndarray):
            data = items
        else:
            items = list(items)
            if not items:
                raise InputError("a sample needs at least one matrix")
            data = np.stack([np.asarray(z, dtype=complex) for z in items])
        data = _symmetrize(data)
        if data.ndim != 3:
            raise DimensionError(f"expected an (N, m, m) array, got shape {data.shape}")
        if data.shape[0] < 1:
            raise InputError("a sample needs at least one matrix")
        chol = cholesky(data)
        data.flags.writeable = False
        chol.flags.writeable = False
        self._data = data
        self._chol = chol

    @property
    def data(self):
        return self._data

    @property
    def m(self):
        return self._data.shape[1]

    @property
    def size(self):
        return self._data.shape[0]

    def __len__(self):
        return self._data.shape[0]

    def __iter__(self):
        for z in self._data:
            yield HermitianMatrix(z)

    def __getitem__(self, index):
        if isinstance(index, (int, np.integer)):
            return HermitianMatrix(self._data[index])
        return SampleSet(self._data[index])

    def log_dets(self):
        """``ln|Z_k|`` for every item."""
        return 2.0 * np.sum(np.log(np.diagonal(self._chol, axis1=1, axis2=2).real), axis=1)

    def mean(self):
        """Sample mean, symmetrized."""
        return HermitianMatrix(self._data.mean(axis=0))

    def __repr__(self):
        return f"SampleSet(N={self.size}, m={self.m})"


def log_det(a):
    """``ln|A|`` from the Cholesky pivots.

    Accepts a :class:`HermitianMatrix`, a single array or an ``(..., m, m)``
    stack (returning an array).
    """
    if isinstance(a, HermitianMatrix):
        return a.log_det()
    c = cholesky(_symmetrize(a))
    out = 2.0 * np.sum(np.log(np.diagonal(c, axis1=-2, axis2=-1).real), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def _trace_sigma_inv(sigma, z):
    """``tr(Sigma^-1 Z) = tr(C^-1 Z C^-H)`` by two solves against the Cholesky factor."""
    c = np.broadcast_to(sigma.chol, np.shape(z))
    x = np.linalg.solve(c, z)
    y = np.linalg.solve(c, np.conj(np.swapaxes(x, -1, -2)))
    return np.trace(y, axis1=-2, axis2=-1).real


def log_density(z, p):
    """Log of the scaled complex Wishart density at ``z``.

    ``z`` may be a :class:`HermitianMatrix`, a :class:`SampleSet` or a raw
    ``(N, m, m)`` stack; the latter two return one value per item.
    """
    m, looks = p.m, p.looks
    if isinstance(z, SampleSet):
        arr, ld = z.data, z.log_dets()
    elif isinstance(z, HermitianMatrix):
        arr, ld = z.entries, z.log_det()
    else:
        arr = _symmetrize(z)
        ld = log_det(arr)
    if arr.shape[-1] != m:
        raise DimensionError(f"matrix order {arr.shape[-1]} does not match Sigma order {m}")
    tr = _trace_sigma_inv(p.sigma, arr)
    out = (
        m * looks * math.log(looks)
        + (looks - m) * ld
        - looks * p.log_det_sigma
        - ln_multivariate_gamma(m, looks)
        - looks * tr
    )
    return float(out) if np.ndim(out) == 0 else out


def expected_log_det(p):
    """``E ln|Z| = ln|Sigma| + psi_m(L) - m ln L``."""
    return p.log_det_sigma + multivariate_polygamma(0, p.m, p.looks) - p.m * math.log(p.looks)


def normalize_covariance(a):
    """Scale ``a`` to unit trace."""
    a = _as_matrix(a)
    return HermitianMatrix(a.entries / a.trace())
