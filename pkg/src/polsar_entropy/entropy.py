"""Closed-form entropies of the scaled complex Wishart law.

All three entropies depend on ``Sigma`` only through ``ln|Sigma|``. Gamma
products are carried in log space throughout; ``mu_tilde`` is exponentiated
only when the caller asks for its linear value.
"""

import math
from dataclasses import dataclass

from .errors import EntropyOverflowError, InputError
from .special import LN_PI, ln_abs_gamma, multivariate_polygamma
from .wishart import normalize_covariance

__all__ = [
    "EntropyKind",
    "EntropyValue",
    "SHANNON",
    "shannon_entropy",
    "mu_tilde",
    "log_mu_tilde",
    "tsallis_entropy",
    "renyi_entropy",
    "entropy",
    "normalized_entropy",
    "renyi_q",
]

# below this distance from 1 the Renyi/Tsallis orders collapse to Shannon
BETA_ONE_TOL = 1e-7
_MAX_LOG = math.log(1.7976931348623157e308)


@dataclass(frozen=True)
class EntropyKind:
    """Shannon, or Renyi/Tsallis of order ``beta`` (``beta > 0``, ``beta != 1``)."""

    name: str
    beta: float = None

    def __post_init__(self):
        if self.name not in ("shannon", "renyi", "tsallis"):
            raise InputError(f"unknown entropy kind {self.name!r}")
        if self.name == "shannon":
            if self.beta is not None:
                raise InputError("Shannon entropy takes no order")
            return
        if self.beta is None:
            raise InputError(f"{self.name} entropy needs an order beta")
        beta = float(self.beta)
        if not (math.isfinite(beta) and beta > 0 and beta != 1):
            raise InputError(f"order must be positive and != 1, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def renyi(cls, beta):
        return cls("renyi", beta)

    @classmethod
    def tsallis(cls, beta):
        return cls("tsallis", beta)

    @classmethod
    def parse(cls, text):
        """Parse ``shannon``, ``renyi:0.1`` or ``tsallis:0.5``."""
        text = text.strip().lower()
        name, _, order = text.partition(":")
        if name == "shannon":
            if order:
                raise InputError("Shannon entropy takes no order")
            return SHANNON
        if not order:
            raise InputError(f"entropy kind {text!r} needs an order, e.g. {name}:0.5")
        try:
            beta = float(order)
        except ValueError:
            raise InputError(f"bad entropy order in {text!r}") from None
        return cls(name, beta)

    def __str__(self):
        return self.name if self.beta is None else f"{self.name}:{self.beta:g}"


SHANNON = EntropyKind("shannon")


@dataclass(frozen=True)
class EntropyValue:
    value: float
    kind: EntropyKind
    q: float = None

    def __float__(self):
        return self.value


def renyi_q(looks, m, beta):
    """``q = L + (1 - beta)(m - L)``."""
    return looks + (1.0 - beta) * (m - looks)


def _shannon(m, looks, log_det_sigma):
    return (
        0.5 * m * (m - 1) * LN_PI
        - m * m * math.log(looks)
        + m * log_det_sigma
        + m * looks
        + (m - looks) * multivariate_polygamma(0, m, looks)
        + math.fsum(ln_abs_gamma(looks - k) for k in range(m))
    )


def shannon_entropy(p):
    """Shannon entropy (nats) of ``W_m(Sigma, L)``."""
    return EntropyValue(_shannon(p.m, p.looks, p.log_det_sigma), SHANNON)


def _check_beta(beta):
    beta = float(beta)
    if not (math.isfinite(beta) and beta > 0):
        raise InputError(f"order must be positive, got {beta!r}")
    return beta


def log_mu_tilde(p, beta):
    """``ln E{f(Z)^(beta-1)}``."""
    beta = _check_beta(beta)
    m, looks = p.m, p.looks
    q = renyi_q(looks, m, beta)
    lgm_q = 0.5 * m * (m - 1) * LN_PI + math.fsum(ln_abs_gamma(q - i) for i in range(m))
    lgm_l = 0.5 * m * (m - 1) * LN_PI + math.fsum(ln_abs_gamma(looks - i) for i in range(m))
    return (
        lgm_q
        - beta * lgm_l
        - m * q * math.log(beta)
        + (1.0 - beta) * m * p.log_det_sigma
        - m * m * (1.0 - beta) * math.log(looks)
    )


def mu_tilde(p, beta, log=False):
    """``E{f(Z)^(beta-1)}``, or its logarithm when ``log`` is true.

    Raises :class:`EntropyOverflowError` when the value is not representable.
    """
    value = log_mu_tilde(p, beta)
    if log:
        return value
    if value > _MAX_LOG:
        raise EntropyOverflowError(f"mu_tilde overflows: log value {value:.6g}")
    return math.exp(value)


def tsallis_entropy(p, beta):
    """Restricted Tsallis entropy ``(mu_tilde - 1) / (1 - beta)``."""
    kind = EntropyKind.tsallis(beta)
    if abs(kind.beta - 1.0) < BETA_ONE_TOL:
        return EntropyValue(shannon_entropy(p).value, kind)
    log_mu = log_mu_tilde(p, kind.beta)
    if log_mu > _MAX_LOG:
        raise EntropyOverflowError(f"mu_tilde overflows: log value {log_mu:.6g}")
    # expm1 keeps precision when mu_tilde is close to one
    return EntropyValue(math.expm1(log_mu) / (1.0 - kind.beta), kind)


def renyi_entropy(p, beta):
    """Renyi entropy of order ``beta``; records ``q`` on the result."""
    kind = EntropyKind.renyi(beta)
    beta = kind.beta
    m, looks = p.m, p.looks
    q = renyi_q(looks, m, beta)
    if abs(beta - 1.0) < BETA_ONE_TOL:
        return EntropyValue(shannon_entropy(p).value, kind, q)
    gammas = math.fsum(ln_abs_gamma(q - i) - beta * ln_abs_gamma(looks - i) for i in range(m))
    value = (
        0.5 * m * (m - 1) * LN_PI
        - m * m * math.log(looks)
        + m * p.log_det_sigma
        - m * q * math.log(beta) / (1.0 - beta)
        + gammas / (1.0 - beta)
    )
    return EntropyValue(value, kind, q)


def entropy(kind, p):
    """Dispatch on ``kind``."""
    if kind.name == "shannon":
        return shannon_entropy(p)
    if kind.name == "renyi":
        return renyi_entropy(p, kind.beta)
    return tsallis_entropy(p, kind.beta)


def normalized_entropy(kind, p):
    """Entropy with ``Sigma`` replaced by ``Sigma / tr(Sigma)``."""
    return entropy(kind, p.with_sigma(normalize_covariance(p.sigma)))
