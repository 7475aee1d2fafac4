"""Entropy-based hypothesis tests and confidence intervals.

For ``r`` populations with plug-in entropies ``H_i``, asymptotic variances
``s2_i`` and sample sizes ``N_i``, the statistic

    S = sum_i N_i (H_i - v_bar)^2 / s2_i

with the precision-weighted mean ``v_bar`` is asymptotically chi-square with
``r - 1`` degrees of freedom under equal entropies. Large-sample validity is
the caller's concern; ``N`` travels with every estimate so reports can show it.
"""

import math
from dataclasses import dataclass, field

from .entropy import EntropyKind, entropy
from .errors import InputError, MixedKindError, NumericalError
from .inference import entropy_variance
from .special import chi2_survival, std_normal_quantile

__all__ = [
    "EntropyEstimate",
    "TestOutcome",
    "ConfidenceInterval",
    "TWO_SIDED",
    "PAPER_COMPAT",
    "estimate_entropy",
    "pooled_entropy_mean",
    "entropy_test",
    "goodness_of_fit",
    "confidence_interval",
    "difference_interval",
    "critical_value",
]

TWO_SIDED = "two-sided"
# one-sided quantile z_alpha; the region reference intervals were computed this way
PAPER_COMPAT = "paper-compat"
CONVENTIONS = (TWO_SIDED, PAPER_COMPAT)


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    variance: float
    n: int
    kind: EntropyKind

    def __post_init__(self):
        if not self.variance >= 0:
            raise InputError(f"variance must be >= 0, got {self.variance!r}")
        if self.n < 1:
            raise InputError(f"sample size must be >= 1, got {self.n!r}")

    @property
    def standard_error(self):
        return math.sqrt(self.variance / self.n)


def estimate_entropy(kind, params, n):
    """Plug-in entropy and asymptotic variance at fitted ``params``."""
    value = entropy(kind, params).value
    return EntropyEstimate(value, entropy_variance(kind, params), int(n), kind)


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    df: int
    p_value: float
    pooled_mean: float
    decisions: dict = field(default_factory=dict)

    __test__ = False  # keep pytest from collecting this class

    def reject(self, alpha):
        """Reject equal entropies at level ``alpha`` iff ``p <= alpha``."""
        return self.p_value <= alpha

    def with_levels(self, levels):
        return TestOutcome(
            self.statistic,
            self.df,
            self.p_value,
            self.pooled_mean,
            {float(a): self.reject(a) for a in levels},
        )


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    convention: str

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def half_width(self):
        return 0.5 * (self.upper - self.lower)

    def contains(self, x):
        return self.lower <= x <= self.upper


def _check_same_kind(estimates):
    kinds = {e.kind for e in estimates}
    if len(kinds) > 1:
        raise MixedKindError(f"cannot combine entropy kinds {sorted(map(str, kinds))}")


def _weights(estimates):
    if len(estimates) < 2:
        raise InputError(f"need at least two estimates, got {len(estimates)}")
    _check_same_kind(estimates)
    w = []
    for e in estimates:
        if not e.variance > 0:
            raise NumericalError("zero entropy variance: precision weights undefined")
        w.append(e.n / e.variance)
    return w


def pooled_entropy_mean(estimates):
    """Precision-weighted mean ``sum(w_i H_i) / sum(w_i)`` with ``w_i = N_i / s2_i``."""
    estimates = list(estimates)
    w = _weights(estimates)
    return math.fsum(wi * e.value for wi, e in zip(w, estimates)) / math.fsum(w)


def entropy_test(estimates, levels=()):
    """Test equality of entropies across ``r >= 2`` populations."""
    estimates = list(estimates)
    w = _weights(estimates)
    v_bar = math.fsum(wi * e.value for wi, e in zip(w, estimates)) / math.fsum(w)
    s = math.fsum(wi * (e.value - v_bar) ** 2 for wi, e in zip(w, estimates))
    df = len(estimates) - 1
    return TestOutcome(s, df, chi2_survival(s, df), v_bar).with_levels(levels)


def goodness_of_fit(estimate, v, levels=()):
    """Test ``H = v`` for a known reference entropy (one degree of freedom)."""
    if not estimate.variance > 0:
        raise NumericalError("zero entropy variance")
    s = estimate.n * (estimate.value - v) ** 2 / estimate.variance
    return TestOutcome(s, 1, chi2_survival(s, 1), float(v)).with_levels(levels)


def critical_value(level, convention=TWO_SIDED):
    """Normal quantile multiplying the standard error at confidence ``level``."""
    if not 0 < level < 1:
        raise InputError(f"confidence level must lie in (0, 1), got {level!r}")
    alpha = 1.0 - level
    if convention == TWO_SIDED:
        return std_normal_quantile(1.0 - alpha / 2.0)
    if convention == PAPER_COMPAT:
        return std_normal_quantile(1.0 - alpha)
    raise InputError(f"unknown quantile convention {convention!r}; use one of {CONVENTIONS}")


def confidence_interval(estimate, level=0.95, convention=TWO_SIDED):
    """Asymptotic interval ``H +- z sqrt(s2 / N)``."""
    hw = critical_value(level, convention) * math.sqrt(estimate.variance / estimate.n)
    return ConfidenceInterval(estimate.value - hw, estimate.value + hw, level, convention)


def difference_interval(e1, e2, level=0.95, convention=TWO_SIDED):
    """Interval for ``H_1 - H_2`` with summed variances."""
    _check_same_kind([e1, e2])
    z = critical_value(level, convention)
    hw = z * math.sqrt(e1.variance / e1.n + e2.variance / e2.n)
    d = e1.value - e2.value
    return ConfidenceInterval(d - hw, d + hw, level, convention)
