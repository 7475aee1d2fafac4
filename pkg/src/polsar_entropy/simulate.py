"""Scaled complex Wishart sampling and the Monte Carlo size/power harness.

Each replica ``j`` at sample size ``N`` draws from its own generator seeded
by ``SeedSequence(master_seed, spawn_key=(N, j))``, so reports do not depend
on how replicas are spread over worker processes.
"""

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .entropy import SHANNON, EntropyKind
from .errors import InputError, NumericalError, ReplicaFailureError
from .inference import estimate
from .special import chi2_survival
from .stats import entropy_test, estimate_entropy
from .wishart import SampleSet, WishartParams

__all__ = [
    "sample_wishart",
    "replica_rng",
    "MCConfig",
    "MCReport",
    "mc_size_experiment",
    "mc_power_experiment",
]

log = logging.getLogger(__name__)

REPORT_VERSION = 1


def _circular_normal(rng, shape):
    """Standard circular complex Gaussian: variance 1/2 per real component."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def sample_wishart(p, n, rng, method="auto"):
    """Draw ``n`` independent matrices from ``W_m(Sigma, L)``.

    ``method="multilook"`` averages ``L`` outer products of circular Gaussian
    vectors with covariance ``Sigma`` (integer ``L`` only).
    ``method="bartlett"`` uses ``Z = C T T^H C^H / L`` with ``Sigma = C C^H``,
    ``T`` lower triangular, ``|T_kk|^2 ~ Gamma(L - k, 1)`` and standard
    circular Gaussian strict-lower entries; it needs only ``L > m - 1``.
    ``"auto"`` picks multilook for integer ``L`` and Bartlett otherwise.
    """
    m, looks = p.m, p.looks
    if not looks > m - 1:
        raise InputError(f"sampling needs L > m - 1 = {m - 1}, got L={looks}")
    n = int(n)
    if n < 1:
        raise InputError(f"sample size must be >= 1, got {n}")
    integer = looks == math.floor(looks)
    if method == "auto":
        method = "multilook" if integer else "bartlett"
    c = p.sigma.chol
    if method == "multilook":
        if not integer:
            raise InputError(f"multilook sampling needs integer L, got {looks}")
        y = _circular_normal(rng, (n, int(looks), m)) @ c.T
        z = np.einsum("nli,nlj->nij", y, y.conj()) / looks
    elif method == "bartlett":
        t = np.zeros((n, m, m), dtype=complex)
        rows, cols = np.tril_indices(m, -1)
        t[:, rows, cols] = _circular_normal(rng, (n, rows.size))
        shapes = looks - np.arange(m)
        diag = np.sqrt(rng.gamma(shapes, 1.0, size=(n, m)))
        t[:, np.arange(m), np.arange(m)] = diag
        ct = c @ t
        z = ct @ np.conj(np.swapaxes(ct, 1, 2)) / looks
    else:
        raise InputError(f"unknown sampling method {method!r}")
    return SampleSet(z)


def replica_rng(master_seed, *key):
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


DEFAULT_KINDS = (SHANNON, EntropyKind.renyi(0.8), EntropyKind.renyi(0.1))


@dataclass(frozen=True)
class MCConfig:
    replicas: int = 5500
    sample_sizes: tuple = (9, 49, 81, 121, 400)
    levels: tuple = (0.01, 0.05, 0.10)
    master_seed: int = 0
    kinds: tuple = DEFAULT_KINDS
    max_failure_rate: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "levels", tuple(float(a) for a in self.levels))
        kinds = tuple(k if isinstance(k, EntropyKind) else EntropyKind.parse(k) for k in self.kinds)
        object.__setattr__(self, "kinds", kinds)
        if self.replicas < 1:
            raise InputError(f"replicas must be >= 1, got {self.replicas}")
        if not self.sample_sizes or any(n < 2 for n in self.sample_sizes):
            raise InputError(f"all sample sizes must be >= 2, got {self.sample_sizes}")
        if not self.levels or any(not 0 < a < 1 for a in self.levels):
            raise InputError(f"all levels must lie in (0, 1), got {self.levels}")
        if not kinds:
            raise InputError("at least one entropy kind is required")
        for k in kinds:
            if k.name == "tsallis":
                raise InputError("Tsallis entropy has no asymptotic variance; cannot be tested")

    @classmethod
    def from_dict(cls, d):
        known = {"replicas", "sample_sizes", "levels", "master_seed", "kinds", "max_failure_rate"}
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown configuration keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self):
        return {
            "replicas": self.replicas,
            "sample_sizes": list(self.sample_sizes),
            "levels": list(self.levels),
            "master_seed": self.master_seed,
            "kinds": [str(k) for k in self.kinds],
            "max_failure_rate": self.max_failure_rate,
        }


def _run_replica(p1, p2, n, kinds, master_seed, j):
    """Statistics ``S`` for one replica, one per kind; ``None`` on a fit failure."""
    rng = replica_rng(master_seed, n, j)
    try:
        fit1 = estimate(sample_wishart(p1, n, rng))
        fit2 = estimate(sample_wishart(p2, n, rng))
        out = []
        for kind in kinds:
            e1 = estimate_entropy(kind, fit1.params, n)
            e2 = estimate_entropy(kind, fit2.params, n)
            out.append(entropy_test([e1, e2]).statistic)
    except NumericalError as exc:
        log.debug("replica %d at N=%d failed: %s", j, n, exc)
        return None
    return out


def _run_chunk(args):
    p1, p2, n, kinds, master_seed, start, stop = args
    stats = np.full((stop - start, len(kinds)), np.nan)
    for j in range(start, stop):
        s = _run_replica(p1, p2, n, kinds, master_seed, j)
        if s is not None:
            stats[j - start] = s
    return stats


def _statistics(p1, p2, n, cfg, workers):
    if workers <= 1:
        return _run_chunk((p1, p2, n, cfg.kinds, cfg.master_seed, 0, cfg.replicas))
    size = max(1, math.ceil(cfg.replicas / (4 * workers)))
    tasks = [
        (p1, p2, n, cfg.kinds, cfg.master_seed, a, min(a + size, cfg.replicas))
        for a in range(0, cfg.replicas, size)
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(_run_chunk, tasks))
    return np.concatenate(chunks, axis=0)


@dataclass(frozen=True)
class MCCell:
    """Results for one (kind, N) combination."""

    kind: str
    n: int
    replicas_ok: int
    failures: int
    mean_statistic: float
    cv: float
    rejections: dict  # level -> count

    def rate(self, alpha):
        return self.rejections[float(alpha)] / self.replicas_ok


@dataclass(frozen=True)
class MCReport:
    hypothesis: str  # "size" or "power"
    pair: str
    config: MCConfig
    cells: tuple = field(default_factory=tuple)

    def cell(self, kind, n):
        kind = str(kind if isinstance(kind, EntropyKind) else EntropyKind.parse(kind))
        for c in self.cells:
            if c.kind == kind and c.n == n:
                return c
        raise KeyError((kind, n))

    def rate(self, kind, n, alpha):
        return self.cell(kind, n).rate(alpha)

    def rows(self):
        """One row per kind x N x level."""
        for c in self.cells:
            for alpha in self.config.levels:
                yield {
                    "hypothesis": self.hypothesis,
                    "pair": self.pair,
                    "kind": c.kind,
                    "n": c.n,
                    "alpha": alpha,
                    "rate": c.rate(alpha),
                    "rejections": c.rejections[alpha],
                    "replicas_ok": c.replicas_ok,
                    "failures": c.failures,
                    "mean_statistic": c.mean_statistic,
                    "cv": c.cv,
                }

    def to_csv(self):
        buf = io.StringIO()
        rows = list(self.rows())
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return buf.getvalue()

    def to_dict(self):
        return {
            "version": REPORT_VERSION,
            "hypothesis": self.hypothesis,
            "pair": self.pair,
            "config": self.config.to_dict(),
            "cells": [
                {
                    "kind": c.kind,
                    "n": c.n,
                    "replicas_ok": c.replicas_ok,
                    "failures": c.failures,
                    "mean_statistic": c.mean_statistic,
                    "cv": c.cv,
                    "rates": {repr(a): c.rate(a) for a in self.config.levels},
                }
                for c in self.cells
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def _summarize(stats, kind, n, cfg):
    ok = stats[~np.isnan(stats)]
    failures = int(np.isnan(stats).sum())
    if failures > cfg.max_failure_rate * cfg.replicas:
        raise ReplicaFailureError(
            f"{failures} of {cfg.replicas} replicas failed at N={n} ({kind})"
        )
    pvals = np.array([chi2_survival(s, 1) for s in ok])
    rejections = {a: int(np.sum(pvals <= a)) for a in cfg.levels}
    mean = float(np.mean(ok))
    # sqrt(sum of squared deviations) / (mean sqrt(R)), i.e. population std / mean
    cv = float(math.sqrt(np.sum((ok - mean) ** 2)) / (mean * math.sqrt(ok.size))) if mean > 0 else 0.0
    return MCCell(str(kind), n, int(ok.size), failures, mean, cv, rejections)


def mc_power_experiment(p1, p2, cfg, workers=1, pair=None):
    """Rejection rates of equal entropies when samples come from ``p1`` and ``p2``.

    Also reports the mean statistic and its coefficient of variation per
    (kind, N). Fit failures are excluded and counted; more than
    ``cfg.max_failure_rate`` of the replicas failing raises
    :class:`ReplicaFailureError`.
    """
    hypothesis = "size" if _same(p1, p2) else "power"
    cells = []
    for n in cfg.sample_sizes:
        stats = _statistics(p1, p2, n, cfg, workers)
        for i, kind in enumerate(cfg.kinds):
            cells.append(_summarize(stats[:, i], kind, n, cfg))
    return MCReport(hypothesis, pair or hypothesis, cfg, tuple(cells))


def mc_size_experiment(p, cfg, workers=1):
    """Empirical test size: both samples drawn from ``p``."""
    return mc_power_experiment(p, p, cfg, workers=workers, pair="size")


def _same(p1, p2):
    return p1.looks == p2.looks and p1.sigma == p2.sigma
