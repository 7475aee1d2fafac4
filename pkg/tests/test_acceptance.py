"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
pytest terminal summary under "acceptance criteria".
"""

import io
import itertools
import math
import time

import numpy as np
import pytest

from conftest import random_pd, record_criterion
from reference_values import INTERVAL_TOL, INTERVALS
from polsar_entropy.cli import main
from polsar_entropy.entropy import (
    SHANNON,
    EntropyKind,
    entropy,
    mu_tilde,
    renyi_entropy,
    shannon_entropy,
    tsallis_entropy,
)
from polsar_entropy.fixtures import REGIONS
from polsar_entropy.inference import entropy_variance, estimate, kron_quadratic_form
from polsar_entropy.simulate import MCConfig, mc_power_experiment, mc_size_experiment, replica_rng, sample_wishart
from polsar_entropy.stats import PAPER_COMPAT, confidence_interval, estimate_entropy
from polsar_entropy.wishart import WishartParams, expected_log_det, log_density, normalize_covariance

KINDS = {"shannon": SHANNON, "renyi:0.1": EntropyKind.renyi(0.1), "renyi:0.8": EntropyKind.renyi(0.8)}
LEVELS = (0.01, 0.05, 0.10)


def test_criterion_1_interval_bounds():
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for region, bounds in INTERVALS.items():
        r = REGIONS[region]
        for kind, (lo, hi) in bounds.items():
            ci = confidence_interval(estimate_entropy(KINDS[kind], r.params(), r.n), 0.95, PAPER_COMPAT)
            worst = max(worst, abs(ci.lower - lo), abs(ci.upper - hi))
            count += 2
    elapsed = time.perf_counter() - start
    ok = count == 18 and worst <= INTERVAL_TOL and elapsed < 1.0
    record_criterion(1, "18 interval bounds for A1-A3 within 0.05", ok,
                     f"max error {worst:.4f}, {elapsed * 1e3:.1f} ms")
    assert ok


def _size_checks(report, widen):
    s = report.rate("shannon", 121, 0.05)
    r01 = report.rate("renyi:0.1", 121, 0.05)
    r08 = report.rate("renyi:0.8", 121, 0.05)
    checks = [
        0.045 - widen <= s <= 0.065 + widen,
        0.024 - widen <= r01 <= 0.046 + widen,
        abs(r08 - s) <= 0.01 + widen,
    ]
    return all(checks), f"shannon {s:.4%}, renyi:0.1 {r01:.4%}, renyi:0.8 {r08:.4%}"


def test_criterion_2_size_calibration(default_size_report):
    ok, detail = _size_checks(default_size_report, 0.0)
    record_criterion(2, "empirical size at N=121, 5%, 5500 replicas", ok, detail)
    assert ok


def test_criterion_2_smoke_variant(sig_u):
    start = time.perf_counter()
    cfg = MCConfig(replicas=2000, sample_sizes=(121,))
    report = mc_size_experiment(WishartParams(sig_u, 3.2), cfg)
    elapsed = time.perf_counter() - start
    ok, detail = _size_checks(report, 0.015)
    ok = ok and elapsed < 60
    record_criterion(2, "smoke variant, 2000 replicas, bounds widened 1.5 pts", ok,
                     f"{detail}, {elapsed:.1f} s")
    assert ok


def test_criterion_3_unit_power(sig_u):
    p1 = WishartParams(sig_u, 3.2)
    p2 = WishartParams(sig_u.scaled(1.2), 3.2)
    cfg = MCConfig(replicas=1000, sample_sizes=(400,))
    report = mc_power_experiment(p1, p2, cfg, pair="U-1.2U")
    rates = {(k, a): report.rate(k, 400, a) for k in KINDS for a in LEVELS}
    ok = all(v == 1.0 for v in rates.values())
    record_criterion(3, "power 1.0 for Sigma_U vs 1.2 Sigma_U, N=400, 1000 replicas", ok,
                     f"min rate {min(rates.values()):.4f}")
    assert ok


def test_criterion_4_entropy_oracles(sig_u):
    worst = 0.0
    for i, looks in enumerate((3.2, 4.0, 8.0)):
        p = WishartParams(sig_u, looks)
        lf = log_density(sample_wishart(p, 100_000, replica_rng(0, i)), p)
        se = lf.std(ddof=1) / math.sqrt(lf.size)
        worst = max(worst, abs(-lf.mean() - shannon_entropy(p).value) / se)
        for beta in (0.5, 0.8):
            v = np.exp((beta - 1) * lf)
            se = v.std(ddof=1) / math.sqrt(v.size)
            worst = max(worst, abs(v.mean() - mu_tilde(p, beta)) / se)
    ok = worst <= 3
    record_criterion(4, "MC -E ln f and E f^(beta-1) at L in {3.2, 4, 8}, 1e5 draws", ok,
                     f"largest deviation {worst:.2f} SE")
    assert ok


def test_criterion_5_variance_oracle(variance_fits):
    p, fits = variance_fits
    worst = 0.0
    parts = []
    for name, kind in KINDS.items():
        h = np.array([entropy(kind, WishartParams.from_log_det(3, lk, ld)).value for lk, ld in fits])
        ratio = 1000 * h.var(ddof=1) / entropy_variance(kind, p)
        worst = max(worst, abs(ratio - 1))
        parts.append(f"{name} {ratio:.3f}")
    ok = worst <= 0.15
    record_criterion(5, "N Var(H) over 2000 fits at N=1000 within 15%", ok, ", ".join(parts))
    assert ok


def test_criterion_6_identities(sig_u):
    rng = np.random.default_rng(6)
    q_err = max(abs(kron_quadratic_form(random_pd(rng, 3, cond=1e3)) - 3) for _ in range(50))

    scale_err = 0.0
    for c in (0.5, 1.1, 1.2, 2.0):
        for looks in (1.361, 3.2, 8.0):
            p = WishartParams(sig_u, looks)
            pc = p.with_sigma(sig_u.scaled(c))
            for kind in KINDS.values():
                d = entropy(kind, pc).value - entropy(kind, p).value
                scale_err = max(scale_err, abs(d - 9 * math.log(c)))

    collapse = 0.0
    var_collapse = 0.0
    for m in (1, 2, 3):
        sigma = normalize_covariance(random_pd(rng, m, cond=20)).scaled(m)
        for looks in (3.2, 4.0, 8.0, 16.0):
            p = WishartParams(sigma, looks)
            h = shannon_entropy(p).value
            s2 = entropy_variance(SHANNON, p)
            for beta in (1 - 1e-4, 1 + 1e-4):
                collapse = max(collapse, abs(renyi_entropy(p, beta).value - h),
                               abs(tsallis_entropy(p, beta).value - h))
                var_collapse = max(var_collapse,
                                   abs(entropy_variance(EntropyKind.renyi(beta), p) - s2) / s2)

    residual = 0.0
    fits = 0
    for n, j in itertools.product((9, 49, 400), range(100)):
        p = WishartParams(sig_u, 3.2 if j % 2 else 8.0)
        fit = estimate(sample_wishart(p, n, replica_rng(6, n, j)))
        residual = max(residual, abs(fit.residual))
        fits += 1

    ok = q_err <= 1e-10 and scale_err <= 1e-9 and collapse <= 1e-2 and var_collapse <= 1e-2 and residual <= 1e-8
    record_criterion(6, "exact identities", ok,
                     f"quad form {q_err:.1e}, scale {scale_err:.1e}, beta->1 {collapse:.1e}, "
                     f"variance beta->1 {var_collapse:.1e} rel, residual {residual:.1e} over {fits} fits")
    assert ok


def test_criterion_7_moment_identities(sig_u):
    p = WishartParams(sig_u, 3.2)
    z = sample_wishart(p, 100_000, replica_rng(7, 0))
    scale = np.abs(sig_u.entries).max()
    mean_err = np.abs(z.data.mean(axis=0) - sig_u.entries).max() / scale
    ld = z.log_dets()
    dev = abs(ld.mean() - expected_log_det(p)) / (ld.std(ddof=1) / math.sqrt(ld.size))
    ok = mean_err <= 0.01 and dev <= 3
    record_criterion(7, "sampler mean and E ln|Z| at (Sigma_U, 3.2), 1e5 draws", ok,
                     f"mean error {mean_err:.2%} of largest entry, ln|Z| {dev:.2f} SE")
    assert ok


def test_criterion_8_determinism(tmp_path):
    outputs = []
    for run, workers in enumerate(("1", "1", "2", "3")):
        d = tmp_path / f"run{run}"
        code = main(["simulate", "--replicas", "200", "--sample-sizes", "9,49", "--seed", "42",
                     "--workers", workers, "--out-dir", str(d)], out=io.StringIO())
        assert code == 0
        outputs.append(((d / "mc_report.csv").read_bytes(), (d / "mc_report.json").read_bytes()))
    ok = all(o == outputs[0] for o in outputs)
    record_criterion(8, "simulate output byte-identical across runs and 1/2/3 workers", ok)
    assert ok
