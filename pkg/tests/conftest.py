import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polsar_entropy.fixtures import sigma_u  # noqa: E402
from polsar_entropy.wishart import HermitianMatrix  # noqa: E402


def random_pd(rng, m, cond=10.0):
    """Random complex Hermitian PD matrix with eigenvalues in [1, cond]."""
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, _ = np.linalg.qr(a)
    lam = rng.uniform(1.0, cond, size=m)
    return HermitianMatrix((q * lam) @ q.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sig_u():
    return sigma_u()


@pytest.fixture(scope="session")
def variance_fits():
    """2000 ML fits at N=1000 from (Sigma_U, L=4): columns L_hat, ln|Sigma_hat|."""
    from polsar_entropy.inference import estimate
    from polsar_entropy.simulate import replica_rng, sample_wishart
    from polsar_entropy.wishart import WishartParams

    p = WishartParams(sigma_u(), 4.0)
    out = np.empty((2000, 2))
    for j in range(2000):
        fit = estimate(sample_wishart(p, 1000, replica_rng(2024, j)))
        out[j] = fit.params.looks, fit.params.log_det_sigma
    return p, out


@pytest.fixture(scope="session")
def default_size_report():
    """Size experiment on the default grid at (Sigma_U, L=3.2): 5500 replicas, seed 0."""
    from polsar_entropy.simulate import MCConfig, mc_size_experiment
    from polsar_entropy.wishart import WishartParams

    return mc_size_experiment(WishartParams(sigma_u(), 3.2), MCConfig())


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
