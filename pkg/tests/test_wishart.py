import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pd
from oracles import det_cofactor
from polsar_entropy.errors import DimensionError, InputError, NotPositiveDefiniteError, PoleError
from polsar_entropy.fixtures import SIGMA_U_DIAGONAL, SIGMA_U_UPPER
from polsar_entropy.special import multivariate_polygamma
from polsar_entropy.wishart import (
    HermitianMatrix,
    SampleSet,
    WishartParams,
    expected_log_det,
    log_density,
    log_det,
    normalize_covariance,
)

# cofactor expansion of the case-study matrix (tests/oracles.py)
DET_SIGMA_U = 2.201595866378723e16


class TestHermitianMatrix:
    def test_from_upper_exactly_hermitian(self, sig_u):
        a = sig_u.entries
        assert np.array_equal(a, a.conj().T)
        assert np.all(np.diagonal(a).imag == 0)

    def test_sigma_u_values(self, sig_u):
        a = sig_u.entries
        assert list(np.diagonal(a).real) == list(SIGMA_U_DIAGONAL)
        assert a[0, 1] == SIGMA_U_UPPER[0] and a[1, 0] == np.conj(SIGMA_U_UPPER[0])
        assert a[0, 2] == SIGMA_U_UPPER[1] and a[1, 2] == SIGMA_U_UPPER[2]

    def test_small_asymmetry_averaged(self):
        a = np.array([[2.0, 1.0 + 1e-12], [1.0, 2.0]], dtype=complex)
        h = HermitianMatrix(a)
        assert h.entries[0, 1] == h.entries[1, 0].conjugate()

    def test_large_asymmetry_rejected(self):
        with pytest.raises(InputError):
            HermitianMatrix([[2.0, 1.0], [0.5, 2.0]])

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            HermitianMatrix([[1.0, 2.0], [2.0, 1.0]])

    def test_not_square(self):
        with pytest.raises(DimensionError):
            HermitianMatrix(np.ones((2, 3)))

    def test_immutable(self, sig_u):
        with pytest.raises(ValueError):
            sig_u.entries[0, 0] = 1.0

    def test_inverse(self, rng):
        a = random_pd(rng, 3)
        assert np.allclose(a.inverse() @ a.entries, np.eye(3), atol=1e-12)

    @settings(max_examples=30)
    @given(st.lists(st.floats(0.1, 10), min_size=3, max_size=3),
           st.lists(st.complex_numbers(max_magnitude=1.0), min_size=3, max_size=3))
    def test_from_upper_property(self, diag, upper):
        a = np.diag(diag).astype(complex)
        try:
            h = HermitianMatrix.from_upper(diag, upper)
        except NotPositiveDefiniteError:
            return
        assert np.array_equal(h.entries, h.entries.conj().T)
        assert a.shape == h.entries.shape


class TestLogDet:
    def test_identity(self):
        assert log_det(np.eye(3)) == 0.0

    def test_diag(self):
        assert log_det(np.diag([2.0, 3.0])) == pytest.approx(math.log(6), rel=1e-12)

    def test_sigma_u_cofactor(self, sig_u):
        oracle = det_cofactor(sig_u.entries.tolist())
        assert oracle.real == pytest.approx(DET_SIGMA_U, rel=1e-12)
        assert sig_u.log_det() == pytest.approx(math.log(DET_SIGMA_U), rel=1e-10)

    @pytest.mark.parametrize("c", [0.5, 1.1, 1.2, 2.0, 1e3])
    def test_scale(self, sig_u, c):
        assert sig_u.scaled(c).log_det() == pytest.approx(3 * math.log(c) + sig_u.log_det(), abs=1e-10)

    def test_stack(self, rng):
        mats = [random_pd(rng, 3).entries for _ in range(4)]
        out = log_det(np.stack(mats))
        assert out.shape == (4,)
        for v, a in zip(out, mats):
            assert v == pytest.approx(math.log(det_cofactor(a.tolist()).real), rel=1e-10)

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            log_det(-np.eye(2))


class TestParams:
    def test_relaxed_flag(self, sig_u):
        assert WishartParams(sig_u, 1.361).relaxed
        assert not WishartParams(sig_u, 3.2).relaxed

    @pytest.mark.parametrize("looks", [1.0, 2.0])
    def test_pole(self, sig_u, looks):
        with pytest.raises(PoleError):
            WishartParams(sig_u, looks)

    @pytest.mark.parametrize("looks", [0.0, -1.5, float("nan"), float("inf")])
    def test_bad_looks(self, looks):
        with pytest.raises(InputError):
            WishartParams(np.eye(2), looks)

    def test_from_log_det(self):
        p = WishartParams.from_log_det(3, 1.361, math.log(355494.5))
        assert p.log_det_sigma == pytest.approx(math.log(355494.5), abs=1e-12)


class TestSampleSet:
    def test_validates_items(self):
        with pytest.raises(NotPositiveDefiniteError):
            SampleSet([np.eye(2), -np.eye(2)])

    def test_empty(self):
        with pytest.raises(InputError):
            SampleSet([])

    def test_indexing(self, rng):
        s = SampleSet([random_pd(rng, 2).entries for _ in range(5)])
        assert len(s) == 5 and s.m == 2
        assert isinstance(s[0], HermitianMatrix)
        assert s[[0, 2]].size == 2

    def test_mean(self):
        s = SampleSet([np.eye(2), 3 * np.eye(2)])
        assert np.allclose(s.mean().entries, 2 * np.eye(2))


class TestDensity:
    def test_unit_exponential(self):
        p = WishartParams(np.eye(1), 1.0)
        assert log_density(np.eye(1), p) == pytest.approx(-1.0, abs=1e-14)

    def test_m1_l2(self):
        p = WishartParams(np.eye(1), 2.0)
        assert log_density(np.eye(1), p) == pytest.approx(math.log(4) - 2, abs=1e-14)

    def test_m1_gamma_density(self):
        # L Z ~ Gamma(L, sigma): f(z) = L^L z^(L-1) exp(-L z / s) / (s^L Gamma(L))
        for looks, s, z in [(3.5, 2.0, 0.7), (1.2, 0.3, 4.0)]:
            p = WishartParams([[s]], looks)
            expected = looks * math.log(looks) + (looks - 1) * math.log(z) - looks * z / s \
                - looks * math.log(s) - math.lgamma(looks)
            assert log_density([[z]], p) == pytest.approx(expected, abs=1e-12)

    def test_batched_matches_single(self, rng, sig_u):
        p = WishartParams(sig_u, 4.0)
        mats = [random_pd(rng, 3, cond=5).scaled(1e5) for _ in range(3)]
        batch = log_density(SampleSet([a.entries for a in mats]), p)
        for v, a in zip(batch, mats):
            assert v == pytest.approx(log_density(a, p), rel=1e-12)

    def test_trace_against_inverse(self, rng, sig_u):
        z = random_pd(rng, 3).scaled(1e5)
        p = WishartParams(sig_u, 4.0)
        tr = np.trace(sig_u.inverse() @ z.entries).real
        direct = 12 * math.log(4) + (4 - 3) * z.log_det() - 4 * sig_u.log_det() \
            - (3 * math.log(math.pi) + math.lgamma(4) + math.lgamma(3) + math.lgamma(2)) - 4 * tr
        assert log_density(z, p) == pytest.approx(direct, rel=1e-10)

    def test_dimension_mismatch(self, sig_u):
        with pytest.raises(DimensionError):
            log_density(np.eye(2), WishartParams(sig_u, 4.0))

    def test_scaling_identity(self, rng, sig_u):
        # f_{c Sigma}(z) = f_Sigma(z / c) / c^(m^2)
        z = random_pd(rng, 3).scaled(1e5)
        c, looks = 2.5, 3.2
        a = log_density(z, WishartParams(sig_u.scaled(c), looks))
        b = log_density(z.scaled(1 / c), WishartParams(sig_u, looks)) - 9 * math.log(c)
        assert a == pytest.approx(b, rel=1e-10)


class TestExpectedLogDet:
    def test_unit_exponential(self):
        assert expected_log_det(WishartParams(np.eye(1), 1.0)) == pytest.approx(-0.5772156649015329, abs=1e-13)

    def test_identity(self):
        p = WishartParams(np.eye(3), 4.0)
        assert expected_log_det(p) == pytest.approx(multivariate_polygamma(0, 3, 4.0) - 3 * math.log(4), abs=1e-13)


class TestNormalize:
    def test_two_identity(self):
        assert np.allclose(normalize_covariance(2 * np.eye(2)).entries, 0.5 * np.eye(2))

    def test_unit_trace(self, sig_u):
        assert normalize_covariance(sig_u).trace() == pytest.approx(1.0, abs=1e-12)

    def test_scalar_diagonal(self):
        for lam in (0.1, 3.0, 1e4):
            n = normalize_covariance(lam * np.eye(3))
            assert math.exp(n.log_det()) * 27 == pytest.approx(1.0, abs=1e-12)

    def test_eigenvectors_unchanged(self, rng):
        a = random_pd(rng, 3)
        _, v1 = np.linalg.eigh(a.entries)
        _, v2 = np.linalg.eigh(normalize_covariance(a).entries)
        assert np.allclose(np.abs(v1.conj().T @ v2), np.eye(3), atol=1e-8)
