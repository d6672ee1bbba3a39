import math

import numpy as np
import pytest
from scipy.integrate import quad

from quadosc.model import (
    DiagonalBoundSpec,
    ModelParams,
    TruncationSpec,
    invariant_diag,
    invariant_tail_mass,
    lerch_phi,
    nu_from_temperature,
    omega,
)


class TestOmega:
    @pytest.mark.parametrize("r", [0.3, 0.5, 1.0, 2.7])
    def test_zero_at_ground_level(self, r):
        assert omega(0, r) == 0.0

    @pytest.mark.parametrize("r", [0.3, 1.0, 5.0])
    def test_first_level_equals_r(self, r):
        assert omega(1, r) == pytest.approx(r, rel=1e-15)

    def test_direct_evaluation(self):
        assert omega(2, 0.5) == pytest.approx(3.0, rel=1e-15)

    def test_vectorized(self):
        n = np.arange(6)
        np.testing.assert_allclose(omega(n, 1.0), n.astype(float) ** 2)

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_rejects_nonpositive_r(self, r):
        with pytest.raises(ValueError):
            omega(1, r)

    def test_rejects_negative_level(self):
        with pytest.raises(ValueError):
            omega(-1, 1.0)

    @pytest.mark.parametrize("r", [0.5, 1.0, 3.2])
    def test_increment_is_commutator_diagonal(self, r):
        # omega(n+1) - omega(n) = 2n + r, the diagonal of the bracket [B, B+]
        n = np.arange(50)
        np.testing.assert_allclose(
            omega(n + 1, r) - omega(n, r), 2.0 * n + r, rtol=1e-13
        )


class TestLerchPhi:
    def test_zero_argument(self):
        assert lerch_phi(0.0, 2.0, 1e-12) == 0.5

    def test_logarithm_closed_form(self):
        assert lerch_phi(0.25, 1.0, 1e-14) == pytest.approx(
            4.0 * math.log(4.0 / 3.0), abs=1e-13
        )

    def test_artanh_closed_form(self):
        expected = 2.0 * math.atanh(0.5) / 0.5
        assert lerch_phi(0.25, 0.5, 1e-14) == pytest.approx(expected, abs=1e-13)

    @pytest.mark.parametrize("z", [1.0, 1.5])
    def test_rejects_z_at_or_beyond_one(self, z):
        with pytest.raises(ValueError):
            lerch_phi(z, 1.0, 1e-12)

    def test_rejects_negative_z(self):
        with pytest.raises(ValueError):
            lerch_phi(-0.1, 1.0, 1e-12)

    @pytest.mark.parametrize("z", [0.0, 0.3, 0.9, 0.99])
    @pytest.mark.parametrize("r", [0.1, 1.0, 4.0])
    def test_elementary_upper_bound(self, z, r):
        assert lerch_phi(z, r, 1e-13) <= 1.0 / (r * (1.0 - z)) + 1e-12

    def test_matches_mpmath(self):
        mp = pytest.importorskip("mpmath")
        for z, r in ((0.09, 0.5), (0.25, 1.3), (0.64, 0.05), (0.9025, 7.0)):
            expected = float(mp.lerchphi(z, 1, r))
            assert lerch_phi(z, r, 1e-14) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("nu", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_integral_representation(self, nu, r):
        # Phi(nu^2, 1, r) = 2 nu^(-2r) * integral_0^nu s^(2r-1)/(1-s^2) ds
        val, _ = quad(
            lambda s: s ** (2 * r - 1) / (1 - s * s), 0.0, nu, epsabs=1e-13, epsrel=1e-13
        )
        assert lerch_phi(nu * nu, r, 1e-14) == pytest.approx(
            2.0 * nu ** (-2 * r) * val, abs=1e-10
        )


class TestInvariantDiag:
    def test_ground_state_at_zero_coupling(self):
        p = invariant_diag(0.0, 5)
        np.testing.assert_allclose(p, [1.0, 0.0, 0.0, 0.0, 0.0])

    def test_raw_geometric_entries(self):
        p = invariant_diag(0.5, 8, normalized=False)
        assert p[0] == pytest.approx(0.75, rel=1e-15)
        assert p[1] == pytest.approx(0.1875, rel=1e-15)
        assert p[2] == pytest.approx(0.046875, rel=1e-15)
        np.testing.assert_allclose(p[1:] / p[:-1], 0.25, rtol=1e-14)

    @pytest.mark.parametrize("nu", [0.1, 0.5, 0.9, 0.99])
    def test_normalized_sums_to_one(self, nu):
        total = invariant_diag(nu, 40).sum()
        assert abs(total - 1.0) <= 4 * np.finfo(float).eps

    def test_tail_mass(self):
        assert invariant_tail_mass(0.5, 10) == pytest.approx(0.25 ** 10, rel=1e-14)

    @pytest.mark.parametrize("nu", [1.0, 1.2])
    def test_rejects_nu_at_or_beyond_one(self, nu):
        with pytest.raises(ValueError):
            invariant_diag(nu, 10)


class TestNuFromTemperature:
    def test_direct_evaluation(self):
        assert nu_from_temperature(2.0, math.log(2.0)) == pytest.approx(0.5, rel=1e-15)

    def test_limits(self):
        assert nu_from_temperature(1.0, 50.0) < 2e-11
        assert 0.999 < nu_from_temperature(1.0, 1e-4) < 1.0

    @pytest.mark.parametrize("s,beta", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_rejects_nonpositive_inputs(self, s, beta):
        with pytest.raises(ValueError):
            nu_from_temperature(s, beta)


class TestModelParams:
    def test_nu_is_exact_ratio(self):
        p = ModelParams(r=1.0, lam=0.5, mu=2.0)
        assert p.nu == 0.25

    def test_from_nu(self):
        p = ModelParams.from_nu(0.5, r=2.0, mu=3.0)
        assert p.lam == 1.5 and p.mu == 3.0 and p.r == 2.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(r=0.0, lam=0.5, mu=1.0),
            dict(r=-1.0, lam=0.5, mu=1.0),
            dict(r=1.0, lam=-0.5, mu=1.0),
            dict(r=1.0, lam=0.5, mu=0.0),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)


class TestTruncationSpec:
    def test_rejects_small_dim(self):
        with pytest.raises(ValueError):
            TruncationSpec(1)

    @pytest.mark.parametrize("tol", [0.0, 1.0, -0.5])
    def test_rejects_bad_tail_tol(self, tol):
        with pytest.raises(ValueError):
            TruncationSpec(10, tail_tol=tol)


class TestDiagonalBoundSpec:
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_telescoping_is_exact(self, r):
        spec = DiagonalBoundSpec.build(r, 80)
        # partial sums of a_n telescope exactly back to the tails
        for k in range(51):
            total = math.fsum(spec.a_seq[k:]) + spec.tail_seq[-1]
            assert total == pytest.approx(spec.tail_seq[k], abs=1e-15)

    def test_a_matches_product_formula(self):
        spec = DiagonalBoundSpec.build(0.7, 60)
        n = np.arange(60, dtype=float)
        np.testing.assert_allclose(
            spec.a_seq, 1.0 / ((n + 0.7 + 1.0) * (n + 0.7)), rtol=1e-13
        )

    def test_tail_decreasing_positive(self):
        spec = DiagonalBoundSpec.build(1.3, 30)
        assert np.all(spec.tail_seq > 0.0)
        assert np.all(np.diff(spec.tail_seq) < 0.0)
