import numpy as np
import pytest

from quadosc.model import ModelParams, TruncationSpec, invariant_diag, omega
from quadosc.operators import (
    DensityMatrix,
    apply_generator,
    apply_predual,
    build_operators,
    embed,
    embedded_sector_matrix,
    two_photon_check,
    un_embed,
)
from quadosc.spectral import sector_form


def make_opset(nu=0.5, r=1.0, dim=24, zeta_plus=0.0, zeta_minus=0.0, mu=1.0):
    params = ModelParams.from_nu(nu, r=r, mu=mu, zeta_plus=zeta_plus, zeta_minus=zeta_minus)
    return params, build_operators(params, TruncationSpec(dim))


class TestBuildOperators:
    def test_two_level_entry(self):
        _, op = make_opset(r=1.0, dim=2)
        assert op.B()[0, 1] == pytest.approx(1.0, rel=1e-15)

    def test_b_has_dim_minus_one_entries(self):
        _, op = make_opset(dim=17)
        assert np.count_nonzero(op.B()) == 16

    def test_adjoint_pair(self):
        _, op = make_opset(dim=12)
        np.testing.assert_array_equal(op.B_plus(), op.B().T)

    def test_number_word_diagonal(self):
        _, op = make_opset(r=0.7, dim=10)
        got = np.diag(op.B_plus() @ op.B())
        np.testing.assert_allclose(got, omega(np.arange(10), 0.7), rtol=1e-14)

    def test_m_diagonal_odd_integers_at_unit_r(self):
        _, op = make_opset(r=1.0, dim=5)
        np.testing.assert_allclose(op.m_diag, [1.0, 3.0, 5.0, 7.0, 9.0])

    def test_commutator_is_m_away_from_boundary(self):
        _, op = make_opset(r=0.5, dim=14)
        comm = op.B() @ op.B_plus() - op.B_plus() @ op.B()
        np.testing.assert_allclose(
            comm[:-1, :-1], np.diag(op.m_diag)[:-1, :-1], atol=1e-12
        )

    def test_g_diag_real_part_nonpositive(self):
        params, op = make_opset(nu=0.5, r=0.5, dim=10, zeta_plus=0.3, zeta_minus=0.1)
        re = op.g_diag.real
        assert np.all(re <= 0.0)
        assert np.all(re[1:] < 0.0)
        assert re[0] == pytest.approx(-0.5 * params.lam ** 2 * omega(1, 0.5), rel=1e-14)


class TestApplyGenerator:
    def test_identity_is_fixed(self):
        _, op = make_opset(dim=16, zeta_plus=0.3, zeta_minus=0.1)
        out = apply_generator(op, np.eye(16, dtype=complex))
        assert np.max(np.abs(out)) <= 1e-12

    def test_ground_unit(self):
        # substitution j = k = 0 into the matrix-unit formula: the damping
        # carries lam^2 omega_1 while the repopulation carries mu^2 omega_1
        params, op = make_opset(nu=0.5, r=1.0, dim=8)
        unit = np.zeros((8, 8), dtype=complex)
        unit[0, 0] = 1.0
        out = apply_generator(op, unit)
        expected = np.zeros((8, 8), dtype=complex)
        expected[1, 1] = params.mu ** 2 * omega(1, 1.0)
        expected[0, 0] = -params.lam ** 2 * omega(1, 1.0)
        np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_ground_unit_predual(self):
        # in the state picture the excitation out of the ground unit is
        # lam^2 omega_1 on both entries
        params, op = make_opset(nu=0.5, r=1.0, dim=8)
        unit = np.zeros((8, 8), dtype=complex)
        unit[0, 0] = 1.0
        out = apply_predual(op, unit)
        expected = np.zeros((8, 8), dtype=complex)
        lam2 = params.lam ** 2
        expected[1, 1] = lam2 * omega(1, 1.0)
        expected[0, 0] = -lam2 * omega(1, 1.0)
        np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_diagonal_action_is_birth_death(self):
        params, op = make_opset(nu=0.6, r=0.8, dim=32, zeta_plus=0.2, zeta_minus=0.4)
        lam2, mu2 = params.lam ** 2, params.mu ** 2
        w = omega(np.arange(33), 0.8)
        for f in (np.arange(32.0), np.arange(32.0) ** 2, np.arange(32.0) ** 3):
            out = apply_generator(op, np.diag(f.astype(complex)))
            assert np.max(np.abs(out - np.diag(np.diag(out)))) == 0.0
            j = np.arange(1, 31)
            expected = lam2 * w[j + 1] * (f[j + 1] - f[j]) + mu2 * w[j] * (f[j - 1] - f[j])
            np.testing.assert_allclose(np.diag(out).real[1:31], expected, rtol=1e-12)

    @pytest.mark.parametrize("r", [0.7, 1.0, 2.0])
    def test_cubic_drift_identity(self, r):
        # diagonal action on the squared number observable is an explicit
        # cubic in n: 2(lam^2 - mu^2) n^3 + (lam^2(2r+3) - mu^2(2r-3)) n^2
        # + (lam^2(3r+1) + mu^2(r-1)) n + lam^2 r
        params, op = make_opset(nu=0.5, r=r, dim=32, mu=1.0)
        lam2, mu2 = params.lam ** 2, params.mu ** 2
        n = np.arange(32.0)
        out = apply_generator(op, np.diag((n ** 2).astype(complex)))
        got = np.diag(out).real
        cubic = (
            2.0 * (lam2 - mu2) * n ** 3
            + (lam2 * (2 * r + 3) - mu2 * (2 * r - 3)) * n ** 2
            + (lam2 * (3 * r + 1) + mu2 * (r - 1)) * n
            + lam2 * r
        )
        interior = slice(1, 31)
        np.testing.assert_allclose(got[interior], cubic[interior], atol=1e-10)

    def test_dimension_mismatch(self):
        _, op = make_opset(dim=6)
        with pytest.raises(ValueError):
            apply_generator(op, np.eye(5))


class TestApplyPredual:
    def test_invariant_state_is_fixed(self):
        params, op = make_opset(nu=0.5, dim=24, zeta_plus=0.3, zeta_minus=0.1)
        rho = DensityMatrix.invariant(params, 24)
        out = apply_predual(op, rho.mat)
        tn = np.sum(np.abs(np.linalg.eigvalsh(0.5 * (out + out.conj().T))))
        assert tn <= 1e-13

    def test_raw_state_boundary_term(self):
        # the exact (untruncated) action on the finitely supported raw state
        # leaves only the documented boundary term
        params, _ = make_opset(nu=0.5, dim=20)
        op_up = build_operators(params, TruncationSpec(21))
        raw = np.zeros((21, 21), dtype=complex)
        raw[np.arange(20), np.arange(20)] = invariant_diag(0.5, 20, normalized=False)
        out = apply_predual(op_up, raw)
        n = 19
        lam2 = params.lam ** 2
        tn = np.sum(np.abs(np.linalg.eigvalsh(0.5 * (out + out.conj().T))))
        bound = lam2 * 0.5 ** (2 * n) * (omega(n + 1, 1.0) + omega(n, 1.0))
        assert 0.0 < tn <= bound
        # the leftover term sits exactly on the top two diagonal entries
        mask = np.ones((21, 21), dtype=bool)
        mask[19, 19] = mask[20, 20] = False
        assert np.max(np.abs(out[mask])) <= 1e-18

    def test_traceless_and_hermitian(self):
        rng = np.random.default_rng(7)
        params, op = make_opset(nu=0.4, r=1.3, dim=12, zeta_plus=0.2, zeta_minus=0.1)
        a = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
        herm = 0.1 * (a + a.conj().T)
        out = apply_predual(op, herm)
        assert abs(out.trace()) <= 1e-13
        assert np.max(np.abs(out - out.conj().T)) <= 1e-13

    def test_duality_with_heisenberg_picture(self):
        # tr(L*(rho) x) = tr(rho L(x)) on random state/observable pairs
        rng = np.random.default_rng(11)
        params, op = make_opset(nu=0.5, r=0.9, dim=16, zeta_plus=0.3, zeta_minus=0.1)
        for _ in range(10):
            a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
            rho = a @ a.conj().T
            rho /= rho.trace().real
            b = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
            x = b + b.conj().T
            x /= np.linalg.norm(x)
            lhs = np.trace(apply_predual(op, rho) @ x)
            rhs = np.trace(rho @ apply_generator(op, x))
            assert abs(lhs - rhs) <= 1e-12


class TestDensityMatrix:
    def test_symmetrizes_on_ingest(self):
        m = np.diag([0.6, 0.4]).astype(complex)
        m[0, 1] = 0.1 + 0.05j
        dm = DensityMatrix(m)
        assert np.max(np.abs(dm.mat - dm.mat.conj().T)) == 0.0

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([0.6, 0.5]))

    def test_rejects_negative_state(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_basis_and_invariant(self):
        params = ModelParams.from_nu(0.5, r=1.0)
        assert DensityMatrix.basis(2, 5).diagonal()[2] == 1.0
        rho = DensityMatrix.invariant(params, 30)
        assert rho.diagonal().sum() == pytest.approx(1.0, abs=1e-14)


class TestEmbedding:
    def test_identity_embeds_to_sqrt_weights(self):
        pi = invariant_diag(0.5, 10)
        got = embed(np.eye(10), pi)
        np.testing.assert_allclose(np.diag(got), np.sqrt(pi), rtol=1e-14)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        pi = invariant_diag(0.7, 12)
        x = rng.standard_normal((12, 12))
        np.testing.assert_allclose(un_embed(embed(x, pi), pi), x, rtol=1e-14)

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            embed(np.eye(3), np.array([1.0, 0.0, 1.0]))

    def test_embedded_coefficients_are_geometric_mean_couplings(self):
        # conjugation turns both one-step couplings into mu*lam*sqrt(w w)
        params, op = make_opset(nu=0.5, r=1.0, dim=12)
        pi = invariant_diag(0.5, 12)
        j, k = 3, 7
        unit = np.zeros((12, 12), dtype=complex)
        unit[j, k] = 1.0
        image = embed(apply_generator(op, un_embed(unit, pi)), pi)
        mulam = params.mu * params.lam
        w = omega(np.arange(13), 1.0)
        assert image[j - 1, k - 1] == pytest.approx(mulam * np.sqrt(w[j] * w[k]), rel=1e-12)
        assert image[j + 1, k + 1] == pytest.approx(
            mulam * np.sqrt(w[j + 1] * w[k + 1]), rel=1e-12
        )
        assert image[j, k] == pytest.approx(
            -0.5 * (w[j] + w[k]) - 0.5 * params.lam ** 2 * (w[j + 1] + w[k + 1]), rel=1e-12
        )


class TestEmbeddedSectorMatrix:
    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_matches_negative_sector_form(self, m):
        params = ModelParams.from_nu(0.5, r=1.0, mu=0.25)
        op = build_operators(params, TruncationSpec(20 + m + 2))
        s_mat = embedded_sector_matrix(op, m, 20)
        expected = -sector_form(params, m, 20).matrix()
        assert np.max(np.abs(s_mat - expected)) <= 1e-13

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_hamiltonian_adds_diagonal_phase(self, m):
        params = ModelParams.from_nu(0.5, r=1.3, mu=0.25, zeta_plus=0.03, zeta_minus=0.01)
        op = build_operators(params, TruncationSpec(18 + m + 2))
        s_mat = embedded_sector_matrix(op, m, 18)
        w = omega(np.arange(18 + m + 2), 1.3)
        j = np.arange(18)
        dvec = 0.03 * (w[j + 1] - w[j + m + 1]) + 0.01 * (w[j] - w[j + m])
        expected = -sector_form(params, m, 18).matrix() + 1j * np.diag(dvec)
        assert np.max(np.abs(s_mat - expected)) <= 1e-13

    def test_negative_sector_mirrors_positive(self):
        params = ModelParams.from_nu(0.5, r=1.0, mu=0.5)
        op = build_operators(params, TruncationSpec(24))
        s_pos = embedded_sector_matrix(op, 1, 20)
        s_neg = embedded_sector_matrix(op, -1, 20)
        np.testing.assert_array_equal(s_pos, s_neg)

    def test_size_limit(self):
        params = ModelParams.from_nu(0.5, r=1.0)
        op = build_operators(params, TruncationSpec(10))
        with pytest.raises(ValueError):
            embedded_sector_matrix(op, 3, 8)


class TestTwoPhotonCheck:
    @pytest.mark.parametrize("parity,r", [("even", 0.5), ("odd", 1.5)])
    def test_exact_proportionality_with_hamiltonian(self, parity, r):
        params = ModelParams(r=r, lam=0.5, mu=1.0, zeta_plus=0.3, zeta_minus=0.1)
        rep = two_photon_check(params, 0.3, 0.1, parity, TruncationSpec(24))
        assert rep.proportionality_constant == pytest.approx(4.0, abs=1e-12)
        assert rep.max_residual <= 1e-12

    @pytest.mark.parametrize("parity,r", [("even", 0.5), ("odd", 1.5)])
    def test_pure_dissipators(self, parity, r):
        params = ModelParams(r=r, lam=0.4, mu=1.0)
        rep = two_photon_check(params, 0.0, 0.0, parity, TruncationSpec(20))
        assert rep.proportionality_constant == pytest.approx(4.0, abs=1e-12)
        assert rep.max_residual <= 1e-12

    def test_parity_r_mismatch(self):
        params = ModelParams(r=1.0, lam=0.5, mu=1.0)
        with pytest.raises(ValueError):
            two_photon_check(params, 0.0, 0.0, "even", TruncationSpec(12))

    def test_identity_maps_to_zero_both_sides(self):
        # unitality holds in both pictures, so the identity adds no constraint
        params = ModelParams(r=0.5, lam=0.5, mu=1.0, zeta_plus=0.2, zeta_minus=0.1)
        op = build_operators(params, TruncationSpec(12))
        assert np.max(np.abs(apply_generator(op, np.eye(12, dtype=complex)))) <= 1e-12
