import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from supermodekit import cluster
from supermodekit.kernellab import build_modulated
from supermodekit.numerics import InvalidArgument, default_axis
from supermodekit.supermodes import compare_spectra, predict_modulated_spectrum, solve_fredholm
from supermodekit.transverse import Grid2D, LGFamily, hybrid_mode_profile

SIGMA = 0.005


def brute_force_covariance(n, r, rot):
    """Propagate quadrature operators explicitly: X_out_j = sum_k rot[k, j] X_in_k."""
    var_in_x = np.array([np.exp(-2 * r)] + [np.exp(2 * r)] * (n - 1))
    var_in_p = np.array([np.exp(2 * r)] + [np.exp(-2 * r)] * (n - 1))
    v = np.zeros((2 * n, 2 * n))
    for a in range(n):
        for b in range(n):
            v[a, b] = sum(rot[k, a] * rot[k, b] * var_in_x[k] for k in range(n))
            v[n + a, n + b] = sum(rot[k, a] * rot[k, b] * var_in_p[k] for k in range(n))
    return v


def random_completion(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n))
    m[:, 0] = 1.0
    q, _ = np.linalg.qr(m)
    q = q * np.sign(q[0, 0])
    return q.T


class TestCoupling:
    def test_ring4_entries(self):
        k = cluster.ring4_matrix()
        c = 1 / np.sqrt(2)
        assert k[0, 1] == k[1, 2] == k[2, 3] == c
        assert k[0, 3] == -c
        assert np.all(np.diag(k) == 0)
        assert np.array_equal(k, k.T)

    def test_ring4_spectrum(self):
        spec, basis = cluster.decompose_coupling(cluster.ring4_matrix())
        assert sorted(spec) == pytest.approx([-1, -1, 1, 1], abs=1e-15)

    def test_complete_spectrum(self):
        spec, _ = cluster.decompose_coupling(cluster.complete_matrix(5, -0.25))
        assert spec[0] == pytest.approx(-1.0, abs=1e-15)
        np.testing.assert_allclose(spec[1:], 0.25, atol=1e-15)

    def test_complete_entries(self):
        k = cluster.complete_matrix(5, -0.25)
        assert np.all(k[~np.eye(5, dtype=bool)] == -0.25)
        assert np.all(np.diag(k) == 0)

    def test_complete_two(self):
        spec, _ = cluster.decompose_coupling(cluster.complete_matrix(2, 0.7))
        assert sorted(spec) == pytest.approx([-0.7, 0.7])

    def test_diagonal(self):
        spec, basis = cluster.decompose_coupling(np.diag([0.5, -3.0, 2.0]))
        assert list(spec) == [-3.0, 2.0, 0.5]
        assert np.array_equal(np.abs(basis), np.abs(basis).round())
        assert np.array_equal(basis @ basis.T, np.eye(3))

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidArgument):
            cluster.decompose_coupling(np.array([[0.0, 1.0], [0.5, 0.0]]))

    @given(st.integers(2, 32), st.integers(0, 10_000))
    def test_reconstruct(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n, n))
        k = a + a.T
        spec, basis = cluster.decompose_coupling(k)
        assert np.linalg.norm(cluster.reconstruct(spec, basis) - k) <= 1e-10 * max(1.0, np.linalg.norm(k))

    def test_small_matrix_check(self):
        with pytest.raises(InvalidArgument):
            cluster.complete_matrix(1, 1.0)


class TestMatching:
    def test_ring4(self):
        res = cluster.match_spectrum_to_kernel([1, 1, -1, -1], SIGMA)
        assert res.feasible
        plus, minus = res.spec.plus_terms, res.spec.minus_terms
        assert len(plus) == 3 and plus[0][0] == 0.0
        assert minus == ((1.0, 0.0),)
        assert cluster.spectrum_round_trip(res, [1, 1, -1, -1])

    def test_fig1c_type(self):
        target = [-4, 1, 1, 1, 1]
        res = cluster.match_spectrum_to_kernel(target, SIGMA)
        assert res.feasible
        assert res.spec.plus_terms == ((1.0, 0.0),)
        assert res.spec.minus_terms[0] == (-2.0, 0.0)
        assert len(res.spec.minus_terms) == 3
        assert cluster.spectrum_round_trip(res, target)

    def test_complete5(self):
        target = [-1, 0.25, 0.25, 0.25, 0.25]
        res = cluster.match_spectrum_to_kernel(target, SIGMA)
        assert cluster.spectrum_round_trip(res, target)

    def test_single(self):
        res = cluster.match_spectrum_to_kernel([1.0], SIGMA)
        assert res.feasible
        assert len(res.spec.plus_terms) == 1 and len(res.spec.minus_terms) == 1
        assert predict_modulated_spectrum(res.spec).values() == pytest.approx([res.scale])

    def test_infeasible(self):
        res = cluster.match_spectrum_to_kernel([3, 1, 2], SIGMA)
        assert not res.feasible and res.spec is None
        assert sorted(res.closest) == pytest.approx([1.5, 1.5, 3.0])
        assert res.max_relative_deviation > 0

    def test_errors(self):
        with pytest.raises(InvalidArgument):
            cluster.match_spectrum_to_kernel([], SIGMA)
        with pytest.raises(InvalidArgument):
            cluster.match_spectrum_to_kernel([1.0, 0.0], SIGMA)

    @pytest.mark.parametrize(
        "target",
        [[1, -1], [2, 1, 1], [1, 1, -1, -1, 0.5, 0.5, -0.5, -0.5], [-4, 1, 1, 1, 1], [3, -3, 1]],
    )
    def test_round_trip_and_validity(self, target):
        res = cluster.match_spectrum_to_kernel(target, SIGMA)
        assert res.feasible
        assert cluster.spectrum_round_trip(res, target)
        assert res.spec.is_valid()

    def test_numeric_agreement(self):
        target = [1, 1, -1, -1]
        res = cluster.match_spectrum_to_kernel(target, SIGMA)
        s = solve_fredholm(build_modulated(res.spec, default_axis(SIGMA)))
        rep = compare_spectra(s, predict_modulated_spectrum(res.spec))
        assert rep.max_relative_deviation < 0.02 and rep.counts_match


class TestBraunstein:
    def test_n2(self):
        c = 1 / np.sqrt(2)
        np.testing.assert_allclose(cluster.braunstein_rotation(2), [[c, c], [c, -c]], atol=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 7, 64])
    def test_orthogonal(self, n):
        r = cluster.braunstein_rotation(n)
        assert np.max(np.abs(r @ r.T - np.eye(n))) < 1e-12
        assert r[0] @ np.ones(n) == pytest.approx(np.sqrt(n))


class TestGhz:
    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("r", [0.0, 1.0, 2.0])
    def test_against_brute_force(self, n, r):
        v = cluster.ghz_covariance(n, r)
        ref = brute_force_covariance(n, r, cluster.braunstein_rotation(n))
        np.testing.assert_allclose(v, ref, rtol=1e-12, atol=1e-12)
        var_x, var_p = cluster.joint_variances(v)
        assert var_x == pytest.approx(n * np.exp(-2 * r), abs=1e-9)
        assert var_p == pytest.approx(2 * np.exp(-2 * r), abs=1e-9)
        assert cluster.uncertainty_min_eig(v) >= -1e-9
        assert np.linalg.det(v) == pytest.approx(1.0, abs=1e-9)

    def test_vacuum(self):
        np.testing.assert_allclose(cluster.ghz_covariance(5, 0.0), np.eye(10), atol=1e-15)
        assert cluster.joint_variances(np.eye(10)) == (5.0, 2.0)

    def test_ten_db(self):
        # 10 dB: exp(-2r) = 0.1
        v = cluster.ghz_covariance(4, np.log(10) / 2)
        var_x, var_p = cluster.joint_variances(v)
        assert var_x <= 0.1 * 4 * (1 + 1e-12) and var_p <= 0.1 * 2 * (1 + 1e-12)
        v = cluster.ghz_covariance(4, 1.2)
        assert max(cluster.joint_variances(v)[0] / 4, cluster.joint_variances(v)[1] / 2) < 0.1

    def test_four_values_needing_extra_entry_infeasible(self):
        # a degenerate positive pair needs B != 0, which forces a fifth entry 2BC
        assert not cluster.match_spectrum_to_kernel([3, -3, 1, 1], SIGMA).feasible

    def test_monotone(self):
        rs = np.linspace(0, 3, 31)
        vals = np.array([cluster.joint_variances(cluster.ghz_covariance(5, r)) for r in rs])
        assert np.all(np.diff(vals, axis=0) < 0)

    @pytest.mark.parametrize("seed", range(3))
    def test_other_completion(self, seed):
        n, r = 5, 1.3
        rot = random_completion(n, seed)
        assert np.allclose(rot @ rot.T, np.eye(n))
        a = cluster.joint_variances(cluster.ghz_covariance(n, r, rot))
        b = cluster.joint_variances(cluster.ghz_covariance(n, r))
        assert a == pytest.approx(b, rel=1e-10)

    @given(st.integers(2, 8), st.floats(0, 2.5), st.integers(0, 1000))
    def test_purity_under_rotation(self, n, r, seed):
        rot = random_completion(n, seed) if n > 1 else np.eye(1)
        v = cluster.passive_transform(cluster.squeezed_inputs(n, r), rot)
        assert np.linalg.det(v) == pytest.approx(1.0, abs=1e-9 * max(1.0, np.exp(2 * r)))
        assert cluster.uncertainty_min_eig(v) >= -1e-9 * np.exp(2 * r)

    def test_reduced_pairs(self):
        # tracing out three modes of a finitely squeezed CV GHZ state leaves
        # every remaining pair entangled (not PPT); vacuum pairs are PPT
        v = cluster.ghz_covariance(5, 2.0)
        for pair in itertools.combinations(range(5), 2):
            assert not cluster.is_ppt(cluster.reduce_modes(v, pair))
        assert cluster.is_ppt(cluster.reduce_modes(cluster.ghz_covariance(5, 0.0), (0, 1)))

    def test_ppt_of_product_squeezed(self):
        v = cluster.squeezed_inputs(2, 1.0)
        assert cluster.is_ppt(v)

    def test_two_mode_squeezed_not_ppt(self):
        v = cluster.ghz_covariance(2, 0.5)
        assert not cluster.is_ppt(v)


class TestProfiles:
    grid = Grid2D(4.0, 81)

    def test_identity(self):
        fam = LGFamily(2)
        maps = cluster.entangled_mode_profiles(fam, np.eye(3), self.grid)
        for m, (l, kind) in zip(maps, fam.hybrid_labels()):
            h = hybrid_mode_profile(fam, l, kind, self.grid)
            np.testing.assert_allclose(m, h**2 / (np.sum(h**2) * self.grid.cell_area), atol=1e-12)

    def test_unit_power(self):
        maps = cluster.entangled_mode_profiles(LGFamily(1), cluster.braunstein_rotation(2), self.grid)
        assert len(maps) == 2
        for m in maps:
            assert np.sum(m) * self.grid.cell_area == pytest.approx(1.0, abs=1e-8)

    def test_distinct_f2(self):
        maps = cluster.entangled_mode_profiles(LGFamily(2), cluster.braunstein_rotation(3), self.grid)
        for a, b in itertools.combinations(maps, 2):
            assert np.sqrt(np.sum((a - b) ** 2) * self.grid.cell_area) > 0.1

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgument):
            cluster.entangled_mode_profiles(LGFamily(2), np.eye(2), self.grid)
