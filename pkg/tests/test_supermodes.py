import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from supermodekit import supermodes
from supermodekit.kernellab import KernelMatrix, ModulatedKernelSpec, build_modulated
from supermodekit.numerics import InvalidArgument, default_axis, make_uniform_axis
from supermodekit.supermodes import (
    AnalyticSpectrum,
    analytic_eigenfunction,
    compare_spectra,
    group_degeneracies,
    predict_modulated_spectrum,
    solve_fredholm,
)

SIGMA = 0.005
U8 = np.sqrt(np.pi / 8) / SIGMA
FIG1A = ModulatedKernelSpec.symmetric(
    SIGMA, plus_terms=((0.0, 0.0), (1.0, 3 * np.pi * SIGMA), (1.0, 6 * np.pi * SIGMA))
)
FIG1C = ModulatedKernelSpec.symmetric(
    SIGMA, plus_terms=((1.0, 0.0),), minus_terms=((-2.0, 0.0), (1.0, 3 * np.pi * SIGMA), (1.0, 6 * np.pi * SIGMA))
)


def solve(spec, n=1024):
    axis = default_axis(min(spec.sigma_plus, spec.sigma_minus), n)
    return solve_fredholm(build_modulated(spec, axis))


@pytest.fixture(scope="module")
def fig1a():
    return solve(FIG1A)


@pytest.fixture(scope="module")
def fig1c():
    return solve(FIG1C)


def degenerate_groups(values, tol=1e-6):
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or abs(values[i] - values[start]) > tol * abs(values[start]):
            groups.append(list(range(start, i)))
            start = i
    return groups


class TestSolveFredholm:
    def test_gaussian_leading(self):
        s = solve(ModulatedKernelSpec.symmetric(0.5))
        assert s.eigenvalues[0] == pytest.approx(np.sqrt(np.pi / 2) / 0.5, rel=1e-3)
        assert len(s) == 1 or abs(s.eigenvalues[1]) <= 1e-6 * s.eigenvalues[0]

    def test_rank_one(self):
        ax = make_uniform_axis(8.0, 401)
        f = np.exp(-ax.points**2) * (1 + 0.3 * ax.points)
        s = solve_fredholm(KernelMatrix(ax, np.outer(f, f)))
        assert len(s) == 1
        assert s.eigenvalues[0] == pytest.approx(np.sum(ax.weights * f * f), rel=1e-12)
        assert s.overlap(0, f) == pytest.approx(1.0, abs=1e-12)

    def test_orthonormal(self, fig1c):
        w = fig1c.axis.weights
        g = (fig1c.eigenfunctions * w) @ fig1c.eigenfunctions.T
        assert np.max(np.abs(g - np.eye(len(fig1c)))) < 1e-8

    def test_sorted_by_magnitude(self, fig1c):
        assert np.all(np.diff(np.abs(fig1c.eigenvalues)) <= 0)

    def test_floor(self):
        ax = make_uniform_axis(8.0, 201)
        f = np.exp(-ax.points**2)
        g = np.exp(-ax.points**2) * ax.points
        k = KernelMatrix(ax, np.outer(f, f) + 1e-12 * np.outer(g, g))
        assert len(solve_fredholm(k)) == 1
        assert len(solve_fredholm(k, floor=1e-14)) == 2

    def test_zero_kernel_warns(self):
        ax = make_uniform_axis(1.0, 5)
        with pytest.warns(RuntimeWarning):
            s = solve_fredholm(KernelMatrix(ax, np.zeros((5, 5))))
        assert s.empty and len(s) == 0

    def test_max_modes(self, fig1a):
        s = solve_fredholm(build_modulated(FIG1A, default_axis(SIGMA)), max_modes=2)
        assert len(s) == 2

    def test_grid_convergence(self):
        spec = ModulatedKernelSpec.symmetric(0.5)
        a = solve(spec, 1024).eigenvalues[0]
        b = solve(spec, 2048).eigenvalues[0]
        assert abs(a - b) / abs(b) <= 1e-6

    @pytest.mark.parametrize("c", [0.5, 3.0])
    def test_dilation(self, c):
        spec = ModulatedKernelSpec(0.8, 0.5, ((1.0, 0.0), (0.7, 9.0)), ((1.0, 0.0),))
        ax = default_axis(0.5, 512)
        scaled = ModulatedKernelSpec(
            0.8 / c, 0.5 / c, tuple((b, beta / c) for b, beta in spec.plus_terms), spec.minus_terms
        )
        a = solve_fredholm(build_modulated(spec, ax)).eigenvalues[:6]
        b = solve_fredholm(build_modulated(scaled, ax.scaled(c))).eigenvalues[:6]
        # +- pairs of equal magnitude may swap places; compare sorted spectra
        np.testing.assert_allclose(np.sort(b) / np.sort(a), c, rtol=1e-6)

    @pytest.mark.parametrize(
        "spec",
        [FIG1A, FIG1C, ModulatedKernelSpec(0.8, 0.5, ((1.0, 0.0), (0.7, 9.0)), ((0.4, 0.0), (1.0, 6.0)))],
    )
    def test_parity(self, spec):
        # each degenerate eigenspace must be mapped onto itself by x -> -x
        s = solve(spec, 513)
        vecs = s.eigenfunctions * np.sqrt(s.axis.weights)
        keep = np.abs(s.eigenvalues) > 1e-6 * abs(s.eigenvalues[0])
        for group in degenerate_groups(s.eigenvalues[keep]):
            v = vecs[group].T
            flipped = v[::-1]
            residual = flipped - v @ (v.T @ flipped)
            assert np.max(np.abs(residual)) < 1e-6

    def test_exports(self, fig1a):
        csv = fig1a.to_csv(2)
        assert csv.splitlines()[0] == "x,s1,s2"
        assert len(csv.splitlines()) == 1025
        import json

        payload = json.loads(fig1a.to_json(3))
        assert len(payload["eigenfunctions"]) == 3


class TestPredict:
    def test_fig1a(self):
        vals = predict_modulated_spectrum(FIG1A).values()
        np.testing.assert_allclose(sorted(vals / U8), [-1, -1, 1, 1], rtol=1e-12)

    def test_fig1c(self):
        vals = predict_modulated_spectrum(FIG1C).values()
        np.testing.assert_allclose(sorted(vals / U8), [-4, 1, 1, 1, 1], rtol=1e-12)

    def test_pure_gaussian(self):
        spec = predict_modulated_spectrum(ModulatedKernelSpec.symmetric(0.5))
        assert spec.values() == pytest.approx([np.sqrt(np.pi / 2) / 0.5])

    def test_equal_widths_drop_ladder(self):
        spec = predict_modulated_spectrum(ModulatedKernelSpec.symmetric(0.5), m_max=4)
        by_m = {e.label[2]: e.value for e in spec.entries}
        assert all(by_m[m] == 0 for m in range(1, 5))

    @pytest.mark.parametrize("n_plus,n_minus", [(0, 0), (1, 0), (0, 2), (2, 1), (3, 3)])
    def test_total_count(self, n_plus, n_minus):
        plus = ((1.0, 0.0),) + tuple((1.0, 10.0 * (k + 1)) for k in range(n_plus))
        minus = ((1.0, 0.0),) + tuple((1.0, 10.0 * (k + 1)) for k in range(n_minus))
        spec = predict_modulated_spectrum(ModulatedKernelSpec.symmetric(0.1, plus, minus))
        assert spec.total_count == (2 * n_plus + 1) * (2 * n_minus + 1)

    def test_shared_combined_frequency_invalid(self):
        # cos(b x) cos(2b x) contains cos(b x): the labels mix
        b = 4 * np.pi * 0.05
        spec = ModulatedKernelSpec.symmetric(0.05, ((1.0, 0.0), (1.0, b)), ((1.0, 0.0), (1.0, 2 * b)))
        assert not spec.is_valid()
        spec = ModulatedKernelSpec.symmetric(0.05, ((1.0, 0.0), (1.0, b)), ((1.0, 0.0), (1.0, 3 * b)))
        assert spec.is_valid()

    def test_validity_flag_propagates(self):
        close = ModulatedKernelSpec.symmetric(1.0, plus_terms=((1.0, 0.0), (1.0, 2.0)))
        assert not predict_modulated_spectrum(close).valid
        assert predict_modulated_spectrum(FIG1A).valid

    def test_asymmetric_ladder_ratio(self):
        spec = predict_modulated_spectrum(ModulatedKernelSpec(2.0, 1.0), m_max=6)
        vals = [e.value for e in spec.entries]
        np.testing.assert_allclose(np.array(vals[1:]) / np.array(vals[:-1]), -1 / 3, rtol=1e-13)

    def test_asymmetric_matches_numeric(self):
        spec = ModulatedKernelSpec(2.0, 1.0)
        s = solve(spec)
        pred = np.array([e.value for e in predict_modulated_spectrum(spec, m_max=6).entries])
        np.testing.assert_allclose(s.eigenvalues[:7], pred, rtol=1e-6)


class TestAnalyticEigenfunction:
    def test_gaussian(self):
        spec = ModulatedKernelSpec(2.0, 0.5)
        x = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(analytic_eigenfunction(spec, (0, 0, 0, "cos"), x), np.exp(-(x**2)))

    def test_origin(self):
        assert analytic_eigenfunction(FIG1A, (1, 0, 0, "cos"), 0.0) == 1.0

    def test_fig1a_overlap(self, fig1a):
        x = fig1a.axis.points
        w = fig1a.axis.weights
        f = analytic_eigenfunction(FIG1A, (1, 0, 0, "cos"), x)
        f = f / np.sqrt(np.sum(w * f * f))
        positive = fig1a.eigenfunctions[fig1a.eigenvalues > 0.5 * U8]
        assert positive.shape[0] == 2
        proj = positive @ (w * f)
        assert np.sqrt(np.sum(proj**2)) >= 0.999

    def test_out_of_range(self):
        with pytest.raises(InvalidArgument):
            analytic_eigenfunction(FIG1A, (5, 0, 0, "cos"), 0.0)
        with pytest.raises(InvalidArgument):
            analytic_eigenfunction(FIG1A, (0, 0, 0, "sin"), 0.0)


class TestGrouping:
    def test_example(self):
        groups = group_degeneracies([1.000, 1.001, -1.000], 0.01)
        assert groups[0][1] == 2 and groups[0][0] == pytest.approx(1.0005)
        assert groups[1] == (-1.0, 1)

    def test_fig1a_groups(self, fig1a):
        groups = group_degeneracies(fig1a.eigenvalues[:4], 0.02)
        assert [g[1] for g in groups] == [2, 2]
        assert groups[0][0] * groups[1][0] < 0

    def test_unsigned(self):
        assert group_degeneracies([1.0, -1.0], 0.01, signed=False) == [(1.0, 2)]

    def test_tolerance_range(self):
        with pytest.raises(InvalidArgument):
            group_degeneracies([1.0], 0.5)

    def test_relative_spread(self):
        assert supermodes.relative_spread([2.0, -1.9, 1.0], 2) == pytest.approx(0.05)
        with pytest.raises(InvalidArgument):
            supermodes.relative_spread([1.0], 2)


class TestCompare:
    def test_gaussian(self):
        spec = ModulatedKernelSpec.symmetric(0.5)
        rep = compare_spectra(solve(spec), predict_modulated_spectrum(spec))
        assert len(rep.matches) == 1 and rep.counts_match
        assert rep.max_relative_deviation <= 1e-3

    def test_fig1a(self, fig1a):
        rep = compare_spectra(fig1a, predict_modulated_spectrum(FIG1A))
        assert len(rep.matches) == 4 and rep.counts_match
        assert rep.max_relative_deviation <= 0.02

    def test_fig1c(self, fig1c):
        rep = compare_spectra(fig1c, predict_modulated_spectrum(FIG1C))
        assert len(rep.matches) == 5 and rep.counts_match
        assert rep.max_relative_deviation <= 0.02

    def test_empty_analytic(self, fig1a):
        rep = compare_spectra(fig1a, AnalyticSpectrum(()))
        assert not rep.matches
        assert len(rep.unmatched_numeric) == len(fig1a.eigenvalues[np.abs(fig1a.eigenvalues) >= 1e-6 * U8])

    @settings(max_examples=8)
    @given(
        b=st.lists(st.floats(0.2, 2.0), min_size=4, max_size=4),
        signs=st.lists(st.sampled_from([-1.0, 1.0]), min_size=4, max_size=4),
        k=st.integers(4, 8),
    )
    def test_valid_specs_agree(self, b, signs, k):
        sigma = 0.05
        beta = k * np.pi * sigma
        spec = ModulatedKernelSpec.symmetric(
            sigma,
            plus_terms=((signs[0] * b[0], 0.0), (signs[1] * b[1], beta)),
            minus_terms=((signs[2] * b[2], 0.0), (signs[3] * b[3], 3 * beta)),
        )
        assert spec.is_valid()
        rep = compare_spectra(solve(spec), predict_modulated_spectrum(spec), floor=1e-3)
        assert rep.max_relative_deviation <= 0.02
