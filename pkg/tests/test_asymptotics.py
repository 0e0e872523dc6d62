"""Mixture c.d.f., fixed point, derivative-measure algebra, limit variances,
and covariance kernels, checked against closed forms, frozen high-precision
constants, and finite-difference oracles."""

import numpy as np
import pytest

from equifdp import (
    BH,
    EMPTY_MEASURE,
    AtomicMeasure,
    FixedRho,
    FixedThreshold,
    MixtureCdf,
    ParameterError,
    PowerLaw,
    RegimeError,
    ThetaOverM,
    asymptotic_law,
    bh_fixed_point,
    bh_threshold_derivative,
    disturbance_coef,
    ecdf_limit_cov,
    ecdf_variance,
    fluctuation_measures,
    limit_cov,
    phi_upper,
    phi_upper_inv,
    std_normal_density,
    threshold_derivative,
)
from oracles import central_difference

# pinned with 60-digit bisection before the build
T_STAR_REF = 0.08059968470029045  # pi0=0.5, mu=2, alpha=0.2
T_STAR_STRESS_REF = 0.980173694834980838  # pi0=0.5, mu=2, alpha=0.99
G_HALF_REF = 0.738624934025910396  # G(0.5) at pi0=0.5, mu=2

MU_GRID = (0.5, 1.0, 2.0, 4.0)


def bh_closed_forms(pi0, mu, alpha):
    """Independent closed-form expressions for the BH limit quantities."""
    t = bh_fixed_point(MixtureCdf(pi0, mu), alpha)
    sigma2 = pi0 * alpha**2 * (1.0 - t) / t
    c2 = pi0**2 * alpha**2 / (2.0 * np.pi * t**2) * np.exp(-phi_upper_inv(t) ** 2)
    return t, sigma2, c2


class TestMixtureCdf:
    def test_value_at_half(self):
        cdf = MixtureCdf(0.5, 2.0)
        assert cdf(0.5) == pytest.approx(G_HALF_REF, rel=1e-13)

    def test_degenerate_shift_limit(self):
        cdf = MixtureCdf(0.5, 1e-8)
        assert abs(cdf(0.3) - 0.3) <= 1e-6

    def test_monotone(self):
        for pi0 in (0.2, 0.5, 0.8):
            for mu in MU_GRID:
                cdf = MixtureCdf(pi0, mu)
                ts = np.linspace(0.0, 1.0, 50)
                assert np.all(np.diff(cdf(ts)) > 0)

    def test_endpoints(self):
        cdf = MixtureCdf(0.4, 1.5)
        assert cdf(0.0) == 0.0
        assert cdf(1.0) == 1.0

    def test_alternative_dominates_uniform(self):
        cdf = MixtureCdf(0.5, 2.0)
        ts = np.linspace(0.01, 0.99, 25)
        assert np.all(cdf.alt_cdf(ts) >= ts)

    def test_derivative_matches_finite_difference(self):
        cdf = MixtureCdf(0.35, 1.7)
        rng = np.random.default_rng(5)
        for t in rng.uniform(0.05, 0.95, size=10):
            fd = central_difference(cdf, t)
            assert cdf.derivative(t) == pytest.approx(fd, rel=1e-6)

    def test_fdp_limit_derivative_matches_finite_difference(self):
        cdf = MixtureCdf(0.6, 2.5)
        rng = np.random.default_rng(6)
        for t in rng.uniform(0.05, 0.95, size=5):
            fd = central_difference(cdf.fdp_limit, t)
            assert cdf.fdp_limit_deriv(t) == pytest.approx(fd, rel=1e-6)

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            MixtureCdf(0.0, 1.0)
        with pytest.raises(ParameterError):
            MixtureCdf(0.5, 0.0)


class TestFixedPoint:
    def test_reference_value(self):
        t = bh_fixed_point(MixtureCdf(0.5, 2.0), 0.2)
        assert t == pytest.approx(T_STAR_REF, rel=1e-12)

    def test_alpha_near_one_stress(self):
        t = bh_fixed_point(MixtureCdf(0.5, 2.0), 0.99)
        assert t == pytest.approx(T_STAR_STRESS_REF, rel=1e-12)
        cdf = MixtureCdf(0.5, 2.0)
        assert abs(cdf(t) - t / 0.99) <= 1e-12

    def test_residual_and_center_on_grid(self):
        # spot grid here; the full 144-point sweep runs in the acceptance suite
        for pi0 in (0.1, 0.5, 0.9):
            for mu in (0.5, 4.0):
                for alpha in (0.01, 0.2):
                    cdf = MixtureCdf(pi0, mu)
                    t = bh_fixed_point(cdf, alpha)
                    assert abs(cdf(t) - t / alpha) <= 1e-12
                    assert abs(cdf.fdp_limit(t) - pi0 * alpha) <= 1e-12

    def test_far_left_fixed_point(self):
        # this parameter corner pushes t* to ~1.1e-44; pinned by 60-digit
        # bisection
        t = bh_fixed_point(MixtureCdf(0.9, 0.5), 0.01)
        assert t == pytest.approx(1.1026448117940026e-44, rel=1e-10)

    def test_invalid_alpha(self):
        with pytest.raises(ParameterError):
            bh_fixed_point(MixtureCdf(0.5, 2.0), 0.0)


class TestAtomicMeasure:
    def test_merging_close_atoms(self):
        m = AtomicMeasure(((0.3, 1.0), (0.3 + 1e-13, 2.0), (0.6, -1.0)))
        assert len(m.atoms) == 2
        assert m.atoms[0][1] == pytest.approx(3.0)

    def test_integrate_is_finite_sum(self):
        m = AtomicMeasure(((0.25, 2.0), (0.75, -0.5)))
        assert m.integrate(lambda t: t) == pytest.approx(2.0 * 0.25 - 0.5 * 0.75)

    def test_add_and_scale(self):
        a = AtomicMeasure(((0.5, 1.0),))
        b = AtomicMeasure(((0.5, -1.0),))
        assert (a + b).atoms[0][1] == 0.0
        assert a.scaled(3.0).atoms == ((0.5, 3.0),)

    def test_rejects_boundary_locations(self):
        with pytest.raises(ParameterError):
            AtomicMeasure(((0.0, 1.0),))
        with pytest.raises(ParameterError):
            AtomicMeasure(((1.0, 1.0),))


class TestThresholdDerivative:
    def test_bh_atom_location_is_fixed_point(self):
        cdf = MixtureCdf(0.5, 2.0)
        d = bh_threshold_derivative(cdf, 0.2)
        assert d.atoms[0][0] == bh_fixed_point(cdf, 0.2)

    def test_bh_weight_closed_form(self):
        # weight = 1 / (1/alpha - dG(t*)), dG from the closed-form density
        # ratio, itself validated against a finite difference of G
        cdf = MixtureCdf(0.5, 2.0)
        t = bh_fixed_point(cdf, 0.2)
        gdot_closed = 0.5 + 0.5 * np.exp(2.0 * phi_upper_inv(t) - 2.0)
        fd = central_difference(cdf, t)
        assert gdot_closed == pytest.approx(fd, rel=1e-6)
        d = bh_threshold_derivative(cdf, 0.2)
        assert d.atoms[0][1] == pytest.approx(1.0 / (5.0 - gdot_closed), rel=1e-12)

    def test_fixed_threshold_has_zero_derivative(self):
        cdf = MixtureCdf(0.5, 2.0)
        assert threshold_derivative(cdf, FixedThreshold(0.4)).is_empty


class TestFluctuationMeasures:
    def test_bh_alt_measure_cancels(self):
        cdf = MixtureCdf(0.5, 2.0)
        t = bh_fixed_point(cdf, 0.2)
        z0, z1 = fluctuation_measures(cdf, t, bh_threshold_derivative(cdf, 0.2))
        assert abs(z1.weights().sum()) <= 1e-10
        assert z0.atoms[0][1] == pytest.approx(0.5 * 0.2 / t, rel=1e-10)

    def test_bh_cancellation_across_grid(self):
        for pi0 in (0.2, 0.7):
            for mu in (1.0, 3.0):
                for alpha in (0.05, 0.2):
                    cdf = MixtureCdf(pi0, mu)
                    t = bh_fixed_point(cdf, alpha)
                    z0, z1 = fluctuation_measures(
                        cdf, t, bh_threshold_derivative(cdf, alpha)
                    )
                    scale = pi0 * alpha / t
                    assert abs(z1.weights().sum()) <= 1e-10 * scale
                    assert z0.weights().sum() == pytest.approx(scale, rel=1e-10)

    def test_fixed_threshold_formulas(self):
        cdf = MixtureCdf(0.5, 2.0)
        t0 = 0.5
        z0, z1 = fluctuation_measures(cdf, t0, EMPTY_MEASURE)
        q = cdf.fdp_limit(t0)
        assert z0.atoms == ((t0, pytest.approx(q * (1 - q) / t0, rel=1e-14)),)
        assert z1.atoms[0][1] == pytest.approx(-q * (1 - q) / cdf.alt_cdf(t0), rel=1e-14)


class TestVarianceComponents:
    def test_zero_measures_give_zero(self):
        cdf = MixtureCdf(0.5, 2.0)
        assert disturbance_coef(EMPTY_MEASURE, EMPTY_MEASURE, 2.0) == 0.0
        assert ecdf_variance(EMPTY_MEASURE, EMPTY_MEASURE, cdf) == 0.0

    def test_bh_specialization_closed_forms(self):
        # generic pipeline equals the closed forms pi0*a^2*(1-t*)/t* and
        # pi0^2*a^2/(2*pi*t*^2)*exp(-q(t*)^2) to 1e-10 relative
        for pi0 in (0.1, 0.5, 0.9):
            for mu in (0.5, 2.0):
                for alpha in (0.05, 0.2):
                    cdf = MixtureCdf(pi0, mu)
                    t, sigma2_cf, c2_cf = bh_closed_forms(pi0, mu, alpha)
                    z0, z1 = fluctuation_measures(
                        cdf, t, bh_threshold_derivative(cdf, alpha)
                    )
                    assert ecdf_variance(z0, z1, cdf) == pytest.approx(
                        sigma2_cf, rel=1e-10
                    )
                    assert disturbance_coef(z0, z1, mu) ** 2 == pytest.approx(
                        c2_cf, rel=1e-10
                    )

    def test_fixed_threshold_two_atom_sum(self):
        cdf = MixtureCdf(0.5, 2.0)
        t0 = 0.5
        z0, z1 = fluctuation_measures(cdf, t0, EMPTY_MEASURE)
        w0, w1 = z0.atoms[0][1], z1.atoms[0][1]
        expected_c = w0 * std_normal_density(phi_upper_inv(t0)) + w1 * std_normal_density(
            phi_upper_inv(t0) - 2.0
        )
        assert disturbance_coef(z0, z1, 2.0) == pytest.approx(expected_c, rel=1e-14)
        g1 = cdf.alt_cdf(t0)
        expected_var = (t0 * (1 - t0)) * w0**2 / 0.5 + (g1 * (1 - g1)) * w1**2 / 0.5
        assert ecdf_variance(z0, z1, cdf) == pytest.approx(expected_var, rel=1e-14)

    def test_kernels_positive_semidefinite(self):
        cdf = MixtureCdf(0.5, 2.0)
        rng = np.random.default_rng(17)
        for _ in range(20):
            locs = np.sort(rng.uniform(0.02, 0.98, size=rng.integers(2, 6)))
            k0 = np.minimum(locs[:, None], locs[None, :]) - locs[:, None] * locs[None, :]
            g1 = np.asarray(cdf.alt_cdf(locs))
            k1 = np.asarray(
                cdf.alt_cdf(np.minimum(locs[:, None], locs[None, :]))
            ) - g1[:, None] * g1[None, :]
            assert np.linalg.eigvalsh(k0).min() >= -1e-10
            assert np.linalg.eigvalsh(k1).min() >= -1e-10


class TestAsymptoticLaw:
    def test_theta_zero_matches_independent_case(self):
        cdf = MixtureCdf(0.5, 2.0)
        law = asymptotic_law(cdf, BH(0.2), ThetaOverM(0.0))
        _, sigma2_cf, _ = bh_closed_forms(0.5, 2.0, 0.2)
        assert law.variance == pytest.approx(sigma2_cf, rel=1e-10)
        assert law.rate == "sqrt(m)"
        assert abs(law.center - 0.1) <= 1e-12

    def test_theta_shifts_variance_by_c_squared(self):
        cdf = MixtureCdf(0.5, 2.0)
        law0 = asymptotic_law(cdf, BH(0.2), ThetaOverM(0.0))
        law4 = asymptotic_law(cdf, BH(0.2), ThetaOverM(4.0))
        lawm1 = asymptotic_law(cdf, BH(0.2), ThetaOverM(-1.0))
        c2 = law0.c_coef**2
        assert law4.variance == pytest.approx(law0.variance + 4.0 * c2, rel=1e-12)
        assert lawm1.variance == pytest.approx(law0.variance - c2, rel=1e-12)
        assert law4.variance > law0.variance > lawm1.variance

    def test_case_ii_variance_ignores_power_law_constants(self):
        cdf = MixtureCdf(0.5, 2.0)
        a = asymptotic_law(cdf, BH(0.2), PowerLaw(1.0, 0.5))
        b = asymptotic_law(cdf, BH(0.2), PowerLaw(3.0, 0.25))
        assert a.variance == b.variance == a.c_coef**2
        assert a.rate == "rho_m**-0.5"

    def test_fixed_rho_raises_regime_error(self):
        cdf = MixtureCdf(0.5, 2.0)
        with pytest.raises(RegimeError):
            asymptotic_law(cdf, BH(0.2), FixedRho(0.3))

    def test_fixed_threshold_center_is_fdp_limit(self):
        cdf = MixtureCdf(0.5, 2.0)
        law = asymptotic_law(cdf, FixedThreshold(0.4), ThetaOverM(1.0))
        assert law.center == pytest.approx(cdf.fdp_limit(0.4), rel=1e-14)
        assert law.t_star == 0.4


class TestLimitCov:
    def test_common_null_at_half(self):
        cdf = MixtureCdf(0.5, 2.0)
        assert limit_cov(cdf, "common_null", 0.5, 0.5) == pytest.approx(
            0.3989422804014327, rel=1e-14
        )

    def test_null_bridge_diagonal(self):
        cdf = MixtureCdf(0.5, 2.0)
        assert limit_cov(cdf, "null_null", 0.25, 0.25) == pytest.approx(0.375)

    def test_alt_bridge_off_diagonal(self):
        cdf = MixtureCdf(0.5, 2.0)
        g1_02 = phi_upper(phi_upper_inv(0.2) - 2.0)
        g1_06 = phi_upper(phi_upper_inv(0.6) - 2.0)
        expected = (g1_02 - g1_02 * g1_06) / 0.5
        assert limit_cov(cdf, "alt_alt", 0.2, 0.6) == pytest.approx(expected, rel=1e-13)

    def test_symmetric_in_arguments(self):
        cdf = MixtureCdf(0.3, 1.0)
        assert limit_cov(cdf, "null_null", 0.2, 0.7) == limit_cov(cdf, "null_null", 0.7, 0.2)

    def test_unknown_kernel_rejected(self):
        with pytest.raises(ParameterError):
            limit_cov(MixtureCdf(0.5, 2.0), "bogus", 0.5, 0.5)

    def test_assembled_cov_reduces_to_bridge_at_theta_zero(self):
        cdf = MixtureCdf(0.5, 2.0)
        for s, t in [(0.25, 0.5), (0.3, 0.3)]:
            assert ecdf_limit_cov(cdf, 0.0, "null", s, t) == limit_cov(
                cdf, "null_null", s, t
            )
            assert ecdf_limit_cov(cdf, 0.0, "alt", s, t) == limit_cov(cdf, "alt_alt", s, t)

    def test_assembled_cov_theta_correction(self):
        cdf = MixtureCdf(0.5, 2.0)
        s, t, theta = 0.25, 0.5, 4.0
        d = lambda u: std_normal_density(phi_upper_inv(u))
        expected = limit_cov(cdf, "null_null", s, t) + theta * d(s) * d(t)
        assert ecdf_limit_cov(cdf, theta, "null", s, t) == pytest.approx(expected, rel=1e-14)
