import numpy as np
import numpy.testing as npt
import pytest

from fraclest import (FsgsParams, GridSpec, NonzeroMeanError, ParameterError,
                      PHYSICAL, ScalarField, VectorField, divergence,
                      entropy_bound, equivalent_sgs_stress,
                      fractional_laplacian, fsgs_coefficient, fsgs_divergence,
                      gradient, laplacian, riesz_potential, riesz_transform,
                      tensor_divergence)
from fraclest.errors import DegenerateFieldError

from conftest import random_field, random_vector, rel_err

CASE1 = dict(nu=1.85e-4, rho=1.0, agitation_speed_u=502.0, c_bar=1500.0)

# Frozen before the build from a 60-digit mpmath evaluation of the closed
# form with the Case-I parameters above at alpha = 0.5.
MU_ALPHA_CASE1_HALF = -19073.712820670085


def mpmath_mu_alpha(alpha, rho, nu, u, c_bar, d=3):
    import mpmath as mp
    mp.mp.dps = 50
    alpha, rho, nu, u, c_bar = map(mp.mpf, (alpha, rho, nu, u, c_bar))
    tau = nu / u ** 2
    c = (mp.mpf(2) ** (2 * alpha) * mp.gamma(alpha + mp.mpf(d) / 2)
         / (mp.pi ** (mp.mpf(d) / 2) * mp.gamma(-alpha)) * c_bar * alpha ** 2)
    return rho * (u * tau) ** (2 * alpha) / tau * mp.gamma(2 * alpha + 1) * c


class TestFractionalLaplacian:
    def test_eigenfunction_single_mode(self, grid8):
        x, y, z = grid8.coordinates()
        f = ScalarField(grid8, PHYSICAL, np.sin(3 * x) + 0 * y + 0 * z)
        out = fractional_laplacian(f, 0.5)
        assert rel_err(out.data, 3.0 * np.sin(3 * x) + 0 * y + 0 * z) < 1e-10

    def test_alpha_one_recovers_laplacian(self, grid16):
        f = random_field(grid16, 23)
        a = fractional_laplacian(f, 1.0)
        b = laplacian(f)
        assert rel_err(a.data, -b.data) < 1e-12
        c = divergence(gradient(f))
        assert rel_err(a.data, -c.data) < 1e-12

    def test_mixed_modes_closed_form(self, grid16):
        x, y, z = grid16.coordinates()
        f = ScalarField(grid16, PHYSICAL, np.sin(2 * x) + np.sin(4 * y) + 0 * z)
        out = fractional_laplacian(f, 0.75)
        want = 2 ** 1.5 * np.sin(2 * x) + 4 ** 1.5 * np.sin(4 * y) + 0 * z
        assert rel_err(out.data, want) < 1e-10

    def test_mean_annihilated(self, grid8):
        f = ScalarField(grid8, PHYSICAL, np.full(grid8.shape, 4.2))
        out = fractional_laplacian(f, 0.6)
        assert np.max(np.abs(out.data)) < 1e-12

    @pytest.mark.parametrize("alpha", [0.0, -0.2, 1.0001, 2.0])
    def test_alpha_range_enforced(self, grid8, alpha):
        f = random_field(grid8, 2)
        with pytest.raises(ParameterError):
            fractional_laplacian(f, alpha)

    def test_semigroup_on_mean_free(self, grid16):
        f = random_field(grid16, 29)
        f = ScalarField(grid16, PHYSICAL, f.data - f.mean())
        for a, b in ((0.3, 0.4), (0.25, 0.75), (0.5, 0.5)):
            lhs = fractional_laplacian(fractional_laplacian(f, a), b)
            rhs = fractional_laplacian(f, a + b)
            assert rel_err(lhs.data, rhs.data) < 1e-10

    def test_rotational_invariance_90_degrees(self, grid16):
        f = random_field(grid16, 31, cutoff_limited=False)
        rot = lambda d: np.rot90(d, axes=(0, 1))
        a = fractional_laplacian(
            ScalarField(grid16, PHYSICAL, rot(f.data).copy()), 0.6)
        b = fractional_laplacian(f, 0.6)
        assert rel_err(a.data, rot(b.data)) < 1e-12

    def test_multiplier_monotonic_in_alpha(self):
        # |k| > 1 -> increasing in alpha; |k| < 1 (longer box) -> decreasing
        g = GridSpec(8)
        x, y, z = g.coordinates()
        f = ScalarField(g, PHYSICAL, np.sin(2 * x) + 0 * y + 0 * z)
        amps = [np.max(np.abs(fractional_laplacian(f, a).data))
                for a in (0.2, 0.5, 0.8)]
        assert amps[0] < amps[1] < amps[2]
        g2 = GridSpec(8, domain_length=4 * np.pi)
        x2, y2, z2 = g2.coordinates()
        f2 = ScalarField(g2, PHYSICAL, np.sin(0.5 * x2) + 0 * y2 + 0 * z2)
        amps2 = [np.max(np.abs(fractional_laplacian(f2, a).data))
                 for a in (0.2, 0.5, 0.8)]
        assert amps2[0] > amps2[1] > amps2[2]


class TestRieszOperators:
    def test_potential_inverts_laplacian(self, grid16):
        f = random_field(grid16, 37)
        f = ScalarField(grid16, PHYSICAL, f.data - f.mean())
        for a in (0.3, 0.5):
            back = riesz_potential(fractional_laplacian(f, a), a)
            assert rel_err(back.data, f.data) < 1e-10

    def test_potential_single_mode(self, grid8):
        x, y, z = grid8.coordinates()
        f = ScalarField(grid8, PHYSICAL, np.sin(2 * x) + 0 * y + 0 * z)
        out = riesz_potential(f, 0.5)
        assert rel_err(out.data, np.sin(2 * x) / 2 + 0 * y + 0 * z) < 1e-12

    def test_potential_mode_by_mode_division(self, grid16):
        f = random_field(grid16, 41)
        f = ScalarField(grid16, PHYSICAL, f.data - f.mean())
        a = 0.35
        out = riesz_potential(f, a).to_spectral().data
        fh = f.to_spectral().data
        # independent per-mode oracle with numpy machinery only
        k1 = np.fft.fftfreq(grid16.n) * grid16.n
        kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
        kmag = np.sqrt(kx ** 2 + ky ** 2 + kz ** 2)
        kmag[0, 0, 0] = 1.0
        want = fh * kmag ** (-2 * a)
        want[0, 0, 0] = 0.0
        assert rel_err(out, want) < 1e-12

    def test_potential_rejects_nonzero_mean(self, grid8):
        f = ScalarField(grid8, PHYSICAL, random_field(grid8, 3).data + 5.0)
        with pytest.raises(NonzeroMeanError):
            riesz_potential(f, 0.5)
        with pytest.raises(NonzeroMeanError):
            riesz_transform(f, 0)

    def test_transform_squares_to_minus_identity(self, grid16):
        f = random_field(grid16, 43)
        f = ScalarField(grid16, PHYSICAL, f.data - f.mean())
        acc = np.zeros(grid16.shape)
        for j in range(3):
            acc += riesz_transform(riesz_transform(f, j), j).data
        assert rel_err(acc, -f.data) < 1e-10

    def test_transform_single_mode(self, grid8):
        x, y, z = grid8.coordinates()
        f = ScalarField(grid8, PHYSICAL, np.sin(x) + 0 * y + 0 * z)
        out = riesz_transform(f, 0)
        assert rel_err(out.data, -np.cos(x) + 0 * y + 0 * z) < 1e-12

    def test_transform_orthogonal_direction_vanishes(self, grid8):
        x, y, z = grid8.coordinates()
        f = ScalarField(grid8, PHYSICAL, np.sin(2 * y) + 0 * x + 0 * z)
        out = riesz_transform(f, 0)
        assert np.max(np.abs(out.data)) < 1e-12


class TestEquivalentStress:
    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    def test_divergence_identity_alpha_sweep(self, grid16, alpha):
        v = random_vector(grid16, 47, solenoidal=True)
        t = equivalent_sgs_stress(v, alpha)
        got = tensor_divergence(t)
        want = fractional_laplacian(v, alpha)
        err = max(rel_err(g.data, w.data)
                  for g, w in zip(got.components, want.components))
        assert err < 1e-10

    def test_alpha_one_single_mode_closed_form(self, grid8):
        # v = (sin x2, 0, 0): independent multiplier algebra gives
        # T*_12 = R_2 (-Lap)^{1/2} v_1 = -cos x2 (|k| = 1 on the support)
        x, y, z = grid8.coordinates()
        v = VectorField.from_arrays(grid8, PHYSICAL,
                                    [np.sin(y) + 0 * x + 0 * z,
                                     np.zeros(grid8.shape), np.zeros(grid8.shape)])
        t = equivalent_sgs_stress(v, 1.0)
        assert rel_err(t.component(0, 1).data, -np.cos(y) + 0 * x + 0 * z) < 1e-12
        assert np.max(np.abs(t.component(0, 2).data)) < 1e-12

    def test_constant_field_zero_tensor(self, grid8):
        v = VectorField.from_arrays(grid8, PHYSICAL,
                                    [np.full(grid8.shape, c) for c in (1, -2, 3)])
        t = equivalent_sgs_stress(v, 0.7)
        assert np.max(np.abs(t.as_array())) < 1e-12


class TestCoefficientChain:
    def test_alpha_one_exact_zero(self):
        c = fsgs_coefficient(FsgsParams(alpha=1.0, **CASE1))
        assert c.mu_alpha == 0.0 and c.nu_alpha == 0.0

    def test_frozen_case1_value(self):
        c = fsgs_coefficient(FsgsParams(alpha=0.5, **CASE1))
        assert c.mu_alpha == pytest.approx(MU_ALPHA_CASE1_HALF, rel=1e-12)
        assert c.nu_magnitude == pytest.approx(abs(MU_ALPHA_CASE1_HALF), rel=1e-12)

    def test_matches_high_precision_oracle_on_sweep(self):
        pytest.importorskip("mpmath")
        for a in np.linspace(0.02, 0.98, 25):
            got = fsgs_coefficient(FsgsParams(alpha=float(a), **CASE1)).mu_alpha
            want = float(mpmath_mu_alpha(float(a), CASE1["rho"], CASE1["nu"],
                                         CASE1["agitation_speed_u"], CASE1["c_bar"]))
            assert got == pytest.approx(want, rel=1e-12)

    def test_limit_continuity_near_one(self):
        sweep = [abs(fsgs_coefficient(FsgsParams(alpha=float(a), **CASE1)).nu_alpha)
                 for a in np.linspace(0.01, 0.99, 99)]
        near_one = abs(fsgs_coefficient(FsgsParams(alpha=1 - 1e-6, **CASE1)).nu_alpha)
        assert near_one <= 1e-3 * max(sweep)

    def test_sign_is_negative_on_open_interval(self):
        for a in (0.2, 0.5, 0.9):
            c = fsgs_coefficient(FsgsParams(alpha=a, **CASE1))
            assert c.nu_alpha < 0 and c.nu_magnitude > 0

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            FsgsParams(alpha=0.0, **CASE1)
        with pytest.raises(ParameterError):
            FsgsParams(alpha=1.2, **CASE1)
        with pytest.raises(ParameterError):
            FsgsParams(nu=-1.0, alpha=0.5)

    def test_tau_definition(self):
        p = FsgsParams(alpha=0.5, **CASE1)
        assert p.tau == pytest.approx(CASE1["nu"] / 502.0 ** 2, rel=1e-15)
        assert p.mu == pytest.approx(p.rho * p.nu, rel=1e-15)


class TestFsgsDivergence:
    def test_alpha_one_zero_field(self, grid16):
        v = random_vector(grid16, 53)
        out = fsgs_divergence(v, FsgsParams(alpha=1.0, **CASE1))
        assert np.max(np.abs(out.as_array())) == 0.0

    def test_constant_velocity_zero(self, grid8):
        v = VectorField.from_arrays(grid8, PHYSICAL,
                                    [np.full(grid8.shape, 2.0)] * 3)
        out = fsgs_divergence(v, FsgsParams(alpha=0.5, **CASE1))
        assert np.max(np.abs(out.as_array())) < 1e-9

    def test_single_mode_scaling(self, grid8):
        x, y, z = grid8.coordinates()
        params = FsgsParams(alpha=0.7, **CASE1)
        nu_mag = fsgs_coefficient(params).nu_magnitude
        v = VectorField.from_arrays(grid8, PHYSICAL,
                                    [np.sin(2 * y) + 0 * x + 0 * z,
                                     np.zeros(grid8.shape), np.zeros(grid8.shape)])
        out = fsgs_divergence(v, params)
        want = nu_mag * 2.0 ** 1.4 * (np.sin(2 * y) + 0 * x + 0 * z)
        assert rel_err(out.components[0].data, want) < 1e-12

    def test_galilean_invariance(self, grid16):
        v = random_vector(grid16, 59, solenoidal=True)
        params = FsgsParams(alpha=0.6, **CASE1)
        a = fsgs_divergence(v, params).as_array()
        b = fsgs_divergence(v.shift_uniform((0.9, -1.1, 0.4)), params).as_array()
        assert np.max(np.abs(a - b)) <= 1e-12 * max(np.max(np.abs(a)), 1e-30)


def brute_force_entropy_bound(vbar, params):
    """Pointwise oracle built on numpy's FFT, independent of the package ops."""
    n = vbar.grid.n
    k1 = np.fft.fftfreq(n) * n * vbar.grid.k0
    k1_deriv = k1.copy()
    k1_deriv[n // 2] = 0.0
    kx = [k1_deriv.reshape([-1 if a == ax else 1 for a in range(3)])
          for ax in range(3)]
    kmag = np.sqrt(sum((k1 ** 2).reshape([-1 if a == ax else 1 for a in range(3)])
                       for ax in range(3)))
    kmag_safe = kmag.copy()
    kmag_safe[0, 0, 0] = 1.0

    vh = [np.fft.fftn(c.data) for c in vbar.to_physical().components]
    num = np.zeros(vbar.grid.shape)
    den = np.zeros(vbar.grid.shape)
    half = kmag_safe ** (2 * params.alpha - 2.0)
    half[0, 0, 0] = 0.0
    for i in range(3):
        for j in range(3):
            g = np.fft.ifftn(1j * kx[j] * vh[i]).real
            t = np.fft.ifftn(-1j * kx[j] * half * vh[i]).real
            num += g * g
            den += t * g
    eps_den = 1e-12 * np.sqrt(np.mean(den ** 2))
    ratios = []
    for idx in np.ndindex(vbar.grid.shape):
        if abs(den[idx]) > eps_den:
            ratios.append(abs(num[idx] / den[idx]))
    mu_max = params.rho * params.nu * min(ratios)
    return mu_max


class TestEntropyBound:
    def test_constant_field_degenerate(self, grid8):
        v = VectorField.from_arrays(grid8, PHYSICAL,
                                    [np.full(grid8.shape, 1.0)] * 3)
        with pytest.raises(DegenerateFieldError):
            entropy_bound(v, FsgsParams(alpha=0.6, **CASE1))

    def test_alpha_one_always_satisfied(self, grid8):
        v = random_vector(grid8, 61, solenoidal=True)
        out = entropy_bound(v, FsgsParams(alpha=1.0, **CASE1))
        assert out.satisfied

    def test_matches_brute_force_oracle(self, grid8):
        v = random_vector(grid8, 67, solenoidal=True)
        params = FsgsParams(alpha=0.6, **CASE1)
        got = entropy_bound(v, params)
        want = brute_force_entropy_bound(v, params)
        assert got.mu_max == pytest.approx(want, rel=1e-12)
        assert got.satisfied == (fsgs_coefficient(params).mu_magnitude <= want)
