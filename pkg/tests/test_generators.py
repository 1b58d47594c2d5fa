import numpy as np
import pytest

from shearscope.generators import (
    DecayOrders,
    ShearletSpec,
    ShearParams,
    angular_bump,
    dog_spatial,
    generator_from_label,
    make_classical_cone_generator,
    make_dog_generator,
    make_gaussian_nonadmissible,
    make_nu,
    make_tensor_generator,
    meyer_scale_bump,
    psi_ast_hat,
    sample_psi_ast,
)
from shearscope.grid import centered_field, dft_forward


class TestDog:
    def test_closed_form_value(self):
        dog1 = make_dog_generator(1)
        expected = -2j * np.pi * 0.5 * np.exp(-np.pi / 4)
        assert abs(dog1(0.5, 0.0) - expected) <= 1e-14

    def test_against_finite_difference_oracle(self):
        # differentiate the sampled Gaussian in x1 with an 8th-order stencil,
        # transform, and compare against the closed form
        n, h = 256, 1 / 32
        x = (np.arange(n) - n // 2) * h
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        theta = np.exp(-np.pi * (X1 ** 2 + X2 ** 2))
        c = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
        d1 = sum(ci * np.roll(theta, 4 - k, axis=0) for k, ci in enumerate(c)) / h
        psi = -d1  # (-1)^1 d/dx1 theta
        F = dft_forward(centered_field(psi, h))
        XI1, XI2 = F.meshgrid()
        closed = make_dog_generator(1)(XI1, XI2)
        assert np.abs(F.values - closed).max() <= 1e-8

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_vanishes_on_moment_axis(self, n):
        dog = make_dog_generator(n)
        xi2 = np.linspace(-4, 4, 33)
        assert np.abs(dog(np.zeros_like(xi2), xi2)).max() == 0.0

    def test_spatial_profile_on_line(self):
        # second derivative of the Gaussian evaluated on x1 = 0
        n, h = 128, 1 / 16
        dog2 = make_dog_generator(2)
        field = sample_psi_ast(dog2, ShearParams(1.0, 0.0), n, h)
        x2 = (np.arange(n) - n // 2) * h
        expected = -2 * np.pi * np.exp(-np.pi * x2 ** 2)
        row = field.values[n // 2, :]
        assert np.abs(row - expected).max() <= 1e-10

    def test_spatial_closed_form_matches_inverse_dft(self):
        n, h = 128, 1 / 16
        for order in (1, 2, 5):
            spec = make_dog_generator(order)
            field = sample_psi_ast(spec, ShearParams(1.0, 0.0), n, h)
            X1, X2 = field.meshgrid()
            direct = dog_spatial(order, X1, X2)
            assert np.abs(field.values - direct).max() <= 1e-9 * np.abs(direct).max() + 1e-12

    def test_rejects_gaussian_order(self):
        with pytest.raises(ValueError):
            make_dog_generator(0)


class TestClassical:
    def test_support_probes(self):
        cl = make_classical_cone_generator()
        assert cl(0.25, 0.0) == 0.0          # inside the excluded low band
        assert cl(1.0, 1.5) == 0.0           # angular factor support ends at ratio 1
        assert cl(1.0, 0.0).real > 0.0       # interior positivity

    def test_meyer_bump_continuity(self):
        eps = 1e-9
        for edge in (0.5, 1.0, 2.0):
            lo = meyer_scale_bump(edge - eps)
            hi = meyer_scale_bump(edge + eps)
            assert abs(lo - hi) <= 1e-6

    def test_meyer_dyadic_partition(self):
        b = np.linspace(0.5, 1.0, 101)
        s = meyer_scale_bump(b) ** 2 + meyer_scale_bump(2 * b) ** 2
        assert np.abs(s - 1.0).max() <= 1e-12

    def test_angular_norm(self):
        eta = np.linspace(-1, 1, 400001)
        val = np.trapezoid(angular_bump(eta) ** 2, eta)
        assert abs(val - 1.0) <= 1e-6


class TestNu:
    def test_involution(self):
        rng = np.random.default_rng(0)
        spec = make_dog_generator(2)
        twice = make_nu(make_nu(spec))
        xi1 = rng.normal(size=50)
        xi2 = rng.normal(size=50)
        assert np.allclose(twice(xi1, xi2), spec(xi1, xi2), rtol=0, atol=0)

    def test_dog_closed_form(self):
        nu1 = make_nu(make_dog_generator(1))
        xi1, xi2 = 0.3, -0.7
        expected = -2j * np.pi * xi2 * np.exp(-np.pi * (xi1 ** 2 + xi2 ** 2))
        assert abs(nu1(xi1, xi2) - expected) <= 1e-14

    def test_classical_support_swap(self):
        nu = make_nu(make_classical_cone_generator())
        # swapped support: radial factor now lives on the second coordinate
        assert nu(1.0, 0.0) == 0.0
        assert nu(1.5, 1.0) == 0.0
        assert nu(0.0, 1.0).real > 0.0


class TestPsiAst:
    def test_identity_element(self):
        spec = make_dog_generator(1)
        rng = np.random.default_rng(1)
        xi1 = rng.normal(size=20)
        xi2 = rng.normal(size=20)
        vals = psi_ast_hat(spec, ShearParams(1.0, 0.0), xi1, xi2)
        assert np.allclose(vals, spec(xi1, xi2), atol=1e-14)

    def test_scale_probe(self):
        spec = make_dog_generator(1)
        got = psi_ast_hat(spec, ShearParams(0.25, 0.0), 2.0, 0.0)
        expected = 0.25 ** 0.75 * spec(0.5, 0.0)
        assert abs(got - expected) <= 1e-14

    def test_translation_phase(self):
        spec = make_dog_generator(2)
        t = (0.3, -0.2)
        xi1, xi2 = 1.5, -0.5
        got = psi_ast_hat(spec, ShearParams(0.5, 1.0, t), xi1, xi2)
        base = psi_ast_hat(spec, ShearParams(0.5, 1.0), xi1, xi2)
        phase = np.exp(-2j * np.pi * (t[0] * xi1 + t[1] * xi2))
        assert abs(got - base * phase) <= 1e-14

    def test_spatial_vs_frequency_forms(self):
        # sampled spatial dilation/shear/translation of the closed spatial
        # form against the inverse DFT of the frequency form, 20 random cases
        rng = np.random.default_rng(7)
        order = 2
        spec = make_dog_generator(order)
        for _ in range(20):
            a = float(np.exp(rng.uniform(np.log(1 / 64), 0.0)))
            s = float(rng.uniform(-2, 2))
            # the sheared element reaches |xi1| ~ 4/a and |xi2| ~ 4|s|/a + 5/sqrt(a)
            h = a / (8 * abs(s) + 10 * np.sqrt(a) + 8)
            extent = 6 * np.sqrt(a) + 6 * a * (1 + abs(s)) + 0.5
            n = int(2 ** np.ceil(np.log2(extent / h)))
            n = min(max(n, 64), 4096)
            t = (float(rng.integers(-2, 3)) * h, float(rng.integers(-2, 3)) * h)
            params = ShearParams(a, s, t)
            field = sample_psi_ast(spec, params, n, h)
            X1, X2 = field.meshgrid()
            u1 = (X1 - t[0] + s * (X2 - t[1])) / a
            u2 = (X2 - t[1]) / np.sqrt(a)
            direct = a ** -0.75 * dog_spatial(order, u1, u2)
            err = np.abs(field.values - direct).max() / np.abs(direct).max()
            assert err <= 1e-6, (a, s, t, n, err)


class TestLabels:
    def test_round_trip(self):
        assert generator_from_label("dog:3").label == "dog:3"
        assert generator_from_label("classical").label == "classical"
        assert generator_from_label("tensor:2").label == "tensor:2"

    def test_tensor_matches_dog_modulus(self):
        # the separable tensor family shares the dog modulus (the Gaussian
        # factorizes); kept as a distinct labeled surface
        t = make_tensor_generator(2)
        d = make_dog_generator(2)
        rng = np.random.default_rng(5)
        xi1 = rng.normal(size=20)
        xi2 = rng.normal(size=20)
        assert np.allclose(np.abs(t(xi1, xi2)), np.abs(d(xi1, xi2)))

    def test_bad_labels(self):
        for label in ("dog", "dog:x", "wavelet:2", "dog:0"):
            with pytest.raises(ValueError):
                generator_from_label(label)


class TestValidation:
    def test_shear_params(self):
        with pytest.raises(ValueError):
            ShearParams(0.0, 0.0)
        with pytest.raises(ValueError):
            ShearParams(1.0, np.inf)

    def test_moment_axis_check(self):
        gauss = make_gaussian_nonadmissible()
        with pytest.raises(ValueError):
            ShearletSpec(gauss.psi_hat, 1, DecayOrders(), "bad")
