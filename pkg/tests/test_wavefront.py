import warnings

import numpy as np
import pytest

from shearscope.generators import make_dog_generator
from shearscope.grid import centered_field
from shearscope.radon import LineSingularity, make_line_singularity
from shearscope.wavefront import (
    ALPHA_GRID,
    AT_FLOOR,
    ExpectedExponentBudget,
    decay_slope,
    expected_direct_exponent,
    expected_inverse_budget,
    export_min_slope_pgm,
    export_wavefront_csv,
    fit_decay_slopes,
    wavefront_map,
)
from shearscope.xform import CoeffVolume, FieldMeta, default_a_grid, shearlet_transform

INF = float("inf")


def synthetic_volume(k=1.5, amp=2.0, n=8, n_s=3, n_a=12):
    a_grid = np.geomspace(1 / 64, 1 / 4, n_a)
    s_grid = np.linspace(-0.5, 0.5, n_s)
    coeffs = amp * a_grid[:, None, None, None] ** k * np.ones((n_a, n_s, n, n))
    meta = FieldMeta(n, n, 0.25, (-1.0, -1.0))
    return CoeffVolume(coeffs.astype(complex), a_grid, s_grid, meta)


class TestSlopeFits:
    def test_exact_power_law(self):
        vol = synthetic_volume(k=1.5)
        k, r2 = decay_slope(vol, (3, 4), 1)
        assert abs(k - 1.5) <= 1e-12
        assert r2 >= 1.0 - 1e-12

    def test_fit_map_matches_single_fits(self):
        rng = np.random.default_rng(0)
        vol = synthetic_volume(k=0.75)
        noisy = vol.coeffs * np.exp(0.05 * rng.normal(size=vol.coeffs.shape))
        vol2 = CoeffVolume(noisy, vol.a_grid, vol.s_grid, vol.field_meta)
        rep = fit_decay_slopes(vol2)
        k, r2 = decay_slope(vol2, (2, 5), 0)
        assert abs(rep.slope_map[0, 2, 5] - k) <= 1e-12
        assert abs(rep.r2_map[0, 2, 5] - r2) <= 1e-12

    def test_at_floor(self):
        vol = synthetic_volume(amp=1e-30)
        k, r2 = decay_slope(vol, (0, 0), 0, floor=1e-12)
        assert k == AT_FLOOR
        assert np.isnan(r2)

    def test_short_range_rejected(self):
        vol = synthetic_volume()
        with pytest.raises(ValueError):
            decay_slope(vol, (0, 0), 0, fit_range=(1 / 64, 1 / 50))

    def test_negative_exponent(self):
        vol = synthetic_volume(k=-0.25)
        rep = fit_decay_slopes(vol)
        assert np.abs(rep.slope_map + 0.25).max() <= 1e-12


class TestDecayOracles:
    def test_smooth_point_rapid_decay(self):
        # analytic bump: measured exponent exceeds the moment-limited budget
        n, h = 128, 1 / 16
        x = (np.arange(n) - n // 2) * h
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        f = centered_field(np.exp(-np.pi * (X1 ** 2 + X2 ** 2)), h)
        spec = make_dog_generator(2)
        a_grid = default_a_grid(h, gamma=0.25, a_min=1 / 64, per_octave=16)
        vol = shearlet_transform(f, spec, a_grid, np.array([-0.5, 0.0, 0.5]))
        for node in ((n // 2, n // 2), (n // 2 + 4, n // 2 - 2)):
            for j in range(3):
                k, _ = decay_slope(vol, node, j)
                assert k == AT_FLOOR or k >= 1.8

    def test_line_signature_slopes(self):
        # closed form of the ridge coefficient: a^(11/4) (a^2 + W^2)^(-3/2)
        # at the aligned shear; -1/4 emerges once a clears the raster width
        n, h = 256, 1 / 64
        W = 2 * h
        spec = make_dog_generator(2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = make_line_singularity(LineSingularity(0.0, 0.0, W), n, h)
            i0 = n // 2
            a_on = default_a_grid(h, gamma=1.0, a_min=8 * W, per_octave=8)
            von = shearlet_transform(f, spec, a_on, np.array([0.0]))
            k_on, r2 = decay_slope(von, (i0, i0), 0)
            assert abs(k_on + 0.25) <= 0.1
            assert r2 >= 0.99
            a_off = default_a_grid(h, gamma=1 / 64, a_min=4 * W * W, per_octave=8)
            s_off = np.array([-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0])
            voff = shearlet_transform(f, spec, a_off, s_off)
            for j, s in enumerate(s_off):
                if abs(s) >= 0.25:
                    k, _ = decay_slope(voff, (i0, i0), j)
                    assert k >= 1.0, (s, k)
            a_mid = default_a_grid(h, gamma=0.25, a_min=1 / 16, per_octave=24)
            vmid = shearlet_transform(f, spec, a_mid, np.array([0.0]))
            floor = 1e-6 * float(np.abs(vmid.coeffs).max())
            for d in (8, 12, 16, 24, 32):
                k, _ = decay_slope(vmid, (i0 + d, i0), 0, floor=floor)
                assert k == AT_FLOOR or k >= 2.0, (d, k)


class TestBudgets:
    def test_direct_all_infinite(self):
        assert expected_direct_exponent(ExpectedExponentBudget()) == INF

    def test_direct_moment_limited(self):
        b = ExpectedExponentBudget(alpha=0.75, M=2.0)
        assert abs(expected_direct_exponent(b) - 0.5) <= 1e-12

    def test_direct_no_regularity(self):
        b = ExpectedExponentBudget(N=0.0)
        assert abs(expected_direct_exponent(b) + 0.75) <= 1e-12

    def test_inverse_schwartz_reduces_to_threshold_rule(self):
        b = ExpectedExponentBudget(K=6.0)
        assert abs(expected_inverse_budget(b) - (6.0 - 11.0 / 4.0)) <= 1e-12

    def test_inverse_low_decay_certifies_nothing(self):
        assert expected_inverse_budget(ExpectedExponentBudget(K=11.0 / 4.0)) <= 0.0
        assert expected_inverse_budget(ExpectedExponentBudget(K=2.0)) <= 0.0

    def test_inverse_against_exhaustive_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            budget = ExpectedExponentBudget(
                M=float(rng.uniform(2, 8)),
                L=float(rng.uniform(4, 40)),
                L1=float(rng.uniform(2, 30)),
                L2=float(rng.uniform(4, 20)),
                K=float(rng.uniform(3, 12)),
            )
            got = expected_inverse_budget(budget)
            n_grid = np.arange(-2.0, budget.K, 1 / 128.0)
            best = -np.inf
            for alpha in ALPHA_GRID:
                rhs = np.minimum.reduce([
                    np.full_like(n_grid, budget.K - 0.75),
                    (1 - alpha) * (budget.M + n_grid) - 0.75,
                    np.full_like(n_grid, (alpha - 0.5) * budget.L - 0.75),
                    np.full_like(n_grid, 2 * (budget.L2 - budget.M + 1)),
                    np.full_like(n_grid, 2 * (budget.L1 + 1)),
                ])
                ok = n_grid + 2 < rhs
                if ok.any():
                    best = max(best, n_grid[ok].max())
            assert abs(got - best) <= 1 / 64.0, (budget, got, best)

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            ExpectedExponentBudget(alpha=0.5)


class TestMap:
    def make_line_map(self, s0=0.0):
        n, h = 128, 1 / 128
        W = 8 * h
        spec = make_dog_generator(6)
        a_lo, a_hi = 1.5 * W, 1.75 * W
        octs = np.log2(a_hi / a_lo)
        npts = max(6, int(np.ceil(octs * 48)) + 1)
        a_grid = a_hi * 2.0 ** np.linspace(-octs, 0, npts)
        s_grid = 0.25 * np.arange(-4, 5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = make_line_singularity(LineSingularity(s0, 0.0, W), n, h)
            wf = wavefront_map(f, spec, a_grid, s_grid, 2.0,
                               floor=None, require_full_column=True)
        return f, wf

    def test_grid_coverage_required(self):
        f = centered_field(np.zeros((16, 16)), 0.25)
        with pytest.raises(ValueError):
            wavefront_map(f, make_dog_generator(2), np.geomspace(0.01, 0.25, 8),
                          np.array([-0.5, 0.0, 0.5]))
        with pytest.raises(ValueError):
            wavefront_map(f, make_dog_generator(2), np.geomspace(0.01, 0.25, 8),
                          np.array([-1.0, 0.0, 1.0]), threshold_k=0.0)

    def test_translation_covariance(self):
        f, wf = self.make_line_map()
        n = f.n1
        shift = (0, 8)  # along the line: the map must be invariant
        from shearscope.grid import SampledField2D

        g = SampledField2D(np.roll(f.values, shift, axis=(0, 1)), f.spacing, f.origin)
        W = 8 * f.spacing
        a_lo, a_hi = 1.5 * W, 1.75 * W
        octs = np.log2(a_hi / a_lo)
        npts = max(6, int(np.ceil(octs * 48)) + 1)
        a_grid = a_hi * 2.0 ** np.linspace(-octs, 0, npts)
        s_grid = 0.25 * np.arange(-4, 5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            wg = wavefront_map(g, make_dog_generator(6), a_grid, s_grid, 2.0,
                               require_full_column=True)
        assert np.array_equal(np.roll(wf.d1_mask, shift, axis=(1, 2)), wg.d1_mask)

    def test_chart_consistency_near_unit_slope(self):
        # the two direction charts agree at the same geometric direction
        n, h = 256, 1 / 64
        W = 2 * h
        s0 = 7 / 8
        spec = make_dog_generator(2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = make_line_singularity(
                LineSingularity(s0, 0.0, W, cutoff_center=(0.0, 0.0), cutoff_radius=1.6), n, h
            )
            a_grid = default_a_grid(h, gamma=1.0, a_min=8 * W, per_octave=8)
            v1 = shearlet_transform(f, spec, a_grid, np.array([-s0, 0.0, s0]))
            from shearscope.xform import dual_cone_transform

            p0 = 1.0 / s0
            v2 = dual_cone_transform(f, spec, a_grid, np.array([-p0, 0.0, p0]))
        i0 = n // 2
        k1, _ = decay_slope(v1, (i0, i0), 2)
        k2, _ = decay_slope(v2, (i0, i0), 2)
        assert abs(k1 - k2) <= 0.3


class TestExports:
    def test_csv_and_pgm(self, tmp_path):
        n, h = 16, 1 / 4
        rng = np.random.default_rng(5)
        f = centered_field(rng.normal(size=(n, n)), h)
        a_grid = np.geomspace(1 / 8, 1.0, 8)
        s_grid = np.array([-1.0, 0.0, 1.0])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            wf = wavefront_map(f, make_dog_generator(2), a_grid, s_grid, 2.0)
        csv_path = tmp_path / "map.csv"
        pgm_path = tmp_path / "map.pgm"
        export_wavefront_csv(wf, csv_path)
        export_min_slope_pgm(wf, pgm_path)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "t1,t2,s,slope,r2,in_D"
        # d1 covers all three shears, d2 only the interior reciprocal slope
        assert len(lines) - 1 == (3 + 1) * n * n
        raw = pgm_path.read_bytes()
        assert raw.startswith(b"P5\n16 16\n255\n")
        assert len(raw) == len(b"P5\n16 16\n255\n") + n * n
        export_wavefront_csv(wf, tmp_path / "map2.csv")
        assert (tmp_path / "map2.csv").read_bytes() == csv_path.read_bytes()
