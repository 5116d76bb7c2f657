import math

import numpy as np
import pytest
from scipy.integrate import quad

from pulseg2 import modes as md


def make_asymmetric_sampled(h=0.01, span=10.0):
    """Two unequal Gaussian humps; nothing symmetric about it."""
    t = np.arange(-span, span + h / 2, h)
    v = np.exp(-((t - 1.0) ** 2) / (2 * 0.8**2)) \
        + 0.5 * np.exp(-((t + 1.5) ** 2) / (2 * 0.5**2))
    return md.sampled_mode(t, v.astype(complex), label="sampled:test")


class TestIntensityProfile:
    def test_gaussian_peak_value(self):
        mode = md.gaussian_mode(1.0)
        # oracle: normalize exp(-t^2/(2 dt^2))^2 by quadrature, evaluate at 0
        norm, _ = quad(lambda t: math.exp(-t * t), -50, 50)
        assert norm == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        assert md.intensity_profile(mode, 0.0) == pytest.approx(1.0 / norm, rel=1e-10)
        assert md.intensity_profile(mode, 0.0) == pytest.approx(0.5641895835477563, rel=1e-10)

    @pytest.mark.parametrize("mode", [
        md.gaussian_mode(1.0),
        md.gaussian_mode(2.5, center=3.0),
        md.hermite_gauss_mode(1, 1.0),
        md.hermite_gauss_mode(3, 0.7),
        make_asymmetric_sampled(),
    ], ids=lambda m: m.label)
    def test_unit_integral(self, mode):
        t, h = md._grid(mode)
        total = np.trapezoid(md.intensity_profile(mode, t), dx=h)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_odd_order_vanishes_at_center(self):
        assert md.intensity_profile(md.hermite_gauss_mode(1, 1.0), 0.0) == 0.0

    def test_zero_outside_sampled_grid(self):
        mode = make_asymmetric_sampled()
        assert md.intensity_profile(mode, 99.0) == 0.0
        assert md.amplitude(mode, -99.0) == 0.0

    def test_hermite_gauss_orthonormality(self):
        width = 1.3
        ms = [md.hermite_gauss_mode(j, width) for j in range(6)]
        for i, a in enumerate(ms):
            for j, b in enumerate(ms):
                val, _ = quad(lambda t, a=a, b=b: md.amplitude(a, t) * md.amplitude(b, t),
                              -30 * width, 30 * width, limit=200)
                assert val == pytest.approx(1.0 if i == j else 0.0, abs=1e-6)


class TestEta:
    @pytest.mark.parametrize("width", [1.0, 3.0e-9])
    def test_matches_gaussian_closed_form(self, width):
        mode = md.gaussian_mode(width)
        tau = np.linspace(-5 * width, 5 * width, 101)
        num = np.asarray(md.eta_numeric(mode, tau))
        ref = np.asarray(md.eta_gaussian(width, tau))
        assert np.max(np.abs(num - ref) / ref) < 1e-8

    def test_value_one_width_out(self):
        mode = md.gaussian_mode(2.0)
        assert md.eta_numeric(mode, 2.0) == pytest.approx(
            md.eta_numeric(mode, 0.0) * math.exp(-0.5), rel=1e-8)

    def test_closed_form_reference_points(self):
        assert md.eta_gaussian(1.0, 0.0) == pytest.approx(0.39894, abs=1e-5)
        assert md.eta_gaussian(2.0, 0.0) == pytest.approx(0.19947, abs=1e-5)
        assert md.eta_gaussian(1.0, 80.0) == 0.0

    def test_against_independent_quadrature(self):
        # oracle: scipy adaptive quadrature on the closed-form intensity of
        # an off-center hermite-gauss mode
        width, j, tau = 0.9, 2, 0.37

        def intensity(t):
            x = t / width
            h2 = 4 * x * x - 2.0
            norm = 2**j * math.factorial(j) * math.sqrt(math.pi) * width
            return (h2 * math.exp(-0.5 * x * x)) ** 2 / norm

        num, _ = quad(lambda t: intensity(t + tau) * intensity(t), -40, 40, limit=400)
        mode = md.hermite_gauss_mode(j, width)
        assert md.eta_numeric(mode, tau) == pytest.approx(num, rel=1e-7)

    @pytest.mark.parametrize("mode", [
        md.gaussian_mode(1.5),
        md.hermite_gauss_mode(2, 1.0),
    ], ids=lambda m: m.label)
    def test_symmetry_parametric(self, mode):
        eta0 = md.eta_numeric(mode, 0.0)
        for tau in (0.3, 1.1, 2.7):
            a = md.eta_numeric(mode, tau)
            b = md.eta_numeric(mode, -tau)
            assert abs(a - b) <= 1e-10 * eta0

    def test_symmetry_sampled(self):
        mode = make_asymmetric_sampled()
        eta0 = md.eta_numeric(mode, 0.0)
        for tau in (0.7, 1.9):
            assert abs(md.eta_numeric(mode, tau) - md.eta_numeric(mode, -tau)) \
                <= 1e-7 * eta0

    @pytest.mark.parametrize("mode", [
        md.gaussian_mode(1.0),
        md.hermite_gauss_mode(2, 1.0),
        make_asymmetric_sampled(),
    ], ids=lambda m: m.label)
    def test_unit_integral_and_peak_dominance(self, mode):
        profile = md.eta_profile(mode)
        assert profile.integral() == pytest.approx(1.0, abs=1e-6)
        eta0 = md.eta_numeric(mode, 0.0)
        assert np.all(profile.eta <= eta0 * (1 + 1e-12))

    def test_peak_scales_inversely_with_width(self):
        a = md.eta_numeric(md.gaussian_mode(1.0), 0.0)
        b = md.eta_numeric(md.gaussian_mode(2.0), 0.0)
        assert b == pytest.approx(a / 2.0, rel=1e-9)

    def test_bad_width_rejected(self):
        with pytest.raises(ValueError):
            md.eta_gaussian(0.0, 1.0)
        with pytest.raises(ValueError):
            md.eta_gaussian(-1.0, 1.0)


class TestAutocorrelationWidth:
    def test_gaussian_widths(self):
        assert md.autocorrelation_width(md.gaussian_mode(1.0)) == pytest.approx(1.0, abs=1e-6)
        assert md.autocorrelation_width(md.gaussian_mode(3.0)) == pytest.approx(3.0, abs=3e-6)

    def test_sampled_copy_of_gaussian(self):
        h = 0.01
        t = np.arange(-8, 8 + h / 2, h)
        v = np.exp(-t**2 / 2.0).astype(complex)
        mode = md.sampled_mode(t, v)
        assert md.autocorrelation_width(mode) == pytest.approx(1.0, abs=1e-3)


class TestSampledValidation:
    def test_nonuniform_grid_rejected(self):
        t = np.array([0.0, 0.1, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])
        with pytest.raises(ValueError, match="uniform"):
            md.sampled_mode(t, np.ones(9, complex))

    def test_too_coarse_rejected(self):
        t = np.linspace(-4, 4, 17)  # spacing 0.5 vs rms ~0.7
        v = np.exp(-t**2 / 2).astype(complex)
        with pytest.raises(ValueError, match="coarse"):
            md.sampled_mode(t, v)

    def test_zero_energy_rejected(self):
        t = np.linspace(-1, 1, 51)
        with pytest.raises(ValueError):
            md.sampled_mode(t, np.zeros(51, complex))


class TestSpecGrammar:
    def test_gauss(self):
        mode = md.parse_mode_spec("gauss:2e-9")
        assert mode.kind == "gaussian" and mode.width == 2e-9 and mode.center == 0.0

    def test_gauss_with_center(self):
        mode = md.parse_mode_spec("gauss:1e-9@5e-9")
        assert mode.center == 5e-9

    def test_hg(self):
        mode = md.parse_mode_spec("hg:2:1e-9")
        assert mode.kind == "hermite_gauss" and mode.order == 2

    def test_sampled_csv(self, tmp_path):
        h = 0.01
        t = np.arange(-8, 8 + h / 2, h)
        v = np.exp(-t**2 / 2.0)
        path = tmp_path / "mode.csv"
        rows = np.column_stack([t, v, np.zeros_like(t)])
        path.write_text("t,re,im\n" + "\n".join(",".join(f"{x:.9g}" for x in r) for r in rows))
        mode = md.parse_mode_spec(f"sampled:{path}")
        assert mode.kind == "sampled"
        assert md.eta_numeric(mode, 0.0) == pytest.approx(md.eta_gaussian(1.0, 0.0), rel=1e-4)

    @pytest.mark.parametrize("bad", ["gauss", "gauss:-1", "hg:1", "box:1", "hg:a:1"])
    def test_bad_specs_rejected(self, bad):
        with pytest.raises(ValueError):
            md.parse_mode_spec(bad)


def test_eta_profile_csv_export(tmp_path):
    profile = md.eta_profile(md.gaussian_mode(1.0), max_tau=4.0, num=101)
    path = tmp_path / "eta.csv"
    profile.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "tau_seconds,eta_per_second"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (101, 2)
