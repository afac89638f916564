import math

import numpy as np
import pandas as pd
import pytest

from nonlocal_dephasing import AliasingWarning, CsvFormatError
from nonlocal_dephasing.spectra import (
    AmplitudeGrid, DecoherenceSet, GaussianJointSpectrum, UnitConversion, apply_pump_dispersion,
    calibrate_phasematch_width, decoherence_arrays, decoherence_set, gaussian_characteristic, gaussian_grid,
    numeric_characteristic, pump_to_spectrum,
)
from nonlocal_dephasing.analysis.nonmarkovianity import blp_measure
from nonlocal_dephasing.channel import PureTwoQubitState, is_factorized, unitary_grid_evolution
from nonlocal_dephasing.schedule import PlateSchedule, trajectory
from nonlocal_dephasing.synthlab import PUMP_DISPERSION

ARM = 199.0


@pytest.fixture(scope="module")
def matched():
    spec = GaussianJointSpectrum(b=1.0 / ARM ** 2, k=-0.6, m1=0.01, m2=-0.02)
    return spec, gaussian_grid(spec)


@pytest.fixture(scope="module")
def plate_grids():
    """Grids of the pump plates, no plate first, then two stronger phases"""
    grids = PUMP_DISPERSION.grids(points=128)
    assert np.array_equal(grids[0].g, gaussian_grid(PUMP_DISPERSION.panel.spectrum(), points=128).g)
    return grids + [apply_pump_dispersion(grids[0], i) for i in (1e4, 3e4)]


class TestGaussianCharacteristic:

    @pytest.mark.parametrize("spec", (
            GaussianJointSpectrum(b=0.3, k=0.5),
            GaussianJointSpectrum(b=0.0, k=-1.0),
            GaussianJointSpectrum(b=2.0, k=1.0, m1=1.0, m2=3.0),
    ))
    def test_origin(self, spec):
        assert gaussian_characteristic(spec, 0.0, 0.0) == 1 + 0j

    def test_single_arm(self):
        spec = GaussianJointSpectrum(b=1.0 / ARM ** 2, k=0.0)
        assert gaussian_characteristic(spec, ARM, 0.0) == pytest.approx(math.exp(-1.0), abs=1e-12)

    @pytest.mark.parametrize("s", (0.0, 1.0, 50.0, 199.0))
    def test_perfect_anticorrelation(self, s):
        spec = GaussianJointSpectrum(b=3e-4, k=-1.0)
        assert abs(gaussian_characteristic(spec, s, s) - 1.0) < 1e-12

    def test_means_enter_as_phase(self):
        spec = GaussianJointSpectrum(b=1e-4, k=0.2, m1=0.3, m2=-0.1)
        value = gaussian_characteristic(spec, 10.0, 20.0)
        assert abs(value) == pytest.approx(math.exp(-1e-4 * (100 + 400 + 2 * 0.2 * 200)), rel=1e-12)
        assert np.angle(value) == pytest.approx(-(3.0 - 2.0), abs=1e-12)

    def test_arrays(self):
        spec = GaussianJointSpectrum(b=1e-4, k=-0.5)
        x = np.linspace(0.0, ARM, 7)
        values = gaussian_characteristic(spec, x, x[::-1])
        assert values.shape == (7, )
        assert np.all(np.abs(values) <= 1.0)

    @pytest.mark.parametrize("kwargs", (dict(b=-1.0), dict(b=1.0, k=1.5), dict(b=1.0, k=-1.01)))
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GaussianJointSpectrum(**kwargs)


class TestNumericCharacteristic:

    def test_normalization(self, matched):
        _, grid = matched
        assert abs(grid.total_probability() - 1.0) < 1e-10
        assert abs(numeric_characteristic(grid, 0.0, 0.0) - 1.0) < 1e-10

    def test_matches_closed_form(self, matched):
        spec, grid = matched
        rng = np.random.default_rng(7)
        x1, x2 = rng.uniform(0.0, 2 * ARM, (2, 100))
        np.testing.assert_allclose(numeric_characteristic(grid, x1, x2), gaussian_characteristic(spec, x1, x2),
                                   rtol=0.0, atol=1e-6)

    def test_hermitian_symmetry(self, matched):
        _, grid = matched
        x1 = np.array([3.0, 57.0, 199.0, 398.0])
        x2 = np.array([0.0, 140.0, 12.0, 398.0])
        np.testing.assert_allclose(numeric_characteristic(grid, -x1, -x2),
                                   np.conj(numeric_characteristic(grid, x1, x2)), rtol=0.0, atol=1e-12)

    def test_modulus_bound(self, matched):
        _, grid = matched
        x = np.linspace(0.0, 2 * ARM, 41)
        assert np.all(np.abs(numeric_characteristic(grid, *np.meshgrid(x, -x))) <= 1.0 + 1e-9)

    def test_aliasing_warning(self):
        grid = gaussian_grid(GaussianJointSpectrum(b=0.5, k=0.0), points=16)
        with pytest.warns(AliasingWarning):
            numeric_characteristic(grid, 10.0, 0.0)


class TestPumpDispersion:

    def test_zero_beta(self, matched):
        _, grid = matched
        np.testing.assert_array_equal(apply_pump_dispersion(grid, 0.0).g, grid.g)

    @pytest.mark.parametrize("beta", (1.0, -250.0, 3e4))
    def test_probability_unchanged(self, matched, beta):
        _, grid = matched
        dispersed = apply_pump_dispersion(grid, beta)
        assert not np.allclose(dispersed.g, grid.g)
        np.testing.assert_allclose(dispersed.probability, grid.probability, rtol=1e-13, atol=0.0)

    @pytest.mark.parametrize("x", ((199.0, 0.0), (120.0, 80.0), (199.0, 199.0)))
    def test_decoherence_unchanged(self, matched, x):
        _, grid = matched
        plain = decoherence_set(grid, *x)
        dispersed = decoherence_set(apply_pump_dispersion(grid, 3e4), *x)
        for name in ("k1", "k2", "k12", "l12"):
            assert abs(getattr(plain, name) - getattr(dispersed, name)) < 1e-12

    @pytest.mark.parametrize("offset", (0.0, 100.0, 199.0))
    def test_non_markovianity_unchanged(self, plate_grids, offset):
        measures = [blp_measure(trajectory(i, PlateSchedule(offset), 2.0)) for i in plate_grids]
        np.testing.assert_allclose(measures, measures[0], rtol=0.0, atol=1e-9)

    def test_reported_plates(self, plate_grids):
        measures = [blp_measure(trajectory(i, PlateSchedule(), 2.0)) for i in plate_grids[:3]]
        np.testing.assert_allclose(measures, PUMP_DISPERSION.n, rtol=0.0, atol=0.03)

    @pytest.mark.parametrize("x", ((199.0, 0.0), (150.0, 120.0), (199.0, 199.0)))
    def test_unitary_evolution_unchanged(self, plate_grids, x):
        psi = PureTwoQubitState.haar_random(np.random.default_rng(13))
        plain = unitary_grid_evolution(psi, plate_grids[0], *x)
        for grid in plate_grids[1:]:
            np.testing.assert_allclose(unitary_grid_evolution(psi, grid, *x).matrix, plain.matrix,
                                       rtol=0.0, atol=1e-12)


class TestDecoherenceSet:

    def test_origin(self):
        dec = decoherence_set(GaussianJointSpectrum(b=0.01, k=-0.3, m1=0.2), 0.0, 0.0)
        assert dec == DecoherenceSet.identity()

    def test_single_arm_collapse(self):
        dec = decoherence_set(GaussianJointSpectrum(b=1e-4, k=-0.8, m1=0.05), 120.0, 0.0)
        assert dec.k2 == 1 + 0j
        assert dec.k12 == pytest.approx(dec.k1, abs=1e-15)
        assert dec.l12 == pytest.approx(dec.k1, abs=1e-15)

    def test_factorization_without_correlation(self):
        dec = decoherence_set(GaussianJointSpectrum(b=2e-5, k=0.0, m1=0.04, m2=-0.07), 150.0, 90.0)
        assert abs(dec.k12 - dec.k1 * dec.k2) < 1e-12
        assert abs(dec.l12 - dec.k1 * dec.k2.conjugate()) < 1e-12
        assert is_factorized(dec, 1e-12)

    def test_correlation_breaks_factorization(self):
        dec = decoherence_set(GaussianJointSpectrum(b=2e-5, k=-0.9), 150.0, 90.0)
        assert not is_factorized(dec, 1e-6)

    def test_arrays_match_scalars(self):
        spec = GaussianJointSpectrum(b=2e-5, k=-0.4, m2=0.01)
        x1 = np.array([0.0, 50.0, 199.0])
        x2 = np.array([0.0, 25.0, 199.0])
        values = decoherence_arrays(spec, x1, x2)
        for idx in range(3):
            dec = decoherence_set(spec, x1[idx], x2[idx])
            for name, array in values.items():
                assert array[idx] == pytest.approx(getattr(dec, name), abs=1e-15)

    def test_modulus_bound(self):
        with pytest.raises(ValueError, match="Expect modulus at most"):
            DecoherenceSet(1.1 + 0j, 1 + 0j, 1 + 0j, 1 + 0j)


class TestAmplitudeGrid:

    def test_csv_round_trip(self, tmp_path):
        grid = apply_pump_dispersion(gaussian_grid(GaussianJointSpectrum(b=1e-3, k=-0.5), points=16), 2.0)
        path = tmp_path / "grid.csv"
        grid.to_csv(path)
        assert list(pd.read_csv(path).columns) == ["omega1", "omega2", "re_g", "im_g"]
        loaded = AmplitudeGrid.from_csv(path)
        np.testing.assert_allclose(loaded.axis1, grid.axis1, rtol=1e-15)
        np.testing.assert_allclose(loaded.g, grid.g, rtol=1e-12)

    def test_csv_missing_point(self, tmp_path):
        grid = gaussian_grid(GaussianJointSpectrum(b=1e-3, k=0.0), points=16)
        path = tmp_path / "grid.csv"
        grid.to_csv(path)
        frame = pd.read_csv(path)
        frame.iloc[1:].to_csv(path, index=False)
        with pytest.raises(CsvFormatError, match="expect 256 rows for a 16x16 grid, got 255"):
            AmplitudeGrid.from_csv(path)

    def test_csv_bad_cell(self, tmp_path):
        path = tmp_path / "grid.csv"
        path.write_text("omega1,omega2,re_g,im_g\n0,0,1,0\n0,1,x,0\n", encoding="utf-8")
        with pytest.raises(CsvFormatError, match="row 3: column re_g is not a number") as exc_info:
            AmplitudeGrid.from_csv(path)
        assert exc_info.value.row == 3

    def test_csv_missing_column(self, tmp_path):
        path = tmp_path / "grid.csv"
        path.write_text("omega1,omega2,re_g\n0,0,1\n", encoding="utf-8")
        with pytest.raises(CsvFormatError, match="missing column"):
            AmplitudeGrid.from_csv(path)

    def test_not_normalized(self):
        axis = np.arange(16.0)
        with pytest.raises(ValueError, match="Expect normalized amplitude"):
            AmplitudeGrid.from_amplitude(axis, axis, np.ones((16, 16)), normalize=False)

    def test_too_coarse(self):
        with pytest.raises(ValueError, match="Expect min length 16"):
            AmplitudeGrid.from_amplitude(np.arange(8.0), np.arange(16.0), np.ones((8, 16)))

    def test_not_uniform(self):
        axis = np.arange(16.0)
        axis[-1] = 20.0
        with pytest.raises(ValueError, match="Expect uniformly spaced axis1"):
            AmplitudeGrid.from_amplitude(axis, np.arange(16.0), np.ones((16, 16)))

    def test_vanishing(self):
        axis = np.arange(16.0)
        with pytest.raises(ValueError, match="vanishing"):
            AmplitudeGrid.from_amplitude(axis, axis, np.zeros((16, 16)))

    @pytest.mark.parametrize("kwargs", (dict(b=0.0), dict(b=1e-3, k=-1.0), dict(b=1e-3, points=8)))
    def test_gaussian_grid_rejects(self, kwargs):
        points = kwargs.pop("points", 64)
        with pytest.raises(ValueError):
            gaussian_grid(GaussianJointSpectrum(**kwargs), points=points)


class TestUnits:

    @pytest.mark.parametrize("value", (0.0, 1e-6, 3.3e-3, 2.5))
    def test_round_trips(self, value):
        units = UnitConversion()
        assert units.x_to_thickness(units.thickness_to_x(value)) == pytest.approx(value, rel=1e-12, abs=0.0)
        assert units.x_to_time(units.time_to_x(value)) == pytest.approx(value, rel=1e-12, abs=0.0)
        assert units.grid_to_omega(units.omega_to_grid(value)) == pytest.approx(value, rel=1e-12, abs=0.0)
        assert units.variance_from_decay(units.decay_from_variance(value)) == pytest.approx(value, rel=1e-12, abs=0.0)
        assert units.omega_to_width(units.width_to_omega(value, 780.0), 780.0) == pytest.approx(
            value, rel=1e-12, abs=0.0)

    def test_one_wavelength(self):
        units = UnitConversion(lambda0=780.0, delta_n=0.01)
        assert units.thickness_to_x(78e-6) == pytest.approx(1.0, rel=1e-12)

    def test_pump_plate_phase(self):
        units = UnitConversion()
        assert units.pump_dispersion_beta(0.0) == 0.0
        assert units.pump_dispersion_beta(39.57e-3) == pytest.approx(292.3, rel=1e-3)
        assert units.pump_dispersion_beta(2e-3) == pytest.approx(2 * units.pump_dispersion_beta(1e-3), rel=1e-12)

    @pytest.mark.parametrize("kwargs", (dict(lambda0=0.0), dict(delta_n=-0.1)))
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            UnitConversion(**kwargs)


class TestPumpModel:

    def test_symmetric_widths(self):
        width = calibrate_phasematch_width(0.18, 0.0)
        assert pump_to_spectrum(0.18, width).k == pytest.approx(0.0, abs=1e-12)

    def test_narrow_pump(self):
        assert pump_to_spectrum(1e-7, 1.0).k == pytest.approx(-1.0, abs=1e-9)

    def test_calibrated_width(self):
        width = calibrate_phasematch_width(0.18, -0.92)
        assert pump_to_spectrum(0.18, width).k == pytest.approx(-0.92, abs=1e-12)
        assert abs(pump_to_spectrum(1.89, width).k) < 0.55

    def test_monotonic(self):
        width = calibrate_phasematch_width(0.18, -0.92)
        ks = [pump_to_spectrum(i, width).k for i in (0.18, 0.3, 0.52, 0.73, 1.89)]
        assert ks == sorted(ks)
        assert all(-1.0 <= i <= 0.0 for i in ks)

    def test_decay_grows_with_pump(self):
        width = calibrate_phasematch_width(0.18, -0.92)
        assert pump_to_spectrum(0.52, width).b > pump_to_spectrum(0.18, width).b > 0.0

    @pytest.mark.parametrize("widths", ((0.0, 1.0), (1.0, 0.0), (-0.2, 1.0)))
    def test_rejects_widths(self, widths):
        with pytest.raises(ValueError, match="Expect positive widths"):
            pump_to_spectrum(*widths)
