"""Tests for the interferometer and detector noise model."""

import numpy as np
import pytest

from qutritcomm import reference_data
from qutritcomm.exceptions import CalibrationError, ConfigurationError, InvalidRoundError
from qutritcomm.physical_model import (
    NO_DETECTION,
    InterferometerPhases,
    NoiseConfig,
    _gaussian_expectation,
    _output_probabilities,
    calibrate_drift_sigma,
    detector_probabilities,
    drift_averaged_probabilities,
    drift_error,
    expected_detection_probabilities,
    expected_qter,
    protocol_phases,
    run_setting,
    simulate_trigger,
    simulate_triggers,
)
from qutritcomm.protocol_engine import ProtocolSetting, recorded_settings
from qutritcomm.qutrit_core import QutritState, fourier_probabilities, make_rng


def _closed_form_drift_error(sigma):
    return (6 - 4 * np.exp(-(sigma**2) / 2) - 2 * np.exp(-(sigma**2))) / 9


@pytest.fixture
def valid_setting():
    """First recorded secret-sharing row, expected detector D2."""
    return ProtocolSetting.from_values("ss", [0, 0, 0, 0, 2, 0])


@pytest.fixture
def random_setting():
    """A recorded row that fails sifting."""
    return ProtocolSetting.from_values("ss", [2, 2, 0, 0, 0, 0])


class TestInterferometer:
    """Tests for the three-arm output probabilities."""

    def test_matches_fourier_measurement_on_grid(self):
        """Output formulas equal Fourier probabilities on a 100x100 phase grid."""
        grid = np.linspace(0, 2 * np.pi, 100)
        for phi2 in grid:
            for phi3 in grid:
                state = QutritState(np.array([1, np.exp(1j * phi2), np.exp(1j * phi3)]) / np.sqrt(3))
                probs = detector_probabilities(InterferometerPhases(phi2, phi3))
                assert np.allclose(probs, fourier_probabilities(state), atol=1e-12)

    def test_probabilities_sum_to_one(self):
        """Vectorized probabilities sum to 1 everywhere."""
        phi2, phi3 = np.meshgrid(np.linspace(0, 2 * np.pi, 100), np.linspace(0, 2 * np.pi, 100))
        probs = _output_probabilities(phi2, phi3)
        assert np.allclose(probs.sum(axis=-1), 1.0, atol=1e-12)

    def test_protocol_phases_point_to_expected_detector(self, valid_setting):
        """Accumulated phases of a valid setting fire the expected detector."""
        probs = detector_probabilities(protocol_phases(valid_setting))
        assert probs[2] == pytest.approx(1.0, abs=1e-12)

    def test_non_finite_phase_rejected(self):
        """NaN phases are invalid."""
        with pytest.raises(ValueError):
            InterferometerPhases(float("nan"), 0.0)


class TestDrift:
    """Tests for drift averaging and calibration."""

    def test_averaged_matches_quadrature(self, valid_setting):
        """The damped closed form equals a Gauss-Hermite average."""
        phases = protocol_phases(valid_setting)
        sigma = 0.4
        for k in range(3):
            numeric = _gaussian_expectation(
                lambda d2, d3: _output_probabilities(phases.phi2 + d2, phases.phi3 + d3)[..., k], sigma
            )
            assert drift_averaged_probabilities(phases, sigma)[k] == pytest.approx(numeric, abs=1e-10)

    @pytest.mark.parametrize("sigma", [0.05, 0.15, 0.3, 1.0])
    def test_drift_error_closed_form(self, sigma):
        """Average wrong-detector probability matches the closed form."""
        assert drift_error(sigma) == pytest.approx(_closed_form_drift_error(sigma), abs=1e-10)

    def test_calibration_regression(self):
        """A 1% target gives sigma of about 0.1506 rad."""
        sigma = calibrate_drift_sigma(0.01)
        assert sigma == pytest.approx(0.1506, abs=1e-3)
        assert drift_error(sigma) == pytest.approx(0.01, abs=1e-9)

    def test_default_target_is_larger(self):
        """The 2% default needs a wider spread than 1%."""
        assert calibrate_drift_sigma(0.02) > calibrate_drift_sigma(0.01)

    def test_zero_target(self):
        """No drift error means no drift."""
        assert calibrate_drift_sigma(0.0) == 0.0

    @pytest.mark.parametrize("target", [-0.1, 0.5, 0.9])
    def test_invalid_target(self, target):
        """Targets outside [0, 0.5) raise CalibrationError."""
        with pytest.raises(CalibrationError) as exc_info:
            calibrate_drift_sigma(target)
        assert exc_info.value.target == target


class TestNoiseConfig:
    """Tests for NoiseConfig validation."""

    def test_recorded_defaults(self):
        """Defaults carry the measured dark counts and 1e5 triggers."""
        noise = NoiseConfig.recorded_defaults(seed=4)
        assert noise.dark_prob == reference_data.DARK_COUNT_PROBABILITIES
        assert noise.triggers == 100_000
        assert noise.click_prob == pytest.approx(4e-3)
        assert noise.drift_sigma > 0
        assert noise.seed == 4

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dark_prob": (0.1, 0.1)},
            {"dark_prob": (1.5, 0, 0)},
            {"click_prob": -0.1},
            {"drift_sigma": -1.0},
            {"triggers": 0},
            {"triggers": 2.5},
        ],
    )
    def test_invalid_values(self, kwargs):
        """Out-of-range parameters raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            NoiseConfig(**kwargs)


class TestSimulation:
    """Tests for the Monte Carlo trigger simulation."""

    def test_ideal_valid_setting_hits_expected_detector(self, valid_setting):
        """Without noise every trigger fires the expected detector."""
        counts = run_setting(valid_setting, NoiseConfig.ideal(triggers=2000))
        assert counts.counts == (0, 0, 2000)

    def test_ideal_random_setting_is_uniform(self, random_setting):
        """Without noise a sift-invalid setting spreads evenly over detectors."""
        counts = run_setting(random_setting, NoiseConfig.ideal(triggers=30_000, seed=1))
        freqs = np.asarray(counts.counts) / counts.total
        assert np.allclose(freqs, 1 / 3, atol=0.03)

    def test_no_signal_means_dark_counts_only(self, valid_setting):
        """With click_prob 0 only dark counts are recorded."""
        noise = NoiseConfig(dark_prob=(0.01, 0.0, 0.0), click_prob=0.0, triggers=20_000)
        counts = run_setting(valid_setting, noise, make_rng(2))
        assert counts.counts[1] == counts.counts[2] == 0
        assert counts.counts[0] == pytest.approx(200, abs=60)

    def test_double_clicks_discarded(self, valid_setting):
        """When every detector fires dark, nothing is recorded."""
        noise = NoiseConfig(dark_prob=(1.0, 1.0, 1.0), click_prob=1.0, triggers=500)
        assert run_setting(valid_setting, noise).total == 0

    def test_deterministic_per_seed(self, valid_setting):
        """Identical config and seed give identical counts."""
        noise = NoiseConfig.recorded_defaults(seed=9)
        assert run_setting(valid_setting, noise) == run_setting(valid_setting, noise)

    def test_different_seeds_differ(self, valid_setting):
        """Different seeds give different counts."""
        a = run_setting(valid_setting, NoiseConfig.recorded_defaults(seed=1))
        b = run_setting(valid_setting, NoiseConfig.recorded_defaults(seed=2))
        assert a.counts != b.counts

    def test_batch_output_range(self, valid_setting):
        """Trigger batches contain detector indices or NO_DETECTION only."""
        noise = NoiseConfig.recorded_defaults()
        detectors = simulate_triggers(protocol_phases(valid_setting), noise, make_rng(0), 5000)
        assert set(np.unique(detectors)) <= {NO_DETECTION, 0, 1, 2}

    def test_single_trigger(self, valid_setting):
        """A single noiseless trigger fires the expected detector."""
        result = simulate_trigger(protocol_phases(valid_setting), NoiseConfig.ideal(), make_rng(0))
        assert result == 2

    def test_single_triggers_with_recorded_detectors(self):
        """10^5 single triggers at (0, 0) give about 400 detections, 2-8% off D0."""
        noise = NoiseConfig(
            dark_prob=reference_data.DARK_COUNT_PROBABILITIES, click_prob=4.0e-3, drift_sigma=0.0, triggers=100_000
        )
        rng = make_rng(2024)
        phases = InterferometerPhases(0.0, 0.0)
        detections = [simulate_trigger(phases, noise, rng) for _ in range(noise.triggers)]
        counts = np.bincount([d for d in detections if d is not None], minlength=3)
        assert 300 <= counts.sum() <= 500
        assert 0.02 <= 1 - counts[0] / counts.sum() <= 0.08

    def test_frequencies_match_analytic(self, valid_setting):
        """Monte Carlo frequencies follow expected_detection_probabilities."""
        noise = NoiseConfig(dark_prob=(0.0, 0.0, 0.0), click_prob=1.0, drift_sigma=0.6, triggers=40_000)
        counts = run_setting(valid_setting, noise, make_rng(5))
        expected = expected_detection_probabilities(protocol_phases(valid_setting), noise)
        assert np.allclose(np.asarray(counts.counts) / noise.triggers, expected, atol=0.015)

    def test_detections_per_setting(self, valid_setting):
        """Recorded defaults give roughly 400 detections per setting."""
        counts = run_setting(valid_setting, NoiseConfig.recorded_defaults(seed=3))
        assert 300 <= counts.total <= 500


class TestExpectedQter:
    """Tests for the analytic QTER oracle."""

    def test_zero_noise_qter(self, valid_setting):
        """Zero noise has zero QTER."""
        assert expected_qter(valid_setting, NoiseConfig.ideal()) == pytest.approx(0.0, abs=1e-12)

    def test_monotone_in_drift(self, valid_setting):
        """QTER grows with the drift spread."""
        values = [
            expected_qter(valid_setting, NoiseConfig(drift_sigma=s)) for s in (0.0, 0.1, 0.2, 0.4)
        ]
        assert values == sorted(values)
        assert values[0] < values[-1]

    def test_monotone_in_dark_counts(self, valid_setting):
        """QTER grows with dark count probability."""
        low = expected_qter(valid_setting, NoiseConfig(dark_prob=(1e-5, 1e-5, 1e-5)))
        high = expected_qter(valid_setting, NoiseConfig(dark_prob=(1e-4, 1e-4, 1e-4)))
        assert high > low

    def test_table_means_within_band(self):
        """Predicted mean QTER of both recorded tables is within 4 points of the published means."""
        noise = NoiseConfig.recorded_defaults()
        for protocol, published in (
            ("ss", reference_data.SECRET_SHARING_MEAN_QTER_PCT),
            ("dba", reference_data.DBA_MEAN_QTER_PCT),
        ):
            settings = [s for s in recorded_settings(protocol) if s.sift_valid]
            mean = np.mean([expected_qter(s, noise) for s in settings])
            assert abs(100 * mean - published) <= 4.0

    def test_random_setting_has_no_qter(self, random_setting):
        """A sift-invalid setting has no expected outcome."""
        with pytest.raises(InvalidRoundError):
            expected_qter(random_setting, NoiseConfig())
