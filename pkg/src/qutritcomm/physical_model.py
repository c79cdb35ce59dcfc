"""Monte Carlo model of the three-arm fiber interferometer and its detectors.

A trigger goes through four stages: the arm phases are perturbed by Gaussian
drift, the signal photon survives with probability click_prob and lands in a
detector drawn from the three-arm output probabilities, each detector fires
a dark count independently, and the trigger counts only if exactly one
detector fired.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from . import reference_data
from .exceptions import CalibrationError, ConfigurationError, InvalidRoundError
from .protocol_engine import Protocol, ProtocolSetting, qter_from_counts, recorded_settings
from .qutrit_core import TWO_PI, make_rng

logger = logging.getLogger(__name__)

DEFAULT_CLICK_PROB = 4.0e-3
# Two drift effects of about 1% each, reproduced by one i.i.d. spread.
DEFAULT_DRIFT_TARGET = 0.02
CHUNK_SIZE = 65_536
NO_DETECTION = -1

_SHIFT = TWO_PI / 3.0
# Drift error saturates at 6/9 as sigma grows.
_MAX_DRIFT_ERROR = 2.0 / 3.0
_SIGMA_SEARCH_LIMIT = 4.0
_QUADRATURE_NODES = 64


@dataclass(frozen=True)
class InterferometerPhases:
    """Phases of arms 2 and 3 relative to the reference arm, in radians."""

    phi2: float
    phi3: float

    def __post_init__(self):
        if not (np.isfinite(self.phi2) and np.isfinite(self.phi3)):
            raise ValueError("Interferometer phases must be finite")

    def reduced(self) -> "InterferometerPhases":
        return InterferometerPhases(float(np.mod(self.phi2, TWO_PI)), float(np.mod(self.phi3, TWO_PI)))


@dataclass(frozen=True)
class NoiseConfig:
    """Detector and drift parameters for one campaign.

    Attributes:
        dark_prob: Per-trigger dark count probability of D0, D1, D2
        click_prob: Per-trigger probability the signal photon is detected
            (transmission times quantum efficiency)
        drift_sigma: Standard deviation of the per-trigger phase perturbation
        triggers: Laser triggers per setting
        seed: Master seed
    """

    dark_prob: Tuple[float, float, float] = reference_data.DARK_COUNT_PROBABILITIES
    click_prob: float = DEFAULT_CLICK_PROB
    drift_sigma: float = 0.0
    triggers: int = reference_data.TRIGGERS_PER_SETTING
    seed: int = 0

    def __post_init__(self):
        dark = tuple(float(p) for p in self.dark_prob)
        object.__setattr__(self, "dark_prob", dark)
        if len(dark) != 3:
            raise ConfigurationError("dark_prob needs one probability per detector")
        for name, value in [("dark_prob", p) for p in dark] + [("click_prob", self.click_prob)]:
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {value}")
        if not self.drift_sigma >= 0.0:
            raise ConfigurationError(f"drift_sigma must be non-negative, got {self.drift_sigma}")
        if isinstance(self.triggers, bool) or int(self.triggers) != self.triggers or self.triggers < 1:
            raise ConfigurationError(f"triggers must be a positive integer, got {self.triggers}")

    @classmethod
    def ideal(cls, triggers: int = 1000, seed: int = 0) -> "NoiseConfig":
        """No dark counts, no drift, every photon detected."""
        return cls(dark_prob=(0.0, 0.0, 0.0), click_prob=1.0, drift_sigma=0.0, triggers=triggers, seed=seed)

    @classmethod
    def recorded_defaults(cls, seed: int = 0, drift_target: float = DEFAULT_DRIFT_TARGET) -> "NoiseConfig":
        """Measured dark counts, ~400 detections per 1e5 triggers, calibrated drift."""
        return cls(drift_sigma=calibrate_drift_sigma(drift_target), seed=seed)

    @property
    def total_dark_prob(self) -> float:
        return float(sum(self.dark_prob))


@dataclass(frozen=True)
class SettingCounts:
    """Detections per detector for one setting."""

    counts: Tuple[int, int, int]
    triggers_run: int

    @property
    def total(self) -> int:
        return int(sum(self.counts))


def _output_probabilities(phi2, phi3, damp1=1.0, damp2=1.0) -> np.ndarray:
    """Three-arm output probabilities, broadcasting over phase arrays.

    damp1 scales the single-arm cosine terms and damp2 the cross term; both
    are 1 for a fixed phase setting.
    """
    phi2 = np.asarray(phi2, dtype=float)
    phi3 = np.asarray(phi3, dtype=float)
    p0 = 3 + 2 * (damp1 * (np.cos(phi2) + np.cos(phi3)) + damp2 * np.cos(phi2 - phi3))
    p1 = 3 + 2 * (
        damp1 * (np.cos(phi2 - _SHIFT) + np.cos(phi3 + _SHIFT)) + damp2 * np.cos(phi2 - phi3 + _SHIFT)
    )
    p2 = 3 + 2 * (
        damp1 * (np.cos(phi2 + _SHIFT) + np.cos(phi3 - _SHIFT)) + damp2 * np.cos(phi2 - phi3 - _SHIFT)
    )
    return np.clip(np.stack([p0, p1, p2], axis=-1) / 9.0, 0.0, 1.0)


def detector_probabilities(phases: InterferometerPhases) -> np.ndarray:
    """P(D0), P(D1), P(D2) for the given arm phases."""
    return _output_probabilities(phases.phi2, phases.phi3)


def drift_averaged_probabilities(phases: InterferometerPhases, sigma: float) -> np.ndarray:
    """Detector probabilities averaged over independent N(0, sigma^2) drift on both arms.

    E[cos(phi + d)] = cos(phi) exp(-sigma^2 / 2), and the cross term sees the
    difference of two drifts, so it is damped by exp(-sigma^2).
    """
    return _output_probabilities(
        phases.phi2, phases.phi3, damp1=np.exp(-(sigma**2) / 2.0), damp2=np.exp(-(sigma**2))
    )


def protocol_phases(setting: ProtocolSetting) -> InterferometerPhases:
    """Accumulate every party's phase shifts on |1> and |2> relative to |0>."""
    phases = np.zeros(3)
    for gate in setting.party_gates():
        phases += np.asarray(gate.phases)
    return InterferometerPhases(float(phases[1] - phases[0]), float(phases[2] - phases[0]))


def simulate_triggers(
    phases: InterferometerPhases, noise: NoiseConfig, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Simulate n triggers at once.

    Returns:
        np.ndarray: Detector index per trigger, NO_DETECTION when no detector
            or more than one detector fired
    """
    if noise.drift_sigma > 0.0:
        drift = rng.normal(0.0, noise.drift_sigma, size=(n, 2))
    else:
        drift = np.zeros((n, 2))
    probs = _output_probabilities(phases.phi2 + drift[:, 0], phases.phi3 + drift[:, 1])

    signal = rng.random(n) < noise.click_prob
    cumulative = np.cumsum(probs, axis=1)
    draw = rng.random(n) * cumulative[:, -1]
    target = np.sum(draw[:, None] >= cumulative[:, :-1], axis=1)

    fired = rng.random((n, 3)) < np.asarray(noise.dark_prob)
    fired[np.arange(n), target] |= signal

    single = fired.sum(axis=1) == 1
    detector = np.where(single, np.argmax(fired, axis=1), NO_DETECTION)
    return detector.astype(np.int64)


def simulate_trigger(
    phases: InterferometerPhases, noise: NoiseConfig, rng: np.random.Generator
) -> Optional[int]:
    """Simulate one trigger; None when nothing (or more than one detector) clicked."""
    detector = int(simulate_triggers(phases, noise, rng, 1)[0])
    return None if detector == NO_DETECTION else detector


def run_setting(
    setting: ProtocolSetting, noise: NoiseConfig, rng: Optional[np.random.Generator] = None
) -> SettingCounts:
    """Accumulate detections over noise.triggers triggers.

    The stream defaults to one seeded with noise.seed, so identical inputs
    give identical counts.
    """
    rng = rng if rng is not None else make_rng(noise.seed)
    phases = protocol_phases(setting)
    counts = np.zeros(3, dtype=np.int64)
    remaining = int(noise.triggers)
    while remaining > 0:
        batch = min(CHUNK_SIZE, remaining)
        detectors = simulate_triggers(phases, noise, rng, batch)
        counts += np.bincount(detectors[detectors != NO_DETECTION], minlength=3)
        remaining -= batch
    logger.debug("Setting %s: counts %s", setting.label, counts.tolist())
    return SettingCounts(counts=tuple(int(c) for c in counts), triggers_run=int(noise.triggers))


def expected_detection_probabilities(phases: InterferometerPhases, noise: NoiseConfig) -> np.ndarray:
    """Exact per-trigger probability that detector j is the only one to fire.

    Conditioning on the signal: without a photon only j's dark count may fire;
    with a photon in j the other detectors must stay dark; a photon anywhere
    else makes a second detector fire.
    """
    signal = drift_averaged_probabilities(phases, noise.drift_sigma)
    dark = np.asarray(noise.dark_prob)
    quiet = 1.0 - dark
    result = np.empty(3)
    for j in range(3):
        others_quiet = np.prod(np.delete(quiet, j))
        result[j] = others_quiet * ((1.0 - noise.click_prob) * dark[j] + noise.click_prob * signal[j])
    return result


def expected_qter(setting: ProtocolSetting, noise: NoiseConfig) -> float:
    """Analytic QTER of a setting, the Monte Carlo's large-trigger limit."""
    expected = setting.expected_outcome
    if expected is None:
        raise InvalidRoundError(f"Setting {setting.label} has no expected outcome")
    probs = expected_detection_probabilities(protocol_phases(setting), noise)
    return qter_from_counts(probs, expected)


def _gaussian_expectation(func, sigma: float) -> float:
    """E[func(d2, d3)] for independent N(0, sigma^2) d2, d3 by Gauss-Hermite quadrature."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(_QUADRATURE_NODES)
    weights = weights / weights.sum()
    d2, d3 = np.meshgrid(sigma * nodes, sigma * nodes, indexing="ij")
    return float(np.sum(np.outer(weights, weights) * func(d2, d3)))


def drift_error(sigma: float, settings: Optional[Sequence[ProtocolSetting]] = None) -> float:
    """Wrong-detector probability from drift alone, averaged over settings.

    Uses no dark counts and click_prob = 1. Settings default to the nine
    valid recorded secret-sharing settings.
    """
    if settings is None:
        settings = [s for s in recorded_settings(Protocol.SECRET_SHARING) if s.sift_valid]
    if sigma == 0.0:
        return 0.0
    errors = []
    for setting in settings:
        phases = protocol_phases(setting)
        expected = setting.expected_outcome

        def wrong(d2, d3, phases=phases, expected=expected):
            probs = _output_probabilities(phases.phi2 + d2, phases.phi3 + d3)
            return 1.0 - probs[..., expected]

        errors.append(_gaussian_expectation(wrong, sigma))
    return float(np.mean(errors))


@lru_cache(maxsize=32)
def calibrate_drift_sigma(target_qter_contribution: float) -> float:
    """Find the drift spread whose average wrong-detector probability is the target.

    Raises:
        CalibrationError: If the target is outside [0, 0.5) or cannot be reached
    """
    target = float(target_qter_contribution)
    if target == 0.0:
        return 0.0
    if not 0.0 < target < 0.5:
        raise CalibrationError(f"Drift target must lie in [0, 0.5), got {target}", target=target)
    upper_error = drift_error(_SIGMA_SEARCH_LIMIT)
    if target >= min(upper_error, _MAX_DRIFT_ERROR):
        raise CalibrationError(f"Drift target {target} is unattainable", target=target)
    sigma = brentq(lambda s: drift_error(s) - target, 0.0, _SIGMA_SEARCH_LIMIT, xtol=1e-12)
    logger.debug("Calibrated drift sigma %.6f rad for target %.4f", sigma, target)
    return float(sigma)
