"""Single-qutrit state vectors, diagonal phase gates and Fourier-basis measurement."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import UnnormalizedStateError

logger = logging.getLogger(__name__)

DIMENSION = 3
TWO_PI = 2.0 * np.pi
OMEGA = np.exp(1j * TWO_PI / 3)

# Input validation tolerance; internal checks use 1e-12.
NORM_TOLERANCE = 1e-9
INTERNAL_TOLERANCE = 1e-12

# Row k is the k-th Fourier element (1, w^k, w^-k) / sqrt(3).
FOURIER_BASIS = np.array(
    [[1.0, OMEGA**k, OMEGA ** (-k)] for k in range(DIMENSION)], dtype=complex
) / np.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class QutritState:
    """Three complex probability amplitudes indexed by basis state 0, 1, 2.

    Attributes:
        amplitudes: Read-only complex array of shape (3,)
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (DIMENSION,):
            raise ValueError(f"A qutrit has 3 amplitudes, got {amps.shape[0]}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tolerance: float = NORM_TOLERANCE) -> bool:
        return abs(self.norm - 1.0) <= tolerance

    def allclose(self, other: "QutritState", atol: float = INTERNAL_TOLERANCE) -> bool:
        """Compare amplitudes component-wise (global phase is significant)."""
        return bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol))


@dataclass(frozen=True)
class PhaseGate:
    """Diagonal unitary acting as e^{i phases[k]} on basis state k.

    Attributes:
        phases: Three angles in radians
    """

    phases: Tuple[float, float, float]

    def __post_init__(self):
        phases = tuple(float(p) for p in self.phases)
        if len(phases) != DIMENSION:
            raise ValueError(f"A phase gate has 3 phases, got {len(phases)}")
        object.__setattr__(self, "phases", phases)

    @property
    def factors(self) -> np.ndarray:
        """Unit-modulus multipliers, computed from the angles at application time."""
        angles = np.asarray(self.phases)
        return np.cos(angles) + 1j * np.sin(angles)

    def compose(self, other: "PhaseGate") -> "PhaseGate":
        """Return the product gate; diagonal gates commute so order is irrelevant."""
        return PhaseGate(tuple(a + b for a, b in zip(self.phases, other.phases)))

    @classmethod
    def identity(cls) -> "PhaseGate":
        return cls((0.0, 0.0, 0.0))


@dataclass(frozen=True)
class FourierOutcome:
    """Result of a Fourier-basis measurement.

    Attributes:
        index: Which Fourier element clicked (0, 1 or 2)
        probabilities: Outcome distribution the index was drawn from
    """

    index: int
    probabilities: Tuple[float, float, float]


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """Create the seeded stream every random draw in the package flows from."""
    return np.random.default_rng(seed)


def prepare_psi() -> QutritState:
    """Return the uniform superposition (|0> + |1> + |2>) / sqrt(3)."""
    return QutritState(np.full(DIMENSION, 1.0 / np.sqrt(3.0), dtype=complex))


def gate_u(exponent_ninths: int) -> PhaseGate:
    """Return U raised to exponent_ninths / 3.

    The exponent is counted in ninths of a turn, so U^k is ``gate_u(3 * k)``
    and the fractional power U^(S/3) is ``gate_u(S)``.
    """
    angle = TWO_PI * exponent_ninths / 9.0
    return PhaseGate((0.0, angle, -angle))


def gate_v(exponent: int) -> PhaseGate:
    """Return V^exponent = diag(1, w^e, w^e)."""
    angle = TWO_PI * exponent / 3.0
    return PhaseGate((0.0, angle, angle))


def apply(gate: PhaseGate, state: QutritState) -> QutritState:
    """Multiply each amplitude by the gate's phase factor."""
    return QutritState(state.amplitudes * gate.factors)


def apply_sequence(gates: Sequence[PhaseGate], state: QutritState) -> QutritState:
    for gate in gates:
        state = apply(gate, state)
    return state


def fourier_probabilities(state: QutritState) -> np.ndarray:
    """Return |<k|state>|^2 for the three Fourier elements.

    Raises:
        UnnormalizedStateError: If the state's norm deviates from 1 by more
            than NORM_TOLERANCE
    """
    if not state.is_normalized():
        raise UnnormalizedStateError(
            f"State norm {state.norm:.12g} is not 1", norm=state.norm
        )
    overlaps = FOURIER_BASIS.conj() @ state.amplitudes
    return np.abs(overlaps) ** 2


def sample_outcome(probabilities: Sequence[float], rng: np.random.Generator) -> int:
    """Draw a Fourier index from a probability triple using the given stream."""
    probs = np.clip(np.asarray(probabilities, dtype=float), 0.0, 1.0)
    probs = probs / probs.sum()
    return int(rng.choice(DIMENSION, p=probs))


def measure(state: QutritState, rng: np.random.Generator) -> FourierOutcome:
    probs = fourier_probabilities(state)
    return FourierOutcome(
        index=sample_outcome(probs, rng),
        probabilities=tuple(float(p) for p in probs),
    )
