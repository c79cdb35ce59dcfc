"""End-to-end ideal secret-sharing session.

Rounds are drawn with uniform random inputs, sifted, and the valid rounds
split into an announced QTER sample and key rounds. Key rounds can then be
folded in blocks by privacy amplification.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .exceptions import InvalidInputError
from .protocol_engine import (
    PARTIES,
    Party,
    PrivacyFold,
    RoundRecord,
    fold_all,
    qter,
    required_rounds,
    secret_sharing_round,
)
from .qutrit_core import make_rng

logger = logging.getLogger(__name__)

DEFAULT_QTER_FRACTION = 0.5


@dataclass
class SessionResult:
    """Outcome of a session.

    Attributes:
        rounds: Every round, in the order played
        valid_rounds: Rounds that passed sifting
        sample_rounds: Valid rounds whose x0 values were announced to estimate QTER
        key_rounds: Valid rounds kept secret
        qter: QTER of the announced sample, or None if the sample is empty
        block_size: Rounds folded per amplified trit (None without amplification)
        folds: One {party: PrivacyFold} per complete block
    """

    rounds: List[RoundRecord]
    valid_rounds: List[RoundRecord]
    sample_rounds: List[RoundRecord]
    key_rounds: List[RoundRecord]
    qter: Optional[float] = None
    block_size: Optional[int] = None
    folds: List[Dict[Party, PrivacyFold]] = field(default_factory=list)

    @property
    def sift_rate(self) -> float:
        return len(self.valid_rounds) / len(self.rounds) if self.rounds else 0.0

    def shares(self, party: Party) -> List[int]:
        """The party's key trits: folded values if amplified, raw x0 otherwise."""
        party = Party(party)
        if self.block_size is not None:
            return [fold[party].value for fold in self.folds]
        index = PARTIES.index(party)
        return [r.inputs[index].x0 for r in self.key_rounds]


def random_inputs(rng: np.random.Generator):
    trits = rng.integers(0, 3, size=6)
    return (int(trits[0]), int(trits[1])), (int(trits[2]), int(trits[3])), (int(trits[4]), int(trits[5]))


def run_session(
    rounds: int,
    rng: Optional[np.random.Generator] = None,
    qter_fraction: float = DEFAULT_QTER_FRACTION,
    p_cheat: Optional[float] = None,
    p_bar: Optional[float] = None,
) -> SessionResult:
    """Play rounds of secret sharing and post-process them.

    Args:
        rounds: Number of rounds to play
        rng: Seeded stream for inputs and outcomes (seed 0 if omitted)
        qter_fraction: Share of valid rounds sacrificed for QTER estimation
        p_cheat: Per-round cheating probability; enables amplification with p_bar
        p_bar: Acceptable cheating probability after amplification

    Returns:
        SessionResult

    Raises:
        InvalidInputError: If rounds < 1, qter_fraction is outside [0, 1], or
            only one of p_cheat and p_bar is given
    """
    if rounds < 1:
        raise InvalidInputError("A session needs at least one round", field="rounds", value=rounds)
    if not 0.0 <= qter_fraction <= 1.0:
        raise InvalidInputError(
            f"qter_fraction must lie in [0, 1], got {qter_fraction}", field="qter_fraction", value=qter_fraction
        )
    if (p_cheat is None) != (p_bar is None):
        raise InvalidInputError("Privacy amplification needs both p_cheat and p_bar", field="p_bar")
    rng = rng if rng is not None else make_rng(0)

    played = [secret_sharing_round(*random_inputs(rng), rng=rng) for _ in range(rounds)]
    valid = [r for r in played if r.valid]
    sample_size = math.floor(qter_fraction * len(valid))
    picked = set(rng.choice(len(valid), size=sample_size, replace=False).tolist()) if sample_size else set()
    sample = [r for i, r in enumerate(valid) if i in picked]
    key = [r for i, r in enumerate(valid) if i not in picked]

    result = SessionResult(
        rounds=played,
        valid_rounds=valid,
        sample_rounds=sample,
        key_rounds=key,
        qter=qter(sample) if sample else None,
    )
    if p_cheat is not None:
        block = required_rounds(p_cheat, p_bar)
        result.block_size = block
        result.folds = [fold_all(key[i : i + block]) for i in range(0, len(key) - block + 1, block)]
    logger.debug(
        "Session: %d rounds, %d valid, %d sampled, %d key",
        len(played),
        len(valid),
        len(sample),
        len(key),
    )
    return result
