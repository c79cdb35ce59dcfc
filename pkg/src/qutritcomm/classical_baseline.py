"""Deterministic classical strategies for the CCP and the 7/9 bound.

A classical strategy is three lookup tables. Alice sends a trit computed
from (a0, a1), Bob forwards a trit computed from (b0, b1, received), and
Charlie guesses T from (c0, c1, received). Success is counted exactly over
the 243 promise inputs.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidInputError, VerificationError
from .protocol_engine import promise_triples
from .reference_data import OPTIMAL_CLASSICAL_SUCCESS

logger = logging.getLogger(__name__)

ALICE_TABLE_SIZE = 9
RELAY_TABLE_SIZE = 27


def _promise_arrays():
    triples = np.array(list(promise_triples()), dtype=np.int64)
    sa, sb, sc = triples.T
    task = (triples.sum(axis=1) % 9) // 3
    # Table indices: Alice by 3*a0 + a1 = S_a; relays by 9*x0 + 3*x1 + received = 3*S + received.
    return sa, sb, sc, task


_SA, _SB, _SC, _TASK = _promise_arrays()
PROMISE_INPUTS = len(_TASK)


@dataclass(frozen=True)
class SuccessFraction:
    """Exact count of correct guesses over the promise inputs."""

    correct: int
    total: int = PROMISE_INPUTS

    def as_fraction(self) -> Fraction:
        return Fraction(self.correct, self.total)

    def __float__(self) -> float:
        return self.correct / self.total

    def __str__(self) -> str:
        return f"{self.correct}/{self.total}"


@dataclass(frozen=True)
class ClassicalStrategy:
    """Lookup tables for a deterministic one-trit-per-link strategy.

    Attributes:
        alice_msg: 9 entries indexed by 3 * a0 + a1
        bob_msg: 27 entries indexed by 9 * b0 + 3 * b1 + received
        charlie_guess: 27 entries indexed by 9 * c0 + 3 * c1 + received
    """

    alice_msg: Tuple[int, ...]
    bob_msg: Tuple[int, ...]
    charlie_guess: Tuple[int, ...]

    def __post_init__(self):
        for name, size in (
            ("alice_msg", ALICE_TABLE_SIZE),
            ("bob_msg", RELAY_TABLE_SIZE),
            ("charlie_guess", RELAY_TABLE_SIZE),
        ):
            table = tuple(int(v) for v in getattr(self, name))
            if len(table) != size:
                raise InvalidInputError(f"{name} needs {size} entries, got {len(table)}", field=name)
            if any(v not in (0, 1, 2) for v in table):
                raise InvalidInputError(f"{name} entries must be trits", field=name)
            object.__setattr__(self, name, table)

    @classmethod
    def from_functions(
        cls,
        alice: Callable[[int, int], int],
        bob: Callable[[int, int, int], int],
        charlie: Callable[[int, int, int], int],
    ) -> "ClassicalStrategy":
        """Tabulate three functions over their finite domains."""
        trits = range(3)
        return cls(
            alice_msg=tuple(alice(x0, x1) % 3 for x0 in trits for x1 in trits),
            bob_msg=tuple(bob(x0, x1, r) % 3 for x0 in trits for x1 in trits for r in trits),
            charlie_guess=tuple(charlie(x0, x1, r) % 3 for x0 in trits for x1 in trits for r in trits),
        )


def optimal_strategy() -> ClassicalStrategy:
    """Alice sends a0, Bob adds b0, Charlie guesses received + c0 + 1."""
    return ClassicalStrategy.from_functions(
        alice=lambda a0, a1: a0,
        bob=lambda b0, b1, received: received + b0,
        charlie=lambda c0, c1, received: received + c0 + 1,
    )


def _correct_counts(alice: np.ndarray, bob: np.ndarray, charlie: np.ndarray) -> np.ndarray:
    """Correct guesses per strategy for stacked tables of shape (k, 9), (k, 27), (k, 27)."""
    msg_a = alice[:, _SA]
    msg_b = np.take_along_axis(bob, 3 * _SB[None, :] + msg_a, axis=1)
    guess = np.take_along_axis(charlie, 3 * _SC[None, :] + msg_b, axis=1)
    return (guess == _TASK[None, :]).sum(axis=1)


def evaluate_strategy(strategy: ClassicalStrategy) -> SuccessFraction:
    """Count correct guesses over all promise inputs."""
    correct = _correct_counts(
        np.array([strategy.alice_msg]),
        np.array([strategy.bob_msg]),
        np.array([strategy.charlie_guess]),
    )
    return SuccessFraction(correct=int(correct[0]))


@dataclass(frozen=True)
class ReducedClassResult:
    """Best success in the phase-valued strategy class and the (r, q) that attain it."""

    best: SuccessFraction
    maximizers: List[Tuple[Tuple[int, int, int], Tuple[int, int, int]]]
    strategies_checked: int


def reduced_class_strategy(r: Sequence[int], q: Sequence[int]) -> ClassicalStrategy:
    """Message (r * x0 + q + received) mod 3 for each party; Alice receives nothing."""
    (r_a, r_b, r_c), (q_a, q_b, q_c) = r, q
    return ClassicalStrategy.from_functions(
        alice=lambda a0, a1: r_a * a0 + q_a,
        bob=lambda b0, b1, received: r_b * b0 + q_b + received,
        charlie=lambda c0, c1, received: r_c * c0 + q_c + received,
    )


def exhaustive_bound_reduced_class() -> ReducedClassResult:
    """Enumerate r in {1, 2}^3 and offsets q in {0, 1, 2}^3 (216 strategies)."""
    best = -1
    maximizers = []
    checked = 0
    for r in itertools.product((1, 2), repeat=3):
        for q in itertools.product(range(3), repeat=3):
            checked += 1
            correct = evaluate_strategy(reduced_class_strategy(r, q)).correct
            if correct > best:
                best, maximizers = correct, [(r, q)]
            elif correct == best:
                maximizers.append((r, q))
    logger.debug("Reduced class: best %d/%d from %d strategies", best, PROMISE_INPUTS, checked)
    return ReducedClassResult(SuccessFraction(best), maximizers, checked)


@dataclass(frozen=True)
class SearchResult:
    best: SuccessFraction
    trials: int


def random_strategy_search(
    trials: int,
    rng: np.random.Generator,
    include: Optional[Sequence[ClassicalStrategy]] = None,
    batch_size: int = 4096,
) -> SearchResult:
    """Sample full lookup-table strategies uniformly and keep the best.

    This corroborates the bound; it does not prove it.

    Args:
        trials: Number of random strategies to sample
        rng: Seeded stream
        include: Extra strategies evaluated alongside the random ones
        batch_size: Strategies evaluated per vectorized batch

    Raises:
        InvalidInputError: If trials < 1
        VerificationError: If any strategy beats 7/9
    """
    if trials < 1:
        raise InvalidInputError("trials must be at least 1", field="trials", value=trials)
    best = max((evaluate_strategy(s).correct for s in include or ()), default=0)
    remaining = trials
    while remaining > 0:
        k = min(batch_size, remaining)
        correct = _correct_counts(
            rng.integers(0, 3, size=(k, ALICE_TABLE_SIZE)),
            rng.integers(0, 3, size=(k, RELAY_TABLE_SIZE)),
            rng.integers(0, 3, size=(k, RELAY_TABLE_SIZE)),
        )
        best = max(best, int(correct.max()))
        remaining -= k
    result = SearchResult(best=SuccessFraction(best), trials=trials)
    if result.best.as_fraction() > OPTIMAL_CLASSICAL_SUCCESS:
        raise VerificationError(f"Random search found {result.best}, above the classical bound 7/9")
    return result
