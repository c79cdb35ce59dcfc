"""Per-setting phase shifts to program into the interferometer.

Relays (Bob, Charlie) apply the gate's phases directly. The distributor's
setup adds a global phase, so her angles are the same gate shifted until
the |2> entry is zero. Angles are reduced to [0, 2pi).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Tuple, Union

import numpy as np

from .protocol_engine import CcpInput, Protocol, TritPair, ccp_hardware_gate
from .qutrit_core import TWO_PI, PhaseGate

logger = logging.getLogger(__name__)

# Angles within this distance of 2pi are reported as 0.
_WRAP_TOLERANCE = 1e-9


class PartyRole(str, Enum):
    DISTRIBUTOR = "distributor"
    RELAY = "relay"


class Convention(str, Enum):
    """Operator ordering used to read a secret-sharing setting (x0, x1).

    MAIN_TEXT applies U^x0 V^x1. TABLE_S1 applies U^x1 V^x0, which is the
    ordering the hardware settings table was written in. The operator-named
    spellings x0-on-u and x0-on-v are accepted as aliases.
    """

    MAIN_TEXT = "main-text"
    TABLE_S1 = "table-s1"

    @classmethod
    def _missing_(cls, value):
        alias = _CONVENTION_ALIASES.get(str(value).lower())
        return cls(alias) if alias else None


_CONVENTION_ALIASES = {"x0-on-u": "main-text", "x0-on-v": "table-s1"}
CONVENTION_CHOICES = [c.value for c in Convention] + list(_CONVENTION_ALIASES)


@dataclass(frozen=True)
class EncodingRow:
    """Phase shifts on |0>, |1>, |2> for one setting and one party role."""

    setting: Tuple[int, ...]
    role: PartyRole
    phases: Tuple[float, float, float]

    @property
    def labels(self) -> Tuple[str, str, str]:
        return tuple(format_angle(p) for p in self.phases)


def reduce_angle(angle: float) -> float:
    reduced = float(np.mod(angle, TWO_PI))
    if TWO_PI - reduced < _WRAP_TOLERANCE or reduced < _WRAP_TOLERANCE:
        return 0.0
    return reduced


def format_angle(angle: float) -> str:
    """Render an angle as an exact multiple of pi with denominator dividing 9."""
    ninths = int(round(reduce_angle(angle) / (np.pi / 9.0)))
    if ninths == 0:
        return "0"
    ratio = Fraction(ninths, 9)
    numerator = "π" if ratio.numerator == 1 else f"{ratio.numerator}π"
    return numerator if ratio.denominator == 1 else f"{numerator}/{ratio.denominator}"


def relay_phases(gate: PhaseGate) -> Tuple[float, float, float]:
    return tuple(reduce_angle(p) for p in gate.phases)


def distributor_phases(gate: PhaseGate) -> Tuple[float, float, float]:
    """The gate times the global phase that zeroes the |2> entry."""
    offset = gate.phases[2]
    return tuple(reduce_angle(p - offset) for p in gate.phases)


def secret_sharing_gate(x0: int, x1: int, convention: Convention = Convention.MAIN_TEXT) -> PhaseGate:
    if Convention(convention) is Convention.TABLE_S1:
        x0, x1 = x1, x0
    return TritPair(x0, x1).gate()


def encoding_table(
    protocol: Union[Protocol, str],
    role: Union[PartyRole, str],
    convention: Union[Convention, str] = Convention.MAIN_TEXT,
) -> List[EncodingRow]:
    """Generate the phase-shift table for one protocol and one party role.

    Secret sharing and DBA share a table keyed by (x0, x1). CCP is keyed by S
    and always uses the hardware convention (0, 2piS/9, 4piS/9); it yields
    the same outcome statistics as U^(S/3) on every promise input.

    Args:
        protocol: ss, dba or ccp
        role: distributor (Alice) or relay (Bob and Charlie)
        convention: Operator ordering for secret-sharing settings

    Returns:
        List[EncodingRow]: Nine rows in setting order
    """
    protocol = Protocol.parse(protocol)
    role = PartyRole(role)
    convention = Convention(convention)
    to_phases = distributor_phases if role is PartyRole.DISTRIBUTOR else relay_phases

    rows = []
    if protocol is Protocol.CCP:
        for s in range(9):
            gate = ccp_hardware_gate(CcpInput(s).s)
            rows.append(EncodingRow(setting=(s,), role=role, phases=to_phases(gate)))
    else:
        for x0 in range(3):
            for x1 in range(3):
                gate = secret_sharing_gate(x0, x1, convention)
                rows.append(EncodingRow(setting=(x0, x1), role=role, phases=to_phases(gate)))
    logger.debug("Generated %d %s rows for %s", len(rows), role.value, protocol.value)
    return rows
