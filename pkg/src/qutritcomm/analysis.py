"""Per-setting statistics and campaign aggregates."""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from .exceptions import AnalysisError
from .protocol_engine import Protocol, qter_from_counts
from .reference_data import OPTIMAL_CLASSICAL_SUCCESS, SECURITY_THRESHOLD

logger = logging.getLogger(__name__)

QTER_CEILING = 0.10


@dataclass(frozen=True)
class SettingReport:
    """Statistics for one setting.

    Attributes:
        setting: Setting label
        protocol: Protocol code
        counts: Detections per detector, D0 first
        expected: Expected detector, or None when the outcome is random
        dominant_detector: Detector with the most counts
        metric: "qter" or "success"
        value: QTER, success probability, or for random rounds 1 - max/total
        uncertainty: Binomial standard error of value
        below_security_threshold: QTER < 15.95% (QTER protocols only)
        beats_classical_bound: success > 7/9 (CCP only)
    """

    setting: str
    protocol: str
    counts: tuple
    expected: Optional[int]
    dominant_detector: int
    metric: str
    value: float
    uncertainty: float
    below_security_threshold: Optional[bool] = None
    beats_classical_bound: Optional[bool] = None

    @property
    def total(self) -> int:
        return int(sum(self.counts))

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["counts"] = list(self.counts)
        return data


def binomial_standard_error(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def report_setting(
    counts: Sequence[int],
    expected: Optional[int],
    protocol=Protocol.SECRET_SHARING,
    setting: str = "",
) -> SettingReport:
    """Summarize one setting's detector counts.

    For QTER protocols the value is the fraction of detections outside the
    expected detector. Rounds without an expected outcome report
    1 - (max detector count) / total. For CCP the value is the success
    probability counts[T] / total.

    Args:
        counts: Three detector counts (a SettingCounts is accepted too)
        expected: Expected detector, or None for random rounds
        protocol: Protocol the counts came from
        setting: Label copied into the report

    Raises:
        AnalysisError: If there are no detections
    """
    counts = tuple(int(c) for c in getattr(counts, "counts", counts))
    total = sum(counts)
    if total <= 0:
        raise AnalysisError(f"Setting {setting or '?'} has no detections")
    protocol = Protocol.parse(protocol)
    dominant = max(range(3), key=lambda k: counts[k])

    below = beats = None
    if protocol is Protocol.CCP:
        if expected is None:
            raise AnalysisError("CCP settings always have an expected outcome")
        metric = "success"
        value = counts[expected] / total
        beats = value > float(OPTIMAL_CLASSICAL_SUCCESS)
    else:
        metric = "qter"
        if expected is None:
            value = 1.0 - counts[dominant] / total
        else:
            value = qter_from_counts(counts, expected)
        below = value < SECURITY_THRESHOLD

    return SettingReport(
        setting=setting,
        protocol=protocol.value,
        counts=counts,
        expected=expected,
        dominant_detector=dominant,
        metric=metric,
        value=value,
        uncertainty=binomial_standard_error(value, total),
        below_security_threshold=below,
        beats_classical_bound=beats,
    )


@dataclass
class ProtocolSummary:
    """Aggregate over the reports of one protocol."""

    protocol: str
    metric: str
    settings: int
    mean: float
    minimum: float
    maximum: float
    threshold_passes: int
    all_below_ceiling: Optional[bool] = None
    quantum_advantage: Optional[bool] = None
    random_settings: int = 0


@dataclass
class CampaignSummary:
    protocols: Dict[str, ProtocolSummary] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {name: asdict(summary) for name, summary in self.protocols.items()}


def campaign_summary(reports: Sequence[SettingReport]) -> CampaignSummary:
    """Aggregate reports per protocol.

    Rounds without an expected outcome are counted but left out of the
    statistics; a protocol with only such rounds aggregates over them.

    Raises:
        AnalysisError: If reports is empty
    """
    if not reports:
        raise AnalysisError("Cannot summarize an empty campaign")
    by_protocol: Dict[str, List[SettingReport]] = {}
    for report in reports:
        by_protocol.setdefault(report.protocol, []).append(report)

    summary = CampaignSummary()
    for protocol, group in by_protocol.items():
        scored = [r for r in group if r.expected is not None] or group
        values = [r.value for r in scored]
        if protocol == Protocol.CCP.value:
            passes = sum(bool(r.beats_classical_bound) for r in scored)
            extra = {"quantum_advantage": passes == len(scored)}
        else:
            passes = sum(bool(r.below_security_threshold) for r in scored)
            extra = {"all_below_ceiling": max(values) < QTER_CEILING}
        summary.protocols[protocol] = ProtocolSummary(
            protocol=protocol,
            metric=scored[0].metric,
            settings=len(group),
            mean=sum(values) / len(values),
            minimum=min(values),
            maximum=max(values),
            threshold_passes=passes,
            random_settings=len(group) - len([r for r in group if r.expected is not None]),
            **extra,
        )
    return summary


def format_percent(value: float) -> str:
    """Percentages are reported with two decimals."""
    return f"{100.0 * value:.2f}"
