"""Render campaign results and settings tables as CSV, JSON or Markdown."""

import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import yaml

from .analysis import CampaignSummary, SettingReport, format_percent
from .encoding_settings import EncodingRow
from .exceptions import ConfigurationError, OutputError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "markdown")

CAMPAIGN_CSV_HEADER = (
    "protocol",
    "setting",
    "expected",
    "d0",
    "d1",
    "d2",
    "total",
    "metric",
    "value_pct",
    "uncertainty_pct",
)

SETTINGS_CSV_HEADER = (
    "setting",
    "distributor_0",
    "distributor_1",
    "distributor_2",
    "relay_0",
    "relay_1",
    "relay_2",
)

SCHEMA_PATH = Path(__file__).parent / "schemas" / "campaign.schema.json"


def _expected_label(expected: Optional[int]) -> str:
    return "random" if expected is None else str(expected)


def _escape_cell(text: str) -> str:
    return text.replace("|", "\\|")


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ConfigurationError(f"Unknown output format '{fmt}' (choose from {', '.join(FORMATS)})")
    return fmt


def _front_matter(metadata: Dict) -> List[str]:
    yaml_content = yaml.dump(metadata, default_flow_style=False, allow_unicode=True, sort_keys=False)
    return ["---", yaml_content.rstrip(), "---", ""]


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def campaign_rows(reports: Sequence[SettingReport]) -> List[List[str]]:
    """One CSV row per setting, counts in detector order D0, D1, D2."""
    return [
        [
            r.protocol,
            r.setting,
            _expected_label(r.expected),
            *(str(c) for c in r.counts),
            str(r.total),
            r.metric,
            format_percent(r.value),
            format_percent(r.uncertainty),
        ]
        for r in reports
    ]


def campaign_document(
    reports: Sequence[SettingReport], summary: CampaignSummary, seed: int, config_echo: Dict
) -> Dict:
    """The JSON campaign object; percentages are rounded to two decimals."""
    settings = []
    for r in reports:
        settings.append(
            {
                "protocol": r.protocol,
                "setting": r.setting,
                "expected": r.expected,
                "counts": list(r.counts),
                "total": r.total,
                "dominant_detector": r.dominant_detector,
                "metric": r.metric,
                "value_pct": round(100.0 * r.value, 2),
                "uncertainty_pct": round(100.0 * r.uncertainty, 2),
                "below_security_threshold": r.below_security_threshold,
                "beats_classical_bound": r.beats_classical_bound,
            }
        )
    summary_doc = {}
    for name, s in summary.protocols.items():
        summary_doc[name] = {
            "metric": s.metric,
            "settings": s.settings,
            "random_settings": s.random_settings,
            "mean_pct": round(100.0 * s.mean, 2),
            "min_pct": round(100.0 * s.minimum, 2),
            "max_pct": round(100.0 * s.maximum, 2),
            "threshold_passes": s.threshold_passes,
            "all_below_ceiling": s.all_below_ceiling,
            "quantum_advantage": s.quantum_advantage,
        }
    return {"seed": seed, "config_echo": config_echo, "settings": settings, "summary": summary_doc}


def render_campaign(
    reports: Sequence[SettingReport],
    summary: CampaignSummary,
    fmt: str = "csv",
    seed: int = 0,
    config_echo: Optional[Dict] = None,
) -> str:
    """Render a campaign in the requested format.

    Args:
        reports: Per-setting reports in input order
        summary: Aggregate from campaign_summary
        fmt: csv, json or markdown
        seed: Master seed, echoed into JSON and Markdown output
        config_echo: Resolved run configuration, echoed into JSON and Markdown

    Returns:
        str: Document text ending in a newline
    """
    fmt = _check_format(fmt)
    config_echo = config_echo or {}
    if fmt == "csv":
        return _csv_text(CAMPAIGN_CSV_HEADER, campaign_rows(reports))
    if fmt == "json":
        document = campaign_document(reports, summary, seed, config_echo)
        return json.dumps(document, indent=2, ensure_ascii=False) + "\n"

    lines = _front_matter({"seed": seed, "settings": len(reports), "config": config_echo})
    lines.append("# Campaign Report")
    lines.append("")
    for name, s in summary.protocols.items():
        lines.append(f"## {name}")
        lines.append("")
        lines.append(
            f"{s.metric.upper()} mean {format_percent(s.mean)}%, "
            f"min {format_percent(s.minimum)}%, max {format_percent(s.maximum)}% "
            f"over {s.settings} settings ({s.threshold_passes} pass)"
        )
        lines.append("")
        lines.append("| Setting | Expected | D0 | D1 | D2 | Value [%] | ± [%] |")
        lines.append("|---------|----------|----|----|----|-----------|-------|")
        for r in reports:
            if r.protocol != name:
                continue
            d0, d1, d2 = r.counts
            lines.append(
                f"| {_escape_cell(r.setting)} | {_expected_label(r.expected)} | {d0} | {d1} | {d2} "
                f"| {format_percent(r.value)} | {format_percent(r.uncertainty)} |"
            )
        lines.append("")
    return "\n".join(lines)


def render_settings_table(
    distributor: Sequence[EncodingRow],
    relay: Sequence[EncodingRow],
    fmt: str = "csv",
    protocol: str = "",
    convention: str = "",
) -> str:
    """Render distributor and relay rows side by side, angles as multiples of pi."""
    fmt = _check_format(fmt)
    rows = []
    for d, r in zip(distributor, relay):
        label = ",".join(str(v) for v in d.setting)
        rows.append((label, d, r))

    if fmt == "csv":
        return _csv_text(SETTINGS_CSV_HEADER, [[label, *d.labels, *r.labels] for label, d, r in rows])
    if fmt == "json":
        document = {
            "protocol": protocol,
            "convention": convention,
            "rows": [
                {
                    "setting": list(d.setting),
                    "distributor": list(d.labels),
                    "relay": list(r.labels),
                    "distributor_rad": [round(p, 12) for p in d.phases],
                    "relay_rad": [round(p, 12) for p in r.phases],
                }
                for _, d, r in rows
            ],
        }
        return json.dumps(document, indent=2, ensure_ascii=False) + "\n"

    lines = _front_matter({"protocol": protocol, "convention": convention})
    lines.append("| Setting | Distributor | Relay |")
    lines.append("|---------|-------------|-------|")
    for label, d, r in rows:
        lines.append(f"| ({label}) | {', '.join(d.labels)} | {', '.join(r.labels)} |")
    return "\n".join(lines) + "\n"


def load_schema() -> Dict:
    """The published JSON schema for campaign documents."""
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


def write_output(content: str, out=None) -> Optional[Path]:
    """Write content to out, or to stdout when out is None.

    Raises:
        OutputError: If the file cannot be written
    """
    if out is None:
        sys.stdout.write(content)
        return None
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}", path=path) from e
    logger.info("Wrote %s", path)
    return path
