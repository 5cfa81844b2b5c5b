"""Assemble per-response metric records into samples, run the statistics
engine, and render rank matrices, change tables and raw dumps.

Rendering is byte-deterministic for fixed inputs: the run id is a hash
of the config snapshot and the records, rows are sorted, and no
timestamps appear in any output. Markdown cells follow the
"rank(score)" convention with a '*' suffix on lower-is-better metric
names; the printed score is the signed raw win-loss count, so the best
model on a lower-is-better metric shows e.g. "1(-3)". Cell shading is
encoded as markdown comments (<!--green-->, <!--red-->), not colors.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from . import stats
from .metrics import REGISTRY, orientation_of
from .stats import MetricSample, PairwiseResult, RankCell

logger = logging.getLogger(__name__)

REPORT_FILES = ("report.md", "ranks.csv", "pairwise.csv", "raw_metrics.jsonl", "missing.log")


@dataclass(frozen=True)
class RawMetricRecord:
    """One scored unit: a response, a topic, or a response batch."""

    model_id: str
    metric_id: str
    unit_id: str
    value: float


@dataclass(frozen=True)
class MissingEntry:
    model_id: str
    metric_id: str
    unit_id: str
    reason: str

    def line(self) -> str:
        return f"{self.model_id}\t{self.metric_id}\t{self.unit_id}\t{self.reason}"


@dataclass
class MetricRow:
    metric_id: str
    display_name: str
    orientation: str
    means: dict[str, float]
    counts: dict[str, int]
    cells: dict[str, RankCell] | None = None
    pairwise: list[PairwiseResult] = field(default_factory=list)
    levene_p: float | None = None
    welch: dict[str, float] | None = None
    note: str | None = None


@dataclass(frozen=True)
class ChangeCell:
    metric_id: str
    base_model: str
    target_model: str
    before: float | None
    after: float | None
    pct: float | None


@dataclass
class EvaluationReport:
    run_id: str
    config_snapshot: dict
    models: list[str]
    rows: dict[str, MetricRow]
    changes: list[ChangeCell]
    records: list[RawMetricRecord]
    missing: list[MissingEntry]
    alpha: float


def save_raw_records(records: list[RawMetricRecord], fh) -> None:
    for r in sorted(records, key=lambda r: (r.model_id, r.metric_id, r.unit_id)):
        fh.write(
            json.dumps(
                {
                    "model_id": r.model_id,
                    "metric_id": r.metric_id,
                    "unit_id": r.unit_id,
                    "value": r.value,
                },
                sort_keys=True,
            )
        )
        fh.write("\n")


def load_raw_records(fh) -> list[RawMetricRecord]:
    records = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        d = json.loads(line)
        records.append(
            RawMetricRecord(
                model_id=d["model_id"],
                metric_id=d["metric_id"],
                unit_id=d["unit_id"],
                value=float(d["value"]),
            )
        )
    return records


def samples_from_records(records: list[RawMetricRecord]) -> list[MetricSample]:
    grouped: dict[tuple[str, str], list[RawMetricRecord]] = {}
    for r in records:
        grouped.setdefault((r.model_id, r.metric_id), []).append(r)
    samples = []
    for (model_id, metric_id), recs in sorted(grouped.items()):
        values = tuple(r.value for r in sorted(recs, key=lambda r: r.unit_id))
        samples.append(
            MetricSample(
                model_id=model_id,
                metric_id=metric_id,
                orientation=orientation_of(metric_id),
                values=values,
            )
        )
    return samples


def _run_id(config_snapshot: dict, records: list[RawMetricRecord]) -> str:
    hasher = hashlib.sha256()
    hasher.update(json.dumps(config_snapshot, sort_keys=True).encode("utf-8"))
    buffer = io.StringIO()
    save_raw_records(records, buffer)
    hasher.update(buffer.getvalue().encode("utf-8"))
    return hasher.hexdigest()[:12]


def assemble(
    records: list[RawMetricRecord],
    config_snapshot: dict,
    alpha: float = 0.05,
    change_pairs: list[tuple[str, str]] | None = None,
    missing: list[MissingEntry] | None = None,
) -> EvaluationReport:
    """Group records, test every metric shared by >= 2 models, and rank.

    A metric held by fewer than two models is kept as a flagged row with
    means only; a statistics failure (e.g. a zero-variance group) flags
    the row instead of aborting the run.
    """
    missing = list(missing or [])
    samples = samples_from_records(records)
    models = sorted({s.model_id for s in samples})
    by_metric: dict[str, list[MetricSample]] = {}
    for s in samples:
        by_metric.setdefault(s.metric_id, []).append(s)

    rows: dict[str, MetricRow] = {}
    for metric_id in sorted(by_metric, key=_registry_order):
        group = by_metric[metric_id]
        info = REGISTRY[metric_id]
        usable = [s for s in group if len(s.values) >= 2]
        means = {s.model_id: float(np.mean(s.values)) for s in group}
        counts = {s.model_id: len(s.values) for s in group}
        row = MetricRow(
            metric_id=metric_id,
            display_name=info.display_name,
            orientation=info.orientation,
            means=means,
            counts=counts,
        )
        if len(usable) < 2:
            row.note = "excluded: metric present for fewer than 2 models"
            logger.warning("metric %s %s", metric_id, row.note)
            rows[metric_id] = row
            continue
        if len(usable) < len(models):
            absent = sorted(set(models) - {s.model_id for s in usable})
            row.note = f"partial: missing models {', '.join(absent)}"
        arrays = [np.asarray(s.values) for s in usable]
        labels = [s.model_id for s in usable]
        try:
            row.levene_p = stats.levene(arrays)["p_value"]
            row.welch = stats.welch_anova(arrays)
            row.pairwise = stats.games_howell(arrays, labels=labels, alpha=alpha)
            row.cells = stats.rank_models(row.pairwise, info.orientation, alpha=alpha)
        except ValueError as exc:
            row.note = f"not testable: {exc}"
            row.cells = None
            logger.warning("metric %s not testable: %s", metric_id, exc)
        rows[metric_id] = row

    changes = []
    for base, target in change_pairs or []:
        for metric_id in sorted(rows, key=_registry_order):
            row = rows[metric_id]
            before = row.means.get(base)
            after = row.means.get(target)
            pct = None
            if before is not None and after is not None:
                pct = stats.percent_change(before, after)
            changes.append(
                ChangeCell(
                    metric_id=metric_id,
                    base_model=base,
                    target_model=target,
                    before=before,
                    after=after,
                    pct=pct,
                )
            )

    return EvaluationReport(
        run_id=_run_id(config_snapshot, records),
        config_snapshot=config_snapshot,
        models=models,
        rows=rows,
        changes=changes,
        records=records,
        missing=missing,
        alpha=alpha,
    )


def _registry_order(metric_id: str) -> tuple[int, str]:
    ids = list(REGISTRY)
    return (ids.index(metric_id) if metric_id in ids else len(ids), metric_id)


def _g17(x: float) -> str:
    return format(x, ".17g")


def metric_header(row: MetricRow) -> str:
    suffix = "*" if row.orientation == stats.LOWER_BETTER else ""
    return f"{row.display_name}{suffix}"


def rank_cell_text(row: MetricRow, model: str) -> str:
    """Table-style cell: "rank(score)"; an all-tied row collapses to "0"."""
    if row.cells is None or model not in (row.cells or {}):
        return "-"
    cells = row.cells
    if all(c.raw_score == 0 for c in cells.values()):
        return "0<!--red-->"
    cell = cells[model]
    text = f"{cell.rank}({cell.raw_score})"
    if cell.rank == 1:
        text += "<!--green-->"
    return text


def render_markdown(report: EvaluationReport) -> str:
    lines = [
        "# Evaluation report",
        "",
        f"- run_id: `{report.run_id}`",
        f"- alpha: {report.alpha}",
        f"- models: {', '.join(report.models)}",
        "",
        "Cells show rank(ranking score); the score is the signed count of",
        "significant pairwise wins minus losses on the raw scale, so the",
        "best model of a lower-is-better metric (marked *) carries a",
        "negative score. A bare 0 row means no pair reached significance.",
        "",
        "## Rank matrix",
        "",
    ]
    header = "| Metric | " + " | ".join(report.models) + " |"
    lines.append(header)
    lines.append("|" + "---|" * (len(report.models) + 1))
    for metric_id, row in report.rows.items():
        cells = [rank_cell_text(row, m) for m in report.models]
        lines.append(f"| {metric_header(row)} | " + " | ".join(cells) + " |")
    lines += ["", "## Aggregate means", ""]
    lines.append(header)
    lines.append("|" + "---|" * (len(report.models) + 1))
    for metric_id, row in report.rows.items():
        cells = [
            f"{row.means[m]:.2f}" if m in row.means else "-" for m in report.models
        ]
        lines.append(f"| {metric_header(row)} | " + " | ".join(cells) + " |")
    if report.changes:
        pairs = sorted({(c.base_model, c.target_model) for c in report.changes})
        lines += ["", "## Percentage change", ""]
        pair_headers = [f"{b} -> {t} (%)" for b, t in pairs]
        lines.append("| Metric | " + " | ".join(pair_headers) + " |")
        lines.append("|" + "---|" * (len(pairs) + 1))
        by_key = {(c.metric_id, c.base_model, c.target_model): c for c in report.changes}
        for metric_id, row in report.rows.items():
            cells = []
            for b, t in pairs:
                change = by_key.get((metric_id, b, t))
                cells.append("-" if change is None or change.pct is None else f"{change.pct:.2f}")
            lines.append(f"| {metric_header(row)} | " + " | ".join(cells) + " |")
    flagged = [(m, row.note) for m, row in report.rows.items() if row.note]
    lines += ["", "## Flags and missing data", ""]
    if not flagged and not report.missing:
        lines.append("none")
    for metric_id, note in flagged:
        lines.append(f"- {metric_id}: {note}")
    if report.missing:
        lines.append(f"- missing records: {len(report.missing)} (see missing.log)")
    lines += ["", "## Config snapshot", "", "```json"]
    lines.append(json.dumps(report.config_snapshot, sort_keys=True, indent=2))
    lines += ["```", ""]
    return "\n".join(lines)


def render_ranks_csv(report: EvaluationReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["metric_id", "model_id", "rank", "raw_score", "oriented_score", "mean", "n", "note"]
    )
    for metric_id, row in report.rows.items():
        for model in report.models:
            if model not in row.means:
                continue
            cell = (row.cells or {}).get(model)
            writer.writerow(
                [
                    metric_id,
                    model,
                    cell.rank if cell else "",
                    cell.raw_score if cell else "",
                    cell.oriented_score if cell else "",
                    _g17(row.means[model]),
                    row.counts[model],
                    row.note or "",
                ]
            )
    return buffer.getvalue()


def render_pairwise_csv(report: EvaluationReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        [
            "metric_id",
            "model_a",
            "model_b",
            "mean_diff",
            "p_value",
            "hedges_g",
            "significant",
            "df",
            "ci_low",
            "ci_high",
        ]
    )
    for metric_id, row in report.rows.items():
        for pair in row.pairwise:
            writer.writerow(
                [
                    metric_id,
                    pair.model_a,
                    pair.model_b,
                    _g17(pair.mean_diff),
                    _g17(pair.p_value),
                    _g17(pair.hedges_g),
                    int(pair.significant),
                    _g17(pair.df),
                    _g17(pair.ci_low),
                    _g17(pair.ci_high),
                ]
            )
    return buffer.getvalue()


def render(report: EvaluationReport, out_dir: str) -> dict[str, str]:
    """Write the full report directory; returns {filename: path}."""
    os.makedirs(out_dir, exist_ok=True)
    outputs = {}

    def _write(name: str, text: str) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        outputs[name] = path

    _write("report.md", render_markdown(report))
    _write("ranks.csv", render_ranks_csv(report))
    _write("pairwise.csv", render_pairwise_csv(report))
    buffer = io.StringIO()
    save_raw_records(report.records, buffer)
    _write("raw_metrics.jsonl", buffer.getvalue())
    missing_lines = "".join(f"{m.line()}\n" for m in report.missing)
    _write("missing.log", missing_lines)
    return outputs
