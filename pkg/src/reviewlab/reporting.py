"""Render metric reports and win-rate tables for humans and for regression logs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .arena import WinRateTable
from .metrics import MetricReport

# Column order mirrors the benchmark report layout.
_COLUMNS: tuple[tuple[str, str], ...] = (
    ("distinct4", "Distinct4"),
    ("inverse_self_bleu4", "InvSelfBLEU4"),
    ("rouge1_f1", "ROUGE-1"),
    ("rougeL_f1", "ROUGE-L"),
    ("spice_like", "SPICE"),
    ("sentiment_model", "SentModel"),
    ("sentiment_lexicon", "SentLexicon"),
    ("overall", "Overall"),
)

SORTABLE_COLUMNS = tuple(name for name, _ in _COLUMNS)


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[tuple[str, MetricReport], ...]
    sorted_by: str

    def as_dict(self) -> dict:
        return {
            "sorted_by": self.sorted_by,
            "rows": [
                {"model": label, **report.as_dict()} for label, report in self.rows
            ],
        }


def comparison_table(
    reports: Sequence[tuple[str, MetricReport]], sort_column: str = "overall"
) -> ComparisonTable:
    """Sort labeled reports descending by one column."""
    if not reports:
        raise ValueError("at least one report is required")
    if sort_column not in SORTABLE_COLUMNS:
        raise ValueError(f"unknown sort column {sort_column!r}")
    ordered = sorted(
        reports, key=lambda pair: (-getattr(pair[1], sort_column), pair[0])
    )
    return ComparisonTable(rows=tuple(ordered), sorted_by=sort_column)


def render_table(
    reports: Sequence[tuple[str, MetricReport]], sort_column: str = "overall"
) -> str:
    """Fixed-width text table of metric reports, two decimals per cell.

    Values format with round-half-even, matching how the scores are
    reported elsewhere; rendering the same reports always produces
    identical text.
    """
    table = comparison_table(reports, sort_column)
    label_width = max(len("Model"), *(len(label) for label, _ in table.rows))
    widths = [max(len(header), 8) for _, header in _COLUMNS]

    header_cells = ["Model".ljust(label_width)]
    header_cells += [header.rjust(width) for (_, header), width in zip(_COLUMNS, widths)]
    lines = ["  ".join(header_cells)]
    lines.append("-" * len(lines[0]))
    for label, report in table.rows:
        cells = [label.ljust(label_width)]
        for (field_name, _), width in zip(_COLUMNS, widths):
            cells.append(f"{getattr(report, field_name):.2f}".rjust(width))
        lines.append("  ".join(cells))
    return "\n".join(lines)


def render_win_rates(table: WinRateTable) -> str:
    """Fixed-width text summary of a tournament's win rates."""
    label_width = max(len("Model"), *(len(row.model) for row in table.rows))
    lines = [
        "  ".join(
            ["Model".ljust(label_width), "Wins".rjust(8), "Comparisons".rjust(12),
             "WinRate".rjust(8)]
        )
    ]
    lines.append("-" * len(lines[0]))
    for row in table.rows:
        lines.append(
            "  ".join(
                [
                    row.model.ljust(label_width),
                    f"{row.wins:.1f}".rjust(8),
                    str(row.comparisons).rjust(12),
                    f"{row.win_rate:.2f}".rjust(8),
                ]
            )
        )
    return "\n".join(lines)
