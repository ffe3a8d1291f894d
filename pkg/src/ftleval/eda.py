"""Exploratory aggregation over timelines: activity per second and
timestamp_desc transition counts.

These views support pattern exploration (busy seconds, gaps, which
timestamp kinds follow which) and are not scored by the harness.
"""

import csv
import datetime as dt
import io
import json
from dataclasses import dataclass

from .timeline import Timeline

__all__ = [
    "SecondHistogram",
    "TransitionMatrix",
    "per_second_histogram",
    "transition_matrix",
    "histogram_to_json",
    "histogram_to_csv",
    "matrix_to_json",
    "matrix_to_csv",
    "render_histogram_svg",
]


@dataclass(frozen=True)
class SecondHistogram:
    """(hh:mm:ss label, count) per non-empty UTC second, in time order."""

    buckets: tuple[tuple[str, int], ...]

    def total(self) -> int:
        return sum(count for _, count in self.buckets)


@dataclass(frozen=True)
class TransitionMatrix:
    """counts[i][j] = times labels[i] was immediately followed by labels[j]."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


def per_second_histogram(timeline: Timeline) -> SecondHistogram:
    """Bucket events by their UTC timestamp truncated to the second.

    Seconds with no events are omitted.  Buckets are keyed by the full
    truncated instant, so a timeline spanning more than a day cannot
    fold distinct seconds together even though labels repeat.
    """
    counts: dict[dt.datetime, int] = {}
    for event in timeline.events:
        second = event.instant.replace(microsecond=0)
        counts[second] = counts.get(second, 0) + 1
    buckets = tuple(
        (second.strftime("%H:%M:%S"), counts[second]) for second in sorted(counts)
    )
    return SecondHistogram(buckets=buckets)


def transition_matrix(timeline: Timeline) -> TransitionMatrix:
    """Count consecutive timestamp_desc pairs in file order.

    Labels appear in order of first appearance.  A timeline with n
    events yields exactly n - 1 transitions (0 for empty or singleton).
    """
    labels: list[str] = []
    index: dict[str, int] = {}
    for event in timeline.events:
        if event.timestamp_desc not in index:
            index[event.timestamp_desc] = len(labels)
            labels.append(event.timestamp_desc)
    size = len(labels)
    counts = [[0] * size for _ in range(size)]
    for first, second in zip(timeline.events, timeline.events[1:]):
        counts[index[first.timestamp_desc]][index[second.timestamp_desc]] += 1
    return TransitionMatrix(
        labels=tuple(labels), counts=tuple(tuple(row) for row in counts)
    )


def histogram_to_json(histogram: SecondHistogram) -> str:
    buckets = [{"second": label, "count": count} for label, count in histogram.buckets]
    return json.dumps({"buckets": buckets, "total": histogram.total()}, indent=2) + "\n"


def histogram_to_csv(histogram: SecondHistogram) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["second", "count"])
    for label, count in histogram.buckets:
        writer.writerow([label, count])
    return out.getvalue()


def matrix_to_json(matrix: TransitionMatrix) -> str:
    document = {
        "labels": list(matrix.labels),
        "counts": [list(row) for row in matrix.counts],
        "total": matrix.total(),
    }
    return json.dumps(document, indent=2) + "\n"


def matrix_to_csv(matrix: TransitionMatrix) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([""] + list(matrix.labels))
    for label, row in zip(matrix.labels, matrix.counts):
        writer.writerow([label] + list(row))
    return out.getvalue()


def render_histogram_svg(
    histogram: SecondHistogram, width: int = 900, height: int = 320
) -> str:
    """A dependency-free bar chart with hh:mm:ss labels on the x axis.

    The output is plain SVG text and is byte-deterministic for a given
    histogram, which keeps replay artifacts reproducible.
    """
    margin_left, margin_bottom, margin_top = 50, 60, 20
    plot_w = width - margin_left - 10
    plot_h = height - margin_top - margin_bottom
    buckets = histogram.buckets
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if buckets:
        peak = max(count for _, count in buckets)
        slot = plot_w / len(buckets)
        bar_w = max(1.0, slot * 0.8)
        label_step = max(1, len(buckets) // 12)
        for i, (label, count) in enumerate(buckets):
            bar_h = plot_h * count / peak
            x = margin_left + i * slot
            y = margin_top + plot_h - bar_h
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{bar_h:.2f}" fill="steelblue"/>'
            )
            if i % label_step == 0:
                tx = x + bar_w / 2
                ty = margin_top + plot_h + 12
                parts.append(
                    f'<text x="{tx:.2f}" y="{ty:.2f}" font-size="9" '
                    f'text-anchor="start" transform="rotate(45 {tx:.2f} {ty:.2f})">'
                    f"{label}</text>"
                )
        parts.append(
            f'<text x="10" y="{margin_top + 10}" font-size="10">max {peak}</text>'
        )
    axis_y = margin_top + plot_h
    parts.append(
        f'<line x1="{margin_left}" y1="{axis_y}" x2="{width - 10}" y2="{axis_y}" '
        'stroke="black"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
