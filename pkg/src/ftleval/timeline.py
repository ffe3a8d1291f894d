"""Parsing and slicing of Plaso-style supertimeline CSV files.

The expected input is the CSV produced by psort's dynamic output: a
header line followed by one record per low-level event.  Parsing is
header-driven, so column order does not matter and only ``datetime`` and
``message`` are required.  Each event keeps the exact text of its CSV
record (``raw_line``) so that a parsed timeline can be re-serialized
byte for byte.
"""

import csv
import datetime as dt
import io
from dataclasses import dataclass, field, replace

__all__ = [
    "TimelineError",
    "MissingHeader",
    "BadRow",
    "BadTimestamp",
    "LowLevelEvent",
    "Timeline",
    "parse_instant",
    "parse_timeline",
    "read_timeline",
    "serialize_timeline",
    "slice_window",
]

#: Column names of the default psort dynamic output profile.
DEFAULT_COLUMNS = (
    "datetime",
    "timestamp_desc",
    "source",
    "source_long",
    "message",
    "parser",
    "display_name",
    "tag",
)

_REQUIRED_COLUMNS = ("datetime", "message")


class TimelineError(Exception):
    """Base class for timeline parsing problems."""


class MissingHeader(TimelineError):
    """The file has no usable header line."""


class BadRow(TimelineError):
    """A data record could not be parsed as a CSV row of the header's width."""

    def __init__(self, line_no: int, reason: str = "malformed row"):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class BadTimestamp(TimelineError):
    """A record's datetime field is not a valid ISO-8601 instant with offset."""

    def __init__(self, line_no: int, value: str):
        super().__init__(f"line {line_no}: bad timestamp {value!r}")
        self.line_no = line_no
        self.value = value


@dataclass(frozen=True)
class LowLevelEvent:
    """One timeline row.

    ``datetime`` holds the original column text; ``instant`` is the same
    moment parsed and normalized to UTC.  ``raw_line`` is the exact CSV
    record text (no trailing newline) and re-parses to the same fields.
    """

    datetime: str
    timestamp_desc: str
    source: str
    source_long: str
    message: str
    parser: str
    display_name: str
    tag: str
    raw_line: str
    instant: dt.datetime


@dataclass
class Timeline:
    """A parsed timeline: header, events, and any collected row errors."""

    header: list[str]
    events: list[LowLevelEvent]
    header_line: str = ""
    trailing_newline: bool = True
    errors: list[TimelineError] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)


def _split_records(text: str) -> list[tuple[int, str]]:
    """Split CSV text into physical records, honoring quoted newlines.

    Returns (1-based starting line number, record text) pairs.  A record
    may span several physical lines when a quoted field embeds newlines.
    """
    records = []
    buf = []
    in_quotes = False
    line_no = 1
    start_line = 1
    for ch in text:
        if ch == '"':
            in_quotes = not in_quotes
            buf.append(ch)
        elif ch == "\n" and not in_quotes:
            records.append((start_line, "".join(buf)))
            buf = []
            line_no += 1
            start_line = line_no
        else:
            if ch == "\n":
                line_no += 1
            buf.append(ch)
    if buf:
        records.append((start_line, "".join(buf)))
    return records


def _parse_fields(record: str) -> list[str]:
    rows = list(csv.reader(io.StringIO(record)))
    if len(rows) != 1:
        raise ValueError("record is not a single CSV row")
    return rows[0]


def parse_instant(text: str) -> dt.datetime:
    """Parse an ISO-8601 instant with offset, normalized to UTC.

    Raises ValueError for naive timestamps: a timeline row without an
    explicit offset cannot be placed on the global clock.
    """
    value = text.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    parsed = dt.datetime.fromisoformat(value)
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return parsed.astimezone(dt.timezone.utc)


def parse_timeline(text: str, strict: bool = False) -> Timeline:
    """Parse supertimeline CSV text.

    In lenient mode (default) malformed rows are rejected and recorded in
    ``Timeline.errors`` while parsing continues; ``strict=True`` raises on
    the first problem.  A missing or unusable header always raises.
    """
    records = _split_records(text)
    if not records:
        raise MissingHeader("empty input")
    header_start, header_line = records[0]
    try:
        header = _parse_fields(header_line)
    except ValueError as exc:
        raise MissingHeader(str(exc)) from exc
    if not header or any(name not in header for name in _REQUIRED_COLUMNS):
        raise MissingHeader(
            "header must name at least the datetime and message columns"
        )
    column_of = {name: header.index(name) for name in header}

    events: list[LowLevelEvent] = []
    errors: list[TimelineError] = []

    def fail(err: TimelineError) -> None:
        if strict:
            raise err
        errors.append(err)

    for line_no, record in records[1:]:
        if record == "":
            continue
        try:
            fields = _parse_fields(record)
        except ValueError:
            fail(BadRow(line_no))
            continue
        if len(fields) != len(header):
            fail(BadRow(line_no, f"expected {len(header)} fields, got {len(fields)}"))
            continue

        def col(name: str) -> str:
            index = column_of.get(name)
            return fields[index] if index is not None else ""

        datetime_text = col("datetime")
        try:
            instant = parse_instant(datetime_text)
        except ValueError:
            fail(BadTimestamp(line_no, datetime_text))
            continue
        events.append(
            LowLevelEvent(
                datetime=datetime_text,
                timestamp_desc=col("timestamp_desc"),
                source=col("source"),
                source_long=col("source_long"),
                message=col("message"),
                parser=col("parser"),
                display_name=col("display_name"),
                tag=col("tag"),
                raw_line=record,
                instant=instant,
            )
        )
    return Timeline(
        header=header,
        events=events,
        header_line=header_line,
        trailing_newline=text.endswith("\n"),
        errors=errors,
    )


def read_timeline(path: str, strict: bool = False) -> Timeline:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return parse_timeline(handle.read(), strict=strict)


def serialize_timeline(timeline: Timeline) -> str:
    """Reassemble the CSV text from the preserved raw record lines."""
    lines = [timeline.header_line]
    lines.extend(event.raw_line for event in timeline.events)
    text = "\n".join(lines)
    if timeline.trailing_newline:
        text += "\n"
    return text


def slice_window(timeline: Timeline, start: int, count: int = 2000) -> Timeline:
    """Return a timeline holding ``count`` events from offset ``start``.

    The window clips at both ends; out-of-range slices are empty, never
    an error.  The header is shared with the source timeline.
    """
    if start < 0:
        start = 0
    if count < 0:
        count = 0
    window = timeline.events[start : start + count]
    return replace(timeline, events=list(window), errors=[])
