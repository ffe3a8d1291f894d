"""Reconstruction of high-level events from low-level timeline rows.

Eight analyzers cover three categories: web activity (Google search,
Bing search, web visit), Windows system events (last shutdown, process
creation, program opened), and user activity (file download, recent
file access).  Each analyzer pairs a parser-name filter with one or
more message patterns; a matching row becomes one high-level event
carrying the trigger row, up to five rows of context on either side,
and key attributes pulled out of the message text.
"""

import datetime as dt
import json
import re
from dataclasses import asdict, dataclass
from typing import Callable
from urllib.parse import unquote_plus

from .timeline import LowLevelEvent, Timeline

__all__ = [
    "UnknownEventType",
    "Extractor",
    "Matcher",
    "EventTypeSpec",
    "HighLevelEvent",
    "list_analyzers",
    "analyzer_for",
    "gather_context",
    "summarize",
    "serialize_summary",
]

CONTEXT_BEFORE = 5
CONTEXT_AFTER = 5


class UnknownEventType(KeyError):
    """The requested event type matches no registered analyzer."""


@dataclass(frozen=True)
class Extractor:
    """One keys entry: a label plus the capture group that feeds it."""

    label: str
    group: str
    transform: Callable[[str], str] | None = None


@dataclass(frozen=True)
class Matcher:
    """A message pattern with its extractors and description template.

    ``excludes`` veto a match; they keep overlapping analyzers (for
    example web visit versus the more specific searches and downloads)
    disjoint on the same row.
    """

    pattern: re.Pattern
    extractors: tuple[Extractor, ...]
    description_template: str
    excludes: tuple[re.Pattern, ...] = ()

    def match(self, message: str) -> re.Match | None:
        found = self.pattern.search(message)
        if found is None:
            return None
        if any(ex.search(message) for ex in self.excludes):
            return None
        return found


@dataclass(frozen=True)
class EventTypeSpec:
    name: str
    slug: str
    category: str
    parser_filter: re.Pattern
    matchers: tuple[Matcher, ...]


@dataclass(frozen=True)
class HighLevelEvent:
    """One reconstructed event, serialized with exactly this field order."""

    id: int
    date_time_min: str
    date_time_max: str
    evidence_source: str
    type: str
    description: str
    category: str
    plugin: str
    files: str
    keys: dict
    supporting: list
    trigger: dict


_GOOGLE_SEARCH = re.compile(
    r"(?P<url>https?://www\.google\.[a-z.]+/search\?\S*?\bq=(?P<query>[^&\s]+)\S*)"
)
_BING_SEARCH = re.compile(
    r"(?P<url>https?://www\.bing\.com/search\?\S*?\bq=(?P<query>[^&\s]+)\S*)"
)
_DOWNLOAD = re.compile(
    r"^(?P<url>https?://\S+) \((?P<path>[^)]+)\)\. "
    r"Received: (?P<received>\d+) bytes out of: (?P<total>\d+) bytes\."
)

_ANALYZERS: tuple[EventTypeSpec, ...] = (
    EventTypeSpec(
        name="Google Search",
        slug="google-search",
        category="Web",
        parser_filter=re.compile(r"history|webhist|msiecf", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=_GOOGLE_SEARCH,
                extractors=(
                    Extractor("Search query", "query", unquote_plus),
                    Extractor("URL", "url"),
                ),
                description_template="Google search for '{query}'",
            ),
        ),
    ),
    EventTypeSpec(
        name="Bing Search",
        slug="bing-search",
        category="Web",
        parser_filter=re.compile(r"history|webhist|msiecf", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=_BING_SEARCH,
                extractors=(
                    Extractor("Search query", "query", unquote_plus),
                    Extractor("URL", "url"),
                ),
                description_template="Bing search for '{query}'",
            ),
        ),
    ),
    EventTypeSpec(
        name="Web Visit",
        slug="web-visit",
        category="Web",
        parser_filter=re.compile(r"history|webhist|msiecf", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=re.compile(r"^(?P<url>https?://\S+)"),
                extractors=(Extractor("URL", "url"),),
                description_template="Web visit to '{url}'",
                excludes=(_GOOGLE_SEARCH, _BING_SEARCH, _DOWNLOAD),
            ),
        ),
    ),
    EventTypeSpec(
        name="Last Shutdown",
        slug="last-shutdown",
        category="Windows",
        parser_filter=re.compile(r"winreg", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=re.compile(
                    r"\[(?P<regkey>HKEY_LOCAL_MACHINE\\System\\[^\]]*Control\\Windows)\]"
                    r" Shutdown Time"
                ),
                extractors=(Extractor("Registry key", "regkey"),),
                description_template="Windows last shutdown",
            ),
        ),
    ),
    EventTypeSpec(
        name="Process Creation",
        slug="process-creation",
        category="Windows",
        parser_filter=re.compile(r"winevtx", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=re.compile(
                    r"\[(?P<event_id>9707) / (?P<event_hex>0x25eb)\]"
                    r".*Source Name: Microsoft-Windows-Shell-Core"
                    r".*Strings: \['(?P<exe>[^'\"\s\]]+)"
                ),
                extractors=(
                    Extractor("Windows Event ID", "event_id"),
                    Extractor("Windows Event ID (hex)", "event_hex"),
                    Extractor("Executable name", "exe"),
                ),
                description_template="Process creation of '{exe}'",
            ),
            Matcher(
                pattern=re.compile(
                    r"\[(?P<event_id>4688) / (?P<event_hex>0x1250)\]"
                    r".*New Process Name: (?P<path>[A-Za-z]:\\\S*\\(?P<exe>[^\s\\]+\.exe))"
                ),
                extractors=(
                    Extractor("Windows Event ID", "event_id"),
                    Extractor("Windows Event ID (hex)", "event_hex"),
                    Extractor("Executable name", "exe"),
                    Extractor("Executable path", "path"),
                ),
                description_template="Process creation of '{exe}'",
            ),
        ),
    ),
    EventTypeSpec(
        name="Program Opened",
        slug="program-opened",
        category="Windows",
        parser_filter=re.compile(r"prefetch", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=re.compile(
                    r"Prefetch \[(?P<exe>[^\]]+)\] was executed"
                    r" - run count (?P<run_count>\d+)"
                ),
                extractors=(
                    Extractor("Executable name", "exe"),
                    Extractor("Run count", "run_count"),
                ),
                description_template="Program '{exe}' was opened",
            ),
        ),
    ),
    EventTypeSpec(
        name="File Download",
        slug="file-download",
        category="User activity",
        parser_filter=re.compile(r"history|webhist|downloads", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=_DOWNLOAD,
                extractors=(
                    Extractor("Source URL", "url"),
                    Extractor("Saved to", "path"),
                ),
                description_template="File download of '{path}'",
            ),
        ),
    ),
    EventTypeSpec(
        name="Recent File Access",
        slug="recent-file-access",
        category="User activity",
        parser_filter=re.compile(r"lnk", re.IGNORECASE),
        matchers=(
            Matcher(
                pattern=re.compile(r"Local path: (?P<path>\S+)"),
                extractors=(Extractor("File path", "path"),),
                description_template="Recent file access to '{path}'",
            ),
        ),
    ),
)


def list_analyzers() -> tuple[EventTypeSpec, ...]:
    """All analyzers, in their fixed registry (and documentation) order."""
    return _ANALYZERS


def analyzer_for(selector: str) -> EventTypeSpec:
    for spec in _ANALYZERS:
        if selector in (spec.slug, spec.name):
            return spec
    known = ", ".join(spec.slug for spec in _ANALYZERS)
    raise UnknownEventType(f"unknown event type {selector!r}; expected one of: {known}")


def _format_instant(instant: dt.datetime) -> str:
    as_utc = instant.astimezone(dt.timezone.utc)
    return as_utc.strftime("%Y-%m-%d %H:%M:%S.%f") + "+00:00"


def _reduce(event: LowLevelEvent) -> dict:
    return {
        "datetime": event.datetime,
        "message": event.message,
        "parser": event.parser,
    }


def gather_context(
    timeline: Timeline,
    index: int,
    before: int = CONTEXT_BEFORE,
    after: int = CONTEXT_AFTER,
) -> list[dict]:
    """Up to ``before`` + ``after`` rows around index, clipped at the ends.

    The trigger row itself is not part of its own context.
    """
    events = timeline.events
    if not 0 <= index < len(events):
        raise IndexError(f"row index {index} out of range")
    lower = max(0, index - before)
    window = events[lower:index] + events[index + 1 : index + 1 + after]
    return [_reduce(event) for event in window]


def _build_event(
    event_id: int,
    spec: EventTypeSpec,
    matcher: Matcher,
    match: re.Match,
    row: LowLevelEvent,
    context: list[dict],
) -> HighLevelEvent:
    raw_groups = {k: v for k, v in match.groupdict().items() if v is not None}
    values = dict(raw_groups)
    keys = {}
    for extractor in matcher.extractors:
        value = raw_groups.get(extractor.group, "")
        if extractor.transform is not None:
            value = extractor.transform(value)
        values[extractor.group] = value
        keys[extractor.label] = value
    stamp = _format_instant(row.instant)
    return HighLevelEvent(
        id=event_id,
        date_time_min=stamp,
        date_time_max=stamp,
        evidence_source=row.message,
        type=spec.name,
        description=matcher.description_template.format(**values),
        category=spec.category,
        plugin=row.parser,
        files=row.display_name,
        keys=keys,
        supporting=context,
        trigger=_reduce(row),
    )


def summarize(timeline: Timeline, selector: str = "all") -> list[HighLevelEvent]:
    """Run analyzers over the timeline and return high-level events.

    ``selector`` is either ``"all"`` or one event type (slug or display
    name).  Events are ordered by earliest timestamp with row position
    as tie-break, and ids are assigned 1..n in that final order.
    """
    if selector == "all":
        active = _ANALYZERS
    else:
        active = (analyzer_for(selector),)

    found = []
    for index, row in enumerate(timeline.events):
        for spec in active:
            if not spec.parser_filter.search(row.parser):
                continue
            for matcher in spec.matchers:
                match = matcher.match(row.message)
                if match is not None:
                    found.append((row.instant, index, spec, matcher, match))
                    break

    found.sort(key=lambda item: (item[0], item[1]))
    events = []
    for event_id, (_, index, spec, matcher, match) in enumerate(found, start=1):
        context = gather_context(timeline, index)
        events.append(
            _build_event(event_id, spec, matcher, match, timeline.events[index], context)
        )
    return events


def serialize_summary(events: list[HighLevelEvent]) -> str:
    """JSON object keyed "0", "1", ... in event order, two-space indent."""
    document = {str(i): asdict(event) for i, event in enumerate(events)}
    return json.dumps(document, indent=2) + "\n"
