"""Keyword rules for flagging suspicious timeline rows.

A rule pairs an event label with a literal keyword.  Detection is a
case-sensitive substring test against the message column: every
(row, rule) hit becomes one detected event, in row order first and rule
order second, so one row can legitimately appear several times.
"""

import json
from dataclasses import asdict, dataclass

from .timeline import Timeline

__all__ = [
    "BadRuleFile",
    "KeywordRule",
    "DetectedEvent",
    "DEFAULT_RULES",
    "load_rules",
    "serialize_rules",
    "detect",
    "serialize_detections",
]


class BadRuleFile(ValueError):
    """The rules document is not a usable list of event/keyword pairs."""


@dataclass(frozen=True)
class KeywordRule:
    event: str
    keyword: str


@dataclass(frozen=True)
class DetectedEvent:
    datetime: str
    event: str
    keyword: str
    message: str


#: Rules matched to the artifacts the scenario generator can plant: a
#: prefetch program launch, the staged browser session (Bing search,
#: download, Google search, tutorial visit), the Edge process start,
#: and the recorded shutdown.
DEFAULT_RULES: tuple[KeywordRule, ...] = (
    KeywordRule(
        event="Registry launch with prefetch file",
        keyword="Prefetch [REGEDIT.EXE] was executed",
    ),
    KeywordRule(
        event="Bing search for Firefox installer",
        keyword="Mozilla Firefox download - Bing",
    ),
    KeywordRule(
        event="Google search for SQL injection",
        keyword="q=sql+injection",
    ),
    KeywordRule(
        event="Firefox installer downloaded",
        keyword="Firefox Installer.exe). Received:",
    ),
    KeywordRule(
        event="Edge browser process started",
        keyword="Strings: ['msedge.exe\" --no-startup-window",
    ),
    KeywordRule(
        event="System shutdown recorded",
        keyword="Control\\Windows] Shutdown Time",
    ),
    KeywordRule(
        event="W3Schools tutorial visited",
        keyword="Host: www.w3schools.com",
    ),
)


def _coerce_rule(item: object, index: int) -> KeywordRule:
    if not isinstance(item, dict):
        raise BadRuleFile(f"rule {index}: expected an object, got {type(item).__name__}")
    for key in ("event", "keyword"):
        value = item.get(key)
        if not isinstance(value, str) or not value:
            raise BadRuleFile(f"rule {index}: {key!r} must be a non-empty string")
    return KeywordRule(event=item["event"], keyword=item["keyword"])


def load_rules(text: str) -> list[KeywordRule]:
    """Parse a rules document: a JSON array of rules or a single rule."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadRuleFile(f"not valid JSON: {exc}") from exc
    if isinstance(document, dict):
        return [_coerce_rule(document, 0)]
    if isinstance(document, list):
        return [_coerce_rule(item, i) for i, item in enumerate(document)]
    raise BadRuleFile("rules document must be a JSON array or object")


def serialize_rules(rules: list[KeywordRule] | tuple[KeywordRule, ...]) -> str:
    return json.dumps([asdict(rule) for rule in rules], indent=2) + "\n"


def detect(timeline: Timeline, rules: list[KeywordRule]) -> list[DetectedEvent]:
    """All (row, rule) substring hits, row-major then rule order."""
    hits = []
    for event in timeline.events:
        for rule in rules:
            if rule.keyword in event.message:
                hits.append(
                    DetectedEvent(
                        datetime=event.datetime,
                        event=rule.event,
                        keyword=rule.keyword,
                        message=event.message,
                    )
                )
    return hits


def serialize_detections(detections: list[DetectedEvent]) -> str:
    """JSON array with the stable field order datetime, event, keyword, message."""
    return json.dumps([asdict(d) for d in detections], indent=2) + "\n"
