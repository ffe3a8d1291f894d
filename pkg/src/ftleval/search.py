"""Line-oriented pattern search over timeline CSV text.

Matching mirrors ``grep -E`` run against the serialized CSV file with
the header excluded: a physical line is returned verbatim whenever the
pattern matches anywhere in it.  Records with quoted embedded newlines
are therefore matched per physical line, just as grep would see them.
"""

import re
from dataclasses import dataclass

from .timeline import Timeline

__all__ = [
    "InvalidPattern",
    "SearchPattern",
    "compile_pattern",
    "PRESET_PATTERNS",
    "preset_pattern",
    "grep_timeline",
    "normalize_text",
]

NORMALIZATION_POLICIES = ("none", "collapse-spaces", "strip-commas", "both")


class InvalidPattern(ValueError):
    """The expression does not compile as a regular expression."""


@dataclass(frozen=True)
class SearchPattern:
    expression: str
    compiled: re.Pattern
    name: str | None = None
    purpose: str | None = None


def compile_pattern(
    expression: str, name: str | None = None, purpose: str | None = None
) -> SearchPattern:
    """Compile an extended-regular-expression style pattern.

    The supported grammar (literals, classes, alternation, anchors, and
    the ``\\b`` word boundary) behaves identically under ``grep -E`` and
    Python's ``re``, which keeps the system grep oracle applicable.
    """
    try:
        compiled = re.compile(expression)
    except re.error as exc:
        raise InvalidPattern(f"{expression!r}: {exc}") from exc
    return SearchPattern(expression=expression, compiled=compiled, name=name, purpose=purpose)


#: Ready-made searches used for ground truth generation, one per study target:
#: registry application registrations, OneDrive activity, any executable path,
#: and the 4616 time-change event in plain and anchored regex form.
PRESET_PATTERNS: tuple[SearchPattern, ...] = (
    compile_pattern(
        "RegisteredApplications",
        name="registered-applications",
        purpose="obtain events related to registered applications in the Windows registry",
    ),
    compile_pattern(
        r"(OneDrive|OneDrive\.exe)",
        name="onedrive",
        purpose="find events related to the Microsoft OneDrive application",
    ),
    compile_pattern(
        r"\b[A-Za-z0-9_\-\\:.]+\.exe\b",
        name="exe-files",
        purpose="get all entries related to executable files (.exe)",
    ),
    compile_pattern(
        "4616 /",
        name="event-4616-plain",
        purpose="find Windows event ID 4616, which relates to system time changes, "
        "without using a regex",
    ),
    compile_pattern(
        r"\[4616 / 0x1208\].*Microsoft-Windows-Security-Auditing.*svchost.exe",
        name="event-4616-regex",
        purpose="find Windows event ID 4616 with a regex",
    ),
)


def preset_pattern(name: str) -> SearchPattern:
    for pattern in PRESET_PATTERNS:
        if pattern.name == name:
            return pattern
    known = ", ".join(p.name or "?" for p in PRESET_PATTERNS)
    raise KeyError(f"unknown preset {name!r}; choose one of: {known}")


def grep_timeline(timeline: Timeline, pattern: SearchPattern) -> list[str]:
    """Return every matching physical data line, in file order.

    The header line never participates.  Lines are returned exactly as
    they appear in the serialized CSV.
    """
    matches = []
    for event in timeline.events:
        for line in event.raw_line.split("\n"):
            if pattern.compiled.search(line):
                matches.append(line)
    return matches


def normalize_text(text: str, policy: str = "none") -> str:
    """Apply a whitespace/comma normalization policy before scoring."""
    if policy not in NORMALIZATION_POLICIES:
        raise ValueError(f"unknown normalization policy {policy!r}")
    if policy in ("collapse-spaces", "both"):
        text = re.sub(r" {2,}", " ", text)
    if policy in ("strip-commas", "both"):
        text = text.replace(",", "")
    return text
