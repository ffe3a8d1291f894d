import random
import subprocess

import pytest

from ftleval import search
from ftleval.timeline import parse_timeline, serialize_timeline

PRESET_NAMES = (
    "registered-applications",
    "onedrive",
    "exe-files",
    "event-4616-plain",
    "event-4616-regex",
)


def system_grep(expression, csv_text, tmp_path):
    """grep -E against the serialized file with the header stripped."""
    body = csv_text.split("\n", 1)[1]
    target = tmp_path / "body.csv"
    target.write_text(body, encoding="utf-8")
    proc = subprocess.run(
        ["grep", "-E", "--", expression, str(target)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode in (0, 1), proc.stderr
    return proc.stdout


def test_preset_names_and_lookup():
    assert tuple(p.name for p in search.PRESET_PATTERNS) == PRESET_NAMES
    assert search.preset_pattern("onedrive").expression == r"(OneDrive|OneDrive\.exe)"
    with pytest.raises(KeyError):
        search.preset_pattern("nope")


def test_invalid_pattern():
    with pytest.raises(search.InvalidPattern):
        search.compile_pattern("([unclosed")


def test_presets_match_system_grep(default_result, tmp_path):
    timeline = parse_timeline(default_result.csv_text)
    for pattern in search.PRESET_PATTERNS:
        mine = "".join(line + "\n" for line in search.grep_timeline(timeline, pattern))
        theirs = system_grep(pattern.expression, default_result.csv_text, tmp_path)
        assert mine == theirs, pattern.name
        assert mine != "", f"preset {pattern.name} found nothing in the scenario"


def test_random_literal_patterns_match_system_grep(default_result, tmp_path):
    timeline = parse_timeline(default_result.csv_text)
    rng = random.Random(99)
    words = ["Windows", "chrome", "Time", "\\.exe", "file", "Reg(istry)?", "[Ee]vent"]
    for _ in range(15):
        expr = "|".join(rng.sample(words, rng.randint(1, 3)))
        pattern = search.compile_pattern(expr)
        mine = "".join(line + "\n" for line in search.grep_timeline(timeline, pattern))
        theirs = system_grep(expr, default_result.csv_text, tmp_path)
        assert mine == theirs, expr


def test_header_is_never_matched():
    text = "datetime,message\n2024-01-01T00:00:00+00:00,datetime mention\n"
    timeline = parse_timeline(text)
    hits = search.grep_timeline(timeline, search.compile_pattern("datetime"))
    assert hits == ["2024-01-01T00:00:00+00:00,datetime mention"]


def test_embedded_newline_matches_per_physical_line():
    text = (
        "datetime,message\n"
        '2024-01-01T00:00:00+00:00,"alpha line\nbeta line"\n'
    )
    timeline = parse_timeline(text)
    assert search.grep_timeline(timeline, search.compile_pattern("beta")) == ['beta line"']


def test_output_is_subsequence_of_input(default_result):
    timeline = parse_timeline(default_result.csv_text)
    data_lines = serialize_timeline(timeline).split("\n")[1:]
    hits = search.grep_timeline(timeline, search.compile_pattern("e"))
    it = iter(data_lines)
    assert all(line in it for line in hits)


def test_nonmatching_line_changes_nothing(default_result):
    base = parse_timeline(default_result.csv_text)
    pattern = search.preset_pattern("onedrive")
    before = search.grep_timeline(base, pattern)
    extra = default_result.csv_text + "2030-01-01T00:00:00+00:00,T,S,SL,innocuous,p,d,-\n"
    grown = parse_timeline(extra)
    assert search.grep_timeline(grown, pattern) == before


def test_normalize_text_policies():
    text = "a,  b,   c"
    assert search.normalize_text(text, "none") == text
    assert search.normalize_text(text, "collapse-spaces") == "a, b, c"
    assert search.normalize_text(text, "strip-commas") == "a  b   c"
    assert search.normalize_text(text, "both") == "a b c"
    with pytest.raises(ValueError):
        search.normalize_text(text, "tabs")
