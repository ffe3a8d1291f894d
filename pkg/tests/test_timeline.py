import datetime as dt

import pytest
from hypothesis import given, strategies as st

from ftleval.timeline import (
    BadRow,
    BadTimestamp,
    MissingHeader,
    parse_instant,
    parse_timeline,
    serialize_timeline,
    slice_window,
)

HEADER = "datetime,timestamp_desc,source,source_long,message,parser,display_name,tag"


def make_csv(*rows):
    return HEADER + "\n" + "".join(row + "\n" for row in rows)


SIMPLE = make_csv(
    "2023-12-26T00:30:01.000000+00:00,Creation Time,FILE,File stat,plain message,filestat,NTFS:\\tmp\\a,-",
    '2023-12-26T00:30:02.000000+00:00,Content Modification Time,LOG,Log File,"quoted, with comma",syslog,/var/log/x,-',
)


def test_parse_basic_fields():
    timeline = parse_timeline(SIMPLE)
    assert timeline.header[0] == "datetime"
    assert len(timeline) == 2
    first = timeline.events[0]
    assert first.message == "plain message"
    assert first.parser == "filestat"
    assert first.instant == dt.datetime(2023, 12, 26, 0, 30, 1, tzinfo=dt.timezone.utc)
    assert timeline.events[1].message == "quoted, with comma"


def test_column_addressing_survives_reordering():
    text = "message,datetime\nhello there,2024-01-01T00:00:00+00:00\n"
    timeline = parse_timeline(text)
    event = timeline.events[0]
    assert event.message == "hello there"
    assert event.datetime == "2024-01-01T00:00:00+00:00"
    assert event.source == ""


def test_quoted_newline_spans_physical_lines():
    text = make_csv(
        '2023-12-26T00:30:01.000000+00:00,T,SRC,Long,"line one\nline two",parser,disp,-'
    )
    timeline = parse_timeline(text)
    assert len(timeline) == 1
    assert timeline.events[0].message == "line one\nline two"
    assert "\n" in timeline.events[0].raw_line


def test_round_trip_bytes():
    assert serialize_timeline(parse_timeline(SIMPLE)) == SIMPLE


def test_round_trip_without_trailing_newline():
    text = SIMPLE.rstrip("\n")
    assert serialize_timeline(parse_timeline(text)) == text


def test_round_trip_forged(default_result):
    timeline = parse_timeline(default_result.csv_text)
    assert not timeline.errors
    assert serialize_timeline(timeline) == default_result.csv_text


def test_file_order_preserved(default_result):
    timeline = parse_timeline(default_result.csv_text)
    raw = default_result.csv_text.splitlines()[1:]
    firsts = [event.raw_line.split("\n")[0] for event in timeline.events]
    # each event's first physical line appears in file order
    assert [line for line in raw if line in set(firsts)][: len(firsts)] == firsts


def test_missing_header():
    with pytest.raises(MissingHeader):
        parse_timeline("")
    with pytest.raises(MissingHeader):
        parse_timeline("foo,bar\n1,2\n")


def test_lenient_collects_bad_rows():
    text = make_csv(
        "2023-12-26T00:30:01.000000+00:00,T,S,SL,msg,p,d,-",
        "only,three,fields",
        "not-a-date,T,S,SL,msg,p,d,-",
    )
    timeline = parse_timeline(text)
    assert len(timeline) == 1
    kinds = [type(e) for e in timeline.errors]
    assert kinds == [BadRow, BadTimestamp]
    assert timeline.errors[0].line_no == 3


def test_strict_raises_on_first_problem():
    text = make_csv("only,three,fields")
    with pytest.raises(BadRow):
        parse_timeline(text, strict=True)


def test_parse_instant_normalizes_to_utc():
    utc = parse_instant("2024-06-01T12:00:00Z")
    assert utc.tzinfo == dt.timezone.utc
    shifted = parse_instant("2024-06-01T14:30:00+02:30")
    assert shifted == dt.datetime(2024, 6, 1, 12, 0, tzinfo=dt.timezone.utc)
    with pytest.raises(ValueError):
        parse_instant("2024-06-01T12:00:00")


def test_slice_window_clips_and_keeps_order(default_timeline):
    window = slice_window(default_timeline, 10, 25)
    assert window.events == default_timeline.events[10:35]
    assert slice_window(default_timeline, 10_000, 5).events == []
    assert slice_window(default_timeline, -3, 2).events == default_timeline.events[:2]
    assert window.header is default_timeline.header


def test_slice_window_serializes_as_smaller_csv(default_timeline):
    window = slice_window(default_timeline, 0, 3)
    text = serialize_timeline(window)
    reparsed = parse_timeline(text)
    assert [e.raw_line for e in reparsed.events] == [
        e.raw_line for e in default_timeline.events[:3]
    ]


_field = st.text(
    alphabet=st.characters(whitelist_categories=("L", "N"), whitelist_characters=" .:-"),
    max_size=12,
)


@given(st.lists(st.tuples(_field, _field), max_size=6))
def test_round_trip_generated_rows(rows):
    import csv as csv_mod
    import io

    buffer = io.StringIO()
    writer = csv_mod.writer(buffer, lineterminator="\n")
    writer.writerow(["datetime", "message"])
    for message, extra in rows:
        writer.writerow(["2024-01-01T00:00:00+00:00", message + extra])
    text = buffer.getvalue()
    timeline = parse_timeline(text)
    assert not timeline.errors
    assert serialize_timeline(timeline) == text
