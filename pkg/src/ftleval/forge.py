"""Deterministic synthetic timeline scenarios with known ground truth.

A scenario plants rows that analyzers and keyword rules must find, mixes
in noise rows that are guaranteed inert, and emits the CSV together
with a truth bundle: the expected summary, the expected detections for
the default rule set, and the expected output of each preset search.
Truth is computed from the forge's own construction knowledge, so a
scenario acts as an oracle for the analysis code paths.

All randomness flows from the scenario seed through one ``random.Random``
instance; identical specs produce identical bytes.
"""

import csv
import datetime as dt
import io
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote_plus, urlsplit

from . import rules as rules_mod
from . import search, summarize
from .timeline import DEFAULT_COLUMNS, LowLevelEvent, parse_instant

__all__ = [
    "SpecError",
    "PlantedEvent",
    "ExtraRow",
    "Burst",
    "ScenarioSpec",
    "TruthBundle",
    "ForgeResult",
    "load_scenario",
    "default_scenario",
    "forge",
    "write_forge_outputs",
]


class SpecError(ValueError):
    """The scenario description is invalid or self-inconsistent."""


@dataclass(frozen=True)
class PlantedEvent:
    type: str
    time: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExtraRow:
    """A planted non-analyzer row that feeds one of the preset searches."""

    kind: str
    time: str


@dataclass(frozen=True)
class Burst:
    """Extra noise rows packed into a single second, for activity spikes."""

    time: str
    count: int


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int
    start: str
    end: str
    noise_rows: int = 0
    planted: tuple[PlantedEvent, ...] = ()
    extras: tuple[ExtraRow, ...] = ()
    bursts: tuple[Burst, ...] = ()


@dataclass(frozen=True)
class TruthBundle:
    summary: str
    detections: str
    grep: dict
    rules: str


@dataclass(frozen=True)
class ForgeResult:
    spec: ScenarioSpec
    csv_text: str
    truth: TruthBundle

    @property
    def csv_bytes(self) -> bytes:
        return self.csv_text.encode("utf-8")


@dataclass
class _Row:
    seq: int
    instant: dt.datetime
    timestamp_desc: str
    source: str
    source_long: str
    message: str
    parser: str
    display_name: str
    tag: str = "-"
    kind: str = "noise"

    @property
    def datetime_text(self) -> str:
        return self.instant.strftime("%Y-%m-%dT%H:%M:%S.%f") + "+00:00"

    def csv_line(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(
            [
                self.datetime_text,
                self.timestamp_desc,
                self.source,
                self.source_long,
                self.message,
                self.parser,
                self.display_name,
                self.tag,
            ]
        )
        return out.getvalue()[:-1]

    def reduced(self) -> dict:
        return {
            "datetime": self.datetime_text,
            "message": self.message,
            "parser": self.parser,
        }


_EDGE_HISTORY = (
    "NTFS:\\Users\\User\\AppData\\Local\\Microsoft\\Edge\\User Data\\Default\\History"
)

_PARAM_DEFAULTS: dict[str, dict] = {
    "google-search": {"query": "sql injection", "count": 2},
    "bing-search": {"query": "Mozilla Firefox download", "count": 1},
    "web-visit": {
        "url": "https://www.w3schools.com/sql/sql_injection.asp",
        "title": "SQL Injection",
        "count": 1,
    },
    "last-shutdown": {},
    "process-creation": {
        "variant": "9707",
        "exe": "msedge.exe",
        "computer": "WinDev2311Eval",
        "record_number": 2249,
    },
    "program-opened": {"exe": "REGEDIT.EXE", "run_count": 3, "hash": "246AC210"},
    "file-download": {
        "url": "https://download.mozilla.org/?product=firefox-latest-ssl&os=win64&lang=en-US",
        "path": "C:\\Users\\User\\Downloads\\Firefox Installer.exe",
        "size": 58552344,
    },
    "recent-file-access": {
        "path": "C:\\Users\\User\\Documents\\database-notes.txt",
        "size": 4096,
    },
}

_SHUTDOWN_KEY = "HKEY_LOCAL_MACHINE\\System\\ControlSet001\\Control\\Windows"


def _render_planted(planted: PlantedEvent, seq: int) -> tuple[_Row, dict, str]:
    """Build the row plus the truth keys dict and description text."""
    if planted.type not in _PARAM_DEFAULTS:
        known = ", ".join(sorted(_PARAM_DEFAULTS))
        raise SpecError(f"unknown planted type {planted.type!r}; expected one of: {known}")
    params = dict(_PARAM_DEFAULTS[planted.type])
    for key, value in planted.params.items():
        if key not in params:
            raise SpecError(f"{planted.type}: unknown param {key!r}")
        params[key] = value
    instant = _instant_or_error(planted.time, f"planted {planted.type}")

    web_row = dict(
        timestamp_desc="Last Visited Time",
        source="WEBHIST",
        source_long="Chrome History",
        parser="sqlite/chrome_66_history",
        display_name=_EDGE_HISTORY,
    )

    if planted.type == "google-search":
        url = f"https://www.google.com/search?q={quote_plus(params['query'])}"
        message = (
            f"{url} ({params['query']} - Google Search) [count: {params['count']}] "
            "Host: www.google.com (URL not typed directly - no typed count)"
        )
        keys = {"Search query": params["query"], "URL": url}
        description = f"Google search for '{params['query']}'"
        row = _Row(seq, instant, message=message, kind="planted", **web_row)
    elif planted.type == "bing-search":
        url = f"https://www.bing.com/search?q={quote_plus(params['query'])}&form=QBLH"
        message = (
            f"{url} ({params['query']} - Bing) [count: {params['count']}] "
            "Host: www.bing.com"
        )
        keys = {"Search query": params["query"], "URL": url}
        description = f"Bing search for '{params['query']}'"
        row = _Row(seq, instant, message=message, kind="planted", **web_row)
    elif planted.type == "web-visit":
        host = urlsplit(params["url"]).netloc
        message = (
            f"{params['url']} ({params['title']}) [count: {params['count']}] "
            f"Host: {host}"
        )
        keys = {"URL": params["url"]}
        description = f"Web visit to '{params['url']}'"
        row = _Row(seq, instant, message=message, kind="planted", **web_row)
    elif planted.type == "last-shutdown":
        message = f"[{_SHUTDOWN_KEY}] Shutdown Time"
        keys = {"Registry key": _SHUTDOWN_KEY}
        description = "Windows last shutdown"
        row = _Row(
            seq,
            instant,
            timestamp_desc="Last Shutdown Time",
            source="REG",
            source_long="Registry Key",
            message=message,
            parser="winreg/windows_shutdown",
            display_name="NTFS:\\Windows\\System32\\config\\SYSTEM",
            kind="planted",
        )
    elif planted.type == "process-creation":
        exe = params["exe"]
        if params["variant"] == "9707":
            message = (
                "[9707 / 0x25eb] Provider identifier: "
                "{30336ed4-e327-447c-9de0-51b652c86108} "
                "Source Name: Microsoft-Windows-Shell-Core "
                f"Strings: ['{exe}\" --no-startup-window --win-session-start'] "
                f"Computer Name: {params['computer']} "
                f"Record Number: {params['record_number']} Event Level: 4"
            )
            keys = {
                "Windows Event ID": "9707",
                "Windows Event ID (hex)": "0x25eb",
                "Executable name": exe,
            }
            display = (
                "NTFS:\\Windows\\System32\\winevt\\Logs\\"
                "Microsoft-Windows-Shell-Core%4Operational.evtx"
            )
        elif params["variant"] == "4688":
            path = f"C:\\Windows\\System32\\{exe}"
            message = (
                "[4688 / 0x1250] Provider identifier: "
                "{54849625-5478-4994-a5ba-3e3b0328c30d} "
                "Source Name: Microsoft-Windows-Security-Auditing "
                "Message string: A new process has been created. "
                f"New Process Name: {path} "
                f"Computer Name: {params['computer']} "
                f"Record Number: {params['record_number']} Event Level: 0"
            )
            keys = {
                "Windows Event ID": "4688",
                "Windows Event ID (hex)": "0x1250",
                "Executable name": exe,
                "Executable path": path,
            }
            display = "NTFS:\\Windows\\System32\\winevt\\Logs\\Security.evtx"
        else:
            raise SpecError(f"process-creation: unknown variant {params['variant']!r}")
        description = f"Process creation of '{exe}'"
        row = _Row(
            seq,
            instant,
            timestamp_desc="Content Modification Time",
            source="EVT",
            source_long="WinEVTX",
            message=message,
            parser="winevtx",
            display_name=display,
            kind="planted",
        )
    elif planted.type == "program-opened":
        exe = params["exe"]
        message = (
            f"Prefetch [{exe}] was executed - run count {params['run_count']} "
            f"path hints: \\WINDOWS\\{exe} hash: 0x{params['hash']} volume: 1 "
            "[serial number: 0x5CE1DF5A  device path: "
            "\\VOLUME{01da182ce1985a64-5ce1df5a}]"
        )
        keys = {"Executable name": exe, "Run count": str(params["run_count"])}
        description = f"Program '{exe}' was opened"
        row = _Row(
            seq,
            instant,
            timestamp_desc="Last Time Executed",
            source="LOG",
            source_long="WinPrefetch",
            message=message,
            parser="prefetch",
            display_name=f"NTFS:\\Windows\\Prefetch\\{exe}-{params['hash']}.pf",
            kind="planted",
        )
    elif planted.type == "file-download":
        size = params["size"]
        message = (
            f"{params['url']} ({params['path']}). "
            f"Received: {size} bytes out of: {size} bytes."
        )
        keys = {"Source URL": params["url"], "Saved to": params["path"]}
        description = f"File download of '{params['path']}'"
        row = _Row(
            seq,
            instant,
            timestamp_desc="File Downloaded",
            source="WEBHIST",
            source_long="Chrome History",
            message=message,
            parser="sqlite/chrome_66_history",
            display_name=_EDGE_HISTORY,
            kind="planted",
        )
    else:  # recent-file-access
        message = (
            f"[Empty description] File size: {params['size']} "
            "File attribute flags: 0x00000020 Drive type: 3 "
            "Drive serial number: 0x5ce1df5a "
            f"Local path: {params['path']}"
        )
        keys = {"File path": params["path"]}
        description = f"Recent file access to '{params['path']}'"
        base = params["path"].rsplit("\\", 1)[-1]
        row = _Row(
            seq,
            instant,
            timestamp_desc="Last Access Time",
            source="FILE",
            source_long="Windows Shortcut",
            message=message,
            parser="lnk",
            display_name=(
                "NTFS:\\Users\\User\\AppData\\Roaming\\Microsoft\\Windows\\Recent\\"
                f"{base}.lnk"
            ),
            kind="planted",
        )
    return row, keys, description


def _render_extra(extra: ExtraRow, seq: int) -> _Row:
    instant = _instant_or_error(extra.time, f"extra {extra.kind}")
    if extra.kind == "onedrive-activity":
        path = (
            "NTFS:\\Users\\User\\AppData\\Local\\Microsoft\\OneDrive\\settings\\"
            "PreSignInSettingsConfig.json"
        )
        return _Row(
            seq,
            instant,
            timestamp_desc="Metadata Modification Time",
            source="FILE",
            source_long="File stat",
            message=f"{path} Type: file",
            parser="filestat",
            display_name=path,
            kind="extra",
        )
    if extra.kind == "registered-applications":
        message = (
            "[HKEY_LOCAL_MACHINE\\Software\\RegisteredApplications] "
            "Value: Paint: [REG_SZ] SOFTWARE\\Microsoft\\Windows NT\\"
            "CurrentVersion\\Applications\\mspaint\\Capabilities"
        )
        return _Row(
            seq,
            instant,
            timestamp_desc="Content Modification Time",
            source="REG",
            source_long="Registry Key",
            message=message,
            parser="winreg/winreg_default",
            display_name="NTFS:\\Windows\\System32\\config\\SOFTWARE",
            kind="extra",
        )
    if extra.kind == "time-change-4616":
        message = (
            "[4616 / 0x1208] Provider identifier: "
            "{54849625-5478-4994-a5ba-3e3b0328c30d} "
            "Source Name: Microsoft-Windows-Security-Auditing "
            "Strings: ['S-1-5-19' 'LOCAL SERVICE' 'NT AUTHORITY' '0x3e5' "
            "'2023-12-26T00:00:01.000000000Z' '2023-12-26T00:00:02.000000000Z' "
            "'C:\\Windows\\System32\\svchost.exe'] "
            "Computer Name: WinDev2311Eval Record Number: 4731 Event Level: 0"
        )
        return _Row(
            seq,
            instant,
            timestamp_desc="Content Modification Time",
            source="EVT",
            source_long="WinEVTX",
            message=message,
            parser="winevtx",
            display_name="NTFS:\\Windows\\System32\\winevt\\Logs\\Security.evtx",
            kind="extra",
        )
    raise SpecError(f"unknown extra kind {extra.kind!r}")


_NOISE_PATHS = (
    "NTFS:\\Windows\\Logs\\CBS\\CBS.log",
    "NTFS:\\Windows\\System32\\drivers\\etc\\hosts",
    "NTFS:\\Windows\\servicing\\Sessions\\sessions.xml",
    "NTFS:\\Users\\User\\Documents\\meeting-notes.txt",
    "NTFS:\\Windows\\System32\\wbem\\repository\\objects.data",
    "NTFS:\\ProgramData\\Microsoft\\Windows\\wfp\\wfpdiag.etl",
    "NTFS:\\Users\\User\\AppData\\Roaming\\Mozilla\\profiles.ini",
    "NTFS:\\Windows\\SoftwareDistribution\\datastore\\datastore.edb",
    "NTFS:\\Windows\\System32\\LogFiles\\wmi\\rtbackup\\etwrtdiaglog.etl",
)

_NOISE_STAT_KINDS = (
    "Metadata Modification Time",
    "Creation Time",
    "Last Access Time",
    "Content Modification Time",
)

_NOISE_REGISTRY = (
    "[HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\Explorer\\"
    "Advanced] TaskbarAl: [REG_DWORD_LE] 0",
    "[HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\Themes\\"
    "Personalize] AppsUseLightTheme: [REG_DWORD_LE] 1",
    "[HKEY_LOCAL_MACHINE\\System\\ControlSet001\\Services\\Tcpip\\Parameters] "
    "Domain: [REG_SZ] (empty)",
)

_NOISE_EVTX = (
    "[7036 / 0x1b7c] Provider identifier: "
    "{555908d1-a6d7-4695-8e1e-26931d2012f4} Source Name: Service Control Manager "
    "Strings: ['Background Intelligent Transfer Service' 'running'] "
    "Computer Name: WinDev2311Eval Record Number: {n} Event Level: 4",
    "[16 / 0x0010] Provider identifier: "
    "{b675ec37-bdb6-4648-bc92-f3fdc74d3ca2} "
    "Source Name: Microsoft-Windows-Kernel-EventTracing Strings: "
    "['Eventlog-ForwardedEvents'] "
    "Computer Name: WinDev2311Eval Record Number: {n} Event Level: 4",
)

_NOISE_USN_NAMES = (
    "desktop.ini",
    "thumbcache_96.db",
    "iconcache_32.db",
    "AppCache133478.dat",
)


def _render_noise(rng: random.Random, instant: dt.datetime, seq: int) -> _Row:
    family = rng.randrange(4)
    if family == 0:
        path = rng.choice(_NOISE_PATHS)
        return _Row(
            seq,
            instant,
            timestamp_desc=rng.choice(_NOISE_STAT_KINDS),
            source="FILE",
            source_long="File stat",
            message=f"{path} Type: file",
            parser="filestat",
            display_name=path,
        )
    if family == 1:
        return _Row(
            seq,
            instant,
            timestamp_desc="Content Modification Time",
            source="REG",
            source_long="Registry Key",
            message=rng.choice(_NOISE_REGISTRY),
            parser="winreg/winreg_default",
            display_name="NTFS:\\Windows\\System32\\config\\SOFTWARE",
        )
    if family == 2:
        template = rng.choice(_NOISE_EVTX)
        return _Row(
            seq,
            instant,
            timestamp_desc="Content Modification Time",
            source="EVT",
            source_long="WinEVTX",
            message=template.replace("{n}", str(rng.randrange(1000, 9999))),
            parser="winevtx",
            display_name="NTFS:\\Windows\\System32\\winevt\\Logs\\System.evtx",
        )
    name = rng.choice(_NOISE_USN_NAMES)
    message = (
        f"{name} File reference: {rng.randrange(10000, 99999)}-2 "
        f"Parent file reference: {rng.randrange(10000, 99999)}-2 "
        "Update reason: USN_REASON_DATA_EXTEND, USN_REASON_FILE_CREATE"
    )
    return _Row(
        seq,
        instant,
        timestamp_desc="Metadata Modification Time",
        source="FILE",
        source_long="NTFS USN change",
        message=message,
        parser="usnjrnl",
        display_name="NTFS:\\$Extend\\$UsnJrnl:$J",
    )


def _instant_or_error(text: str, what: str) -> dt.datetime:
    try:
        return parse_instant(text)
    except ValueError as exc:
        raise SpecError(f"{what}: {exc}") from exc


def _analyzer_hits(row: _Row) -> list[str]:
    hits = []
    for spec in summarize.list_analyzers():
        if not spec.parser_filter.search(row.parser):
            continue
        if any(matcher.match(row.message) for matcher in spec.matchers):
            hits.append(spec.slug)
    return hits


def _check_inert(row: _Row, check_grep: bool) -> None:
    hits = _analyzer_hits(row)
    if hits:
        raise SpecError(f"{row.kind} row matches analyzers {hits}: {row.message!r}")
    for rule in rules_mod.DEFAULT_RULES:
        if rule.keyword in row.message:
            raise SpecError(f"{row.kind} row matches rule {rule.event!r}")
    if check_grep:
        line = row.csv_line()
        for pattern in search.PRESET_PATTERNS:
            if any(pattern.compiled.search(part) for part in line.split("\n")):
                raise SpecError(f"{row.kind} row matches preset {pattern.name!r}")


def _check_planted(row: _Row, intended: str, keys: dict, description: str) -> None:
    hits = _analyzer_hits(row)
    if hits != [intended]:
        raise SpecError(
            f"planted {intended} row matches analyzers {hits}: {row.message!r}"
        )
    spec = summarize.analyzer_for(intended)
    for matcher in spec.matchers:
        match = matcher.match(row.message)
        if match is None:
            continue
        built = summarize._build_event(1, spec, matcher, match, _as_event(row), [])
        if built.keys != keys or built.description != description:
            raise SpecError(
                f"planted {intended} row extracts {built.keys!r}/{built.description!r}, "
                f"expected {keys!r}/{description!r}"
            )
        return
    raise SpecError(f"planted {intended} row matches no matcher")


def _as_event(row: _Row) -> LowLevelEvent:
    return LowLevelEvent(
        datetime=row.datetime_text,
        timestamp_desc=row.timestamp_desc,
        source=row.source,
        source_long=row.source_long,
        message=row.message,
        parser=row.parser,
        display_name=row.display_name,
        tag=row.tag,
        raw_line=row.csv_line(),
        instant=row.instant,
    )


def load_scenario(text: str) -> ScenarioSpec:
    """Parse a scenario description from JSON."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SpecError("scenario must be a JSON object")
    try:
        span = document["time_span"]
        spec = ScenarioSpec(
            seed=int(document.get("seed", 0)),
            start=span["start"],
            end=span["end"],
            noise_rows=int(document.get("noise_rows", 0)),
            planted=tuple(
                PlantedEvent(
                    type=item["type"],
                    time=item["time"],
                    params=dict(item.get("params", {})),
                )
                for item in document.get("planted", [])
            ),
            extras=tuple(
                ExtraRow(kind=item["kind"], time=item["time"])
                for item in document.get("extras", [])
            ),
            bursts=tuple(
                Burst(time=item["time"], count=int(item["count"]))
                for item in document.get("bursts", [])
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"bad scenario document: {exc}") from exc
    return spec


def default_scenario(
    seed: int = 7, noise_rows: int = 500, bursts: tuple[Burst, ...] = ()
) -> ScenarioSpec:
    """The staged browsing-session story with one row per event type.

    Edge starts, a Bing search finds the Firefox installer, the download
    lands, a program launches from prefetch, a Google search and a
    tutorial visit follow, a document is reopened, and the machine shuts
    down.  Three extra rows feed the preset searches that the analyzer
    types never touch.
    """
    day = "2023-12-26T00:{}+00:00"
    return ScenarioSpec(
        seed=seed,
        start="2023-12-26T00:30:00+00:00",
        end="2023-12-26T00:50:00+00:00",
        noise_rows=noise_rows,
        planted=(
            PlantedEvent("process-creation", day.format("34:47.890403")),
            PlantedEvent("bing-search", day.format("35:12.337821")),
            PlantedEvent("file-download", day.format("36:41.082112")),
            PlantedEvent("program-opened", day.format("38:05.913444")),
            PlantedEvent("google-search", day.format("40:22.450917")),
            PlantedEvent("web-visit", day.format("41:57.228306")),
            PlantedEvent("recent-file-access", day.format("43:11.774029")),
            PlantedEvent("last-shutdown", day.format("49:58.001200")),
        ),
        extras=(
            ExtraRow("registered-applications", day.format("32:40.250000")),
            ExtraRow("onedrive-activity", day.format("33:20.500000")),
            ExtraRow("time-change-4616", day.format("39:30.640000")),
        ),
        bursts=bursts,
    )


def forge(spec: ScenarioSpec) -> ForgeResult:
    """Generate the scenario CSV and its truth bundle."""
    start = _instant_or_error(spec.start, "time_span.start")
    end = _instant_or_error(spec.end, "time_span.end")
    if end <= start:
        raise SpecError("time_span.end must be after time_span.start")
    if spec.noise_rows < 0:
        raise SpecError("noise_rows must not be negative")

    rng = random.Random(spec.seed)
    rows: list[_Row] = []
    planted_truth: dict[int, tuple[PlantedEvent, dict, str]] = {}

    for planted in spec.planted:
        row, keys, description = _render_planted(planted, seq=len(rows))
        if not start <= row.instant <= end:
            raise SpecError(f"planted {planted.type} time outside the scenario span")
        _check_planted(row, planted.type, keys, description)
        planted_truth[row.seq] = (planted, keys, description)
        rows.append(row)

    for extra in spec.extras:
        row = _render_extra(extra, seq=len(rows))
        if not start <= row.instant <= end:
            raise SpecError(f"extra {extra.kind} time outside the scenario span")
        _check_inert(row, check_grep=False)
        rows.append(row)

    span_us = int((end - start).total_seconds() * 1_000_000)
    for _ in range(spec.noise_rows):
        instant = start + dt.timedelta(microseconds=rng.randrange(span_us + 1))
        row = _render_noise(rng, instant, seq=len(rows))
        _check_inert(row, check_grep=True)
        rows.append(row)

    for burst in spec.bursts:
        if burst.count < 0:
            raise SpecError("burst count must not be negative")
        second = _instant_or_error(burst.time, "burst").replace(microsecond=0)
        if not start <= second <= end:
            raise SpecError("burst time outside the scenario span")
        for i in range(burst.count):
            instant = second + dt.timedelta(microseconds=(i * 997) % 1_000_000)
            row = _render_noise(rng, instant, seq=len(rows))
            _check_inert(row, check_grep=True)
            rows.append(row)

    rows.sort(key=lambda row: (row.instant, row.seq))

    header = io.StringIO()
    csv.writer(header, lineterminator="\n").writerow(list(DEFAULT_COLUMNS))
    lines = [header.getvalue()[:-1]]
    lines.extend(row.csv_line() for row in rows)
    csv_text = "\n".join(lines) + "\n"

    # Truth: high-level events in final file order, ids from 1.
    events = []
    for index, row in enumerate(rows):
        if row.seq not in planted_truth or row.kind != "planted":
            continue
        planted, keys, description = planted_truth[row.seq]
        analyzer = summarize.analyzer_for(planted.type)
        lower = max(0, index - summarize.CONTEXT_BEFORE)
        neighbors = rows[lower:index] + rows[index + 1 : index + 1 + summarize.CONTEXT_AFTER]
        stamp = row.instant.strftime("%Y-%m-%d %H:%M:%S.%f") + "+00:00"
        events.append(
            summarize.HighLevelEvent(
                id=len(events) + 1,
                date_time_min=stamp,
                date_time_max=stamp,
                evidence_source=row.message,
                type=analyzer.name,
                description=description,
                category=analyzer.category,
                plugin=row.parser,
                files=row.display_name,
                keys=keys,
                supporting=[r.reduced() for r in neighbors],
                trigger=row.reduced(),
            )
        )
    summary_text = summarize.serialize_summary(events)

    detections = []
    for row in rows:
        for rule in rules_mod.DEFAULT_RULES:
            if rule.keyword in row.message:
                detections.append(
                    rules_mod.DetectedEvent(
                        datetime=row.datetime_text,
                        event=rule.event,
                        keyword=rule.keyword,
                        message=row.message,
                    )
                )
    detections_text = rules_mod.serialize_detections(detections)

    grep_truth = {}
    for pattern in search.PRESET_PATTERNS:
        matched = []
        for row in rows:
            for part in row.csv_line().split("\n"):
                if pattern.compiled.search(part):
                    matched.append(part)
        grep_truth[pattern.name] = "".join(part + "\n" for part in matched)

    truth = TruthBundle(
        summary=summary_text,
        detections=detections_text,
        grep=grep_truth,
        rules=rules_mod.serialize_rules(rules_mod.DEFAULT_RULES),
    )
    return ForgeResult(spec=spec, csv_text=csv_text, truth=truth)


def write_forge_outputs(result: ForgeResult, out_dir) -> dict:
    """Write timeline.csv, rules.json, and the truth files under out_dir.

    Returns a mapping of logical names to the paths written.
    """
    base = Path(out_dir)
    truth_dir = base / "truth"
    grep_dir = truth_dir / "grep"
    grep_dir.mkdir(parents=True, exist_ok=True)

    written = {}

    def put(name: str, path, text: str) -> None:
        path.write_text(text, encoding="utf-8")
        written[name] = str(path)

    put("timeline", base / "timeline.csv", result.csv_text)
    put("rules", base / "rules.json", result.truth.rules)
    put("summary", truth_dir / "summary.json", result.truth.summary)
    put("detections", truth_dir / "detections.json", result.truth.detections)
    for name, text in result.truth.grep.items():
        put(f"grep:{name}", grep_dir / f"{name}.txt", text)
    return written
