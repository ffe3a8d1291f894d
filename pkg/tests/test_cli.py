import json

import pytest

from ftleval.cli import main


@pytest.fixture(scope="module")
def scenario_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "scenario"
    code = main(["forge", "--default", "--seed", "3", "--noise", "60", "--out-dir", str(out)])
    assert code == 0
    return out


def test_forge_writes_expected_files(scenario_dir):
    assert (scenario_dir / "timeline.csv").is_file()
    assert (scenario_dir / "truth" / "summary.json").is_file()
    assert (scenario_dir / "truth" / "grep" / "onedrive.txt").is_file()


def test_forge_from_spec_file(tmp_path):
    spec = {
        "seed": 2,
        "time_span": {
            "start": "2023-12-26T00:30:00+00:00",
            "end": "2023-12-26T00:50:00+00:00",
        },
        "noise_rows": 5,
        "planted": [
            {"type": "program-opened", "time": "2023-12-26T00:31:00+00:00"}
        ],
    }
    spec_path = tmp_path / "scenario.json"
    spec_path.write_text(json.dumps(spec))
    assert main(["forge", "--spec", str(spec_path), "--out-dir", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "truth" / "summary.json").read_text())
    assert len(summary) == 1
    assert summary["0"]["type"] == "Program Opened"


def test_truth_then_run_self(scenario_dir, tmp_path, capsys):
    timeline = str(scenario_dir / "timeline.csv")
    truth = str(scenario_dir / "truth")
    assert (
        main(
            [
                "truth",
                "--task",
                "summarize",
                "--timeline",
                timeline,
                "--out-dir",
                truth,
                "--type",
                "last-shutdown",
            ]
        )
        == 0
    )
    out = str(tmp_path / "run")
    code = main(
        [
            "run",
            "--task",
            "all",
            "--mode",
            "self",
            "--timeline",
            timeline,
            "--truth-dir",
            truth,
            "--out-dir",
            out,
        ]
    )
    assert code == 0
    table = capsys.readouterr().out
    assert "Without additional knowledge" in table
    assert "With additional knowledge" in table
    assert table.count("1.000") >= 32
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert len(report["sections"]) == 2


def test_grep_preset_to_stdout(scenario_dir, capsys):
    code = main(
        [
            "grep",
            "--preset",
            "exe-files",
            "--timeline",
            str(scenario_dir / "timeline.csv"),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert ".exe" in out


def test_grep_list_presets(capsys):
    assert main(["grep", "--list-presets"]) == 0
    out = capsys.readouterr().out
    assert "registered-applications" in out
    assert "event-4616-regex" in out


def test_grep_needs_some_pattern(scenario_dir, capsys):
    code = main(["grep", "--timeline", str(scenario_dir / "timeline.csv")])
    assert code == 2


def test_summarize_single_type(scenario_dir, tmp_path):
    out = tmp_path / "summary.json"
    code = main(
        [
            "summarize",
            "-i",
            str(scenario_dir / "timeline.csv"),
            "-o",
            str(out),
            "-t",
            "bing-search",
        ]
    )
    assert code == 0
    document = json.loads(out.read_text())
    assert all(event["type"] == "Bing Search" for event in document.values())


def test_detect_matches_truth(scenario_dir, capsys):
    code = main(["detect", "--timeline", str(scenario_dir / "timeline.csv")])
    assert code == 0
    got = capsys.readouterr().out
    assert got == (scenario_dir / "truth" / "detections.json").read_text()


def test_eda_histogram_with_svg(scenario_dir, tmp_path, capsys):
    out = tmp_path / "hist.csv"
    svg = tmp_path / "hist.svg"
    code = main(
        [
            "eda",
            "histogram",
            "--timeline",
            str(scenario_dir / "timeline.csv"),
            "--out",
            str(out),
            "--svg",
            str(svg),
        ]
    )
    assert code == 0
    assert out.read_text().startswith("second,count\n")
    assert svg.read_text().startswith("<svg")
    assert main(
        [
            "eda",
            "transitions",
            "--timeline",
            str(scenario_dir / "timeline.csv"),
            "--out",
            str(tmp_path / "m.json"),
        ]
    ) == 0
    assert "labels" in json.loads((tmp_path / "m.json").read_text())


def test_score_command(scenario_dir, capsys):
    truth = scenario_dir / "truth" / "summary.json"
    code = main(
        ["score", "--candidate", str(truth), "--reference", str(truth), "--schema", "summary"]
    )
    assert code == 0
    document = json.loads(capsys.readouterr().out)
    assert document["display"]["mean"] == "1.000"


def test_report_from_runs_dir(scenario_dir, tmp_path, capsys):
    timeline = str(scenario_dir / "timeline.csv")
    truth = str(scenario_dir / "truth")
    out = str(tmp_path / "run")
    main(
        [
            "run",
            "--task",
            "rules",
            "--knowledge",
            "without",
            "--mode",
            "self",
            "--timeline",
            timeline,
            "--truth-dir",
            truth,
            "--out-dir",
            out,
        ]
    )
    capsys.readouterr()
    code = main(["report", "--runs-dir", str(tmp_path / "run" / "runs")])
    assert code == 0
    assert "Rule-based anomaly detection" in capsys.readouterr().out


def test_exit_code_1_for_missing_input(tmp_path):
    assert (
        main(
            [
                "summarize",
                "-i",
                str(tmp_path / "does-not-exist.csv"),
            ]
        )
        == 1
    )


def test_exit_code_1_for_bad_timeline(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    assert main(["summarize", "-i", str(bad)]) == 1


def test_exit_code_2_for_bad_config(scenario_dir, tmp_path):
    config = tmp_path / "config.json"
    config.write_text('{"chnk_lines": 5}')
    code = main(
        [
            "run",
            "--task",
            "rules",
            "--mode",
            "self",
            "--timeline",
            str(scenario_dir / "timeline.csv"),
            "--truth-dir",
            str(scenario_dir / "truth"),
            "--out-dir",
            str(tmp_path / "o"),
            "--config",
            str(config),
        ]
    )
    assert code == 2


def test_exit_code_1_for_replay_without_transcript(scenario_dir, tmp_path):
    code = main(
        [
            "run",
            "--task",
            "rules",
            "--knowledge",
            "without",
            "--mode",
            "replay",
            "--timeline",
            str(scenario_dir / "timeline.csv"),
            "--truth-dir",
            str(scenario_dir / "truth"),
            "--out-dir",
            str(tmp_path / "o"),
        ]
    )
    assert code == 1


def test_bad_subcommand_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2
