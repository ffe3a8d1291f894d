"""Command line interface.

Exit codes: 0 on success, 1 when an input or evaluation step fails
(unreadable timeline, missing truth, transport or artifact errors),
2 when the configuration or command line itself is invalid.
"""

import argparse
import json
import sys
from pathlib import Path

from . import eda as eda_mod
from . import forge as forge_mod
from . import gateway, harness, rules as rules_mod, search, summarize
from .gateway import ConfigError
from .metrics import EmptyReference
from .timeline import TimelineError, read_timeline

_EVAL_ERRORS = (
    TimelineError,
    search.InvalidPattern,
    rules_mod.BadRuleFile,
    summarize.UnknownEventType,
    forge_mod.SpecError,
    gateway.TransportError,
    gateway.ReplayMiss,
    gateway.BadArtifact,
    gateway.UnknownTask,
    gateway.MissingInput,
    harness.MissingTruth,
    EmptyReference,
    OSError,
    json.JSONDecodeError,
    ValueError,
)


def _write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _cmd_forge(args) -> int:
    if args.spec:
        spec = forge_mod.load_scenario(Path(args.spec).read_text(encoding="utf-8"))
    else:
        spec = forge_mod.default_scenario(seed=args.seed, noise_rows=args.noise)
    result = forge_mod.forge(spec)
    paths = forge_mod.write_forge_outputs(result, args.out_dir)
    for name in sorted(paths):
        print(paths[name])
    return 0


def _cmd_truth(args) -> int:
    timeline = read_timeline(args.timeline)
    rules = None
    if args.rules:
        rules = rules_mod.load_rules(Path(args.rules).read_text(encoding="utf-8"))
    patterns = None
    if args.pattern:
        patterns = tuple(
            search.compile_pattern(expr, name=f"pattern-{i + 1}")
            for i, expr in enumerate(args.pattern)
        )
    texts = harness.gen_ground_truth(
        args.task, timeline, rules=rules, event_type=args.type, patterns=patterns
    )
    out_dir = Path(args.out_dir)
    for name in sorted(texts):
        _write(out_dir / name, texts[name])
        print(out_dir / name)
    return 0


def _collect_report(out_dir: Path) -> tuple[str, str]:
    row_paths = sorted((out_dir / "runs").glob("*/row.json"))
    rows = harness.load_rows(row_paths)
    return harness.report(rows)


def _cmd_run(args) -> int:
    config = harness.load_config(args.config)
    timeline = read_timeline(args.timeline)
    knowledge_modes = ("without", "with") if args.knowledge == "both" else (args.knowledge,)
    out_dir = Path(args.out_dir)
    if args.task == "all":
        harness.run_all(
            config,
            args.mode,
            timeline,
            args.truth_dir,
            out_dir,
            knowledge_modes=knowledge_modes,
            single_type=args.single_type,
            transcript_path=args.transcript,
            canonicalize=args.canonicalize,
        )
    else:
        for knowledge in knowledge_modes:
            harness.run_task(
                config,
                args.task,
                knowledge,
                args.mode,
                timeline,
                args.truth_dir,
                out_dir,
                event_type=args.type,
                transcript_path=args.transcript,
                canonicalize=args.canonicalize,
            )
    text, document = _collect_report(out_dir)
    _write(out_dir / "report.txt", text)
    _write(out_dir / "report.json", document)
    sys.stdout.write(text)
    return 0


def _cmd_score(args) -> int:
    config = harness.HarnessConfig(
        max_n=args.max_n,
        tokenizer=args.tokenizer,
        rouge_variant=args.rouge_variant,
        normalization=args.normalize,
    )
    candidate = Path(args.candidate).read_text(encoding="utf-8")
    reference = Path(args.reference).read_text(encoding="utf-8")
    schema = None if args.schema in (None, "text") else args.schema
    bundle = harness._score(
        candidate, reference, config, args.canonicalize == "on", schema
    )
    document = {
        "bleu": bundle.bleu,
        "rouge1": bundle.rouge1,
        "rouge2": bundle.rouge2,
        "rougeL": bundle.rougeL,
        "mean": bundle.mean,
        "display": {
            "bleu": harness.display_score(bundle.bleu),
            "rouge1": harness.display_score(bundle.rouge1),
            "rouge2": harness.display_score(bundle.rouge2),
            "rougeL": harness.display_score(bundle.rougeL),
            "mean": harness.display_score(bundle.mean),
        },
    }
    print(json.dumps(document, indent=2))
    return 0


def _cmd_report(args) -> int:
    if args.runs_dir:
        row_paths = sorted(Path(args.runs_dir).glob("*/row.json"))
    else:
        row_paths = [Path(p) for p in args.rows]
    rows = harness.load_rows(row_paths)
    text, document = harness.report(rows)
    if args.out:
        _write(args.out, text)
    if args.json:
        _write(args.json, document)
    if not args.out:
        sys.stdout.write(text)
    return 0


def _cmd_eda(args) -> int:
    timeline = read_timeline(args.timeline)
    as_csv = args.out.endswith(".csv")
    if args.view == "histogram":
        histogram = eda_mod.per_second_histogram(timeline)
        text = (
            eda_mod.histogram_to_csv(histogram)
            if as_csv
            else eda_mod.histogram_to_json(histogram)
        )
        if args.svg:
            _write(args.svg, eda_mod.render_histogram_svg(histogram))
    else:
        matrix = eda_mod.transition_matrix(timeline)
        text = eda_mod.matrix_to_csv(matrix) if as_csv else eda_mod.matrix_to_json(matrix)
    _write(args.out, text)
    print(args.out)
    return 0


def _cmd_grep(args) -> int:
    if args.list_presets:
        for preset in search.PRESET_PATTERNS:
            print(f"{preset.name}: {preset.expression}")
            print(f"  {preset.purpose}")
        return 0
    if args.preset:
        pattern = search.preset_pattern(args.preset)
    elif args.pattern:
        pattern = search.compile_pattern(args.pattern)
    else:
        raise ConfigError("grep needs --preset, --pattern, or --list-presets")
    timeline = read_timeline(args.timeline)
    lines = search.grep_timeline(timeline, pattern)
    text = "".join(line + "\n" for line in lines)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_summarize(args) -> int:
    timeline = read_timeline(args.input)
    events = summarize.summarize(timeline, args.type)
    text = summarize.serialize_summary(events)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_detect(args) -> int:
    timeline = read_timeline(args.timeline)
    if args.rules:
        rules = rules_mod.load_rules(Path(args.rules).read_text(encoding="utf-8"))
    else:
        rules = list(rules_mod.DEFAULT_RULES)
    detections = rules_mod.detect(timeline, rules)
    text = rules_mod.serialize_detections(detections)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftleval",
        description="Evaluate timeline analysis tasks against ground truth.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forge", help="generate a synthetic timeline with ground truth")
    p.add_argument("--spec", help="scenario JSON file")
    p.add_argument("--default", action="store_true", help="use the built-in scenario")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise", type=int, default=500, help="noise row count")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_forge)

    p = sub.add_parser("truth", help="compute ground truth for one task")
    p.add_argument("--task", required=True, choices=("grep", "rules", "summarize"))
    p.add_argument("--timeline", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--type", default="all", help="event type for summarize")
    p.add_argument("--rules", help="keyword rules JSON (default: built-in rules)")
    p.add_argument(
        "--pattern", action="append", help="extra grep pattern (repeatable)"
    )
    p.set_defaults(func=_cmd_truth)

    p = sub.add_parser("run", help="run tasks and score them against truth")
    p.add_argument(
        "--task",
        required=True,
        choices=("grep", "rules", "summarize", "eda", "all"),
    )
    p.add_argument("--knowledge", default="both", choices=("with", "without", "both"))
    p.add_argument("--mode", default="self", choices=("self", "live", "replay"))
    p.add_argument("--timeline", required=True)
    p.add_argument("--truth-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--type", default="all", help="event type for summarize")
    p.add_argument(
        "--single-type",
        default="last-shutdown",
        help="event type used for the single-summary row when --task all",
    )
    p.add_argument("--config", help="harness config JSON")
    p.add_argument("--transcript", help="transcript JSON for live/replay")
    p.add_argument("--canonicalize", default="auto", choices=("auto", "on", "off"))
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("score", help="score one candidate file against a reference")
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--schema", choices=("text", "detections", "summary"))
    p.add_argument("--canonicalize", default="off", choices=("on", "off"))
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--tokenizer", default="alnum-lower", choices=("alnum-lower", "whitespace"))
    p.add_argument("--rouge-variant", default="recall", choices=("recall", "f1"))
    p.add_argument("--normalize", default="none", choices=search.NORMALIZATION_POLICIES)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("report", help="render the score table from row files")
    p.add_argument("--rows", nargs="*", default=[])
    p.add_argument("--runs-dir", help="directory holding runs/*/row.json")
    p.add_argument("--out", help="write the text table here")
    p.add_argument("--json", help="write the JSON document here")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("eda", help="per-second histogram or transition matrix")
    p.add_argument("view", choices=("histogram", "transitions"))
    p.add_argument("--timeline", required=True)
    p.add_argument("--out", required=True, help="output file; .csv selects CSV, else JSON")
    p.add_argument("--svg", help="also render the histogram as an SVG bar chart")
    p.set_defaults(func=_cmd_eda)

    p = sub.add_parser("grep", help="match timeline lines against a pattern")
    p.add_argument("--timeline")
    p.add_argument("--pattern", help="POSIX extended regular expression")
    p.add_argument("--preset", help="named preset pattern")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_grep)

    p = sub.add_parser("summarize", help="extract high-level events")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("-t", "--type", default="all")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("detect", help="keyword rule matching")
    p.add_argument("--timeline", required=True)
    p.add_argument("--rules", help="keyword rules JSON (default: built-in rules)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_detect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "grep" and not args.list_presets and not args.timeline:
        print("error: grep needs --timeline", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _EVAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
