"""Evaluation orchestration: ground truth, runs, scoring, reports.

A run pairs one task with one knowledge arm and one transport mode.
``self`` mode feeds the ground truth back as the candidate (pipeline
smoke check), ``replay`` resolves prompts from a recorded transcript,
and ``live`` talks to a configured endpoint.  Candidate and reference
can be canonicalized before scoring so that formatting differences do
not mask content agreement; canonicalization defaults on for self mode
and off otherwise.
"""

import json
import random
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from . import eda as eda_mod
from . import gateway, rules as rules_mod, search, summarize
from .gateway import ConfigError, LlmSession, PromptInputs
from .metrics import MetricBundle, MetricConfig, score_bundle
from .timeline import Timeline, read_timeline, serialize_timeline, slice_window

__all__ = [
    "MissingTruth",
    "HarnessConfig",
    "EvalRow",
    "load_config",
    "display_score",
    "canonical_text",
    "canonicalize_json",
    "gen_ground_truth",
    "run_task",
    "run_all",
    "report",
    "shuffle_json",
    "TASK_LABELS",
]


class MissingTruth(Exception):
    """A run needs a ground-truth file that is not in the truth directory."""


@dataclass(frozen=True)
class HarnessConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o"
    temperature: float = 0.0
    api_key_env: str = "OPENAI_API_KEY"
    chunk_lines: int = 2000
    max_n: int = 4
    tokenizer: str = "alnum-lower"
    rouge_variant: str = "recall"
    normalization: str = "none"
    retries: int = 3
    backoff_base: float = 1.0
    backoff_cap: float = 8.0
    timeout: float = 120.0
    max_in_flight: int = 2

    def metric_config(self) -> MetricConfig:
        return MetricConfig(
            max_n=self.max_n,
            tokenizer=self.tokenizer,
            rouge_variant=self.rouge_variant,
        )

    def session(self, mode: str, transcript_path: str | None) -> LlmSession:
        return LlmSession(
            mode=mode,
            endpoint=self.endpoint,
            model=self.model,
            temperature=self.temperature,
            api_key_env=self.api_key_env,
            retries=self.retries,
            backoff_base=self.backoff_base,
            backoff_cap=self.backoff_cap,
            timeout=self.timeout,
            transcript_path=transcript_path,
        )


def load_config(path: str | None) -> HarnessConfig:
    if path is None:
        return HarnessConfig()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config {path!r}: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    known = {f for f in HarnessConfig.__dataclass_fields__}
    unknown = set(document) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return HarnessConfig(**document)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config values: {exc}") from exc


@dataclass(frozen=True)
class EvalRow:
    task: str
    knowledge: str
    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float
    mean: float
    event_type: str = "all"
    mode: str = "self"
    label: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


def display_score(value: float) -> str:
    """Round half-up to three decimals for table display."""
    return str(Decimal(repr(value)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


# --- canonical serialization -------------------------------------------------

_DETECTION_ORDER = ("datetime", "event", "keyword", "message")
_SUMMARY_ORDER = (
    "id",
    "date_time_min",
    "date_time_max",
    "evidence_source",
    "type",
    "description",
    "category",
    "plugin",
    "files",
    "keys",
    "supporting",
    "trigger",
)
_REDUCED_ORDER = ("datetime", "message", "parser")


def canonical_text(text: str) -> str:
    """Plain-text canonical form: exactly one trailing newline when non-empty."""
    if text == "":
        return text
    return text.rstrip("\n") + "\n"


def _reorder(obj: dict, order: tuple[str, ...]) -> dict:
    out = {key: obj[key] for key in order if key in obj}
    out.update({key: value for key, value in obj.items() if key not in out})
    return out


def _canonical_summary_event(event: object) -> object:
    if not isinstance(event, dict):
        return event
    event = _reorder(event, _SUMMARY_ORDER)
    if isinstance(event.get("supporting"), list):
        event["supporting"] = [
            _reorder(entry, _REDUCED_ORDER) if isinstance(entry, dict) else entry
            for entry in event["supporting"]
        ]
    if isinstance(event.get("trigger"), dict):
        event["trigger"] = _reorder(event["trigger"], _REDUCED_ORDER)
    return event


def _top_key(key: str):
    return (0, int(key)) if key.isdigit() else (1, key)


def canonicalize_json(text: str, schema: str | None = None) -> str:
    """Re-serialize JSON with fixed field order, two-space indent, and a
    trailing newline.

    ``schema`` may be "detections" (array of keyword hits) or "summary"
    (object keyed "0", "1", ... of high-level events); their known field
    orders are enforced, unknown fields keep their relative order.  The
    transformation is idempotent.
    """
    document = json.loads(text)
    if schema == "detections" and isinstance(document, list):
        document = [
            _reorder(item, _DETECTION_ORDER) if isinstance(item, dict) else item
            for item in document
        ]
    elif schema == "summary" and isinstance(document, dict):
        document = {
            key: _canonical_summary_event(document[key])
            for key in sorted(document, key=_top_key)
        }
    return json.dumps(document, indent=2) + "\n"


def _shuffle_entries(node, rng: random.Random):
    if isinstance(node, dict):
        keys = list(node)
        rng.shuffle(keys)
        return {key: _shuffle_entries(node[key], rng) for key in keys}
    if isinstance(node, list):
        items = [_shuffle_entries(item, rng) for item in node]
        rng.shuffle(items)
        return items
    return node


def shuffle_json(text: str, seed: int) -> str:
    """Reorder every object's members and every array's items, seeded.

    Diagnostic counterpart to scoring: the result carries the same token
    multiset as the input (unigram statistics unchanged) while breaking
    entry adjacency, which isolates how much of a score is order rather
    than content.
    """
    rng = random.Random(seed)
    return json.dumps(_shuffle_entries(json.loads(text), rng), indent=2) + "\n"


# --- ground truth ------------------------------------------------------------


def gen_ground_truth(
    task: str,
    timeline: Timeline,
    *,
    rules: list | None = None,
    event_type: str = "all",
    patterns: tuple[search.SearchPattern, ...] | None = None,
) -> dict[str, str]:
    """Produce the reference artifacts for one task.

    Returns a mapping of relative file names to file text, matching the
    truth directory layout the runner expects.
    """
    if task == "grep":
        chosen = patterns if patterns is not None else search.PRESET_PATTERNS
        out = {}
        for pattern in chosen:
            lines = search.grep_timeline(timeline, pattern)
            name = pattern.name or "pattern"
            out[f"grep/{name}.txt"] = "".join(line + "\n" for line in lines)
        return out
    if task == "rules":
        active = list(rules) if rules is not None else list(rules_mod.DEFAULT_RULES)
        detections = rules_mod.detect(timeline, active)
        return {"detections.json": rules_mod.serialize_detections(detections)}
    if task == "summarize":
        events = summarize.summarize(timeline, event_type)
        name = (
            "summary.json"
            if event_type == "all"
            else f"summary-{summarize.analyzer_for(event_type).slug}.json"
        )
        return {name: summarize.serialize_summary(events)}
    raise gateway.UnknownTask(f"no ground truth for task {task!r}")


def _read_truth(truth_dir: Path, name: str) -> str:
    path = truth_dir / name
    if not path.is_file():
        raise MissingTruth(f"missing ground truth file {path}")
    return path.read_text(encoding="utf-8")


# --- running -----------------------------------------------------------------

TASK_LABELS = {
    ("summarize", "single"): "Event summarization (single)",
    ("summarize", "multiple"): "Event summarization (multiple)",
    "rules": "Rule-based anomaly detection",
    "grep": "Run grep for specific terms",
}

_LABEL_ORDER = (
    "Event summarization (single)",
    "Event summarization (multiple)",
    "Rule-based anomaly detection",
    "Run grep for specific terms",
)


def _label_for(task: str, event_type: str) -> str:
    if task == "summarize":
        kind = "multiple" if event_type == "all" else "single"
        return TASK_LABELS[("summarize", kind)]
    return TASK_LABELS.get(task, task)


def _chunks(timeline: Timeline, budget: int) -> list[str]:
    if not timeline.events:
        return [serialize_timeline(timeline)]
    texts = []
    for start in range(0, len(timeline.events), budget):
        texts.append(serialize_timeline(slice_window(timeline, start, budget)))
    return texts


def _merge_json_artifacts(task: str, parts: list[str]) -> str:
    if len(parts) == 1:
        return parts[0]
    if task == "rules":
        merged: list = []
        for part in parts:
            document = json.loads(part)
            merged.extend(document if isinstance(document, list) else [document])
        return json.dumps(merged, indent=2) + "\n"
    merged_events: dict = {}
    for part in parts:
        document = json.loads(part)
        if isinstance(document, dict):
            for key in sorted(document, key=_top_key):
                merged_events[str(len(merged_events))] = document[key]
    return json.dumps(merged_events, indent=2) + "\n"


def _resolve_canonical(canonicalize: str, mode: str) -> bool:
    if canonicalize == "on":
        return True
    if canonicalize == "off":
        return False
    return mode == "self"


def _score(
    candidate: str, reference: str, config: HarnessConfig, canonical: bool, schema: str | None
) -> MetricBundle:
    if canonical:
        if schema in ("detections", "summary"):
            candidate = canonicalize_json(candidate, schema)
            reference = canonicalize_json(reference, schema)
        else:
            candidate = canonical_text(candidate)
            reference = canonical_text(reference)
    candidate = search.normalize_text(candidate, config.normalization)
    reference = search.normalize_text(reference, config.normalization)
    return score_bundle(candidate, reference, config.metric_config())


def _mean_bundle(bundles: list[MetricBundle]) -> MetricBundle:
    n = len(bundles)
    return MetricBundle(
        bleu=sum(b.bleu for b in bundles) / n,
        rouge1=sum(b.rouge1 for b in bundles) / n,
        rouge2=sum(b.rouge2 for b in bundles) / n,
        rougeL=sum(b.rougeL for b in bundles) / n,
    )


def _complete_task(
    session: LlmSession,
    task: str,
    knowledge: str,
    chunk_texts: list[str],
    *,
    pattern: search.SearchPattern | None = None,
    rules_text: str | None = None,
    event_type: str = "all",
    line_budget: int = 2000,
) -> tuple[str, list[str]]:
    """Prompt per chunk, extract artifacts, merge; returns (artifact, raw)."""
    responses = []
    artifacts = []
    expected = "json" if task in ("rules", "summarize") else "text"
    for chunk_text in chunk_texts:
        bundle = gateway.build_prompt(
            task,
            knowledge,
            PromptInputs(
                timeline_text=chunk_text,
                pattern=pattern,
                rules_text=rules_text,
                event_type=event_type,
                line_budget=line_budget,
            ),
        )
        response = gateway.complete(session, bundle)
        responses.append(response)
        artifacts.append(gateway.extract_artifact(response, expected))
    if expected == "json":
        return _merge_json_artifacts(task, artifacts), responses
    return "".join(canonical_text(a) for a in artifacts), responses


def _run_dir(out_dir: Path, task: str, event_type: str, knowledge: str, mode: str) -> Path:
    parts = [task]
    if task == "summarize" and event_type != "all":
        parts.append(summarize.analyzer_for(event_type).slug)
    parts.extend([knowledge, mode])
    run_dir = out_dir / "runs" / "-".join(parts)
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def run_task(
    config: HarnessConfig,
    task: str,
    knowledge: str,
    mode: str,
    timeline: Timeline,
    truth_dir: str | Path,
    out_dir: str | Path,
    *,
    event_type: str = "all",
    transcript_path: str | None = None,
    canonicalize: str = "auto",
) -> EvalRow | None:
    """Execute one task in one knowledge arm and score it.

    Writes the candidate artifacts, raw responses (live/replay), and the
    row JSON under ``out_dir/runs/...``.  Returns the row, or None for
    the unscored eda task.
    """
    if task not in gateway.TASKS:
        raise gateway.UnknownTask(f"unknown task {task!r}")
    if mode not in ("self", "live", "replay"):
        raise ConfigError(f"unknown mode {mode!r}")
    truth_dir = Path(truth_dir)
    out_dir = Path(out_dir)
    run_dir = _run_dir(out_dir, task, event_type, knowledge, mode)
    canonical = _resolve_canonical(canonicalize, mode)
    session = None
    chunk_texts: list[str] = []
    if mode in ("live", "replay"):
        session = config.session(mode, transcript_path)
        chunk_texts = _chunks(timeline, config.chunk_lines)

    if task == "eda":
        histogram = eda_mod.per_second_histogram(timeline)
        matrix = eda_mod.transition_matrix(timeline)
        (run_dir / "eda-histogram.json").write_text(
            eda_mod.histogram_to_json(histogram), encoding="utf-8"
        )
        (run_dir / "eda-transitions.json").write_text(
            eda_mod.matrix_to_json(matrix), encoding="utf-8"
        )
        (run_dir / "eda-histogram.svg").write_text(
            eda_mod.render_histogram_svg(histogram), encoding="utf-8"
        )
        if session is not None:
            _, responses = _complete_task(
                session, "eda", knowledge, chunk_texts[:1], line_budget=config.chunk_lines
            )
            (run_dir / "response.txt").write_text(responses[0], encoding="utf-8")
        return None

    if task == "grep":
        bundles = []
        for pattern in search.PRESET_PATTERNS:
            reference = _read_truth(truth_dir, f"grep/{pattern.name}.txt")
            if mode == "self":
                candidate = reference
            else:
                candidate, responses = _complete_task(
                    session,
                    "grep",
                    knowledge,
                    chunk_texts,
                    pattern=pattern,
                    line_budget=config.chunk_lines,
                )
                for i, response in enumerate(responses):
                    (run_dir / f"response-{pattern.name}-{i}.txt").write_text(
                        response, encoding="utf-8"
                    )
            (run_dir / f"candidate-{pattern.name}.txt").write_text(
                candidate, encoding="utf-8"
            )
            bundles.append(_score(candidate, reference, config, canonical, None))
        bundle = _mean_bundle(bundles)
    elif task in ("rules", "summarize"):
        if task == "rules":
            truth_name = "detections.json"
            schema = "detections"
            rules_text = rules_mod.serialize_rules(rules_mod.DEFAULT_RULES)
            for candidate_path in (truth_dir / "rules.json", truth_dir.parent / "rules.json"):
                if candidate_path.is_file():
                    rules_text = candidate_path.read_text(encoding="utf-8")
                    break
        else:
            slug = (
                "all"
                if event_type == "all"
                else summarize.analyzer_for(event_type).slug
            )
            truth_name = "summary.json" if slug == "all" else f"summary-{slug}.json"
            schema = "summary"
            rules_text = None
        reference = _read_truth(truth_dir, truth_name)
        if mode == "self":
            candidate = reference
        else:
            candidate, responses = _complete_task(
                session,
                task,
                knowledge,
                chunk_texts,
                rules_text=rules_text,
                event_type=event_type,
                line_budget=config.chunk_lines,
            )
            for i, response in enumerate(responses):
                (run_dir / f"response-{i}.txt").write_text(response, encoding="utf-8")
        (run_dir / "candidate.json").write_text(candidate, encoding="utf-8")
        bundle = _score(candidate, reference, config, canonical, schema)
    else:
        raise gateway.UnknownTask(f"unknown task {task!r}")

    row = EvalRow(
        task=task,
        knowledge=knowledge,
        bleu=bundle.bleu,
        rouge1=bundle.rouge1,
        rouge2=bundle.rouge2,
        rougeL=bundle.rougeL,
        mean=bundle.mean,
        event_type=event_type,
        mode=mode,
        label=_label_for(task, event_type),
    )
    (run_dir / "row.json").write_text(row.to_json(), encoding="utf-8")
    return row


def run_all(
    config: HarnessConfig,
    mode: str,
    timeline: Timeline,
    truth_dir: str | Path,
    out_dir: str | Path,
    *,
    knowledge_modes: tuple[str, ...] = ("without", "with"),
    single_type: str = "last-shutdown",
    transcript_path: str | None = None,
    canonicalize: str = "auto",
) -> list[EvalRow]:
    """The full table: single/multiple summarization, rules, grep, and eda
    for each knowledge arm."""
    rows = []
    for knowledge in knowledge_modes:
        for task, event_type in (
            ("summarize", single_type),
            ("summarize", "all"),
            ("rules", "all"),
            ("grep", "all"),
            ("eda", "all"),
        ):
            row = run_task(
                config,
                task,
                knowledge,
                mode,
                timeline,
                truth_dir,
                out_dir,
                event_type=event_type,
                transcript_path=transcript_path,
                canonicalize=canonicalize,
            )
            if row is not None:
                rows.append(row)
    return rows


# --- reporting ---------------------------------------------------------------

_SECTION_TITLES = {
    "without": "Without additional knowledge",
    "with": "With additional knowledge",
}


def _row_sort_key(row: EvalRow):
    try:
        label_rank = _LABEL_ORDER.index(row.label)
    except ValueError:
        label_rank = len(_LABEL_ORDER)
    return (label_rank, row.label, row.event_type)


def report(rows: list[EvalRow]) -> tuple[str, str]:
    """Render the score table; returns (text, machine-readable JSON)."""
    label_width = max([len("Task")] + [len(row.label or row.task) for row in rows]) + 2
    columns = (("BLEU", 6), ("ROUGE-1", 9), ("ROUGE-2", 9), ("ROUGE-L", 9), ("Mean score", 12))
    header = f"{'Task':<{label_width}}" + "".join(
        f"{name:>{width}}" for name, width in columns
    )
    lines = [header]
    sections = []
    for knowledge in ("without", "with"):
        section_rows = sorted(
            (row for row in rows if row.knowledge == knowledge), key=_row_sort_key
        )
        if not section_rows:
            continue
        lines.append(_SECTION_TITLES[knowledge])
        json_rows = []
        for row in section_rows:
            display = {
                "bleu": display_score(row.bleu),
                "rouge1": display_score(row.rouge1),
                "rouge2": display_score(row.rouge2),
                "rougeL": display_score(row.rougeL),
                "mean": display_score(row.mean),
            }
            lines.append(
                f"{row.label or row.task:<{label_width}}"
                + f"{display['bleu']:>{columns[0][1]}}"
                + f"{display['rouge1']:>{columns[1][1]}}"
                + f"{display['rouge2']:>{columns[2][1]}}"
                + f"{display['rougeL']:>{columns[3][1]}}"
                + f"{display['mean']:>{columns[4][1]}}"
            )
            json_rows.append({**asdict(row), "display": display})
        sections.append(
            {"knowledge": knowledge, "title": _SECTION_TITLES[knowledge], "rows": json_rows}
        )
    text = "\n".join(lines) + "\n"
    document = json.dumps({"sections": sections}, indent=2) + "\n"
    return text, document


def load_rows(paths: list[str | Path]) -> list[EvalRow]:
    rows = []
    known = {f for f in EvalRow.__dataclass_fields__}
    for path in paths:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        rows.append(EvalRow(**{k: v for k, v in document.items() if k in known}))
    return rows
