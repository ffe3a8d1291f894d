"""Prompt construction and chat-completions access, live or replayed.

Prompts are pure functions of (task, knowledge, inputs), so a recorded
transcript keyed by prompt fingerprint can stand in for the network.
Live mode posts to an OpenAI-compatible chat-completions endpoint with
capped exponential backoff on transient failures; replay mode performs
no network I/O at all.  API keys are read from the environment at call
time and never written to transcripts or logs.
"""

import datetime as dt
import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field

import requests

from .search import SearchPattern
from .summarize import list_analyzers

__all__ = [
    "ConfigError",
    "TransportError",
    "ReplayMiss",
    "BadArtifact",
    "UnknownTask",
    "MissingInput",
    "PromptInputs",
    "PromptBundle",
    "LlmSession",
    "build_prompt",
    "prompt_fingerprint",
    "complete",
    "extract_artifact",
]

logger = logging.getLogger(__name__)

TASKS = ("grep", "rules", "summarize", "eda")
KNOWLEDGE_MODES = ("with", "without")
DEFAULT_LINE_BUDGET = 2000


class ConfigError(Exception):
    """The session cannot run as configured (endpoint, key, transcript)."""


class TransportError(Exception):
    """The endpoint kept failing or returned an unusable response."""


class ReplayMiss(KeyError):
    """No transcript entry matches the prompt fingerprint."""


class BadArtifact(ValueError):
    """The response holds no artifact of the expected kind."""


class UnknownTask(ValueError):
    """Task name outside the supported set."""


class MissingInput(ValueError):
    """The task needs an input that was not supplied."""


@dataclass(frozen=True)
class PromptInputs:
    timeline_text: str | None = None
    pattern: SearchPattern | None = None
    rules_text: str | None = None
    event_type: str = "all"
    line_budget: int = DEFAULT_LINE_BUDGET


@dataclass(frozen=True)
class PromptBundle:
    task: str
    knowledge: str
    messages: tuple


_PERSONA = "I am a forensic investigator."

_GREP_EXPORT = (
    "Do not include the first line of the file containing column names. "
    "Include all columns in the results, not only the message column. "
    "Export the results into plain text."
)

_RULES_FORMAT = (
    "Format your answer using this JSON format:\n"
    "```json\n"
    "{\n"
    '  "datetime": "datetime_here",\n'
    '  "event": "event_name_here",\n'
    '  "keyword": "keyword_here",\n'
    '  "message": "message_from_logs_here"\n'
    "}\n"
    "```"
)

_RULES_EXPORT = (
    "I need all entries of suspicious entries. "
    "Export to a JSON file for all of the results."
)

_EDA_PROMPT = (
    "Explore patterns of event occurrences based on the datetime field per "
    "second (e.g., busiest times, significant gaps), use a bar chart. "
    "Write the hour:minute:second in the x axis."
)

_SUMMARY_FIELDS = (
    "id, date_time_min, date_time_max, evidence_source, type, description, "
    "category, plugin, files, keys, supporting, trigger"
)


def _library_card() -> str:
    lines = [
        "The bundled summarization library reads a Plaso CSV timeline and "
        "writes high-level events as JSON.",
        "Usage: summarize -i timeline-input.csv -o summarization-output.json "
        "-t last-shutdown",
        "Omit -t to cover every supported event type. Supported types:",
    ]
    by_category: dict[str, list[str]] = {}
    for spec in list_analyzers():
        by_category.setdefault(spec.category, []).append(spec.slug)
    for category, slugs in by_category.items():
        lines.append(f"  {category}: {', '.join(slugs)}")
    lines.append(f"Each event record has the fields: {_SUMMARY_FIELDS}.")
    lines.append(
        'The output is a JSON object whose keys are "0", "1", ... with events '
        "in chronological order and ids numbered from 1."
    )
    return "\n".join(lines)


def _attachment(name: str, tag: str, text: str) -> str:
    if not text.endswith("\n"):
        text += "\n"
    return f"{name}:\n```{tag}\n{text}```"


def _require(inputs: PromptInputs, attr: str, task: str) -> object:
    value = getattr(inputs, attr)
    if value is None:
        raise MissingInput(f"task {task!r} needs {attr}")
    return value


def _timeline_attachment(inputs: PromptInputs, task: str) -> str:
    text = _require(inputs, "timeline_text", task)
    line_count = len(text.splitlines())
    if line_count > inputs.line_budget + 1:
        raise ValueError(
            f"timeline chunk has {line_count} lines, over the "
            f"{inputs.line_budget}-line budget (plus header)"
        )
    return _attachment("timeline.csv", "csv", text)


def build_prompt(task: str, knowledge: str, inputs: PromptInputs) -> PromptBundle:
    """Render the message list for one request.

    ``knowledge`` selects between the two study arms: "with" includes
    the task-specific reference material (grep command line, keyword
    file, summarizer library card), "without" leaves the model on its
    own.  The same (task, knowledge, inputs) always yields the same
    bundle.
    """
    if task not in TASKS:
        raise UnknownTask(f"unknown task {task!r}; expected one of {TASKS}")
    if knowledge not in KNOWLEDGE_MODES:
        raise ValueError(f"knowledge must be one of {KNOWLEDGE_MODES}")

    contents: list[str] = []
    if task == "grep":
        pattern = _require(inputs, "pattern", task)
        purpose = pattern.purpose or "find all entries matching the expression"
        contents.append(
            f"{_PERSONA} I need to find these terms: {pattern.expression} in the "
            f"given CSV file to {purpose}. The CSV file is a forensic timeline "
            "generated from the log2timeline/Plaso tool."
        )
        if knowledge == "with":
            contents.append(
                "For your references, the grep command is: "
                f'grep -E "{pattern.expression}" timeline.csv.'
            )
        contents.append(_GREP_EXPORT)
        contents.append(_timeline_attachment(inputs, task))
    elif task == "rules":
        if knowledge == "with":
            rules_text = _require(inputs, "rules_text", task)
            contents.append(
                f"{_PERSONA} Read this list of keywords to find suspicious events."
            )
            contents.append(_attachment("keywords.json", "json", rules_text))
        else:
            contents.append(
                f"{_PERSONA} I need to detect suspicious events in a timeline "
                "CSV file generated from the log2timeline/Plaso tool."
            )
        contents.append(_RULES_FORMAT)
        contents.append(_RULES_EXPORT)
        contents.append(_timeline_attachment(inputs, task))
    elif task == "summarize":
        contents.append(
            f"{_PERSONA} I need to reconstruct high-level events from a timeline "
            "CSV file generated from the log2timeline/Plaso tool."
        )
        if inputs.event_type == "all":
            scope = "Reconstruct events of all supported types."
        else:
            scope = f"Reconstruct only events of type {inputs.event_type}."
        if knowledge == "with":
            contents.append(_library_card())
            contents.append(
                f"{scope} Follow the library's record format exactly and return "
                "the JSON output."
            )
        else:
            contents.append(
                f"{scope} Return a JSON object whose keys are \"0\", \"1\", ... "
                f"with one record per event holding the fields: {_SUMMARY_FIELDS}."
            )
        contents.append(_timeline_attachment(inputs, task))
    else:  # eda
        contents.append(_EDA_PROMPT)
        contents.append(_timeline_attachment(inputs, task))

    messages = tuple({"role": "user", "content": content} for content in contents)
    return PromptBundle(task=task, knowledge=knowledge, messages=messages)


def prompt_fingerprint(bundle: PromptBundle, model: str, temperature: float = 0.0) -> str:
    """Stable key for transcript lookup: a hash of model plus messages."""
    payload = {
        "model": model,
        "temperature": temperature,
        "messages": list(bundle.messages),
    }
    encoded = json.dumps(payload, sort_keys=True, ensure_ascii=True)
    return hashlib.sha256(encoded.encode("utf-8")).hexdigest()


@dataclass
class LlmSession:
    """One conversation endpoint plus its transcript.

    ``mode`` is "live" or "replay".  ``api_key_env`` names the
    environment variable holding the bearer token; an empty name means
    the endpoint needs no auth (local stubs).
    """

    mode: str = "replay"
    endpoint: str = ""
    model: str = "gpt-4o"
    temperature: float = 0.0
    api_key_env: str = "OPENAI_API_KEY"
    retries: int = 3
    backoff_base: float = 1.0
    backoff_cap: float = 8.0
    timeout: float = 120.0
    transcript_path: str | None = None
    transcript: list = field(default_factory=list)
    _replay_index: dict | None = None

    def load_transcript(self) -> None:
        if self.transcript_path is None:
            raise ConfigError("replay mode needs a transcript_path")
        try:
            with open(self.transcript_path, "r", encoding="utf-8") as handle:
                entries = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load transcript: {exc}") from exc
        if not isinstance(entries, list):
            raise ConfigError("transcript must be a JSON array")
        self.transcript = entries

    def save_transcript(self) -> None:
        if self.transcript_path is None:
            return
        with open(self.transcript_path, "w", encoding="utf-8") as handle:
            json.dump(self.transcript, handle, indent=2)
            handle.write("\n")


def _replay_lookup(session: LlmSession, fingerprint: str) -> str:
    if session._replay_index is None:
        if not session.transcript and session.transcript_path is not None:
            session.load_transcript()
        index = {}
        for entry in session.transcript:
            request = entry.get("request", {})
            bundle = PromptBundle(
                task="", knowledge="", messages=tuple(request.get("messages", []))
            )
            key = prompt_fingerprint(
                bundle,
                request.get("model", ""),
                request.get("temperature", 0.0),
            )
            index[key] = entry.get("response", "")
        session._replay_index = index
    try:
        return session._replay_index[fingerprint]
    except KeyError:
        raise ReplayMiss(
            f"transcript has no entry for prompt {fingerprint[:12]}..."
        ) from None


def _live_call(session: LlmSession, payload: dict) -> str:
    if not session.endpoint:
        raise ConfigError("live mode needs an endpoint URL")
    headers = {"Content-Type": "application/json"}
    if session.api_key_env:
        key = os.environ.get(session.api_key_env)
        if not key:
            raise ConfigError(
                f"live mode needs the {session.api_key_env} environment variable"
            )
        headers["Authorization"] = f"Bearer {key}"

    last_error = "no attempt made"
    for attempt in range(session.retries + 1):
        if attempt:
            delay = min(session.backoff_cap, session.backoff_base * 2 ** (attempt - 1))
            logger.debug("retrying in %.2fs (attempt %d)", delay, attempt)
            time.sleep(delay)
        try:
            response = requests.post(
                session.endpoint, json=payload, headers=headers, timeout=session.timeout
            )
        except requests.RequestException as exc:
            last_error = f"transport failure: {exc}"
            continue
        if response.status_code == 200:
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed completion response: {exc}") from exc
        if response.status_code == 429 or response.status_code >= 500:
            last_error = f"HTTP {response.status_code}"
            continue
        raise TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
    raise TransportError(f"gave up after {session.retries + 1} attempts: {last_error}")


def complete(session: LlmSession, bundle: PromptBundle) -> str:
    """Send the bundle (or look it up) and return the assistant text."""
    fingerprint = prompt_fingerprint(bundle, session.model, session.temperature)
    if session.mode == "replay":
        return _replay_lookup(session, fingerprint)
    if session.mode != "live":
        raise ConfigError(f"unknown session mode {session.mode!r}")

    payload = {
        "model": session.model,
        "messages": list(bundle.messages),
        "temperature": session.temperature,
    }
    content = _live_call(session, payload)
    session.transcript.append(
        {
            "request": payload,
            "response": content,
            "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
        }
    )
    session._replay_index = None
    session.save_transcript()
    return content


_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[^\n]*\n(.*?)```", re.DOTALL)


def _parses_as_json(text: str) -> bool:
    try:
        json.loads(text)
    except json.JSONDecodeError:
        return False
    return True


def extract_artifact(response: str, expected: str = "text") -> str:
    """Pull the deliverable out of a chat response.

    The last fenced code block of the expected kind wins; with no
    usable block the whole body is the artifact.  For ``expected="json"``
    the result must parse, otherwise BadArtifact is raised.
    """
    if expected not in ("text", "json"):
        raise ValueError(f"expected must be 'text' or 'json', not {expected!r}")
    blocks = [(lang.lower(), body) for lang, body in _FENCE.findall(response)]
    if expected == "text":
        return blocks[-1][1] if blocks else response
    tagged = [body for lang, body in blocks if lang == "json"]
    untagged = [body for lang, body in blocks if lang == "" and _parses_as_json(body)]
    chosen = (tagged or untagged)[-1] if (tagged or untagged) else response
    if not _parses_as_json(chosen):
        raise BadArtifact("no parseable JSON artifact in response")
    return chosen
