"""LLM access layer: prompt templates, strict response parsing, providers.

Every phase exchanges exactly one self-contained prompt for one response.
Responses must carry a fenced code block: a `json` fence with grounded names
(grounding), a `sparql` fence or a `json` missing-elements fence (refinement),
or a `sparql` fence only (translation). Anything else parses to Unparseable —
parsing is total, failures are data.

Two provider kinds: "live" speaks a chat-completions-style HTTP endpoint;
"scripted" replays a transcript whose entries match on (phase, prompt hash)
and are consumed in order, which is what makes pipeline runs replayable
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from typing import Union

from .model import canonical_name
from .verbalize import TokenEstimate, estimate_tokens

PHASE_APPROXIMATION = "approximation"
PHASE_REFINEMENT = "refinement"
PHASE_TRANSLATION = "translation"
PHASES = (PHASE_APPROXIMATION, PHASE_REFINEMENT, PHASE_TRANSLATION)

DEFAULT_BUDGET_TOKENS = 32768
CREDENTIAL_ENV_VAR = "ONTOSLICE_API_KEY"


class GatewayError(Exception):
    """Base for gateway failures that abort a session."""


class BudgetExceededError(GatewayError):
    def __init__(self, estimate: TokenEstimate, budget: int, phase: str):
        self.estimate = estimate
        self.budget = budget
        self.phase = phase
        super().__init__(
            f"{phase} prompt estimated at {estimate.estimated_tokens} tokens exceeds budget {budget}"
        )


class TranscriptError(GatewayError):
    pass


class ProviderError(GatewayError):
    pass


# ---------------------------------------------------------------------------
# Reports and parsed responses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MissingReport:
    """Canonicalized statement of absent concepts and absent links.

    Stored lowercased, whitespace-collapsed, sorted, and deduplicated, so two
    reports are equal exactly when they name the same sets — the equality the
    termination rule relies on.
    """

    missing_concepts: tuple[str, ...] = ()
    missing_links: tuple[tuple[str, str], ...] = ()

    @classmethod
    def canonical(cls, concepts, links) -> "MissingReport":
        concept_names = sorted({canonical_name(c) for c in concepts if canonical_name(c)})
        link_pairs = sorted(
            {
                (canonical_name(a), canonical_name(b))
                for a, b in links
                if canonical_name(a) and canonical_name(b)
            }
        )
        return cls(tuple(concept_names), tuple(link_pairs))

    @property
    def is_empty(self) -> bool:
        return not self.missing_concepts and not self.missing_links

    def __len__(self) -> int:
        return len(self.missing_concepts) + len(self.missing_links)


@dataclass(frozen=True)
class GroundedNames:
    concepts: tuple[str, ...] = ()
    relationships: tuple[str, ...] = ()


@dataclass(frozen=True)
class SparqlProposed:
    query_text: str


@dataclass(frozen=True)
class Missing:
    report: MissingReport


@dataclass(frozen=True)
class Unparseable:
    reason: str


ParsedResponse = Union[GroundedNames, SparqlProposed, Missing, Unparseable]


@dataclass(frozen=True)
class LlmExchange:
    phase: str
    prompt: str
    raw_response: str
    parsed: ParsedResponse
    prompt_tokens: TokenEstimate


def render_missing_response(report: MissingReport) -> str:
    """The documented response format for a missing-elements report."""
    payload = {
        "missing_concepts": list(report.missing_concepts),
        "missing_links": [{"from": a, "to": b} for a, b in report.missing_links],
    }
    return "```json\n" + json.dumps(payload, indent=2) + "\n```"


# ---------------------------------------------------------------------------
# Prompt templates
# ---------------------------------------------------------------------------

_ROLE = (
    "You translate natural language questions into SPARQL SELECT queries over a "
    "private ontology. You never invent classes or properties: you only use what "
    "you have been shown."
)

_APPROXIMATION_TEMPLATE = """{role}

This is the grounding step. Below is a catalog of the ontology, one line per
element. Pick out the concept and relationship names the question will need.

Ontology catalog:
{catalog}

Question: {question}

Reply with exactly one fenced code block tagged `json` containing an object
with two keys: "concepts" and "relationships", each an array of names copied
verbatim from the catalog. Use an empty array when nothing applies. Write
nothing outside the fenced block."""

_REFINEMENT_TEMPLATE = """{role}

Below is the current slice of the ontology, in Turtle. It may be incomplete.

Ontology slice:
{slice_turtle}

Question: {question}

Only if the slice contains every class and property the question needs, reply
with exactly one fenced code block tagged `sparql` containing a SPARQL SELECT
query that uses only vocabulary from the slice.
Otherwise reply with exactly one fenced code block tagged `json` containing an
object with two keys: "missing_concepts", an array of concept names you still
need, and "missing_links", an array of {{"from": <name>, "to": <name>}} pairs
of concepts whose connection the slice does not show. Write nothing outside
the fenced block."""

_TRANSLATION_TEMPLATE = """{role}

Below is the final slice of the ontology, in Turtle. It contains everything
the question needs.

Ontology slice:
{slice_turtle}

Question: {question}

Reply with exactly one fenced code block tagged `sparql` containing a SPARQL
SELECT query that uses only vocabulary from the slice. Write nothing outside
the fenced block."""

_REPAIR_SUFFIX = """

Your previous query was rejected because it does not conform to the slice:
{violations}

Previous query:
```sparql
{query}
```

Reply with a corrected query in exactly one fenced code block tagged `sparql`,
using only vocabulary from the slice."""


def _check_budget(prompt: str, budget_tokens: int, phase: str) -> str:
    estimate = estimate_tokens(prompt)
    if estimate.estimated_tokens > budget_tokens:
        raise BudgetExceededError(estimate, budget_tokens, phase)
    return prompt


def build_approximation_prompt(
    question: str, catalog: str, budget_tokens: int = DEFAULT_BUDGET_TOKENS
) -> str:
    prompt = _APPROXIMATION_TEMPLATE.format(
        role=_ROLE, catalog=catalog or "none", question=question
    )
    return _check_budget(prompt, budget_tokens, PHASE_APPROXIMATION)


def build_refinement_prompt(
    question: str, slice_turtle: str, budget_tokens: int = DEFAULT_BUDGET_TOKENS
) -> str:
    prompt = _REFINEMENT_TEMPLATE.format(
        role=_ROLE, slice_turtle=slice_turtle or "none", question=question
    )
    return _check_budget(prompt, budget_tokens, PHASE_REFINEMENT)


def build_translation_prompt(
    question: str, slice_turtle: str, budget_tokens: int = DEFAULT_BUDGET_TOKENS
) -> str:
    prompt = _TRANSLATION_TEMPLATE.format(
        role=_ROLE, slice_turtle=slice_turtle or "none", question=question
    )
    return _check_budget(prompt, budget_tokens, PHASE_TRANSLATION)


def build_repair_prompt(
    question: str,
    slice_turtle: str,
    query: str,
    violations: list[str],
    budget_tokens: int = DEFAULT_BUDGET_TOKENS,
) -> str:
    base = _TRANSLATION_TEMPLATE.format(
        role=_ROLE, slice_turtle=slice_turtle or "none", question=question
    )
    listed = "\n".join(f"- {v}" for v in violations) or "- (unspecified)"
    prompt = base + _REPAIR_SUFFIX.format(violations=listed, query=query)
    return _check_budget(prompt, budget_tokens, PHASE_TRANSLATION)


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```([A-Za-z0-9_+-]*)[ \t]*\r?\n(.*?)(?:\r?\n)?[ \t]*```", re.DOTALL)


def _fences(raw: str) -> list[tuple[str, str]]:
    return [(m.group(1).lower(), m.group(2)) for m in _FENCE_RE.finditer(raw)]


def _string_list(value) -> tuple[str, ...] | None:
    if not isinstance(value, list) or any(not isinstance(item, str) for item in value):
        return None
    return tuple(value)


def _canonical_names(names) -> tuple[str, ...]:
    return tuple(sorted({canonical_name(n) for n in names if canonical_name(n)}))


def _parse_grounded(content: str) -> ParsedResponse:
    try:
        data = json.loads(content)
    except ValueError as exc:
        return Unparseable(f"fence is not valid JSON: {exc}")
    if not isinstance(data, dict):
        return Unparseable("fenced JSON is not an object")
    concepts = _string_list(data.get("concepts"))
    relationships = _string_list(data.get("relationships"))
    if concepts is None or relationships is None:
        return Unparseable('expected string arrays under "concepts" and "relationships"')
    return GroundedNames(_canonical_names(concepts), _canonical_names(relationships))


def _parse_missing(content: str) -> ParsedResponse:
    try:
        data = json.loads(content)
    except ValueError as exc:
        return Unparseable(f"fence is not valid JSON: {exc}")
    if not isinstance(data, dict):
        return Unparseable("fenced JSON is not an object")
    concepts = _string_list(data.get("missing_concepts"))
    raw_links = data.get("missing_links")
    if concepts is None or not isinstance(raw_links, list):
        return Unparseable('expected "missing_concepts" and "missing_links" keys')
    links: list[tuple[str, str]] = []
    for item in raw_links:
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("from"), str)
            or not isinstance(item.get("to"), str)
        ):
            return Unparseable('missing_links entries must be {"from": .., "to": ..} objects')
        links.append((item["from"], item["to"]))
    return Missing(MissingReport.canonical(concepts, links))


def parse_response(phase: str, raw: str) -> ParsedResponse:
    """Total parser from raw response text to a phase-checked variant."""
    fences = _fences(raw)
    if not fences:
        return Unparseable("no fenced block")
    if phase == PHASE_APPROXIMATION:
        return _parse_grounded(fences[0][1])
    if phase == PHASE_REFINEMENT:
        # An emitted query wins over a missing report: it is checkable downstream.
        for tag, content in fences:
            if tag == "sparql":
                return SparqlProposed(content)
        return _parse_missing(fences[0][1])
    if phase == PHASE_TRANSLATION:
        for tag, content in fences:
            if tag == "sparql":
                return SparqlProposed(content)
        return Unparseable("translation requires a sparql fence")
    return Unparseable(f"unknown phase: {phase}")


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TranscriptEntry:
    phase: str
    match: str  # "any" | "hash:<sha256 hex>"
    response: str


@dataclass(frozen=True)
class LlmProvider:
    kind: str  # "live" | "scripted"
    endpoint: str | None = None
    model: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    transcript: tuple[TranscriptEntry, ...] = ()

    def __post_init__(self):
        if self.kind == "scripted":
            if not self.transcript:
                raise ValueError("scripted provider requires a transcript")
        elif self.kind == "live":
            if not self.endpoint or not self.model:
                raise ValueError("live provider requires endpoint and model")
        else:
            raise ValueError(f"unknown provider kind: {self.kind!r}")


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def load_transcript(text: str) -> tuple[TranscriptEntry, ...]:
    """Transcript document: a JSON array of {phase, match, response} entries
    (optionally wrapped in {"entries": [...]})."""
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("entries")
    if not isinstance(data, list):
        raise ValueError("transcript must be a list of entries")
    entries = []
    for i, item in enumerate(data):
        if not isinstance(item, dict):
            raise ValueError(f"transcript entry {i} is not an object")
        phase = item.get("phase")
        match = item.get("match", "any")
        response = item.get("response")
        if phase not in PHASES:
            raise ValueError(f"transcript entry {i} has invalid phase: {phase!r}")
        if not (match == "any" or (isinstance(match, str) and match.startswith("hash:"))):
            raise ValueError(f"transcript entry {i} has invalid match: {match!r}")
        if not isinstance(response, str):
            raise ValueError(f"transcript entry {i} has no response text")
        entries.append(TranscriptEntry(phase, match, response))
    return tuple(entries)


class ScriptedSession:
    """Replays transcript entries; each entry is consumed at most once."""

    def __init__(self, entries: tuple[TranscriptEntry, ...]):
        self._entries = list(entries)
        self._used = [False] * len(entries)

    def call(self, phase: str, prompt: str) -> str:
        digest = prompt_hash(prompt)
        for i, entry in enumerate(self._entries):
            if self._used[i] or entry.phase != phase:
                continue
            if entry.match == "any" or entry.match == f"hash:{digest}":
                self._used[i] = True
                return entry.response
        raise TranscriptError(
            f"no transcript entry for phase {phase!r} with prompt hash {digest}"
        )


class LiveSession:
    """One chat-completions-style call per prompt, with bounded retries.

    The request carries the model name plus one system and one user message;
    decoding is pinned to temperature 0 for reproducibility. The credential
    is read from the environment, never from configuration files.
    """

    def __init__(self, provider: LlmProvider):
        self._provider = provider

    def call(self, phase: str, prompt: str) -> str:
        import httpx

        provider = self._provider
        headers = {"Content-Type": "application/json"}
        credential = os.environ.get(CREDENTIAL_ENV_VAR)
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        body = {
            "model": provider.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": _ROLE},
                {"role": "user", "content": prompt},
            ],
        }
        last_error: Exception | None = None
        for _attempt in range(provider.max_retries + 1):
            try:
                response = httpx.post(
                    provider.endpoint, json=body, headers=headers, timeout=provider.timeout
                )
                response.raise_for_status()
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
                last_error = exc
        raise ProviderError(
            f"{phase} call failed after {provider.max_retries + 1} attempts: {last_error}"
        )


Session = Union[ScriptedSession, LiveSession]


def open_session(provider: LlmProvider) -> Session:
    """Fresh per-run session; scripted consumption state lives here, not in
    the shared provider value."""
    if provider.kind == "scripted":
        return ScriptedSession(provider.transcript)
    return LiveSession(provider)


def call(provider: LlmProvider, prompt: str, phase: str = PHASE_TRANSLATION) -> str:
    """One-shot convenience call; pipeline runs use open_session instead so
    scripted entries are consumed across the whole run."""
    return open_session(provider).call(phase, prompt)
