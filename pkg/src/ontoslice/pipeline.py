"""Pipeline state machine: grounding, refinement loop, translation, gate.

A run walks one question through three phases. Grounding maps the question
onto catalog names and seeds the first slice. Refinement repeats: show the
slice, and either accept an emitted query, move on when nothing is missing,
or grow the slice from the missing-elements report. Translation demands the
final query, which must pass the slice-conformance gate (one repair retry on
violations) before the run counts as Done.

The loop stops on: an empty report; a report identical (after
canonicalization) to the previous step's report; a step that resolves
nothing and grows nothing; or the step ceiling. Runs are strictly
sequential; distinct runs over the same ontology are independent.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Union

from . import llm
from .llm import (
    GroundedNames,
    LlmExchange,
    LlmProvider,
    Missing,
    MissingReport,
    ParsedResponse,
    SparqlProposed,
    Unparseable,
)
from .model import SUBCLASS_EDGE, Ontology, build_index, resolve_name
from .paths import DEFAULT_MAX_HOPS, Resolution, resolve_missing
from .slicing import Slice, expand_slice, seed_slice
from .sparql import check_query
from .verbalize import estimate_tokens, verbalize_catalog, verbalize_slice

# Failure kinds; each maps to a distinct CLI exit code.
NO_PROGRESS = "no-progress"
STEP_LIMIT = "step-limit"
NONCONFORMING_QUERY = "nonconforming-query"
PROVIDER_ERROR = "provider-error"
BUDGET_EXCEEDED = "budget-exceeded"
UNPARSEABLE_RESPONSE = "unparseable-response"

FAILURE_KINDS = (
    NO_PROGRESS,
    STEP_LIMIT,
    NONCONFORMING_QUERY,
    PROVIDER_ERROR,
    BUDGET_EXCEEDED,
    UNPARSEABLE_RESPONSE,
)

# Identical canonical reports on this many consecutive steps stop the loop.
# This encodes the "unchanged for two steps" reading as two consecutive
# identical reports; raising it demands a longer identical run instead.
REPORT_UNCHANGED_STREAK = 2


@dataclass(frozen=True)
class Approximation:
    pass


@dataclass(frozen=True)
class Refinement:
    step: int  # 1-based
    slice_: Slice
    previous_report: MissingReport | None = None
    # How many consecutive steps ended with previous_report, this streak
    # included. Compared against REPORT_UNCHANGED_STREAK once extended.
    report_streak: int = 1


@dataclass(frozen=True)
class Translation:
    slice_: Slice
    pending_query: str | None = None  # set when refinement already emitted SPARQL


@dataclass(frozen=True)
class Done:
    query: str
    final_slice: Slice


@dataclass(frozen=True)
class Failed:
    reason: str
    detail: str = ""


PhaseState = Union[Approximation, Refinement, Translation, Done, Failed]


@dataclass
class PipelineConfig:
    context_budget_tokens: int = llm.DEFAULT_BUDGET_TOKENS
    max_refinement_steps: int = 5
    max_hops: int = DEFAULT_MAX_HOPS


@dataclass
class SessionLog:
    """Everything one run saw and decided, in order; the replay/golden unit."""

    question: str
    exchanges: list[LlmExchange] = field(default_factory=list)
    slices: list[Slice] = field(default_factory=list)
    outcome: PhaseState = field(default_factory=Approximation)

    def to_dict(self) -> dict:
        def parsed_dict(parsed: ParsedResponse) -> dict:
            if isinstance(parsed, GroundedNames):
                return {
                    "kind": "grounded_names",
                    "concepts": list(parsed.concepts),
                    "relationships": list(parsed.relationships),
                }
            if isinstance(parsed, SparqlProposed):
                return {"kind": "sparql", "query": parsed.query_text}
            if isinstance(parsed, Missing):
                return {
                    "kind": "missing",
                    "missing_concepts": list(parsed.report.missing_concepts),
                    "missing_links": [list(pair) for pair in parsed.report.missing_links],
                }
            return {"kind": "unparseable", "reason": parsed.reason}

        if isinstance(self.outcome, Done):
            outcome = {
                "state": "done",
                "query": self.outcome.query,
                "final_slice": self.outcome.final_slice.as_dict(),
            }
        elif isinstance(self.outcome, Failed):
            outcome = {"state": "failed", "reason": self.outcome.reason, "detail": self.outcome.detail}
        else:
            outcome = {"state": type(self.outcome).__name__.lower()}

        return {
            "question": self.question,
            "exchanges": [
                {
                    "phase": e.phase,
                    "prompt": e.prompt,
                    "prompt_tokens": asdict(e.prompt_tokens),
                    "raw_response": e.raw_response,
                    "parsed": parsed_dict(e.parsed),
                }
                for e in self.exchanges
            ],
            "slices": [s.as_dict() for s in self.slices],
            "outcome": outcome,
        }

    def to_json(self) -> str:
        # Deliberately timestamp-free so repeated runs are byte-identical.
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _path_in_ontology(ontology: Ontology, path) -> bool:
    for step in path.steps:
        if step.source not in ontology.concepts or step.target not in ontology.concepts:
            return False
        if step.edge != SUBCLASS_EDGE and step.edge not in ontology.relationships:
            return False
    return True


def decide_transition(
    ontology: Ontology,
    state: Refinement,
    parsed: ParsedResponse,
    resolution: Resolution | None,
    max_refinement_steps: int = 5,
) -> PhaseState:
    """Pure refinement-step transition; total over all response variants.

    The no-progress rule fires when the canonical report repeats
    REPORT_UNCHANGED_STREAK times in a row, or when a report resolves to
    nothing at all while the slice stands still.
    """
    if isinstance(parsed, SparqlProposed):
        return Translation(state.slice_, pending_query=parsed.query_text)
    if not isinstance(parsed, Missing):
        reason = parsed.reason if isinstance(parsed, Unparseable) else f"unexpected {type(parsed).__name__}"
        return Failed(UNPARSEABLE_RESPONSE, reason)

    report = parsed.report
    if report.is_empty:
        return Translation(state.slice_)
    streak = state.report_streak + 1 if report == state.previous_report else 1
    if streak >= REPORT_UNCHANGED_STREAK:
        return Failed(
            NO_PROGRESS,
            f"missing-elements report unchanged for {REPORT_UNCHANGED_STREAK} steps",
        )

    if resolution is None:
        resolution = Resolution(
            unresolved=tuple(report.missing_concepts)
            + tuple(f"{a} -> {b}" for a, b in report.missing_links)
        )
    # Keep totality: drop anything a (malformed) resolution names that the
    # ontology does not contain. resolve_missing never produces such values.
    additions = frozenset(i for i in resolution.additions if ontology.element_kind(i) is not None)
    paths = tuple(p for p in resolution.paths if _path_in_ontology(ontology, p))
    new_slice = expand_slice(ontology, state.slice_, additions, paths)

    nothing_resolved = len(resolution.unresolved) >= len(report)
    if nothing_resolved and new_slice == state.slice_:
        return Failed(NO_PROGRESS, "nothing in the report resolved and the slice did not grow")
    if state.step + 1 > max_refinement_steps:
        return Failed(STEP_LIMIT, f"refinement exceeded {max_refinement_steps} steps")
    return Refinement(state.step + 1, new_slice, previous_report=report, report_streak=streak)


def run_pipeline(
    question: str,
    ontology: Ontology,
    provider: LlmProvider,
    config: PipelineConfig | None = None,
) -> SessionLog:
    """Run one question through the full pipeline and log every exchange."""
    if not question.strip():
        raise ValueError("question must be non-empty")
    config = config or PipelineConfig()
    index = build_index(ontology)
    session = llm.open_session(provider)
    log = SessionLog(question=question)

    def exchange(phase: str, prompt: str) -> ParsedResponse:
        raw = session.call(phase, prompt)
        parsed = llm.parse_response(phase, raw)
        log.exchanges.append(LlmExchange(phase, prompt, raw, parsed, estimate_tokens(prompt)))
        return parsed

    def gate(query: str, slice_: Slice, slice_turtle: str) -> PhaseState:
        """Conformance check with a single repair retry."""
        _, violations = check_query(query, ontology, slice_)
        if not violations:
            return Done(query, slice_)
        repair_prompt = llm.build_repair_prompt(
            question, slice_turtle, query, [str(v) for v in violations], config.context_budget_tokens
        )
        parsed = exchange(llm.PHASE_TRANSLATION, repair_prompt)
        if not isinstance(parsed, SparqlProposed):
            reason = parsed.reason if isinstance(parsed, Unparseable) else "no query in repair response"
            return Failed(UNPARSEABLE_RESPONSE, reason)
        _, violations = check_query(parsed.query_text, ontology, slice_)
        if violations:
            return Failed(NONCONFORMING_QUERY, "; ".join(str(v) for v in violations))
        return Done(parsed.query_text, slice_)

    try:
        # Phase 1: grounding against the whole-ontology catalog.
        catalog = verbalize_catalog(ontology)
        prompt = llm.build_approximation_prompt(question, catalog, config.context_budget_tokens)
        parsed = exchange(llm.PHASE_APPROXIMATION, prompt)
        if not isinstance(parsed, GroundedNames):
            reason = parsed.reason if isinstance(parsed, Unparseable) else "expected grounded names"
            log.outcome = Failed(UNPARSEABLE_RESPONSE, reason)
            return log
        grounded: set[str] = set()
        for name in parsed.concepts + parsed.relationships:
            grounded.update(resolve_name(index, name))  # unknown names are dropped
        current = seed_slice(ontology, grounded)
        log.slices.append(current)

        # Phase 2: refinement loop.
        state: PhaseState = Refinement(1, current)
        while isinstance(state, Refinement):
            slice_turtle = verbalize_slice(ontology, state.slice_)
            prompt = llm.build_refinement_prompt(question, slice_turtle, config.context_budget_tokens)
            parsed = exchange(llm.PHASE_REFINEMENT, prompt)
            resolution = None
            if isinstance(parsed, Missing) and not parsed.report.is_empty:
                resolution = resolve_missing(ontology, index, state.slice_, parsed.report, config.max_hops)
            state = decide_transition(ontology, state, parsed, resolution, config.max_refinement_steps)
            if isinstance(state, (Refinement, Translation)):
                if state.slice_ != log.slices[-1]:
                    log.slices.append(state.slice_)

        # Phase 3: translation and the conformance gate.
        if isinstance(state, Translation):
            slice_turtle = verbalize_slice(ontology, state.slice_)
            if state.pending_query is not None:
                state = gate(state.pending_query, state.slice_, slice_turtle)
            else:
                prompt = llm.build_translation_prompt(question, slice_turtle, config.context_budget_tokens)
                parsed = exchange(llm.PHASE_TRANSLATION, prompt)
                if isinstance(parsed, SparqlProposed):
                    state = gate(parsed.query_text, state.slice_, slice_turtle)
                else:
                    reason = parsed.reason if isinstance(parsed, Unparseable) else "expected a query"
                    state = Failed(UNPARSEABLE_RESPONSE, reason)

        log.outcome = state
    except llm.BudgetExceededError as exc:
        log.outcome = Failed(BUDGET_EXCEEDED, str(exc))
    except llm.GatewayError as exc:
        log.outcome = Failed(PROVIDER_ERROR, str(exc))
    return log
