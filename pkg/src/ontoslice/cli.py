"""Command-line entry point.

Subcommands: ingest, ask, slice, path, validate, gen, verbalize. All commands
are non-interactive; under a scripted provider `ask` is fully deterministic,
which is what CI runs. Configuration precedence is flags > environment >
config file > defaults; the provider credential is only ever read from the
environment.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import llm, pipeline
from .generate import GenSpec, generate
from .model import Ontology, UnknownIriError, build_index, axiom_count, resolve_name
from .paths import find_path
from .slicing import Slice, full_slice, seed_slice
from .sparql import check_query
from .turtleio import parse_turtle, serialize_turtle
from .verbalize import verbalize_catalog

CONFIG_ENV_VAR = "ONTOSLICE_CONFIG"
DEFAULT_CONFIG_PATH = "ontoslice.json"

EXIT_OK = 0
EXIT_INPUT = 1  # file/parse/lookup failures
EXIT_USAGE = 2  # argparse's own convention
EXIT_PROVIDER = 3
EXIT_NO_PROGRESS = 4
EXIT_STEP_LIMIT = 5
EXIT_NONCONFORMING = 6
EXIT_BUDGET = 7
EXIT_UNPARSEABLE = 8

FAILURE_EXIT_CODES = {
    pipeline.PROVIDER_ERROR: EXIT_PROVIDER,
    pipeline.NO_PROGRESS: EXIT_NO_PROGRESS,
    pipeline.STEP_LIMIT: EXIT_STEP_LIMIT,
    pipeline.NONCONFORMING_QUERY: EXIT_NONCONFORMING,
    pipeline.BUDGET_EXCEEDED: EXIT_BUDGET,
    pipeline.UNPARSEABLE_RESPONSE: EXIT_UNPARSEABLE,
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


@dataclass
class Config:
    ontology_path: str | None = None
    log_dir: str = "logs"
    context_budget_tokens: int = llm.DEFAULT_BUDGET_TOKENS
    max_refinement_steps: int = 5
    max_hops: int = 6
    provider_kind: str | None = None  # "live" | "scripted"
    endpoint: str | None = None
    model: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    transcript_path: str | None = None

    def validate(self) -> None:
        if self.context_budget_tokens <= 0:
            raise CliError("context_budget_tokens must be positive", EXIT_USAGE)
        if self.max_refinement_steps <= 0:
            raise CliError("max_refinement_steps must be positive", EXIT_USAGE)
        if self.max_hops < 0:
            raise CliError("max_hops must be non-negative", EXIT_USAGE)


_CONFIG_KEYS = {
    "ontology": "ontology_path",
    "log_dir": "log_dir",
    "context_budget_tokens": "context_budget_tokens",
    "max_refinement_steps": "max_refinement_steps",
    "max_hops": "max_hops",
}
_PROVIDER_KEYS = {
    "kind": "provider_kind",
    "endpoint": "endpoint",
    "model": "model",
    "timeout": "timeout",
    "max_retries": "max_retries",
    "transcript": "transcript_path",
}


def load_config(args: argparse.Namespace) -> Config:
    config = Config()
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if path is None and Path(DEFAULT_CONFIG_PATH).exists():
        path = DEFAULT_CONFIG_PATH
    if path is not None:
        try:
            data = json.loads(Path(path).read_text("utf-8"))
        except FileNotFoundError:
            raise CliError(f"config file not found: {path}", EXIT_USAGE)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read config file {path}: {exc}", EXIT_USAGE)
        if not isinstance(data, dict):
            raise CliError(f"config file {path} must hold a JSON object", EXIT_USAGE)
        for key, attr in _CONFIG_KEYS.items():
            if key in data:
                setattr(config, attr, data[key])
        provider = data.get("provider", {})
        if not isinstance(provider, dict):
            raise CliError("config 'provider' must be an object", EXIT_USAGE)
        for key, attr in _PROVIDER_KEYS.items():
            if key in provider:
                setattr(config, attr, provider[key])

    overrides = {
        "ontology": "ontology_path",
        "log_dir": "log_dir",
        "budget": "context_budget_tokens",
        "max_steps": "max_refinement_steps",
        "max_hops": "max_hops",
        "endpoint": "endpoint",
        "model": "model",
        "timeout": "timeout",
        "max_retries": "max_retries",
        "transcript": "transcript_path",
    }
    for flag, attr in overrides.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config, attr, value)
    config.validate()
    return config


def make_provider(config: Config) -> llm.LlmProvider:
    kind = config.provider_kind
    if kind is None:
        kind = "scripted" if config.transcript_path else "live"
    if kind == "scripted":
        if not config.transcript_path:
            raise CliError("scripted provider needs a transcript file", EXIT_USAGE)
        try:
            text = Path(config.transcript_path).read_text("utf-8")
            entries = llm.load_transcript(text)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load transcript {config.transcript_path}: {exc}", EXIT_USAGE)
        return llm.LlmProvider(kind="scripted", transcript=entries, timeout=config.timeout)
    if not config.endpoint or not config.model:
        raise CliError("live provider needs an endpoint and a model", EXIT_USAGE)
    return llm.LlmProvider(
        kind="live",
        endpoint=config.endpoint,
        model=config.model,
        timeout=config.timeout,
        max_retries=config.max_retries,
    )


def load_ontology(path: str | None) -> Ontology:
    if not path:
        raise CliError("no ontology file given (flag --ontology or config 'ontology')", EXIT_USAGE)
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise CliError(f"cannot read ontology file: {exc}")
    result = parse_turtle(text)
    for warning in result.warnings:
        print(f"{path}:{warning}", file=sys.stderr)
    if result.ontology is None:
        for error in result.errors:
            print(f"{path}:{error}", file=sys.stderr)
        raise CliError(f"ontology file has {len(result.errors)} error(s)")
    return result.ontology


def resolve_names(ontology: Ontology, names: list[str]) -> set[str]:
    index = build_index(ontology)
    resolved: set[str] = set()
    unresolved: list[str] = []
    for name in names:
        iris = resolve_name(index, name)
        if iris:
            resolved.update(iris)
        else:
            unresolved.append(name)
    if unresolved:
        for name in unresolved:
            print(f"unresolved: {name}", file=sys.stderr)
        raise CliError(f"{len(unresolved)} name(s) did not resolve")
    return resolved


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> int:
    ontology = load_ontology(args.file)
    print(f"concepts: {len(ontology.concepts)}")
    print(f"relationships: {len(ontology.relationships)}")
    print(f"attributes: {len(ontology.attributes)}")
    print(f"axioms: {axiom_count(ontology)}")
    return EXIT_OK


def cmd_ask(args: argparse.Namespace) -> int:
    config = load_config(args)
    ontology = load_ontology(config.ontology_path)
    provider = make_provider(config)
    run_config = pipeline.PipelineConfig(
        context_budget_tokens=config.context_budget_tokens,
        max_refinement_steps=config.max_refinement_steps,
        max_hops=config.max_hops,
    )
    try:
        log = pipeline.run_pipeline(args.question, ontology, provider, run_config)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)

    log_dir = Path(config.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
    digest = hashlib.sha256(args.question.encode("utf-8")).hexdigest()[:12]
    log_path = log_dir / f"{stamp}-{digest}.json"
    log_path.write_text(log.to_json(), encoding="utf-8")

    outcome = log.outcome
    if isinstance(outcome, pipeline.Done):
        print(outcome.query)
        return EXIT_OK
    assert isinstance(outcome, pipeline.Failed)
    print(f"failed ({outcome.reason}): {outcome.detail}", file=sys.stderr)
    print(f"session log: {log_path}", file=sys.stderr)
    return FAILURE_EXIT_CODES.get(outcome.reason, EXIT_INPUT)


def cmd_slice(args: argparse.Namespace) -> int:
    ontology = load_ontology(args.ontology)
    grounded = resolve_names(ontology, args.names)
    slice_ = seed_slice(ontology, grounded)
    print(json.dumps(slice_.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_path(args: argparse.Namespace) -> int:
    ontology = load_ontology(args.ontology)
    index = build_index(ontology)
    sources = sorted(i for i in resolve_name(index, args.source) if i in ontology.concepts)
    targets = sorted(i for i in resolve_name(index, args.target) if i in ontology.concepts)
    if not sources:
        print(f"unresolved: {args.source}", file=sys.stderr)
        return EXIT_INPUT
    if not targets:
        print(f"unresolved: {args.target}", file=sys.stderr)
        return EXIT_INPUT
    best = None
    for a in sources:
        for b in targets:
            path = find_path(ontology, a, b, args.max_hops)
            if path is None:
                continue
            key = (len(path), path.sort_key(), a, b)
            if best is None or key < best[0]:
                best = (key, path)
    if best is None:
        print(f"no path within {args.max_hops} hops", file=sys.stderr)
        return EXIT_INPUT
    path = best[1]
    if not path.steps:
        print("(empty path)")
    for step in path.steps:
        print(f"{step.source} -[{step.edge} {step.direction}]-> {step.target}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    ontology = load_ontology(args.ontology)
    try:
        query = Path(args.query_file).read_text("utf-8")
    except OSError as exc:
        raise CliError(f"cannot read query file: {exc}")
    if args.slice:
        try:
            data = json.loads(Path(args.slice).read_text("utf-8"))
            slice_ = Slice.from_dict(data)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load slice file {args.slice}: {exc}")
    else:
        slice_ = full_slice(ontology)
    _, violations = check_query(query, ontology, slice_)
    for violation in violations:
        print(f"{violation.kind} {violation.offending} {violation.line}:{violation.column} {violation.detail}")
    return EXIT_NONCONFORMING if violations else EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GenSpec(
        seed=args.seed,
        n_concepts=args.concepts,
        n_relationships=args.relationships,
        n_attributes=args.attributes,
        hierarchy_depth=args.depth,
        connectivity="components" if args.components else "connected",
        n_components=args.components or 1,
    )
    try:
        ontology = generate(spec)
    except ValueError as exc:
        raise CliError(f"invalid generator spec: {exc}", EXIT_USAGE)
    text = serialize_turtle(ontology)
    Path(args.output).write_text(text, encoding="utf-8")
    print(f"wrote {args.output}: {len(ontology.concepts)} concepts, "
          f"{len(ontology.relationships)} relationships, {len(ontology.attributes)} attributes, "
          f"{axiom_count(ontology)} axioms")
    return EXIT_OK


def cmd_verbalize(args: argparse.Namespace) -> int:
    ontology = load_ontology(args.ontology)
    if args.formal:
        print(serialize_turtle(ontology), end="")
    else:
        print(verbalize_catalog(ontology, names_only=args.names_only))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontoslice",
        description="Translate natural language questions to SPARQL by incrementally revealing an ontology.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse a Turtle file and print element counts")
    p_ingest.add_argument("file")
    p_ingest.set_defaults(func=cmd_ingest)

    p_ask = sub.add_parser("ask", help="run a question through the pipeline")
    p_ask.add_argument("question")
    p_ask.add_argument("--config", help=f"config file (default: ${CONFIG_ENV_VAR} or {DEFAULT_CONFIG_PATH})")
    p_ask.add_argument("--ontology")
    p_ask.add_argument("--transcript", help="scripted provider transcript file")
    p_ask.add_argument("--endpoint")
    p_ask.add_argument("--model")
    p_ask.add_argument("--timeout", type=float)
    p_ask.add_argument("--max-retries", dest="max_retries", type=int)
    p_ask.add_argument("--budget", type=int, help="context budget in tokens")
    p_ask.add_argument("--max-steps", dest="max_steps", type=int)
    p_ask.add_argument("--max-hops", dest="max_hops", type=int)
    p_ask.add_argument("--log-dir", dest="log_dir")
    p_ask.set_defaults(func=cmd_ask)

    p_slice = sub.add_parser("slice", help="seed a slice from element names")
    p_slice.add_argument("--ontology", required=True)
    p_slice.add_argument("names", nargs="+")
    p_slice.set_defaults(func=cmd_slice)

    p_path = sub.add_parser("path", help="shortest path between two named concepts")
    p_path.add_argument("--ontology", required=True)
    p_path.add_argument("--max-hops", dest="max_hops", type=int, default=6)
    p_path.add_argument("source")
    p_path.add_argument("target")
    p_path.set_defaults(func=cmd_path)

    p_validate = sub.add_parser("validate", help="check a SPARQL query against an ontology slice")
    p_validate.add_argument("--ontology", required=True)
    p_validate.add_argument("--slice", help="slice JSON file; omit to validate against the full ontology")
    p_validate.add_argument("query_file")
    p_validate.set_defaults(func=cmd_validate)

    p_gen = sub.add_parser("gen", help="generate a synthetic ontology")
    p_gen.add_argument("--seed", type=int, default=7)
    p_gen.add_argument("--concepts", type=int, default=500)
    p_gen.add_argument("--relationships", type=int, default=1000)
    p_gen.add_argument("--attributes", type=int, default=300)
    p_gen.add_argument("--depth", type=int, default=4)
    p_gen.add_argument("--components", type=int, help="generate this many disconnected components")
    p_gen.add_argument("-o", "--output", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_verb = sub.add_parser("verbalize", help="print a catalog or formal rendering")
    p_verb.add_argument("--ontology", required=True)
    mode = p_verb.add_mutually_exclusive_group()
    mode.add_argument("--catalog", action="store_true", default=True)
    mode.add_argument("--formal", action="store_true", default=False)
    p_verb.add_argument("--names-only", dest="names_only", action="store_true")
    p_verb.set_defaults(func=cmd_verbalize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except UnknownIriError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
