"""ontoslice: natural-language-to-SPARQL translation by incremental ontology
revelation.

An LLM is shown progressively larger slices of an ontology, derived on demand
with closure rules and path-finding, until the slice is detailed enough to
emit a SPARQL query that conforms to exactly that slice.
"""

from .generate import GenSpec, generate, toy_ontology
from .llm import LlmProvider, MissingReport, parse_response
from .model import (
    Attribute,
    Concept,
    NameIndex,
    Ontology,
    OntologyError,
    Relationship,
    UnknownIriError,
    axiom_count,
    build_index,
    neighbors,
    resolve_name,
)
from .paths import Path, PathStep, find_path, resolve_missing
from .pipeline import PipelineConfig, SessionLog, run_pipeline
from .slicing import Slice, expand_slice, full_slice, seed_slice
from .sparql import check_conformance, check_query, extract_skeleton
from .turtleio import ParseDiagnostic, ParseResult, parse_turtle, serialize_turtle
from .verbalize import estimate_tokens, verbalize_catalog, verbalize_slice

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "Concept",
    "GenSpec",
    "LlmProvider",
    "MissingReport",
    "NameIndex",
    "Ontology",
    "OntologyError",
    "ParseDiagnostic",
    "ParseResult",
    "Path",
    "PathStep",
    "PipelineConfig",
    "Relationship",
    "SessionLog",
    "Slice",
    "UnknownIriError",
    "axiom_count",
    "build_index",
    "check_conformance",
    "check_query",
    "estimate_tokens",
    "expand_slice",
    "extract_skeleton",
    "find_path",
    "full_slice",
    "generate",
    "neighbors",
    "parse_response",
    "parse_turtle",
    "resolve_missing",
    "resolve_name",
    "run_pipeline",
    "seed_slice",
    "serialize_turtle",
    "toy_ontology",
    "verbalize_catalog",
    "verbalize_slice",
]
