"""Renderings of an ontology for prompting.

Two forms: a compact one-line-per-element natural language catalog (the cheap
whole-ontology overview used for grounding) and a formal Turtle rendering of a
slice (the detailed view used when asking for a translation). Token costs are
estimated with a chars/4 heuristic so budget comparisons stay deterministic
and dependency-free; a provider-reported count can override it upstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Element, Ontology, local_name, split_words
from .slicing import Slice, induced_ontology
from .turtleio import serialize_turtle


@dataclass(frozen=True)
class TokenEstimate:
    chars: int
    estimated_tokens: int


def estimate_tokens(text: str) -> TokenEstimate:
    chars = len(text)
    return TokenEstimate(chars, math.ceil(chars / 4))


def display_name(element: Element) -> str:
    """Label when present, else the split local name."""
    if element.label:
        return element.label
    return split_words(local_name(element.iri))


def _names(ontology: Ontology, iris) -> str:
    return ", ".join(sorted(display_name(ontology.element(i)) for i in iris))


def verbalize_catalog(ontology: Ontology, names_only: bool = False) -> str:
    """One line per element, concepts then relationships then attributes.

    names_only drops endpoints and comments, leaving bare element names.
    """
    lines: list[str] = []

    def order(mapping):
        return sorted(mapping.values(), key=lambda e: (display_name(e), e.iri))

    for concept in order(ontology.concepts):
        line = f"Concept: {display_name(concept)}"
        if not names_only and concept.comment:
            line += f" - {concept.comment}"
        lines.append(line)
    for rel in order(ontology.relationships):
        line = f"Relationship: {display_name(rel)}"
        if not names_only:
            line += f" (connects {_names(ontology, rel.domains)} to {_names(ontology, rel.ranges)})"
            if rel.comment:
                line += f" - {rel.comment}"
        lines.append(line)
    for attr in order(ontology.attributes):
        line = f"Attribute: {display_name(attr)}"
        if not names_only:
            line += f" of {_names(ontology, attr.domains)}, a {local_name(attr.datatype)}"
        lines.append(line)

    return "\n".join(lines)


def verbalize_slice(ontology: Ontology, slice_: Slice) -> str:
    """Formal Turtle for the sub-ontology a slice denotes."""
    return serialize_turtle(induced_ontology(ontology, slice_))
