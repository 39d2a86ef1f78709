"""Ontology slices: closed, monotonically growable sub-ontologies.

A slice names the elements an LLM is allowed to see and use. Slices are kept
closed so every relationship shown has all of its endpoints shown, every
concept shown carries its full superclass chain, and every shown concept's
attributes ride along. All growth funnels through one closure function so the
closure policy can be swapped without touching callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .model import SUBCLASS_EDGE, Ontology, UnknownIriError


@dataclass(frozen=True)
class Slice:
    concepts: frozenset[str] = frozenset()
    relationships: frozenset[str] = frozenset()
    attributes: frozenset[str] = frozenset()

    def elements(self) -> frozenset[str]:
        return self.concepts | self.relationships | self.attributes

    def issubset(self, other: "Slice") -> bool:
        return (
            self.concepts <= other.concepts
            and self.relationships <= other.relationships
            and self.attributes <= other.attributes
        )

    def __len__(self) -> int:
        return len(self.concepts) + len(self.relationships) + len(self.attributes)

    def as_dict(self) -> dict[str, list[str]]:
        """Sorted-list form used by session logs and the CLI."""
        return {
            "concepts": sorted(self.concepts),
            "relationships": sorted(self.relationships),
            "attributes": sorted(self.attributes),
        }

    @classmethod
    def from_dict(cls, data: dict[str, list[str]]) -> "Slice":
        return cls(
            frozenset(data.get("concepts", ())),
            frozenset(data.get("relationships", ())),
            frozenset(data.get("attributes", ())),
        )


def _split_by_kind(ontology: Ontology, iris: Iterable[str], context: str) -> tuple[set[str], set[str], set[str]]:
    concepts: set[str] = set()
    relationships: set[str] = set()
    attributes: set[str] = set()
    unknown: set[str] = set()
    for iri in iris:
        kind = ontology.element_kind(iri)
        if kind == "concept":
            concepts.add(iri)
        elif kind == "relationship":
            relationships.add(iri)
        elif kind == "attribute":
            attributes.add(iri)
        else:
            unknown.add(iri)
    if unknown:
        raise UnknownIriError(unknown, context)
    return concepts, relationships, attributes


def close(
    ontology: Ontology,
    concepts: Iterable[str],
    relationships: Iterable[str],
    attributes: Iterable[str],
) -> Slice:
    """Close the given element sets under the slice rules.

    Rules, applied to a fixpoint:
      * an included relationship includes all of its domains and ranges;
      * an included attribute includes all of its domains;
      * an included concept includes its direct superclasses;
      * an included concept includes every attribute it is a domain of.

    Relationships are never added by closure; they only enter via seeds,
    explicit additions, or paths.
    """
    rel_set = set(relationships)
    attr_set = set(attributes)
    concept_set: set[str] = set()

    pending_concepts: list[str] = list(concepts)
    for rel in rel_set:
        relationship = ontology.relationships[rel]
        pending_concepts.extend(relationship.domains)
        pending_concepts.extend(relationship.ranges)
    pending_attrs: list[str] = list(attr_set)

    while pending_concepts or pending_attrs:
        while pending_concepts:
            concept = pending_concepts.pop()
            if concept in concept_set:
                continue
            concept_set.add(concept)
            pending_concepts.extend(ontology.concepts[concept].superclasses)
            for attr in ontology.attributes_of(concept):
                if attr not in attr_set:
                    attr_set.add(attr)
                    pending_attrs.append(attr)
        while pending_attrs:
            attr = pending_attrs.pop()
            pending_concepts.extend(
                d for d in ontology.attributes[attr].domains if d not in concept_set
            )

    return Slice(frozenset(concept_set), frozenset(rel_set), frozenset(attr_set))


def seed_slice(ontology: Ontology, grounded: Iterable[str]) -> Slice:
    """First slice from the grounded element IRIs of the approximation phase."""
    concepts, relationships, attributes = _split_by_kind(ontology, grounded, "seed_slice")
    return close(ontology, concepts, relationships, attributes)


def expand_slice(ontology: Ontology, slice_: Slice, additions: Iterable[str], paths: Iterable = ()) -> Slice:
    """Grow a slice with explicit additions and discovered paths, then re-close."""
    concepts, relationships, attributes = _split_by_kind(ontology, additions, "expand_slice")
    concepts |= slice_.concepts
    relationships |= slice_.relationships
    attributes |= slice_.attributes
    for path in paths:
        for step in path.steps:
            concepts.add(step.source)
            concepts.add(step.target)
            if step.edge != SUBCLASS_EDGE:
                relationships.add(step.edge)
    unknown = {c for c in concepts if c not in ontology.concepts}
    unknown |= {r for r in relationships if r not in ontology.relationships}
    if unknown:
        raise UnknownIriError(unknown, "expand_slice")
    return close(ontology, concepts, relationships, attributes)


def full_slice(ontology: Ontology) -> Slice:
    return Slice(
        frozenset(ontology.concepts),
        frozenset(ontology.relationships),
        frozenset(ontology.attributes),
    )


def induced_ontology(ontology: Ontology, slice_: Slice) -> Ontology:
    """The sub-ontology a slice denotes; prefixes are carried over unchanged.

    Raises UnknownIriError when the slice references IRIs the ontology lacks.
    Closure guarantees the result satisfies the ontology invariants.
    """
    missing = [i for i in slice_.concepts if i not in ontology.concepts]
    missing += [i for i in slice_.relationships if i not in ontology.relationships]
    missing += [i for i in slice_.attributes if i not in ontology.attributes]
    if missing:
        raise UnknownIriError(missing, "induced_ontology")
    return Ontology(
        {iri: ontology.concepts[iri] for iri in slice_.concepts},
        {iri: ontology.relationships[iri] for iri in slice_.relationships},
        {iri: ontology.attributes[iri] for iri in slice_.attributes},
        dict(ontology.prefixes),
    )
