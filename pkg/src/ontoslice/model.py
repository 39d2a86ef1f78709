"""In-memory ontology model: concepts, relationships, attributes, name index.

The model covers the OWL subset the rest of the pipeline consumes: named
classes, subClassOf between named classes, object properties with named-class
domains/ranges, datatype properties, rdfs:label and rdfs:comment. Everything
is immutable after construction; all operations are pure reads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

# Edge marker used for subclass steps in neighbor views and paths.
SUBCLASS_EDGE = RDFS_NS + "subClassOf"

# Namespaces whose IRIs are vocabulary built-ins, never user ontology elements.
BUILTIN_NAMESPACES = (RDF_NS, RDFS_NS, OWL_NS, XSD_NS)

_IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>\"{}|^`\\]*$")

_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_WS_RE = re.compile(r"\s+")


class OntologyError(ValueError):
    """Raised when a construction violates the ontology invariants."""


class UnknownIriError(OntologyError):
    """Raised when an operation receives IRIs that do not resolve."""

    def __init__(self, iris: Iterable[str], context: str = ""):
        self.iris = tuple(sorted(set(iris)))
        where = f" in {context}" if context else ""
        super().__init__(f"unknown IRIs{where}: {', '.join(self.iris)}")


def is_absolute_iri(text: str) -> bool:
    """True when text is a plausible absolute IRI (scheme + ':')."""
    return bool(text) and _IRI_RE.match(text) is not None


def local_name(iri: str) -> str:
    """The fragment after '#', else the last path segment, else the tail after
    the last ':' (urn-style IRIs)."""
    if "#" in iri:
        return iri.rsplit("#", 1)[1]
    if "/" in iri:
        return iri.rstrip("/").rsplit("/", 1)[1]
    return iri.rsplit(":", 1)[1]


def split_words(name: str) -> str:
    """Lowercased word form of a camel-case or underscore name.

    "hasAccountManager" -> "has account manager".
    """
    spaced = _CAMEL_RE.sub(" ", name).replace("_", " ").replace("-", " ")
    return canonical_name(spaced)


def canonical_name(text: str) -> str:
    """Lowercase and collapse internal whitespace; the index key form."""
    return _WS_RE.sub(" ", text.strip()).lower()


def in_builtin_namespace(iri: str) -> bool:
    return iri.startswith(BUILTIN_NAMESPACES)


@dataclass(frozen=True)
class Concept:
    iri: str
    label: str | None = None
    comment: str | None = None
    superclasses: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Relationship:
    iri: str
    label: str | None = None
    comment: str | None = None
    domains: frozenset[str] = frozenset()
    ranges: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Attribute:
    iri: str
    datatype: str = XSD_NS + "string"
    label: str | None = None
    comment: str | None = None
    domains: frozenset[str] = frozenset()


Element = Concept | Relationship | Attribute


class NeighborEdge(NamedTuple):
    edge: str
    direction: str  # "outgoing" | "incoming" | "super" | "sub"
    other: str


_DIRECTION_RANK = {"outgoing": 0, "incoming": 1, "super": 2, "sub": 3}


def _neighbor_sort_key(edge: NeighborEdge) -> tuple[str, str, int]:
    return (edge.edge, edge.other, _DIRECTION_RANK[edge.direction])


class Ontology:
    """Validated, immutable concept/relationship/attribute graph.

    Construction checks referential closure, key disjointness, superclass
    acyclicity, IRI syntax, and the non-empty domain/range rules, raising
    OntologyError with every problem listed.
    """

    def __init__(
        self,
        concepts: dict[str, Concept] | None = None,
        relationships: dict[str, Relationship] | None = None,
        attributes: dict[str, Attribute] | None = None,
        prefixes: dict[str, str] | None = None,
    ):
        self.concepts: dict[str, Concept] = dict(concepts or {})
        self.relationships: dict[str, Relationship] = dict(relationships or {})
        self.attributes: dict[str, Attribute] = dict(attributes or {})
        self.prefixes: dict[str, str] = dict(prefixes or {})
        self._validate()
        self._build_graph_view()

    # -- validation ----------------------------------------------------------

    def _validate(self) -> None:
        problems: list[str] = []
        for mapping, kind in (
            (self.concepts, "concept"),
            (self.relationships, "relationship"),
            (self.attributes, "attribute"),
        ):
            for key, element in mapping.items():
                if key != element.iri:
                    problems.append(f"{kind} key {key!r} != element iri {element.iri!r}")
                if not is_absolute_iri(element.iri):
                    problems.append(f"{kind} iri is not an absolute IRI: {element.iri!r}")
                if element.label is not None and not element.label.strip():
                    problems.append(f"{kind} {element.iri} has a blank label")

        keys = [set(self.concepts), set(self.relationships), set(self.attributes)]
        for i in range(3):
            for j in range(i + 1, 3):
                for iri in sorted(keys[i] & keys[j]):
                    problems.append(f"IRI declared with two kinds: {iri}")

        def check_refs(owner: str, refs: frozenset[str], role: str) -> None:
            for ref in sorted(refs):
                if ref not in self.concepts:
                    problems.append(f"{owner} references unknown concept as {role}: {ref}")

        for concept in self.concepts.values():
            if concept.iri in concept.superclasses:
                problems.append(f"concept is its own superclass: {concept.iri}")
            check_refs(concept.iri, concept.superclasses, "superclass")
        for rel in self.relationships.values():
            if not rel.domains:
                problems.append(f"relationship has no domain: {rel.iri}")
            if not rel.ranges:
                problems.append(f"relationship has no range: {rel.iri}")
            check_refs(rel.iri, rel.domains, "domain")
            check_refs(rel.iri, rel.ranges, "range")
        for attr in self.attributes.values():
            if not attr.domains:
                problems.append(f"attribute has no domain: {attr.iri}")
            check_refs(attr.iri, attr.domains, "domain")
            if not attr.datatype.startswith(XSD_NS):
                problems.append(f"attribute datatype outside xsd: {attr.iri} -> {attr.datatype}")

        for prefix, namespace in self.prefixes.items():
            if not is_absolute_iri(namespace):
                problems.append(f"prefix {prefix!r} maps to a non-IRI namespace: {namespace!r}")

        problems.extend(self._superclass_cycles())
        if problems:
            raise OntologyError("; ".join(problems))

    def _superclass_cycles(self) -> list[str]:
        # Iterative DFS; a node revisited while still on the current path is a cycle.
        state: dict[str, int] = {}  # 1 = on path, 2 = done
        problems: list[str] = []
        for start in self.concepts:
            if state.get(start):
                continue
            stack: list[tuple[str, Iterable[str]]] = [(start, iter(sorted(self.concepts[start].superclasses)))]
            state[start] = 1
            while stack:
                node, supers = stack[-1]
                advanced = False
                for parent in supers:
                    if parent not in self.concepts:
                        continue  # dangling ref already reported
                    mark = state.get(parent)
                    if mark == 1:
                        problems.append(f"superclass cycle through {parent}")
                    elif mark is None:
                        state[parent] = 1
                        stack.append((parent, iter(sorted(self.concepts[parent].superclasses))))
                        advanced = True
                        break
                if not advanced:
                    state[node] = 2
                    stack.pop()
        return problems

    # -- derived graph view ---------------------------------------------------

    def _build_graph_view(self) -> None:
        adjacency: dict[str, list[NeighborEdge]] = {iri: [] for iri in self.concepts}
        for rel in self.relationships.values():
            for domain in rel.domains:
                for rng in rel.ranges:
                    adjacency[domain].append(NeighborEdge(rel.iri, "outgoing", rng))
                    adjacency[rng].append(NeighborEdge(rel.iri, "incoming", domain))
        for concept in self.concepts.values():
            for parent in concept.superclasses:
                adjacency[concept.iri].append(NeighborEdge(SUBCLASS_EDGE, "super", parent))
                adjacency[parent].append(NeighborEdge(SUBCLASS_EDGE, "sub", concept.iri))
        self._neighbors: dict[str, tuple[NeighborEdge, ...]] = {
            iri: tuple(sorted(set(edges), key=_neighbor_sort_key))
            for iri, edges in adjacency.items()
        }
        by_domain: dict[str, list[str]] = {}
        for attr in self.attributes.values():
            for domain in attr.domains:
                by_domain.setdefault(domain, []).append(attr.iri)
        self._attributes_by_domain: dict[str, tuple[str, ...]] = {
            iri: tuple(sorted(attrs)) for iri, attrs in by_domain.items()
        }

    # -- queries --------------------------------------------------------------

    def element_kind(self, iri: str) -> str | None:
        if iri in self.concepts:
            return "concept"
        if iri in self.relationships:
            return "relationship"
        if iri in self.attributes:
            return "attribute"
        return None

    def element(self, iri: str) -> Element | None:
        return self.concepts.get(iri) or self.relationships.get(iri) or self.attributes.get(iri)

    def attributes_of(self, concept: str) -> tuple[str, ...]:
        return self._attributes_by_domain.get(concept, ())

    def superclass_chain(self, concept: str) -> set[str]:
        """All ancestors of a concept via superclass edges (excluding itself)."""
        seen: set[str] = set()
        frontier = list(self.concepts[concept].superclasses)
        while frontier:
            parent = frontier.pop()
            if parent in seen:
                continue
            seen.add(parent)
            frontier.extend(self.concepts[parent].superclasses)
        return seen

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ontology):
            return NotImplemented
        return (
            self.concepts == other.concepts
            and self.relationships == other.relationships
            and self.attributes == other.attributes
            and self.prefixes == other.prefixes
        )

    def __hash__(self) -> int:  # dict fields make instances unhashable by default
        return hash((frozenset(self.concepts), frozenset(self.relationships), frozenset(self.attributes)))

    def __repr__(self) -> str:
        return (
            f"Ontology(concepts={len(self.concepts)}, relationships={len(self.relationships)}, "
            f"attributes={len(self.attributes)})"
        )


@dataclass(frozen=True)
class NameIndex:
    """Surface-name lookup table from canonical names back to element IRIs."""

    entries: dict[str, frozenset[str]] = field(default_factory=dict)


def build_index(ontology: Ontology) -> NameIndex:
    """Index every element under its label, local name, and split local name."""
    entries: dict[str, set[str]] = {}

    def add(name: str, iri: str) -> None:
        key = canonical_name(name)
        if key:
            entries.setdefault(key, set()).add(iri)

    for mapping in (ontology.concepts, ontology.relationships, ontology.attributes):
        for element in mapping.values():
            local = local_name(element.iri)
            if element.label:
                add(element.label, element.iri)
            add(local, element.iri)
            add(split_words(local), element.iri)

    return NameIndex({name: frozenset(iris) for name, iris in entries.items()})


def resolve_name(index: NameIndex, name: str) -> frozenset[str]:
    """Exact lookup after canonicalization; empty set when unknown."""
    return index.entries.get(canonical_name(name), frozenset())


def axiom_count(ontology: Ontology) -> int:
    """Number of statements the ontology carries (kept in lockstep with turtleio)."""
    total = 0
    for concept in ontology.concepts.values():
        total += 1 + (concept.label is not None) + (concept.comment is not None)
        total += len(concept.superclasses)
    for rel in ontology.relationships.values():
        total += 1 + (rel.label is not None) + (rel.comment is not None)
        total += len(rel.domains) + len(rel.ranges)
    for attr in ontology.attributes.values():
        total += 1 + (attr.label is not None) + (attr.comment is not None)
        total += len(attr.domains) + 1
    return total


def neighbors(ontology: Ontology, concept: str) -> list[NeighborEdge]:
    """Adjacent edges of a concept over relationships and subclass links.

    Ordered by (edge IRI, other IRI, direction) so traversals are deterministic.
    """
    if concept not in ontology.concepts:
        raise UnknownIriError([concept], "neighbors")
    return list(ontology._neighbors[concept])
