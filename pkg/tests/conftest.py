"""Shared fixtures and independent oracles.

The oracles here deliberately use the dumbest mechanism that can be right:
scan-everything-until-nothing-changes closures, plain BFS distance maps over
a brute-force adjacency table, and union-find for connectivity. They share no
code with the implementations they check.
"""

from __future__ import annotations

import random
from collections import deque

import pytest

from ontoslice.model import (
    SUBCLASS_EDGE,
    XSD_NS,
    Attribute,
    Concept,
    Ontology,
    Relationship,
)
from ontoslice.generate import toy_ontology
from ontoslice.slicing import Slice

TEL = "http://example.org/telecom#"


def tel(name: str) -> str:
    return TEL + name


@pytest.fixture(scope="session")
def toy() -> Ontology:
    return toy_ontology()


# ---------------------------------------------------------------------------
# Random ontology builder (independent of the synthetic generator)
# ---------------------------------------------------------------------------

def random_ontology(
    rng: random.Random,
    max_concepts: int = 12,
    max_relationships: int = 10,
    max_attributes: int = 8,
    connected: bool = False,
    with_hierarchy: bool = True,
) -> Ontology:
    ns = "urn:test:"
    n_concepts = rng.randint(1, max_concepts)
    concept_iris = [f"{ns}C{i}" for i in range(n_concepts)]

    superclasses: dict[str, set[str]] = {iri: set() for iri in concept_iris}
    if with_hierarchy:
        for i, iri in enumerate(concept_iris):
            if i > 0 and rng.random() < 0.4:
                superclasses[iri].add(concept_iris[rng.randrange(i)])

    n_rels = rng.randint(0, max_relationships)
    if connected and n_concepts > 1:
        n_rels = max(n_rels, n_concepts - 1)
    relationships = {}
    order = list(concept_iris)
    rng.shuffle(order)
    for r in range(n_rels):
        iri = f"{ns}r{r}"
        if connected and r < n_concepts - 1:
            domain, range_ = order[r + 1], order[rng.randrange(r + 1)]
        else:
            domain = rng.choice(concept_iris)
            range_ = rng.choice(concept_iris)
        n_domains = 1 if rng.random() < 0.8 else rng.randint(1, 2)
        n_ranges = 1 if rng.random() < 0.8 else rng.randint(1, 2)
        domains = {domain} | {rng.choice(concept_iris) for _ in range(n_domains - 1)}
        ranges = {range_} | {rng.choice(concept_iris) for _ in range(n_ranges - 1)}
        relationships[iri] = Relationship(
            iri,
            label=f"rel {r}" if rng.random() < 0.5 else None,
            comment="test edge" if rng.random() < 0.3 else None,
            domains=frozenset(domains),
            ranges=frozenset(ranges),
        )

    attributes = {}
    for a in range(rng.randint(0, max_attributes)):
        iri = f"{ns}a{a}"
        n_domains = 1 if rng.random() < 0.8 else 2
        domains = {rng.choice(concept_iris) for _ in range(n_domains)}
        attributes[iri] = Attribute(
            iri,
            datatype=XSD_NS + rng.choice(["string", "integer", "decimal"]),
            label=f"attr {a}" if rng.random() < 0.5 else None,
            domains=frozenset(domains),
        )

    concepts = {
        iri: Concept(
            iri,
            label=f"concept {i}" if rng.random() < 0.7 else None,
            comment="a test concept" if rng.random() < 0.3 else None,
            superclasses=frozenset(superclasses[iri]),
        )
        for i, iri in enumerate(concept_iris)
    }
    return Ontology(concepts, relationships, attributes, {"t": ns})


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def closure_oracle(ontology: Ontology, seed_iris) -> Slice:
    """Exhaustive fixpoint of the slice closure rules by repeated full scans."""
    concepts: set[str] = set()
    relationships: set[str] = set()
    attributes: set[str] = set()
    for iri in seed_iris:
        if iri in ontology.concepts:
            concepts.add(iri)
        elif iri in ontology.relationships:
            relationships.add(iri)
        elif iri in ontology.attributes:
            attributes.add(iri)
        else:
            raise AssertionError(f"oracle got unknown IRI {iri}")
    while True:
        before = (len(concepts), len(relationships), len(attributes))
        for rel in list(relationships):
            concepts |= ontology.relationships[rel].domains
            concepts |= ontology.relationships[rel].ranges
        for attr in list(attributes):
            concepts |= ontology.attributes[attr].domains
        for concept in list(concepts):
            concepts |= ontology.concepts[concept].superclasses
        for attr_iri, attr in ontology.attributes.items():
            if attr.domains & concepts:
                attributes.add(attr_iri)
        if (len(concepts), len(relationships), len(attributes)) == before:
            return Slice(frozenset(concepts), frozenset(relationships), frozenset(attributes))


def brute_force_undirected_edges(ontology: Ontology) -> set[tuple[str, str, str]]:
    """Every traversable edge as (low endpoint, high endpoint, edge IRI)."""
    edges: set[tuple[str, str, str]] = set()
    for rel in ontology.relationships.values():
        for d in rel.domains:
            for r in rel.ranges:
                edges.add((min(d, r), max(d, r), rel.iri))
    for concept in ontology.concepts.values():
        for parent in concept.superclasses:
            edges.add((min(concept.iri, parent), max(concept.iri, parent), SUBCLASS_EDGE))
    return edges


def bfs_distances_oracle(ontology: Ontology, source: str) -> dict[str, int]:
    adjacency: dict[str, set[str]] = {iri: set() for iri in ontology.concepts}
    for a, b, _edge in brute_force_undirected_edges(ontology):
        adjacency[a].add(b)
        adjacency[b].add(a)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for other in adjacency[node]:
            if other not in dist:
                dist[other] = dist[node] + 1
                queue.append(other)
    return dist


def component_count(ontology: Ontology) -> int:
    parent = {iri: iri for iri in ontology.concepts}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _edge in brute_force_undirected_edges(ontology):
        parent[find(a)] = find(b)
    return len({find(iri) for iri in ontology.concepts})


def assert_valid_path(ontology: Ontology, path) -> None:
    """Chain property, simplicity, and edge existence per the neighbor view."""
    from ontoslice.model import neighbors

    visited = []
    for i, step in enumerate(path.steps):
        if i > 0:
            assert path.steps[i - 1].target == step.source, "chain broken"
        assert (step.edge, step.direction, step.target) in set(neighbors(ontology, step.source))
        visited.append(step.source)
    if path.steps:
        visited.append(path.steps[-1].target)
    assert len(visited) == len(set(visited)), "path revisits a concept"
