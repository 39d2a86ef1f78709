"""Seeded synthetic ontologies at enterprise scale, plus the bundled toy.

Names come from syllable tables so they read like real vocabulary instead of
"Concept17" — the grounding phase and the name index only behave realistically
with natural-ish names. Everything is drawn from one random.Random stream, so
equal specs produce byte-identical serializations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .model import (
    OWL_NS,
    RDF_NS,
    RDFS_NS,
    XSD_NS,
    Attribute,
    Concept,
    Ontology,
    Relationship,
)
from .turtleio import parse_turtle

SCALE_NS = "http://example.org/network#"

_ONSETS = ("b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z")
_VOWELS = ("a", "e", "i", "o", "u")
_CODAS = ("", "", "", "", "n", "r", "s", "l")

# Attribute flavors: (label suffix, xsd datatype local name).
_ATTRIBUTE_KINDS = (
    ("code", "string"),
    ("count", "integer"),
    ("name", "string"),
    ("level", "integer"),
    ("date", "date"),
    ("flag", "boolean"),
    ("rate", "decimal"),
    ("amount", "decimal"),
)


@dataclass(frozen=True)
class GenSpec:
    seed: int
    n_concepts: int
    n_relationships: int
    n_attributes: int
    hierarchy_depth: int = 3
    connectivity: str = "connected"  # "connected" | "components"
    n_components: int = 1

    def validate(self) -> None:
        problems = []
        if min(self.n_concepts, self.n_relationships, self.n_attributes) < 0:
            problems.append("element counts must be non-negative")
        if self.hierarchy_depth < 1:
            problems.append("hierarchy_depth must be at least 1")
        if self.connectivity not in ("connected", "components"):
            problems.append(f"unknown connectivity mode: {self.connectivity!r}")
        if self.n_concepts == 0 and (self.n_relationships or self.n_attributes):
            problems.append("relationships and attributes require at least one concept")
        if self.connectivity == "connected":
            if self.n_concepts > 1 and self.n_relationships < self.n_concepts - 1:
                problems.append(
                    f"connected needs at least {self.n_concepts - 1} relationships for "
                    f"{self.n_concepts} concepts"
                )
        else:
            if self.n_components < 1:
                problems.append("n_components must be at least 1")
            if self.n_concepts and self.n_components > self.n_concepts:
                problems.append("more components than concepts")
            if self.n_relationships < self.n_concepts - self.n_components:
                problems.append(
                    f"{self.n_components} components over {self.n_concepts} concepts need at "
                    f"least {self.n_concepts - self.n_components} relationships"
                )
        if problems:
            raise ValueError("; ".join(problems))


def _syllable(rng: random.Random) -> str:
    return rng.choice(_ONSETS) + rng.choice(_VOWELS) + rng.choice(_CODAS)


def _fresh_word(rng: random.Random, used: set[str]) -> str:
    syllables = 2
    while True:
        word = "".join(_syllable(rng) for _ in range(syllables))
        if word not in used:
            used.add(word)
            return word
        syllables = min(syllables + 1, 5)


def generate(spec: GenSpec) -> Ontology:
    """Deterministic ontology for a spec; raises ValueError when the spec is
    inconsistent."""
    spec.validate()
    rng = random.Random(spec.seed)
    used_words: set[str] = set()

    concept_iris: list[str] = []
    concept_nouns: dict[str, str] = {}
    for _ in range(spec.n_concepts):
        noun = _fresh_word(rng, used_words)
        iri = SCALE_NS + noun.capitalize()
        concept_iris.append(iri)
        concept_nouns[iri] = noun

    # Component groups: contiguous chunks of the shuffled concept list. All
    # relationship and subclass edges stay inside one group.
    shuffled = list(concept_iris)
    rng.shuffle(shuffled)
    group_count = 1 if spec.connectivity == "connected" else min(spec.n_components, max(len(shuffled), 1))
    groups: list[list[str]] = [[] for _ in range(group_count)]
    for i, iri in enumerate(shuffled):
        groups[i % group_count].append(iri)
    group_of = {iri: gi for gi, group in enumerate(groups) for iri in group}

    # Superclass forest: levels grow one past the deepest seen so far, so a
    # parent one level up always exists within the group.
    superclasses: dict[str, set[str]] = {iri: set() for iri in concept_iris}
    if spec.hierarchy_depth > 1:
        for group in groups:
            by_level: dict[int, list[str]] = {}
            for i, iri in enumerate(group):
                if i == 0:
                    level = 0
                else:
                    deepest = max(by_level)
                    level = rng.randint(0, min(spec.hierarchy_depth - 1, deepest + 1))
                if level > 0:
                    superclasses[iri].add(rng.choice(by_level[level - 1]))
                by_level.setdefault(level, []).append(iri)

    concepts = {
        iri: Concept(
            iri,
            label=concept_nouns[iri],
            comment=f"A {concept_nouns[iri]} asset.",
            superclasses=frozenset(superclasses[iri]),
        )
        for iri in concept_iris
    }

    # Relationships: per group, the first |group|-1 form a spanning tree; the
    # remainder connect random in-group pairs.
    endpoint_plan: list[tuple[str, str]] = []
    for group in groups:
        for i in range(1, len(group)):
            anchor = group[rng.randrange(i)]
            pair = (group[i], anchor) if rng.random() < 0.5 else (anchor, group[i])
            endpoint_plan.append(pair)
    while len(endpoint_plan) < spec.n_relationships:
        group = groups[rng.randrange(len(groups))] if groups else []
        if not group:
            break
        a = rng.choice(group)
        b = rng.choice(group)
        for _ in range(8):
            if a != b or len(group) == 1:
                break
            b = rng.choice(group)
        endpoint_plan.append((a, b))

    relationships: dict[str, Relationship] = {}
    for domain, range_ in endpoint_plan[: spec.n_relationships]:
        noun = _fresh_word(rng, used_words)
        iri = SCALE_NS + "has" + noun.capitalize()
        relationships[iri] = Relationship(
            iri,
            label=f"has {noun}",
            comment=f"A {noun} link.",
            domains=frozenset([domain]),
            ranges=frozenset([range_]),
        )

    attributes: dict[str, Attribute] = {}
    for _ in range(spec.n_attributes):
        noun = _fresh_word(rng, used_words)
        suffix, datatype = _ATTRIBUTE_KINDS[rng.randrange(len(_ATTRIBUTE_KINDS))]
        owner = rng.choice(concept_iris)
        iri = SCALE_NS + noun + suffix.capitalize()
        attributes[iri] = Attribute(
            iri,
            datatype=XSD_NS + datatype,
            label=f"{noun} {suffix}",
            comment=(
                f"The {noun} {suffix} recorded for each {concept_nouns[owner]}, "
                "refreshed by the nightly reporting job and archived monthly."
            ),
            domains=frozenset([owner]),
        )

    prefixes = {
        "owl": OWL_NS,
        "rdf": RDF_NS,
        "rdfs": RDFS_NS,
        "network": SCALE_NS,
        "xsd": XSD_NS,
    }
    return Ontology(concepts, relationships, attributes, prefixes)


@lru_cache(maxsize=1)
def toy_ontology() -> Ontology:
    """The bundled hand-written telecom ontology used by the golden runs."""
    text = resources.files("ontoslice").joinpath("data/toy_telecom.ttl").read_text("utf-8")
    result = parse_turtle(text)
    if result.ontology is None:  # pragma: no cover - shipped file is validated by tests
        raise RuntimeError(f"bundled toy ontology failed to parse: {result.errors}")
    return result.ontology
