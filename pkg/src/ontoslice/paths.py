"""Shortest-path discovery over the concept graph.

Relationship and subclass edges are traversed undirected with unit cost:
SPARQL triple patterns can be written in either direction, so directed
reachability would only manufacture spurious dead ends. Ties between
equal-length paths break on the lexicographic sequence of (edge IRI,
target IRI) pairs, which makes results reproducible across runs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .model import NameIndex, Ontology, UnknownIriError, resolve_name
from .slicing import Slice

if TYPE_CHECKING:
    from .llm import MissingReport

DEFAULT_MAX_HOPS = 6


@dataclass(frozen=True)
class PathStep:
    source: str
    edge: str  # relationship IRI, or the subclass edge marker
    direction: str  # "outgoing" | "incoming" | "super" | "sub"
    target: str


@dataclass(frozen=True)
class Path:
    steps: tuple[PathStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def concepts(self) -> list[str]:
        if not self.steps:
            return []
        return [self.steps[0].source] + [step.target for step in self.steps]

    def sort_key(self) -> tuple:
        return tuple((step.edge, step.target) for step in self.steps)


def _check_concept(ontology: Ontology, iri: str) -> None:
    if iri not in ontology.concepts:
        raise UnknownIriError([iri], "find_path")


def _distances(ontology: Ontology, start: str, limit: int) -> dict[str, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        depth = dist[node]
        if depth >= limit:
            continue
        for edge in ontology._neighbors[node]:
            if edge.other not in dist:
                dist[edge.other] = depth + 1
                queue.append(edge.other)
    return dist


def find_path(ontology: Ontology, source: str, target: str, max_hops: int = DEFAULT_MAX_HOPS) -> Path | None:
    """Shortest undirected path between two concepts, or None beyond max_hops.

    Among equal-length paths the lexicographically smallest step sequence is
    returned; the reflexive case yields the empty path.
    """
    _check_concept(ontology, source)
    _check_concept(ontology, target)
    if max_hops < 0:
        return None
    if source == target:
        return Path(())

    from_source = _distances(ontology, source, max_hops)
    if target not in from_source or from_source[target] > max_hops:
        return None
    length = from_source[target]
    from_target = _distances(ontology, target, length)

    # Greedy reconstruction: at each position pick the smallest (edge, other)
    # step that still lies on some shortest path; neighbor lists are presorted.
    steps: list[PathStep] = []
    current = source
    for position in range(1, length + 1):
        remaining = length - position
        for edge in ontology._neighbors[current]:
            if from_source.get(edge.other) == position and from_target.get(edge.other, -1) == remaining:
                steps.append(PathStep(current, edge.edge, edge.direction, edge.other))
                current = edge.other
                break
        else:  # pragma: no cover - BFS guarantees a continuation exists
            return None
    return Path(tuple(steps))


@dataclass(frozen=True)
class Resolution:
    """What a missing-elements report grounded to: growth inputs + leftovers."""

    additions: frozenset[str] = frozenset()
    paths: tuple[Path, ...] = ()
    unresolved: tuple[str, ...] = ()


def _concept_candidates(ontology: Ontology, index: NameIndex, name: str) -> list[str]:
    return sorted(i for i in resolve_name(index, name) if i in ontology.concepts)


def resolve_missing(
    ontology: Ontology,
    index: NameIndex,
    slice_: Slice,
    report: "MissingReport",
    max_hops: int = DEFAULT_MAX_HOPS,
) -> Resolution:
    """Ground a missing-elements report against the ontology.

    Missing concept names resolve through the name index; every candidate IRI
    becomes an addition (over-inclusion is cheaper than another round trip).
    Missing links resolve to concept pairs and the overall shortest connecting
    path is kept. Names and links that ground to nothing are echoed back in
    `unresolved` — they are data for the termination rule, not errors.
    """
    additions: set[str] = set()
    paths: list[Path] = []
    unresolved: list[str] = []

    for name in report.missing_concepts:
        iris = resolve_name(index, name)
        if iris:
            additions.update(iris)
        else:
            unresolved.append(name)

    for from_name, to_name in report.missing_links:
        sources = _concept_candidates(ontology, index, from_name)
        targets = _concept_candidates(ontology, index, to_name)
        best: Path | None = None
        best_pair: tuple[str, str] | None = None
        for a in sources:
            for b in targets:
                path = find_path(ontology, a, b, max_hops)
                if path is None:
                    continue
                key = (len(path), path.sort_key(), a, b)
                if best is None or key < (len(best), best.sort_key(), *best_pair):
                    best = path
                    best_pair = (a, b)
        if best is None:
            unresolved.append(f"{from_name} -> {to_name}")
        else:
            paths.append(best)
            additions.update(best_pair)  # covers the empty-path (same concept) case

    return Resolution(frozenset(additions), tuple(paths), tuple(unresolved))
