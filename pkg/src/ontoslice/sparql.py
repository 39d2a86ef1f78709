"""SPARQL SELECT subset parser and slice-conformance checker.

The grammar is sized to the query shapes the pipeline actually produces:
prefix declarations, SELECT with expressions and aliases, basic graph
patterns, UNION, OPTIONAL, FILTER, property paths limited to sequence (/)
and inverse (^), GROUP BY / HAVING / ORDER BY / LIMIT / OFFSET, the five
standard aggregates, and subqueries one level deep. Constructs outside the
subset are reported as parse-error violations with a location instead of
being silently accepted.

Extraction pulls out the vocabulary a query commits to: class IRIs (objects
of rdf:type patterns) and predicate IRIs, excluding rdf/rdfs/owl/xsd
built-ins. Conformance then demands every one of them live inside the given
slice; an IRI the whole ontology does not know is flagged as a hallucination.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import RDF_NS, Ontology, in_builtin_namespace, is_absolute_iri
from .slicing import Slice

RDF_TYPE = RDF_NS + "type"

FEATURES = (
    "union",
    "optional",
    "filter",
    "group-by",
    "having",
    "order-by",
    "subquery",
    "property-path",
    "aggregate-count",
    "aggregate-sum",
    "aggregate-avg",
    "aggregate-min",
    "aggregate-max",
)

_AGGREGATES = {"COUNT", "SUM", "AVG", "MIN", "MAX"}


@dataclass(frozen=True)
class ConformanceViolation:
    kind: str  # "unknown-class" | "unknown-predicate" | "unprefixed-name" | "parse-error"
    offending: str
    line: int
    column: int
    detail: str = ""

    def __str__(self) -> str:
        suffix = f" ({self.detail})" if self.detail else ""
        return f"{self.kind}: {self.offending} at {self.line}:{self.column}{suffix}"


@dataclass
class SparqlSkeleton:
    class_iris: frozenset[str] = frozenset()
    predicate_iris: frozenset[str] = frozenset()
    variables: frozenset[str] = frozenset()
    features: frozenset[str] = frozenset()
    prefix_decls: dict[str, str] = field(default_factory=dict)
    # First source occurrence of each extracted IRI, for violation reporting.
    occurrences: dict[str, tuple[str, int, int]] = field(default_factory=dict)


class _Token(NamedTuple):
    kind: str
    value: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>\#[^\n]*)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>"(?:[^"\\\n]|\\[^\n])*"|'(?:[^'\\\n]|\\[^\n])*')
    | (?P<langtag>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
    | (?P<dtype>\^\^)
    | (?P<number>[+-]?(?:\d+\.\d+|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<pname>(?:[A-Za-z][A-Za-z0-9_-]*)?:(?:[A-Za-z0-9_%](?:[A-Za-z0-9_.%-]*[A-Za-z0-9_%-])?)?)
    | (?P<word>[A-Za-z][A-Za-z0-9_]*)
    | (?P<op><=|>=|!=|&&|\|\||[{}().;,*/^=<>!+\-|?\[\]])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> tuple[list[_Token], list[ConformanceViolation]]:
    tokens: list[_Token] = []
    violations: list[ConformanceViolation] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            if not violations:
                violations.append(
                    ConformanceViolation(
                        "parse-error", text[pos], line, pos - line_start + 1, "unexpected character"
                    )
                )
            pos += 1
            continue
        kind = match.lastgroup or ""
        value = match.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, match.start() - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = match.start() + value.rfind("\n") + 1
        pos = match.end()
    tokens.append(_Token("eof", "", line, n - line_start + 1))
    return tokens, violations


class _ParseError(Exception):
    def __init__(self, token: _Token, message: str):
        self.token = token
        self.message = message
        super().__init__(message)


_KEYWORDS = {
    "SELECT", "DISTINCT", "REDUCED", "WHERE", "PREFIX", "BASE", "AS",
    "GROUP", "BY", "HAVING", "ORDER", "LIMIT", "OFFSET", "ASC", "DESC",
    "UNION", "OPTIONAL", "FILTER", "COUNT", "SUM", "AVG", "MIN", "MAX",
    "TRUE", "FALSE", "A",
}

_MAX_SUBQUERY_DEPTH = 1


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.variables: set[str] = set()
        self.features: set[str] = set()
        self.class_iris: set[str] = set()
        self.predicate_iris: set[str] = set()
        self.occurrences: dict[str, tuple[str, int, int]] = {}
        self.name_violations: list[ConformanceViolation] = []

    # -- token helpers -----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def take(self) -> _Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def at_keyword(self, *words: str) -> bool:
        token = self.peek()
        return token.kind == "word" and token.value.upper() in words

    def expect_keyword(self, word: str) -> _Token:
        token = self.take()
        if token.kind != "word" or token.value.upper() != word:
            raise _ParseError(token, f"expected {word}, found {token.value!r}")
        return token

    def at_op(self, op: str) -> bool:
        token = self.peek()
        return token.kind == "op" and token.value == op

    def expect_op(self, op: str) -> _Token:
        token = self.take()
        if token.kind != "op" or token.value != op:
            found = token.value if token.value else "end of input"
            raise _ParseError(token, f"expected {op!r}, found {found!r}")
        return token

    # -- terminals -----------------------------------------------------------

    def resolve_iri(self, token: _Token) -> str | None:
        """Full IRI for an iriref/pname token; None when the prefix is unknown
        or the IRI is relative (a violation is recorded and parsing goes on)."""
        if token.kind == "iriref":
            iri = token.value[1:-1]
            if not is_absolute_iri(iri):
                self.name_violations.append(
                    ConformanceViolation(
                        "parse-error", token.value, token.line, token.column, "relative IRI"
                    )
                )
                return None
            return iri
        prefix, local = token.value.split(":", 1)
        namespace = self.prefixes.get(prefix)
        if namespace is None:
            self.name_violations.append(
                ConformanceViolation(
                    "unprefixed-name", token.value, token.line, token.column,
                    f"prefix {prefix!r} is not declared",
                )
            )
            return None
        return namespace + local

    def note_var(self, token: _Token) -> None:
        self.variables.add(token.value[1:])

    def record(self, bucket: set[str], token: _Token) -> None:
        iri = self.resolve_iri(token)
        if iri is None or in_builtin_namespace(iri):
            return
        bucket.add(iri)
        self.occurrences.setdefault(iri, (token.value, token.line, token.column))

    # -- balanced expression scan ---------------------------------------------

    def scan_parenthesized(self, stop_at_as: bool = False) -> None:
        """Consume a balanced parenthesized region starting at '('.

        Collects variables, aggregate features, and prefix-name violations;
        with stop_at_as the scan stops before a depth-1 AS keyword.
        """
        open_token = self.expect_op("(")
        depth = 1
        while depth > 0:
            token = self.peek()
            if token.kind == "eof":
                raise _ParseError(open_token, "unterminated parenthesized expression")
            if token.kind == "op" and token.value in ("{", "}"):
                raise _ParseError(token, "graph patterns are not allowed inside expressions")
            if stop_at_as and depth == 1 and token.kind == "word" and token.value.upper() == "AS":
                return
            token = self.take()
            if token.kind == "op" and token.value == "(":
                depth += 1
            elif token.kind == "op" and token.value == ")":
                depth -= 1
            elif token.kind == "var":
                self.note_var(token)
            elif token.kind == "word" and token.value.upper() in _AGGREGATES:
                self.features.add(f"aggregate-{token.value.lower()}")
            elif token.kind in ("iriref", "pname"):
                self.resolve_iri(token)  # unprefixed-name check only

    def scan_constraint(self) -> None:
        """FILTER/HAVING constraint: (expr) or Function(expr)."""
        token = self.peek()
        if token.kind == "op" and token.value == "(":
            self.scan_parenthesized()
            return
        if token.kind in ("word", "pname", "iriref"):
            head = self.take()
            if head.kind == "word" and head.value.upper() in _AGGREGATES:
                self.features.add(f"aggregate-{head.value.lower()}")
            elif head.kind in ("pname", "iriref"):
                self.resolve_iri(head)
            if self.at_op("("):
                self.scan_parenthesized()
                return
            raise _ParseError(self.peek(), "expected '(' after constraint function")
        raise _ParseError(token, f"expected a constraint, found {token.value!r}")

    # -- grammar ---------------------------------------------------------------

    def parse_query(self) -> None:
        self.parse_prologue()
        self.parse_select(depth=0)
        trailing = self.peek()
        if trailing.kind != "eof":
            raise _ParseError(trailing, f"unexpected trailing input: {trailing.value!r}")

    def parse_prologue(self) -> None:
        while self.at_keyword("PREFIX", "BASE"):
            keyword = self.take()
            if keyword.value.upper() == "BASE":
                raise _ParseError(keyword, "BASE is not supported")
            name = self.take()
            if name.kind != "pname" or not name.value.endswith(":"):
                raise _ParseError(name, "expected a prefix name after PREFIX")
            iri = self.take()
            if iri.kind != "iriref":
                raise _ParseError(iri, "expected an IRI after the prefix name")
            target = iri.value[1:-1]
            if not is_absolute_iri(target):
                raise _ParseError(iri, f"namespace is not an absolute IRI: {target!r}")
            self.prefixes[name.value[:-1]] = target

    def parse_select(self, depth: int) -> None:
        self.expect_keyword("SELECT")
        if self.at_keyword("DISTINCT", "REDUCED"):
            self.take()
        self.parse_projection()
        if self.at_keyword("WHERE"):
            self.take()
        self.parse_group(depth)
        self.parse_modifiers()

    def parse_projection(self) -> None:
        if self.at_op("*"):
            self.take()
            return
        seen = False
        while True:
            token = self.peek()
            if token.kind == "var":
                self.note_var(self.take())
                seen = True
            elif token.kind == "op" and token.value == "(":
                self.scan_parenthesized(stop_at_as=True)
                self.expect_keyword("AS")
                alias = self.take()
                if alias.kind != "var":
                    raise _ParseError(alias, "expected a variable after AS")
                self.note_var(alias)
                self.expect_op(")")
                seen = True
            else:
                break
        if not seen:
            raise _ParseError(self.peek(), "SELECT needs '*' or at least one variable")

    def parse_group(self, depth: int) -> None:
        self.expect_op("{")
        while True:
            token = self.peek()
            if token.kind == "op" and token.value == "}":
                self.take()
                return
            if token.kind == "eof":
                raise _ParseError(token, "unterminated group pattern")
            if token.kind == "op" and token.value == "{":
                self.parse_group_or_union_or_subquery(depth)
            elif self.at_keyword("OPTIONAL"):
                self.take()
                self.features.add("optional")
                if self.peek().kind == "op" and self.peek().value == "{":
                    self.parse_group_or_union_or_subquery(depth)
                else:
                    raise _ParseError(self.peek(), "expected '{' after OPTIONAL")
            elif self.at_keyword("FILTER"):
                self.take()
                self.features.add("filter")
                self.scan_constraint()
            else:
                self.parse_triples_block()
            if self.at_op("."):
                self.take()

    def parse_group_or_union_or_subquery(self, depth: int) -> None:
        # Lookahead: '{ SELECT' opens a subquery, anything else a nested group.
        if self.peek(1).kind == "word" and self.peek(1).value.upper() == "SELECT":
            if depth >= _MAX_SUBQUERY_DEPTH:
                raise _ParseError(self.peek(1), "subqueries may nest only one level deep")
            self.features.add("subquery")
            self.expect_op("{")
            self.parse_select(depth + 1)
            self.expect_op("}")
        else:
            self.parse_group(depth)
        while self.at_keyword("UNION"):
            self.take()
            self.features.add("union")
            if self.peek().kind == "op" and self.peek().value == "{":
                self.parse_group(depth)
            else:
                raise _ParseError(self.peek(), "expected '{' after UNION")

    def parse_triples_block(self) -> None:
        subject = self.take()
        if subject.kind == "var":
            self.note_var(subject)
        elif subject.kind in ("iriref", "pname"):
            self.resolve_iri(subject)  # subjects are instance IRIs; checked for prefixes only
        else:
            raise _ParseError(subject, f"expected a subject, found {subject.value!r}")
        while True:
            self.parse_verb_and_objects()
            if self.at_op(";"):
                self.take()
                next_token = self.peek()
                if next_token.kind == "op" and next_token.value in (".", "}"):
                    return  # trailing ';'
                continue
            return

    def parse_verb_and_objects(self) -> None:
        is_type_verb = self.parse_verb()
        while True:
            self.parse_object(is_type_verb)
            if self.at_op(","):
                self.take()
                continue
            return

    def parse_verb(self) -> bool:
        """Parse a predicate (variable, `a`, IRI, or /-^ path). True when the
        verb is exactly rdf:type, so objects are class IRIs."""
        token = self.peek()
        if token.kind == "var":
            self.note_var(self.take())
            return False
        # Path elements: None stands for `a`, otherwise (token, resolved IRI).
        parts: list[tuple[_Token, str | None] | None] = []
        inverted = False
        while True:
            if self.at_op("^"):
                self.take()
                inverted = True
                self.features.add("property-path")
            token = self.take()
            if token.kind == "word" and token.value.upper() == "A":
                parts.append(None)  # rdf:type inside a path contributes no predicate
            elif token.kind in ("iriref", "pname"):
                parts.append((token, self.resolve_iri(token)))
            else:
                raise _ParseError(token, f"expected a predicate, found {token.value!r}")
            follow = self.peek()
            if follow.kind == "op" and follow.value == "/":
                self.take()
                self.features.add("property-path")
                continue
            if follow.kind == "op" and follow.value in ("*", "+", "?", "|"):
                raise _ParseError(follow, f"property path operator {follow.value!r} is not supported")
            break
        for part in parts:
            if part is None:
                continue
            part_token, iri = part
            if iri is not None and not in_builtin_namespace(iri):
                self.predicate_iris.add(iri)
                self.occurrences.setdefault(iri, (part_token.value, part_token.line, part_token.column))
        if len(parts) == 1 and not inverted:
            return parts[0] is None or parts[0][1] == RDF_TYPE
        return False

    def parse_object(self, is_type_verb: bool) -> None:
        token = self.take()
        if token.kind == "var":
            self.note_var(token)
        elif token.kind in ("iriref", "pname"):
            if is_type_verb:
                self.record(self.class_iris, token)
            else:
                self.resolve_iri(token)  # instance IRI; prefix check only
        elif token.kind == "string":
            if self.peek().kind == "langtag":
                self.take()
            elif self.peek().kind == "dtype":
                self.take()
                datatype = self.take()
                if datatype.kind not in ("iriref", "pname"):
                    raise _ParseError(datatype, "expected a datatype IRI after '^^'")
                self.resolve_iri(datatype)
        elif token.kind == "number":
            pass
        elif token.kind == "word" and token.value.upper() in ("TRUE", "FALSE"):
            pass
        else:
            raise _ParseError(token, f"expected an object term, found {token.value!r}")

    def parse_modifiers(self) -> None:
        if self.at_keyword("GROUP"):
            self.take()
            self.expect_keyword("BY")
            self.features.add("group-by")
            conditions = 0
            while True:
                token = self.peek()
                if token.kind == "var":
                    self.note_var(self.take())
                elif token.kind == "op" and token.value == "(":
                    self.scan_parenthesized()
                else:
                    break
                conditions += 1
            if conditions == 0:
                raise _ParseError(self.peek(), "GROUP BY needs at least one condition")
        if self.at_keyword("HAVING"):
            self.take()
            self.features.add("having")
            self.scan_constraint()
        if self.at_keyword("ORDER"):
            self.take()
            self.expect_keyword("BY")
            self.features.add("order-by")
            conditions = 0
            while True:
                token = self.peek()
                if token.kind == "var":
                    self.note_var(self.take())
                elif self.at_keyword("ASC", "DESC"):
                    self.take()
                    self.scan_parenthesized()
                elif token.kind == "op" and token.value == "(":
                    self.scan_parenthesized()
                else:
                    break
                conditions += 1
            if conditions == 0:
                raise _ParseError(self.peek(), "ORDER BY needs at least one condition")
        for _ in range(2):
            if self.at_keyword("LIMIT") or self.at_keyword("OFFSET"):
                self.take()
                count = self.take()
                if count.kind != "number" or not count.value.isdigit():
                    raise _ParseError(count, "expected a non-negative integer")


def extract_skeleton(query: str) -> tuple[SparqlSkeleton | None, list[ConformanceViolation]]:
    """Parse a query into its skeleton; violations instead of a skeleton on
    any syntax or prefix problem. Never raises on arbitrary input."""
    tokens, violations = _tokenize(query)
    if violations:
        return None, violations
    parser = _Parser(tokens)
    try:
        parser.parse_query()
    except _ParseError as exc:
        token = exc.token
        offending = token.value if token.value else "end of input"
        violations = parser.name_violations + [
            ConformanceViolation("parse-error", offending, token.line, token.column, exc.message)
        ]
        return None, violations
    if parser.name_violations:
        return None, list(parser.name_violations)
    skeleton = SparqlSkeleton(
        class_iris=frozenset(parser.class_iris),
        predicate_iris=frozenset(parser.predicate_iris),
        variables=frozenset(parser.variables),
        features=frozenset(parser.features),
        prefix_decls=dict(parser.prefixes),
        occurrences=dict(parser.occurrences),
    )
    return skeleton, []


def check_conformance(
    skeleton: SparqlSkeleton, ontology: Ontology, slice_: Slice
) -> list[ConformanceViolation]:
    """Empty iff every class IRI is a slice concept and every predicate IRI a
    slice relationship or attribute. Vocabulary the ontology itself does not
    contain is flagged as hallucinated."""
    violations: list[ConformanceViolation] = []

    def occurrence(iri: str) -> tuple[str, int, int]:
        return skeleton.occurrences.get(iri, (iri, 1, 1))

    for iri in sorted(skeleton.class_iris):
        if iri in slice_.concepts:
            continue
        offending, line, column = occurrence(iri)
        detail = (
            "in the ontology but not in the slice"
            if iri in ontology.concepts
            else "not in the ontology"
        )
        violations.append(ConformanceViolation("unknown-class", offending, line, column, detail))

    allowed_predicates = slice_.relationships | slice_.attributes
    for iri in sorted(skeleton.predicate_iris):
        if iri in allowed_predicates:
            continue
        offending, line, column = occurrence(iri)
        known = iri in ontology.relationships or iri in ontology.attributes
        detail = "in the ontology but not in the slice" if known else "not in the ontology"
        violations.append(ConformanceViolation("unknown-predicate", offending, line, column, detail))

    return violations


def check_query(
    query: str, ontology: Ontology, slice_: Slice
) -> tuple[SparqlSkeleton | None, list[ConformanceViolation]]:
    """Extraction plus conformance in one step; what the pipeline gate calls."""
    skeleton, violations = extract_skeleton(query)
    if skeleton is None:
        return None, violations
    return skeleton, check_conformance(skeleton, ontology, slice_)
