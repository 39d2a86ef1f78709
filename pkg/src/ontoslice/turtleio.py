"""Turtle reader/writer for the ontology subset.

Accepted grammar: @prefix directives; triples whose predicates are `a`/rdf:type
(with owl:Class, owl:ObjectProperty, owl:DatatypeProperty objects),
rdfs:subClassOf, rdfs:domain, rdfs:range, rdfs:label, rdfs:comment; predicate
lists (";"), object lists (","), prefixed names, full IRIs, and string
literals (language tags accepted and stripped, first-listed value wins).

Well-formed statements outside the subset are skipped with a warning so real
exported ontologies still load. Malformed syntax and structural violations
(dangling IRIs, missing domain/range, cyclic subclassing) are errors, and the
result is all-or-nothing: no partial ontology is ever returned.

Serialization is deterministic (sorted prefixes, sorted subjects, fixed
predicate order) and round-trips: parse_turtle(serialize_turtle(o)) == o.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import (
    OWL_NS,
    RDF_NS,
    RDFS_NS,
    XSD_NS,
    Attribute,
    Concept,
    Ontology,
    OntologyError,
    Relationship,
    is_absolute_iri,
)

OWL_CLASS = OWL_NS + "Class"
OWL_OBJECT_PROPERTY = OWL_NS + "ObjectProperty"
OWL_DATATYPE_PROPERTY = OWL_NS + "DatatypeProperty"
RDF_TYPE = RDF_NS + "type"
RDFS_LABEL = RDFS_NS + "label"
RDFS_COMMENT = RDFS_NS + "comment"
RDFS_SUBCLASSOF = RDFS_NS + "subClassOf"
RDFS_DOMAIN = RDFS_NS + "domain"
RDFS_RANGE = RDFS_NS + "range"

_MAX_DIAGNOSTICS = 200


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str  # "error" | "warning"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    ontology: Ontology | None
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.ontology is not None

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]


class ObjNode(NamedTuple):
    kind: str  # "iri" | "literal"
    value: str
    lang: str | None = None


class Triple(NamedTuple):
    subject: str
    predicate: str
    obj: ObjNode
    line: int
    column: int


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

class _Token(NamedTuple):
    kind: str
    value: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[\x00-\x20]+)
    | (?P<comment>\#[^\n]*)
    | (?P<prefix_kw>@prefix(?![A-Za-z0-9_-]))
    | (?P<langtag>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<string>"(?:[^"\\\n]|\\[^\n])*")
    | (?P<dtype>\^\^)
    | (?P<number>[+-]?(?:\d+\.\d+|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<punct>[.;,])
    | (?P<pname>(?:[A-Za-z][A-Za-z0-9_-]*)?:(?:[A-Za-z0-9_%](?:[A-Za-z0-9_.%-]*[A-Za-z0-9_%-])?)?)
    | (?P<boolean>(?:true|false)(?![A-Za-z0-9_-]))
    | (?P<a_kw>a(?![A-Za-z0-9_:-]))
    """,
    re.VERBOSE,
)

_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(raw: str) -> str | None:
    """Decode a quoted string body; None when an escape is malformed."""
    if "\\" not in raw:
        return raw
    out: list[str] = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= n:
            return None
        code = raw[i + 1]
        if code in _ESCAPES:
            out.append(_ESCAPES[code])
            i += 2
        elif code in ("u", "U"):
            width = 4 if code == "u" else 8
            hex_part = raw[i + 2 : i + 2 + width]
            if len(hex_part) != width or any(c not in "0123456789abcdefABCDEF" for c in hex_part):
                return None
            value = int(hex_part, 16)
            if value > 0x10FFFF:
                return None
            out.append(chr(value))
            i += 2 + width
        else:
            return None
    return "".join(out)


def _tokenize(text: str) -> tuple[list[_Token], list[ParseDiagnostic]]:
    tokens: list[_Token] = []
    diagnostics: list[ParseDiagnostic] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            col = pos - line_start + 1
            if len(diagnostics) < _MAX_DIAGNOSTICS:
                diagnostics.append(
                    ParseDiagnostic(line, col, f"unexpected character {text[pos]!r}", "error")
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
    return tokens, diagnostics


# ---------------------------------------------------------------------------
# Statement reader
# ---------------------------------------------------------------------------

class _Reader:
    """Reads the token stream into prefixes and raw triples with recovery."""

    def __init__(self, tokens: list[_Token], diagnostics: list[ParseDiagnostic]):
        self.tokens = tokens
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self.diagnostics = diagnostics

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def error(self, token: _Token, message: str) -> None:
        if len(self.diagnostics) < _MAX_DIAGNOSTICS:
            self.diagnostics.append(ParseDiagnostic(token.line, token.column, message, "error"))

    def warn(self, token: _Token, message: str) -> None:
        if len(self.diagnostics) < _MAX_DIAGNOSTICS:
            self.diagnostics.append(ParseDiagnostic(token.line, token.column, message, "warning"))

    def recover(self) -> None:
        """Skip tokens through the next statement terminator."""
        while True:
            token = self.take()
            if token.kind == "eof" or (token.kind == "punct" and token.value == "."):
                return

    def run(self) -> None:
        while self.peek().kind != "eof":
            if len(self.diagnostics) >= _MAX_DIAGNOSTICS:
                return
            if self.peek().kind == "prefix_kw":
                self.read_prefix()
            else:
                self.read_triples()

    def read_prefix(self) -> None:
        self.take()  # @prefix
        name = self.take()
        if name.kind != "pname" or not name.value.endswith(":"):
            self.error(name, "expected a prefix name after @prefix")
            self.recover()
            return
        iri = self.take()
        if iri.kind != "iriref":
            self.error(iri, "expected an IRI after the prefix name")
            self.recover()
            return
        namespace = iri.value[1:-1]
        if not is_absolute_iri(namespace):
            self.error(iri, f"namespace is not an absolute IRI: {namespace!r}")
            self.recover()
            return
        dot = self.take()
        if dot.kind != "punct" or dot.value != ".":
            self.error(dot, "expected '.' to close the @prefix directive")
            self.recover()
            return
        self.prefixes[name.value[:-1]] = namespace

    def resolve_iri(self, token: _Token) -> str | None:
        if token.kind == "iriref":
            iri = token.value[1:-1]
            if not is_absolute_iri(iri):
                self.error(token, f"not an absolute IRI: {iri!r}")
                return None
            return iri
        if token.kind == "pname":
            prefix, local = token.value.split(":", 1)
            if prefix not in self.prefixes:
                self.error(token, f"undeclared prefix: {prefix!r}")
                return None
            return self.prefixes[prefix] + local
        raise AssertionError(f"not an IRI token: {token}")

    def read_object(self) -> ObjNode | None:
        token = self.take()
        if token.kind in ("iriref", "pname"):
            iri = self.resolve_iri(token)
            return None if iri is None else ObjNode("iri", iri)
        if token.kind == "string":
            value = _unescape(token.value[1:-1])
            if value is None:
                self.error(token, "malformed string escape")
                return None
            lang: str | None = None
            if self.peek().kind == "langtag":
                lang = self.take().value[1:]
            elif self.peek().kind == "dtype":
                self.take()
                dt = self.take()
                if dt.kind not in ("iriref", "pname") or self.resolve_iri(dt) is None:
                    self.error(dt, "expected a datatype IRI after '^^'")
                    return None
                # Typed strings are accepted; the datatype is not retained.
            return ObjNode("literal", value, lang)
        if token.kind in ("number", "boolean"):
            return ObjNode("literal", token.value, None)
        self.error(token, f"expected an IRI or literal, found {token.value!r}")
        return None

    def read_triples(self) -> None:
        subject_token = self.take()
        if subject_token.kind not in ("iriref", "pname"):
            self.error(subject_token, f"expected a subject IRI, found {subject_token.value!r}")
            self.recover()
            return
        subject = self.resolve_iri(subject_token)
        if subject is None:
            self.recover()
            return
        while True:
            verb_token = self.take()
            if verb_token.kind == "a_kw":
                predicate: str | None = RDF_TYPE
            elif verb_token.kind in ("iriref", "pname"):
                predicate = self.resolve_iri(verb_token)
                if predicate is None:
                    self.recover()
                    return
            else:
                self.error(verb_token, f"expected a predicate, found {verb_token.value!r}")
                self.recover()
                return
            while True:
                obj = self.read_object()
                if obj is None:
                    self.recover()
                    return
                self.triples.append(Triple(subject, predicate, obj, verb_token.line, verb_token.column))
                if self.peek().kind == "punct" and self.peek().value == ",":
                    self.take()
                    continue
                break
            token = self.take()
            if token.kind == "punct" and token.value == ";":
                # Turtle allows a trailing ';' before the closing dot.
                if self.peek().kind == "punct" and self.peek().value == ".":
                    self.take()
                    return
                continue
            if token.kind == "punct" and token.value == ".":
                return
            self.error(token, f"expected ';' or '.', found {token.value!r}")
            self.recover()
            return


def read_triples(text: str) -> tuple[list[Triple], dict[str, str], list[ParseDiagnostic]]:
    """First-stage scan: raw triples, final prefix map, syntax diagnostics."""
    tokens, diagnostics = _tokenize(text)
    reader = _Reader(tokens, diagnostics)
    reader.run()
    return reader.triples, reader.prefixes, reader.diagnostics


# ---------------------------------------------------------------------------
# Assembly into an Ontology
# ---------------------------------------------------------------------------

_SUPPORTED_TYPES = {OWL_CLASS: "concept", OWL_OBJECT_PROPERTY: "relationship", OWL_DATATYPE_PROPERTY: "attribute"}


class _Subject:
    def __init__(self, line: int, column: int):
        self.line = line
        self.column = column
        self.kinds: list[str] = []
        self.unsupported_type = False
        self.label: str | None = None
        self.comment: str | None = None
        self.superclasses: set[str] = set()
        self.domains: set[str] = set()
        self.ranges: list[str] = []
        self.range_lines: list[int] = []


def _assemble(
    triples: list[Triple], prefixes: dict[str, str], diagnostics: list[ParseDiagnostic]
) -> Ontology | None:
    subjects: dict[str, _Subject] = {}
    errors = False

    def error(line: int, column: int, message: str) -> None:
        nonlocal errors
        errors = True
        if len(diagnostics) < _MAX_DIAGNOSTICS:
            diagnostics.append(ParseDiagnostic(line, column, message, "error"))

    def warn(line: int, column: int, message: str) -> None:
        if len(diagnostics) < _MAX_DIAGNOSTICS:
            diagnostics.append(ParseDiagnostic(line, column, message, "warning"))

    for triple in triples:
        bucket = subjects.setdefault(triple.subject, _Subject(triple.line, triple.column))
        pred, obj = triple.predicate, triple.obj
        if pred == RDF_TYPE:
            if obj.kind != "iri":
                warn(triple.line, triple.column, "literal rdf:type object skipped")
            elif obj.value in _SUPPORTED_TYPES:
                kind = _SUPPORTED_TYPES[obj.value]
                if kind not in bucket.kinds:
                    bucket.kinds.append(kind)
            else:
                bucket.unsupported_type = True
                warn(triple.line, triple.column, f"unsupported type <{obj.value}> skipped")
        elif pred in (RDFS_LABEL, RDFS_COMMENT):
            if obj.kind != "literal":
                warn(triple.line, triple.column, "IRI object where a literal was expected; skipped")
            elif pred == RDFS_LABEL:
                if bucket.label is None:
                    bucket.label = obj.value
            elif bucket.comment is None:
                bucket.comment = obj.value
        elif pred == RDFS_SUBCLASSOF:
            if obj.kind != "iri":
                warn(triple.line, triple.column, "literal rdfs:subClassOf object skipped")
            else:
                bucket.superclasses.add(obj.value)
        elif pred == RDFS_DOMAIN:
            if obj.kind != "iri":
                warn(triple.line, triple.column, "literal rdfs:domain object skipped")
            else:
                bucket.domains.add(obj.value)
        elif pred == RDFS_RANGE:
            if obj.kind != "iri":
                warn(triple.line, triple.column, "literal rdfs:range object skipped")
            else:
                bucket.ranges.append(obj.value)
                bucket.range_lines.append(triple.line)
        else:
            warn(triple.line, triple.column, f"predicate outside the subset skipped: <{pred}>")

    concepts: dict[str, Concept] = {}
    relationships: dict[str, Relationship] = {}
    attributes: dict[str, Attribute] = {}

    for iri, bucket in subjects.items():
        if len(bucket.kinds) > 1:
            error(bucket.line, bucket.column, f"subject declared with multiple kinds: <{iri}>")
            continue
        if not bucket.kinds:
            if not bucket.unsupported_type:  # the type warning already covers it
                warn(bucket.line, bucket.column, f"subject without a supported declaration skipped: <{iri}>")
            continue
        kind = bucket.kinds[0]
        label = bucket.label
        if label is not None and not label.strip():
            warn(bucket.line, bucket.column, f"blank label dropped on <{iri}>")
            label = None
        if kind == "concept":
            if iri in bucket.superclasses:
                error(bucket.line, bucket.column, f"concept is its own superclass: <{iri}>")
                continue
            if bucket.domains or bucket.ranges:
                warn(bucket.line, bucket.column, f"domain/range on a class skipped: <{iri}>")
            concepts[iri] = Concept(iri, label, bucket.comment, frozenset(bucket.superclasses))
        elif kind == "relationship":
            if bucket.superclasses:
                warn(bucket.line, bucket.column, f"property hierarchy not supported; subClassOf on <{iri}> skipped")
            if not bucket.domains:
                error(bucket.line, bucket.column, f"relationship without a domain: <{iri}>")
            if not bucket.ranges:
                error(bucket.line, bucket.column, f"relationship without a range: <{iri}>")
            if bucket.domains and bucket.ranges:
                relationships[iri] = Relationship(
                    iri, label, bucket.comment, frozenset(bucket.domains), frozenset(bucket.ranges)
                )
        else:
            if bucket.superclasses:
                warn(bucket.line, bucket.column, f"property hierarchy not supported; subClassOf on <{iri}> skipped")
            if not bucket.domains:
                error(bucket.line, bucket.column, f"attribute without a domain: <{iri}>")
            if not bucket.ranges:
                error(bucket.line, bucket.column, f"attribute without a datatype range: <{iri}>")
                continue
            datatype = bucket.ranges[0]
            for extra, extra_line in zip(bucket.ranges[1:], bucket.range_lines[1:]):
                warn(extra_line, bucket.column, f"extra datatype range ignored on <{iri}>: <{extra}>")
            if not datatype.startswith(XSD_NS):
                error(bucket.range_lines[0], bucket.column, f"datatype outside xsd on <{iri}>: <{datatype}>")
            elif bucket.domains:
                attributes[iri] = Attribute(iri, datatype, label, bucket.comment, frozenset(bucket.domains))

    def check_refs(owner: str, refs: set[str] | frozenset[str], role: str, line: int, column: int) -> None:
        for ref in sorted(refs):
            if ref not in concepts:
                error(line, column, f"<{owner}> references undeclared concept as {role}: <{ref}>")

    for concept in concepts.values():
        bucket = subjects[concept.iri]
        check_refs(concept.iri, concept.superclasses, "superclass", bucket.line, bucket.column)
    for rel in relationships.values():
        bucket = subjects[rel.iri]
        check_refs(rel.iri, rel.domains, "domain", bucket.line, bucket.column)
        check_refs(rel.iri, rel.ranges, "range", bucket.line, bucket.column)
    for attr in attributes.values():
        bucket = subjects[attr.iri]
        check_refs(attr.iri, attr.domains, "domain", bucket.line, bucket.column)

    if errors:
        return None
    try:
        return Ontology(concepts, relationships, attributes, dict(prefixes))
    except OntologyError as exc:
        error(1, 1, str(exc))
        return None


def parse_turtle(text: str) -> ParseResult:
    """Parse a Turtle document; all-or-nothing on error diagnostics."""
    triples, prefixes, diagnostics = read_triples(text)
    if any(d.severity == "error" for d in diagnostics):
        return ParseResult(None, diagnostics)
    ontology = _assemble(triples, prefixes, diagnostics)
    if any(d.severity == "error" for d in diagnostics):
        return ParseResult(None, diagnostics)
    return ParseResult(ontology, diagnostics)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_LOCAL_OK_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")
_LITERAL_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_literal(value: str) -> str:
    return "".join(_LITERAL_ESCAPES.get(ch, ch) for ch in value)


class _Shortener:
    def __init__(self, prefixes: dict[str, str]):
        # Longest namespace wins; prefix text breaks ties deterministically.
        self.namespaces = sorted(prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    def iri(self, iri: str) -> str:
        for prefix, namespace in self.namespaces:
            if iri.startswith(namespace):
                local = iri[len(namespace):]
                if _LOCAL_OK_RE.match(local):
                    return f"{prefix}:{local}"
        return f"<{iri}>"

    def literal(self, value: str) -> str:
        return f'"{_escape_literal(value)}"'


def serialize_turtle(ontology: Ontology) -> str:
    """Deterministic Turtle rendering; the formal verbalization of an ontology."""
    short = _Shortener(ontology.prefixes)

    lines: list[str] = [
        f"@prefix {prefix}: <{namespace}> ."
        for prefix, namespace in sorted(ontology.prefixes.items())
    ]
    blocks: list[str] = []

    def block(subject: str, type_iri: str, body: list[tuple[str, list[str]]]) -> str:
        rows = [f"{short.iri(subject)} a {short.iri(type_iri)}"]
        for predicate, objects in body:
            if objects:
                rows.append(f"    {predicate} {', '.join(objects)}")
        return " ;\n".join(rows) + " ."

    subjects = sorted(
        list(ontology.concepts) + list(ontology.relationships) + list(ontology.attributes)
    )
    label_p = short.iri(RDFS_LABEL)
    comment_p = short.iri(RDFS_COMMENT)
    subclass_p = short.iri(RDFS_SUBCLASSOF)
    domain_p = short.iri(RDFS_DOMAIN)
    range_p = short.iri(RDFS_RANGE)

    for iri in subjects:
        element = ontology.element(iri)
        body: list[tuple[str, list[str]]] = []
        if element.label is not None:
            body.append((label_p, [short.literal(element.label)]))
        if element.comment is not None:
            body.append((comment_p, [short.literal(element.comment)]))
        if isinstance(element, Concept):
            type_iri = OWL_CLASS
            body.append((subclass_p, [short.iri(s) for s in sorted(element.superclasses)]))
        elif isinstance(element, Relationship):
            type_iri = OWL_OBJECT_PROPERTY
            body.append((domain_p, [short.iri(d) for d in sorted(element.domains)]))
            body.append((range_p, [short.iri(r) for r in sorted(element.ranges)]))
        else:
            type_iri = OWL_DATATYPE_PROPERTY
            body.append((domain_p, [short.iri(d) for d in sorted(element.domains)]))
            body.append((range_p, [short.iri(element.datatype)]))
        blocks.append(block(iri, type_iri, body))

    parts: list[str] = []
    if lines:
        parts.append("\n".join(lines))
    if blocks:
        parts.append("\n\n".join(blocks))
    if not parts:
        return ""
    return "\n\n".join(parts) + "\n"
