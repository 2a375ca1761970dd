"""Immutable RDF terms, statements, and their readers and writers.

The engine treats a dataset as a frozenset of quads.  Graph names matter
for storage and for ground updates, while query matching later ignores
them, so the quad keeps its graph as a plain IRI string next to the
triple.  Literals compare lexically: two literals are the same term only
when their lexical form, datatype, and language tag all agree.  A plain
literal is normalised to xsd:string at construction so that "abc" written
with and without the datatype is one term, which mirrors RDF 1.1.

Serialisation is canonical N-Quads: one statement per line, lines sorted
bytewise, UTF-8 with a trailing newline on every line.  Two equal graph
sets therefore serialise to identical bytes, which the version cache and
the command line output rely on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator
from urllib.parse import urljoin

from .errors import ParseError, UnknownPrefix

XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_DOUBLE = XSD + "double"
XSD_BOOLEAN = XSD + "boolean"
XSD_DATETIME = XSD + "dateTime"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_LANGTAG = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")


def is_absolute_iri(value: str) -> bool:
    return bool(_SCHEME.match(value))


@dataclass(frozen=True, slots=True)
class Term:
    """One RDF term: an IRI, a literal, or a blank node.

    kind is "iri", "literal", or "blank".  value holds the IRI, the
    lexical form, or the blank node label.  datatype and language only
    apply to literals and are mutually exclusive.
    """

    kind: str
    value: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "literal":
            if self.language is not None:
                if self.datatype is not None:
                    raise ValueError("literal cannot carry both datatype and language")
                if not _LANGTAG.match(self.language):
                    raise ValueError(f"malformed language tag {self.language!r}")
            elif self.datatype is None:
                object.__setattr__(self, "datatype", XSD_STRING)
        elif self.kind == "iri":
            if self.datatype is not None or self.language is not None:
                raise ValueError("datatype and language apply to literals only")
            if not is_absolute_iri(self.value):
                raise ValueError(f"IRI is not absolute: {self.value!r}")
        elif self.kind == "blank":
            if self.datatype is not None or self.language is not None:
                raise ValueError("datatype and language apply to literals only")
            if not self.value:
                raise ValueError("blank node label must be non-empty")
        else:
            raise ValueError(f"unknown term kind {self.kind!r}")

    @property
    def is_iri(self) -> bool:
        return self.kind == "iri"

    @property
    def is_literal(self) -> bool:
        return self.kind == "literal"

    @property
    def is_blank(self) -> bool:
        return self.kind == "blank"

    def n3(self) -> str:
        """Render the term in N-Triples syntax.

        The xsd:string datatype stays implicit, so the rendering is
        canonical for equal terms.
        """
        if self.kind == "iri":
            return f"<{escape_iri(self.value)}>"
        if self.kind == "blank":
            return f"_:{self.value}"
        body = f'"{escape_string(self.value)}"'
        if self.language is not None:
            return f"{body}@{self.language}"
        if self.datatype != XSD_STRING:
            return f"{body}^^<{escape_iri(self.datatype)}>"
        return body


def iri(value: str) -> Term:
    return Term("iri", value)


def literal(value: str, datatype: str | None = None, language: str | None = None) -> Term:
    return Term("literal", value, datatype, language)


def blank(label: str) -> Term:
    return Term("blank", label)


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if self.subject.is_literal:
            raise ValueError("triple subject cannot be a literal")
        if not self.predicate.is_iri:
            raise ValueError("triple predicate must be an IRI")


@dataclass(frozen=True, slots=True)
class Quad:
    """A triple plus an optional graph IRI; None means the default graph."""

    triple: Triple
    graph: str | None = None

    def __post_init__(self) -> None:
        if self.graph is not None and not is_absolute_iri(self.graph):
            raise ValueError(f"graph name is not an absolute IRI: {self.graph!r}")

    @property
    def subject(self) -> Term:
        return self.triple.subject

    @property
    def predicate(self) -> Term:
        return self.triple.predicate

    @property
    def object(self) -> Term:
        return self.triple.object


GraphSet = frozenset[Quad]

EMPTY_GRAPH: GraphSet = frozenset()


def quad(s: Term, p: Term, o: Term, graph: str | None = None) -> Quad:
    return Quad(Triple(s, p, o), graph)


_STRING_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


_STRING_UNSAFE = re.compile(r'[\x00-\x1f"\\]')
_IRI_UNSAFE = re.compile(r'[\x00-\x20<>"{}|^`\\]')


def _escape_string_char(m: re.Match) -> str:
    ch = m.group()
    return _STRING_ESCAPES.get(ch, f"\\u{ord(ch):04X}")


def escape_string(value: str) -> str:
    if _STRING_UNSAFE.search(value) is None:
        return value
    return _STRING_UNSAFE.sub(_escape_string_char, value)


def escape_iri(value: str) -> str:
    if _IRI_UNSAFE.search(value) is None:
        return value
    return _IRI_UNSAFE.sub(lambda m: f"\\u{ord(m.group()):04X}", value)


def quad_line(q: Quad) -> str:
    parts = [q.subject.n3(), q.predicate.n3(), q.object.n3()]
    if q.graph is not None:
        parts.append(f"<{escape_iri(q.graph)}>")
    return " ".join(parts) + " ."


def serialize(graphs: Iterable[Quad]) -> str:
    """Canonical N-Quads text for a set of quads.

    Lines are sorted by code point, which equals bytewise order under
    UTF-8, and every line ends with a newline.
    """
    return "".join(line + "\n" for line in sorted(quad_line(q) for q in graphs))


def graph_diff(a: Iterable[Quad], b: Iterable[Quad]) -> tuple[GraphSet, GraphSet]:
    """Return (added, removed) between two graph sets, read as a -> b."""
    sa, sb = frozenset(a), frozenset(b)
    return sb - sa, sa - sb


class Scanner:
    """Character scanner shared by the N-Quads and Turtle readers."""

    __slots__ = ("text", "pos")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def location(self, pos: int | None = None) -> tuple[int, int]:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        column = pos - self.text.rfind("\n", 0, pos)
        return line, column

    def error(self, message: str, pos: int | None = None) -> ParseError:
        line, column = self.location(pos)
        return ParseError(message, line, column)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.text[i] if i < len(self.text) else ""

    def skip_space(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                nl = text.find("\n", self.pos)
                self.pos = len(text) if nl < 0 else nl + 1
            else:
                return

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}, found {self.peek()!r}")
        self.pos += 1

    def read_iriref(self) -> str:
        start = self.pos
        self.expect("<")
        out = []
        text = self.text
        while True:
            if self.pos >= len(text):
                raise self.error("unterminated IRI", start)
            ch = text[self.pos]
            if ch == ">":
                self.pos += 1
                return "".join(out)
            if ch in " \n\r\t\"{}|^`":
                raise self.error(f"character {ch!r} not allowed inside an IRI")
            if ch == "<":
                raise self.error("character '<' not allowed inside an IRI")
            if ch == "\\":
                out.append(self._read_uchar())
                continue
            out.append(ch)
            self.pos += 1

    def _read_uchar(self) -> str:
        start = self.pos
        self.pos += 1
        kind = self.peek()
        if kind == "u":
            width = 4
        elif kind == "U":
            width = 8
        else:
            raise self.error("only \\u and \\U escapes are allowed in IRIs", start)
        digits = self.text[self.pos + 1 : self.pos + 1 + width]
        if len(digits) < width or any(d not in "0123456789abcdefABCDEF" for d in digits):
            raise self.error("malformed numeric escape", start)
        self.pos += 1 + width
        return chr(int(digits, 16))

    def read_string(self) -> str:
        quote = self.peek()
        start = self.pos
        text = self.text
        if text.startswith(quote * 3, self.pos):
            self.pos += 3
            closer = quote * 3
            long_form = True
        else:
            self.pos += 1
            closer = quote
            long_form = False
        out = []
        while True:
            if self.pos >= len(text):
                raise self.error("unterminated string", start)
            if text.startswith(closer, self.pos):
                self.pos += len(closer)
                return "".join(out)
            ch = text[self.pos]
            if ch == "\\":
                out.append(self._read_string_escape())
                continue
            if ch in "\n\r" and not long_form:
                raise self.error("newline inside single-line string", start)
            out.append(ch)
            self.pos += 1

    def _read_string_escape(self) -> str:
        nxt = self.peek(1)
        simple = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f",
                  '"': '"', "'": "'", "\\": "\\"}
        if nxt in simple:
            self.pos += 2
            return simple[nxt]
        if nxt in "uU":
            return self._read_uchar()
        # regex patterns like "\.$" travel inside strings, so an unknown
        # escape keeps its backslash instead of failing the document
        self.pos += 2
        return "\\" + nxt

    def read_langtag(self) -> str:
        self.expect("@")
        start = self.pos
        while self.peek().isalnum() or self.peek() == "-":
            self.pos += 1
        tag = self.text[start : self.pos]
        if not _LANGTAG.match(tag):
            raise self.error("malformed language tag", start)
        return tag

    def read_blank_label(self) -> str:
        start = self.pos
        self.expect("_")
        self.expect(":")
        label_start = self.pos
        while True:
            ch = self.peek()
            if ch and (ch.isalnum() or ch in "_-."):
                self.pos += 1
            else:
                break
        # trailing dots belong to the statement terminator, not the label
        while self.pos > label_start and self.text[self.pos - 1] == ".":
            self.pos -= 1
        label = self.text[label_start : self.pos]
        if not label:
            raise self.error("blank node label must be non-empty", start)
        return label

    def read_word(self) -> str:
        start = self.pos
        while True:
            ch = self.peek()
            if ch and (ch.isalnum() or ch in "_-%:."):
                self.pos += 1
            else:
                break
        while self.pos > start and self.text[self.pos - 1] == ".":
            self.pos -= 1
        return self.text[start : self.pos]


def _finish_literal(sc: Scanner, value: str, resolve_dt) -> Term:
    if sc.peek() == "@":
        return Term("literal", value, language=sc.read_langtag())
    if sc.peek() == "^" and sc.peek(1) == "^":
        sc.pos += 2
        return Term("literal", value, datatype=resolve_dt())
    return Term("literal", value)


_NUMBER = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")


def read_number(sc: Scanner) -> Term:
    m = _NUMBER.match(sc.text, sc.pos)
    if not m:
        raise sc.error("malformed numeric literal")
    lexical = m.group(0)
    sc.pos = m.end()
    if m.group(2):
        dt = XSD_DOUBLE
    elif "." in lexical:
        dt = XSD_DECIMAL
    else:
        dt = XSD_INTEGER
    return Term("literal", lexical, datatype=dt)


def parse_nquads(text: str) -> GraphSet:
    """Parse N-Quads (N-Triples when no graph label is present).

    Prefixed names are not part of N-Quads and raise ParseError.  Graph
    labels must be IRIs because the quad model has no blank graph names.
    """
    sc = Scanner(text)
    quads: set[Quad] = set()

    def read_term(allow_literal: bool) -> Term:
        ch = sc.peek()
        if ch == "<":
            value = sc.read_iriref()
            if not is_absolute_iri(value):
                raise sc.error(f"relative IRI {value!r} in N-Quads")
            return Term("iri", value)
        if ch == "_":
            return Term("blank", sc.read_blank_label())
        if ch in "\"'" and allow_literal:
            value = sc.read_string()
            def resolve_dt() -> str:
                if sc.peek() != "<":
                    raise sc.error("datatype must be a full IRI in N-Quads")
                dt = sc.read_iriref()
                if not is_absolute_iri(dt):
                    raise sc.error(f"relative datatype IRI {dt!r}")
                return dt
            return _finish_literal(sc, value, resolve_dt)
        raise sc.error(f"unexpected character {ch!r} in N-Quads statement")

    while True:
        sc.skip_space()
        if sc.at_end():
            return frozenset(quads)
        s = read_term(allow_literal=False)
        sc.skip_space()
        p = read_term(allow_literal=False)
        if not p.is_iri:
            raise sc.error("predicate must be an IRI")
        sc.skip_space()
        o = read_term(allow_literal=True)
        sc.skip_space()
        graph: str | None = None
        if sc.peek() == "<":
            graph = sc.read_iriref()
            if not is_absolute_iri(graph):
                raise sc.error(f"relative graph IRI {graph!r}")
            sc.skip_space()
        elif sc.peek() == "_":
            raise sc.error("blank node graph labels are not supported")
        sc.expect(".")
        quads.add(Quad(Triple(s, p, o), graph))


def parse_turtle(text: str, base: str | None = None) -> GraphSet:
    """Parse the Turtle subset used by snapshot documents.

    Supported: @prefix and @base (and their SPARQL spellings), the "a"
    keyword, predicate lists with ";", object lists with ",", typed and
    language-tagged literals in any quote form, numbers, booleans, and
    labelled blank nodes.  Collections, blank node property lists, and
    quoted triples are rejected.  All triples land in the default graph.
    """
    sc = Scanner(text)
    prefixes: dict[str, str] = {}
    quads: set[Quad] = set()

    def resolve(raw: str, pos: int) -> str:
        if is_absolute_iri(raw):
            return raw
        if base is None and "base_iri" not in state:
            line, column = sc.location(pos)
            raise ParseError(f"relative IRI {raw!r} with no base", line, column)
        return urljoin(state.get("base_iri", base or ""), raw)

    state: dict[str, str] = {}
    if base is not None:
        state["base_iri"] = base

    def expand_pname(word: str, pos: int) -> str:
        prefix, _, local = word.partition(":")
        if prefix not in prefixes:
            line, column = sc.location(pos)
            raise UnknownPrefix(prefix, line, column)
        return prefixes[prefix] + local

    def read_iri_term() -> Term:
        pos = sc.pos
        if sc.peek() == "<":
            if sc.peek(1) == "<":
                raise sc.error("quoted triples are not supported")
            return Term("iri", resolve(sc.read_iriref(), pos))
        word = sc.read_word()
        if not word or ":" not in word:
            raise sc.error(f"expected an IRI, found {word!r}" if word else "expected an IRI")
        return Term("iri", expand_pname(word, pos))

    def read_subject() -> Term:
        ch = sc.peek()
        if ch == "[":
            raise sc.error("blank node property lists are not supported")
        if ch == "(":
            raise sc.error("collections are not supported")
        if ch == "_":
            return Term("blank", sc.read_blank_label())
        return read_iri_term()

    def read_predicate() -> Term:
        pos = sc.pos
        if sc.peek() == "<":
            return Term("iri", resolve(sc.read_iriref(), pos))
        word = sc.read_word()
        if word == "a":
            return Term("iri", RDF_TYPE)
        if ":" not in word:
            raise sc.error(f"expected a predicate, found {word!r}")
        return Term("iri", expand_pname(word, pos))

    def read_object() -> Term:
        ch = sc.peek()
        if ch and ch in "\"'":
            value = sc.read_string()
            def resolve_dt() -> str:
                pos = sc.pos
                if sc.peek() == "<":
                    return resolve(sc.read_iriref(), pos)
                word = sc.read_word()
                if ":" not in word:
                    raise sc.error("expected a datatype IRI")
                return expand_pname(word, pos)
            return _finish_literal(sc, value, resolve_dt)
        if ch == "_":
            return Term("blank", sc.read_blank_label())
        if ch == "[":
            raise sc.error("blank node property lists are not supported")
        if ch == "(":
            raise sc.error("collections are not supported")
        if ch.isdigit() or (ch in "+-." and sc.peek(1).isdigit()):
            return read_number(sc)
        pos = sc.pos
        if sc.peek() == "<":
            if sc.peek(1) == "<":
                raise sc.error("quoted triples are not supported")
            return Term("iri", resolve(sc.read_iriref(), pos))
        word = sc.read_word()
        if word in ("true", "false"):
            return Term("literal", word, datatype=XSD_BOOLEAN)
        if ":" not in word:
            raise sc.error(f"expected an object term, found {word!r}" if word else "expected an object term")
        return Term("iri", expand_pname(word, pos))

    def read_directive_at() -> None:
        sc.expect("@")
        word = sc.read_word()
        if word == "prefix":
            read_prefix()
        elif word == "base":
            read_base()
        else:
            raise sc.error(f"unknown directive @{word}")
        sc.skip_space()
        sc.expect(".")

    def read_prefix() -> None:
        sc.skip_space()
        word = sc.read_word()
        if not word.endswith(":"):
            # read_word strips nothing here; the prefix label ends with ':'
            if sc.peek() == ":":
                sc.pos += 1
                word += ":"
            else:
                raise sc.error("prefix declaration must end with ':'")
        pos = sc.pos
        sc.skip_space()
        prefixes[word[:-1]] = resolve(sc.read_iriref(), pos)

    def read_base() -> None:
        sc.skip_space()
        pos = sc.pos
        state["base_iri"] = resolve(sc.read_iriref(), pos)

    while True:
        sc.skip_space()
        if sc.at_end():
            return frozenset(quads)
        if sc.peek() == "@":
            read_directive_at()
            continue
        mark = sc.pos
        if sc.peek().isalpha():
            word = sc.read_word()
            if word.upper() == "PREFIX":
                sc.skip_space()
                read_prefix()
                continue
            if word.upper() == "BASE":
                read_base()
                continue
            sc.pos = mark
        subject = read_subject()
        while True:
            sc.skip_space()
            predicate = read_predicate()
            while True:
                sc.skip_space()
                obj = read_object()
                quads.add(Quad(Triple(subject, predicate, obj), None))
                sc.skip_space()
                if sc.peek() == ",":
                    sc.pos += 1
                    continue
                break
            if sc.peek() == ";":
                sc.pos += 1
                sc.skip_space()
                if sc.peek() and sc.peek() in ".;":
                    while sc.peek() == ";":
                        sc.pos += 1
                        sc.skip_space()
                    break
                continue
            break
        sc.expect(".")


def parse_document(text: str, fmt: str, base: str | None = None) -> GraphSet:
    """Parse a document in the named format ("nquads" or "turtle")."""
    if fmt == "nquads":
        return parse_nquads(text)
    if fmt == "turtle":
        return parse_turtle(text, base=base)
    raise ValueError(f"unknown format {fmt!r}")


def subjects(graphs: Iterable[Quad]) -> Iterator[Term]:
    seen: set[Term] = set()
    for q in graphs:
        if q.subject not in seen:
            seen.add(q.subject)
            yield q.subject
