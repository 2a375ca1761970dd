"""Where datasets and provenance come from, and the context queries run in.

A source is either a local file (N-Quads or Turtle, by extension) or a
SPARQL endpoint (http or https URL).  Data sources hold the live state;
provenance sources hold the snapshot metadata.  A Context bundles any
number of both behind one memoising facade: per-entity quads, loaded
histories, the flat list of update strings for textual search, plus the
optional version cache and text index.

Endpoint access keeps to the SPARQL 1.1 protocol: queries go out as
POST form data and answers come back as application/sparql-results+json.
Entity graphs are fetched with a fixed template that covers the default
graph and named graphs in one UNION, because ground deltas are graph
scoped and reconstruction needs to know where each quad lives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import requests

from .cache import VersionCache
from .errors import CacheIO, ConfigError, NetworkError, NoHistory, ParseError
from .provenance import (
    OCO_HAS_UPDATE_QUERY,
    SPECIALIZATION_OF,
    EntityHistory,
    load_history,
)
from .rdf_model import GraphSet, Quad, Term, Triple, parse_document
from .sparql_engine import (
    Binding,
    ParsedQuery,
    SolutionSet,
    TripleIndex,
    TriplePattern,
    Variable,
    evaluate,
    format_query,
    match_pattern,
    parse_select,
)

DEFAULT_EXPLOSION_LIMIT = 10_000

_FORMATS = {
    ".nq": "nquads",
    ".nquads": "nquads",
    ".nt": "nquads",
    ".ntriples": "nquads",
    ".ttl": "turtle",
    ".turtle": "turtle",
}


@dataclass(frozen=True)
class SourceConfig:
    """Parsed configuration: where to read data and provenance from."""

    data: tuple[str, ...]
    provenance: tuple[str, ...]
    cache_dir: str | None = None
    text_index: bool = False
    explosion_limit: int = DEFAULT_EXPLOSION_LIMIT
    http_timeout: float = 30.0

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "SourceConfig":
        known = {"data", "provenance", "cache_dir", "text_index",
                 "explosion_limit", "http_timeout"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        for key in ("data", "provenance"):
            value = raw.get(key)
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(f"'{key}' must be a non-empty list of sources")
            if not all(isinstance(v, str) and v for v in value):
                raise ConfigError(f"'{key}' entries must be non-empty strings")
        cache_dir = raw.get("cache_dir")
        if cache_dir is not None and not isinstance(cache_dir, str):
            raise ConfigError("'cache_dir' must be a string path")
        text_index = raw.get("text_index", False)
        if not isinstance(text_index, bool):
            raise ConfigError("'text_index' must be true or false")
        limit = raw.get("explosion_limit", DEFAULT_EXPLOSION_LIMIT)
        if not isinstance(limit, int) or isinstance(limit, bool) or limit < 1:
            raise ConfigError("'explosion_limit' must be a positive integer")
        timeout = raw.get("http_timeout", 30.0)
        if not isinstance(timeout, (int, float)) or isinstance(timeout, bool) or timeout <= 0:
            raise ConfigError("'http_timeout' must be a positive number")
        return cls(
            data=tuple(raw["data"]),
            provenance=tuple(raw["provenance"]),
            cache_dir=cache_dir,
            text_index=text_index,
            explosion_limit=limit,
            http_timeout=float(timeout),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "SourceConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read configuration file {path}: {exc}")
        try:
            raw = json.loads(text)
        except ValueError as exc:
            raise ConfigError(f"configuration file {path} is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        return cls.from_mapping(raw)

    def to_mapping(self) -> dict:
        return {
            "data": list(self.data),
            "provenance": list(self.provenance),
            "cache_dir": self.cache_dir,
            "text_index": self.text_index,
            "explosion_limit": self.explosion_limit,
            "http_timeout": self.http_timeout,
        }


@dataclass(frozen=True)
class DeltaRecord:
    """One stored update string: which snapshot of which entity said what."""

    entity: str
    snapshot: str
    text: str


class TextIndex:
    """Substring lookup over stored update strings.

    lookup(form) returns every (entity, snapshot) whose update text
    contains the N-Triples rendering `form`.  Postings are computed on
    first use per form and memoised, so the index answers exactly like a
    direct scan while amortising repeated lookups.
    """

    def __init__(self, records: Sequence[DeltaRecord]):
        self.records = tuple(records)
        self._postings: dict[str, frozenset[tuple[str, str]]] = {}

    def lookup(self, form: str) -> frozenset[tuple[str, str]]:
        hit = self._postings.get(form)
        if hit is None:
            hit = frozenset(
                (r.entity, r.snapshot) for r in self.records if form in r.text
            )
            self._postings[form] = hit
        return hit

    def prime(self, forms: Iterable[str]) -> None:
        for form in forms:
            self.lookup(form)


def _is_endpoint(location: str) -> bool:
    return location.startswith("http://") or location.startswith("https://")


class FileSource:
    """Quads parsed from one local file, with lazy per-subject lookup."""

    def __init__(self, location: str, graphs: GraphSet | None = None):
        self.location = location
        if graphs is None:
            path = Path(location)
            fmt = _FORMATS.get(path.suffix.lower())
            if fmt is None:
                raise ConfigError(
                    f"cannot tell the format of {location}; expected one of"
                    f" {', '.join(sorted(set(_FORMATS)))}"
                )
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read source file {location}: {exc}")
            try:
                graphs = parse_document(text, fmt)
            except ParseError as exc:
                raise ConfigError(f"source file {location} does not parse: {exc}")
        self.graphs: GraphSet = frozenset(graphs)
        self._by_subject: dict[str, set[Quad]] | None = None

    def _subject_map(self) -> dict[str, set[Quad]]:
        if self._by_subject is None:
            mapping: dict[str, set[Quad]] = {}
            for q in self.graphs:
                if q.subject.is_iri:
                    mapping.setdefault(q.subject.value, set()).add(q)
            self._by_subject = mapping
        return self._by_subject

    def entity_quads(self, entity: str) -> frozenset[Quad]:
        return frozenset(self._subject_map().get(entity, ()))


class EndpointSource:
    """One SPARQL endpoint spoken to over the standard protocol."""

    def __init__(self, url: str, timeout: float, session: requests.Session):
        self.url = url
        self.timeout = timeout
        self.session = session

    def select(self, query_text: str) -> list[dict[str, Term]]:
        response = self._post(query_text)
        try:
            payload = response.json()
            rows = payload["results"]["bindings"]
        except (ValueError, KeyError) as exc:
            raise NetworkError(self.url, response.status_code,
                               f"malformed SPARQL results document: {exc}")
        out = []
        for row in rows:
            converted: dict[str, Term] = {}
            for name, node in row.items():
                converted[name] = _term_from_json(self.url, node)
            out.append(converted)
        return out

    def _post(self, query_text: str) -> requests.Response:
        attempts = 0
        while True:
            attempts += 1
            try:
                response = self.session.post(
                    self.url,
                    data={"query": query_text},
                    headers={"Accept": "application/sparql-results+json"},
                    timeout=self.timeout,
                )
            except requests.Timeout as exc:
                if attempts == 1:
                    continue  # one retry after a timeout
                raise NetworkError(self.url, None, f"timed out twice: {exc}")
            except requests.RequestException as exc:
                raise NetworkError(self.url, None, str(exc))
            if response.status_code != 200:
                snippet = response.text[:200]
                raise NetworkError(
                    self.url, response.status_code,
                    f"endpoint answered {response.status_code}: {snippet}",
                )
            return response


def _term_from_json(url: str, node: Mapping) -> Term:
    kind = node.get("type")
    value = node.get("value", "")
    if kind == "uri":
        return Term("iri", value)
    if kind in ("literal", "typed-literal"):
        lang = node.get("xml:lang")
        if lang:
            return Term("literal", value, language=lang)
        return Term("literal", value, datatype=node.get("datatype"))
    if kind == "bnode":
        return Term("blank", value)
    raise NetworkError(url, None, f"unknown term type {kind!r} in results")


def _pattern_text(pattern: TriplePattern, subject_var: str = "s") -> tuple[str, str]:
    """Render a pattern for remote matching; returns (text, subject name)."""

    def part(term) -> str:
        if isinstance(term, Variable):
            return f"?{term.name}"
        return term.n3()

    subject = f"?{subject_var}" if isinstance(pattern.subject, Variable) else part(pattern.subject)
    name = pattern.subject.name if isinstance(pattern.subject, Variable) else subject_var
    return f"{subject} {part(pattern.predicate)} {part(pattern.object)}", name


ENTITY_FETCH_TEMPLATE = (
    "SELECT ?p ?o ?g WHERE {{ {{ <{entity}> ?p ?o }}"
    " UNION {{ GRAPH ?g {{ <{entity}> ?p ?o }} }} }}"
)

SUBJECT_MATCH_TEMPLATE = (
    "SELECT DISTINCT ?{name} WHERE {{ {{ {pattern} }}"
    " UNION {{ GRAPH ?anygraph {{ {pattern} }} }} }}"
)

DELTA_LIST_QUERY = (
    "SELECT ?snapshot ?entity ?text WHERE {"
    f" ?snapshot <{SPECIALIZATION_OF}> ?entity ."
    f" ?snapshot <{OCO_HAS_UPDATE_QUERY}> ?text . }}"
)


class DataEndpoint(EndpointSource):
    def entity_quads(self, entity: str) -> frozenset[Quad]:
        rows = self.select(ENTITY_FETCH_TEMPLATE.format(entity=entity))
        quads = set()
        subject = Term("iri", entity)
        for row in rows:
            if "p" not in row or "o" not in row:
                continue
            graph = row.get("g")
            quads.add(Quad(
                Triple(subject, row["p"], row["o"]),
                graph.value if graph is not None and graph.is_iri else None,
            ))
        return frozenset(quads)

    def match_subjects(self, pattern: TriplePattern) -> set[str]:
        text, name = _pattern_text(pattern)
        rows = self.select(SUBJECT_MATCH_TEMPLATE.format(pattern=text, name=name))
        return {
            row[name].value
            for row in rows
            if name in row and row[name].is_iri
        }


class ProvenanceEndpoint(EndpointSource):
    def provenance_quads_for(self, entity: str) -> frozenset[Quad]:
        query = (
            "SELECT ?s ?p ?o WHERE {"
            f" ?s <{SPECIALIZATION_OF}> <{entity}> . ?s ?p ?o . }}"
        )
        rows = self.select(query)
        quads = set()
        for row in rows:
            if {"s", "p", "o"} <= row.keys():
                quads.add(Quad(Triple(row["s"], row["p"], row["o"]), None))
        return frozenset(quads)

    def delta_records(self) -> list[DeltaRecord]:
        rows = self.select(DELTA_LIST_QUERY)
        records = []
        for row in rows:
            if {"snapshot", "entity", "text"} <= row.keys():
                records.append(DeltaRecord(
                    entity=row["entity"].value,
                    snapshot=row["snapshot"].value,
                    text=row["text"].value,
                ))
        return records


class FileProvenanceSource(FileSource):
    def __init__(self, location: str, graphs: GraphSet | None = None):
        super().__init__(location, graphs)
        self._snapshots_of: dict[str, set[Term]] | None = None
        self._quads_of_snapshot: dict[Term, set[Quad]] | None = None

    def _index(self) -> tuple[dict[str, set[Term]], dict[Term, set[Quad]]]:
        if self._snapshots_of is None:
            snapshots_of: dict[str, set[Term]] = {}
            quads_of: dict[Term, set[Quad]] = {}
            for q in self.graphs:
                quads_of.setdefault(q.subject, set()).add(q)
                if q.predicate.value == SPECIALIZATION_OF and q.object.is_iri:
                    snapshots_of.setdefault(q.object.value, set()).add(q.subject)
            self._snapshots_of = snapshots_of
            self._quads_of_snapshot = quads_of
        return self._snapshots_of, self._quads_of_snapshot

    def provenance_quads_for(self, entity: str) -> frozenset[Quad]:
        snapshots_of, quads_of = self._index()
        collected: set[Quad] = set()
        for snapshot in snapshots_of.get(entity, ()):
            collected |= quads_of.get(snapshot, set())
        return frozenset(collected)

    def delta_records(self) -> list[DeltaRecord]:
        specialization: dict[Term, list[str]] = {}
        texts: dict[Term, list[str]] = {}
        for q in self.graphs:
            if q.predicate.value == SPECIALIZATION_OF and q.object.is_iri:
                specialization.setdefault(q.subject, []).append(q.object.value)
            elif q.predicate.value == OCO_HAS_UPDATE_QUERY and q.object.is_literal:
                texts.setdefault(q.subject, []).append(q.object.value)
        records = []
        for snapshot, entities in specialization.items():
            if not snapshot.is_iri:
                continue
            for text in texts.get(snapshot, ()):
                for entity in entities:
                    records.append(DeltaRecord(entity=entity, snapshot=snapshot.value, text=text))
        return sorted(records, key=lambda r: (r.entity, r.snapshot))


class Context:
    """Everything one query run needs to reach data and provenance."""

    def __init__(
        self,
        data_sources: Sequence,
        provenance_sources: Sequence,
        cache: VersionCache | None = None,
        text_index_enabled: bool = False,
        explosion_limit: int = DEFAULT_EXPLOSION_LIMIT,
        warnings: Sequence[str] = (),
    ):
        self.data_sources = list(data_sources)
        self.provenance_sources = list(provenance_sources)
        self.cache = cache
        self.text_index_enabled = text_index_enabled
        self.explosion_limit = explosion_limit
        self.warnings = list(warnings)
        self._entity_quads: dict[str, frozenset[Quad]] = {}
        self._histories: dict[str, EntityHistory | None] = {}
        self._records: tuple[DeltaRecord, ...] | None = None
        self._index: TextIndex | None = None
        self._local_index: TripleIndex | None = None

    # -- data ---------------------------------------------------------

    def entity_quads(self, entity: str) -> frozenset[Quad]:
        cached = self._entity_quads.get(entity)
        if cached is None:
            quads: set[Quad] = set()
            for source in self.data_sources:
                quads |= source.entity_quads(entity)
            cached = frozenset(quads)
            self._entity_quads[entity] = cached
        return cached

    def _file_quads(self) -> GraphSet:
        quads: set[Quad] = set()
        for source in self.data_sources:
            if isinstance(source, FileSource):
                quads |= source.graphs
        return frozenset(quads)

    def match_subjects(self, pattern: TriplePattern) -> set[str]:
        """IRIs that satisfy the pattern's subject in the current data."""
        out: set[str] = set()
        locals_present = any(isinstance(s, FileSource) for s in self.data_sources)
        if locals_present:
            if self._local_index is None:
                self._local_index = TripleIndex(self._file_quads())
            assert isinstance(pattern.subject, Variable)
            for binding in match_pattern(pattern, {}, self._local_index):
                term = binding[pattern.subject]
                if term.is_iri:
                    out.add(term.value)
        for source in self.data_sources:
            if isinstance(source, DataEndpoint):
                out |= source.match_subjects(pattern)
        return out

    def evaluate_current(self, query: ParsedQuery) -> SolutionSet:
        """Run the query against the live state of every data source."""
        rows: list[Binding] = []
        locals_present = any(isinstance(s, FileSource) for s in self.data_sources)
        if locals_present:
            rows.extend(evaluate(query, self._file_quads()).rows)
        for source in self.data_sources:
            if isinstance(source, DataEndpoint):
                for row in source.select(format_query(query)):
                    rows.append(Binding.from_dict(row))
        if query.distinct:
            seen: set[Binding] = set()
            unique = []
            for row in rows:
                if row not in seen:
                    seen.add(row)
                    unique.append(row)
            rows = unique
        return SolutionSet(tuple(rows))

    # -- provenance ----------------------------------------------------

    def history(self, entity: str) -> EntityHistory | None:
        """The entity's snapshot chain, or None when nothing records it."""
        if entity in self._histories:
            return self._histories[entity]
        quads: set[Quad] = set()
        for source in self.provenance_sources:
            quads |= source.provenance_quads_for(entity)
        history: EntityHistory | None
        if not quads:
            history = None
        else:
            try:
                history = load_history(entity, frozenset(quads))
            except NoHistory:
                history = None
        self._histories[entity] = history
        return history

    def delta_records(self) -> tuple[DeltaRecord, ...]:
        if self._records is None:
            records: list[DeltaRecord] = []
            for source in self.provenance_sources:
                records.extend(source.delta_records())
            self._records = tuple(records)
        return self._records

    @property
    def text_index(self) -> TextIndex | None:
        if not self.text_index_enabled:
            return None
        if self._index is None:
            self._index = TextIndex(self.delta_records())
        return self._index


def load_sources(config: SourceConfig) -> Context:
    """Open every configured source and assemble the run context."""
    session = requests.Session()
    data_sources: list = []
    for location in config.data:
        if _is_endpoint(location):
            data_sources.append(DataEndpoint(location, config.http_timeout, session))
        else:
            data_sources.append(FileSource(location))
    provenance_sources: list = []
    for location in config.provenance:
        if _is_endpoint(location):
            provenance_sources.append(
                ProvenanceEndpoint(location, config.http_timeout, session)
            )
        else:
            provenance_sources.append(FileProvenanceSource(location))
    warnings = []
    cache = None
    if config.cache_dir:
        try:
            cache = VersionCache(config.cache_dir)
        except CacheIO as exc:
            warnings.append(f"cache disabled: {exc}")
    return Context(
        data_sources=data_sources,
        provenance_sources=provenance_sources,
        cache=cache,
        text_index_enabled=config.text_index,
        explosion_limit=config.explosion_limit,
        warnings=warnings,
    )


def memory_context(
    data: GraphSet,
    provenance: GraphSet,
    cache: VersionCache | None = None,
    text_index: bool = False,
    explosion_limit: int = DEFAULT_EXPLOSION_LIMIT,
) -> Context:
    """A context over in-memory quad sets; the library-level entry point."""
    data_source = FileSource("<memory>", graphs=frozenset(data))
    prov_source = FileProvenanceSource("<memory>", graphs=frozenset(provenance))
    return Context(
        data_sources=[data_source],
        provenance_sources=[prov_source],
        cache=cache,
        text_index_enabled=text_index,
        explosion_limit=explosion_limit,
    )
