"""Live time traversal queries over RDF datasets with change tracking.

The package reads datasets whose history is recorded as provenance
snapshots carrying SPARQL update strings, reconstructs any past version
of any entity on demand, and answers structured queries against single
versions, across all versions, and over the changes between them.
"""

from .cache import VersionCache, cached_chain, get_or_materialize, history_fingerprint
from .delta_query import (
    ChangeRecord,
    ChangeReport,
    DeltaQueryOutcome,
    execute_delta_query,
    get_delta,
    net_pair,
    touches,
)
from .errors import (
    BadDelta,
    BadRegex,
    BeforeCreation,
    BrokenChain,
    CacheIO,
    ChronoRdfError,
    ConfigError,
    ExplosionLimit,
    NetworkError,
    NoHistory,
    NoSuchSnapshot,
    ParseError,
    PrefixInDelta,
    SpecError,
    UnboundedQuery,
    UnknownPrefix,
    UnsupportedFeature,
    VariableInDelta,
)
from .materializer import (
    Materialization,
    TimeInterval,
    UNBOUNDED,
    VersionedGraph,
    current_graph,
    materialize_all,
    materialize_at,
    materialize_span,
    scope_delta,
)
from .provenance import (
    Delta,
    DeltaPair,
    EntityHistory,
    Snapshot,
    apply_delta,
    compose,
    format_timestamp,
    invert,
    load_history,
    make_delta,
    parse_timestamp,
    render_update,
)
from .rdf_model import (
    EMPTY_GRAPH,
    GraphSet,
    Quad,
    Term,
    Triple,
    blank,
    graph_diff,
    iri,
    literal,
    parse_document,
    parse_nquads,
    parse_turtle,
    quad,
    serialize,
)
from .sources import (
    Context,
    DeltaRecord,
    SourceConfig,
    TextIndex,
    load_sources,
    memory_context,
)
from .sparql_engine import (
    Binding,
    ParsedQuery,
    SolutionSet,
    TriplePattern,
    Variable,
    evaluate,
    format_query,
    parse_select,
    parse_update,
)
from .version_query import (
    QueryPlan,
    Timeline,
    VersionQueryOutcome,
    align_and_merge,
    classify,
    execute_version_query,
    search_deltas,
)

__version__ = "0.1.0"

__all__ = [
    "BadDelta",
    "BadRegex",
    "BeforeCreation",
    "Binding",
    "BrokenChain",
    "CacheIO",
    "ChangeRecord",
    "ChangeReport",
    "ChronoRdfError",
    "ConfigError",
    "Context",
    "Delta",
    "DeltaPair",
    "DeltaQueryOutcome",
    "DeltaRecord",
    "EMPTY_GRAPH",
    "EntityHistory",
    "ExplosionLimit",
    "GraphSet",
    "Materialization",
    "NetworkError",
    "NoHistory",
    "NoSuchSnapshot",
    "ParseError",
    "ParsedQuery",
    "PrefixInDelta",
    "Quad",
    "QueryPlan",
    "SolutionSet",
    "Snapshot",
    "SourceConfig",
    "SpecError",
    "Term",
    "TextIndex",
    "TimeInterval",
    "Timeline",
    "Triple",
    "TriplePattern",
    "UNBOUNDED",
    "UnboundedQuery",
    "UnknownPrefix",
    "UnsupportedFeature",
    "Variable",
    "VariableInDelta",
    "VersionCache",
    "VersionQueryOutcome",
    "VersionedGraph",
    "align_and_merge",
    "apply_delta",
    "blank",
    "cached_chain",
    "classify",
    "compose",
    "current_graph",
    "evaluate",
    "execute_delta_query",
    "execute_version_query",
    "format_query",
    "format_timestamp",
    "get_delta",
    "get_or_materialize",
    "graph_diff",
    "history_fingerprint",
    "invert",
    "iri",
    "literal",
    "load_history",
    "load_sources",
    "make_delta",
    "materialize_all",
    "materialize_at",
    "materialize_span",
    "memory_context",
    "net_pair",
    "parse_document",
    "parse_nquads",
    "parse_select",
    "parse_timestamp",
    "parse_turtle",
    "parse_update",
    "quad",
    "scope_delta",
    "search_deltas",
    "serialize",
    "touches",
]
