"""Version reconstruction by applying inverted deltas backwards.

The live dataset holds only the present state.  To recover the state an
entity had at snapshot k, the update strings of snapshots k+1..n-1 are
inverted and applied newest first, starting from the entity's current
graph.  Recovering every version this way walks the chain once, so a
full reconstruction costs exactly n-1 delta applications instead of
rebuilding each version from the present.

Updates may mention several entities, so before application each delta
is narrowed to the quads whose subject is the entity under
reconstruction.  Quads with blank subjects stay in scope because split
descriptions hang off the entity they describe.

delta_applications is a module level counter bumped on every delta
application; tests use it to pin down the chaining behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Iterable

from .errors import BeforeCreation, NoHistory
from .provenance import (
    Delta,
    EntityHistory,
    Snapshot,
    apply_delta,
    format_timestamp,
    invert,
    load_history,
)
from .rdf_model import GraphSet, Quad


@dataclass(frozen=True)
class TimeInterval:
    """A closed interval over timestamps; None on either side means open."""

    start: datetime | None = None
    end: datetime | None = None

    def __post_init__(self) -> None:
        if self.start is not None and self.end is not None and self.start > self.end:
            raise ValueError("interval start lies after its end")

    def __contains__(self, when: datetime) -> bool:
        if self.start is not None and when < self.start:
            return False
        if self.end is not None and when > self.end:
            return False
        return True

    @property
    def is_unbounded(self) -> bool:
        return self.start is None and self.end is None


UNBOUNDED = TimeInterval(None, None)


@dataclass(frozen=True)
class VersionedGraph:
    """One state of one entity.

    snapshot is None only for an entity with no recorded history, whose
    current graphs count as its single, always-alive state.  warnings
    carries non-fatal notes, such as a cache that could not be used.
    """

    entity: str
    snapshot: Snapshot | None
    graphs: GraphSet
    reconstructed: bool
    warnings: tuple[str, ...] = ()

    @property
    def time(self) -> datetime | None:
        return self.snapshot.generated_at if self.snapshot is not None else None


@dataclass(frozen=True)
class Materialization:
    version: VersionedGraph
    other_snapshots: tuple[Snapshot, ...]


class _ApplyCounter:
    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def bump(self) -> None:
        self.count += 1

    def reset(self) -> None:
        self.count = 0


delta_applications = _ApplyCounter()


def current_graph(entity: str, data: Iterable[Quad]) -> GraphSet:
    """The quads whose subject is the entity, straight from the dataset."""
    return frozenset(q for q in data if q.subject.is_iri and q.subject.value == entity)


def scope_delta(delta: Delta, entity: str) -> Delta:
    """Narrow a delta to the quads concerning one entity."""

    def mine(q: Quad) -> bool:
        return q.subject.is_blank or (q.subject.is_iri and q.subject.value == entity)

    return Delta(
        tuple(q for q in delta.deletes if mine(q)),
        tuple(q for q in delta.inserts if mine(q)),
        delta.source_text,
    )


def _apply(delta: Delta, graphs: GraphSet) -> GraphSet:
    delta_applications.bump()
    return apply_delta(delta, graphs)


def _as_history(entity: str, provenance) -> EntityHistory:
    if isinstance(provenance, EntityHistory):
        if provenance.entity != entity:
            raise NoHistory(entity)
        return provenance
    return load_history(entity, provenance)


def _chain(
    entity: str, data: Iterable[Quad], history: EntityHistory, floor: int
) -> dict[int, GraphSet]:
    """Graphs for snapshot indices floor..n-1, walking the chain once."""
    snaps = history.snapshots
    out: dict[int, GraphSet] = {}
    g = current_graph(entity, data)
    for k in range(len(snaps) - 1, floor - 1, -1):
        if k != len(snaps) - 1:
            g = _apply(invert(scope_delta(snaps[k + 1].update, entity)), g)
        out[k] = g
    return out


def materialize_at(
    entity: str, when: datetime, data: Iterable[Quad], provenance
) -> Materialization:
    """The state the entity had at `when`, plus the snapshots not chosen.

    `provenance` is either a quad set holding the entity's snapshots or
    an already loaded EntityHistory.  Raises BeforeCreation when `when`
    predates the first snapshot and NoHistory when nothing describes the
    entity.
    """
    history = _as_history(entity, provenance)
    k = history.index_at(when)
    if k is None:
        raise BeforeCreation(
            entity,
            format_timestamp(when),
            format_timestamp(history.creation.generated_at),
        )
    graphs = _chain(entity, data, history, k)[k]
    snaps = history.snapshots
    version = VersionedGraph(
        entity=entity,
        snapshot=snaps[k],
        graphs=graphs,
        reconstructed=(k != len(snaps) - 1),
    )
    others = tuple(s for j, s in enumerate(snaps) if j != k)
    return Materialization(version=version, other_snapshots=others)


def _floor_index(history: EntityHistory, interval: TimeInterval, include_boundary: bool) -> int:
    n = len(history.snapshots)
    if interval.start is None:
        return 0
    first_in = next(
        (k for k, s in enumerate(history.snapshots) if s.generated_at >= interval.start),
        None,
    )
    if include_boundary:
        boundary = history.index_at(interval.start)
        if boundary is not None:
            return boundary if first_in is None else min(boundary, first_in)
    return first_in if first_in is not None else n


def _collect(
    entity: str,
    data: Iterable[Quad],
    history: EntityHistory,
    interval: TimeInterval,
    include_boundary: bool,
) -> list[VersionedGraph]:
    floor = _floor_index(history, interval, include_boundary)
    snaps = history.snapshots
    if floor >= len(snaps):
        return []
    graphs = _chain(entity, data, history, floor)
    versions = []
    for k in sorted(graphs):
        snap = snaps[k]
        is_boundary = (
            include_boundary
            and k == floor
            and interval.start is not None
            and snap.generated_at <= interval.start
        )
        if snap.generated_at in interval or is_boundary:
            versions.append(
                VersionedGraph(
                    entity=entity,
                    snapshot=snap,
                    graphs=graphs[k],
                    reconstructed=(k != len(snaps) - 1),
                )
            )
    return versions


def materialize_all(
    entity: str,
    data: Iterable[Quad],
    provenance,
    interval: TimeInterval = UNBOUNDED,
) -> list[VersionedGraph]:
    """Every version of the entity whose snapshot time falls in the interval.

    Versions come back oldest first.  An interval that contains no
    snapshot of the entity yields an empty list.
    """
    history = _as_history(entity, provenance)
    return _collect(entity, data, history, interval, include_boundary=False)


def materialize_span(
    entity: str,
    data: Iterable[Quad],
    provenance,
    interval: TimeInterval = UNBOUNDED,
) -> list[VersionedGraph]:
    """Like materialize_all, but also includes the version that was live
    when the interval opens, so callers can carry unchanged state forward."""
    history = _as_history(entity, provenance)
    return _collect(entity, data, history, interval, include_boundary=True)
