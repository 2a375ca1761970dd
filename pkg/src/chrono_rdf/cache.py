"""On-disk cache of reconstructed entity versions.

Each cached entry is one (entity, snapshot time) pair serialised as
canonical N-Quads, keyed together with a fingerprint of the entity's
whole snapshot chain.  The fingerprint folds in every snapshot id and
update string, so any change to the history invalidates all of that
entity's entries at once without any bookkeeping.

The cache is strictly transparent: a hit must return byte-identical
graphs to a fresh reconstruction, which canonical serialisation makes
easy to test.  When the directory cannot be read or written the engine
falls back to plain materialisation and notes a warning on the affected
version instead of failing the query.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .errors import BeforeCreation, CacheIO
from .materializer import (
    Materialization,
    VersionedGraph,
    _apply,
    _as_history,
    current_graph,
    scope_delta,
)
from .provenance import EntityHistory, format_timestamp, invert
from .rdf_model import GraphSet, Quad, parse_nquads, serialize


def history_fingerprint(history: EntityHistory) -> str:
    """A digest of the snapshot chain; changes whenever the chain does."""
    h = hashlib.sha256()
    for snap in history.snapshots:
        h.update(snap.id.encode("utf-8"))
        h.update(b"\x00")
        h.update((snap.update.source_text if snap.update else "").encode("utf-8"))
        h.update(b"\x01")
    return h.hexdigest()


class VersionCache:
    """Append-only store of reconstructed versions under one directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.hits = 0
        self.misses = 0
        self.rebuilds = 0
        self._entries: dict[tuple[str, str, str], str] = {}
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            index = self.directory / "index.jsonl"
            if index.exists():
                for line in index.read_text(encoding="utf-8").splitlines():
                    if not line.strip():
                        continue
                    try:
                        entry = json.loads(line)
                        key = (entry["entity"], entry["time"], entry["fingerprint"])
                        self._entries[key] = entry["file"]
                    except (ValueError, KeyError):
                        continue  # a torn line loses one entry, nothing more
        except OSError as exc:
            raise CacheIO(f"cannot open cache directory {self.directory}: {exc}")

    def __len__(self) -> int:
        return len(self._entries)

    @staticmethod
    def _filename(entity: str, time: str, fingerprint: str) -> str:
        digest = hashlib.sha256(f"{entity}\x00{time}\x00{fingerprint}".encode()).hexdigest()
        return digest[:40] + ".nq"

    def lookup(self, entity: str, time: datetime, fingerprint: str) -> GraphSet | None:
        key = (entity, format_timestamp(time), fingerprint)
        filename = self._entries.get(key)
        if filename is None:
            self.misses += 1
            return None
        try:
            text = (self.directory / filename).read_text(encoding="utf-8")
            graphs = parse_nquads(text)
        except Exception as exc:
            raise CacheIO(f"cannot read cache entry {filename}: {exc}")
        self.hits += 1
        return graphs

    def store(self, entity: str, time: datetime, fingerprint: str, graphs: GraphSet) -> None:
        key = (entity, format_timestamp(time), fingerprint)
        if key in self._entries:
            return
        filename = self._filename(*key)
        path = self.directory / filename
        tmp = path.with_name(path.name + f".tmp{os.getpid()}")
        try:
            tmp.write_text(serialize(graphs), encoding="utf-8")
            os.replace(tmp, path)
            line = json.dumps(
                {"entity": key[0], "time": key[1], "fingerprint": key[2], "file": filename},
                sort_keys=True,
            )
            with open(self.directory / "index.jsonl", "a", encoding="utf-8") as f:
                fcntl.flock(f, fcntl.LOCK_EX)
                f.write(line + "\n")
        except OSError as exc:
            raise CacheIO(f"cannot write cache entry {filename}: {exc}")
        self._entries[key] = filename

    def clear(self) -> int:
        """Remove every entry; returns how many were dropped."""
        removed = len(self._entries)
        try:
            for name in list(self.directory.glob("*.nq")):
                name.unlink(missing_ok=True)
            (self.directory / "index.jsonl").unlink(missing_ok=True)
        except OSError as exc:
            raise CacheIO(f"cannot clear cache directory {self.directory}: {exc}")
        self._entries.clear()
        return removed


def cached_chain(
    entity: str,
    data: Iterable[Quad],
    history: EntityHistory,
    floor: int,
    cache: VersionCache | None,
) -> tuple[dict[int, GraphSet], tuple[str, ...]]:
    """Graphs for snapshot indices floor..n-1, reusing the cache per level.

    Walks newest to oldest exactly like the plain materializer, but each
    level is first looked up and every reconstructed level is stored, so
    a second identical walk performs zero rebuilds.  On cache trouble
    the walk degrades to plain reconstruction and reports a warning.
    """
    snaps = history.snapshots
    fingerprint = history_fingerprint(history) if cache is not None else ""
    out: dict[int, GraphSet] = {}
    warnings: list[str] = []
    g: GraphSet | None = None
    for k in range(len(snaps) - 1, floor - 1, -1):
        cached = None
        if cache is not None:
            try:
                cached = cache.lookup(entity, snaps[k].generated_at, fingerprint)
            except CacheIO as exc:
                warnings.append(str(exc))
                cache = None
        if cached is not None:
            g = cached
        else:
            if k == len(snaps) - 1:
                g = current_graph(entity, data)
            else:
                g = _apply(invert(scope_delta(snaps[k + 1].update, entity)), g)
            if cache is not None:
                cache.rebuilds += 1
                try:
                    cache.store(entity, snaps[k].generated_at, fingerprint, g)
                except CacheIO as exc:
                    warnings.append(str(exc))
                    cache = None
        out[k] = g
    return out, tuple(warnings)


def get_or_materialize(
    entity: str,
    when: datetime,
    data: Iterable[Quad],
    provenance,
    cache: VersionCache | None,
) -> Materialization:
    """Cache-aware variant of materialize_at with identical semantics."""
    history = _as_history(entity, provenance)
    k = history.index_at(when)
    if k is None:
        raise BeforeCreation(
            entity,
            format_timestamp(when),
            format_timestamp(history.creation.generated_at),
        )
    graphs, warnings = cached_chain(entity, data, history, k, cache)
    snaps = history.snapshots
    version = VersionedGraph(
        entity=entity,
        snapshot=snaps[k],
        graphs=graphs[k],
        reconstructed=(k != len(snaps) - 1),
        warnings=warnings,
    )
    others = tuple(s for j, s in enumerate(snaps) if j != k)
    return Materialization(version=version, other_snapshots=others)
