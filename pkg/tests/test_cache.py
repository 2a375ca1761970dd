"""Version cache: transparency, invalidation, persistence, degradation."""

from __future__ import annotations

import dataclasses
import json

import pytest

from conftest import ID, RIGHT_DOI, WRONG_DOI

from chrono_rdf import (
    CacheIO,
    VersionCache,
    cached_chain,
    execute_version_query,
    get_or_materialize,
    history_fingerprint,
    materialize_at,
    memory_context,
    parse_timestamp,
    serialize,
)
from chrono_rdf.benchgen import known_subject_query


@pytest.fixture()
def ctx(doi_data, doi_provenance):
    return memory_context(doi_data, doi_provenance)


@pytest.fixture()
def id_history(ctx):
    return ctx.history(ID)


class TestFingerprint:
    def test_stable(self, id_history):
        assert history_fingerprint(id_history) == history_fingerprint(id_history)

    def test_renamed_snapshot_changes_it(self, id_history):
        snaps = list(id_history.snapshots)
        snaps[0] = dataclasses.replace(snaps[0], id=snaps[0].id + "-moved")
        other = dataclasses.replace(id_history, snapshots=tuple(snaps))
        assert history_fingerprint(other) != history_fingerprint(id_history)

    def test_rewritten_update_changes_it(self, id_history):
        snaps = list(id_history.snapshots)
        update = dataclasses.replace(
            snaps[1].update, source_text=snaps[1].update.source_text + " "
        )
        snaps[1] = dataclasses.replace(snaps[1], update=update)
        other = dataclasses.replace(id_history, snapshots=tuple(snaps))
        assert history_fingerprint(other) != history_fingerprint(id_history)


class TestVersionCache:
    def test_store_then_lookup(self, tmp_path, ctx, id_history):
        cache = VersionCache(tmp_path / "cache")
        when = id_history.snapshots[1].generated_at
        graphs = ctx.entity_quads(ID)
        fp = history_fingerprint(id_history)
        assert cache.lookup(ID, when, fp) is None
        cache.store(ID, when, fp, graphs)
        assert cache.lookup(ID, when, fp) == graphs
        assert cache.hits == 1 and cache.misses == 1

    def test_other_fingerprint_misses(self, tmp_path, ctx, id_history):
        cache = VersionCache(tmp_path / "cache")
        when = id_history.snapshots[1].generated_at
        cache.store(ID, when, "fp-a", ctx.entity_quads(ID))
        assert cache.lookup(ID, when, "fp-b") is None

    def test_entries_survive_reopening(self, tmp_path, ctx, id_history):
        where = tmp_path / "cache"
        when = id_history.snapshots[1].generated_at
        graphs = ctx.entity_quads(ID)
        VersionCache(where).store(ID, when, "fp", graphs)
        reopened = VersionCache(where)
        assert len(reopened) == 1
        assert reopened.lookup(ID, when, "fp") == graphs

    def test_torn_index_lines_lose_only_themselves(self, tmp_path, ctx, id_history):
        where = tmp_path / "cache"
        when = id_history.snapshots[1].generated_at
        graphs = ctx.entity_quads(ID)
        VersionCache(where).store(ID, when, "fp", graphs)
        with open(where / "index.jsonl", "a", encoding="utf-8") as f:
            f.write('{"entity": "https://x.example/e", "time"\n')  # torn mid-write
            f.write("not json at all\n")
            f.write(json.dumps({"entity": "e2", "time": "t", "file": "gone.nq"}) + "\n")
        reopened = VersionCache(where)  # missing "fingerprint" drops the third line
        assert len(reopened) == 1
        assert reopened.lookup(ID, when, "fp") == graphs

    def test_clear_empties_directory(self, tmp_path, ctx, id_history):
        where = tmp_path / "cache"
        cache = VersionCache(where)
        when = id_history.snapshots[1].generated_at
        cache.store(ID, when, "fp", ctx.entity_quads(ID))
        assert cache.clear() == 1
        assert len(cache) == 0
        assert list(where.glob("*.nq")) == []
        assert not (where / "index.jsonl").exists()
        assert cache.lookup(ID, when, "fp") is None


class TestCachedChain:
    def test_second_walk_rebuilds_nothing(self, tmp_path, ctx, id_history):
        data = ctx.entity_quads(ID)
        plain, _ = cached_chain(ID, data, id_history, 0, None)
        cache = VersionCache(tmp_path / "cache")
        first, w1 = cached_chain(ID, data, id_history, 0, cache)
        assert cache.rebuilds == 2 and not w1
        again = VersionCache(tmp_path / "cache")
        second, w2 = cached_chain(ID, data, id_history, 0, again)
        assert again.rebuilds == 0 and not w2
        for k in plain:
            assert serialize(first[k]) == serialize(plain[k])
            assert serialize(second[k]) == serialize(plain[k])

    def test_edited_history_invalidates(self, tmp_path, ctx, id_history):
        data = ctx.entity_quads(ID)
        cache = VersionCache(tmp_path / "cache")
        cached_chain(ID, data, id_history, 0, cache)
        snaps = list(id_history.snapshots)
        snaps[0] = dataclasses.replace(snaps[0], id=snaps[0].id + "-v2")
        edited = dataclasses.replace(id_history, snapshots=tuple(snaps))
        cache.rebuilds = 0
        cached_chain(ID, data, edited, 0, cache)
        assert cache.rebuilds == 2

    def test_unwritable_cache_degrades_with_a_warning(
        self, tmp_path, ctx, id_history, monkeypatch
    ):
        data = ctx.entity_quads(ID)
        plain, _ = cached_chain(ID, data, id_history, 0, None)
        cache = VersionCache(tmp_path / "cache")

        def refuse(*args, **kwargs):
            raise CacheIO("disk full")

        monkeypatch.setattr(cache, "store", refuse)
        graphs, warnings = cached_chain(ID, data, id_history, 0, cache)
        assert any("disk full" in w for w in warnings)
        for k in plain:
            assert graphs[k] == plain[k]

    def test_unreadable_cache_degrades_with_a_warning(
        self, tmp_path, ctx, id_history, monkeypatch
    ):
        data = ctx.entity_quads(ID)
        plain, _ = cached_chain(ID, data, id_history, 0, None)
        cache = VersionCache(tmp_path / "cache")

        def refuse(*args, **kwargs):
            raise CacheIO("bad sector")

        monkeypatch.setattr(cache, "lookup", refuse)
        graphs, warnings = cached_chain(ID, data, id_history, 0, cache)
        assert any("bad sector" in w for w in warnings)
        for k in plain:
            assert graphs[k] == plain[k]


class TestGetOrMaterialize:
    def test_matches_plain_materialization(self, tmp_path, doi_data, doi_provenance):
        when = parse_timestamp("2021-10-15T00:00:00")
        plain = materialize_at(ID, when, doi_data, doi_provenance)
        cache = VersionCache(tmp_path / "cache")
        cached = get_or_materialize(ID, when, doi_data, doi_provenance, cache)
        assert cached.version.snapshot == plain.version.snapshot
        assert serialize(cached.version.graphs) == serialize(plain.version.graphs)
        assert cached.other_snapshots == plain.other_snapshots
        hot = get_or_materialize(ID, when, doi_data, doi_provenance, cache)
        assert serialize(hot.version.graphs) == serialize(plain.version.graphs)
        assert cache.hits >= 1

    def test_value_history_reads_identically_through_the_cache(
        self, tmp_path, doi_data, doi_provenance
    ):
        when = parse_timestamp("2021-10-15T00:00:00")
        cache = VersionCache(tmp_path / "cache")
        v = get_or_materialize(ID, when, doi_data, doi_provenance, cache).version
        values = [
            q.object.value
            for q in v.graphs
            if q.predicate.value.endswith("hasLiteralValue")
        ]
        assert values == [WRONG_DOI]
        assert RIGHT_DOI not in values


class TestWholeQueriesThroughTheCache:
    def test_cross_version_results_do_not_change(self, tmp_path, small_world):
        subject = next(
            e
            for e in sorted(small_world.ledger.entities)
            if "/br/" in e and len(small_world.ledger.entities[e].times) >= 3
        )
        query = known_subject_query(subject)
        cold = execute_version_query(query, small_world.context())

        cache = VersionCache(tmp_path / "cache")
        warm = execute_version_query(query, small_world.context(cache=cache))
        assert warm.results == cold.results
        assert cache.rebuilds > 0

        again = VersionCache(tmp_path / "cache")
        hot = execute_version_query(query, small_world.context(cache=again))
        assert hot.results == cold.results
        assert again.rebuilds == 0
