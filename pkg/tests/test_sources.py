"""Configuration, file sources, contexts, and the SPARQL protocol client."""

from __future__ import annotations

import json

import pytest

from conftest import (
    BR,
    CITES,
    DOI_DATA_TURTLE,
    DOI_UPDATE,
    HAS_VALUE,
    ID,
    TITLE,
    USES_SCHEME,
)
from sparql_server import SparqlServer

from chrono_rdf import (
    ConfigError,
    Context,
    DeltaRecord,
    NetworkError,
    SourceConfig,
    TextIndex,
    VersionCache,
    execute_version_query,
    load_sources,
    memory_context,
    parse_select,
)
from chrono_rdf.sources import FileProvenanceSource, FileSource


class TestSourceConfig:
    GOOD = {"data": ["data.nq"], "provenance": ["prov.nq"]}

    def test_defaults(self):
        config = SourceConfig.from_mapping(self.GOOD)
        assert config.data == ("data.nq",)
        assert config.provenance == ("prov.nq",)
        assert config.cache_dir is None
        assert config.text_index is False
        assert config.explosion_limit == 10_000
        assert config.http_timeout == 30.0

    def test_mapping_round_trip(self):
        config = SourceConfig.from_mapping(
            dict(self.GOOD, cache_dir="/tmp/c", text_index=True,
                 explosion_limit=5, http_timeout=1.5)
        )
        assert SourceConfig.from_mapping(config.to_mapping()) == config

    @pytest.mark.parametrize(
        "raw",
        [
            {"data": ["d.nq"], "provenance": ["p.nq"], "accelerator": True},
            {"provenance": ["p.nq"]},
            {"data": [], "provenance": ["p.nq"]},
            {"data": "d.nq", "provenance": ["p.nq"]},
            {"data": ["d.nq", ""], "provenance": ["p.nq"]},
            {"data": ["d.nq"], "provenance": ["p.nq"], "cache_dir": 3},
            {"data": ["d.nq"], "provenance": ["p.nq"], "text_index": "yes"},
            {"data": ["d.nq"], "provenance": ["p.nq"], "explosion_limit": 0},
            {"data": ["d.nq"], "provenance": ["p.nq"], "explosion_limit": True},
            {"data": ["d.nq"], "provenance": ["p.nq"], "http_timeout": 0},
        ],
        ids=[
            "unknown-key", "missing-data", "empty-data", "data-not-a-list",
            "empty-entry", "cache-dir-type", "text-index-type",
            "limit-zero", "limit-bool", "timeout-zero",
        ],
    )
    def test_bad_mappings(self, raw):
        with pytest.raises(ConfigError):
            SourceConfig.from_mapping(raw)

    def test_from_file(self, tmp_path):
        path = tmp_path / "sources.json"
        path.write_text(json.dumps(self.GOOD), encoding="utf-8")
        assert SourceConfig.from_file(path).data == ("data.nq",)

    def test_from_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            SourceConfig.from_file(tmp_path / "absent.json")

    def test_from_broken_json(self, tmp_path):
        path = tmp_path / "sources.json"
        path.write_text("{half a", encoding="utf-8")
        with pytest.raises(ConfigError, match="not valid JSON"):
            SourceConfig.from_file(path)

    def test_from_non_object_json(self, tmp_path):
        path = tmp_path / "sources.json"
        path.write_text('["data.nq"]', encoding="utf-8")
        with pytest.raises(ConfigError, match="JSON object"):
            SourceConfig.from_file(path)


class TestFileSource:
    def test_nquads_by_extension(self, doi_files, doi_data):
        data_path, _ = doi_files
        source = FileSource(str(data_path))
        assert source.graphs == doi_data

    def test_turtle_by_extension(self, tmp_path, doi_data):
        path = tmp_path / "data.ttl"
        path.write_text(DOI_DATA_TURTLE, encoding="utf-8")
        source = FileSource(str(path))
        # the Turtle twin names no graphs, so compare triples only
        assert {q.triple for q in source.graphs} == {q.triple for q in doi_data}

    def test_entity_quads_filters_by_subject(self, doi_files):
        data_path, _ = doi_files
        source = FileSource(str(data_path))
        assert {q.subject.value for q in source.entity_quads(BR)} == {BR}
        assert source.entity_quads("https://nowhere.example/e") == frozenset()

    def test_unknown_extension(self, tmp_path):
        path = tmp_path / "data.xml"
        path.write_text("<rdf/>", encoding="utf-8")
        with pytest.raises(ConfigError, match="format"):
            FileSource(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            FileSource(str(tmp_path / "absent.nq"))

    def test_unparseable_file(self, tmp_path):
        path = tmp_path / "data.nq"
        path.write_text("<https://a.example/s> <https://a.example/p> .\n")
        with pytest.raises(ConfigError, match="does not parse"):
            FileSource(str(path))


class TestFileProvenanceSource:
    def test_quads_are_scoped_to_the_entity(self, doi_files, doi_provenance):
        _, prov_path = doi_files
        source = FileProvenanceSource(str(prov_path))
        mine = source.provenance_quads_for(ID)
        assert mine < doi_provenance
        assert all(q.subject.value.startswith(ID + "/prov/") for q in mine)
        assert source.provenance_quads_for("https://nowhere.example/e") == frozenset()

    def test_delta_records(self, doi_files):
        _, prov_path = doi_files
        source = FileProvenanceSource(str(prov_path))
        assert source.delta_records() == [
            DeltaRecord(entity=ID, snapshot=ID + "/prov/se/2", text=DOI_UPDATE)
        ]


class TestContext:
    def test_entity_quads_memoises(self, doi_data, doi_provenance):
        ctx = memory_context(doi_data, doi_provenance)
        first = ctx.entity_quads(ID)
        assert first is ctx.entity_quads(ID)
        assert {q.subject.value for q in first} == {ID}

    def test_history_is_none_without_provenance(self, doi_data, doi_provenance):
        ctx = memory_context(doi_data, doi_provenance)
        assert ctx.history("https://nowhere.example/e") is None
        assert ctx.history(ID) is not None

    def test_match_subjects(self, doi_data, doi_provenance):
        ctx = memory_context(doi_data, doi_provenance)
        parsed = parse_select(
            f"SELECT ?s WHERE {{ ?s <{USES_SCHEME}>"
            " <http://purl.org/spar/datacite/doi> }"
        )
        assert ctx.match_subjects(parsed.patterns[0]) == {ID}

    def test_evaluate_current(self, doi_data, doi_provenance):
        ctx = memory_context(doi_data, doi_provenance)
        parsed = parse_select(f"SELECT DISTINCT ?c WHERE {{ <{BR}> <{CITES}> ?c }}")
        assert len(ctx.evaluate_current(parsed)) == 5

    def test_text_index_is_off_by_default(self, doi_data, doi_provenance):
        assert memory_context(doi_data, doi_provenance).text_index is None
        indexed = memory_context(doi_data, doi_provenance, text_index=True)
        assert isinstance(indexed.text_index, TextIndex)

    def test_text_index_prime_and_lookup(self, doi_data, doi_provenance):
        ctx = memory_context(doi_data, doi_provenance, text_index=True)
        index = ctx.text_index
        form = f"<{ID}>"
        index.prime([form])
        assert index.lookup(form) == {(ID, ID + "/prov/se/2")}
        assert index.lookup("never written") == frozenset()


class TestLoadSources:
    def test_files_and_cache(self, doi_files, tmp_path):
        data_path, prov_path = doi_files
        config = SourceConfig.from_mapping({
            "data": [str(data_path)],
            "provenance": [str(prov_path)],
            "cache_dir": str(tmp_path / "cache"),
        })
        ctx = load_sources(config)
        assert isinstance(ctx, Context)
        assert isinstance(ctx.cache, VersionCache)
        assert ctx.history(ID) is not None

    def test_unusable_cache_dir_degrades(self, doi_files, tmp_path):
        data_path, prov_path = doi_files
        blocker = tmp_path / "not-a-directory"
        blocker.write_text("file in the way", encoding="utf-8")
        config = SourceConfig.from_mapping({
            "data": [str(data_path)],
            "provenance": [str(prov_path)],
            "cache_dir": str(blocker),
        })
        ctx = load_sources(config)
        assert ctx.cache is None
        assert any("cache disabled" in w for w in ctx.warnings)


@pytest.fixture()
def server(doi_data, doi_provenance):
    with SparqlServer(doi_data, doi_provenance) as srv:
        yield srv


@pytest.fixture()
def endpoint_ctx(server):
    config = SourceConfig.from_mapping({
        "data": [server.url],
        "provenance": [server.url],
        "http_timeout": 5.0,
    })
    return load_sources(config)


class TestEndpointContext:
    def test_entity_quads_match_the_files(self, endpoint_ctx, doi_data, doi_provenance):
        local = memory_context(doi_data, doi_provenance)
        assert endpoint_ctx.entity_quads(ID) == local.entity_quads(ID)
        assert endpoint_ctx.entity_quads(BR) == local.entity_quads(BR)

    def test_history_matches_the_files(self, endpoint_ctx, doi_data, doi_provenance):
        local = memory_context(doi_data, doi_provenance)
        assert endpoint_ctx.history(ID) == local.history(ID)

    def test_delta_records_match_the_files(
        self, endpoint_ctx, doi_data, doi_provenance
    ):
        local = memory_context(doi_data, doi_provenance)
        assert set(endpoint_ctx.delta_records()) == set(local.delta_records())

    def test_version_query_answers_identically(
        self, endpoint_ctx, doi_data, doi_provenance
    ):
        local = memory_context(doi_data, doi_provenance)
        query = f"SELECT ?v WHERE {{ <{ID}> <{HAS_VALUE}> ?v }}"
        remote_outcome = execute_version_query(query, endpoint_ctx)
        local_outcome = execute_version_query(query, local)
        assert remote_outcome.results == local_outcome.results

    def test_isolated_query_discovers_remotely(
        self, endpoint_ctx, doi_data, doi_provenance
    ):
        local = memory_context(doi_data, doi_provenance)
        query = (
            f"SELECT ?s WHERE {{ ?s <{USES_SCHEME}>"
            " <http://purl.org/spar/datacite/doi> }"
        )
        remote_outcome = execute_version_query(query, endpoint_ctx)
        local_outcome = execute_version_query(query, local)
        assert remote_outcome.results == local_outcome.results
        assert ID in remote_outcome.relevant_entities

    def test_evaluate_current_round_trips_the_query_text(self, endpoint_ctx):
        parsed = parse_select(f"SELECT ?t WHERE {{ <{BR}> <{TITLE}> ?t }}")
        rows = endpoint_ctx.evaluate_current(parsed)
        assert [b.get("t").value for b in rows] == [
            "Referring Expressions And Their Use"
        ]


class TestEndpointFailures:
    def test_http_error_carries_the_status(self, server, endpoint_ctx):
        server.fail_next = 1
        with pytest.raises(NetworkError) as info:
            endpoint_ctx.entity_quads(ID)
        assert info.value.status == 500
        assert "500" in str(info.value)

    def test_malformed_results_document(self, server, endpoint_ctx):
        server.garbage_next = 1
        with pytest.raises(NetworkError, match="malformed"):
            endpoint_ctx.entity_quads(ID)

    def test_one_timeout_is_retried(self, server, doi_data, doi_provenance):
        config = SourceConfig.from_mapping({
            "data": [server.url],
            "provenance": [server.url],
            "http_timeout": 0.4,
        })
        ctx = load_sources(config)
        server.slow_seconds = 1.2
        server.slow_next = 1
        local = memory_context(doi_data, doi_provenance)
        assert ctx.entity_quads(ID) == local.entity_quads(ID)
        assert server.requests_seen == 2

    def test_two_timeouts_fail(self, server):
        config = SourceConfig.from_mapping({
            "data": [server.url],
            "provenance": [server.url],
            "http_timeout": 0.4,
        })
        ctx = load_sources(config)
        server.slow_seconds = 1.2
        server.slow_next = 2
        with pytest.raises(NetworkError, match="twice"):
            ctx.entity_quads(ID)

    def test_unreachable_endpoint(self):
        config = SourceConfig.from_mapping({
            "data": ["http://127.0.0.1:9/sparql"],  # discard port, nothing listens
            "provenance": ["http://127.0.0.1:9/sparql"],
            "http_timeout": 0.4,
        })
        ctx = load_sources(config)
        with pytest.raises(NetworkError):
            ctx.entity_quads(ID)
