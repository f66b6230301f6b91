import json

import pytest

from verimem.gateway import (
    DEFAULT_CATALOG,
    SERVER_NAMES,
    CallCounter,
    McpGateway,
    McpServerConnection,
    RegistryConflict,
    ReplayGateway,
    ToolNotFound,
    ToolSpec,
    gateway_from_config,
    mock_server_command,
    unknown_tool_observation,
)
from verimem.gateway.registry import build_registry

from conftest import write_jsonl


class TestCatalog:
    def test_eleven_tools(self):
        assert len(DEFAULT_CATALOG) == 11
        assert len({(s.server, s.name) for s in DEFAULT_CATALOG}) == 11

    def test_expected_names(self):
        names = {s.name for s in DEFAULT_CATALOG}
        assert names == {
            "get_article",
            "get_related_topics",
            "get_sections",
            "get_summary",
            "summarize_article_section",
            "search_wikipedia",
            "extract_key_facts",
            "search_google",
            "search_google_scholar",
            "search_arxiv",
            "search_pubmed",
        }

    def test_wikipedia_search_description(self):
        spec = next(s for s in DEFAULT_CATALOG if s.name == "search_wikipedia")
        assert spec.description == "Search Wikipedia for articles matching a query."
        assert spec.server == "wikipedia"


class TestRegistry:
    def test_duplicate_server_name_pair_conflicts(self):
        spec = ToolSpec("srv", "tool_a", "d", {"query": True})
        with pytest.raises(RegistryConflict):
            build_registry([spec, spec])

    def test_same_name_on_two_servers_is_allowed(self):
        specs = [
            ToolSpec("srv1", "tool_a", "d", {"query": True}),
            ToolSpec("srv2", "tool_a", "d", {"query": True}),
        ]
        registry = build_registry(specs)
        assert registry["tool_a"].server == "srv1"

    def test_empty_registry(self):
        assert ReplayGateway(specs=[]).list_tools() == []


class TestCallCounter:
    def test_totals(self):
        counter = CallCounter()
        for _ in range(3):
            counter.record_issued("search_google")
        assert counter.issued_total == 3

    def test_per_tool(self):
        counter = CallCounter()
        counter.record_issued("search_google")
        counter.record_issued("search_google")
        counter.record_issued("search_wikipedia")
        assert counter.issued == {"search_google": 2, "search_wikipedia": 1}

    def test_merge(self):
        a, b = CallCounter(), CallCounter()
        a.record_issued("x")
        b.record_issued("x")
        b.record_succeeded("x")
        a.merge(b)
        assert a.issued == {"x": 2}
        assert a.succeeded == {"x": 1}


class TestReplayGateway:
    def test_recorded_hit(self):
        gateway = ReplayGateway([{"tool": "search_google", "input": "q", "content": "payload"}])
        result = gateway.invoke("search_google", "q")
        assert result.content == "payload"
        assert not result.is_error

    def test_miss_is_error_observation(self):
        gateway = ReplayGateway([])
        result = gateway.invoke("search_google", "q")
        assert result.is_error
        assert "no recorded result" in result.content

    def test_unknown_tool_raises(self):
        gateway = ReplayGateway([])
        with pytest.raises(ToolNotFound):
            gateway.invoke("search_googel", "q")

    def test_truncation_boundary(self):
        gateway = ReplayGateway(
            [{"tool": "search_google", "input": "q", "content": "x" * 5000}]
        )
        assert len(gateway.invoke("search_google", "q").content) == 4000

    def test_from_jsonl(self, tmp_path):
        path = tmp_path / "fixtures.jsonl"
        write_jsonl(path, [{"tool": "search_google", "input": "a", "content": "b"}])
        gateway = ReplayGateway.from_jsonl(path)
        assert gateway.invoke("search_google", "a").content == "b"


def make_mock_gateway(config_path=None, servers=SERVER_NAMES, timeout=15.0):
    connections = [
        McpServerConnection(name, mock_server_command(name, config_path), timeout=timeout)
        for name in servers
    ]
    return McpGateway(connections)


class TestMcpGateway:
    def test_reference_config_lists_eleven_tools(self):
        with make_mock_gateway() as gateway:
            specs = gateway.list_tools()
            assert len(specs) == 11
            by_name = {spec.name: spec for spec in specs}
            assert (
                by_name["search_wikipedia"].description
                == "Search Wikipedia for articles matching a query."
            )
            assert by_name["search_google"].server == "google_search"

    def test_invoke_round_trips_payloads(self, tmp_path):
        config = tmp_path / "rules.json"
        config.write_text(
            json.dumps(
                {
                    "rules": [
                        {"tool": "search_google", "pattern": "budget", "content": "canned: {input}"}
                    ]
                }
            )
        )
        with make_mock_gateway(str(config), servers=("google_search",)) as gateway:
            result = gateway.invoke("search_google", "film budget 2011")
            assert result.content == "canned: film budget 2011"
            echoed = gateway.invoke("search_google", "anything else")
            assert echoed.content == "MOCK:anything else"

    def test_unknown_tool_raises_with_explicit_observation_text(self):
        with make_mock_gateway(servers=("google_search",)) as gateway:
            with pytest.raises(ToolNotFound):
                gateway.invoke("search_googel", "x")
            message = unknown_tool_observation("search_googel", gateway.tool_names())
            assert message.startswith("Error: unknown tool 'search_googel'")
            assert "search_google" in message

    def test_tool_level_error_rule(self, tmp_path):
        config = tmp_path / "rules.json"
        config.write_text(
            json.dumps(
                {"rules": [{"tool": "search_google", "pattern": "^boom$", "error": "tool exploded"}]}
            )
        )
        with make_mock_gateway(str(config), servers=("google_search",)) as gateway:
            result = gateway.invoke("search_google", "boom")
            assert result.is_error
            assert result.content == "tool exploded"

    def test_killed_server_mid_call_is_error_observation_not_crash(self, tmp_path):
        config = tmp_path / "rules.json"
        config.write_text(
            json.dumps({"rules": [{"tool": "search_google", "pattern": "^KILL$", "behavior": "exit"}]})
        )
        with make_mock_gateway(str(config), servers=("google_search",), timeout=5.0) as gateway:
            result = gateway.invoke("search_google", "KILL")
            assert result.is_error
            assert "tool call failed" in result.content

    def test_truncation_applies_to_protocol_payloads(self, tmp_path):
        config = tmp_path / "rules.json"
        config.write_text(
            json.dumps({"rules": [{"tool": "search_google", "pattern": "big", "content": "y" * 5000}]})
        )
        with make_mock_gateway(str(config), servers=("google_search",)) as gateway:
            assert len(gateway.invoke("search_google", "big").content) == 4000


class TestGatewayFromConfig:
    def test_replay(self, tmp_path):
        path = tmp_path / "fixtures.jsonl"
        write_jsonl(path, [{"tool": "search_google", "input": "a", "content": "b"}])
        gateway = gateway_from_config({"type": "replay", "fixtures": str(path)})
        assert gateway.invoke("search_google", "a").content == "b"

    def test_unknown_type(self):
        with pytest.raises(ValueError):
            gateway_from_config({"type": "telepathy"})

    def test_default_is_mock(self):
        gateway = gateway_from_config(None)
        try:
            assert len(gateway.list_tools()) == 11
        finally:
            gateway.close()
