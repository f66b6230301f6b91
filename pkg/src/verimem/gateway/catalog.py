"""Reference tool catalog: four servers, eleven tools.

Every tool takes a single required string parameter, matching the agent
grammar where an action carries one input string.
"""

from __future__ import annotations

from .registry import ToolSpec

WIKIPEDIA = "wikipedia"
GOOGLE_SEARCH = "google_search"
GOOGLE_SCHOLAR = "google_scholar"
PAPER_SEARCH = "paper_search"

DEFAULT_CATALOG: tuple[ToolSpec, ...] = (
    ToolSpec(WIKIPEDIA, "get_article", "Get the full content of a Wikipedia article.", {"title": True}),
    ToolSpec(WIKIPEDIA, "get_related_topics", "Get topics related to a Wikipedia article.", {"title": True}),
    ToolSpec(WIKIPEDIA, "get_sections", "Get the sections of a Wikipedia article.", {"title": True}),
    ToolSpec(WIKIPEDIA, "get_summary", "Get a summary of a Wikipedia article.", {"title": True}),
    ToolSpec(WIKIPEDIA, "summarize_article_section", "Get a summary of a specific section of a Wikipedia article.", {"input": True}),
    ToolSpec(WIKIPEDIA, "search_wikipedia", "Search Wikipedia for articles matching a query.", {"query": True}),
    ToolSpec(WIKIPEDIA, "extract_key_facts", "Extract key facts from a Wikipedia article.", {"title": True}),
    ToolSpec(GOOGLE_SEARCH, "search_google", "Retrieve Google search results for a given query.", {"query": True}),
    ToolSpec(GOOGLE_SCHOLAR, "search_google_scholar", "Retrieve Google Scholar search results for a given query.", {"query": True}),
    ToolSpec(PAPER_SEARCH, "search_arxiv", "Search academic papers from arXiv.", {"query": True}),
    ToolSpec(PAPER_SEARCH, "search_pubmed", "Search academic papers from PubMed.", {"query": True}),
)

SERVER_NAMES: tuple[str, ...] = (WIKIPEDIA, GOOGLE_SEARCH, GOOGLE_SCHOLAR, PAPER_SEARCH)


def catalog_for_server(server: str) -> tuple[ToolSpec, ...]:
    return tuple(spec for spec in DEFAULT_CATALOG if spec.server == server)
