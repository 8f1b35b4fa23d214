"""Python interface to the skillhub search engine.

The heavy lifting happens in the compiled ``_skillhub`` extension; this module
decodes service responses into plain Python objects.
"""

import json

from ._skillhub import (
    Corpus,
    EmbeddingProvider,
    HashEmbeddingProvider,
    HttpEmbeddingProvider,
    ProviderError,
    QueryParseError,
    SearchSettings,
    Server,
    Service,
    SkillhubError,
    canonical_query,
    emit_finding_skills_doc,
    recall_at_k,
    rrf_fuse,
    sha256_hex,
    snippet,
    tokenize,
)

__all__ = [
    "Corpus",
    "Engine",
    "EmbeddingProvider",
    "HashEmbeddingProvider",
    "HttpEmbeddingProvider",
    "ProviderError",
    "QueryParseError",
    "SearchError",
    "SearchSettings",
    "Server",
    "Service",
    "SkillhubError",
    "canonical_query",
    "emit_finding_skills_doc",
    "recall_at_k",
    "rrf_fuse",
    "sha256_hex",
    "snippet",
    "tokenize",
]


class SearchError(SkillhubError):
    """Non-200 answer from a handler. ``status`` holds the HTTP code."""

    def __init__(self, status, message):
        super().__init__(message)
        self.status = status


class Engine:
    """Search over one corpus, returning decoded hits.

    >>> engine = Engine(corpus)                       # doctest: +SKIP
    >>> engine.hybrid("react testing", top_k=5)[0]["skill_id"]  # doctest: +SKIP
    """

    def __init__(self, corpus=None, provider=None, settings=None):
        self.provider = provider if provider is not None else HashEmbeddingProvider()
        self.service = Service(self.provider, settings)
        self.last_warning = None
        if corpus is not None:
            self.service.index(corpus)

    def _decode(self, response):
        status, body, headers = response
        self.last_warning = dict(headers).get("X-Skillhub-Warning")
        payload = json.loads(body)
        if status != 200:
            raise SearchError(status, payload.get("error", body))
        return payload

    def keyword(self, q, top_k=None):
        return self._decode(self.service.keyword(q, top_k))

    def semantic(self, q, top_k=None):
        return self._decode(self.service.semantic(q, top_k))

    def hybrid(self, q, top_k=None, keyword_weight=None, semantic_weight=None):
        return self._decode(self.service.hybrid(q, top_k, keyword_weight, semantic_weight))

    def detail(self, skill_id):
        return self._decode(self.service.detail(skill_id))
