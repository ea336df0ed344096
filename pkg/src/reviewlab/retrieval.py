"""Relevant-paper retrieval: candidate search, embeddings, top-k selection.

A submission is matched against prior work by embedding title+abstract on
both sides and keeping the k (default 2) candidates with the highest
cosine similarity, restricted to papers published no later than the
submission date.  The search client speaks a Semantic-Scholar-style HTTP
API; a deterministic hash embedder ships for offline use and tests.
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass
from datetime import date

import numpy as np
import requests

from .corpus import PaperRecord, RelevantPaperRef
from .errors import DecodeError, ThrottleError, TransportError
from .metrics import tokenize

SEARCH_URL_ENV = "REVIEWLAB_SEARCH_URL"
SEARCH_API_KEY_ENV = "REVIEWLAB_SEARCH_API_KEY"
DEFAULT_SEARCH_URL = "https://api.semanticscholar.org/graph/v1/paper/search"


@dataclass(frozen=True)
class CandidatePaper:
    """A search hit considered as potential novelty context."""

    title: str
    abstract: str
    published_date: date
    source_id: str


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 2
    cutoff: date | None = None
    query_limit: int = 20

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.query_limit < 1:
            raise ValueError("query_limit must be >= 1")


# eq=False: numpy fields make the generated __eq__ ambiguous.
@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray
    dimension: int

    def __post_init__(self) -> None:
        if self.values.shape != (self.dimension,):
            raise ValueError(
                f"vector has {self.values.shape} values, expected ({self.dimension},)"
            )


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a, b) / (|a| * |b|); symmetric, in [-1, 1]."""
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    norm_a = float(np.linalg.norm(a.values))
    norm_b = float(np.linalg.norm(b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.dot(a.values, b.values) / (norm_a * norm_b))


class HashEmbedder:
    """Deterministic fallback embedder: token hashing into a fixed bag.

    Each token is hashed into one of ``dimension`` buckets; the bucket
    counts form the vector, L2-normalized.  Identical text always embeds
    identically, with no network involved.
    """

    def __init__(self, dimension: int = 256) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    def _bucket(self, token: str) -> int:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") % self.dimension

    def embed(self, text: str) -> EmbeddingVector:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        values = np.zeros(self.dimension, dtype=np.float64)
        for token in tokenize(text).tokens:
            values[self._bucket(token)] += 1.0
        norm = np.linalg.norm(values)
        if norm > 0:
            values /= norm
        return EmbeddingVector(values=values, dimension=self.dimension)


class SearchClient:
    """HTTP search client with local date filtering and bounded backoff.

    Requests carry ``query``, ``limit``, and ``publishedBefore``
    parameters; responses are expected to be JSON of the form
    ``{"data": [{"paperId", "title", "abstract", "publicationDate"}]}``.
    Base URL and API key default to the REVIEWLAB_SEARCH_URL /
    REVIEWLAB_SEARCH_API_KEY environment variables.
    """

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        session: requests.Session | None = None,
        min_interval: float = 1.0,
        max_attempts: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 30.0,
    ) -> None:
        self.base_url = base_url or os.environ.get(SEARCH_URL_ENV, DEFAULT_SEARCH_URL)
        self.api_key = api_key or os.environ.get(SEARCH_API_KEY_ENV)
        self.session = session or requests.Session()
        self.min_interval = min_interval
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._last_request = 0.0

    def _throttle(self) -> None:
        elapsed = time.monotonic() - self._last_request
        if elapsed < self.min_interval:
            time.sleep(self.min_interval - elapsed)
        self._last_request = time.monotonic()

    def _get(self, params: dict) -> dict:
        headers = {"x-api-key": self.api_key} if self.api_key else {}
        last_error: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            self._throttle()
            try:
                response = self.session.get(
                    self.base_url, params=params, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                if attempt < self.max_attempts:
                    time.sleep(self.backoff_base * 2 ** (attempt - 1))
                continue
            if response.status_code == 429:
                last_error = ThrottleError(f"throttled by {self.base_url}")
                if attempt < self.max_attempts:
                    time.sleep(self.backoff_base * 2 ** (attempt - 1))
                continue
            if response.status_code >= 400:
                raise TransportError(
                    f"search service returned HTTP {response.status_code}"
                )
            try:
                payload = response.json()
            except ValueError as exc:
                raise DecodeError(f"search response is not JSON: {exc}") from exc
            if not isinstance(payload, dict):
                raise DecodeError("search response is not a JSON object")
            return payload
        raise TransportError(
            f"search failed after {self.max_attempts} attempts: {last_error}"
        )

    def search_candidates(self, query: str, cutoff: date, limit: int) -> list[CandidatePaper]:
        """Return at most ``limit`` candidates published on or before ``cutoff``.

        The date bound is re-applied locally, so a service that ignores the
        ``publishedBefore`` parameter still cannot leak future papers.
        """
        if limit < 1:
            raise ValueError("limit must be >= 1")
        payload = self._get(
            {"query": query, "limit": limit, "publishedBefore": cutoff.isoformat()}
        )
        hits = payload.get("data")
        if not isinstance(hits, list):
            raise DecodeError("search response lacks a 'data' list")
        candidates: list[CandidatePaper] = []
        for hit in hits:
            if not isinstance(hit, dict):
                raise DecodeError("search hit is not a JSON object")
            published = hit.get("publicationDate")
            if not published:
                continue  # undated papers cannot be cutoff-checked
            try:
                published_date = date.fromisoformat(str(published))
            except ValueError as exc:
                raise DecodeError(f"bad publicationDate {published!r}") from exc
            if published_date > cutoff:
                continue
            title = str(hit.get("title", "")).strip()
            if not title:
                continue
            candidates.append(
                CandidatePaper(
                    title=title,
                    abstract=str(hit.get("abstract") or ""),
                    published_date=published_date,
                    source_id=str(hit.get("paperId", "")),
                )
            )
            if len(candidates) >= limit:
                break
        return candidates


def _paper_side_text(paper: PaperRecord) -> str:
    return f"{paper.title}\n{paper.abstract}"


def _candidate_side_text(candidate: CandidatePaper) -> str:
    return f"{candidate.title}\n{candidate.abstract}"


def select_relevant(
    paper: PaperRecord,
    candidates: list[CandidatePaper],
    config: RetrievalConfig,
    embedder,
) -> list[RelevantPaperRef]:
    """Keep the top-k candidates by cosine similarity to the paper.

    Candidates must already respect the date cutoff.  Results come back in
    descending similarity order; ties break toward the earlier
    published_date, then the lexicographically smaller source_id.
    """
    if not candidates:
        return []
    paper_vec = embedder.embed(_paper_side_text(paper))
    scored = []
    for candidate in candidates:
        cand_vec = embedder.embed(_candidate_side_text(candidate))
        scored.append((cosine_similarity(paper_vec, cand_vec), candidate))
    scored.sort(key=lambda sc: (-sc[0], sc[1].published_date, sc[1].source_id))
    return [
        RelevantPaperRef(
            title=candidate.title,
            abstract=candidate.abstract,
            published_date=candidate.published_date,
            similarity=max(0.0, min(1.0, similarity)),
        )
        for similarity, candidate in scored[:config.k]
    ]


def build_query(paper: PaperRecord) -> str:
    """Search query text: title plus the first sentence of the abstract."""
    first_sentence = paper.abstract.split(".")[0].strip()
    return f"{paper.title}. {first_sentence}" if first_sentence else paper.title


@dataclass(frozen=True)
class RelevantPaperFinder:
    """Search + embed + select, bundled for pipeline and dataset callers."""

    client: SearchClient
    embedder: object

    def find(self, paper: PaperRecord, config: RetrievalConfig) -> list[RelevantPaperRef]:
        candidates = self.client.search_candidates(
            build_query(paper), cutoff=paper.submission_date, limit=config.query_limit
        )
        return select_relevant(paper, candidates, config, self.embedder)
