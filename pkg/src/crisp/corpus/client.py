"""Scholarly-graph API client with caching, rate limiting, and retries.

Talks to the public graph endpoints (``paper/search/match``,
``paper/{id}/citations``, ``paper/{id}/references``) with offset/limit
pagination.  Every fully-fetched result is cached so repeat invocations
never touch the network; tests inject a fake transport and count calls.
"""

from __future__ import annotations

import os
import threading
import time
from typing import Protocol

import httpx

from .cache import ResponseCache
from .model import CitingPaperBundle, PaperRecord, ReferenceEntry, dedupe_references

DEFAULT_BASE_URL = "https://api.semanticscholar.org/graph/v1"
API_KEY_ENV = "CRISP_S2_API_KEY"
PAGE_SIZE = 100

CITATION_FIELDS = "title,abstract"
REFERENCE_FIELDS = "title,contexts"


class ApiError(Exception):
    """Base class for scholarly-graph API failures."""


class RetryableApiError(ApiError):
    """Transport failure or throttling; safe to retry."""


class NotFoundError(ApiError):
    """The API does not know the requested paper id."""


class EmptyReferenceListError(ApiError):
    """The citing paper's response has no references; discard the bundle."""


class Transport(Protocol):
    """Minimal HTTP surface the client needs; swapped out in tests."""

    def get(self, path: str, params: dict) -> tuple[int, object]:
        """Return (status_code, decoded JSON payload)."""
        ...


class HttpxTransport:
    def __init__(self, base_url: str = DEFAULT_BASE_URL, timeout: float = 30.0):
        headers = {}
        api_key = os.environ.get(API_KEY_ENV)
        if api_key:
            headers["x-api-key"] = api_key
        self._client = httpx.Client(base_url=base_url, headers=headers, timeout=timeout)

    def get(self, path: str, params: dict) -> tuple[int, object]:
        try:
            response = self._client.get(path, params=params)
        except httpx.HTTPError as exc:
            raise RetryableApiError(f"transport failure for {path}: {exc}") from exc
        if response.status_code in (200, 404):
            payload = response.json() if response.content else {}
            return response.status_code, payload
        return response.status_code, None


class TokenBucket:
    """Blocking token-bucket limiter shared by all fetch threads."""

    def __init__(self, rate_per_second: float = 1.0, capacity: float | None = None):
        if rate_per_second <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate_per_second
        self.capacity = capacity if capacity is not None else max(1.0, rate_per_second)
        self._tokens = self.capacity
        self._updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(
                    self.capacity, self._tokens + (now - self._updated) * self.rate
                )
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


class ScholarClient:
    """Citation-graph retrieval: citers, references, and id resolution."""

    def __init__(
        self,
        transport: Transport | None = None,
        cache: ResponseCache | None = None,
        rate_limiter: TokenBucket | None = None,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
    ):
        self.transport = transport or HttpxTransport()
        self.cache = cache
        self.rate_limiter = rate_limiter
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base

    # -- low-level request handling --------------------------------------

    def _request(self, path: str, params: dict) -> tuple[int, object]:
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            try:
                status, payload = self.transport.get(path, params)
            except RetryableApiError as exc:
                last_error = exc
                time.sleep(self.backoff_base * (2**attempt))
                continue
            if status in (429,) or status >= 500:
                last_error = RetryableApiError(f"HTTP {status} for {path}")
                time.sleep(self.backoff_base * (2**attempt))
                continue
            return status, payload
        raise last_error if last_error else RetryableApiError(f"request failed: {path}")

    def _paginate(self, path: str, fields: str) -> list[dict]:
        items: list[dict] = []
        offset = 0
        while True:
            status, payload = self._request(
                path, {"fields": fields, "offset": offset, "limit": PAGE_SIZE}
            )
            if status == 404:
                raise NotFoundError(f"unknown paper for {path}")
            data = payload.get("data", []) if isinstance(payload, dict) else []
            items.extend(data)
            next_offset = payload.get("next") if isinstance(payload, dict) else None
            if next_offset is None:
                return items
            offset = next_offset

    # -- operations -------------------------------------------------------

    def resolve_paper_by_title(self, title: str) -> str | None:
        """Best-match id for a title, or None when the API has no match."""
        if not title or not title.strip():
            raise ValueError("title must be non-empty")
        key = title.strip()
        if self.cache is not None:
            hit = self.cache.get("search", key)
            if hit is not None:
                return hit.get("paperId") or None
        status, payload = self._request("/paper/search/match", {"query": key})
        if status == 404:
            result: dict = {"paperId": None}
        else:
            data = payload.get("data", []) if isinstance(payload, dict) else []
            result = {"paperId": data[0]["paperId"]} if data else {"paperId": None}
        if self.cache is not None:
            self.cache.put("search", key, result)
        return result.get("paperId") or None

    def fetch_citing_papers(self, target_id: str) -> list[PaperRecord]:
        """All papers citing ``target_id``, concatenated across pages,
        de-duplicated by id."""
        if self.cache is not None:
            hit = self.cache.get("citations", target_id)
            if hit is not None:
                return [self._record_from_raw(raw) for raw in hit]
        rows = self._paginate(f"/paper/{target_id}/citations", CITATION_FIELDS)
        raw_records = [row.get("citingPaper") or {} for row in rows]
        raw_records = [raw for raw in raw_records if raw.get("paperId")]
        if self.cache is not None:
            self.cache.put("citations", target_id, raw_records)
        return _dedupe_records(
            self._record_from_raw(raw) for raw in raw_records
        )

    def fetch_references_with_contexts(self, citing_id: str) -> CitingPaperBundle:
        """The citing paper's full reference list with contexts attached.

        Raises EmptyReferenceListError when the response holds no
        references, signalling that the bundle is to be discarded.
        """
        raw_rows = None
        if self.cache is not None:
            raw_rows = self.cache.get("references", citing_id)
        if raw_rows is None:
            raw_rows = self._paginate(f"/paper/{citing_id}/references", REFERENCE_FIELDS)
            if self.cache is not None:
                self.cache.put("references", citing_id, raw_rows)
        citing = self._fetch_paper_record(citing_id)
        entries = []
        for row in raw_rows:
            cited = row.get("citedPaper") or {}
            if not cited.get("paperId"):
                continue  # unresolved reference rows carry no id
            entries.append(
                ReferenceEntry(
                    cited=PaperRecord(
                        id=cited["paperId"], title=cited.get("title") or ""
                    ),
                    contexts=tuple(c for c in row.get("contexts", []) if c and c.strip()),
                )
            )
        entries = dedupe_references(entries)
        if not entries:
            raise EmptyReferenceListError(
                f"citing paper {citing_id} has no references; discard bundle"
            )
        return CitingPaperBundle(citing=citing, references=entries)

    def _fetch_paper_record(self, paper_id: str) -> PaperRecord:
        if self.cache is not None:
            hit = self.cache.get("paper", paper_id)
            if hit is not None:
                return self._record_from_raw(hit)
        status, payload = self._request(
            f"/paper/{paper_id}", {"fields": "title,abstract"}
        )
        if status == 404:
            raise NotFoundError(f"unknown paper id {paper_id}")
        raw = {
            "paperId": payload.get("paperId", paper_id),
            "title": payload.get("title"),
            "abstract": payload.get("abstract"),
        }
        if self.cache is not None:
            self.cache.put("paper", paper_id, raw)
        return self._record_from_raw(raw)

    @staticmethod
    def _record_from_raw(raw: dict) -> PaperRecord:
        return PaperRecord(
            id=raw["paperId"],
            title=raw.get("title") or "",
            abstract=raw.get("abstract"),
        )


def _dedupe_records(records) -> list[PaperRecord]:
    seen: set[str] = set()
    out: list[PaperRecord] = []
    for record in records:
        if record.id in seen:
            continue
        seen.add(record.id)
        out.append(record)
    return out
