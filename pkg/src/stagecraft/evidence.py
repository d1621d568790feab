"""Web evidence retrieval: broad site selection, then site-scoped snippets.

Verification of one claim runs in two passes. A broad query over the claim
text ranks candidate sites by quality; a second, site-restricted pass pulls
textual snippets from the best sites. Providers are pluggable: a live
HTTP search client, and a fixture provider reading a local corpus so the
whole module runs deterministic and offline under test.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Protocol
from urllib.parse import urlparse

import requests

from .errors import EmptyResults, ProviderUnavailable

# Registrable-domain extraction without a full public-suffix list: enough
# two-level suffixes for the domains evidence work actually meets.
_TWO_LEVEL_SUFFIXES = {
    "co.uk", "ac.uk", "gov.uk", "org.uk",
    "com.au", "net.au", "org.au", "edu.au", "gov.au",
    "co.jp", "ne.jp", "or.jp", "ac.jp",
    "com.br", "com.cn", "com.mx", "co.in", "ac.in", "co.nz",
}

DEFAULT_ALLOWLIST: dict[str, float] = {
    "nasa.gov": 1.0,
    "nih.gov": 1.0,
    "noaa.gov": 1.0,
    "fda.gov": 1.0,
    "nist.gov": 1.0,
    ".gov": 0.9,
    ".edu": 0.85,
    "nature.com": 0.9,
    "science.org": 0.9,
    "arxiv.org": 0.8,
    "reuters.com": 0.7,
    "apnews.com": 0.7,
}

DEFAULT_MAX_SNIPPETS = 8
SNIPPET_MAX_CHARS = 600


@dataclass(frozen=True)
class SearchHit:
    url: str
    site: str
    title: str
    snippet: str
    rank: int


@dataclass(frozen=True)
class RankedSite:
    site: str
    quality_score: float


@dataclass
class EvidenceBundle:
    claim_text: str
    snippets: list[SearchHit] = field(default_factory=list)
    retrieved_at: str = ""

    @property
    def empty(self) -> bool:
        return not self.snippets


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def registrable_domain(url_or_host: str) -> str:
    """Reduce a URL or hostname to its registrable domain."""
    host = url_or_host
    if "//" in host or host.startswith(("http:", "https:")):
        host = urlparse(url_or_host).netloc or url_or_host
    host = host.split("@")[-1].split(":")[0].strip().lower().rstrip(".")
    labels = [p for p in host.split(".") if p]
    if len(labels) <= 2:
        return ".".join(labels)
    if ".".join(labels[-2:]) in _TWO_LEVEL_SUFFIXES:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


class SearchProvider(Protocol):
    def search(self, query: str, site: str | None = None) -> list[SearchHit]: ...


class FixtureProvider:
    """Serves hits from a local corpus; the offline stand-in for live search.

    The corpus is line-delimited JSON, one hit per line with fields
    {query, url, site, title, snippet, rank}. A lookup returns the records
    whose ``query`` equals the requested query, optionally restricted to one
    site, ordered by rank.
    """

    def __init__(self, records: Iterable[Mapping]):
        self._records = [dict(r) for r in records]

    @classmethod
    def from_file(cls, path) -> "FixtureProvider":
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return cls(records)

    def search(self, query: str, site: str | None = None) -> list[SearchHit]:
        hits = [
            SearchHit(
                url=r.get("url", ""),
                site=r["site"],
                title=r.get("title", ""),
                snippet=r["snippet"],
                rank=int(r["rank"]),
            )
            for r in self._records
            if r["query"] == query and (site is None or r["site"] == site)
        ]
        return sorted(hits, key=lambda h: h.rank)


class WebSearchProvider:
    """Thin client for a JSON web-search endpoint, with a QPS cap.

    Expects ``GET endpoint?q=...`` returning ``{"results": [{url, title,
    snippet}, ...]}``; site-restricted queries are issued with the usual
    ``site:`` operator. Sites are derived from result URLs.
    """

    def __init__(self, endpoint: str, api_key: str | None = None,
                 max_qps: float = 2.0, timeout: float = 15.0, transport=None):
        self._endpoint = endpoint
        self._api_key = api_key
        self._min_interval = 1.0 / max_qps if max_qps > 0 else 0.0
        self._timeout = timeout
        self._transport = transport if transport is not None else requests.Session()
        self._last_call = 0.0
        self._lock = threading.Lock()

    def search(self, query: str, site: str | None = None) -> list[SearchHit]:
        q = f"site:{site} {query}" if site else query
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        with self._lock:
            wait = self._min_interval - (time.monotonic() - self._last_call)
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()
        try:
            resp = self._transport.get(
                self._endpoint, params={"q": q}, headers=headers, timeout=self._timeout
            )
        except requests.RequestException as err:
            raise ProviderUnavailable(f"search transport error: {err}") from err
        if resp.status_code != 200:
            raise ProviderUnavailable(f"search endpoint returned HTTP {resp.status_code}")
        try:
            results = resp.json().get("results", [])
        except ValueError as err:
            raise ProviderUnavailable(f"malformed search response: {err}") from err
        hits = []
        for idx, item in enumerate(results, start=1):
            url = item.get("url", "")
            snippet = (item.get("snippet") or "").strip()
            if not snippet:
                continue
            hits.append(
                SearchHit(
                    url=url,
                    site=registrable_domain(url),
                    title=item.get("title", ""),
                    snippet=snippet,
                    rank=idx,
                )
            )
        return hits


def allowlist_score(site: str, allowlist: Mapping[str, float]) -> float:
    """Exact-domain score, else the longest matching '.suffix' rule, else 0."""
    if site in allowlist:
        return allowlist[site]
    best = 0.0
    best_len = -1
    for key, value in allowlist.items():
        if key.startswith(".") and site.endswith(key) and len(key) > best_len:
            best = value
            best_len = len(key)
    return best if best_len >= 0 else 0.0


def score_site(hits_for_site: list[SearchHit], allowlist: Mapping[str, float]) -> float:
    """Blend of rank-reciprocal aggregation and the allowlist score.

    score = clamp(0.5 * mean(1/rank) + 0.5 * allowlist_score, 0, 1)
    """
    if not hits_for_site:
        raise ValueError("hits_for_site must be non-empty")
    site = hits_for_site[0].site
    rank_part = sum(1.0 / h.rank for h in hits_for_site) / len(hits_for_site)
    raw = 0.5 * rank_part + 0.5 * allowlist_score(site, allowlist)
    return min(1.0, max(0.0, raw))


def select_sites(
    claim: str,
    provider: SearchProvider,
    top_n: int,
    allowlist: Mapping[str, float] | None = None,
) -> list[RankedSite]:
    """Broad pass: query the claim text, aggregate hits by site, rank by quality."""
    if not claim.strip():
        raise ValueError("claim must be non-empty")
    if top_n < 1:
        raise ValueError("top_n must be positive")
    table = DEFAULT_ALLOWLIST if allowlist is None else allowlist
    hits = provider.search(claim)
    if not hits:
        raise EmptyResults(f"no hits for claim: {claim[:80]}")
    by_site: dict[str, list[SearchHit]] = {}
    for hit in hits:
        by_site.setdefault(hit.site, []).append(hit)
    scored = [
        (RankedSite(site=site, quality_score=score_site(group, table)),
         min(h.rank for h in group))
        for site, group in by_site.items()
    ]
    scored.sort(key=lambda pair: (-pair[0].quality_score, pair[1], pair[0].site))
    return [pair[0] for pair in scored[:top_n]]


def collect_snippets(
    claim: str,
    sites: list[RankedSite],
    provider: SearchProvider,
    max_snippets: int = DEFAULT_MAX_SNIPPETS,
    snippet_chars: int = SNIPPET_MAX_CHARS,
) -> EvidenceBundle:
    """Depth pass: one site-restricted query per ranked site, best sites first."""
    if not sites:
        raise ValueError("sites must be non-empty")
    collected: list[SearchHit] = []
    for ranked in sites:
        hits = [h for h in provider.search(claim, site=ranked.site) if h.site == ranked.site]
        collected.extend(sorted(hits, key=lambda h: h.rank))
    trimmed = [
        SearchHit(
            url=h.url,
            site=h.site,
            title=h.title,
            snippet=h.snippet[:snippet_chars],
            rank=h.rank,
        )
        for h in collected[:max_snippets]
    ]
    return EvidenceBundle(claim_text=claim, snippets=trimmed, retrieved_at=utc_now_iso())
