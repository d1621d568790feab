"""Append-only store of validated claims with lexical relevance search.

Each record is one JSON line, so appends are crash-safe and fixtures diff
cleanly. Ranking is token overlap weighted by inverse document frequency:
deterministic offline, and the interface leaves room for an embedding-backed
provider later.
"""

from __future__ import annotations

import json
import logging
import math
import re
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import NotSupportedLabel, StorageFailure
from .verdict import SUPPORTED

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9]+")

FIELDS = ("id", "claim_text", "verdict_label", "source_urls", "created_at")


@dataclass(frozen=True)
class MemoryRecord:
    id: str
    claim_text: str
    verdict_label: str
    source_urls: tuple[str, ...]
    created_at: str


def new_record(claim_text: str, source_urls=(), created_at: str | None = None) -> MemoryRecord:
    """A fresh Supported record with a generated id."""
    return MemoryRecord(
        id=uuid.uuid4().hex,
        claim_text=claim_text,
        verdict_label=SUPPORTED,
        source_urls=tuple(source_urls),
        created_at=created_at or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def _tokens(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


def _record_to_line(record: MemoryRecord) -> str:
    return json.dumps(
        {
            "id": record.id,
            "claim_text": record.claim_text,
            "verdict_label": record.verdict_label,
            "source_urls": list(record.source_urls),
            "created_at": record.created_at,
        },
        ensure_ascii=False,
        sort_keys=True,
    )


def _record_from_line(line: str) -> MemoryRecord:
    data = json.loads(line)
    missing = [f for f in FIELDS if f not in data]
    if missing:
        raise ValueError(f"missing fields: {missing}")
    return MemoryRecord(
        id=str(data["id"]),
        claim_text=str(data["claim_text"]),
        verdict_label=str(data["verdict_label"]),
        source_urls=tuple(data["source_urls"]),
        created_at=str(data["created_at"]),
    )


class MemoryStore:
    """Validated-claim store: serialized appends, snapshot reads."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._records: list[MemoryRecord] = []
        self._ids: set[str] = set()
        self.corrupt_count = 0
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path) -> "MemoryStore":
        """Read a store file; a missing file yields an empty store.

        Lines that fail to parse are skipped with a warning and counted in
        ``corrupt_count``.
        """
        store = cls(path)
        file_path = Path(path)
        if not file_path.exists():
            return store
        with open(file_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = _record_from_line(line)
                except (ValueError, KeyError, TypeError) as err:
                    store.corrupt_count += 1
                    logger.warning("skipping corrupt record at %s:%d (%s)", path, line_no, err)
                    continue
                store._records.append(record)
                store._ids.add(record.id)
        return store

    def put(self, record: MemoryRecord) -> str:
        """Append one Supported record durably; returns its id."""
        if record.verdict_label != SUPPORTED:
            raise NotSupportedLabel(f"refusing to store label {record.verdict_label!r}")
        with self._lock:
            if record.id in self._ids:
                raise StorageFailure(f"duplicate record id {record.id}")
            if self.path is not None:
                try:
                    with open(self.path, "a", encoding="utf-8") as fh:
                        fh.write(_record_to_line(record) + "\n")
                        fh.flush()
                except OSError as err:
                    raise StorageFailure(str(err)) from err
            self._records.append(record)
            self._ids.add(record.id)
        return record.id

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> list[MemoryRecord]:
        return list(self._records)

    def search(self, query: str, k: int) -> list[tuple[MemoryRecord, float]]:
        """Top-k records by IDF-weighted token overlap with the query.

        Ties (including zero-score records when k exceeds the matches) are
        broken by recency: later appends rank first.
        """
        if k < 1:
            raise ValueError("k must be positive")
        records = self._records
        if not records:
            return []
        n = len(records)
        record_tokens = [_tokens(r.claim_text) for r in records]
        df: dict[str, int] = {}
        for toks in record_tokens:
            for tok in toks:
                df[tok] = df.get(tok, 0) + 1
        query_tokens = _tokens(query)

        def idf(tok: str) -> float:
            return math.log((1 + n) / (1 + df.get(tok, 0))) + 1.0

        scored = [
            (sum(idf(t) for t in query_tokens & toks), idx)
            for idx, toks in enumerate(record_tokens)
        ]
        scored.sort(key=lambda pair: (-pair[0], -pair[1]))
        return [(records[idx], score) for score, idx in scored[:k]]
