"""Repeated-verdict trials over a fixed claim/evidence fixture.

Each trial rebuilds the adjudication prompt from scratch (no shared chat
state) so runs are independent; outcomes are tabulated and scored against
the fixture's recorded ground truth. Retrieval is deliberately bypassed:
the point is to isolate the verdict stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ._fsio import write_text_atomic
from .deconfab import Claim
from .errors import GatewayError
from .evidence import EvidenceBundle, SearchHit
from .gateway import Backend, complete
from .verdict import (
    INDETERMINATE,
    LABELS,
    NOT_SUPPORTED,
    SUPPORTED,
    PersonaPair,
    apply_evidence_guard,
    build_verdict_prompt,
    parse_verdict,
)

_DISPLAY_NAMES = {
    SUPPORTED: "supported",
    "PartiallySupported": "partially supported",
    NOT_SUPPORTED: "not supported",
    INDETERMINATE: "indeterminate",
}


@dataclass
class TrialFixture:
    claim: Claim
    evidence: EvidenceBundle
    ground_truth: str  # "true" | "false" | "unknown"


@dataclass
class TrialTable:
    n: int
    counts: dict[str, int]
    detection_rate: float
    ground_truth: str
    gateway_errors: int = 0


@dataclass
class TrialConfig:
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_tokens: int = 1024
    personae: PersonaPair = field(default_factory=PersonaPair)


def load_fixture(path) -> TrialFixture:
    """Read a trial fixture file: claim text, evidence snippets, ground truth."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    snippets = [
        SearchHit(
            url=h.get("url", ""),
            site=h.get("site", ""),
            title=h.get("title", ""),
            snippet=h["snippet"],
            rank=int(h.get("rank", i + 1)),
        )
        for i, h in enumerate(data.get("evidence", []))
    ]
    return TrialFixture(
        claim=Claim(id=data.get("claim_id", "t0.c0"), assertion_id="t0", text=data["claim_text"]),
        evidence=EvidenceBundle(claim_text=data["claim_text"], snippets=snippets),
        ground_truth=data.get("ground_truth", "unknown"),
    )


def run_trials(
    fixture: TrialFixture,
    n: int,
    gateway: Backend,
    config: TrialConfig | None = None,
    dump_dir=None,
) -> TrialTable:
    """Run n independent verdict trials and tabulate the labels.

    A gateway failure inside a trial counts as Indeterminate and is flagged
    in ``gateway_errors``; counts always sum to n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    config = config or TrialConfig()
    counts = {label: 0 for label in LABELS}
    errors = 0
    dump_path = Path(dump_dir) if dump_dir is not None else None
    if dump_path is not None:
        dump_path.mkdir(parents=True, exist_ok=True)
    for trial in range(n):
        request = build_verdict_prompt(
            fixture.claim.text,
            fixture.evidence,
            config.personae,
            config.model,
            config.temperature,
            config.max_tokens,
        )
        try:
            reply = complete(request, gateway)
        except GatewayError:
            counts[INDETERMINATE] += 1
            errors += 1
            continue
        verdict = apply_evidence_guard(parse_verdict(reply.content), fixture.evidence)
        counts[verdict.label] += 1
        if dump_path is not None:
            write_text_atomic(dump_path / f"trial_{trial:03d}.txt", reply.content)
    if fixture.ground_truth == "false":
        correct = counts[NOT_SUPPORTED]
    elif fixture.ground_truth == "true":
        correct = counts[SUPPORTED]
    else:
        correct = 0
    return TrialTable(
        n=n,
        counts=counts,
        detection_rate=correct / n,
        ground_truth=fixture.ground_truth,
        gateway_errors=errors,
    )


def format_table(table: TrialTable) -> str:
    """Plain-text table: one row per label (indeterminate only when seen)."""
    rows = [(SUPPORTED, table.counts.get(SUPPORTED, 0)),
            ("PartiallySupported", table.counts.get("PartiallySupported", 0)),
            (NOT_SUPPORTED, table.counts.get(NOT_SUPPORTED, 0))]
    if table.counts.get(INDETERMINATE, 0):
        rows.append((INDETERMINATE, table.counts[INDETERMINATE]))
    width = max(len(_DISPLAY_NAMES[label]) for label, _ in rows)
    header = f"Result of {table.n} trials"
    lines = [f"{header:<{max(width, len(header))}}  n"]
    for label, count in rows:
        lines.append(f"{_DISPLAY_NAMES[label]:<{max(width, len(header))}}  {count}")
    lines.append(f"Truth: Claim is {table.ground_truth}")
    return "\n".join(lines) + "\n"
