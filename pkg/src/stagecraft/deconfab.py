"""Deconfabulation pipeline.

Five stages: segment a response into assertions, break each assertion into
atomic claims, adjudicate every claim with a persona dialog over retrieved
evidence, drop everything that did not come back Supported, and rewrite the
survivors in the register of the original response. Claims that survive are
also eligible for the validated-memory store.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import EmptyResults, GatewayError, PipelineAborted, ProviderUnavailable
from .evidence import (
    DEFAULT_ALLOWLIST,
    DEFAULT_MAX_SNIPPETS,
    SNIPPET_MAX_CHARS,
    EvidenceBundle,
    SearchProvider,
    collect_snippets,
    select_sites,
    utc_now_iso,
)
from .gateway import Backend, ChatMessage, ChatRequest, complete
from .verdict import (
    INDETERMINATE,
    SUPPORTED,
    PersonaPair,
    Verdict,
    apply_evidence_guard,
    build_verdict_prompt,
    parse_verdict,
)

DISCLAIMER = "No statements could be verified."

SEGMENT_INSTRUCTION = (
    "List every distinct assertion made by the text below. Reply with one "
    "assertion per line, copied as close to verbatim as possible, and "
    "nothing else.\n\nTEXT:\n{text}"
)
ATOMIZE_INSTRUCTION = (
    "Break the assertion below into atomic claims, each stating exactly one "
    "checkable fact. Reply with one claim per line and nothing else.\n\n"
    "ASSERTION:\n{text}"
)
REWRITE_INSTRUCTION = (
    "Rewrite the verified claims below as a single response that preserves "
    "the style and register of the original text. Use only the verified "
    "claims; add nothing new.\n\nORIGINAL:\n{original}\n\nVERIFIED CLAIMS:\n{claims}"
)


@dataclass(frozen=True)
class Assertion:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Claim:
    id: str
    assertion_id: str
    text: str


@dataclass
class VerifiedClaim:
    claim: Claim
    verdict: Verdict
    evidence: EvidenceBundle

    def __post_init__(self):
        if self.verdict.label == SUPPORTED and not self.evidence.snippets:
            raise ValueError("a Supported verdict requires non-empty evidence")


@dataclass
class DeconfabReport:
    original: str
    rewritten: str
    claims: list[VerifiedClaim]
    dropped: list[str]
    flags: list[str] = field(default_factory=list)


@dataclass
class PipelineConfig:
    """Knobs for the verification pipeline; defaults suit offline fixtures."""

    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0  # classification-style calls stay reproducible
    max_tokens: int = 1024
    top_n_sites: int = 3
    max_snippets: int = DEFAULT_MAX_SNIPPETS
    snippet_chars: int = SNIPPET_MAX_CHARS
    allowlist: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_ALLOWLIST))
    personae: PersonaPair = field(default_factory=PersonaPair)


@dataclass
class SegmentationResult:
    assertions: list[Assertion]
    used_fallback: bool = False


@dataclass
class AtomizationResult:
    claims: list[Claim]
    used_fallback: bool = False


_SENTENCE_RE = re.compile(r"[^.!?]+[.!?]*")
_BULLET_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")


def _sentence_assertions(response: str) -> list[Assertion]:
    assertions = []
    for m in _SENTENCE_RE.finditer(response):
        segment = m.group()
        stripped = segment.strip()
        if not stripped:
            continue
        start = m.start() + (len(segment) - len(segment.lstrip()))
        assertions.append(Assertion(text=stripped, start=start, end=start + len(stripped)))
    return assertions


def _locate(haystack: str, needle: str, start: int) -> tuple[int, int] | None:
    idx = haystack.find(needle, start)
    if idx >= 0:
        return idx, idx + len(needle)
    tokens = needle.split()
    if not tokens:
        return None
    pattern = re.compile(r"\s+".join(re.escape(t) for t in tokens), re.IGNORECASE)
    m = pattern.search(haystack, start)
    return m.span() if m else None


def _reply_lines(content: str) -> list[str]:
    lines = []
    for raw in content.splitlines():
        line = _BULLET_RE.sub("", raw).strip()
        if line:
            lines.append(line)
    return lines


def _request(config: PipelineConfig, prompt: str) -> ChatRequest:
    return ChatRequest(
        model=config.model,
        messages=[ChatMessage("user", prompt)],
        temperature=config.temperature,
        max_tokens=config.max_tokens,
    )


def segment_assertions(
    response: str,
    gateway: Backend | None,
    config: PipelineConfig | None = None,
) -> SegmentationResult:
    """Split a response into assertions with character spans.

    Segmentation is model-backed; when the model's lines cannot be aligned
    back onto the original text (or no gateway is given), a plain sentence
    split takes over and the result is flagged.
    """
    if not response.strip():
        raise ValueError("response must be non-empty")
    config = config or PipelineConfig()
    if gateway is None:
        return SegmentationResult(_sentence_assertions(response), used_fallback=True)

    reply = complete(_request(config, SEGMENT_INSTRUCTION.format(text=response)), gateway)
    assertions: list[Assertion] = []
    cursor = 0
    for line in _reply_lines(reply.content):
        span = _locate(response, line, cursor)
        if span is None:
            return SegmentationResult(_sentence_assertions(response), used_fallback=True)
        start, end = span
        assertions.append(Assertion(text=response[start:end], start=start, end=end))
        cursor = end
    if not assertions:
        return SegmentationResult(_sentence_assertions(response), used_fallback=True)
    return SegmentationResult(assertions, used_fallback=False)


def atomize_claims(
    assertion: Assertion,
    gateway: Backend | None,
    config: PipelineConfig | None = None,
    assertion_id: str = "a0",
) -> AtomizationResult:
    """Decompose one assertion into atomic claims.

    An unusable decomposition (no gateway, or a reply with no usable lines)
    falls back to the assertion itself as a single claim, flagged.
    """
    config = config or PipelineConfig()
    if gateway is not None:
        reply = complete(_request(config, ATOMIZE_INSTRUCTION.format(text=assertion.text)), gateway)
        lines = _reply_lines(reply.content)
        if lines:
            claims = [
                Claim(id=f"{assertion_id}.c{i}", assertion_id=assertion_id, text=line)
                for i, line in enumerate(lines)
            ]
            return AtomizationResult(claims, used_fallback=False)
    claim = Claim(id=f"{assertion_id}.c0", assertion_id=assertion_id, text=assertion.text)
    return AtomizationResult([claim], used_fallback=True)


def _indeterminate(claim: Claim, bundle: EvidenceBundle) -> VerifiedClaim:
    return VerifiedClaim(
        claim=claim,
        verdict=Verdict(label=INDETERMINATE, rationale_dialog="", confidence_cue=""),
        evidence=bundle,
    )


def verify_claim(
    claim: Claim,
    gateway: Backend,
    provider: SearchProvider,
    config: PipelineConfig | None = None,
) -> VerifiedClaim:
    """Retrieve evidence for one claim and adjudicate it.

    A claim with no retrievable evidence is Indeterminate without a dialog:
    nothing can be verified against nothing.
    """
    config = config or PipelineConfig()
    try:
        try:
            sites = select_sites(claim.text, provider, config.top_n_sites, config.allowlist)
        except EmptyResults:
            return _indeterminate(claim, EvidenceBundle(claim.text, [], utc_now_iso()))
        bundle = collect_snippets(
            claim.text, sites, provider, config.max_snippets, config.snippet_chars
        )
        if bundle.empty:
            return _indeterminate(claim, bundle)
        request = build_verdict_prompt(
            claim.text, bundle, config.personae, config.model,
            config.temperature, config.max_tokens,
        )
        reply = complete(request, gateway)
    except (GatewayError, ProviderUnavailable) as err:
        raise type(err)(f"claim {claim.id}: {err}") from err
    verdict = apply_evidence_guard(parse_verdict(reply.content), bundle)
    return VerifiedClaim(claim=claim, verdict=verdict, evidence=bundle)


def reassemble(
    original: str,
    survivors: list[VerifiedClaim],
    gateway: Backend,
    config: PipelineConfig | None = None,
) -> str:
    """Rewrite the surviving claims in the original's style.

    With nothing to keep there is nothing to ask the model: a fixed
    disclaimer is returned instead.
    """
    if any(vc.verdict.label != SUPPORTED for vc in survivors):
        raise ValueError("reassemble only accepts Supported claims")
    if not survivors:
        return DISCLAIMER
    config = config or PipelineConfig()
    numbered = "\n".join(f"{i}. {vc.claim.text}" for i, vc in enumerate(survivors, start=1))
    prompt = REWRITE_INSTRUCTION.format(original=original, claims=numbered)
    reply = complete(_request(config, prompt), gateway)
    return reply.content


def deconfabulate(
    response: str,
    gateway: Backend,
    provider: SearchProvider,
    config: PipelineConfig | None = None,
    memory=None,
) -> DeconfabReport:
    """Run the full pipeline over a response and report what survived.

    Claims keep their original text order. A fatal gateway/provider error
    aborts the run and raises PipelineAborted carrying the partial report.
    Supported claims are forwarded to ``memory.put`` when a store is wired.
    """
    config = config or PipelineConfig()
    flags: list[str] = []
    verified: list[VerifiedClaim] = []
    try:
        segmentation = segment_assertions(response, gateway, config)
        if segmentation.used_fallback:
            flags.append("segmentation_fallback")
        claims: list[Claim] = []
        for index, assertion in enumerate(segmentation.assertions):
            assertion_id = f"a{index}"
            atomization = atomize_claims(assertion, gateway, config, assertion_id)
            if atomization.used_fallback:
                flags.append(f"atomize_fallback:{assertion_id}")
            claims.extend(atomization.claims)
        for claim in claims:
            verified.append(verify_claim(claim, gateway, provider, config))
        survivors = [vc for vc in verified if vc.verdict.label == SUPPORTED]
        rewritten = reassemble(response, survivors, gateway, config)
    except (GatewayError, ProviderUnavailable) as err:
        partial = DeconfabReport(
            original=response,
            rewritten="",
            claims=verified,
            dropped=[vc.claim.id for vc in verified if vc.verdict.label != SUPPORTED],
            flags=flags + [f"aborted: {err}"],
        )
        raise PipelineAborted(str(err), report=partial) from err
    dropped = [vc.claim.id for vc in verified if vc.verdict.label != SUPPORTED]
    if memory is not None:
        from .memory import new_record

        for vc in survivors:
            memory.put(
                new_record(
                    claim_text=vc.claim.text,
                    source_urls=[h.url for h in vc.evidence.snippets],
                )
            )
    return DeconfabReport(
        original=response,
        rewritten=rewritten,
        claims=verified,
        dropped=dropped,
        flags=flags,
    )


def report_to_dict(report: DeconfabReport, mask_timestamps: bool = False) -> dict:
    """Plain-dict form of a report, field names matching the domain types."""
    return {
        "original": report.original,
        "rewritten": report.rewritten,
        "dropped": list(report.dropped),
        "flags": list(report.flags),
        "claims": [
            {
                "claim": {
                    "id": vc.claim.id,
                    "assertion_id": vc.claim.assertion_id,
                    "text": vc.claim.text,
                },
                "verdict": {
                    "label": vc.verdict.label,
                    "rationale_dialog": vc.verdict.rationale_dialog,
                    "confidence_cue": vc.verdict.confidence_cue,
                },
                "evidence": {
                    "claim_text": vc.evidence.claim_text,
                    "retrieved_at": "<masked>" if mask_timestamps else vc.evidence.retrieved_at,
                    "snippets": [
                        {
                            "url": h.url,
                            "site": h.site,
                            "title": h.title,
                            "snippet": h.snippet,
                            "rank": h.rank,
                        }
                        for h in vc.evidence.snippets
                    ],
                },
            }
            for vc in report.claims
        ],
    }


def report_to_json(report: DeconfabReport, mask_timestamps: bool = False) -> str:
    return json.dumps(
        report_to_dict(report, mask_timestamps=mask_timestamps),
        indent=2,
        sort_keys=True,
        ensure_ascii=False,
    ) + "\n"
