"""Persona-dialog adjudication of claims against evidence.

A claim is judged by asking the model to stage a detective dialog over the
numbered evidence and come to a definite conclusion; the verdict is then
recovered from the dialog's closing turns by a rule table. Rule-based
extraction keeps the adjudication auditable and fully testable offline.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .evidence import EvidenceBundle
from .gateway import ChatMessage, ChatRequest

SUPPORTED = "Supported"
PARTIALLY_SUPPORTED = "PartiallySupported"
NOT_SUPPORTED = "NotSupported"
INDETERMINATE = "Indeterminate"
LABELS = (SUPPORTED, PARTIALLY_SUPPORTED, NOT_SUPPORTED, INDETERMINATE)


@dataclass(frozen=True)
class PersonaPair:
    """The two adjudicating personae as they appear in the prompt frame."""

    lead: str = "Sherlock Holmes"
    partner: str = "his assistant Watson"


@dataclass
class Verdict:
    label: str
    rationale_dialog: str
    confidence_cue: str  # the sentence that decided the label; empty iff Indeterminate


_FRAME = (
    "Imagine a dialog between {lead} and {partner} discussing whether the "
    "EVIDENCE given supports or refutes the CLAIM below in which they use "
    "their famous detective skills to come to a definite conclusion."
)

EMPTY_EVIDENCE_SENTINEL = "EVIDENCE: (none found)"


def build_verdict_prompt(
    claim_text: str,
    evidence: EvidenceBundle,
    personae: PersonaPair | None = None,
    model: str = "gpt-3.5-turbo",
    temperature: float = 0.0,
    max_tokens: int = 1024,
) -> ChatRequest:
    """Render the adjudication prompt: frame, CLAIM block, numbered EVIDENCE block."""
    pair = personae or PersonaPair()
    lines = [_FRAME.format(lead=pair.lead, partner=pair.partner), "", f"CLAIM: {claim_text}", ""]
    if evidence.snippets:
        lines.append("EVIDENCE:")
        for i, hit in enumerate(evidence.snippets, start=1):
            lines.append(f"{i}. {hit.snippet}")
    else:
        lines.append(EMPTY_EVIDENCE_SENTINEL)
    return ChatRequest(
        model=model,
        messages=[ChatMessage("user", "\n".join(lines))],
        temperature=temperature,
        max_tokens=max_tokens,
    )


# Decision-phrase rule table. NotSupported phrases win over the others;
# Supported phrases only count in sentences free of negation.
_NOT_SUPPORTED_PHRASES = ("not supported", "does not support", "do not support")
_REFUTE_RE = re.compile(r"\brefute[sd]\b")
_PARTIAL_PHRASE = "partially support"
_SUPPORTED_PHRASES = ("directly supports", "is supported", "supports the claim")
_NEGATION_WORDS = {
    "not", "no", "never", "none", "cannot", "nor", "neither", "nothing", "without",
}
_WORD_RE = re.compile(r"[a-z']+")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")
_PARAGRAPH_SPLIT_RE = re.compile(r"\n\s*\n")

_MIN_WINDOW_TURNS = 3
_WINDOW_FRACTION = 0.25


def _has_negation(sentence_lower: str) -> bool:
    for word in _WORD_RE.findall(sentence_lower):
        if word in _NEGATION_WORDS or word.endswith("n't"):
            return True
    return False


def _classify_sentence(sentence: str) -> str | None:
    low = sentence.lower()
    if any(p in low for p in _NOT_SUPPORTED_PHRASES) or _REFUTE_RE.search(low):
        return NOT_SUPPORTED
    if _PARTIAL_PHRASE in low:
        return PARTIALLY_SUPPORTED
    if any(p in low for p in _SUPPORTED_PHRASES) and not _has_negation(low):
        return SUPPORTED
    return None


def parse_verdict(dialog: str) -> Verdict:
    """Recover the verdict from a persona dialog.

    Only the closing turns are scanned (the last quarter of the dialog, at
    least the last three turns) so early hedging does not outvote the
    conclusion; within that window the last decisive sentence wins. A dialog
    with no decision sentence is Indeterminate.
    """
    if not dialog.strip():
        raise ValueError("dialog must be non-empty")
    turns = [p for p in _PARAGRAPH_SPLIT_RE.split(dialog) if p.strip()]
    if not turns:
        turns = [dialog]
    window_size = max(math.ceil(len(turns) * _WINDOW_FRACTION), _MIN_WINDOW_TURNS)
    window = "\n".join(turns[-window_size:])
    sentences = [s.strip() for s in _SENTENCE_SPLIT_RE.split(window) if s.strip()]
    for sentence in reversed(sentences):
        label = _classify_sentence(sentence)
        if label is not None:
            return Verdict(label=label, rationale_dialog=dialog, confidence_cue=sentence)
    return Verdict(label=INDETERMINATE, rationale_dialog=dialog, confidence_cue="")


def apply_evidence_guard(verdict: Verdict, evidence: EvidenceBundle) -> Verdict:
    """A claim with no evidence can never be (even partially) supported."""
    if not evidence.snippets and verdict.label in (SUPPORTED, PARTIALLY_SUPPORTED):
        return Verdict(
            label=NOT_SUPPORTED,
            rationale_dialog=verdict.rationale_dialog,
            confidence_cue=verdict.confidence_cue,
        )
    return verdict
