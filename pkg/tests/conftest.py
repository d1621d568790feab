"""Shared fixtures: the ventilator-claim corpus, scripted dialogs, and the
two-time-slit scenario used across the suite."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from stagecraft.evidence import FixtureProvider
from stagecraft.gateway import ScriptEntry, script_mock
from stagecraft.scenario import NudgeScript, NudgeStep, Persona, ScenarioSpec

FIXTURES = Path(__file__).parent / "fixtures"

VITAL_RESPONSE = (
    "The JPL VITAL ventilator project received support from the NSF, "
    "Gates Foundation, and AHA."
)

VITAL_CLAIMS = [
    "The JPL VITAL ventilator project received support from the NSF.",
    "The JPL VITAL ventilator project received support from the Gates Foundation.",
    "The JPL VITAL ventilator project received support from the AHA.",
]

VITAL_SNIPPETS = [
    "NASA's Jet Propulsion Laboratory designed and built the VITAL ventilator "
    "in 37 days as part of the agency's coronavirus response.",
    "The FDA issued an emergency use authorization covering the VITAL "
    "ventilator developed by JPL engineers.",
    "A team of more than 50 engineers worked on VITAL, some on site at JPL "
    "and others from home.",
    "Licensed manufacturers put the VITAL ventilator design into mass "
    "production in Brazil.",
]


def vital_corpus_records() -> list[dict]:
    """Fixture hits for each atomic funding claim: no snippet mentions funders."""
    records = []
    for claim in VITAL_CLAIMS + [VITAL_RESPONSE]:
        records.extend(
            [
                {
                    "query": claim,
                    "url": "https://www.nasa.gov/vital",
                    "site": "nasa.gov",
                    "title": "VITAL ventilator overview",
                    "snippet": VITAL_SNIPPETS[0],
                    "rank": 1,
                },
                {
                    "query": claim,
                    "url": "https://www.reuters.com/vital-fda",
                    "site": "reuters.com",
                    "title": "FDA authorizes VITAL",
                    "snippet": VITAL_SNIPPETS[1],
                    "rank": 2,
                },
                {
                    "query": claim,
                    "url": "https://www.nasa.gov/vital-team",
                    "site": "nasa.gov",
                    "title": "The team behind VITAL",
                    "snippet": VITAL_SNIPPETS[2],
                    "rank": 3,
                },
                {
                    "query": claim,
                    "url": "https://www.reuters.com/vital-brazil",
                    "site": "reuters.com",
                    "title": "VITAL production",
                    "snippet": VITAL_SNIPPETS[3],
                    "rank": 4,
                },
            ]
        )
    return records


@pytest.fixture()
def vital_provider() -> FixtureProvider:
    return FixtureProvider(vital_corpus_records())


def not_supported_dialog(claim_text: str) -> str:
    """A detective dialog that works the evidence and lands on 'not supported'."""
    return (
        f"Sherlock Holmes: An interesting claim, Watson: {claim_text} "
        "Let us take the evidence piece by piece.\n\n"
        "Dr. Watson: The first piece describes who designed and built the "
        "device and how quickly, but says nothing about the backing named "
        "in the claim.\n\n"
        "Sherlock Holmes: The remaining pieces cover the authorization and "
        "the production arrangements. None of them mentions the backing in "
        "question either.\n\n"
        "Dr. Watson: Then we can conclude that based on the evidence "
        "provided, the claim is not supported.\n\n"
        "Sherlock Holmes: Quite right, Watson. Another matter settled."
    )


def supported_dialog(claim_text: str) -> str:
    return (
        f"Sherlock Holmes: Consider the claim, Watson: {claim_text}\n\n"
        "Dr. Watson: Each piece of evidence points the same way, Sherlock.\n\n"
        "Sherlock Holmes: Indeed. The evidence directly supports the claim."
    )


def partially_supported_dialog(claim_text: str) -> str:
    return (
        f"Sherlock Holmes: Now then, Watson: {claim_text}\n\n"
        "Dr. Watson: Some of the particulars check out, others are absent.\n\n"
        "Sherlock Holmes: Agreed. The evidence partially supports the claim."
    )


def undecided_dialog(claim_text: str) -> str:
    return (
        f"Sherlock Holmes: A puzzle, Watson: {claim_text}\n\n"
        "Dr. Watson: The evidence wanders off into other matters entirely.\n\n"
        "Sherlock Holmes: Let us take some air and return to it tomorrow."
    )


def vital_mock_entries() -> list[ScriptEntry]:
    """Script for one full pipeline run over the ventilator response."""
    entries = [
        ScriptEntry("List every distinct assertion", VITAL_RESPONSE),
        ScriptEntry("Break the assertion", "\n".join(VITAL_CLAIMS)),
    ]
    entries.extend(
        ScriptEntry(f"CLAIM: {claim}", not_supported_dialog(claim))
        for claim in VITAL_CLAIMS
    )
    return entries


@pytest.fixture()
def vital_mock():
    return script_mock(vital_mock_entries())


def timeslit_spec() -> ScenarioSpec:
    return ScenarioSpec(
        title="Two-time slit at the whiteboard",
        setting=(
            "Richard Feynman and Emmy Noether are talking in the physics "
            "department lounge about a new optics result everyone is "
            "discussing, a double slit experiment where one spatial slit "
            "opens at two separate moments in time. The journal issue has "
            "gone missing, so they only know the title."
        ),
        topical_brief=(
            "They decide to work out what they can from the idea that a "
            "double slit in time is a single slit in space that is open at "
            "two different moments."
        ),
        props=["A whiteboard and markers."],
        personae=[
            Persona(
                name="Richard Feynman",
                epithet="quantum mechanics and path integrals",
                speaking_label="FEYNMAN",
            ),
            Persona(
                name="Emmy Noether",
                epithet="symmetries and conservation laws",
                speaking_label="NOETHER",
            ),
        ],
        opening_direction=(
            "FEYNMAN (taking the marker and walking to the whiteboard) Let's "
            "write down the free-space wavefunction of the photons going "
            "through the slit at different times..."
        ),
        formatting_directives=[
            "Use $$ and $ to delimit mathematical notation in the response."
        ],
    )


TIMESLIT_REPLIES = [
    # opening exchange
    "FEYNMAN (writing on the whiteboard): Each opening contributes a plane "
    "wave, $\\Psi_1 = A_1 e^{i(kx - \\omega t_1)}$ and "
    "$\\Psi_2 = A_2 e^{i(kx - \\omega t_2)}$.\n\n"
    "NOETHER: The photon may pass at either moment, so add the two before "
    "squaring.",
    # after the equation-numbering nudge
    "FEYNMAN: You're right, that squaring step was careless. The modulus "
    "squared of the summed wave carries cross terms between the two openings.",
    # after the frequency-content nudge
    "FEYNMAN: Good instinct. A Fourier transform of the gate functions moves "
    "the analysis into the frequency domain.\n\n"
    "NOETHER: Then the spectrum, not the screen position, carries the fringes.",
    # after a continue
    "FEYNMAN (sketching): The cross term oscillates like "
    "$\\cos(\\omega\\,\\Delta t)$, so maxima recur every $2\\pi/\\Delta t$ "
    "along the frequency axis.",
    # after the finite-duration nudge
    "FEYNMAN: Opening each slit for a finite duration multiplies its "
    "spectrum by a sinc envelope.\n\n"
    "NOETHER: So the fringes sit under $\\mathrm{sinc}(\\omega T/2)$ factors.",
    # after a continue
    "NOETHER: Collecting the pieces, the distribution is the two envelope "
    "terms plus the oscillatory cross term.",
    # after the charting nudge
    "FEYNMAN: Sweep the delay on one axis and frequency on the other; a "
    "heatmap will show the fringe structure.",
    # after the programming nudge
    "FEYNMAN: Here is a short script using numpy and matplotlib to evaluate "
    "the distribution over the mesh and draw it.",
]

TIMESLIT_STEPS = [
    NudgeStep("nudge", "NOETHER: Number your equations next time; I think the squaring step went wrong."),
    NudgeStep("nudge", "NOETHER: The slits are separated in time, so perhaps look at the frequency content instead."),
    NudgeStep("continue"),
    NudgeStep("nudge", "NOETHER: Those were instantaneous openings. Let each opening last a finite time; that should broaden the spectrum."),
    NudgeStep("continue"),
    NudgeStep("nudge", "NOETHER: Can we chart this over delay and frequency so the fringes show?"),
    NudgeStep("nudge", "NOETHER: You are the programmer here. Python, please?"),
]


def timeslit_script() -> NudgeScript:
    return NudgeScript(steps=list(TIMESLIT_STEPS))


def timeslit_mock_entries() -> list[ScriptEntry]:
    return [ScriptEntry("*", reply) for reply in TIMESLIT_REPLIES]


@pytest.fixture()
def timeslit_mock():
    return script_mock(timeslit_mock_entries())


def write_corpus_file(path: Path, records: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path
