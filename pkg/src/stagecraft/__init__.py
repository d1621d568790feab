"""Persona-dialog claim verification, guided scenario sessions, and a
double-slit-in-time numerical oracle."""

from .deconfab import (
    Assertion,
    Claim,
    DeconfabReport,
    PipelineConfig,
    VerifiedClaim,
    deconfabulate,
    verify_claim,
)
from .errors import StagecraftError
from .evidence import EvidenceBundle, FixtureProvider, RankedSite, SearchHit
from .gateway import ChatMessage, ChatRequest, ChatResponse, HttpBackend, MockBackend, complete, script_mock
from .memory import MemoryRecord, MemoryStore, new_record
from .physics import (
    DiffractionGrid,
    SlitConfig,
    delta_slit_probability,
    evaluate_grid,
    finite_slit_probability,
    fringe_spacing,
    sinc,
)
from .scenario import (
    NudgeScript,
    NudgeStep,
    Persona,
    ScenarioSpec,
    Session,
    Turn,
    continue_session,
    export_transcript,
    nudge,
    run_script,
    start_session,
)
from .trials import TrialFixture, TrialTable, format_table, run_trials
from .verdict import PersonaPair, Verdict, build_verdict_prompt, parse_verdict

__version__ = "0.1.0"

__all__ = [
    "Assertion",
    "ChatMessage",
    "ChatRequest",
    "ChatResponse",
    "Claim",
    "DeconfabReport",
    "DiffractionGrid",
    "EvidenceBundle",
    "FixtureProvider",
    "HttpBackend",
    "MemoryRecord",
    "MemoryStore",
    "MockBackend",
    "NudgeScript",
    "NudgeStep",
    "Persona",
    "PersonaPair",
    "PipelineConfig",
    "RankedSite",
    "ScenarioSpec",
    "SearchHit",
    "Session",
    "SlitConfig",
    "StagecraftError",
    "TrialFixture",
    "TrialTable",
    "Turn",
    "Verdict",
    "VerifiedClaim",
    "build_verdict_prompt",
    "complete",
    "continue_session",
    "deconfabulate",
    "delta_slit_probability",
    "evaluate_grid",
    "export_transcript",
    "finite_slit_probability",
    "format_table",
    "fringe_spacing",
    "new_record",
    "nudge",
    "parse_verdict",
    "run_script",
    "run_trials",
    "script_mock",
    "sinc",
    "start_session",
    "verify_claim",
]
