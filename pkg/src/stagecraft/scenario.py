"""Guided scenario sessions with simulated personae.

A scenario stages a cast of personae with a setting, a minimal topical
brief, props, and an opening stage direction; the operator then steers the
run with in-character nudges and the ``...`` continuation sentinel until a
suitable stopping point. The engine resends the full turn history on every
request, so any stateless chat backend works.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ._fsio import write_text_atomic
from .errors import GatewayError, SessionStopped
from .gateway import Backend, ChatMessage, ChatRequest, complete

CONTINUATION_SENTINEL = "..."

OPERATOR = "operator"
MODEL = "model"

ACTIVE = "active"
STOPPED = "stopped"


@dataclass(frozen=True)
class Persona:
    name: str
    epithet: str  # one-line expertise description
    speaking_label: str  # uppercase surname used in the stage script


@dataclass
class ScenarioSpec:
    title: str
    setting: str
    topical_brief: str = ""
    props: list[str] = field(default_factory=list)
    personae: list[Persona] = field(default_factory=list)
    opening_direction: str = ""
    formatting_directives: list[str] = field(default_factory=list)


def validate_spec(spec: ScenarioSpec) -> None:
    if not spec.personae:
        raise ValueError("scenario needs at least one persona")
    labels = [p.speaking_label for p in spec.personae]
    if any(not label for label in labels):
        raise ValueError("every persona needs a speaking_label")
    if len(set(labels)) != len(labels):
        raise ValueError("speaking labels must be unique")
    if not spec.setting.strip():
        raise ValueError("scenario needs a setting")
    if not any(label in spec.opening_direction for label in labels):
        raise ValueError("opening_direction must name a persona's speaking_label")


@dataclass
class Turn:
    index: int
    origin: str  # "operator" | "model"
    text: str
    speaker_labels: list[str] = field(default_factory=list)


@dataclass
class Session:
    spec: ScenarioSpec
    turns: list[Turn] = field(default_factory=list)
    status: str = ACTIVE
    note: str | None = None
    continue_suggested: bool = False
    snapshot_path: Path | None = None


@dataclass
class NudgeStep:
    kind: str  # "nudge" | "continue" | "stop"
    text: str = ""


@dataclass
class NudgeScript:
    steps: list[NudgeStep] = field(default_factory=list)


def validate_script(script: NudgeScript) -> None:
    for i, step in enumerate(script.steps):
        if step.kind not in ("nudge", "continue", "stop"):
            raise ValueError(f"unknown step kind {step.kind!r}")
        if step.kind == "nudge" and not step.text.strip():
            raise ValueError("nudge steps need text")
        if step.kind == "stop" and i != len(script.steps) - 1:
            raise ValueError("a stop step must be last")


@dataclass
class ScenarioConfig:
    model: str = "gpt-4"
    temperature: float = 0.7  # dialog stays creative; adjudication calls do not
    max_tokens: int = 1024


def compose_scenario_text(spec: ScenarioSpec) -> str:
    """Render the opening prompt; a pure, byte-stable function of the spec."""
    scenario_line = f"Scenario: {spec.setting}"
    if spec.topical_brief.strip():
        scenario_line += f" {spec.topical_brief.strip()}"
    lines = [scenario_line]
    if spec.props:
        lines.append("Props: " + " ".join(spec.props))
    lines.extend(spec.formatting_directives)
    lines.append(spec.opening_direction)
    return "\n".join(lines)


def compose_scenario(spec: ScenarioSpec, config: ScenarioConfig | None = None) -> ChatRequest:
    validate_spec(spec)
    config = config or ScenarioConfig()
    return ChatRequest(
        model=config.model,
        messages=[ChatMessage("user", compose_scenario_text(spec))],
        temperature=config.temperature,
        max_tokens=config.max_tokens,
    )


def _detect_labels(text: str, spec: ScenarioSpec) -> list[str]:
    # A line starting with a known speaking label followed by ":" or "("
    # attributes that segment; unattributed text belongs to the previous
    # speaker, so only explicit openings are collected.
    found: list[str] = []
    patterns = [
        (p.speaking_label, re.compile(rf"^\s*{re.escape(p.speaking_label)}\s*[:(]"))
        for p in spec.personae
    ]
    for line in text.splitlines():
        for label, pattern in patterns:
            if pattern.match(line) and label not in found:
                found.append(label)
    return found


def _snapshot(session: Session) -> None:
    if session.snapshot_path is not None:
        write_text_atomic(session.snapshot_path, export_transcript(session, "structured"))


def _append(session: Session, origin: str, text: str, labels: list[str] | None = None) -> Turn:
    turn = Turn(index=len(session.turns), origin=origin, text=text, speaker_labels=labels or [])
    session.turns.append(turn)
    _snapshot(session)
    return turn


def start_session(
    spec: ScenarioSpec,
    gateway: Backend,
    config: ScenarioConfig | None = None,
    snapshot_path=None,
) -> Session:
    """Send the composed scenario and record the opening exchange.

    A gateway failure still returns the session (stopped, with a note) so
    the operator can inspect what was sent.
    """
    config = config or ScenarioConfig()
    request = compose_scenario(spec, config)
    session = Session(
        spec=spec,
        snapshot_path=Path(snapshot_path) if snapshot_path is not None else None,
    )
    _append(session, OPERATOR, request.messages[0].content)
    try:
        reply = complete(request, gateway)
    except GatewayError as err:
        session.status = STOPPED
        session.note = str(err)
        _snapshot(session)
        return session
    _append(session, MODEL, reply.content, _detect_labels(reply.content, spec))
    session.continue_suggested = reply.finish_reason == "length"
    _snapshot(session)
    return session


def _history_messages(session: Session, config: ScenarioConfig) -> ChatRequest:
    messages = [
        ChatMessage("user" if t.origin == OPERATOR else "assistant", t.text)
        for t in session.turns
    ]
    return ChatRequest(
        model=config.model,
        messages=messages,
        temperature=config.temperature,
        max_tokens=config.max_tokens,
    )


def nudge(
    session: Session,
    directive: str,
    gateway: Backend,
    config: ScenarioConfig | None = None,
) -> Turn:
    """Append an operator stage direction and the model's reply turn."""
    if session.status != ACTIVE:
        raise SessionStopped("session is stopped")
    if not directive.strip():
        raise ValueError("directive must be non-empty")
    config = config or ScenarioConfig()
    _append(session, OPERATOR, directive)
    try:
        reply = complete(_history_messages(session, config), gateway)
    except GatewayError as err:
        session.status = STOPPED
        session.note = str(err)
        _snapshot(session)
        raise
    turn = _append(session, MODEL, reply.content, _detect_labels(reply.content, session.spec))
    session.continue_suggested = reply.finish_reason == "length"
    _snapshot(session)
    return turn


def continue_session(
    session: Session,
    gateway: Backend,
    config: ScenarioConfig | None = None,
) -> Turn:
    """Move the simulation along with the ``...`` sentinel.

    An empty or whitespace reply is taken as the stopping point and the
    session is stopped.
    """
    turn = nudge(session, CONTINUATION_SENTINEL, gateway, config)
    if not turn.text.strip():
        session.status = STOPPED
        _snapshot(session)
    return turn


def stop_session(session: Session) -> Session:
    session.status = STOPPED
    _snapshot(session)
    return session


def run_script(
    spec: ScenarioSpec,
    script: NudgeScript,
    gateway: Backend,
    config: ScenarioConfig | None = None,
    snapshot_path=None,
) -> Session:
    """Start a session and apply scripted steps until a stop or the script ends."""
    validate_script(script)
    session = start_session(spec, gateway, config, snapshot_path)
    if session.status != ACTIVE:
        return session
    for step in script.steps:
        if step.kind == "stop":
            stop_session(session)
            break
        try:
            if step.kind == "nudge":
                nudge(session, step.text, gateway, config)
            else:
                continue_session(session, gateway, config)
        except GatewayError:
            break  # session already stopped and annotated
        if session.status != ACTIVE:
            break
    return session


def export_transcript(session: Session, format: str = "plain") -> str:
    """Transcript text: PROMPT/RESPONSE blocks, or machine-readable JSON."""
    if format == "plain":
        blocks = [
            ("PROMPT:" if t.origin == OPERATOR else "RESPONSE:") + "\n" + t.text
            for t in session.turns
        ]
        return "\n\n".join(blocks) + "\n"
    if format == "structured":
        payload = {
            "status": session.status,
            "turns": [
                {
                    "index": t.index,
                    "origin": t.origin,
                    "text": t.text,
                    "speaker_labels": list(t.speaker_labels),
                }
                for t in session.turns
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    raise ValueError(f"unknown transcript format {format!r}")


def import_transcript(text: str) -> list[Turn]:
    """Parse a structured export back into its turn list."""
    payload = json.loads(text)
    return [
        Turn(
            index=t["index"],
            origin=t["origin"],
            text=t["text"],
            speaker_labels=list(t["speaker_labels"]),
        )
        for t in payload["turns"]
    ]


@dataclass
class PersonaSuggestion:
    personae: list[Persona]
    parse_failure: bool = False


# A persona line looks like "Firstname Lastname: one-line description".
_PERSONA_LINE_RE = re.compile(
    r"^\s*(?:\d+[.)]\s*)?"
    r"([A-Z][\w.'\-]*(?:\s+[A-Z][\w.'\-]*){1,3})"
    r":\s+(\S.*)$"
)


def suggest_personae(
    criteria: str,
    gateway: Backend,
    expected: int = 2,
    config: ScenarioConfig | None = None,
) -> PersonaSuggestion:
    """Ask the model for personae matching the criteria and parse the reply.

    Fewer parsed personae than requested is not an error: the partial list
    comes back flagged so the operator can re-prompt.
    """
    if not criteria.strip():
        raise ValueError("criteria must be non-empty")
    config = config or ScenarioConfig()
    request = ChatRequest(
        model=config.model,
        messages=[ChatMessage("user", criteria)],
        temperature=config.temperature,
        max_tokens=config.max_tokens,
    )
    reply = complete(request, gateway)
    personae: list[Persona] = []
    for line in reply.content.splitlines():
        m = _PERSONA_LINE_RE.match(line)
        if not m:
            continue
        name = m.group(1).strip()
        epithet = m.group(2).strip()
        surname = re.sub(r"[^A-Za-z\-]", "", name.split()[-1])
        if not surname:
            continue
        personae.append(Persona(name=name, epithet=epithet, speaking_label=surname.upper()))
    return PersonaSuggestion(personae=personae, parse_failure=len(personae) < expected)


def parse_scenario_spec(data: dict) -> ScenarioSpec:
    """Build a ScenarioSpec from plain dict data (config file or request body)."""
    personae = [
        Persona(
            name=p["name"],
            epithet=p.get("epithet", ""),
            speaking_label=p["speaking_label"],
        )
        for p in data.get("personae", [])
    ]
    return ScenarioSpec(
        title=data.get("title", ""),
        setting=data.get("setting", ""),
        topical_brief=data.get("topical_brief", ""),
        props=list(data.get("props", [])),
        personae=personae,
        opening_direction=data.get("opening_direction", ""),
        formatting_directives=list(data.get("formatting_directives", [])),
    )


def parse_nudge_script(data: dict) -> NudgeScript:
    steps = [
        NudgeStep(kind=s["kind"], text=s.get("text", ""))
        for s in data.get("steps", [])
    ]
    script = NudgeScript(steps=steps)
    validate_script(script)
    return script


def load_scenario_file(path) -> tuple[ScenarioSpec, NudgeScript]:
    """Load a scenario script file (JSON: spec fields plus an optional steps list)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return parse_scenario_spec(data), parse_nudge_script(data)
