"""Command-line entry point.

Selectors pick the wiring: ``--backend live`` talks to the configured chat
API while ``--backend mock:script.json`` replays a scripted mock;
``--provider live`` / ``--provider fixture:corpus.jsonl`` do the same for
search. Mock/fixture runs never touch the network. File outputs are written
atomically (temp file + rename).
"""

from __future__ import annotations

import functools
import json
import math
import sys
import time
from pathlib import Path

import click

from ._fsio import write_text_atomic
from .deconfab import PipelineConfig, deconfabulate, report_to_dict, verify_claim, Claim
from .errors import StagecraftError
from .evidence import FixtureProvider, WebSearchProvider
from .gateway import HttpBackend, load_mock_script
from .memory import MemoryStore
from .physics import SlitConfig, evaluate_grid, fringe_spacing, render_outputs
from .scenario import (
    ScenarioConfig,
    continue_session,
    export_transcript,
    load_scenario_file,
    nudge,
    run_script,
    start_session,
    stop_session,
)
from .service import create_app
from .trials import TrialConfig, format_table, load_fixture, run_trials


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def build_backend(selector: str):
    if selector.startswith("mock:"):
        return load_mock_script(selector[len("mock:"):])
    if selector == "live":
        return HttpBackend.from_env()
    raise click.UsageError(f"backend must be 'live' or 'mock:PATH', got {selector!r}")


def build_provider(selector: str):
    if selector.startswith("fixture:"):
        return FixtureProvider.from_file(selector[len("fixture:"):])
    if selector == "live":
        import os

        endpoint = os.environ.get("STAGECRAFT_SEARCH_ENDPOINT")
        if not endpoint:
            raise click.UsageError("live provider needs STAGECRAFT_SEARCH_ENDPOINT")
        return WebSearchProvider(endpoint, api_key=os.environ.get("STAGECRAFT_SEARCH_KEY"))
    raise click.UsageError(f"provider must be 'live' or 'fixture:PATH', got {selector!r}")


def domain_errors(fn):
    """Domain failures exit 1 with a message; usage errors keep click's exit 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (StagecraftError, FileNotFoundError, ValueError, json.JSONDecodeError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--backend", "backend_selector", default=None, help="live or mock:SCRIPT.json")
@click.option("--provider", "provider_selector", default=None, help="live or fixture:CORPUS.jsonl")
@click.option("--memory", "memory_path", default=None, help="memory store file (JSON lines)")
@click.option("--config", "config_path", default=None, help="JSON config file with default selectors")
@click.pass_context
def main(ctx, backend_selector, provider_selector, memory_path, config_path):
    """Claim verification, guided persona scenarios, and the time-slit grid oracle."""
    file_config = _load_config_file(config_path)
    ctx.obj = {
        "backend": backend_selector or file_config.get("backend"),
        "provider": provider_selector or file_config.get("provider"),
        "memory": memory_path or file_config.get("memory"),
    }


def _require(ctx, key: str) -> str:
    value = ctx.obj.get(key)
    if not value:
        raise click.UsageError(f"--{key} is required for this command")
    return value


@main.command("deconfab")
@click.option("--input", "input_path", required=True, help="file with the response to verify")
@click.option("--report", "report_path", required=True, help="where to write the JSON report")
@click.pass_context
@domain_errors
def deconfab_cmd(ctx, input_path, report_path):
    """Verify a response, drop unsupported claims, rewrite the survivors."""
    backend = build_backend(_require(ctx, "backend"))
    provider = build_provider(_require(ctx, "provider"))
    memory = MemoryStore.load(ctx.obj["memory"]) if ctx.obj.get("memory") else None
    text = Path(input_path).read_text(encoding="utf-8")
    started = time.monotonic()
    report = deconfabulate(text, backend, provider, PipelineConfig(), memory=memory)
    payload = report_to_dict(report)
    payload["timing"] = {"seconds": round(time.monotonic() - started, 3)}
    write_text_atomic(report_path, json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    kept = len(report.claims) - len(report.dropped)
    click.echo(f"verified {len(report.claims)} claims: kept {kept}, dropped {len(report.dropped)}")


@main.command("verify-claim")
@click.option("--claim", "claim_text", required=True, help="one atomic claim to adjudicate")
@click.pass_context
@domain_errors
def verify_claim_cmd(ctx, claim_text):
    """Adjudicate a single claim and print its verdict."""
    backend = build_backend(_require(ctx, "backend"))
    provider = build_provider(_require(ctx, "provider"))
    verified = verify_claim(Claim(id="cli.c0", assertion_id="cli", text=claim_text), backend, provider)
    click.echo(json.dumps(
        {
            "label": verified.verdict.label,
            "confidence_cue": verified.verdict.confidence_cue,
            "evidence_urls": [h.url for h in verified.evidence.snippets],
        },
        indent=2,
        sort_keys=True,
    ))


@main.command("trial")
@click.option("--fixture", "fixture_path", required=True)
@click.option("--n", "n", default=10, show_default=True)
@click.option("--out", "out_path", default=None, help="write the table here instead of stdout")
@click.option("--dump-dialogs", "dump_dir", default=None, help="directory for raw trial dialogs")
@click.pass_context
@domain_errors
def trial_cmd(ctx, fixture_path, n, out_path, dump_dir):
    """Run repeated verdict trials over one claim/evidence fixture."""
    backend = build_backend(_require(ctx, "backend"))
    fixture = load_fixture(fixture_path)
    table = run_trials(fixture, n, backend, TrialConfig(), dump_dir=dump_dir)
    text = format_table(table)
    if out_path:
        write_text_atomic(out_path, text)
    else:
        click.echo(text, nl=False)
    click.echo(f"detection_rate: {table.detection_rate}")


@main.group("scenario")
def scenario_group():
    """Guided persona scenario sessions."""


@scenario_group.command("run")
@click.option("--spec", "spec_path", required=True, help="scenario file (JSON)")
@click.option("--out", "out_path", required=True, help="transcript output file")
@click.option("--format", "format_", default="plain", type=click.Choice(["plain", "structured"]))
@click.pass_context
@domain_errors
def scenario_run_cmd(ctx, spec_path, out_path, format_):
    """Run a scenario's scripted steps and export the transcript."""
    backend = build_backend(_require(ctx, "backend"))
    spec, script = load_scenario_file(spec_path)
    session = run_script(spec, script, backend)
    write_text_atomic(out_path, export_transcript(session, format_))
    click.echo(f"{len(session.turns)} turns, status {session.status}")


@scenario_group.command("repl")
@click.option("--spec", "spec_path", required=True)
@click.pass_context
@domain_errors
def scenario_repl_cmd(ctx, spec_path):
    """Steer a scenario interactively: type nudges, '...' to continue, /stop to end."""
    backend = build_backend(_require(ctx, "backend"))
    spec, _ = load_scenario_file(spec_path)
    config = ScenarioConfig()
    session = start_session(spec, backend, config)
    for turn in session.turns:
        click.echo(f"[{turn.origin}] {turn.text}\n")
    while session.status == "active":
        try:
            line = click.prompt("nudge", default="", show_default=False)
        except (EOFError, click.Abort):
            break
        line = line.strip()
        if not line:
            continue
        if line == "/stop":
            stop_session(session)
            break
        reply = continue_session(session, backend, config) if line == "..." else nudge(
            session, line, backend, config
        )
        click.echo(f"[model] {reply.text}\n")
    click.echo(f"session {session.status} after {len(session.turns)} turns")


@main.group("physics")
def physics_group():
    """Double-slit-in-time numerical oracle."""


@physics_group.command("grid")
@click.option("--A1", "a1", default=1.0, show_default=True)
@click.option("--A2", "a2", default=1.0, show_default=True)
@click.option("--T1", "t_1", default=1.0, show_default=True)
@click.option("--T2", "t_2", default=1.0, show_default=True)
@click.option("--k", "k", default=2 * math.pi, show_default=True)
@click.option("--x", "x", default=0.0, show_default=True)
@click.option("--delay-range", "delay_range", default="-10:10:500", show_default=True)
@click.option("--freq-range", "freq_range", default="-10:10:500", show_default=True)
@click.option("--csv", "csv_path", default=None, help="matrix text output path")
@click.option("--image", "image_path", default=None, help="PPM heatmap output path")
@click.option("--fringe-at", "fringe_at", default=None, type=float,
              help="also report the fringe spacing at this delay")
@domain_errors
def physics_grid_cmd(a1, a2, t_1, t_2, k, x, delay_range, freq_range, csv_path, image_path, fringe_at):
    """Evaluate P over a (delay, frequency) mesh and write the artifacts."""

    def parse_range(raw):
        lo, hi, count = raw.split(":")
        return float(lo), float(hi), int(count)

    cfg = SlitConfig(A1=a1, A2=a2, T1=t_1, T2=t_2, k=k, x=x)
    d_lo, d_hi, d_n = parse_range(delay_range)
    f_lo, f_hi, f_n = parse_range(freq_range)
    grid = evaluate_grid(cfg, d_lo, d_hi, f_lo, f_hi, d_n, f_n)
    written = render_outputs(grid, csv_path=csv_path, image_path=image_path)
    for kind, path in written.items():
        click.echo(f"wrote {kind}: {path}")
    if fringe_at is not None:
        click.echo(f"fringe spacing at delay {fringe_at}: {fringe_spacing(grid, fringe_at):.6f}")
    if not written and fringe_at is None:
        click.echo(f"grid {grid.values.shape[0]}x{grid.values.shape[1]} evaluated (no outputs requested)")


@main.group("memory")
def memory_group():
    """Validated-claim memory store."""


@memory_group.command("search")
@click.option("--q", "query", required=True)
@click.option("--k", "k", default=5, show_default=True)
@click.pass_context
@domain_errors
def memory_search_cmd(ctx, query, k):
    """Rank stored claims against a query."""
    store = MemoryStore.load(_require(ctx, "memory"))
    for record, score in store.search(query, k):
        click.echo(f"{score:.4f}\t{record.claim_text}")


@main.command("serve")
@click.option("--addr", default="127.0.0.1:8080", show_default=True)
@click.option("--token", default=None, help="optional static bearer token")
@click.pass_context
@domain_errors
def serve_cmd(ctx, addr, token):
    """Run the HTTP service."""
    import uvicorn

    backend = build_backend(_require(ctx, "backend")) if ctx.obj.get("backend") else None
    provider = build_provider(ctx.obj["provider"]) if ctx.obj.get("provider") else None
    memory = MemoryStore.load(ctx.obj["memory"]) if ctx.obj.get("memory") else None
    app = create_app(backend=backend, provider=provider, memory=memory, token=token)
    host, _, port = addr.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or "8080"), log_level="warning")


if __name__ == "__main__":
    main()
