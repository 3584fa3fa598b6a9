"""Host command line: identifier issuance, session lifecycle, tally,
verification, serving the gateway, and simulation.

Every subcommand prints canonical JSON on stdout and exits nonzero on
error (the error, also canonical JSON, goes to stderr).
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .encoding import canonical_json, load_json
from .errors import CovoteError
from .eventlog import read_log_file
from .gateway import FileClock, WallClock, create_app
from .group import SystemRandomness
from .hashing import HashSuite
from .identifiers import issue_identifiers
from .ledger import Ledger, SessionConfig
from .sim import ScenarioConfig, run_scenario, sweep, sweep_csv
from .tally import tally_ledger, verify_transcript

LOG_OPTION = click.option(
    "--log",
    "log_path",
    envvar="COVOTE_LOG",
    required=True,
    type=click.Path(path_type=Path),
    help="Event log file (env: COVOTE_LOG).",
)


def emit(doc) -> None:
    click.echo(canonical_json(doc).decode())


def fail(exc: Exception) -> None:
    code = exc.code if isinstance(exc, CovoteError) else type(exc).__name__
    click.echo(
        canonical_json({"error": {"code": code, "message": str(exc)}}).decode(), err=True
    )
    sys.exit(1)


@click.group()
def main() -> None:
    """Collectively secure voting host tools."""


@main.command()
@click.option("--count", type=int, required=True, help="Number of identifiers to issue.")
@click.option(
    "--identifiers-out",
    type=click.Path(path_type=Path),
    required=True,
    help="Host-only file receiving the private identifiers.",
)
@click.option("--hash-algorithm", default="sha-256", show_default=True)
def issue(count: int, identifiers_out: Path, hash_algorithm: str) -> None:
    """Issue secret identifiers; prints the public eligibility set S."""
    try:
        suite = HashSuite(hash_algorithm=hash_algorithm)
        batch = issue_identifiers(count, SystemRandomness(), suite)
    except Exception as exc:
        fail(exc)
    identifiers_out.write_text(
        json.dumps({"identifiers": [i.hex() for i in batch.identifiers]}, indent=2)
    )
    os.chmod(identifiers_out, 0o600)
    emit({"count": count, "eligibility": sorted(d.hex() for d in batch.eligibility)})


@main.command("create-session")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="Session config JSON, including the eligibility set.",
)
@LOG_OPTION
def create_session(config_path: Path, log_path: Path) -> None:
    """Create the session ledger from a config file."""
    try:
        doc = load_json(config_path.read_text())
        config = SessionConfig.from_json(doc)
        eligibility = frozenset(bytes.fromhex(d) for d in doc["eligibility"])
        ledger = Ledger.create(config, eligibility, path=log_path)
    except Exception as exc:
        fail(exc)
    emit(
        {
            "session_id": config.session_id,
            "eligible": len(eligibility),
            "phase": ledger.state.phase,
            "chain_head": ledger.head.hex(),
        }
    )


@main.command()
@LOG_OPTION
@click.option("--now", type=int, required=True, help="Logical freeze time (>= t_close).")
def freeze(log_path: Path, now: int) -> None:
    """Freeze the holder set and resolve the threshold."""
    try:
        ledger = Ledger.open(log_path)
        n, t = ledger.freeze_holder_set(now)
    except Exception as exc:
        fail(exc)
    emit({"n": n, "t": t, "chain_head": ledger.head.hex()})


@main.command()
@LOG_OPTION
@click.option("--rule", default=None, help="Override the format's default tallying rule.")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write transcript here.")
def tally(log_path: Path, rule: str | None, out: Path | None) -> None:
    """Reconstruct, decrypt, validate, and tally; prints the transcript."""
    try:
        ledger = Ledger.open(log_path)
        transcript = tally_ledger(ledger, rule=rule)
    except Exception as exc:
        fail(exc)
    if out is not None:
        out.write_bytes(canonical_json(transcript))
    emit(transcript)


@main.command()
@LOG_OPTION
@click.option(
    "--transcript",
    "transcript_path",
    type=click.Path(exists=True, path_type=Path),
    required=True,
)
def verify(log_path: Path, transcript_path: Path) -> None:
    """Re-derive the transcript from the log and compare every field."""
    try:
        transcript = load_json(transcript_path.read_text())
        result = verify_transcript(transcript, read_log_file(log_path))
    except Exception as exc:
        fail(exc)
    emit({"ok": result.ok, "diffs": list(result.diffs)})
    if not result.ok:
        sys.exit(1)


@main.command()
@LOG_OPTION
@click.option("--now", type=int, required=True, help="Logical settle time (> release_deadline).")
def settle(log_path: Path, now: int) -> None:
    """Pay out deposits and rewards after the release deadline."""
    try:
        ledger = Ledger.open(log_path)
        payouts = ledger.settle_incentives(now)
    except Exception as exc:
        fail(exc)
    settlement = ledger.state.settlement
    emit(
        {
            "payouts": {str(i): v for i, v in sorted(payouts.items())},
            "forfeits": {str(i): v for i, v in sorted(settlement.forfeits.items())},
            "chain_head": ledger.head.hex(),
        }
    )


@main.command()
@LOG_OPTION
def status(log_path: Path) -> None:
    """Current session state summary."""
    try:
        ledger = Ledger.open(log_path)
    except Exception as exc:
        fail(exc)
    state = ledger.state
    emit(
        {
            "session_id": state.config.session_id,
            "phase": state.phase,
            "clock": state.clock,
            "holders": len(state.holders),
            "ballots": len(state.ballots),
            "valid_releases": len(state.valid_releases()),
            "frozen": None if state.frozen is None else {"n": state.frozen[0], "t": state.frozen[1]},
            "chain_head": ledger.head.hex(),
        }
    )


@main.command()
@LOG_OPTION
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--epoch", type=float, default=None, help="Unix time mapped to logical tick 0.")
@click.option("--tick-seconds", type=float, default=1.0, show_default=True)
@click.option(
    "--clock-file",
    type=click.Path(path_type=Path),
    default=None,
    help="Read ticks from this file instead of the wall clock.",
)
def serve(
    log_path: Path,
    host: str,
    port: int,
    epoch: float | None,
    tick_seconds: float,
    clock_file: Path | None,
) -> None:
    """Run the proxy gateway over the session log."""
    import time

    import uvicorn

    try:
        ledger = Ledger.open(log_path)
        if clock_file is not None:
            clock = FileClock(clock_file)
        else:
            clock = WallClock(
                epoch_unix=epoch if epoch is not None else time.time(),
                seconds_per_tick=tick_seconds,
            )
        app = create_app(ledger, clock)
    except Exception as exc:
        fail(exc)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="Scenario config JSON.",
)
@click.option("--seed", default="0", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write report here.")
def simulate(config_path: Path, seed: str, out: Path | None) -> None:
    """Run one seeded scenario through the full protocol."""
    try:
        config = ScenarioConfig.from_json(load_json(config_path.read_text()))
        report = run_scenario(config, seed=seed)
    except Exception as exc:
        fail(exc)
    doc = report.to_json()
    if out is not None:
        out.write_bytes(canonical_json(doc))
    emit(doc)


@main.command("sweep")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="Scenario config JSON with a 'sweep' section.",
)
@click.option("--seed", default="0", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write CSV here.")
def sweep_cmd(config_path: Path, seed: str, out: Path | None) -> None:
    """Monte-Carlo success-rate grid over (deposit, reward, phi)."""
    try:
        doc = load_json(config_path.read_text())
        grid = doc.get("sweep", {})
        config = ScenarioConfig.from_json(doc)
        rows = sweep(
            config,
            deposits=grid.get("deposits", [config.deposit]),
            rewards=grid.get("rewards", [config.reward]),
            fractions=grid.get("fractions", [0.5]),
            runs=grid.get("runs", 100),
            seed=seed,
        )
    except Exception as exc:
        fail(exc)
    csv = sweep_csv(rows)
    if out is not None:
        out.write_text(csv)
    click.echo(csv, nl=False)


if __name__ == "__main__":
    main()
