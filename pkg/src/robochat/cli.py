"""Operator entry points: serve, replay, eval, sweep, map-check."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import (
    SessionConfig,
    default_homophones_path,
    default_map_path,
)
from .decoder import Lexicon, load_corpus
from .metrics import RecordLog, compute_metrics, load_records
from .pipeline import SessionRuntime, replay as run_replay, vcua_sweep
from .transcriber import load_homophones
from .world import MapError, WorldMap


@click.group()
def main():
    """Voice- and text-driven command pipeline for a simulated robot."""


def _load_config(config_path: str | None, **overrides) -> SessionConfig:
    if config_path:
        cfg = SessionConfig.load(config_path)
    else:
        cfg = SessionConfig()
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if not cfg.map_path:
        cfg.map_path = default_map_path()
    return cfg


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="YAML session config.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--map", "map_path", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice(["text", "voice", "dual"]),
              default=None)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory of built UI assets to serve at /.")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="JSONL interaction log destination.")
def serve(config_path, host, port, map_path, mode, static_dir, log_path):
    """Run the gateway (HTTP + WebSocket) over a live session."""
    import uvicorn

    from .gateway import create_app

    cfg = _load_config(config_path, map_path=map_path, mode=mode)
    log = RecordLog(log_path or cfg.log_path)
    runtime = SessionRuntime(cfg, log=log)
    runtime.start()
    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(runtime, static_dir=static_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        runtime.stop()


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.option("--mode", type=click.Choice(["text", "voice", "dual"]),
              default=None)
@click.option("--noise", "substitution_rate", type=float, default=None,
              help="Word substitution rate for the replay transcriber.")
@click.option("--deletion-rate", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--map", "map_path", type=click.Path(exists=True), default=None)
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Write the interaction log (JSONL) here.")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Write the metrics report (JSON) here.")
def replay(corpus, config_path, mode, substitution_rate, deletion_rate, seed,
           map_path, log_path, report_path):
    """Feed an annotated corpus through the full pipeline and score it."""
    cfg = _load_config(
        config_path, mode=mode, substitution_rate=substitution_rate,
        deletion_rate=deletion_rate, seed=seed, map_path=map_path)
    log = RecordLog(log_path) if log_path else None
    report = run_replay(corpus, cfg, log=log)
    if report_path:
        Path(report_path).write_text(json.dumps(report.to_dict(), indent=2),
                                     encoding="utf-8")
    click.echo(report.render_table())


@main.command("eval")
@click.argument("log", type=click.Path(exists=True))
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--require", "required", default="",
              help="Comma-separated metrics (vcua,nsr,oia,art) whose "
                   "denominator must be nonzero; exit 1 otherwise.")
def eval_cmd(log, report_path, required):
    """Recompute metrics from an interaction log."""
    records = load_records(log)
    report = compute_metrics(records)
    if report_path:
        Path(report_path).write_text(json.dumps(report.to_dict(), indent=2),
                                     encoding="utf-8")
    click.echo(report.render_table())
    missing = []
    for name in filter(None, (s.strip().lower() for s in required.split(","))):
        den_key = {"vcua": "vcua_den", "nsr": "nsr_den",
                   "oia": "oia_den", "art": "art_den"}.get(name)
        if den_key is None:
            raise click.BadParameter(f"unknown metric {name!r}")
        if report.counts[den_key] == 0:
            missing.append(name)
    if missing:
        click.echo(f"required metrics with zero denominator: "
                   f"{', '.join(missing)}", err=True)
        sys.exit(1)


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--map", "map_path", type=click.Path(exists=True), default=None)
@click.option("--rates", default="0,0.1,0.2,0.3", show_default=True,
              help="Comma-separated substitution rates.")
@click.option("--seeds", default=10, show_default=True, type=int,
              help="Seeds 0..N-1 per rate.")
@click.option("--homophones", "homophones_path", type=click.Path(exists=True),
              default=None)
@click.option("--report", "report_path", type=click.Path(), default=None)
def sweep(corpus, map_path, rates, seeds, homophones_path, report_path):
    """Decode-only vocal-accuracy sweep across noise levels."""
    rows = load_corpus(corpus)
    world_map = WorldMap.load(map_path or default_map_path())
    lexicon = Lexicon.from_map(world_map)
    homophones = load_homophones(homophones_path or default_homophones_path())
    rate_values = [float(r) for r in rates.split(",") if r.strip()]
    result = vcua_sweep(rows, lexicon, homophones, rates=rate_values,
                        seeds=range(seeds))
    if report_path:
        Path(report_path).write_text(json.dumps(result.to_dict(), indent=2),
                                     encoding="utf-8")
    click.echo(f"textual accuracy: {result.textual_pct:.2f} %")
    for level in result.levels:
        click.echo(f"rate {level.rate:.2f}: mean vocal accuracy "
                   f"{level.mean_vcua_pct:.2f} %")


@main.command("map-check")
@click.argument("map_file", type=click.Path(exists=True))
def map_check(map_file):
    """Validate a map file's structure and invariants."""
    try:
        world_map = WorldMap.load(map_file)
    except MapError as exc:
        click.echo(f"invalid map: {exc}", err=True)
        sys.exit(1)
    click.echo(
        f"{world_map.name}: {world_map.rows}x{world_map.cols} cells at "
        f"{world_map.resolution} m "
        f"({world_map.width_m:.0f}x{world_map.height_m:.0f} m), "
        f"{len(world_map.locations)} locations, "
        f"{len(world_map.objects)} objects — ok")


if __name__ == "__main__":
    main()
