"""Command line front end: scene generation, single runs, replay, evaluation."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import evaluation
from .gaze import load_gaze_log, simulate_gaze
from .parsing import default_lexicon, load_lexicon, parse as parse_utterance
from .pipeline import (PipelineConfig, config_from_dict, replay as replay_session,
                       run_pipeline, save_session)
from .render import render
from .scene import generate_scene, load_scene, save_scene


def _load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return config_from_dict(json.loads(Path(path).read_text()))


@click.group()
def main():
    """Desk-scale multimodal handover simulator."""


@main.command("gen-scene")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--objects", "object_count", type=int, default=9, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def gen_scene(seed, object_count, out):
    """Generate a random tabletop scene and write it as JSON."""
    scene = generate_scene(seed, object_count)
    save_scene(scene, out)
    click.echo(f"wrote {out}: {len(scene.objects)} objects "
               f"({', '.join(o.id for o in scene.objects)})")


@main.command()
@click.option("--sentence", required=True)
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True))
def parse(sentence, lexicon_path):
    """Parse a command into its (object, part, holder) triple."""
    lex = load_lexicon(lexicon_path) if lexicon_path else default_lexicon()
    try:
        cmd = parse_utterance(sentence, lex)
    except Exception as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps({"object": cmd.object_phrase,
                           "part": cmd.part,
                           "holder": cmd.holder,
                           "low_confidence": cmd.low_confidence}))


@main.command()
@click.option("--scene", "scene_path", type=click.Path(exists=True), required=True)
@click.option("--gaze-log", type=click.Path(exists=True),
              help="Replayable gaze frame log; omit to synthesize gaze at the target.")
@click.option("--look-at", help="Object id to synthesize gaze toward.")
@click.option("--say", required=True, help="The spoken command.")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), help="Session file to write.")
def run(scene_path, gaze_log, look_at, say, config_path, seed, out):
    """Run the full pipeline on a scene and report per-stage results."""
    scene = load_scene(scene_path)
    cfg = _load_config(config_path)
    if seed:
        from dataclasses import replace as dc_replace
        cfg = dc_replace(cfg, seed=seed)
    if gaze_log:
        frames = load_gaze_log(gaze_log)
    else:
        target_id = look_at or scene.objects[0].id
        r = render(scene, cfg.camera())
        if target_id not in r.boxes:
            click.echo(f"object {target_id!r} not visible", err=True)
            sys.exit(1)
        u0, v0, u1, v1 = r.boxes[target_id]
        frames = simulate_gaze(((u0 + u1) / 2, (v0 + v1) / 2), cfg.monitor(),
                               cfg.head(), noise_deg=0.2, n=20, seed=cfg.seed)
    session = run_pipeline(scene, frames, say, cfg)
    click.echo(f"status: {session.status}")
    if session.status == "failed":
        click.echo(f"failed at {session.failed_stage}: {session.failure_reason}")
    if session.selection:
        click.echo(f"selected: {session.selection.object_id}")
    if session.grasp_plan:
        g = session.grasp_plan.best
        click.echo(f"grasp: width {g.width * 100:.1f} cm, stability "
                   f"{g.stability:.3f}, region {session.grasp_plan.region}")
    if session.motion:
        click.echo(f"motion: approach {len(session.motion.approach)} samples, "
                   f"deliver {len(session.motion.deliver)} samples")
    for stage, dt in session.timings.items():
        click.echo(f"  {stage:>10}: {dt * 1000:8.1f} ms")
    if out:
        save_session(session, out)
        click.echo(f"session written to {out}")


@main.command()
@click.argument("session_file", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="Override config; the result becomes a derived session.")
def replay(session_file, config_path):
    """Re-run a recorded session and verify byte-stable stage outputs."""
    override = _load_config(config_path) if config_path else None
    result = replay_session(session_file, config_override=override)
    if result.derived:
        click.echo(f"derived session re-executed: status {result.session.status}")
    else:
        click.echo(f"replay status: {result.session.status}; byte-identical "
                   f"stage outputs: {result.byte_identical}")
        if not result.byte_identical:
            sys.exit(1)


def _emit_report(report, json_out):
    if json_out:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        click.echo(report.render_text())


@main.command("eval-selection")
@click.option("--scenes", "trials", type=int, default=200, show_default=True,
              help="Trials per arm.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--noise-deg", type=float, default=0.3, show_default=True)
@click.option("--arms", default="gaze,language,both", show_default=True)
@click.option("--json", "json_out", is_flag=True)
def eval_selection(trials, seed, noise_deg, arms, json_out):
    """Three-arm selection accuracy with the dominance check."""
    report = evaluation.selection_suite(
        trials=trials, seed=seed, noise_deg=noise_deg,
        arms=tuple(a.strip() for a in arms.split(",") if a.strip()))
    _emit_report(report, json_out)


@main.command("eval-gap")
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "json_out", is_flag=True)
def eval_gap(trials, seed, json_out):
    """Identical-pair separation thresholds per size class."""
    _emit_report(evaluation.gap_suite(trials=trials, seed=seed), json_out)


@main.command("eval-gaze")
@click.option("--sessions", type=int, default=300, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--noise-deg", type=float, default=1.5, show_default=True)
@click.option("--json", "json_out", is_flag=True)
def eval_gaze(sessions, seed, noise_deg, json_out):
    """Gaze-only SR / IoU / failure-shift metrics."""
    _emit_report(evaluation.gaze_suite(sessions=sessions, seed=seed,
                                       noise_deg=noise_deg), json_out)


@main.command("eval-grasp")
@click.option("--scenes", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "json_out", is_flag=True)
def eval_grasp(scenes, seed, json_out):
    """Region satisfaction, standard-region avoidance, stability grid."""
    _emit_report(evaluation.grasp_suite(scenes=scenes, seed=seed), json_out)


@main.command("eval-motion")
@click.option("--targets", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "json_out", is_flag=True)
def eval_motion(targets, seed, json_out):
    """Attractor convergence and trajectory validity."""
    _emit_report(evaluation.motion_suite(targets=targets, seed=seed), json_out)


@main.command("eval-timing")
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "json_out", is_flag=True)
def eval_timing(runs, seed, json_out):
    """Per-stage wall-clock breakdown over full runs."""
    _emit_report(evaluation.timing_suite(runs=runs, seed=seed), json_out)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8732, show_default=True)
def serve(host, port):
    """Start the HTTP + WebSocket service for the operator console."""
    from .service import serve as run_server
    click.echo(f"serving on http://{host}:{port}")
    run_server(host, port)


if __name__ == "__main__":
    main()
