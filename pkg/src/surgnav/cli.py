"""Command-line entry point.

Subcommands: simulate, register, refine, guide, metrics, serve. All
thresholds are flags with a --config JSON override; explicit flags win.
Errors exit with distinct codes (2 parse, 3 degenerate landmarks, 4 empty
trace, 5 alignment rejected) and machine-readable JSON on stderr.
"""
from __future__ import annotations

import asyncio
import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import io
from .errors import ParseError, SurgnavError
from .geometry import PointCloud
from .guidance import ToolPose, guidance_frame, in_situ_overlay
from .icp import ScoreConfig, multiscale_refine, scale_schedule
from .landmarks import CANONICAL_LANDMARKS
from .metrics import (CONDITION_IN_SITU, CONDITION_TOOL_TRACKING, PairedSample,
                      collapse_medians, placement_metrics, wilcoxon_signed_rank)
from .phantom import SimConfig, digitized_landmarks, generate_phantom, simulate_insertion, simulate_trace
from .pipeline import PipelineConfig, run_registration
from .server import GuidanceService, frame_message, serve_guidance
from .tracing import TraceConfig


def _dump(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SurgnavError as exc:
            sys.stderr.write(json.dumps({"error": type(exc).__name__,
                                         "message": str(exc)}) + "\n")
            sys.exit(exc.exit_code)
    return wrapper


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return obj


def _pick(flag, config: dict, key: str, default):
    # Precedence: explicit flag > config file > built-in default.
    if flag is not None:
        return flag
    return config.get(key, default)


def _pipeline_config(config: dict, **flags) -> PipelineConfig:
    g = lambda key, default: _pick(flags.get(key), config, key, default)
    trace = TraceConfig(inlier_mm=g("inlier_mm", 10.0), removal_mm=g("removal_mm", 10.0),
                        reentry_mm=g("reentry_mm", 10.0), band_mm=g("band_mm", 3.0))
    score = ScoreConfig(close_mm=g("close_mm", 5.0),
                        fitness_weight=g("fitness_weight", 0.4),
                        rmse_weight=g("rmse_weight", 0.6),
                        min_fitness=g("min_fitness", 0.7),
                        max_rmse_mm=g("max_rmse_mm", 5.0))
    return PipelineConfig(trace=trace, score=score,
                          k_corr=g("k_corr", 3.0), coarse_mm=g("coarse_mm", 10.0),
                          fine_mm=g("fine_mm", 0.1), levels=int(g("levels", 15)))


threshold_options = [
    click.option("--inlier-mm", type=float, default=None, help="Trace inlier gate [10]"),
    click.option("--removal-mm", type=float, default=None, help="Fault removal radius [10]"),
    click.option("--reentry-mm", type=float, default=None, help="Re-entry hysteresis [10]"),
    click.option("--band-mm", type=float, default=None, help="Projection band [3]"),
    click.option("--close-mm", type=float, default=None, help="Close-pair radius [5]"),
    click.option("--fitness-weight", type=float, default=None, help="Score weight [0.4]"),
    click.option("--rmse-weight", type=float, default=None, help="Score weight [0.6]"),
    click.option("--min-fitness", type=float, default=None, help="Rejection gate [0.7]"),
    click.option("--max-rmse-mm", type=float, default=None, help="Rejection gate [5]"),
    click.option("--k-corr", type=float, default=None, help="Correspondence factor [3]"),
    click.option("--coarse-mm", type=float, default=None, help="Coarsest voxel [10]"),
    click.option("--fine-mm", type=float, default=None, help="Finest voxel [0.1]"),
    click.option("--levels", type=int, default=None, help="Scale count [15]"),
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="JSON config with the same keys (snake_case); flags win"),
]


def with_thresholds(fn):
    for opt in reversed(threshold_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Surgical-navigation registration, guidance, and metrics toolkit."""


@main.command()
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trace-noise", type=float, default=0.3, show_default=True)
@click.option("--landmark-noise", type=float, default=0.5, show_default=True)
@click.option("--liftoffs", type=int, default=3, show_default=True)
@click.option("--liftoff-height", type=float, default=25.0, show_default=True)
@click.option("--users", type=int, default=9, show_default=True,
              help="Simulated users for the placements file")
@click.option("--entry-sigma", type=float, default=1.5, show_default=True)
@click.option("--angle-sigma", type=float, default=2.0, show_default=True)
@click.option("--depth-sigma", type=float, default=2.0, show_default=True)
@handle_errors
def simulate(out_dir, seed, trace_noise, landmark_noise, liftoffs, liftoff_height,
             users, entry_sigma, angle_sigma, depth_sigma):
    """Generate a synthetic phantom dataset with known ground truth."""
    cfg = SimConfig(seed=seed, trace_noise_sigma=trace_noise,
                    landmark_noise_sigma=landmark_noise, liftoff_count=liftoffs,
                    liftoff_height=liftoff_height, insertion_entry_sigma=entry_sigma,
                    insertion_angle_sigma=angle_sigma, insertion_depth_sigma=depth_sigma)
    phantom = generate_phantom(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    io.write_ply(out / "surface.ply", phantom.surface)
    io.write_landmarks(out / "model_landmarks.json", phantom.landmarks)
    io.write_landmarks(out / "landmarks.json", digitized_landmarks(phantom, cfg))
    ids = [f"{side}{k + 1}" for side in ("R", "L") for k in range(6)]
    io.write_plans(out / "plans.json", phantom.plans, ids=ids)
    times, points = simulate_trace(phantom, cfg)
    io.write_trace(out / "trace.jsonl", times, points)
    _dump(io.transform_to_dict(phantom.true_pose), out / "true_pose.json")

    # Balanced within-subject placements: 6 plans per condition per user,
    # in-situ trials drawn with triple the perturbation magnitudes.
    rng = cfg.rng("insertion")
    worse = SimConfig(seed=seed, insertion_entry_sigma=3 * entry_sigma,
                      insertion_angle_sigma=3 * angle_sigma,
                      insertion_depth_sigma=3 * depth_sigma)
    trials = []
    for u in range(users):
        order = rng.permutation(12)
        for slot, plan_idx in enumerate(order):
            condition = CONDITION_TOOL_TRACKING if slot % 2 == 0 else CONDITION_IN_SITU
            trial_cfg = cfg if condition == CONDITION_TOOL_TRACKING else worse
            result, _ = simulate_insertion(phantom.plans[plan_idx], trial_cfg, rng=rng)
            trials.append({"plan_id": ids[plan_idx], "user": f"user{u + 1:02d}",
                           "condition": condition,
                           "placement": io.placement_to_dict(result),
                           "marking_time": round(float(rng.uniform(8, 25)), 2),
                           "insertion_time": round(float(rng.uniform(20, 60)), 2)})
    _dump(trials, out / "placements.json")
    click.echo(f"wrote phantom dataset to {out}")


@main.command()
@click.option("--surface", type=click.Path(), required=True, help="Model cloud (PLY with normals)")
@click.option("--model-landmarks", type=click.Path(), required=True)
@click.option("--landmarks", type=click.Path(), required=True, help="Digitised landmarks (patient frame)")
@click.option("--trace", type=click.Path(), required=True, help="Stylus stream (JSONL, patient frame)")
@click.option("--out", "out_path", type=click.Path(), default="transform.json", show_default=True)
@with_thresholds
@handle_errors
def register(surface, model_landmarks, landmarks, trace, out_path, config_path, **flags):
    """Run the full registration pipeline and write transform.json."""
    config = _pipeline_config(_load_config(config_path), **flags)
    model = io.read_ply(surface)
    if model.normals is None:
        raise ParseError(f"{surface}: model cloud must carry normals")
    model_lms = io.read_landmarks(model_landmarks)
    digitized = io.read_landmarks(landmarks)
    _, points = io.read_trace(trace)
    outcome = run_registration(model, model_lms, digitized, points, config)
    _dump(outcome.to_dict(), out_path)
    click.echo(f"fre {outcome.fre:.3f} mm, fitness {outcome.fitness:.3f}, "
               f"rmse {outcome.rmse:.3f} mm, score {outcome.score:.4f}")


@main.command()
@click.option("--surface", type=click.Path(), required=True, help="Model cloud (PLY)")
@click.option("--traced", type=click.Path(), required=True, help="Traced cloud (PLY)")
@click.option("--init", "init_path", type=click.Path(), default=None,
              help="Initial transform JSON (identity if omitted)")
@click.option("--out", "out_path", type=click.Path(), default="refine.json", show_default=True)
@with_thresholds
@handle_errors
def refine(surface, traced, init_path, out_path, config_path, **flags):
    """Multiscale ICP refinement of a traced cloud; emits a per-scale audit."""
    config = _pipeline_config(_load_config(config_path), **flags)
    model = io.read_ply(surface)
    traced_cloud = io.read_ply(traced)
    init = io.read_transform(init_path) if init_path else None
    from .geometry import RigidTransform

    schedule = scale_schedule(config.coarse_mm, config.fine_mm, config.levels)
    T, score, audit = multiscale_refine(
        traced_cloud, model, init if init is not None else RigidTransform.identity(),
        k_corr=config.k_corr, schedule=schedule, score_config=config.score)
    out = io.transform_to_dict(T)
    out["score"] = {"fitness": score.fitness, "rmse": score.rmse,
                    "score": score.score, "rejected": score.rejected}
    out["audit"] = [{"voxel_mm": r.voxel_mm, "iterations": r.iterations,
                     "fitness": r.fitness, "rmse": r.rmse, "score": r.score,
                     "accepted": r.accepted} for r in audit]
    _dump(out, out_path)


@main.command()
@click.option("--plans", "plans_path", type=click.Path(), required=True)
@click.option("--transform", "transform_path", type=click.Path(), default=None,
              help="transform.json (model to patient); identity if omitted")
@click.option("--plan-id", default=None, help="Plan to guide against (default: first)")
@click.option("--tip", required=True, help="Tool tip x,y,z (mm, patient frame)")
@click.option("--direction", required=True, help="Tool direction x,y,z")
@click.option("--mode", type=click.Choice(["marking", "insertion"]), default="insertion",
              show_default=True)
@handle_errors
def guide(plans_path, transform_path, plan_id, tip, direction, mode):
    """One-shot guidance frame for a tool pose, printed as JSON."""
    plans = io.read_plans(plans_path)
    T = io.read_transform(transform_path) if transform_path else None
    service = GuidanceService(plans, model_to_patient=T, default_mode=mode)
    pid = plan_id if plan_id is not None else service.default_plan_id
    if pid not in service.plans:
        raise ParseError(f"unknown plan id {pid!r}")
    try:
        pose = ToolPose([float(v) for v in tip.split(",")],
                        [float(v) for v in direction.split(",")])
    except ValueError as exc:
        raise ParseError(f"bad pose: {exc}") from exc
    frame = guidance_frame(service.plans[pid], pose, mode=mode)
    _dump(frame_message(frame))


@main.command("metrics")
@click.option("--placements", "placements_path", type=click.Path(), required=True)
@click.option("--plans", "plans_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the JSON report here instead of stdout")
@handle_errors
def metrics_cmd(placements_path, plans_path, out_path):
    """Per-trial accuracy reports plus the paired Wilcoxon summary."""
    plans = io.read_plans(plans_path)
    trials = io.read_placements(placements_path)
    reports = []
    for trial in trials:
        if trial["plan_id"] not in plans:
            raise ParseError(f"placement references unknown plan {trial['plan_id']!r}")
        report = placement_metrics(plans[trial["plan_id"]], trial["placement"],
                                   marking_time=trial["marking_time"],
                                   insertion_time=trial["insertion_time"])
        reports.append({"plan_id": trial["plan_id"], "user": trial["user"],
                        "condition": trial["condition"],
                        "metrics": {k: v for k, v in vars(report).items() if v is not None}})

    metric_names = ["entry_offset", "angular_deviation", "target_tip_error",
                    "target_depth_error", "signed_depth_error", "target_radial_error",
                    "marking_time", "insertion_time"]
    summary = {}
    for name in metric_names:
        samples = [PairedSample(r["user"], r["condition"], (r["metrics"][name],))
                   for r in reports if name in r["metrics"]]
        if not samples:
            continue
        try:
            pairs = collapse_medians(samples)
        except ValueError:
            continue  # a user is missing a condition; skip the paired test
        stat, p = wilcoxon_signed_rank([(tt, is_) for _, tt, is_ in pairs])
        summary[name] = {
            "tool_tracking_median": float(np.median([tt for _, tt, _ in pairs])),
            "in_situ_median": float(np.median([is_ for _, _, is_ in pairs])),
            "statistic": stat, "p_two_sided": p, "n_pairs": len(pairs)}

    _dump({"trials": reports, "paired_tests": summary}, out_path)
    header = f"{'metric':<22}{'TT median':>12}{'IS median':>12}{'p':>10}"
    click.echo(header)
    click.echo("-" * len(header))
    for name, row in summary.items():
        click.echo(f"{name:<22}{row['tool_tracking_median']:>12.2f}"
                   f"{row['in_situ_median']:>12.2f}{row['p_two_sided']:>10.4f}")


@main.command()
@click.option("--plans", "plans_path", type=click.Path(), required=True)
@click.option("--transform", "transform_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--mode", type=click.Choice(["marking", "insertion"]), default="insertion",
              show_default=True)
@handle_errors
def serve(plans_path, transform_path, host, port, mode):
    """Serve guidance frames over a WebSocket."""
    plans = io.read_plans(plans_path)
    T = io.read_transform(transform_path) if transform_path else None
    service = GuidanceService(plans, model_to_patient=T, default_mode=mode)
    click.echo(f"serving guidance on ws://{host}:{port}")
    asyncio.run(serve_guidance(service, host, port))


if __name__ == "__main__":
    main()
