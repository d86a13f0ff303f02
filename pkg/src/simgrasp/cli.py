"""Batch command line: sample -> annotate -> aggregate -> refine, plus helpers.

Exit codes: 0 ok, 2 config error, 3 input-format error, 4 invariant violation.
Set SIMGRASP_LOG (DEBUG, INFO, WARNING...) for log verbosity.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .codec import build_lattice
from .config import ConfigError, PipelineConfig, load_config
from .evaluate import get_evaluator
from .geometry import GeometryError, PointCloud, scene_cloud
from .losses import LossWeights, bce_with_logits, smooth_l1, total_loss
from .meshio import MeshFormatError, load_scene, read_cloud_ply, write_cloud_ply, write_ply_mesh
from .refine import RefineError, average_precision, grasp_markers, read_grasps, refine, write_grasps
from .sampler import GraspCandidate, SamplerError, generate_candidates
from .scores import ScoreError, assemble_record, read_labels, write_labels

log = logging.getLogger("simgrasp")

EXIT_CONFIG, EXIT_INPUT, EXIT_INVARIANT = 2, 3, 4


class InputFormatError(ValueError):
    pass


def _read_jsonl(path) -> list:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputFormatError(f"unreadable file: {path}") from exc
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip():
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InputFormatError(f"{path}:{n}: invalid JSON ({exc.msg})") from None
    return out


def _write_jsonl(rows, path) -> None:
    Path(path).write_text("".join(json.dumps(r) + "\n" for r in rows))


def _read_candidates(path) -> list:
    rows = _read_jsonl(path)
    try:
        return [GraspCandidate.from_json(r) for r in rows]
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"{path}: candidate line missing field {exc}") from None


# --------------------------------------------------------------------------


def cmd_sample(scene_path, config: PipelineConfig, out_path) -> dict:
    scene = load_scene(scene_path)
    gripper = config.gripper.build()
    counts = {}
    rows = []
    for obj in scene.objects:
        cands = generate_candidates(scene, obj.instance_id, gripper, config.sampler,
                                    config.seed, workers=config.worker_count)
        counts[obj.instance_id] = len(cands)
        rows.extend(c.to_json() for c in cands)
        print(f"object {obj.instance_id}: {len(cands)} candidates")
    _write_jsonl(rows, out_path)
    return counts


def _annotate_chunk(args):
    scene_path, config, rows = args
    scene = load_scene(scene_path)
    gripper = config.gripper.build()
    evaluator = get_evaluator(config.evaluator)
    out = []
    for r in rows:
        c = GraspCandidate.from_json(r)
        score = evaluator(c, scene.get(c.instance_id), scene, config.eval, gripper)
        out.append({**r, "sim": int(score)})
    return out


def cmd_annotate(candidates_path, scene_path, config: PipelineConfig, out_path) -> list:
    rows = _read_jsonl(candidates_path)
    try:
        for r in rows:
            GraspCandidate.from_json(r)
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"{candidates_path}: candidate line missing field {exc}") from None
    scene = load_scene(scene_path)
    missing = {r["instance_id"] for r in rows} - set(scene.instance_ids)
    if missing:
        raise InputFormatError(f"candidates reference unknown instances {sorted(missing)}")
    workers = config.worker_count
    if workers <= 1 or len(rows) < 2:
        out = _annotate_chunk((scene_path, config, rows))
    else:
        chunks = [list(c) for c in np.array_split(np.array(rows, dtype=object), workers) if len(c)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = [r for part in pool.map(_annotate_chunk, [(scene_path, config, c) for c in chunks]) for r in part]
    _write_jsonl(out, out_path)
    print(f"{sum(r['sim'] for r in out)} / {len(out)} grasps succeed")
    return out


def cmd_aggregate(evaluated_path, cloud_path, out_path, config: PipelineConfig, scene_id=None):
    cands = _read_candidates(evaluated_path)
    read_cloud_ply(cloud_path)
    lattice = build_lattice(config.lattice_size)
    rec = assemble_record(scene_id or Path(evaluated_path).stem, str(cloud_path), cands, lattice)
    write_labels([rec], out_path)
    print(f"{len(rec.groups)} centers, {len(rec.ads)} direction cells, {len(rec.candidates)} candidates")
    return rec


def cmd_refine(grasps_path, cloud_path, config: PipelineConfig, out_path, markers=None) -> list:
    try:
        grasps = read_grasps(grasps_path)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"{grasps_path}: bad grasp line ({exc})") from None
    cloud = read_cloud_ply(cloud_path)
    gripper = config.gripper.build()
    kept = refine(grasps, cloud, gripper, config.refine)
    write_grasps(kept, out_path)
    if markers and kept:
        write_ply_mesh(grasp_markers(kept, gripper), markers)
    print(f"{len(kept)} / {len(grasps)} grasps kept")
    return kept


def cmd_eval_ap(outcomes_path, out_path=None) -> float:
    rows = _read_jsonl(outcomes_path)
    try:
        ap = average_precision(rows)
    except KeyError as exc:
        raise InputFormatError(f"{outcomes_path}: outcome line missing {exc}") from None
    print(f"AP {ap:.6f} ({len(rows)} outcomes)")
    if out_path:
        Path(out_path).write_text(json.dumps({"ap": ap, "n": len(rows)}) + "\n")
    return ap


def cmd_cloud(scene_path, config: PipelineConfig, out_path) -> PointCloud:
    cloud = scene_cloud(load_scene(scene_path), config.cloud_points_per_object, config.seed)
    write_cloud_ply(cloud, out_path)
    print(f"{len(cloud)} points")
    return cloud


def cmd_losses(labels_path, predictions_path, weights: LossWeights, out_path=None) -> list:
    """Loss terms of per-scene predictions against label records.

    Prediction lines: ``{"scene_id", "affordance": [K], "direction_logits": [len(ads)],
    "score_logits": [len(candidates)]}``, aligned with the label record lists.
    """
    labels = {r.scene_id: r for r in read_labels(labels_path)}
    results = []
    for p in _read_jsonl(predictions_path):
        try:
            rec = labels[p["scene_id"]]
            l_aff = smooth_l1(p["affordance"], [g["gcs"] for g in rec.groups])
            l_dir = bce_with_logits(p["direction_logits"], [a["norm"] for a in rec.ads])
            l_score = bce_with_logits(p["score_logits"], [c["igs"] for c in rec.candidates])
        except KeyError as exc:
            raise InputFormatError(f"prediction references missing {exc}") from None
        row = {"scene_id": p["scene_id"], "l_aff": l_aff, "l_dir": l_dir, "l_score": l_score,
               "total": total_loss(l_aff, l_dir, l_score, weights)}
        print(json.dumps(row))
        results.append(row)
    if out_path:
        _write_jsonl(results, out_path)
    return results


def cmd_lattice(V: int, out_path) -> None:
    lat = build_lattice(V)
    write_cloud_ply(PointCloud(lat.vectors, lat.vectors), out_path, binary=False)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simgrasp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp, required=True):
        if required:
            sp.add_argument("config", help="pipeline config JSON")
        else:
            sp.add_argument("--config", default=None, help="pipeline config JSON")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field, e.g. sampler.num_fps_points=10")

    sp = sub.add_parser("sample", help="generate collision-gated candidates for every object")
    sp.add_argument("scene")
    with_config(sp)
    sp.add_argument("out")

    sp = sub.add_parser("annotate", help="score candidates with the grasp evaluator")
    sp.add_argument("candidates")
    sp.add_argument("scene")
    with_config(sp)
    sp.add_argument("out")

    sp = sub.add_parser("aggregate", help="build the label record (GCS/ADS/IGS)")
    sp.add_argument("evaluated")
    sp.add_argument("cloud")
    sp.add_argument("out")
    sp.add_argument("--scene-id", default=None)
    with_config(sp, required=False)

    sp = sub.add_parser("refine", help="instance assignment, collision filter, NMS, top percent")
    sp.add_argument("grasps")
    sp.add_argument("cloud")
    with_config(sp)
    sp.add_argument("out")
    sp.add_argument("--markers", default=None, help="write gripper boxes of kept grasps as PLY")

    sp = sub.add_parser("eval-ap", help="average precision of an outcome list")
    sp.add_argument("outcomes")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("cloud", help="labelled surface point cloud of a scene")
    sp.add_argument("scene")
    with_config(sp)
    sp.add_argument("out")

    sp = sub.add_parser("losses", help="loss terms of predictions against label records")
    sp.add_argument("labels")
    sp.add_argument("predictions")
    sp.add_argument("--weights", type=float, nargs=3, default=(1.0, 1.0, 1.0), metavar=("AFF", "DIR", "SCORE"))
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("lattice", help="dump the direction lattice as PLY")
    sp.add_argument("out")
    sp.add_argument("--V", type=int, default=800)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SIMGRASP_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if hasattr(args, "set"):
            config = load_config(getattr(args, "config", None), args.set)
        if args.command == "sample":
            cmd_sample(args.scene, config, args.out)
        elif args.command == "annotate":
            cmd_annotate(args.candidates, args.scene, config, args.out)
        elif args.command == "aggregate":
            cmd_aggregate(args.evaluated, args.cloud, args.out, config, args.scene_id)
        elif args.command == "refine":
            cmd_refine(args.grasps, args.cloud, config, args.out, args.markers)
        elif args.command == "eval-ap":
            cmd_eval_ap(args.outcomes, args.out)
        elif args.command == "cloud":
            cmd_cloud(args.scene, config, args.out)
        elif args.command == "losses":
            cmd_losses(args.labels, args.predictions, LossWeights(*args.weights), args.out)
        elif args.command == "lattice":
            cmd_lattice(args.V, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputFormatError, MeshFormatError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GeometryError, SamplerError, ScoreError, RefineError, ValueError, KeyError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


if __name__ == "__main__":
    sys.exit(main())
