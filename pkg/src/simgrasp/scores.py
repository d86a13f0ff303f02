"""Training targets from evaluated candidates.

Candidates sharing a grasp center form a group ``k``. Per group the
simulation scores are summed (grasp center score), per (group, direction
class) likewise (approach direction score), and each candidate keeps its own
score (individual grasp score). Group and cell sums are min-max normalised
within the scene.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .codec import DirectionLattice, encode_direction


class ScoreError(ValueError):
    pass


class CenterGroup(NamedTuple):
    k: int
    center: tuple
    members: tuple


class ADSCell(NamedTuple):
    k: int
    v: int
    raw: float
    norm: float


def minmax(values) -> np.ndarray:
    """Min-max normalisation; a constant input maps to all zeros."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return x
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def _sim(c) -> int:
    if c.sim_score is None:
        raise ScoreError("candidate has no simulation score")
    return int(c.sim_score)


def group_by_center(candidates) -> list:
    """Exact-equality grouping on the center coordinates, in first-seen order."""
    index = {}
    members = []
    centers = []
    for i, c in enumerate(candidates):
        key = tuple(float(x) for x in c.center)
        if key not in index:
            index[key] = len(members)
            members.append([])
            centers.append(key)
        members[index[key]].append(i)
    return [CenterGroup(k, centers[k], tuple(m)) for k, m in enumerate(members)]


def compute_gcs(groups, candidates) -> list:
    """``(raw, normalized)`` per group."""
    raw = [float(sum(_sim(candidates[i]) for i in g.members)) for g in groups]
    return list(zip(raw, minmax(raw).tolist()))


def compute_ads(groups, candidates, lattice: DirectionLattice) -> list:
    """Populated (k, v) cells sorted by k then v, normalised across the scene."""
    cells = {}
    for g in groups:
        if not g.members:
            continue
        approaches = np.array([candidates[i].approach for i in g.members])
        classes = encode_direction(lattice, approaches)
        for i, v in zip(g.members, np.atleast_1d(classes)):
            key = (g.k, int(v))
            cells[key] = cells.get(key, 0.0) + _sim(candidates[i])
    keys = sorted(cells)
    raw = [cells[key] for key in keys]
    norm = minmax(raw)
    return [ADSCell(k, v, float(r), float(n)) for (k, v), r, n in zip(keys, raw, norm)]


def compute_igs(candidate) -> float:
    return float(_sim(candidate))


# --------------------------------------------------------------------------


@dataclass
class LabelRecord:
    scene_id: str
    cloud: str
    groups: list = field(default_factory=list)
    ads: list = field(default_factory=list)
    candidates: list = field(default_factory=list)

    def validate(self) -> None:
        for g in self.groups:
            if not 0.0 <= g["gcs"] <= 1.0:
                raise ScoreError(f"group {g['k']}: normalized GCS {g['gcs']} outside [0, 1]")
        cells = set()
        for a in self.ads:
            if not 0.0 <= a["norm"] <= 1.0:
                raise ScoreError(f"ADS ({a['k']}, {a['v']}): normalized {a['norm']} outside [0, 1]")
            cells.add((a["k"], a["v"]))
        for c in self.candidates:
            if (c["k"], c["v"]) not in cells:
                raise ScoreError(f"candidate cell ({c['k']}, {c['v']}) missing from ADS table")
            if c["igs"] not in (0, 1, 0.0, 1.0):
                raise ScoreError("IGS must be 0 or 1")

    def to_json(self) -> dict:
        return {"scene_id": self.scene_id, "cloud": self.cloud, "groups": self.groups,
                "ads": self.ads, "candidates": self.candidates}

    @classmethod
    def from_json(cls, obj: dict) -> "LabelRecord":
        try:
            return cls(obj["scene_id"], obj["cloud"], obj["groups"], obj["ads"], obj["candidates"])
        except KeyError as exc:
            raise ScoreError(f"label record missing field {exc}") from None


def assemble_record(scene_id: str, cloud_path: str, candidates, lattice: DirectionLattice) -> LabelRecord:
    groups = group_by_center(candidates)
    gcs = compute_gcs(groups, candidates)
    ads = compute_ads(groups, candidates, lattice)
    group_of = {i: g.k for g in groups for i in g.members}
    rec = LabelRecord(str(scene_id), str(cloud_path))
    rec.groups = [{"k": g.k, "center": list(g.center), "gcs_raw": r, "gcs": n}
                  for g, (r, n) in zip(groups, gcs)]
    rec.ads = [{"k": c.k, "v": c.v, "raw": c.raw, "norm": c.norm} for c in ads]
    for i, c in enumerate(candidates):
        rec.candidates.append({
            "k": group_of[i],
            "v": int(encode_direction(lattice, c.approach)),
            "a": float(c.inplane_angle),
            "d": float(c.depth),
            "collision": float(c.collision_score),
            "igs": compute_igs(c),
        })
    return rec


def write_labels(records, path, append: bool = False) -> None:
    """One JSON object per line. Every record is validated before anything is written."""
    records = list(records)
    for r in records:
        r.validate()
    lines = "".join(json.dumps(r.to_json()) + "\n" for r in records)
    with open(path, "a" if append else "w") as fh:
        fh.write(lines)


def read_labels(path) -> list:
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        if line.strip():
            try:
                out.append(LabelRecord.from_json(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise ScoreError(f"{path}:{n}: invalid JSON ({exc})") from None
    return out


def assemble_and_write(scene_id: str, cloud_path: str, candidates, lattice: DirectionLattice, path) -> LabelRecord:
    rec = assemble_record(scene_id, cloud_path, candidates, lattice)
    write_labels([rec], path)
    return rec
