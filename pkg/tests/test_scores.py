import json

import numpy as np
import pytest

from simgrasp.codec import build_lattice, decode_class
from simgrasp.geometry import RigidTransform
from simgrasp.sampler import GraspCandidate
from simgrasp.scores import (
    LabelRecord,
    ScoreError,
    assemble_record,
    compute_ads,
    compute_gcs,
    compute_igs,
    group_by_center,
    minmax,
    read_labels,
    write_labels,
)

from oracles import brute_groups, brute_minmax, brute_scores

LAT = build_lattice(800)


def cand(center, approach, sim):
    a = np.asarray(approach, float)
    return GraspCandidate(np.asarray(center, float), a / np.linalg.norm(a), 0.0, 0.01,
                          RigidTransform.identity(), 0.3, 0, sim)


def random_candidates(rng, n=200, n_centers=12):
    centers = rng.normal(size=(n_centers, 3))
    out = []
    for _ in range(n):
        k = int(rng.integers(n_centers))
        # reuse a handful of directions per center so cells collect several members
        v = decode_class(LAT, int(rng.integers(0, 800, size=1)[0] % 40)) + rng.normal(scale=0.01, size=3)
        out.append(cand(centers[k], v, int(rng.integers(0, 2))))
    return out


# ---------------------------------------------------------------- grouping


def test_two_centers_three_each():
    cs = [cand((0, 0, i % 2), (0, 0, -1), 1) for i in range(6)]
    groups = group_by_center(cs)
    assert [len(g.members) for g in groups] == [3, 3]
    assert groups[0].members == (0, 2, 4)


def test_empty_grouping():
    assert group_by_center([]) == []


def test_grouping_matches_quadratic_oracle(rng):
    cs = random_candidates(rng)
    assert [list(g.members) for g in group_by_center(cs)] == brute_groups(cs)


# ---------------------------------------------------------------- formulas


def test_gcs_raw_sum():
    cs = [cand((0, 0, 0), (0, 0, -1), s) for s in (1, 0, 1)]
    assert compute_gcs(group_by_center(cs), cs) == [(2.0, 0.0)]


def test_minmax_examples():
    np.testing.assert_allclose(minmax([2, 5, 8]), [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(minmax([3, 3, 3]), [0, 0, 0])
    assert minmax([]).size == 0


def test_ads_cells_by_class():
    v17, v40 = decode_class(LAT, 17), decode_class(LAT, 40)
    cs = [cand((0, 0, 0), v17, 1), cand((0, 0, 0), v17, 1), cand((0, 0, 0), v40, 0)]
    cells = compute_ads(group_by_center(cs), cs, LAT)
    assert [(c.k, c.v, c.raw) for c in cells] == [(0, 17, 2.0), (0, 40, 0.0)]
    assert [c.norm for c in cells] == [1.0, 0.0]


def test_single_cell_normalizes_to_zero():
    cs = [cand((0, 0, 0), (0, 0, -1), 1)]
    cells = compute_ads(group_by_center(cs), cs, LAT)
    assert len(cells) == 1 and cells[0].norm == 0.0


def test_igs():
    assert compute_igs(cand((0, 0, 0), (0, 0, 1), 1)) == 1.0
    assert compute_igs(cand((0, 0, 0), (0, 0, 1), 0)) == 0.0
    with pytest.raises(ScoreError):
        compute_igs(cand((0, 0, 0), (0, 0, 1), None))


def check_against_oracle(cs):
    """Compare every table with the loop oracle; returns the raw sums."""
    gcs_raw, keys, ads_raw = brute_scores(cs, LAT)
    groups = group_by_center(cs)
    assert [list(g.members) for g in groups] == brute_groups(cs)
    assert compute_gcs(groups, cs) == list(zip(gcs_raw, brute_minmax(gcs_raw)))
    got_ads = compute_ads(groups, cs, LAT)
    assert [(c.k, c.v, c.raw, c.norm) for c in got_ads] == [
        (k, v, r, n) for (k, v), r, n in zip(keys, ads_raw, brute_minmax(ads_raw))]
    for k in range(len(gcs_raw)):
        assert sum(r for (kk, _), r in zip(keys, ads_raw) if kk == k) == gcs_raw[k]
    return gcs_raw, ads_raw


def test_formulas_match_oracle(rng):
    gcs_raw, ads_raw = check_against_oracle(random_candidates(rng, 120))
    assert max(gcs_raw) > min(gcs_raw) and max(ads_raw) > min(ads_raw)


# ---------------------------------------------------------------- records


def _record(rng, n=40):
    return assemble_record("scene-a", "cloud.ply", random_candidates(rng, n), LAT)


def test_record_round_trip(tmp_path, rng):
    rec = _record(rng)
    write_labels([rec], tmp_path / "labels.jsonl")
    back = read_labels(tmp_path / "labels.jsonl")
    assert len(back) == 1
    assert back[0].to_json() == json.loads(json.dumps(rec.to_json()))


def test_record_cells_exist(rng):
    rec = _record(rng)
    rec.validate()
    cells = {(a["k"], a["v"]) for a in rec.ads}
    assert all((c["k"], c["v"]) in cells for c in rec.candidates)


def test_invalid_record_is_not_written(tmp_path, rng):
    rec = _record(rng)
    rec.groups[0]["gcs"] = 1.5
    with pytest.raises(ScoreError):
        write_labels([rec], tmp_path / "labels.jsonl")
    assert not (tmp_path / "labels.jsonl").exists()


def test_record_missing_field():
    with pytest.raises(ScoreError):
        LabelRecord.from_json({"scene_id": "x"})
