"""Slow, obviously-correct reference implementations used as test oracles."""
import numpy as np


def brute_fps(P, m, start=0):
    """Quadratic greedy max-min with lowest-index tie-break."""
    chosen = [start]
    while len(chosen) < m:
        best, best_d = None, -1.0
        for i in range(len(P)):
            d = min(float(np.sum((P[i] - P[j]) ** 2)) for j in chosen)
            if d > best_d:
                best, best_d = i, d
        chosen.append(best)
    return chosen


def brute_in_box(box, P):
    out = []
    for i, p in enumerate(P):
        local = box.pose.rotation.T @ (p - box.center)
        if all(abs(local[j]) <= box.half_extents[j] + 1e-12 for j in range(3)):
            out.append(i)
    return np.array(out, dtype=np.int64)


def brute_collides(pose, P, gripper, dilation):
    for p in P:
        local = pose.rotation.T @ (p - pose.translation)
        for box in gripper.body_boxes:
            q = box.pose.rotation.T @ (local - box.pose.translation)
            if np.all(np.abs(q) <= box.half_extents + dilation + 1e-12):
                return True
    return False


def brute_groups(cands):
    groups = []
    for i, c in enumerate(cands):
        for g in groups:
            if all(float(a) == float(b) for a, b in zip(cands[g[0]].center, c.center)):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def brute_minmax(x):
    lo, hi = min(x), max(x)
    return [0.0 if hi == lo else (v - lo) / (hi - lo) for v in x]


def brute_class(lattice, v):
    best, best_dot = 0, -2.0
    for j in range(lattice.V):
        d = float(lattice.vectors[j] @ v)
        if d > best_dot:
            best, best_dot = j, d
    return best


def brute_scores(cands, lattice):
    """(gcs_raw, ads_keys, ads_raw) by plain loops."""
    groups = brute_groups(cands)
    gcs_raw = [float(sum(cands[i].sim_score for i in g)) for g in groups]
    cells = {}
    for k, g in enumerate(groups):
        for i in g:
            key = (k, brute_class(lattice, cands[i].approach))
            cells[key] = cells.get(key, 0.0) + cands[i].sim_score
    keys = sorted(cells)
    return gcs_raw, keys, [cells[key] for key in keys]
