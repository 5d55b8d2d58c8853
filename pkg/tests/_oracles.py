"""Brute-force oracles shared by the rate-region and acceptance tests.

The grid oracle scans every binary auxiliary channel p(w|x) on a uniform
(step = 1/steps) grid.  For binary Y with no side information the consistent
output channel p(y|w) is the unique solution of a 2x2 linear system, so each
grid cell is either infeasible or evaluates exactly — no inner search.
"""

import numpy as np


def binary_grid_frontier(p_xy, steps=64):
    """Rate pairs (r, r+c) of every feasible cell of the p(w|x) grid.

    ``p_xy`` is a 2x2 joint table; W and Y are binary and there is no side
    information.  Returns two flat arrays (R, RC) over feasible cells.
    """
    p_xy = np.asarray(p_xy, float)
    px = p_xy.sum(axis=1)
    g = np.arange(steps + 1) / steps
    a, b = np.meshgrid(g, g, indexing="ij")
    # joint p(x, w) entries for row channels [a, 1-a] and [b, 1-b]
    m00, m01 = px[0] * a, px[0] * (1.0 - a)
    m10, m11 = px[1] * b, px[1] * (1.0 - b)
    det = m00 * m11 - m01 * m10
    feasible = np.abs(det) > 1e-12
    q = np.empty((steps + 1, steps + 1, 2, 2))
    for y in range(2):
        rhs0, rhs1 = p_xy[0, y], p_xy[1, y]
        with np.errstate(divide="ignore", invalid="ignore"):
            q[..., 0, y] = (m11 * rhs0 - m01 * rhs1) / det
            q[..., 1, y] = (-m10 * rhs0 + m00 * rhs1) / det
    feasible &= (q.min(axis=(2, 3)) >= -1e-9) & (q.max(axis=(2, 3)) <= 1.0 + 1e-9)
    q = np.clip(q, 0.0, 1.0)
    wt = np.stack([np.stack([a, 1.0 - a], axis=-1), np.stack([b, 1.0 - b], axis=-1)], axis=2)
    joint = np.einsum("abxw,abwy,x->abwxy", wt, q, px)

    def ent(table):
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(table > 0, np.log2(np.where(table > 0, table, 1.0)), 0.0)
        return -(table * logs).sum(axis=-1)

    shape = (steps + 1, steps + 1)
    h_w = ent(joint.sum(axis=(3, 4)))
    h_x = ent(np.broadcast_to(px, shape + (2,)))
    h_wx = ent(joint.sum(axis=4).reshape(shape + (-1,)))
    h_xy = ent(np.broadcast_to(p_xy.reshape(-1), shape + (4,)))
    h_wxy = ent(joint.reshape(shape + (-1,)))
    r = np.maximum(h_w + h_x - h_wx, 0.0)
    rc = np.maximum(h_w + h_xy - h_wxy, 0.0)
    return r[feasible], np.maximum(rc[feasible], r[feasible])


def scalarized_minimum(r, rc, lam):
    """Grid point minimizing (1-lam) r + lam (r+c); returns (r, c, value)."""
    values = (1.0 - lam) * r + lam * rc
    i = int(np.argmin(values))
    return float(r[i]), float(rc[i] - r[i]), float(values[i])


def pareto_polyline(rates, crs):
    """Undominated (rate, cr) points, sorted by rate with cr decreasing."""
    pts = np.stack([np.asarray(rates, float), np.asarray(crs, float)], axis=1)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    kept = []
    best_cr = np.inf
    for i in order:
        if pts[i, 1] < best_cr - 1e-12:
            kept.append(pts[i])
            best_cr = pts[i, 1]
    return np.array(kept)


def chebyshev_to_polyline(point, polyline, samples=257):
    """Max-coordinate distance from a point to a piecewise-linear frontier.

    Segments are densely sampled; with the default resolution the error is
    below segment length / 512, negligible at the tolerances used here.
    """
    point = np.asarray(point, float)
    polyline = np.asarray(polyline, float)
    if len(polyline) == 1:
        return float(np.abs(polyline[0] - point).max())
    best = np.inf
    ts = np.linspace(0.0, 1.0, samples)[:, None]
    for s in range(len(polyline) - 1):
        seg = polyline[s] * (1.0 - ts) + polyline[s + 1] * ts
        best = min(best, float(np.abs(seg - point).max(axis=1).min()))
    return best
