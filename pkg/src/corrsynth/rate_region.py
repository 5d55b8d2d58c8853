"""Achievable-rate evaluation and frontier search for correlated synthesis.

Point-to-point: an encoder sees X^n, a decoder sees side information Z^n and
must emit Y^n so the triple looks iid ~ p_XYZ.  The achievable (message rate,
common randomness) pairs for a given auxiliary channel pair are

    R >= I(X;W) - I(W;Z),        R + C >= I(XYZ;W) - I(W;Z),

evaluated on the induced joint p_XZ * p_{W|X} * p_{Y|ZW}.  Distributed: two
encoders see X1^n, X2^n and one decoder emits Y^n; four analogous lower
bounds apply, conditioned on a time-sharing variable Q.

The frontier tracer scalarizes the two point-to-point bounds over a weight
grid and, for each weight, runs multi-start softmax-parametrized descent on
p_{W|X} with p_{Y|ZW} recovered by an inner linear feasibility solve (the
consistency constraint is linear in p_{Y|ZW} once p_{W|X} is fixed).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .probability import (
    Alphabet,
    CondPmf,
    JointPmf,
    conditional_mutual_information,
    mutual_information,
)

logger = logging.getLogger(__name__)

PTP_AXES = ("X", "Y", "Z")
DIST_AXES = ("X1", "X2", "Y")

#: default search-time cap on auxiliary alphabet sizes (the support-lemma
#: bound (|X||Y||Z|)^2 is an upper limit, not a requirement, and explodes)
DEFAULT_W_CAP = 8
#: default cap on the time-sharing alphabet in distributed evaluations
DEFAULT_Q_CAP = 4


class InconsistentAuxError(ValueError):
    """Auxiliary channels whose induced marginal misses the target."""

    def __init__(self, residual: float, tol: float):
        super().__init__(
            f"aux channels are inconsistent with the target: residual {residual:.3e} > tol {tol:.3e}"
        )
        self.residual = residual
        self.tol = tol


# ---------------------------------------------------------------------------
# point-to-point
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuxChannelPtp:
    """Auxiliary pair (p_{W|X}, p_{Y|ZW}) defining a synthesis strategy.

    The induced joint p(w,x,y,z) = p(x,z) p(w|x) p(y|z,w) satisfies the
    chains Z - X - W and X - (Z,W) - Y by construction.
    """

    w_alphabet: Alphabet
    p_w_given_x: CondPmf
    p_y_given_zw: CondPmf

    def __post_init__(self):
        if self.p_w_given_x.out_alphabets != (self.w_alphabet,):
            raise ValueError("p_w_given_x must emit the W alphabet")
        if not self.p_w_given_x.defined.all() or not self.p_y_given_zw.defined.all():
            raise ValueError("aux channels must be fully defined")
        if self.p_y_given_zw.given_alphabets[1] != self.w_alphabet:
            raise ValueError("p_y_given_zw must condition on (Z, W)")


def aux_ptp_from_tables(w_symbols, x_alphabet, z_alphabet, y_alphabet, w_table, y_table):
    """Assemble an :class:`AuxChannelPtp` from raw conditional tables.

    ``w_table`` has shape (|X|, |W|); ``y_table`` has shape (|Z|, |W|, |Y|).
    """
    w_alpha = Alphabet(tuple(w_symbols))
    return AuxChannelPtp(
        w_alpha,
        CondPmf.from_rows(("X",), (x_alphabet,), ("W",), (w_alpha,), np.asarray(w_table, float)),
        CondPmf.from_rows(
            ("Z", "W"), (z_alphabet, w_alpha), ("Y",), (y_alphabet,), np.asarray(y_table, float)
        ),
    )


def ptp_consistency_residual(p_xyz: JointPmf, aux: AuxChannelPtp) -> float:
    """max over (x,z) with p(x,z)>0, and y, of |sum_w p(w|x)p(y|z,w) - p(y|x,z)|."""
    target = p_xyz.marginalize(PTP_AXES).table  # (x, y, z)
    p_xz = target.sum(axis=1)  # (x, z)
    implied = np.einsum("xw,zwy->xyz", aux.p_w_given_x.table, aux.p_y_given_zw.table)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond_target = target / p_xz[:, None, :]
    mask = p_xz > 0
    diff = np.abs(implied - np.nan_to_num(cond_target))
    return float(diff.transpose(0, 2, 1)[mask].max())


def ptp_induced_joint(p_xyz: JointPmf, aux: AuxChannelPtp) -> JointPmf:
    """The joint p(w,x,y,z) = p(x,z) p(w|x) p(y|z,w) with axes (W, X, Y, Z)."""
    p_xz = p_xyz.marginalize(("X", "Z")).table
    table = np.einsum("xz,xw,zwy->wxyz", p_xz, aux.p_w_given_x.table, aux.p_y_given_zw.table)
    return JointPmf(
        ("W",) + PTP_AXES,
        (aux.w_alphabet,) + tuple(p_xyz.alphabet(a) for a in PTP_AXES),
        table,
    )


@dataclass(frozen=True)
class PtpRatePair:
    """Clamped lower bounds (bits) plus the raw informations behind them."""

    r_min: float
    r_plus_c_min: float
    i_x_w: float
    i_w_z: float
    i_xyz_w: float

    @property
    def corner(self) -> tuple[float, float]:
        """(R, C) corner: least message rate, then least randomness at it."""
        return (self.r_min, max(0.0, self.r_plus_c_min - self.r_min))


def ptp_rates_for(p_xyz: JointPmf, aux: AuxChannelPtp, tol: float = 1e-9) -> PtpRatePair:
    """Evaluate both lower bounds on the induced joint; clamp at zero.

    Degenerate side information (|Z| = 1) makes I(W;Z) zero identically, not
    merely numerically; it is pinned to exact 0 in that case.
    """
    residual = ptp_consistency_residual(p_xyz, aux)
    if residual > tol:
        raise InconsistentAuxError(residual, tol)
    support_cap = (
        p_xyz.alphabet("X").size * p_xyz.alphabet("Y").size * p_xyz.alphabet("Z").size
    ) ** 2
    if aux.w_alphabet.size > support_cap:
        raise ValueError(f"|W| = {aux.w_alphabet.size} exceeds the support bound {support_cap}")
    joint = ptp_induced_joint(p_xyz, aux)
    i_x_w = mutual_information(joint, "X", "W")
    i_w_z = 0.0 if p_xyz.alphabet("Z").size == 1 else mutual_information(joint, "W", "Z")
    i_xyz_w = mutual_information(joint, ("X", "Y", "Z"), "W")
    r_min = i_x_w - i_w_z
    r_plus_c_min = i_xyz_w - i_w_z
    if r_min < 0 or r_plus_c_min < 0:
        logger.debug("unclamped bounds: r=%.6g, r+c=%.6g", r_min, r_plus_c_min)
    return PtpRatePair(
        r_min=max(0.0, r_min),
        r_plus_c_min=max(0.0, r_plus_c_min),
        i_x_w=i_x_w,
        i_w_z=i_w_z,
        i_xyz_w=i_xyz_w,
    )


def ptp_membership(
    p_xyz: JointPmf, rate: float, cr: float, aux: AuxChannelPtp, tol: float = 1e-9
) -> bool:
    """Does this aux certify (rate, cr)?  One certifying aux suffices."""
    rates = ptp_rates_for(p_xyz, aux, tol=tol)
    return rate >= rates.r_min - tol and rate + cr >= rates.r_plus_c_min - tol


# ---------------------------------------------------------------------------
# inner solve: consistent p_{Y|ZW} for a fixed p_{W|X}
# ---------------------------------------------------------------------------


def _z_block(target_xyz: np.ndarray, w_given_x: np.ndarray, z: int):
    """Equality system for q(.|z,.): consistency rows then row-sum rows.

    Unknown vector is q flattened as (w, y); returns (matrix, rhs).
    """
    nx, ny, _ = target_xyz.shape
    nw = w_given_x.shape[1]
    p_xz = target_xyz.sum(axis=1)
    a = p_xz[:, z, None] * w_given_x  # (x, w)
    big = np.zeros((nx * ny + nw, nw * ny))
    for x in range(nx):
        for y in range(ny):
            for w in range(nw):
                big[x * ny + y, w * ny + y] = a[x, w]
    for w in range(nw):
        big[nx * ny + w, w * ny : (w + 1) * ny] = 1.0
    rhs = np.concatenate([target_xyz[:, :, z].reshape(-1), np.ones(nw)])
    return big, rhs


def _consistent_y_channel(target_xyz: np.ndarray, w_given_x: np.ndarray):
    """Feasible p(y|z,w) matching the target marginal, or None.

    For each z the consistency constraint sum_w p(x,z) p(w|x) q(y|z,w) =
    p(x,y,z) is linear in q; together with row-normalization this is a
    least-squares system.  Negative entries are repaired by alternating
    projections between the affine set and the nonnegative orthant.

    Returns (q or None, equality_residual, nearest_violation) where q has
    shape (|Z|, |W|, |Y|).
    """
    nx, ny, nz = target_xyz.shape
    nw = w_given_x.shape[1]
    p_xz = target_xyz.sum(axis=1)
    q = np.empty((nz, nw, ny))
    worst_resid = 0.0
    for z in range(nz):
        big, rhs = _z_block(target_xyz, w_given_x, z)
        sol, *_ = np.linalg.lstsq(big, rhs, rcond=None)
        resid = float(np.abs(big @ sol - rhs).max())
        if resid > 1e-9:
            return None, resid, 0.0
        if sol.min() < -1e-10:
            pinv = np.linalg.pinv(big)
            for _ in range(300):
                sol = np.clip(sol, 0.0, None)
                sol = sol - pinv @ (big @ sol - rhs)
                if sol.min() >= -1e-12:
                    break
            resid = float(np.abs(big @ sol - rhs).max())
            if resid > 1e-9 or sol.min() < -1e-8:
                return None, resid, float(max(0.0, -sol.min()))
        # exact row normalization after clipping the ~1e-8 negatives; rescore
        # the equality system so the reported residual stays truthful
        mat = np.clip(sol, 0.0, None).reshape(nw, ny)
        mat = mat / mat.sum(axis=1, keepdims=True)
        resid = float(np.abs(big @ mat.reshape(-1) - rhs).max())
        if not np.isfinite(resid) or resid > 1e-7:
            return None, resid, 0.0
        worst_resid = max(worst_resid, resid)
        q[z] = mat
    return q, worst_resid, 0.0


def _polish_y_channel(target_xyz, w_given_x, q, iters=30):
    """Descend I(XYZ;W) over the feasible q-polytope (projected gradient).

    Only matters when the consistency system is underdetermined; with a
    unique solution the projection returns q unchanged.
    """
    p_xz = target_xyz.sum(axis=1)
    c = np.einsum("xz,xw->zxw", p_xz, w_given_x)

    def info(qq):
        joint = np.einsum("zxw,zwy->wxyz", c, qq)
        pw = joint.sum(axis=(1, 2, 3))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = joint / (pw[:, None, None, None] * target_xyz[None])
            terms = joint * np.log2(np.where(joint > 0, ratio, 1.0))
        return float(np.where(joint > 0, terms, 0.0).sum())

    best = info(q)
    step = 0.25
    for _ in range(iters):
        joint = np.einsum("zxw,zwy->wxyz", c, q)
        pw = joint.sum(axis=(1, 2, 3))
        with np.errstate(divide="ignore", invalid="ignore"):
            logterm = np.log2(
                np.where(joint > 0, joint / (pw[:, None, None, None] * target_xyz[None]), 1.0)
            )
        grad = np.einsum("zxw,wxyz->zwy", c, logterm + 1.0 / np.log(2.0))
        if not np.isfinite(grad).all():
            break
        trial = q - step * grad
        # project back: re-solve feasibility started from the trial point by
        # alternating projection against the same constraints
        repaired, resid, _ = _repair_onto_feasible(target_xyz, w_given_x, trial)
        if repaired is None:
            step *= 0.5
            continue
        val = info(repaired)
        if val < best - 1e-12:
            best, q = val, repaired
            step *= 1.2
        else:
            step *= 0.5
            if step < 1e-6:
                break
    return q


def _repair_onto_feasible(target_xyz, w_given_x, q):
    """Alternating projection of q onto {consistency} ∩ {q >= 0}."""
    nz = target_xyz.shape[2]
    nw, ny = w_given_x.shape[1], target_xyz.shape[1]
    out = np.empty_like(q)
    worst = 0.0
    for z in range(nz):
        big, rhs = _z_block(target_xyz, w_given_x, z)
        pinv = np.linalg.pinv(big)
        sol = q[z].reshape(-1).copy()
        for _ in range(120):
            sol = sol - pinv @ (big @ sol - rhs)
            if sol.min() >= -1e-12:
                break
            sol = np.clip(sol, 0.0, None)
        resid = float(np.abs(big @ sol - rhs).max())
        if not np.isfinite(resid) or resid > 1e-9 or sol.min() < -1e-8:
            return None, resid, 0.0
        # clipping the ~1e-8 negatives perturbs row sums past strict
        # stochasticity, so renormalize exactly and report the true residual
        mat = np.clip(sol, 0.0, None).reshape(nw, ny)
        mat = mat / mat.sum(axis=1, keepdims=True)
        resid = float(np.abs(big @ mat.reshape(-1) - rhs).max())
        if not np.isfinite(resid) or resid > 1e-7:
            return None, resid, 0.0
        out[z] = mat
        worst = max(worst, resid)
    return out, worst, 0.0


# ---------------------------------------------------------------------------
# frontier tracing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the scalarized frontier search."""

    w_cap: int = DEFAULT_W_CAP
    restarts: int = 2
    lambda_grid: int = 33
    iters: int = 60
    tol: float = 1e-9
    seed: int = 0


@dataclass(frozen=True)
class FrontierPoint:
    lam: float
    rate: float
    cr: float
    value: float
    aux: AuxChannelPtp
    residual: float


@dataclass(frozen=True)
class FrontierResult:
    points: tuple[FrontierPoint, ...]
    #: λ values for which no consistent aux was found
    failures: tuple[float, ...]
    #: every optimizer outcome before Pareto pruning, one per λ
    raw: tuple[FrontierPoint, ...]


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _rates_from_tables(target_xyz, w_given_x, q):
    """(r_min_raw, rc_min_raw) for explicit tables, no clamping."""
    p_xz = target_xyz.sum(axis=1)
    joint = np.einsum("xz,xw,zwy->wxyz", p_xz, w_given_x, q)
    pw = joint.sum(axis=(1, 2, 3))
    px = target_xyz.sum(axis=(1, 2))
    pwx = joint.sum(axis=(2, 3))
    pwz = joint.sum(axis=(1, 2))
    pz = target_xyz.sum(axis=(0, 1))

    def ent(t):
        t = t[t > 0]
        return float(-(t * np.log2(t)).sum())

    i_x_w = ent(pw) + ent(px) - ent(pwx)
    i_w_z = 0.0 if len(pz) == 1 else ent(pw) + ent(pz) - ent(pwz)
    i_xyz_w = ent(pw) + ent(target_xyz) - ent(joint)
    return i_x_w - i_w_z, i_xyz_w - i_w_z


def _scalarized(target_xyz, w_given_x, lam, polish):
    q, resid, neg = _consistent_y_channel(target_xyz, w_given_x)
    if q is None:
        # infeasible: large penalty, sloped by how badly equalities fail
        return 10.0 + 100.0 * (resid + neg), None, resid
    if polish and lam > 0:
        nz = target_xyz.shape[2]
        nw, ny = w_given_x.shape[1], target_xyz.shape[1]
        # polishing only matters when the feasible q-set has positive dimension
        if np.linalg.matrix_rank(_stack_constraints(target_xyz, w_given_x)) < nz * nw * ny:
            q = _polish_y_channel(target_xyz, w_given_x, q)
    r_raw, rc_raw = _rates_from_tables(target_xyz, w_given_x, q)
    value = (1.0 - lam) * max(0.0, r_raw) + lam * max(0.0, rc_raw)
    return value, q, resid


def _stack_constraints(target_xyz, w_given_x):
    """Block-diagonal stack of the per-z equality systems (for rank checks)."""
    nz = target_xyz.shape[2]
    nw, ny = w_given_x.shape[1], target_xyz.shape[1]
    blocks = [_z_block(target_xyz, w_given_x, z)[0] for z in range(nz)]
    out = np.zeros((sum(b.shape[0] for b in blocks), nz * nw * ny))
    r = 0
    for i, b in enumerate(blocks):
        out[r : r + b.shape[0], i * nw * ny : (i + 1) * nw * ny] = b
        r += b.shape[0]
    return out


def _descend_from(target_xyz, lam, logits, iters):
    """Numerical-gradient descent with backtracking on p_{W|X} logits."""
    h = 1e-5
    value, q, resid = _scalarized(target_xyz, _softmax(logits), lam, polish=False)
    for _ in range(iters):
        grad = np.zeros_like(logits)
        flat = logits.reshape(-1)
        gflat = grad.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up, _, _ = _scalarized(target_xyz, _softmax(logits), lam, polish=False)
            flat[k] = orig - h
            dn, _, _ = _scalarized(target_xyz, _softmax(logits), lam, polish=False)
            flat[k] = orig
            gflat[k] = (up - dn) / (2 * h)
        norm = float(np.abs(grad).max())
        if norm < 1e-9:
            break
        step = 1.0 / max(1.0, norm)
        improved = False
        for _ in range(25):
            trial = logits - step * grad
            tv, tq, tr = _scalarized(target_xyz, _softmax(trial), lam, polish=False)
            if tv < value - 1e-12:
                logits, value, q, resid = trial, tv, tq, tr
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    # final evaluation with the polish pass enabled
    value, q, resid = _scalarized(target_xyz, _softmax(logits), lam, polish=True)
    return value, _softmax(logits), q, resid


def _corner_logit_inits(nx, w_size):
    """Deterministic starts: copy-like, constant-W, uniform."""
    inits = []
    diag = -6.0 * np.ones((nx, w_size))
    for x in range(nx):
        diag[x, x % w_size] = 6.0
    inits.append(diag)
    const = -6.0 * np.ones((nx, w_size))
    const[:, 0] = 6.0
    inits.append(const)
    inits.append(np.zeros((nx, w_size)))
    return inits


def _coarse_grid_inits(nx, w_size, cap=24):
    """Low-resolution scans of p_{W|X} as extra deterministic starts.

    Rows are drawn from a small bank of distributions; the full product is
    strided down to at most ``cap`` starts so higher-dimensional searches
    stay affordable.
    """
    if w_size == 2:
        bank = [np.array([p, 1.0 - p]) for p in (0.1, 0.3, 0.5, 0.7, 0.9)]
    else:
        bank = [np.full(w_size, 1.0 / w_size)]
        for j in range(w_size):
            row = np.full(w_size, 0.1 / (w_size - 1))
            row[j] = 0.9
            bank.append(row)
    combos = [[]]
    for _ in range(nx):
        combos = [c + [row] for c in combos for row in bank]
    stride = max(1, len(combos) // cap)
    inits = []
    for c in combos[::stride]:
        probs = np.clip(np.array(c), 1e-6, None)
        inits.append(np.log(probs))
    return inits


def ptp_frontier(p_xyz: JointPmf, cfg: SearchConfig = SearchConfig()) -> FrontierResult:
    """Trace (R, C) corner points of the point-to-point region.

    For each λ on a uniform grid, minimizes (1-λ) r_min + λ r_plus_c_min over
    the aux pair by multi-start descent; the best aux per λ is re-evaluated
    through :func:`ptp_rates_for` and its corner recorded.  Points are Pareto
    pruned (ties broken lexicographically by R then C).  Deterministic given
    the seed: every (λ, restart) pair owns a derived RNG stream, and results
    merge by sorted order, so parallel evaluation cannot reorder them.
    """
    target = p_xyz.marginalize(PTP_AXES).table
    nx, ny, nz = target.shape
    w_size = min(cfg.w_cap, (nx * ny * nz) ** 2)
    # strictly interior weights keep every argmin Pareto-consistent (a pure
    # single-coordinate objective would leave the other coordinate loose)
    lams = np.linspace(0.0, 1.0, cfg.lambda_grid)
    effective = np.clip(lams, 5e-4, 1.0 - 5e-4)
    short_iters = max(10, cfg.iters // 3)
    winners: list[tuple[float, np.ndarray, np.ndarray, float] | None] = []
    for li, lam in enumerate(effective):
        candidates = []
        # corner and random starts descend in full; the coarse scan exists for
        # basin coverage and only needs enough steps to sort the basins out
        starts = [(logits, cfg.iters) for logits in _corner_logit_inits(nx, w_size)]
        starts.extend((logits, short_iters) for logits in _coarse_grid_inits(nx, w_size))
        for s in range(cfg.restarts):
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(li, s)))
            starts.append((rng.normal(0.0, 2.0, size=(nx, w_size)), cfg.iters))
        for logits, iters in starts:
            value, wt, q, resid = _descend_from(target, float(lam), logits, iters)
            if q is not None:
                candidates.append((value, wt, q, resid))
        winners.append(min(candidates, key=lambda c: c[0]) if candidates else None)
    # warm-start sweep: each λ may adopt another λ's winner if it scores
    # better, then takes a short polishing descent from the adopted channel;
    # each pool entry carries its rate pair so candidates can be ranked per λ
    pool: list[tuple[np.ndarray, float, float]] = []
    seen = set()
    for w in winners:
        if w is None:
            continue
        key = tuple(np.round(w[1], 6).reshape(-1))
        if key not in seen:
            seen.add(key)
            r_raw, rc_raw = _rates_from_tables(target, w[1], w[2])
            pool.append((w[1], max(0.0, r_raw), max(0.0, rc_raw)))
    raw_points: list[FrontierPoint] = []
    failures: list[float] = []
    for li, lam in enumerate(effective):
        best = winners[li]
        ranked = sorted(pool, key=lambda e: (1.0 - lam) * e[1] + lam * e[2])[:6]
        for wt, _, _ in ranked:
            with np.errstate(all="ignore"):
                logits = np.log(np.clip(wt, 1e-12, None))
            value, wt2, q2, resid2 = _descend_from(target, float(lam), logits, short_iters)
            if q2 is not None and (best is None or value < best[0]):
                best = (value, wt2, q2, resid2)
        if best is None:
            failures.append(float(lams[li]))
            continue
        value, wt, q, resid = best
        aux = aux_ptp_from_tables(
            tuple(f"w{i}" for i in range(w_size)),
            p_xyz.alphabet("X"),
            p_xyz.alphabet("Z"),
            p_xyz.alphabet("Y"),
            wt,
            q,
        )
        rates = ptp_rates_for(p_xyz, aux, tol=max(cfg.tol, 1e-6))
        r, c = rates.corner
        raw_points.append(FrontierPoint(float(lams[li]), r, c, float(value), aux, float(resid)))
    pruned = pareto_prune(raw_points)
    return FrontierResult(tuple(pruned), tuple(failures), tuple(raw_points))


def pareto_prune(points) -> list[FrontierPoint]:
    """Drop dominated (R, C) points; lexicographic (R, C) order on output."""
    ordered = sorted(points, key=lambda p: (p.rate, p.cr, p.lam))
    kept: list[FrontierPoint] = []
    for pt in ordered:
        dominated = any(
            (other.rate <= pt.rate + 1e-12 and other.cr <= pt.cr + 1e-12)
            and (other.rate < pt.rate - 1e-12 or other.cr < pt.cr - 1e-12)
            for other in ordered
            if other is not pt
        )
        duplicate = any(
            abs(other.rate - pt.rate) <= 1e-12 and abs(other.cr - pt.cr) <= 1e-12
            for other in kept
        )
        if not dominated and not duplicate:
            kept.append(pt)
    return kept


# ---------------------------------------------------------------------------
# distributed
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuxChannelDist:
    """Time-shared auxiliary channels for the two-encoder setting.

    Induced joint: p(q) p(x1,x2) p(w1|q,x1) p(w2|q,x2) p(y|q,w1,w2); the
    chains W1 - (Q,X1) - (Q,X2) - W2 and (X1,X2) - (Q,W1,W2) - Y hold by
    construction.
    """

    q_alphabet: Alphabet
    p_q: np.ndarray
    p_w1_given_qx1: CondPmf
    p_w2_given_qx2: CondPmf
    p_y_given_qw1w2: CondPmf

    def __post_init__(self):
        object.__setattr__(self, "p_q", np.asarray(self.p_q, float))
        if self.p_q.shape != (self.q_alphabet.size,):
            raise ValueError("p_q shape must match the Q alphabet")
        if abs(self.p_q.sum() - 1.0) > 1e-9 or (self.p_q < 0).any():
            raise ValueError("p_q must be a distribution")
        for ch in (self.p_w1_given_qx1, self.p_w2_given_qx2, self.p_y_given_qw1w2):
            if not ch.defined.all():
                raise ValueError("aux channels must be fully defined")

    @property
    def w1_alphabet(self) -> Alphabet:
        return self.p_w1_given_qx1.out_alphabets[0]

    @property
    def w2_alphabet(self) -> Alphabet:
        return self.p_w2_given_qx2.out_alphabets[0]


def aux_dist_from_tables(
    q_symbols, p_q, x1_alphabet, x2_alphabet, y_alphabet, w1_symbols, w2_symbols, w1_table, w2_table, y_table
):
    """Tables: w1 (|Q|,|X1|,|W1|); w2 (|Q|,|X2|,|W2|); y (|Q|,|W1|,|W2|,|Y|)."""
    q_alpha = Alphabet(tuple(q_symbols))
    w1_alpha = Alphabet(tuple(w1_symbols))
    w2_alpha = Alphabet(tuple(w2_symbols))
    return AuxChannelDist(
        q_alpha,
        np.asarray(p_q, float),
        CondPmf.from_rows(("Q", "X1"), (q_alpha, x1_alphabet), ("W1",), (w1_alpha,), np.asarray(w1_table, float)),
        CondPmf.from_rows(("Q", "X2"), (q_alpha, x2_alphabet), ("W2",), (w2_alpha,), np.asarray(w2_table, float)),
        CondPmf.from_rows(
            ("Q", "W1", "W2"), (q_alpha, w1_alpha, w2_alpha), ("Y",), (y_alphabet,), np.asarray(y_table, float)
        ),
    )


def dist_induced_joint(p_x1x2y: JointPmf, aux: AuxChannelDist) -> JointPmf:
    p_x1x2 = p_x1x2y.marginalize(("X1", "X2")).table
    table = np.einsum(
        "q,ab,qaw,qbv,qwvy->qwvaby",
        aux.p_q,
        p_x1x2,
        aux.p_w1_given_qx1.table,
        aux.p_w2_given_qx2.table,
        aux.p_y_given_qw1w2.table,
    )
    return JointPmf(
        ("Q", "W1", "W2", "X1", "X2", "Y"),
        (
            aux.q_alphabet,
            aux.w1_alphabet,
            aux.w2_alphabet,
            p_x1x2y.alphabet("X1"),
            p_x1x2y.alphabet("X2"),
            p_x1x2y.alphabet("Y"),
        ),
        table,
    )


def dist_consistency_residual(p_x1x2y: JointPmf, aux: AuxChannelDist) -> float:
    """max |induced (X1,X2,Y) marginal - target| over all cells."""
    induced = dist_induced_joint(p_x1x2y, aux).marginalize(DIST_AXES).table
    target = p_x1x2y.marginalize(DIST_AXES).table
    return float(np.abs(induced - target).max())


@dataclass(frozen=True)
class DistRateTriple:
    """The four clamped lower bounds of the two-encoder region (bits)."""

    r1: float
    r2: float
    r1_plus_r2: float
    r1_plus_r2_plus_c: float
    informations: tuple[float, float, float, float, float]


def dist_rates_for(
    p_x1x2y: JointPmf,
    aux: AuxChannelDist,
    tol: float = 1e-9,
    enforce_cardinality: bool = True,
) -> DistRateTriple:
    """Evaluate the four lower bounds on the induced joint.

    The per-encoder cardinality defaults |W_j| <= |X_j| are working caps, not
    theoretical necessities; pass ``enforce_cardinality=False`` to lift them.
    """
    residual = dist_consistency_residual(p_x1x2y, aux)
    if residual > tol:
        raise InconsistentAuxError(residual, tol)
    if enforce_cardinality:
        if aux.w1_alphabet.size > p_x1x2y.alphabet("X1").size:
            raise ValueError("|W1| exceeds |X1|; pass enforce_cardinality=False to allow")
        if aux.w2_alphabet.size > p_x1x2y.alphabet("X2").size:
            raise ValueError("|W2| exceeds |X2|; pass enforce_cardinality=False to allow")
    if aux.q_alphabet.size > DEFAULT_Q_CAP:
        logger.debug("time-sharing alphabet size %d exceeds default cap", aux.q_alphabet.size)
    joint = dist_induced_joint(p_x1x2y, aux)
    i1 = conditional_mutual_information(joint, "X1", "W1", "Q")
    i2 = conditional_mutual_information(joint, "X2", "W2", "Q")
    i3 = conditional_mutual_information(joint, ("X1", "X2", "W2", "Y"), "W1", "Q")
    i4 = conditional_mutual_information(joint, ("X1", "X2", "Y"), "W2", "Q")
    i5 = conditional_mutual_information(joint, "W1", "W2", "Q")
    bounds = (i1 - i5, i2 - i5, i1 + i2 - i5, i3 + i4 - i5)
    if min(bounds) < 0:
        logger.debug("unclamped distributed bounds: %s", bounds)
    return DistRateTriple(
        r1=max(0.0, bounds[0]),
        r2=max(0.0, bounds[1]),
        r1_plus_r2=max(0.0, bounds[2]),
        r1_plus_r2_plus_c=max(0.0, bounds[3]),
        informations=(i1, i2, i3, i4, i5),
    )


def dist_membership(
    p_x1x2y: JointPmf,
    r1: float,
    r2: float,
    cr: float,
    aux: AuxChannelDist,
    tol: float = 1e-9,
) -> bool:
    rates = dist_rates_for(p_x1x2y, aux, tol=tol)
    return (
        r1 >= rates.r1 - tol
        and r2 >= rates.r2 - tol
        and r1 + r2 >= rates.r1_plus_r2 - tol
        and r1 + r2 + cr >= rates.r1_plus_r2_plus_c - tol
    )


# ---------------------------------------------------------------------------
# bridges to the exact inequality systems
# ---------------------------------------------------------------------------


def ptp_bindings(rates: PtpRatePair) -> dict:
    """Exact-rational bindings for the point-to-point inequality systems."""
    from fractions import Fraction

    return {
        "I_X_W": Fraction(rates.i_x_w),
        "I_W_Z": Fraction(rates.i_w_z),
        "I_XYZ_W": Fraction(rates.i_xyz_w),
    }


def dist_bindings(rates: DistRateTriple) -> dict:
    from fractions import Fraction

    i1, i2, i3, i4, i5 = rates.informations
    return {
        "I_X1_W1": Fraction(i1),
        "I_X2_W2": Fraction(i2),
        "I_X1X2W2Y_W1": Fraction(i3),
        "I_X1X2Y_W2": Fraction(i4),
        "I_W1_W2": Fraction(i5),
        "slack": Fraction(0),
    }
