"""Robust letter typicality.

A length-``n`` tuple of sequences is ``delta``-typical for a joint PMF ``p``
when every joint letter cell ``a`` satisfies

    |freq(a) - p(a)| <= delta * p(a),

with ``freq`` the empirical frequency over positions.  The slack is relative,
so cells of probability zero may never occur in a typical tuple.  ``delta``
is a user parameter in (0, 1); inflated slacks (>= 1) arise internally when a
decoder widens its test, and are accepted here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .budget import check_budget
from .probability import JointPmf


@dataclass(frozen=True)
class Sequence:
    """A length-n word on a named axis; letters are alphabet indices."""

    axis: str
    letters: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.letters)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.letters, dtype=int)


@dataclass(frozen=True)
class TypicalityParams:
    """User slack ``delta`` plus the derived decoder slack ``delta2``.

    ``delta2 = delta * (|X||Y| + |Z|)`` is computed from the problem's
    alphabet sizes and is never set directly.
    """

    delta: float
    x_size: int
    y_size: int
    z_size: int

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")
        for s in (self.x_size, self.y_size, self.z_size):
            if s < 1:
                raise ValueError("alphabet sizes must be >= 1")

    @property
    def delta2(self) -> float:
        return self.delta * (self.x_size * self.y_size + self.z_size)


def _coerce_sequences(seqs, p: JointPmf) -> np.ndarray:
    """Stack input sequences into a (num_axes, n) int array in p's axis order."""
    if isinstance(seqs, Sequence):
        seqs = {seqs.axis: seqs.letters}
    if isinstance(seqs, dict):
        arrs = []
        for name in p.names:
            if name not in seqs:
                raise ValueError(f"missing sequence for axis {name!r}")
            item = seqs[name]
            arrs.append(item.as_array() if isinstance(item, Sequence) else np.asarray(item, int))
    elif isinstance(seqs, (list, tuple)) and len(p.names) > 1:
        if len(seqs) != len(p.names):
            raise ValueError(f"expected {len(p.names)} sequences, got {len(seqs)}")
        arrs = [s.as_array() if isinstance(s, Sequence) else np.asarray(s, int) for s in seqs]
    else:
        if len(p.names) != 1:
            raise ValueError("a bare sequence only matches a single-axis PMF")
        arrs = [np.asarray(seqs, dtype=int)]
    stacked = np.stack(arrs)
    if stacked.ndim != 2:
        raise ValueError("sequences must be one-dimensional")
    n = stacked.shape[1]
    lengths = {a.shape[0] for a in arrs}
    if len(lengths) != 1:
        raise ValueError(f"sequences must share one length, got {sorted(lengths)}")
    for arr, alpha in zip(stacked, p.alphabets):
        if np.any(arr < 0) or np.any(arr >= alpha.size):
            raise ValueError("letter index out of alphabet range")
    if n < 1:
        raise ValueError("sequences must be nonempty")
    return stacked


def is_typical(seqs, p: JointPmf, delta: float) -> bool:
    """Robust typicality of one sequence tuple for the joint PMF ``p``."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    stacked = _coerce_sequences(seqs, p)
    n = stacked.shape[1]
    sizes = [a.size for a in p.alphabets]
    code = np.zeros(n, dtype=int)
    for arr, size in zip(stacked, sizes):
        code = code * size + arr
    counts = np.bincount(code, minlength=int(np.prod(sizes)))
    flat = p.table.reshape(-1)
    # compare counts, not frequencies, with a hair of float slack so exact
    # boundary cells do not flip on rounding; identical to the batch masks
    lo = n * flat * (1 - delta)
    hi = n * flat * (1 + delta)
    return bool(np.all((counts >= lo - 1e-12) & (counts <= hi + 1e-12)))


def enumerate_sequences(size: int, n: int, budget: int | None = None) -> np.ndarray:
    """All ``size**n`` length-n words, lexicographic, as a (size**n, n) array."""
    total = size**n
    check_budget(total * n, budget, what="sequence enumeration")
    codes = np.arange(total)
    out = np.empty((total, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[:, pos] = codes % size
        codes //= size
    return out


def sequence_codes(seqs: np.ndarray, size: int) -> np.ndarray:
    """Big-endian codes of a (m, n) letter array on an alphabet of ``size``."""
    seqs = np.asarray(seqs, dtype=int)
    code = np.zeros(seqs.shape[0], dtype=np.int64)
    for pos in range(seqs.shape[1]):
        code = code * size + seqs[:, pos]
    return code


def marginal_typical_mask(seqs: np.ndarray, marginal: np.ndarray, delta: float) -> np.ndarray:
    """Boolean mask over rows of ``seqs``: which words are delta-typical for
    the single-letter distribution ``marginal``."""
    seqs = np.atleast_2d(np.asarray(seqs, dtype=int))
    m, n = seqs.shape
    size = marginal.shape[0]
    counts = np.zeros((m, size), dtype=np.int64)
    for a in range(size):
        counts[:, a] = (seqs == a).sum(axis=1)
    lo = n * marginal * (1 - delta)
    hi = n * marginal * (1 + delta)
    return np.all((counts >= lo - 1e-12) & (counts <= hi + 1e-12), axis=1)


def pairwise_typical_mask(
    seqs_a: np.ndarray, seqs_b: np.ndarray, table_ab: np.ndarray, delta: float
) -> np.ndarray:
    """Joint typicality of every (row of a, row of b) pair.

    Returns an (A, B) boolean matrix for sequence batches of shape (A, n) and
    (B, n) against the two-axis single-letter table ``table_ab``.  Cell
    counts come from one matrix product per letter pair, so the cost is
    O(|A||B| n) per cell rather than per pair.
    """
    seqs_a = np.atleast_2d(np.asarray(seqs_a, dtype=int))
    seqs_b = np.atleast_2d(np.asarray(seqs_b, dtype=int))
    if seqs_a.shape[1] != seqs_b.shape[1]:
        raise ValueError("sequence batches must share one length")
    n = seqs_a.shape[1]
    sa, sb = table_ab.shape
    onehot_a = [(seqs_a == u).astype(np.float64) for u in range(sa)]
    onehot_b = [(seqs_b == v).astype(np.float64) for v in range(sb)]
    ok = np.ones((seqs_a.shape[0], seqs_b.shape[0]), dtype=bool)
    for u in range(sa):
        for v in range(sb):
            counts = onehot_a[u] @ onehot_b[v].T
            p = table_ab[u, v]
            ok &= (counts >= n * p * (1 - delta) - 1e-12) & (
                counts <= n * p * (1 + delta) + 1e-12
            )
    return ok


def typical_set(p: JointPmf, n: int, delta: float, budget: int | None = None) -> np.ndarray:
    """All delta-typical words of length ``n`` for a single-axis PMF.

    Returned as a (T, n) letter array in lexicographic order; T may be 0.
    """
    if len(p.names) != 1:
        raise ValueError("typical_set expects a single-axis PMF")
    size = p.alphabets[0].size
    seqs = enumerate_sequences(size, n, budget)
    mask = marginal_typical_mask(seqs, p.table, delta)
    return seqs[mask]


def cond_typical_set(
    pair: JointPmf, given_seq, delta: float, budget: int | None = None
) -> np.ndarray:
    """Words w^n with (given, w) jointly typical under the two-axis ``pair``.

    The conditioning sequence lives on the first axis of ``pair``; candidates
    are enumerated over the second axis (budget-guarded).
    """
    if len(pair.names) != 2:
        raise ValueError("cond_typical_set expects a two-axis PMF")
    g = given_seq.as_array() if isinstance(given_seq, Sequence) else np.asarray(given_seq, int)
    size = pair.alphabets[1].size
    candidates = enumerate_sequences(size, g.shape[0], budget)
    mask = pairwise_typical_mask(g[None, :], candidates, pair.table, delta)[0]
    return candidates[mask]


def typical_mass(p: JointPmf, n: int, delta: float, budget: int | None = None) -> float:
    """Probability of the typical set under the n-fold product of ``p``."""
    if len(p.names) != 1:
        raise ValueError("typical_mass expects a single-axis PMF")
    words = typical_set(p, n, delta, budget)
    if words.shape[0] == 0:
        return 0.0
    return float(np.prod(p.table[words], axis=1).sum())
