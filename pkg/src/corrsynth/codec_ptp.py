"""Blocklength-n synthesis codec for the single-encoder system.

Pipeline: a codebook of L·K words is drawn IID from the pruned n-letter
codeword law (the product law restricted to the typical set, renormalized by
1-ε); the encoder maps a source word to a codeword index by sub-PMF weights
proportional to the posterior likelihood, with index 0 absorbing the deficit;
duplicate codewords are merged and the distinct indices are binned uniformly
into M bins, the transmitted message being the bin (0 = declare failure);
the decoder intersects the received bin with the decoder-side typical set
against its side information and emits the codeword if unique, else a fixed
fallback word.  The induced law over source/output words is measured exactly
by enumeration or estimated by end-to-end sampling.

Conventions adopted where the construction leaves freedom:

- message 0: emitted when the source word is atypical, when the sub-PMF is
  invalid (total weight above one), or with the leftover deficit weight;
- fallback word w0: the constant word of the first codeword symbol (decoding
  message 0, an empty bin, or an ambiguous bin all yield w0);
- non-integer 2^{n rate}: rounded to the nearest integer, floor one; the
  effective rates log2(size)/n are recorded alongside the requested ones;
- empty typical set: sampling raises; :func:`null_codebook` builds the
  degenerate stand-in (all-w0 entries, ε = 1) whose encoder weights all
  vanish, so every message is 0 and the decoder always falls back — the
  well-defined limit of total pruning, used at blocklengths too short for
  any word to be typical.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .budget import check_budget
from .probability import Alphabet, CondPmf, JointPmf, ProductPmf, total_variation
from .typicality import (
    Sequence,
    TypicalityParams,
    enumerate_sequences,
    marginal_typical_mask,
    pairwise_typical_mask,
    typical_set,
)

#: derived-stream indices off a run seed (the distributed codec uses 0..3)
CODEBOOK_STREAM = 0
BINNING_STREAM = 1


class EmptyTypicalSetError(ValueError):
    """No word of the requested blocklength is typical for the codeword law."""


def derived_rng(seed: int, stream: int) -> np.random.Generator:
    """Child generator for one named stream of a run seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def _pow2_size(n: int, rate: float) -> int:
    return max(1, round(2.0 ** (n * rate)))


@dataclass(frozen=True)
class CodecParams:
    """Blocklength, rates (bits/letter), typicality slacks, and the run seed.

    ``rt`` is the codebook rate, ``r`` the message rate, ``c`` the common
    randomness rate.  ``r = 0`` (a single bin) and ``eta = 0`` (no weight
    headroom) are permitted degenerate settings; both arise when this codec
    plays the role of one leg of the two-encoder system.
    """

    n: int
    rt: float
    r: float
    c: float
    delta: float
    eta: float
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"blocklength must be >= 1, got {self.n}")
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")
        if not (0 <= self.eta < 1):
            raise ValueError(f"eta must lie in [0,1), got {self.eta}")
        if self.rt <= 0:
            raise ValueError(f"codebook rate must be positive, got {self.rt}")
        if not (0 <= self.r <= self.rt):
            raise ValueError(f"message rate must lie in [0, rt], got {self.r}")
        if self.c < 0:
            raise ValueError(f"common randomness rate must be >= 0, got {self.c}")

    @property
    def l_size(self) -> int:
        """Codewords per randomness block."""
        return _pow2_size(self.n, self.rt)

    @property
    def m_size(self) -> int:
        """Number of message bins (message 0 is extra)."""
        return _pow2_size(self.n, self.r)

    @property
    def k_size(self) -> int:
        """Number of common-randomness blocks."""
        return _pow2_size(self.n, self.c)

    @property
    def effective_rt(self) -> float:
        return math.log2(self.l_size) / self.n

    @property
    def effective_r(self) -> float:
        return math.log2(self.m_size) / self.n

    @property
    def effective_c(self) -> float:
        return math.log2(self.k_size) / self.n


@dataclass(frozen=True)
class Codebook:
    """IID draws from the pruned codeword law, one row block per μ.

    ``entries[mu, l]`` is the letter array of codeword (l+1, mu+1); ε is the
    exact pruning mass 1 - P(typical set) under the n-fold product law.  A
    degenerate codebook stands in when the typical set is empty: ε = 1 and
    every entry is the fallback word, so encoders built on it carry weight 0.
    """

    entries: np.ndarray
    epsilon: float
    w_size: int
    degenerate: bool = False

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.int64)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 3:
            raise ValueError("entries must have shape (K, L, n)")
        if not (0 <= self.epsilon <= 1):
            raise ValueError(f"epsilon must lie in [0,1], got {self.epsilon}")

    @property
    def k_size(self) -> int:
        return self.entries.shape[0]

    @property
    def l_size(self) -> int:
        return self.entries.shape[1]

    @property
    def n(self) -> int:
        return self.entries.shape[2]


def sample_codebook(
    p_w: JointPmf, params: CodecParams, rng: np.random.Generator, budget: int | None = None
) -> Codebook:
    """Draw the L·K codewords IID from the pruned n-letter codeword law."""
    if len(p_w.names) != 1:
        raise ValueError("sample_codebook expects a single-axis codeword PMF")
    words = typical_set(p_w, params.n, params.delta, budget)
    if words.shape[0] == 0:
        raise EmptyTypicalSetError(
            f"no length-{params.n} word is {params.delta}-typical for the codeword law"
        )
    kk, ll = params.k_size, params.l_size
    check_budget(kk * ll * params.n, budget, what="codebook sampling")
    word_probs = np.prod(p_w.table[words], axis=1)
    mass = float(word_probs.sum())
    idx = rng.choice(words.shape[0], size=kk * ll, p=word_probs / mass)
    return Codebook(
        entries=words[idx].reshape(kk, ll, params.n),
        epsilon=1.0 - mass,
        w_size=p_w.alphabets[0].size,
    )


def null_codebook(w_size: int, params: CodecParams) -> Codebook:
    """Degenerate all-fallback codebook for an empty typical set (ε = 1)."""
    shape = (params.k_size, params.l_size, params.n)
    return Codebook(entries=np.zeros(shape, np.int64), epsilon=1.0, w_size=w_size, degenerate=True)


@dataclass(frozen=True)
class BinningMap:
    """Per-μ duplicate merge followed by uniform binning of distinct words.

    ``dedup[mu, l]`` is the distinct-word index of codeword l (equal indices
    iff equal letter arrays, numbered in first-occurrence order);
    ``bins[mu][j]`` is the bin of distinct word j, a value in 1..M.
    """

    dedup: np.ndarray
    bins: tuple[np.ndarray, ...]
    m_size: int

    def __post_init__(self):
        object.__setattr__(self, "dedup", np.asarray(self.dedup, dtype=np.int64))
        object.__setattr__(self, "bins", tuple(np.asarray(b, dtype=np.int64) for b in self.bins))
        for b in self.bins:
            if b.size and (b.min() < 1 or b.max() > self.m_size):
                raise ValueError("bin labels must lie in 1..M")

    @property
    def theta(self) -> tuple[int, ...]:
        """Distinct-codeword count per μ."""
        return tuple(b.shape[0] for b in self.bins)

    def messages(self, mu: int) -> np.ndarray:
        """Bin label of every l in 0..L-1 (composition of dedup and bins)."""
        return self.bins[mu][self.dedup[mu]]


def _first_occurrence_dedup(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(dedup indices over rows, first-occurrence row positions)."""
    seen: dict[bytes, int] = {}
    dedup = np.empty(block.shape[0], dtype=np.int64)
    firsts: list[int] = []
    for l in range(block.shape[0]):
        key = block[l].tobytes()
        if key not in seen:
            seen[key] = len(firsts)
            firsts.append(l)
        dedup[l] = seen[key]
    return dedup, np.asarray(firsts, dtype=np.int64)


def sample_binning(codebook: Codebook, params: CodecParams, rng: np.random.Generator) -> BinningMap:
    """Merge duplicate codewords per μ, then bin distinct words uniformly."""
    mm = params.m_size
    dedup = np.empty((codebook.k_size, codebook.l_size), dtype=np.int64)
    bins = []
    for mu in range(codebook.k_size):
        dedup[mu], firsts = _first_occurrence_dedup(codebook.entries[mu])
        bins.append(rng.integers(1, mm + 1, size=firsts.shape[0]))
    return BinningMap(dedup=dedup, bins=tuple(bins), m_size=mm)


@dataclass(frozen=True)
class EncoderSubPmf:
    """Sub-PMF over codeword indices {0} ∪ [L] for one source word and μ.

    ``weights[0]`` is the deficit when valid; when the raw weights total more
    than one the flag drops and downstream consumers send message 0.
    """

    weights: np.ndarray
    s: float
    valid: bool


def _complement_to_one(partial: np.ndarray) -> float:
    """Mass completing ``partial`` so the full vector fsums to exactly one.

    ``fsum([1, -v...])`` is the correctly rounded value of 1 - Σv, and adding
    it back leaves a residual below half an ulp of 1, so the completed
    vector's compensated total rounds to 1.0 exactly.  The clamp covers the
    knife-edge where the true total already exceeds one by under an ulp.
    """
    return max(0.0, math.fsum(np.concatenate(([1.0], -np.asarray(partial, dtype=float)))))


def _coerce_word(seq, n: int) -> np.ndarray:
    arr = seq.as_array() if isinstance(seq, Sequence) else np.asarray(seq, dtype=int)
    if arr.shape != (n,):
        raise ValueError(f"expected a length-{n} word, got shape {arr.shape}")
    return arr


def _conditional_rows(joint: JointPmf, axis: int) -> np.ndarray:
    """p(other | axis) as a dense (axis, other) table, zeros where undefined."""
    names = joint.names
    cond = joint.condition((names[axis],))
    return np.where(cond.defined[:, None], cond.table, 0.0)


def _encoder_weight_batch(
    xs: np.ndarray,
    entries_mu: np.ndarray,
    p_joint_xw: JointPmf,
    epsilon: float,
    params: CodecParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw index weights for a batch of source words against one μ-block.

    Returns (weights (A, L), s (A,), valid (A,)); atypical source words get
    all-zero weights, which downstream logic reads as a point mass on index 0.
    Shared verbatim by the scalar operation, the exact-joint enumeration, and
    the sampler, so all paths agree to the last bit.
    """
    p_x = p_joint_xw.table.sum(axis=1)
    typical_x = marginal_typical_mask(xs, p_x, params.delta)
    pair_mask = pairwise_typical_mask(xs, entries_mu, p_joint_xw.table, params.delta)
    cond_xw = _conditional_rows(p_joint_xw, axis=1)  # (w, x)
    factors = cond_xw[entries_mu[None, :, :], xs[:, None, :]]  # (A, L, n)
    post = factors.prod(axis=2)
    p_xn = np.prod(p_x[xs], axis=1)
    if np.any(typical_x & (p_xn <= 0.0)):
        raise AssertionError("typical source word with zero product probability")
    scale = np.zeros_like(p_xn)
    live = typical_x & (p_xn > 0.0)
    scale[live] = (1.0 - epsilon) / ((1.0 + params.eta) * entries_mu.shape[0] * p_xn[live])
    weights = scale[:, None] * post * pair_mask
    s = weights.sum(axis=1)
    return weights, s, s <= 1.0


def encoder_subpmf(
    x_seq, mu: int, codebook: Codebook, p_joint_xw: JointPmf, params: CodecParams
) -> EncoderSubPmf:
    """Sub-PMF of the index encoder for one source word and one μ.

    Typical source words weight index l by the pruned posterior likelihood of
    codeword (l, μ); atypical ones put all mass on index 0.  The weights are
    a valid sub-PMF when their total s is at most one, index 0 absorbing the
    deficit; otherwise the flag drops and the message convention takes over.
    """
    x = _coerce_word(x_seq, params.n)
    weights, s, valid = _encoder_weight_batch(
        x[None, :], codebook.entries[mu], p_joint_xw, codebook.epsilon, params
    )
    s0, valid0 = float(s[0]), bool(valid[0])
    out = np.empty(codebook.l_size + 1)
    out[1:] = weights[0]
    out[0] = _complement_to_one(out[1:]) if valid0 else 0.0
    return EncoderSubPmf(weights=out, s=s0, valid=valid0)


def induced_message_pmf(
    x_seq,
    mu: int,
    codebook: Codebook,
    binning: BinningMap,
    p_joint_xw: JointPmf,
    params: CodecParams,
) -> np.ndarray:
    """PMF over messages {0} ∪ [M] induced by encoder, dedup, and binning.

    An invalid sub-PMF sends message 0 deterministically.  Message 0 takes
    exactly the complement of the binned mass, so the vector always totals
    one under compensated summation.
    """
    enc = encoder_subpmf(x_seq, mu, codebook, p_joint_xw, params)
    return _message_pmf_from_labels(enc.weights[1:], enc.valid, binning.messages(mu), binning.m_size)


def _message_pmf_from_labels(
    weights: np.ndarray, valid: bool, labels: np.ndarray, m_size: int
) -> np.ndarray:
    """Three-case message law: invalid → 0, else bin sums with 0 = deficit."""
    out = np.zeros(m_size + 1)
    if not valid:
        out[0] = 1.0
        return out
    out += np.bincount(labels, weights=weights, minlength=m_size + 1)
    out[0] = _complement_to_one(out[1:])
    return out


def encoder_validity(
    codebook: Codebook,
    p_joint_xw: JointPmf,
    params: CodecParams,
    budget: int | None = None,
) -> tuple[bool, float]:
    """Whether every (typical input word, block) pair yields a proper sub-PMF.

    Returns ``(all_valid, fraction)``, the fraction averaging over typical
    input words and blocks.  An empty typical input set or a degenerate
    codebook leaves nothing to oversubscribe: vacuously valid, fraction 1.0.
    """
    p_x = p_joint_xw.marginalize((p_joint_xw.names[0],))
    xs = typical_set(p_x, params.n, params.delta, budget)
    if xs.shape[0] == 0 or codebook.degenerate:
        return True, 1.0
    flags = np.empty((codebook.k_size, xs.shape[0]), dtype=bool)
    for mu in range(codebook.k_size):
        _, _, flags[mu] = _encoder_weight_batch(
            xs, codebook.entries[mu], p_joint_xw, codebook.epsilon, params
        )
    return bool(flags.all()), float(flags.mean())


def decode_map(
    z_seq,
    m: int,
    mu: int,
    codebook: Codebook,
    binning: BinningMap,
    p_joint_wz: JointPmf,
    typ: TypicalityParams,
) -> np.ndarray:
    """Codeword selected by the bin/side-information intersection, else w0.

    The candidate set is the distinct codewords of block μ whose bin is m and
    whose pair with z is typical at the widened slack delta2; the unique
    candidate wins, any other cardinality (including m = 0) falls back to the
    constant word of the first codeword symbol.
    """
    n = codebook.n
    z = _coerce_word(z_seq, n)
    w0 = np.zeros(n, dtype=np.int64)
    if not (0 <= m <= binning.m_size):
        raise ValueError(f"message must lie in 0..{binning.m_size}, got {m}")
    if m == 0:
        return w0
    _, firsts = _first_occurrence_dedup(codebook.entries[mu])
    words = codebook.entries[mu][firsts]
    candidates = words[binning.bins[mu] == m]
    if candidates.shape[0] == 0:
        return w0
    ok = pairwise_typical_mask(z[None, :], candidates, p_joint_wz.table.T, typ.delta2)[0]
    matches = candidates[ok]
    if matches.shape[0] == 1:
        return matches[0]
    return w0


# ---------------------------------------------------------------------------
# exact induced law and end-to-end sampling
# ---------------------------------------------------------------------------


def word_alphabet(base: Alphabet, n: int) -> Alphabet:
    """Alphabet of all length-n words, lexicographic, symbols joined."""
    sep = "" if all(len(sym) == 1 for sym in base.symbols) else ","
    words = enumerate_sequences(base.size, n)
    return Alphabet(tuple(sep.join(base.symbols[c] for c in row) for row in words))


def product_pmf(p: JointPmf, n: int, budget: int | None = None) -> JointPmf:
    """n-fold product law as a JointPmf over word alphabets (same axis names)."""
    table = ProductPmf(p, n).table(budget)
    return JointPmf(p.names, tuple(word_alphabet(a, n) for a in p.alphabets), table)


@dataclass(frozen=True)
class _SystemTables:
    """Shared precomputation behind exact enumeration and sampling."""

    p_xz_words: np.ndarray  # (Ax, Az) source-word law
    messages: np.ndarray  # (K, Ax, M+1) message PMFs
    decoded: np.ndarray  # (K, Az, M+1) indices into per-μ decode rows, 0 = w0
    y_rows: list[np.ndarray]  # per μ: (Az, 1+Θ_μ, Ay) output-word laws


def _build_system_tables(
    p_xz: JointPmf,
    p_w_given_x: CondPmf,
    p_y_given_zw: CondPmf,
    codebook: Codebook,
    binning: BinningMap,
    params: CodecParams,
    budget: int | None = None,
) -> _SystemTables:
    nx, nz = (a.size for a in p_xz.alphabets)
    ny = p_y_given_zw.out_alphabets[0].size
    nw = codebook.w_size
    n, kk, mm = params.n, codebook.k_size, binning.m_size
    check_budget((nx * ny * nz) ** n, budget, what="exact induced-law enumeration")
    typ = TypicalityParams(params.delta, nx, ny, nz)
    xs = enumerate_sequences(nx, n, budget)
    zs = enumerate_sequences(nz, n, budget)
    ys = enumerate_sequences(ny, n, budget)

    p_xz_words = np.ones((xs.shape[0], zs.shape[0]))
    for i in range(n):
        p_xz_words *= p_xz.table[xs[:, i][:, None], zs[None, :, i]]

    p_x = p_xz.table.sum(axis=1)
    p_joint_xw = JointPmf(
        (p_xz.names[0], p_w_given_x.out_names[0]),
        (p_xz.alphabets[0], p_w_given_x.out_alphabets[0]),
        p_x[:, None] * p_w_given_x.table,
    )
    p_zw_table = np.einsum("xz,xw->zw", p_xz.table, p_w_given_x.table)

    messages = np.zeros((kk, xs.shape[0], mm + 1))
    decoded = np.zeros((kk, zs.shape[0], mm + 1), dtype=np.int64)
    y_rows: list[np.ndarray] = []
    for mu in range(kk):
        weights, _, valid = _encoder_weight_batch(
            xs, codebook.entries[mu], p_joint_xw, codebook.epsilon, params
        )
        onehot = np.zeros((codebook.l_size, mm + 1))
        onehot[np.arange(codebook.l_size), binning.messages(mu)] = 1.0
        msg = weights @ onehot
        msg[~valid] = 0.0
        msg[:, 0] = np.maximum(0.0, 1.0 - msg[:, 1:].sum(axis=1))
        messages[mu] = msg

        _, firsts = _first_occurrence_dedup(codebook.entries[mu])
        words = codebook.entries[mu][firsts]
        ok = pairwise_typical_mask(zs, words, p_zw_table, typ.delta2)  # (Az, Θ)
        for m in range(1, mm + 1):
            cols = np.where(binning.bins[mu] == m)[0]
            if cols.size == 0:
                continue
            sub = ok[:, cols]
            unique = sub.sum(axis=1) == 1
            decoded[mu, unique, m] = 1 + cols[np.argmax(sub[unique], axis=1)]

        rows_words = np.vstack([np.zeros((1, n), dtype=np.int64), words])
        tbl = np.ones((zs.shape[0], rows_words.shape[0], ys.shape[0]))
        for i in range(n):
            tbl *= p_y_given_zw.table[
                zs[:, i][:, None, None], rows_words[None, :, i, None], ys[None, None, :, i]
            ]
        y_rows.append(tbl)
    return _SystemTables(p_xz_words, messages, decoded, y_rows)


def induced_joint_exact(
    p_xz: JointPmf,
    p_w_given_x: CondPmf,
    p_y_given_zw: CondPmf,
    codebook: Codebook,
    binning: BinningMap,
    params: CodecParams,
    budget: int | None = None,
) -> JointPmf:
    """Exact n-letter law of (source, output, side information) words.

    Sums the message and decode chain over every μ and m: the output word is
    drawn from the product channel law conditioned on the decoded codeword
    and the side-information word.  Axes are the source names with word
    alphabets; the table totals one within 1e-9 (checked).
    """
    tabs = _build_system_tables(p_xz, p_w_given_x, p_y_given_zw, codebook, binning, params, budget)
    ax, az = tabs.p_xz_words.shape
    ay = tabs.y_rows[0].shape[2]
    kk, mm = tabs.messages.shape[0], tabs.messages.shape[2] - 1
    out = np.zeros((ax, ay, az))
    for mu in range(kk):
        for zi in range(az):
            rows = tabs.y_rows[mu][zi]  # (1+Θ, Ay)
            gather = np.zeros((mm + 1, rows.shape[0]))
            gather[np.arange(mm + 1), tabs.decoded[mu, zi]] = 1.0
            mass = tabs.messages[mu] @ gather  # (Ax, 1+Θ)
            out[:, :, zi] += tabs.p_xz_words[:, zi][:, None] * (mass @ rows)
    out /= kk
    total = float(out.sum())
    if abs(total - 1.0) > 1e-9:
        raise ArithmeticError(f"induced law sums to {total}, expected 1")
    x_name, z_name = p_xz.names
    y_name = p_y_given_zw.out_names[0]
    return JointPmf(
        (x_name, y_name, z_name),
        (
            word_alphabet(p_xz.alphabets[0], params.n),
            word_alphabet(p_y_given_zw.out_alphabets[0], params.n),
            word_alphabet(p_xz.alphabets[1], params.n),
        ),
        out,
    )


def sample_induced(
    p_xz: JointPmf,
    p_w_given_x: CondPmf,
    p_y_given_zw: CondPmf,
    codebook: Codebook,
    binning: BinningMap,
    params: CodecParams,
    num_samples: int,
    rng: np.random.Generator,
    budget: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """End-to-end Monte Carlo of the codec, returning word codes (x, y, z).

    Draws (x^n, z^n) from the product source, μ uniformly, the message from
    the encoder chain, decodes, and draws y^n from the decoded channel row.
    Categorical draws batch by distinct table row, so the cost is linear in
    the sample count.
    """
    tabs = _build_system_tables(p_xz, p_w_given_x, p_y_given_zw, codebook, binning, params, budget)
    ax, az = tabs.p_xz_words.shape
    kk = tabs.messages.shape[0]

    flat = tabs.p_xz_words.reshape(-1)
    xz = rng.choice(ax * az, size=num_samples, p=flat / flat.sum())
    x_codes, z_codes = xz // az, xz % az
    mus = rng.integers(0, kk, size=num_samples)

    msg_rows = tabs.messages.reshape(kk * ax, -1)
    ms = _rowwise_categorical(msg_rows, mus * ax + x_codes, rng.random(num_samples))

    y_codes = np.empty(num_samples, dtype=np.int64)
    uy = rng.random(num_samples)
    for mu in range(kk):
        sel = mus == mu
        if not np.any(sel):
            continue
        rows = tabs.y_rows[mu]  # (Az, 1+Θ, Ay)
        dec = tabs.decoded[mu, z_codes[sel], ms[sel]]
        flat_rows = rows.reshape(-1, rows.shape[2])
        y_codes[sel] = _rowwise_categorical(
            flat_rows, z_codes[sel] * rows.shape[1] + dec, uy[sel]
        )
    return x_codes, y_codes, z_codes


def _rowwise_categorical(table_rows, row_ids, uniform):
    """Draw one index per sample from its row's PMF via grouped CDFs."""
    out = np.empty(row_ids.shape[0], dtype=np.int64)
    order = np.argsort(row_ids, kind="stable")
    sorted_ids = row_ids[order]
    boundaries = np.flatnonzero(np.diff(sorted_ids)) + 1
    for grp in np.split(order, boundaries):
        cdf = np.cumsum(table_rows[row_ids[grp[0]]])
        out[grp] = np.searchsorted(cdf, uniform[grp] * cdf[-1], side="right")
    return np.minimum(out, table_rows.shape[1] - 1)


# ---------------------------------------------------------------------------
# deficits
# ---------------------------------------------------------------------------


def tv_deficit(p_xyz: JointPmf, induced: JointPmf, budget: int | None = None) -> float:
    """Total variation between the n-fold target and the induced word law."""
    marginal = p_xyz.marginalize(induced.names)
    n = None
    for base_alpha, word_alpha in zip(marginal.alphabets, induced.alphabets):
        if base_alpha.size > 1:
            n = round(math.log(word_alpha.size) / math.log(base_alpha.size))
            break
    if n is None:
        # single-letter alphabets throughout: any product is the one point
        # mass, so the laws coincide no matter the blocklength
        return 0.0
    target = product_pmf(marginal, n, budget)
    return total_variation(target, induced)


def soft_covering_deficit(
    p_wxyz: JointPmf, codebook: Codebook, params: CodecParams, budget: int | None = None
) -> float:
    """Distance of the raw codeword mixture from the target, pre-binning.

    ½ Σ |p^n_target − (LK)^{-1} Σ_{μ,l} p^n_{target|W}(· | w(l,μ))| over all
    word triples: the pure codebook-approximation error, with the encoder,
    binning, and decoding chain left out.  The first axis of ``p_wxyz`` is
    the codeword letter; the rest are the synthesized ones.
    """
    if codebook.degenerate:
        raise ValueError("the codeword mixture is undefined for a degenerate codebook")
    names = p_wxyz.names
    cond = p_wxyz.condition((names[0],))
    if not cond.defined.all():
        flat = codebook.entries.reshape(-1, params.n)
        if not cond.defined[flat].all():
            raise ValueError("codebook uses a zero-probability codeword letter")
    target_letter = p_wxyz.marginalize(names[1:])
    sizes = [a.size for a in target_letter.alphabets]
    cells = int(np.prod([float(s) ** params.n for s in sizes]))
    flat = codebook.entries.reshape(-1, params.n)
    distinct, counts = np.unique(flat, axis=0, return_counts=True)
    check_budget(cells * (distinct.shape[0] + 1), budget, what="codeword mixture enumeration")

    def letterwise_product(tables):
        out = tables[0]
        k = out.ndim
        for tbl in tables[1:]:
            out = np.multiply.outer(out, tbl)
            perm = []
            for axis in range(k):
                perm.extend([axis, k + axis])
            out = out.transpose(perm)
            out = out.reshape([out.shape[2 * a] * out.shape[2 * a + 1] for a in range(k)])
        return out

    mixture = np.zeros([s**params.n for s in sizes])
    for word, count in zip(distinct, counts):
        mixture += count * letterwise_product([cond.table[w] for w in word])
    mixture /= flat.shape[0]
    target = letterwise_product([target_letter.table] * params.n)
    return 0.5 * float(np.abs(target - mixture).sum())


# ---------------------------------------------------------------------------
# serialization for replay
# ---------------------------------------------------------------------------


def codec_to_dict(params: CodecParams, codebook: Codebook, binning: BinningMap) -> dict:
    return {
        "params": asdict(params),
        "codebook": {
            "entries": codebook.entries.tolist(),
            "epsilon": codebook.epsilon,
            "w_size": codebook.w_size,
            "degenerate": codebook.degenerate,
        },
        "binning": {
            "dedup": binning.dedup.tolist(),
            "bins": [b.tolist() for b in binning.bins],
            "m_size": binning.m_size,
        },
    }


def codec_from_dict(d: dict) -> tuple[CodecParams, Codebook, BinningMap]:
    try:
        params = CodecParams(**d["params"])
        cb = d["codebook"]
        codebook = Codebook(
            entries=np.asarray(cb["entries"], dtype=np.int64),
            epsilon=float(cb["epsilon"]),
            w_size=int(cb["w_size"]),
            degenerate=bool(cb["degenerate"]),
        )
        bn = d["binning"]
        binning = BinningMap(
            dedup=np.asarray(bn["dedup"], dtype=np.int64),
            bins=tuple(np.asarray(b, dtype=np.int64) for b in bn["bins"]),
            m_size=int(bn["m_size"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed codec spec: {exc}") from exc
    return params, codebook, binning


def write_codec(path, params: CodecParams, codebook: Codebook, binning: BinningMap) -> None:
    with open(path, "w") as fh:
        json.dump(codec_to_dict(params, codebook, binning), fh, indent=2, sort_keys=True)


def read_codec(path) -> tuple[CodecParams, Codebook, BinningMap]:
    with open(path) as fh:
        return codec_from_dict(json.load(fh))


def build_ptp_codec(
    p_w: JointPmf,
    params: CodecParams,
    allow_degenerate: bool = False,
    budget: int | None = None,
) -> tuple[Codebook, BinningMap]:
    """Codebook plus binning from the run seed's derived streams.

    With ``allow_degenerate`` an empty typical set yields the null codebook
    instead of raising, so short-blocklength baselines stay well-defined.
    """
    try:
        codebook = sample_codebook(p_w, params, derived_rng(params.seed, CODEBOOK_STREAM), budget)
    except EmptyTypicalSetError:
        if not allow_degenerate:
            raise
        codebook = null_codebook(p_w.alphabets[0].size, params)
    binning = sample_binning(codebook, params, derived_rng(params.seed, BINNING_STREAM))
    return codebook, binning
