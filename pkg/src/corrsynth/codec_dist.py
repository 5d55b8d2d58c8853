"""Blocklength-n synthesis codec for the two-encoder distributed system.

Each encoder owns an independent pruned codebook over its own codeword
alphabet and maps its source word to a bin of the codeword index through the
same sub-PMF rule as the single-encoder system — here with no decoder side
information beyond the other message, so there is no widened typicality
slack.  Common randomness is split between the encoders; the decoder sees
the pair of randomness blocks, intersects the two received bins with the
jointly typical codeword pairs, and emits the unique pair or a fixed
fallback pair.

Conventions carried over or pinned down here:

- binning is literal per index: each l gets an IID uniform bin, without
  merging duplicate codewords first, so duplicated words count multiply in
  the decoder's candidate multiset;
- the randomness index μ splits positionally as μ = (μ₁, μ₂) with μ₁ in the
  high bits;
- each codebook is pruned and renormalized by its own exact ε_j (the joint
  analysis tracks min(ε₁, ε₂), recorded as a diagnostic, but only the
  per-codebook constant normalizes the sampling law);
- the decoder's pair-typicality test runs at the plain slack δ;
- degenerate (empty-typical-set) codebooks follow the all-fallback
  convention of the single-encoder module.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .budget import check_budget
from .codec_ptp import (
    Codebook,
    CodecParams,
    EmptyTypicalSetError,
    _encoder_weight_batch,
    _message_pmf_from_labels,
    _pow2_size,
    _rowwise_categorical,
    derived_rng,
    null_codebook,
    sample_codebook,
    tv_deficit,
    word_alphabet,
)
from .probability import CondPmf, JointPmf
from .typicality import enumerate_sequences, pairwise_typical_mask

#: derived-stream indices off a run seed (matching the single-encoder layout
#: for encoder 1, so reductions replay the same codebook and binning draws)
CODEBOOK1_STREAM = 0
BINNING1_STREAM = 1
CODEBOOK2_STREAM = 2
BINNING2_STREAM = 3


@dataclass(frozen=True)
class DistCodecParams:
    """Blocklength, per-encoder rates, slacks, and the run seed.

    ``rt_j``/``r_j``/``c_j`` are encoder j's codebook, message, and common
    randomness rates in bits per letter.  ``r_j = 0`` (single bin) is
    permitted; it is the natural setting for an encoder that only relays its
    codeword choice through the randomness block.  ``c_total``, when given,
    caps the split c1 + c2.
    """

    n: int
    rt1: float
    rt2: float
    r1: float
    r2: float
    c1: float
    c2: float
    delta: float
    eta: float
    seed: int
    c_total: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"blocklength must be >= 1, got {self.n}")
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")
        if not (0 <= self.eta < 1):
            raise ValueError(f"eta must lie in [0,1), got {self.eta}")
        for j, (rt, r, c) in enumerate(
            ((self.rt1, self.r1, self.c1), (self.rt2, self.r2, self.c2)), start=1
        ):
            if rt <= 0:
                raise ValueError(f"codebook rate {j} must be positive, got {rt}")
            if not (0 <= r <= rt):
                raise ValueError(f"message rate {j} must lie in [0, rt{j}], got {r}")
            if c < 0:
                raise ValueError(f"common randomness rate {j} must be >= 0, got {c}")
        if self.c_total is not None and self.c1 + self.c2 > self.c_total + 1e-12:
            raise ValueError(
                f"randomness split {self.c1}+{self.c2} exceeds the budget {self.c_total}"
            )

    @property
    def l_sizes(self) -> tuple[int, int]:
        return (_pow2_size(self.n, self.rt1), _pow2_size(self.n, self.rt2))

    @property
    def m_sizes(self) -> tuple[int, int]:
        return (_pow2_size(self.n, self.r1), _pow2_size(self.n, self.r2))

    @property
    def k_sizes(self) -> tuple[int, int]:
        return (_pow2_size(self.n, self.c1), _pow2_size(self.n, self.c2))

    @property
    def k_size(self) -> int:
        """Total randomness blocks K = K₁·K₂."""
        k1, k2 = self.k_sizes
        return k1 * k2

    def effective_rates(self) -> dict[str, float]:
        l1, l2 = self.l_sizes
        m1, m2 = self.m_sizes
        k1, k2 = self.k_sizes
        return {
            "rt1": math.log2(l1) / self.n,
            "rt2": math.log2(l2) / self.n,
            "r1": math.log2(m1) / self.n,
            "r2": math.log2(m2) / self.n,
            "c1": math.log2(k1) / self.n,
            "c2": math.log2(k2) / self.n,
        }

    def leg(self, j: int) -> tuple[float, float, float]:
        """(rt, r, c) of encoder j ∈ {1, 2}."""
        if j not in (1, 2):
            raise ValueError(f"encoder index must be 1 or 2, got {j}")
        return ((self.rt1, self.r1, self.c1), (self.rt2, self.r2, self.c2))[j - 1]


@dataclass(frozen=True)
class DistCodebooks:
    """The two independent pruned codebooks with their exact ε constants."""

    first: Codebook
    second: Codebook

    @property
    def epsilon(self) -> float:
        """min(ε₁, ε₂), the constant tracked by the joint analysis."""
        return min(self.first.epsilon, self.second.epsilon)

    def book(self, j: int) -> Codebook:
        if j not in (1, 2):
            raise ValueError(f"encoder index must be 1 or 2, got {j}")
        return self.first if j == 1 else self.second


@dataclass(frozen=True)
class DistBinning:
    """Literal per-index binning for one encoder: labels[μ, l] ∈ 1..M."""

    labels: np.ndarray
    m_size: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 2:
            raise ValueError("labels must have shape (K, L)")
        if labels.size and (labels.min() < 1 or labels.max() > self.m_size):
            raise ValueError("bin labels must lie in 1..M")


def sample_dist_binning(codebook: Codebook, m_size: int, rng: np.random.Generator) -> DistBinning:
    """IID uniform bin per codeword index, one row per randomness block."""
    labels = np.empty((codebook.k_size, codebook.l_size), dtype=np.int64)
    for mu in range(codebook.k_size):
        labels[mu] = rng.integers(1, m_size + 1, size=codebook.l_size)
    return DistBinning(labels=labels, m_size=m_size)


def build_dist_codec(
    p_w1: JointPmf,
    p_w2: JointPmf,
    params: DistCodecParams,
    allow_degenerate: bool = False,
    budget: int | None = None,
) -> tuple[DistCodebooks, tuple[DistBinning, DistBinning]]:
    """Sample both codebooks and binnings from the four derived streams."""
    books = []
    for j, p_w, cb_stream in ((1, p_w1, CODEBOOK1_STREAM), (2, p_w2, CODEBOOK2_STREAM)):
        leg = _leg_params(params, j)
        try:
            books.append(sample_codebook(p_w, leg, derived_rng(params.seed, cb_stream), budget))
        except EmptyTypicalSetError:
            if not allow_degenerate:
                raise
            books.append(null_codebook(p_w.alphabets[0].size, leg))
    m1, m2 = params.m_sizes
    bn1 = sample_dist_binning(books[0], m1, derived_rng(params.seed, BINNING1_STREAM))
    bn2 = sample_dist_binning(books[1], m2, derived_rng(params.seed, BINNING2_STREAM))
    return DistCodebooks(first=books[0], second=books[1]), (bn1, bn2)


def _leg_params(params: DistCodecParams, j: int) -> CodecParams:
    """Single-encoder parameter view of leg j (shared n, delta, eta, seed)."""
    rt, r, c = params.leg(j)
    return CodecParams(
        n=params.n, rt=rt, r=r, c=c, delta=params.delta, eta=params.eta, seed=params.seed
    )


def dist_encoder_pmf(
    j: int,
    x_seq,
    mu: int,
    codebooks: DistCodebooks,
    binning: DistBinning,
    p_joint_xw: JointPmf,
    params: DistCodecParams,
) -> np.ndarray:
    """Message PMF of encoder j for one source word and randomness block.

    Same three-case rule as the single-encoder chain: oversubscribed or
    atypical inputs send message 0, otherwise bins collect the index weights
    and message 0 absorbs the deficit; the vector always totals one.
    """
    book = codebooks.book(j)
    x = np.asarray(x_seq, dtype=int)
    if x.shape != (params.n,):
        raise ValueError(f"expected a length-{params.n} word, got shape {x.shape}")
    weights, s, valid = _encoder_weight_batch(
        x[None, :], book.entries[mu], p_joint_xw, book.epsilon, _leg_params(params, j)
    )
    return _message_pmf_from_labels(weights[0], bool(valid[0]), binning.labels[mu], binning.m_size)


def split_mu(mu: int, params: DistCodecParams) -> tuple[int, int]:
    """Positional decomposition μ → (μ₁, μ₂) with μ₁ in the high bits."""
    k1, k2 = params.k_sizes
    if not (0 <= mu < k1 * k2):
        raise ValueError(f"randomness index must lie in 0..{k1 * k2 - 1}, got {mu}")
    return mu // k2, mu % k2


def dist_decode_map(
    m1: int,
    m2: int,
    mu: int,
    codebooks: DistCodebooks,
    binnings: tuple[DistBinning, DistBinning],
    p_w1w2: JointPmf,
    params: DistCodecParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Unique jointly-typical codeword pair in the bin pair, else fallback.

    Candidates are indexed by (l₁, l₂) — duplicate codewords count multiply
    — with bins matched per encoder and the pair tested against the joint
    codeword law at the plain slack δ.  Every failure mode (either message
    0, empty intersection, or multiplicity) yields the fallback pair of
    constant first-symbol words.
    """
    mu1, mu2 = split_mu(mu, params)
    bn1, bn2 = binnings
    n = params.n
    fallback = (np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64))
    if not (0 <= m1 <= bn1.m_size and 0 <= m2 <= bn2.m_size):
        raise ValueError("messages must lie in 0..M_j")
    if m1 == 0 or m2 == 0:
        return fallback
    sel1 = np.flatnonzero(bn1.labels[mu1] == m1)
    sel2 = np.flatnonzero(bn2.labels[mu2] == m2)
    if sel1.size == 0 or sel2.size == 0:
        return fallback
    words1 = codebooks.first.entries[mu1][sel1]
    words2 = codebooks.second.entries[mu2][sel2]
    ok = pairwise_typical_mask(words1, words2, p_w1w2.table, params.delta)
    if int(ok.sum()) != 1:
        return fallback
    i, k = np.argwhere(ok)[0]
    return words1[i].copy(), words2[k].copy()


# ---------------------------------------------------------------------------
# exact induced law and end-to-end sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _DistSystemTables:
    """Shared precomputation behind exact enumeration and sampling."""

    p_x_words: np.ndarray  # (A1, A2) source-word law
    messages1: np.ndarray  # (K1, A1, M1+1)
    messages2: np.ndarray  # (K2, A2, M2+1)
    decoded: np.ndarray  # (K1, K2, M1+1, M2+1) row ids into y_rows
    y_rows: np.ndarray  # (rows, Ay) output-word laws, row 0 = fallback pair


def _build_dist_tables(
    p_x1x2: JointPmf,
    p_w1_given_x1: CondPmf,
    p_w2_given_x2: CondPmf,
    p_y_given_w1w2: CondPmf,
    codebooks: DistCodebooks,
    binnings: tuple[DistBinning, DistBinning],
    params: DistCodecParams,
    budget: int | None = None,
) -> _DistSystemTables:
    n = params.n
    nx1, nx2 = (a.size for a in p_x1x2.alphabets)
    ny = p_y_given_w1w2.out_alphabets[0].size
    check_budget((nx1 * nx2 * ny) ** n, budget, what="exact induced-law enumeration")
    xs1 = enumerate_sequences(nx1, n, budget)
    xs2 = enumerate_sequences(nx2, n, budget)
    ys = enumerate_sequences(ny, n, budget)

    p_x_words = np.ones((xs1.shape[0], xs2.shape[0]))
    for i in range(n):
        p_x_words *= p_x1x2.table[xs1[:, i][:, None], xs2[None, :, i]]

    marg1 = p_x1x2.table.sum(axis=1)
    marg2 = p_x1x2.table.sum(axis=0)
    p_joint_xw1 = JointPmf(
        (p_x1x2.names[0], p_w1_given_x1.out_names[0]),
        (p_x1x2.alphabets[0], p_w1_given_x1.out_alphabets[0]),
        marg1[:, None] * p_w1_given_x1.table,
    )
    p_joint_xw2 = JointPmf(
        (p_x1x2.names[1], p_w2_given_x2.out_names[0]),
        (p_x1x2.alphabets[1], p_w2_given_x2.out_alphabets[0]),
        marg2[:, None] * p_w2_given_x2.table,
    )
    p_w1w2 = np.einsum(
        "ab,aw,bv->wv", p_x1x2.table, p_w1_given_x1.table, p_w2_given_x2.table
    )

    (k1, k2), (m1, m2) = params.k_sizes, params.m_sizes
    bn1, bn2 = binnings

    def encoder_messages(book, binning, xs, p_joint, leg, kk, mm):
        out = np.zeros((kk, xs.shape[0], mm + 1))
        for mu in range(kk):
            weights, _, valid = _encoder_weight_batch(
                xs, book.entries[mu], p_joint, book.epsilon, leg
            )
            onehot = np.zeros((book.l_size, mm + 1))
            onehot[np.arange(book.l_size), binning.labels[mu]] = 1.0
            msg = weights @ onehot
            msg[~valid] = 0.0
            msg[:, 0] = np.maximum(0.0, 1.0 - msg[:, 1:].sum(axis=1))
            out[mu] = msg
        return out

    messages1 = encoder_messages(
        codebooks.first, bn1, xs1, p_joint_xw1, _leg_params(params, 1), k1, m1
    )
    messages2 = encoder_messages(
        codebooks.second, bn2, xs2, p_joint_xw2, _leg_params(params, 2), k2, m2
    )

    # decode outcomes: map every (mu1, mu2, m1, m2) to a decoded pair row
    fallback_key = (np.zeros(n, np.int64).tobytes(), np.zeros(n, np.int64).tobytes())
    row_of: dict[tuple[bytes, bytes], int] = {fallback_key: 0}
    pairs: list[tuple[np.ndarray, np.ndarray]] = [(np.zeros(n, np.int64), np.zeros(n, np.int64))]
    decoded = np.zeros((k1, k2, m1 + 1, m2 + 1), dtype=np.int64)
    for mu1 in range(k1):
        for mu2 in range(k2):
            ok = pairwise_typical_mask(
                codebooks.first.entries[mu1], codebooks.second.entries[mu2],
                p_w1w2, params.delta,
            )
            for mm1 in range(1, m1 + 1):
                rows_sel = bn1.labels[mu1] == mm1
                if not rows_sel.any():
                    continue
                for mm2 in range(1, m2 + 1):
                    cols_sel = bn2.labels[mu2] == mm2
                    if not cols_sel.any():
                        continue
                    sub = ok[rows_sel][:, cols_sel]
                    if int(sub.sum()) != 1:
                        continue
                    i, k = np.argwhere(sub)[0]
                    w1 = codebooks.first.entries[mu1][np.flatnonzero(rows_sel)[i]]
                    w2 = codebooks.second.entries[mu2][np.flatnonzero(cols_sel)[k]]
                    key = (w1.tobytes(), w2.tobytes())
                    if key not in row_of:
                        row_of[key] = len(pairs)
                        pairs.append((w1, w2))
                    decoded[mu1, mu2, mm1, mm2] = row_of[key]

    y_rows = np.ones((len(pairs), ys.shape[0]))
    for ridx, (w1, w2) in enumerate(pairs):
        for i in range(n):
            y_rows[ridx] *= p_y_given_w1w2.table[w1[i], w2[i], ys[:, i]]
    return _DistSystemTables(p_x_words, messages1, messages2, decoded, y_rows)


def dist_induced_joint_exact(
    p_x1x2: JointPmf,
    p_w1_given_x1: CondPmf,
    p_w2_given_x2: CondPmf,
    p_y_given_w1w2: CondPmf,
    codebooks: DistCodebooks,
    binnings: tuple[DistBinning, DistBinning],
    params: DistCodecParams,
    budget: int | None = None,
) -> JointPmf:
    """Exact n-letter law of (source 1, source 2, output) words.

    Sums the two message chains and the pair decoder over every randomness
    block pair and message pair, the output word drawn from the product
    channel law at the decoded codeword pair.  Axes are (X₁, X₂, Y) with
    word alphabets; the table totals one within 1e-9 (checked).
    """
    tabs = _build_dist_tables(
        p_x1x2, p_w1_given_x1, p_w2_given_x2, p_y_given_w1w2,
        codebooks, binnings, params, budget,
    )
    k1, k2 = params.k_sizes
    a1, a2 = tabs.p_x_words.shape
    out = np.zeros((a1, a2, tabs.y_rows.shape[1]))
    for mu1 in range(k1):
        for mu2 in range(k2):
            gather = np.zeros((tabs.decoded.shape[2] * tabs.decoded.shape[3], tabs.y_rows.shape[0]))
            gather[np.arange(gather.shape[0]), tabs.decoded[mu1, mu2].reshape(-1)] = 1.0
            y_by_msgs = gather @ tabs.y_rows  # ((M1+1)(M2+1), Ay)
            y_by_msgs = y_by_msgs.reshape(
                tabs.decoded.shape[2], tabs.decoded.shape[3], -1
            )
            out += np.einsum(
                "am,bv,mvy->aby", tabs.messages1[mu1], tabs.messages2[mu2], y_by_msgs
            )
    out *= tabs.p_x_words[:, :, None] / (k1 * k2)
    total = float(out.sum())
    if abs(total - 1.0) > 1e-9:
        raise ArithmeticError(f"induced law sums to {total}, expected 1")
    return JointPmf(
        (p_x1x2.names[0], p_x1x2.names[1], p_y_given_w1w2.out_names[0]),
        (
            word_alphabet(p_x1x2.alphabets[0], params.n),
            word_alphabet(p_x1x2.alphabets[1], params.n),
            word_alphabet(p_y_given_w1w2.out_alphabets[0], params.n),
        ),
        out,
    )


def sample_dist_induced(
    p_x1x2: JointPmf,
    p_w1_given_x1: CondPmf,
    p_w2_given_x2: CondPmf,
    p_y_given_w1w2: CondPmf,
    codebooks: DistCodebooks,
    binnings: tuple[DistBinning, DistBinning],
    params: DistCodecParams,
    num_samples: int,
    rng: np.random.Generator,
    budget: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """End-to-end Monte Carlo of the two-encoder chain: word codes (x1, x2, y)."""
    tabs = _build_dist_tables(
        p_x1x2, p_w1_given_x1, p_w2_given_x2, p_y_given_w1w2,
        codebooks, binnings, params, budget,
    )
    k1, k2 = params.k_sizes
    a1, a2 = tabs.p_x_words.shape
    flat = tabs.p_x_words.reshape(-1)
    xx = rng.choice(a1 * a2, size=num_samples, p=flat / flat.sum())
    x1_codes, x2_codes = xx // a2, xx % a2
    mu1s = rng.integers(0, k1, size=num_samples)
    mu2s = rng.integers(0, k2, size=num_samples)
    m1s = _rowwise_categorical(
        tabs.messages1.reshape(k1 * a1, -1), mu1s * a1 + x1_codes, rng.random(num_samples)
    )
    m2s = _rowwise_categorical(
        tabs.messages2.reshape(k2 * a2, -1), mu2s * a2 + x2_codes, rng.random(num_samples)
    )
    rows = tabs.decoded[mu1s, mu2s, m1s, m2s]
    y_codes = _rowwise_categorical(tabs.y_rows, rows, rng.random(num_samples))
    return x1_codes, x2_codes, y_codes


def dist_tv_deficit(p_x1x2y: JointPmf, induced: JointPmf, budget: int | None = None) -> float:
    """Total variation between the n-fold target and the induced word law."""
    return tv_deficit(p_x1x2y, induced, budget)


# ---------------------------------------------------------------------------
# serialization for replay
# ---------------------------------------------------------------------------


def dist_codec_to_dict(
    params: DistCodecParams,
    codebooks: DistCodebooks,
    binnings: tuple[DistBinning, DistBinning],
) -> dict:
    def book_block(book: Codebook) -> dict:
        return {
            "entries": book.entries.tolist(),
            "epsilon": book.epsilon,
            "w_size": book.w_size,
            "degenerate": book.degenerate,
        }

    return {
        "params": asdict(params),
        "codebooks": [book_block(codebooks.first), book_block(codebooks.second)],
        "binnings": [
            {"labels": bn.labels.tolist(), "m_size": bn.m_size} for bn in binnings
        ],
    }


def dist_codec_from_dict(d: dict):
    try:
        params = DistCodecParams(**d["params"])
        books = [
            Codebook(
                entries=np.asarray(blk["entries"], dtype=np.int64),
                epsilon=float(blk["epsilon"]),
                w_size=int(blk["w_size"]),
                degenerate=bool(blk["degenerate"]),
            )
            for blk in d["codebooks"]
        ]
        binnings = tuple(
            DistBinning(labels=np.asarray(blk["labels"], dtype=np.int64), m_size=int(blk["m_size"]))
            for blk in d["binnings"]
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed distributed codec spec: {exc}") from exc
    return params, DistCodebooks(first=books[0], second=books[1]), binnings


def write_dist_codec(path, params, codebooks, binnings) -> None:
    with open(path, "w") as fh:
        json.dump(dist_codec_to_dict(params, codebooks, binnings), fh, indent=2, sort_keys=True)


def read_dist_codec(path):
    with open(path) as fh:
        return dist_codec_from_dict(json.load(fh))
