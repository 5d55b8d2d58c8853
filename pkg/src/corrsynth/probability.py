"""Finite joint distributions and information measures (all logs base 2).

The central type is :class:`JointPmf`: a dense table over named axes, each
axis carrying an ordered :class:`Alphabet`.  Conditionals keep an explicit
``defined`` mask so that cells conditioned on zero-probability events are
never silently read.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .budget import check_budget

#: absolute tolerance used when validating that a table sums to one
NORMALIZATION_ATOL = 1e-9
#: tolerance for exactness claims (recomposition, marginal preservation, ...)
EXACT_ATOL = 1e-12


class UndefinedConditionalError(ValueError):
    """A conditional row was read for a conditioning cell of probability zero."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet; symbols are strings, positions are the codes."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise ValueError("alphabet must have at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"duplicate symbols in alphabet: {self.symbols}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        return self.symbols.index(symbol)


def _as_alphabet(spec) -> Alphabet:
    if isinstance(spec, Alphabet):
        return spec
    if isinstance(spec, int):
        return Alphabet(tuple(str(i) for i in range(spec)))
    return Alphabet(tuple(str(s) for s in spec))


@dataclass(frozen=True)
class JointPmf:
    """Joint PMF over named axes, stored as a dense numpy table.

    ``table.shape`` matches the alphabet sizes in axis order.  Entries are
    nonnegative and sum to one within :data:`NORMALIZATION_ATOL` (checked at
    construction; use :meth:`from_table` to renormalize near-misses).
    """

    names: tuple[str, ...]
    alphabets: tuple[Alphabet, ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.names) != len(self.alphabets):
            raise ValueError("names and alphabets must have equal length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate axis names: {self.names}")
        tab = np.asarray(self.table, dtype=float)
        expected = tuple(a.size for a in self.alphabets)
        if tab.shape != expected:
            raise ValueError(f"table shape {tab.shape} != alphabet sizes {expected}")
        if np.any(tab < 0):
            raise ValueError("negative probability in table")
        total = float(tab.sum())
        if abs(total - 1.0) > NORMALIZATION_ATOL:
            raise ValueError(f"table sums to {total!r}, not 1")
        object.__setattr__(self, "table", tab)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_table(cls, names, table, alphabets=None) -> "JointPmf":
        """Build a PMF, renormalizing if the total is within 1e-9 of one.

        Totals further from one are rejected: that is a malformed input, not
        rounding noise.
        """
        tab = np.asarray(table, dtype=float)
        names = tuple(names)
        if alphabets is None:
            alphabets = tuple(_as_alphabet(s) for s in tab.shape)
        else:
            alphabets = tuple(_as_alphabet(a) for a in alphabets)
        total = float(tab.sum())
        if abs(total - 1.0) > NORMALIZATION_ATOL:
            raise ValueError(f"table sums to {total!r}; outside renormalization tolerance")
        return cls(names, alphabets, tab / total)

    # -- bookkeeping -------------------------------------------------------

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no axis {name!r}; have {self.names}") from None

    def alphabet(self, name: str) -> Alphabet:
        return self.alphabets[self.axis(name)]

    # -- core operations ---------------------------------------------------

    def marginalize(self, keep) -> "JointPmf":
        """Sum out every axis not named in ``keep``; result axes follow ``keep`` order."""
        keep = tuple(keep)
        idx = [self.axis(n) for n in keep]
        drop = tuple(i for i in range(len(self.names)) if i not in idx)
        summed = self.table.sum(axis=drop) if drop else self.table
        kept_order = [i for i in range(len(self.names)) if i not in drop]
        perm = [kept_order.index(i) for i in idx]
        return JointPmf(keep, tuple(self.alphabets[i] for i in idx), summed.transpose(perm))

    def condition(self, given) -> "CondPmf":
        """Split axes into (given, rest) and return p(rest | given).

        Rows whose conditioning cell has zero probability are marked
        undefined rather than filled with an arbitrary distribution.
        """
        given = tuple(given)
        g_idx = [self.axis(n) for n in given]
        o_idx = [i for i in range(len(self.names)) if i not in g_idx]
        if not o_idx:
            raise ValueError("conditioning on every axis leaves nothing to distribute")
        perm = g_idx + o_idx
        tab = self.table.transpose(perm)
        g_shape = tab.shape[: len(g_idx)]
        o_axes = tuple(range(len(g_idx), tab.ndim))
        marg = tab.sum(axis=o_axes)
        defined = marg > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = tab / marg.reshape(g_shape + (1,) * len(o_idx))
        cond[~defined] = np.nan
        return CondPmf(
            given_names=given,
            given_alphabets=tuple(self.alphabets[i] for i in g_idx),
            out_names=tuple(self.names[i] for i in o_idx),
            out_alphabets=tuple(self.alphabets[i] for i in o_idx),
            table=cond,
            defined=defined,
        )

    def prob(self, assignment: dict[str, int]) -> float:
        """Probability of a single cell, axes addressed by name -> letter index."""
        key = tuple(assignment[n] for n in self.names)
        return float(self.table[key])


@dataclass(frozen=True)
class CondPmf:
    """Conditional PMF p(out | given) with an explicit definedness mask."""

    given_names: tuple[str, ...]
    given_alphabets: tuple[Alphabet, ...]
    out_names: tuple[str, ...]
    out_alphabets: tuple[Alphabet, ...]
    table: np.ndarray = field(repr=False)
    defined: np.ndarray = field(repr=False)

    def __post_init__(self):
        tab = np.asarray(self.table, dtype=float)
        expected = tuple(a.size for a in self.given_alphabets) + tuple(
            a.size for a in self.out_alphabets
        )
        if tab.shape != expected:
            raise ValueError(f"table shape {tab.shape} != {expected}")
        mask = np.asarray(self.defined, dtype=bool)
        if mask.shape != tuple(a.size for a in self.given_alphabets):
            raise ValueError("defined mask shape mismatch")
        o_axes = tuple(range(len(self.given_alphabets), tab.ndim))
        sums = np.nansum(tab, axis=o_axes)
        ok = np.where(mask, np.abs(sums - 1.0) <= NORMALIZATION_ATOL, True)
        if not np.all(ok):
            raise ValueError("conditional rows must sum to 1 where defined")
        if np.any(np.nan_to_num(tab, nan=0.0) < 0):
            raise ValueError("negative conditional probability")
        object.__setattr__(self, "table", tab)
        object.__setattr__(self, "defined", mask)

    @classmethod
    def from_rows(cls, given_names, given_alphabets, out_names, out_alphabets, table) -> "CondPmf":
        """Conditional from a fully specified stochastic table (all rows defined)."""
        given_alphabets = tuple(_as_alphabet(a) for a in given_alphabets)
        out_alphabets = tuple(_as_alphabet(a) for a in out_alphabets)
        tab = np.asarray(table, dtype=float)
        mask = np.ones(tuple(a.size for a in given_alphabets), dtype=bool)
        return cls(tuple(given_names), given_alphabets, tuple(out_names), out_alphabets, tab, mask)

    def row(self, given: tuple[int, ...]) -> np.ndarray:
        """Distribution over the out-axes for one conditioning cell."""
        if not self.defined[tuple(given)]:
            raise UndefinedConditionalError(
                f"p({self.out_names}|{self.given_names}={given}) conditions on a null event"
            )
        return self.table[tuple(given)]


# --------------------------------------------------------------------------
# information measures
# --------------------------------------------------------------------------


def _plogp(p: np.ndarray) -> np.ndarray:
    # 0 log 0 = 0 by continuity
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def entropy(p: JointPmf, axes=None) -> float:
    """Shannon entropy in bits of the named axes (all axes if None)."""
    q = p if axes is None else p.marginalize(tuple(axes))
    return float(-_plogp(q.table).sum())


def mutual_information(p: JointPmf, a, b) -> float:
    """I(A;B) in bits; ``a`` and ``b`` are axis names or lists of names."""
    return conditional_mutual_information(p, a, b, ())


def conditional_mutual_information(p: JointPmf, a, b, c) -> float:
    """I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C), in bits."""
    a = (a,) if isinstance(a, str) else tuple(a)
    b = (b,) if isinstance(b, str) else tuple(b)
    c = (c,) if isinstance(c, str) else tuple(c)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValueError("axis groups must be disjoint")
    h_ac = entropy(p, a + c)
    h_bc = entropy(p, b + c)
    h_abc = entropy(p, a + b + c)
    h_c = entropy(p, c) if c else 0.0
    value = h_ac + h_bc - h_abc - h_c
    # exact zero for structurally independent cases is not guaranteed by
    # floating point; leave tiny negatives to the caller's tolerance
    return float(value)


def total_variation(p: JointPmf, q: JointPmf) -> float:
    """Total variation distance (1/2) * sum |p - q|; axes must match."""
    if p.names != q.names or p.alphabets != q.alphabets:
        raise ValueError("total_variation requires identical axes and alphabets")
    return 0.5 * float(np.abs(p.table - q.table).sum())


def verify_markov_chain(p: JointPmf, chain, tol: float = 1e-10) -> tuple[bool, float]:
    """Check A - B - C: returns (holds, I(A;C|B) in bits).

    ``chain`` is three axis groups; the violation certificate is the
    conditional mutual information across the middle group.
    """
    a, b, c = chain
    violation = conditional_mutual_information(p, a, c, b)
    return (violation <= tol, violation)


# --------------------------------------------------------------------------
# product (n-letter) extensions
# --------------------------------------------------------------------------


class ProductPmf:
    """Lazy n-fold product of a single-letter joint PMF.

    Evaluates sequence probabilities without materializing the n-letter
    table; :meth:`table` materializes (budget-guarded) for exact TV work.
    """

    def __init__(self, base: JointPmf, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.base = base
        self.n = int(n)

    def seq_prob(self, assignment: dict[str, np.ndarray]) -> float:
        """Probability of one n-letter cell, e.g. {'X': x_seq, 'Z': z_seq}."""
        seqs = [np.asarray(assignment[name], dtype=int) for name in self.base.names]
        for s in seqs:
            if s.shape != (self.n,):
                raise ValueError(f"sequence length must be {self.n}")
        return float(np.prod(self.base.table[tuple(seqs)]))

    def table(self, budget: int | None = None) -> np.ndarray:
        """Dense table indexed by per-axis sequence codes.

        Sequence codes are big-endian: the code of ``x_1..x_n`` on an axis of
        size ``s`` is ``sum x_i * s**(n-i)``, i.e. lexicographic enumeration.
        """
        sizes = [a.size for a in self.base.alphabets]
        terms = int(np.prod([float(s) ** self.n for s in sizes]))
        check_budget(terms, budget, what="product extension")
        k = len(sizes)
        out = self.base.table
        for _ in range(self.n - 1):
            # append one letter position per axis: (S_i) x (s_i) -> (S_i * s_i)
            out = np.multiply.outer(out, self.base.table)
            perm = []
            for ax in range(k):
                perm.extend([ax, k + ax])
            out = out.transpose(perm)
            out = out.reshape(
                [out.shape[2 * ax] * out.shape[2 * ax + 1] for ax in range(k)]
            )
        return out


def product_extension(p: JointPmf, n: int) -> ProductPmf:
    return ProductPmf(p, n)


# --------------------------------------------------------------------------
# JSON interchange
# --------------------------------------------------------------------------


def pmf_to_dict(p: JointPmf) -> dict:
    return {
        "axes": [
            {"name": n, "symbols": list(a.symbols)} for n, a in zip(p.names, p.alphabets)
        ],
        "table": p.table.tolist(),
    }


def pmf_from_dict(d: dict) -> JointPmf:
    try:
        names = tuple(ax["name"] for ax in d["axes"])
        alphabets = tuple(Alphabet(tuple(ax["symbols"])) for ax in d["axes"])
        table = np.asarray(d["table"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed PMF spec: {exc}") from exc
    return JointPmf.from_table(names, table, alphabets)


def write_pmf(path, p: JointPmf) -> None:
    with open(path, "w") as fh:
        json.dump(pmf_to_dict(p), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_pmf(path) -> JointPmf:
    with open(path) as fh:
        return pmf_from_dict(json.load(fh))


def all_cells(p: JointPmf):
    """Iterate (index-tuple, probability) over every cell of the table."""
    ranges = [range(a.size) for a in p.alphabets]
    for idx in itertools.product(*ranges):
        yield idx, float(p.table[idx])
