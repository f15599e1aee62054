"""Sampling, tuple-frequency tables, and the empirical dependence decision.

The decision rule compares the cross-multiplied dependence statistic
|f(x,l,k) f(k) - f(x,k) f(l,k)| against a threshold of 4*epsilon, the
worst-case first-order propagation of a uniform frequency error epsilon
through the statistic. Conditioning contexts whose empirical mass is at or
below the threshold are skipped: they carry no reliable signal.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import CylinderKey, DiscreteDag, mixed_radix_strides, require_valid
from .oracle import TupleSizeError, _ProviderBase, _check_positions, _disjoint_sorted


class SampleMatrix:
    """l observed records over n ordered discrete variables."""

    def __init__(self, cards, rows):
        self.cards = tuple(int(c) for c in cards)
        arr = np.ascontiguousarray(np.asarray(rows, dtype=np.int64))
        if arr.ndim != 2 or arr.shape[1] != len(self.cards):
            raise ValueError(f"rows must be (l, {len(self.cards)}), got {arr.shape}")
        limits = np.asarray(self.cards, dtype=np.int64)
        if arr.size and (arr.min() < 0 or np.any(arr >= limits)):
            raise ValueError("sample values out of range for their cardinalities")
        arr.flags.writeable = False
        self.rows = arr

    @property
    def l(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SampleMatrix):
            return NotImplemented
        return self.cards == other.cards and np.array_equal(self.rows, other.rows)

    def __repr__(self):
        return f"SampleMatrix(l={self.l}, n={self.n})"


@dataclass
class FrequencyTable:
    """Sparse occurrence counts of every realized k-tuple cylinder.

    Absent keys have count zero. Lower-order frequencies are recovered by
    summation, so a single tuple size k is stored.
    """

    k: int
    l: int
    cards: tuple[int, ...]
    counts: dict[CylinderKey, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.cards)

    def count(self, key: CylinderKey) -> int:
        return self.counts.get(key, 0)

    def frequency(self, key: CylinderKey) -> float:
        return self.count(key) / self.l

    def dense_counts(self, positions) -> np.ndarray:
        """Dense int64 counts over the sub-space of a size-k position set."""
        pos = tuple(int(p) for p in positions)
        if len(pos) != self.k:
            raise ValueError(f"dense_counts wants exactly {self.k} positions, got {len(pos)}")
        dims = tuple(self.cards[p - 1] for p in pos)
        strides = mixed_radix_strides(dims)
        out = np.zeros(math.prod(dims), dtype=np.int64)
        for key, c in self.counts.items():
            if key.positions == pos:
                out[int(np.dot(key.values, strides))] = c
        return out


def sample(dag: DiscreteDag, l: int, seed) -> SampleMatrix:
    """Ancestral sampling: each row draws nodes in order, conditionally on
    the already-drawn parents. Deterministic for a given seed."""
    require_valid(dag)
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    rng = np.random.default_rng(seed)
    uniforms = rng.random((l, dag.n))
    rows = np.zeros((l, dag.n), dtype=np.int64)
    for j in range(1, dag.n + 1):
        ps = dag.parents[j - 1]
        pcols = np.asarray([p - 1 for p in ps], dtype=np.int64)
        pstrides = mixed_radix_strides(dag.parent_cards(j))
        cum = np.ascontiguousarray(np.cumsum(dag.cpts[j - 1], axis=1))
        _kernels.sample_node(uniforms[:, j - 1].copy(), rows, j - 1, pcols, pstrides, cum)
    return SampleMatrix(dag.cards, rows)


def tuple_frequencies(samples: SampleMatrix, k: int) -> FrequencyTable:
    """Counts of every realized k-tuple cylinder, over all position sets."""
    if not 1 <= k <= samples.n:
        raise ValueError(f"k must be in 1..{samples.n}, got {k}")
    counts: dict[CylinderKey, int] = {}
    for pos in itertools.combinations(range(1, samples.n + 1), k):
        cols = np.asarray([p - 1 for p in pos], dtype=np.int64)
        dims = tuple(samples.cards[p - 1] for p in pos)
        strides = mixed_radix_strides(dims)
        dense = _kernels.count_tuples(samples.rows, cols, strides, math.prod(dims))
        for code in np.flatnonzero(dense):
            values = tuple(int(v) for v in np.unravel_index(int(code), dims))
            counts[CylinderKey(pos, values)] = int(dense[code])
    return FrequencyTable(k, samples.l, samples.cards, counts)


class EmpiricalMarginalProvider(_ProviderBase):
    """Answers tuple probabilities of size <= k from stored k-tuple counts.

    Sub-k queries are served by summing the counts of the lexicographically
    first k-superset of the requested positions; count consistency makes the
    answer independent of that choice.
    """

    def __init__(self, freq: FrequencyTable):
        super().__init__()
        if freq.l <= 0:
            raise ValueError("empirical provider needs at least one sample")
        self._freq = freq
        self.cards = freq.cards
        self.max_tuple_size = freq.k

    def _lex_superset(self, pos) -> tuple[int, ...]:
        have = set(pos)
        extra = (p for p in range(1, self.n + 1) if p not in have)
        fill = [next(extra) for _ in range(self.max_tuple_size - len(pos))]
        return tuple(sorted((*pos, *fill)))

    def _compute(self, pos) -> np.ndarray:
        return self.table_via_superset(pos, self._lex_superset(pos))

    def table_via_superset(self, positions, superset) -> np.ndarray:
        """Dense probabilities over ``positions`` derived from a chosen
        size-k superset; exposed so consistency across supersets is testable."""
        pos = _check_positions(positions, self.n)
        sup = _check_positions(superset, self.n)
        if len(sup) != self.max_tuple_size or not set(pos) <= set(sup):
            raise ValueError(f"superset {sup} must have size {self.max_tuple_size} and contain {pos}")
        dense = self._freq.dense_counts(sup)
        dims = tuple(self.cards[p - 1] for p in sup)
        keep = tuple(i for i, p in enumerate(sup) if p in set(pos))
        drop = tuple(i for i in range(len(sup)) if i not in keep)
        counts = dense.reshape(dims).sum(axis=drop) if drop else dense.reshape(dims)
        return counts.reshape(-1).astype(np.float64) / self._freq.l


def empirical_provider(freq: FrequencyTable) -> EmpiricalMarginalProvider:
    return EmpiricalMarginalProvider(freq)


def dependence_statistic(provider, X, L, K, skip_below: float) -> float:
    """Max of |f(x,l,k) f(k) - f(x,k) f(l,k)| over realizations, skipping
    contexts with f(k) <= skip_below. Works with any marginal provider."""
    X, L, K = _disjoint_sorted(X, L, K)
    if not X or not L:
        return 0.0
    union = tuple(sorted(X + L + K))
    if len(union) > provider.max_tuple_size:
        raise TupleSizeError(len(union), provider.max_tuple_size)
    dims = tuple(provider.cards[p - 1] for p in union)
    table = provider.table(union).reshape(dims)
    ax = {p: i for i, p in enumerate(union)}
    x_axes = tuple(ax[p] for p in X)
    l_axes = tuple(ax[p] for p in L)
    f_k = table.sum(axis=x_axes + l_axes, keepdims=True)
    f_xk = table.sum(axis=l_axes, keepdims=True)
    f_lk = table.sum(axis=x_axes, keepdims=True)
    stat = np.abs(table * f_k - f_xk * f_lk)
    valid = np.broadcast_to(f_k > skip_below, stat.shape)
    if not np.any(valid):
        return 0.0
    return float(stat[valid].max())


def empirical_ci_test(provider, X, L, K, epsilon: float) -> bool:
    """Deviation-threshold independence decision; True means independent.

    Dependent iff the statistic exceeds 4*epsilon somewhere; an epsilon
    large enough that the threshold reaches 1 makes every context skippable
    and the decision trivially independent.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    threshold = 4.0 * epsilon
    return dependence_statistic(provider, X, L, K, skip_below=threshold) <= threshold


def save_samples(samples: SampleMatrix, path) -> None:
    """CSV with header x1..xn, one integer row per record; round-trips exactly."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(1, samples.n + 1)])
        writer.writerows(samples.rows.tolist())


def load_samples(path, cards=None) -> SampleMatrix:
    """Read the CSV form; cardinalities are inferred as max+1 per column
    unless given explicitly."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if not header or not all(h.strip().startswith("x") for h in header):
            raise ValueError(f"malformed samples header: {header}")
        rows = [[int(v) for v in row] for row in reader if row]
    if rows:
        arr = np.asarray(rows, dtype=np.int64)
    else:
        arr = np.zeros((0, len(header)), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise ValueError("malformed samples file")
    if cards is None:
        if arr.shape[0] == 0:
            raise ValueError("cannot infer cardinalities from an empty sample file")
        cards = tuple(int(c) for c in arr.max(axis=0) + 1)
    return SampleMatrix(cards, arr)


def frequencies_to_dict(freq: FrequencyTable) -> dict:
    entries = [
        {"positions": list(key.positions), "values": list(key.values), "count": int(c)}
        for key, c in sorted(freq.counts.items(), key=lambda kv: (kv[0].positions, kv[0].values))
    ]
    return {"k": freq.k, "l": freq.l, "cards": list(freq.cards), "counts": entries}


def frequencies_from_dict(data: dict) -> FrequencyTable:
    counts = {
        CylinderKey(tuple(e["positions"]), tuple(e["values"])): int(e["count"])
        for e in data["counts"]
    }
    return FrequencyTable(int(data["k"]), int(data["l"]), tuple(int(c) for c in data["cards"]), counts)


def save_frequencies(freq: FrequencyTable, path) -> None:
    """JSON with counts sorted by (positions, values); round-trips exactly."""
    with open(path, "w") as f:
        json.dump(frequencies_to_dict(freq), f, indent=2)
        f.write("\n")


def load_frequencies(path) -> FrequencyTable:
    with open(path) as f:
        return frequencies_from_dict(json.load(f))
