"""Exact probabilistic queries on a dense joint table.

Conditional independence is tested in cross-multiplied form,
``P(x,y,z) * P(z) == P(x,z) * P(y,z)``, which avoids dividing by small
conditioning masses; contexts with ``P(z)`` at or below the tolerance are
skipped. Markov parents are found by scanning predecessor subsets in order
of increasing size (lexicographic within a size) and returning the first
set whose complement is conditionally irrelevant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import JointTable, DiscreteDag, mixed_radix_strides

EXACT_TOL = 1e-9


class TupleSizeError(ValueError):
    """A marginal query exceeded the provider's tuple-size budget."""

    def __init__(self, size, limit):
        self.size = size
        self.limit = limit
        super().__init__(f"marginal query of size {size} exceeds the budget of {limit}")


@dataclass
class AccessLog:
    """Running record of the marginal queries a provider has answered."""

    max_size: int = 0
    queries: int = 0

    def record(self, size: int) -> None:
        self.queries += 1
        if size > self.max_size:
            self.max_size = size


@dataclass(frozen=True)
class MarginalTable:
    """Dense marginal over a sorted position set (1-based positions)."""

    positions: tuple[int, ...]
    cards: tuple[int, ...]
    probs: np.ndarray

    @property
    def array(self) -> np.ndarray:
        return self.probs.reshape(self.cards)


def _check_positions(positions, n) -> tuple[int, ...]:
    pos = tuple(int(p) for p in positions)
    if not pos:
        raise ValueError("positions must be nonempty")
    if any(b <= a for a, b in zip(pos, pos[1:])):
        raise ValueError(f"positions must be sorted and distinct: {pos}")
    if pos[0] < 1 or pos[-1] > n:
        raise ValueError(f"position out of range 1..{n}: {pos}")
    return pos


def marginal(joint: JointTable, positions) -> MarginalTable:
    """Sum the joint over every coordinate not in ``positions``."""
    pos = _check_positions(positions, joint.n)
    keep = set(p - 1 for p in pos)
    drop = tuple(a for a in range(joint.n) if a not in keep)
    probs = joint.array.sum(axis=drop) if drop else joint.array
    cards = tuple(joint.cards[p - 1] for p in pos)
    flat = np.ascontiguousarray(probs).reshape(-1)
    flat.flags.writeable = False
    return MarginalTable(pos, cards, flat)


def _disjoint_sorted(*groups):
    seen = set()
    out = []
    for g in groups:
        t = tuple(sorted(int(p) for p in g))
        if seen & set(t):
            raise ValueError(f"index sets must be pairwise disjoint: {groups}")
        seen |= set(t)
        out.append(t)
    return out


def conditional_independent(joint: JointTable, X, Y, Z, tol: float = EXACT_TOL) -> bool:
    """True iff X and Y carry no information about each other once Z is fixed.

    Checked as |P(x,y,z)P(z) - P(x,z)P(y,z)| <= tol for every realization
    whose context satisfies P(z) > tol; with empty Z this reduces to
    |P(x,y) - P(x)P(y)| <= tol.
    """
    X, Y, Z = _disjoint_sorted(X, Y, Z)
    if not X or not Y:
        return True
    union = tuple(sorted(X + Y + Z))
    table = marginal(joint, union).array
    ax = {p: i for i, p in enumerate(union)}
    x_axes = tuple(ax[p] for p in X)
    y_axes = tuple(ax[p] for p in Y)
    p_z = table.sum(axis=x_axes + y_axes, keepdims=True)
    p_xz = table.sum(axis=y_axes, keepdims=True)
    p_yz = table.sum(axis=x_axes, keepdims=True)
    stat = np.abs(table * p_z - p_xz * p_yz)
    valid = np.broadcast_to(p_z > tol, stat.shape)
    return bool(np.all(stat[valid] <= tol))


def markov_parents(joint: JointTable, j: int, tol: float = EXACT_TOL) -> tuple[int, ...]:
    """Minimal predecessor set rendering node j independent of the rest.

    Requires a strictly positive joint; otherwise the minimal set need not be
    unique and the query is refused.
    """
    if not 1 <= j <= joint.n:
        raise ValueError(f"node index {j} out of range 1..{joint.n}")
    if np.any(joint.probs <= 0):
        raise ValueError(
            "markov_parents requires a strictly positive joint; "
            "minimality is not unique with zero-probability configurations"
        )
    preceding = tuple(range(1, j))
    for size in range(len(preceding) + 1):
        for cand in itertools.combinations(preceding, size):
            rest = tuple(p for p in preceding if p not in cand)
            if conditional_independent(joint, (j,), rest, cand, tol):
                return cand
    raise AssertionError("unreachable: the full predecessor set always qualifies")


def is_markov_relative(joint: JointTable, dag: DiscreteDag, tol: float = EXACT_TOL) -> bool:
    """True iff the joint factorizes over the DAG's parent sets.

    The per-node conditionals are computed from the joint itself; parent
    configurations of zero marginal mass are skipped.
    """
    if dag.cards != joint.cards:
        raise ValueError(f"shape mismatch: dag cards {dag.cards} vs joint cards {joint.cards}")
    full = joint.array
    n = joint.n
    product = np.ones_like(full)
    skip = np.zeros(full.shape, dtype=bool)
    for j in range(1, n + 1):
        ps = dag.parents[j - 1]
        union = tuple(sorted(ps + (j,)))
        drop = tuple(a for a in range(n) if (a + 1) not in union)
        m_union = full.sum(axis=drop, keepdims=True) if drop else full
        m_par = m_union.sum(axis=j - 1, keepdims=True)
        safe = m_par > 0
        cond = np.divide(m_union, np.where(safe, m_par, 1.0))
        product = product * np.where(np.broadcast_to(safe, cond.shape), cond, 0.0)
        skip |= np.broadcast_to(~safe, skip.shape)
    diff = np.abs(full - product)
    return bool(np.all(diff[~skip] <= tol))


class _ProviderBase:
    """Shared query plumbing: budget enforcement, logging, dense sub-tables."""

    cards: tuple[int, ...]
    max_tuple_size: int

    def __init__(self):
        self.access_log = AccessLog()
        self._cache: dict[tuple[int, ...], np.ndarray] = {}

    @property
    def n(self) -> int:
        return len(self.cards)

    def table(self, positions) -> np.ndarray:
        """Dense marginal probabilities over a sorted position set."""
        pos = _check_positions(positions, self.n)
        if len(pos) > self.max_tuple_size:
            raise TupleSizeError(len(pos), self.max_tuple_size)
        self.access_log.record(len(pos))
        hit = self._cache.get(pos)
        if hit is None:
            hit = self._compute(pos)
            hit.flags.writeable = False
            self._cache[pos] = hit
        return hit

    def query(self, positions, values) -> float:
        pos = tuple(int(p) for p in positions)
        vals = tuple(int(v) for v in values)
        if len(pos) != len(vals):
            raise ValueError("positions and values must have equal length")
        t = self.table(pos)
        cards = tuple(self.cards[p - 1] for p in pos)
        if any(not 0 <= v < c for v, c in zip(vals, cards)):
            raise ValueError(f"values {vals} out of range for cardinalities {cards}")
        idx = int(np.dot(vals, mixed_radix_strides(cards))) if pos else 0
        return float(t[idx])

    def _compute(self, pos) -> np.ndarray:
        raise NotImplementedError


class ExactMarginalProvider(_ProviderBase):
    """Answers tuple-marginal queries from a dense joint, up to a size budget.

    The budget is the enforcement mechanism for recovery's access discipline:
    oversized queries raise :class:`TupleSizeError`.
    """

    def __init__(self, joint: JointTable, max_tuple_size: int):
        super().__init__()
        if max_tuple_size < 1:
            raise ValueError(f"max_tuple_size must be >= 1, got {max_tuple_size}")
        self._joint = joint
        self.cards = joint.cards
        self.max_tuple_size = int(max_tuple_size)

    def _compute(self, pos) -> np.ndarray:
        return np.array(marginal(self._joint, pos).probs)


def exact_provider(joint: JointTable, max_tuple_size: int) -> ExactMarginalProvider:
    return ExactMarginalProvider(joint, max_tuple_size)
