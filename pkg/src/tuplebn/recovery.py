"""Structure recovery for ordering-consistent DAGs of bounded in-degree.

For each node j the algorithm enumerates candidate conditioning sets K of
size m = min(j-1, delta) over the predecessors, in lexicographic order, and
accepts the first K that renders j independent of every disjoint predecessor
set L with 1 <= |L| <= m. The accepted K is then shrunk greedily: an element
is dropped whenever the reduced set still passes the full battery. Every
independence query touches at most 1 + 2m <= 2*delta + 1 positions, which is
exactly the tuple budget the providers enforce.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .estimation import dependence_statistic
from .model import DiscreteDag, JointTable
from .oracle import EXACT_TOL, exact_provider


class ModelViolationError(RuntimeError):
    """No conditioning set of the allowed size screens off a node.

    Either the data-generating structure has in-degree above the assumed
    bound, or an empirical decider is inconsistent at this sample size.
    """

    def __init__(self, node: int, detail: str = ""):
        self.node = node
        msg = f"no admissible parent set of the allowed size exists for node {node}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class CiDecider(Protocol):
    """decide(X, L, K) -> True iff X is judged independent of L given K."""

    def decide(self, X, L, K) -> bool: ...


class ProviderCiDecider:
    """Threshold decider over a marginal provider.

    Judges dependence via the cross-multiplied statistic; ``threshold`` is
    both the dependence cutoff and the context-mass skip level. Decisions
    are cached, and every query stays within the provider's tuple budget.
    """

    def __init__(self, provider, threshold: float):
        if threshold <= 0:
            raise ValueError(f"threshold must be > 0, got {threshold}")
        self.provider = provider
        self.threshold = float(threshold)
        self._cache: dict[tuple, bool] = {}

    def decide(self, X, L, K) -> bool:
        key = (tuple(sorted(X)), tuple(sorted(L)), tuple(sorted(K)))
        hit = self._cache.get(key)
        if hit is None:
            stat = dependence_statistic(self.provider, *key, skip_below=self.threshold)
            hit = stat <= self.threshold
            self._cache[key] = hit
        return hit


def exact_ci_decider(joint: JointTable, delta: int, tol: float = EXACT_TOL) -> ProviderCiDecider:
    """Decider backed by exact marginals, budgeted to (2*delta + 1)-tuples."""
    return ProviderCiDecider(exact_provider(joint, 2 * delta + 1), tol)


def empirical_ci_decider(provider, epsilon: float) -> ProviderCiDecider:
    """Decider applying the 4*epsilon deviation threshold to estimated marginals."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    return ProviderCiDecider(provider, 4.0 * epsilon)


@dataclass(frozen=True)
class Skeleton:
    """Parents-only structure: the output of recovery before CPTs attach."""

    n: int
    delta: int
    parents: tuple[tuple[int, ...], ...]

    def max_in_degree(self) -> int:
        return max((len(p) for p in self.parents), default=0)


@dataclass(frozen=True)
class RemovalStep:
    removed: int
    kept: bool


@dataclass
class NodeTrace:
    node: int
    m: int
    tested: list[tuple[int, ...]] = field(default_factory=list)
    accepted: tuple[int, ...] | None = None
    removals: list[RemovalStep] = field(default_factory=list)
    parents: tuple[int, ...] = ()


@dataclass
class RecoveryTrace:
    nodes: list[NodeTrace] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "node": t.node,
                    "m": t.m,
                    "tested": [list(k) for k in t.tested],
                    "accepted": list(t.accepted) if t.accepted is not None else None,
                    "removals": [{"removed": s.removed, "kept": s.kept} for s in t.removals],
                    "parents": list(t.parents),
                }
                for t in self.nodes
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RecoveryTrace":
        trace = cls()
        for t in data["nodes"]:
            trace.nodes.append(
                NodeTrace(
                    node=t["node"],
                    m=t["m"],
                    tested=[tuple(k) for k in t["tested"]],
                    accepted=tuple(t["accepted"]) if t["accepted"] is not None else None,
                    removals=[RemovalStep(s["removed"], s["kept"]) for s in t["removals"]],
                    parents=tuple(t["parents"]),
                )
            )
        return trace


def _passes_battery(decider: CiDecider, j: int, cond: tuple[int, ...], m: int) -> bool:
    """All (j independent-of L given cond) for disjoint predecessor L, |L| in 1..m."""
    rest = tuple(p for p in range(1, j) if p not in cond)
    for size in range(1, m + 1):
        for L in itertools.combinations(rest, size):
            if not decider.decide((j,), L, cond):
                return False
    return True


def _minimize(decider: CiDecider, j: int, accepted: tuple[int, ...], m: int):
    current = list(accepted)
    steps: list[RemovalStep] = []
    changed = True
    while changed:
        changed = False
        for c in sorted(current):
            reduced = tuple(p for p in current if p != c)
            kept = _passes_battery(decider, j, reduced, m)
            steps.append(RemovalStep(c, kept))
            if kept:
                current = list(reduced)
                changed = True
    return tuple(sorted(current)), steps


def minimize_parent_set(decider: CiDecider, j: int, K, m: int) -> tuple[int, ...]:
    """Greedy single-deletion minimization of an accepted conditioning set."""
    final, _ = _minimize(decider, j, tuple(sorted(K)), m)
    return final


def recover_structure(decider: CiDecider, n: int, delta: int) -> tuple[Skeleton, RecoveryTrace]:
    """Find an ordering-consistent parent structure of in-degree <= delta.

    With a sound decider on a distribution that factorizes over some graph of
    in-degree <= delta, the result is Markov relative to that distribution
    (not necessarily the generating graph). Raises ModelViolationError when
    no candidate set passes for some node.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    trace = RecoveryTrace()
    parents: list[tuple[int, ...]] = []
    for j in range(1, n + 1):
        m = min(j - 1, delta)
        node_trace = NodeTrace(node=j, m=m)
        accepted = None
        for K in itertools.combinations(range(1, j), m):
            node_trace.tested.append(K)
            if _passes_battery(decider, j, K, m):
                accepted = K
                break
        if accepted is None:
            trace.nodes.append(node_trace)
            raise ModelViolationError(j, f"all {len(node_trace.tested)} candidate sets of size {m} failed")
        node_trace.accepted = accepted
        final, steps = _minimize(decider, j, accepted, m)
        node_trace.removals = steps
        node_trace.parents = final
        trace.nodes.append(node_trace)
        parents.append(final)
    return Skeleton(n, delta, tuple(parents)), trace


@dataclass(frozen=True)
class AttachResult:
    dag: DiscreteDag
    uniform_rows: tuple[tuple[int, int], ...]  # (node, parent config index) pairs


def attach_cpts(skeleton: Skeleton, provider) -> AttachResult:
    """Fill in CPTs as quotients of tuple marginals.

    cpt_j(x | p) = f(x, p) / f(p); parent configurations of zero mass get
    the uniform row and are flagged.
    """
    cards = provider.cards
    flagged: list[tuple[int, int]] = []
    cpts = []
    for j in range(1, skeleton.n + 1):
        ps = skeleton.parents[j - 1]
        d_j = cards[j - 1]
        if ps:
            union = tuple(sorted((*ps, j)))
            parent_dims = tuple(cards[p - 1] for p in ps)
            n_cfg = int(np.prod(parent_dims)) if parent_dims else 1
            # j exceeds every parent, so it is the last axis of the union table
            joint_rows = provider.table(union).reshape(n_cfg, d_j)
            mass = provider.table(ps).reshape(n_cfg)
        else:
            n_cfg = 1
            joint_rows = provider.table((j,)).reshape(1, d_j)
            mass = np.ones(1)
        rows = np.empty((n_cfg, d_j))
        for cfg in range(n_cfg):
            if mass[cfg] > 0:
                rows[cfg] = joint_rows[cfg] / mass[cfg]
            else:
                rows[cfg] = np.full(d_j, 1.0 / d_j)
                flagged.append((j, cfg))
        cpts.append(rows)
    dag = DiscreteDag(skeleton.n, cards, skeleton.delta, skeleton.parents, cpts)
    return AttachResult(dag, tuple(flagged))
