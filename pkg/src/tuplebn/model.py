"""Ordered discrete Bayesian networks: representation, validation, exact joints,
random instance generation, and the JSON file format.

Nodes are indexed 1..n in the fixed variable ordering. Node j takes integer
values 0..cards[j-1]-1; parent sets are subsets of {1,...,j-1} of size at most
``delta``. Conditional probability tables are stored row-per-parent-configuration,
with parent configurations enumerated in mixed radix over the parents in
increasing node order, most significant first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_JOINT_CAPACITY = 2**24
CPT_ROW_TOL = 1e-12
JOINT_SUM_TOL = 1e-10


class InvalidDagError(ValueError):
    """A DAG failed validation where a valid one is required."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid DAG: {lines}")


class CapacityError(ValueError):
    """A dense joint table would exceed the configured capacity."""


def mixed_radix_strides(dims: Sequence[int]) -> np.ndarray:
    """Strides for flattening a value tuple over ``dims``, most significant first."""
    k = len(dims)
    strides = np.ones(k, dtype=np.int64)
    for i in range(k - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    return strides


@dataclass(frozen=True)
class CylinderKey:
    """Identifies the event that the variables at ``positions`` take ``values``.

    Positions are 1-based and strictly increasing; values are the corresponding
    integer outcomes.
    """

    positions: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.positions) != len(self.values):
            raise ValueError("positions and values must have equal length")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError(f"positions must be strictly increasing: {self.positions}")
        if self.positions and self.positions[0] < 1:
            raise ValueError("positions are 1-based")

    @property
    def size(self) -> int:
        return len(self.positions)


class DiscreteDag:
    """An ordering-consistent DAG with per-node parent sets and CPTs.

    The constructor is permissive: it normalizes shapes but does not enforce
    the structural invariants, so that :func:`validate_dag` can report
    violations as data. Operations that require a valid DAG call
    :func:`validate_dag` and raise :class:`InvalidDagError`.
    """

    def __init__(self, n, cards, delta, parents, cpts):
        self.n = int(n)
        self.cards = tuple(int(c) for c in cards)
        self.delta = int(delta)
        self.parents = tuple(tuple(sorted(int(p) for p in ps)) for ps in parents)
        norm = []
        for t in cpts:
            a = np.ascontiguousarray(np.asarray(t, dtype=np.float64))
            if a.ndim == 1:
                a = a.reshape(1, -1)
            a.flags.writeable = False
            norm.append(a)
        self.cpts = tuple(norm)

    def __eq__(self, other):
        if not isinstance(other, DiscreteDag):
            return NotImplemented
        return (
            self.n == other.n
            and self.cards == other.cards
            and self.delta == other.delta
            and self.parents == other.parents
            and len(self.cpts) == len(other.cpts)
            and all(np.array_equal(a, b) for a, b in zip(self.cpts, other.cpts))
        )

    def __repr__(self):
        edges = sum(len(p) for p in self.parents)
        return f"DiscreteDag(n={self.n}, delta={self.delta}, edges={edges})"

    def parent_cards(self, j: int) -> tuple[int, ...]:
        return tuple(self.cards[p - 1] for p in self.parents[j - 1])

    def parent_config_count(self, j: int) -> int:
        return int(math.prod(self.parent_cards(j)))


class JointTable:
    """Dense joint distribution over all configurations.

    ``probs`` is a flat array over configurations in row-major order,
    i.e. the value of variable 1 is the most significant digit.
    """

    def __init__(self, cards, probs, check: bool = True):
        self.cards = tuple(int(c) for c in cards)
        arr = np.ascontiguousarray(np.asarray(probs, dtype=np.float64)).reshape(-1)
        expected = math.prod(self.cards)
        if arr.size != expected:
            raise ValueError(f"probs has {arr.size} entries, expected {expected}")
        if check:
            if np.any(arr < 0):
                raise ValueError("joint probabilities must be non-negative")
            total = float(arr.sum())
            if abs(total - 1.0) > JOINT_SUM_TOL:
                raise ValueError(f"joint probabilities sum to {total!r}, not 1")
        arr.flags.writeable = False
        self.probs = arr

    @property
    def n(self) -> int:
        return len(self.cards)

    @property
    def array(self) -> np.ndarray:
        return self.probs.reshape(self.cards)

    def __eq__(self, other):
        if not isinstance(other, JointTable):
            return NotImplemented
        return self.cards == other.cards and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"JointTable(cards={self.cards})"


@dataclass(frozen=True)
class Violation:
    node: int | None
    rule: str
    observed: str

    def __str__(self):
        where = f"node {self.node}: " if self.node is not None else ""
        return f"{where}{self.rule} ({self.observed})"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)


def validate_dag(dag: DiscreteDag) -> ValidationReport:
    """Check every structural invariant; violations are returned, not raised."""
    bad: list[Violation] = []
    if dag.n < 1:
        bad.append(Violation(None, "variable count must be >= 1", f"n={dag.n}"))
    if len(dag.cards) != dag.n:
        bad.append(Violation(None, "cards length mismatch", f"{len(dag.cards)} != n={dag.n}"))
    if any(c < 1 for c in dag.cards):
        bad.append(Violation(None, "cardinality must be >= 1", f"cards={dag.cards}"))
    if dag.delta < 0:
        bad.append(Violation(None, "in-degree bound must be >= 0", f"delta={dag.delta}"))
    if len(dag.parents) != dag.n or len(dag.cpts) != dag.n:
        bad.append(
            Violation(
                None,
                "parents/cpts length mismatch",
                f"parents={len(dag.parents)}, cpts={len(dag.cpts)}, n={dag.n}",
            )
        )
        return ValidationReport(False, tuple(bad))

    for j in range(1, dag.n + 1):
        ps = dag.parents[j - 1]
        if len(set(ps)) != len(ps):
            bad.append(Violation(j, "duplicate parent index", f"parents={ps}"))
        for p in ps:
            if p < 1 or p >= j:
                bad.append(Violation(j, "parent index >= child", f"parent={p}"))
        if len(ps) > dag.delta:
            bad.append(Violation(j, "in-degree exceeds bound", f"|parents|={len(ps)} > delta={dag.delta}"))
        if any(p < 1 or p >= j for p in ps):
            continue  # CPT shape is ill-defined under an ordering violation
        cpt = dag.cpts[j - 1]
        n_cfg = int(math.prod(dag.cards[p - 1] for p in ps))
        d_j = dag.cards[j - 1]
        if cpt.shape != (n_cfg, d_j):
            bad.append(Violation(j, "cpt shape mismatch", f"{cpt.shape} != ({n_cfg}, {d_j})"))
            continue
        if np.any(cpt < 0) or np.any(cpt > 1):
            bad.append(Violation(j, "probability out of [0,1]", f"min={cpt.min()!r}, max={cpt.max()!r}"))
        sums = cpt.sum(axis=1)
        worst = int(np.argmax(np.abs(sums - 1.0)))
        if abs(sums[worst] - 1.0) > CPT_ROW_TOL:
            bad.append(Violation(j, "cpt row does not sum to 1", f"row {worst} sums to {sums[worst]!r}"))
    return ValidationReport(not bad, tuple(bad))


def require_valid(dag: DiscreteDag) -> None:
    report = validate_dag(dag)
    if not report.ok:
        raise InvalidDagError(report.violations)


def factorized_joint(dag: DiscreteDag, capacity: int = DEFAULT_JOINT_CAPACITY) -> JointTable:
    """Exact joint obtained by multiplying the per-node conditional tables.

    Guarded by ``capacity`` on the number of dense entries.
    """
    require_valid(dag)
    total = math.prod(dag.cards)
    if total > capacity:
        raise CapacityError(
            f"dense joint needs {total} entries, above the capacity guard {capacity}"
        )
    probs = np.ones(dag.cards, dtype=np.float64)
    for j in range(1, dag.n + 1):
        ps = dag.parents[j - 1]
        axes = tuple(p - 1 for p in ps) + (j - 1,)
        shape = [1] * dag.n
        for a in axes:
            shape[a] = dag.cards[a]
        factor = dag.cpts[j - 1].reshape(tuple(dag.cards[a] for a in axes))
        # move the factor's axes into position, size-1 elsewhere
        probs = probs * factor.reshape(shape)
    return JointTable(dag.cards, probs.reshape(-1))


def random_dag(
    n: int,
    delta: int,
    cards,
    seed,
    alpha: float = 1.0,
    floor: float = 0.01,
    vary_indegree: bool = False,
) -> DiscreteDag:
    """Random ordering-consistent instance with strictly positive CPTs.

    Each node gets min(j-1, delta) parents chosen uniformly among its
    predecessors (a uniformly random size in 0..min(j-1, delta) under
    ``vary_indegree``). CPT rows are symmetric-Dirichlet draws with
    concentration ``alpha``, mixed with the uniform row so that every entry
    is at least ``floor``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if isinstance(cards, int):
        cards = (cards,) * n
    cards = tuple(int(c) for c in cards)
    if len(cards) != n or any(c < 1 for c in cards):
        raise ValueError(f"cards must be {n} integers >= 1, got {cards}")
    if floor < 0 or floor * max(cards) >= 1:
        raise ValueError(f"floor {floor} incompatible with cardinalities {cards}")

    rng = np.random.default_rng(seed)
    parents = []
    cpts = []
    for j in range(1, n + 1):
        limit = min(j - 1, delta)
        size = int(rng.integers(0, limit + 1)) if vary_indegree else limit
        chosen = rng.choice(j - 1, size=size, replace=False) if size else np.empty(0, int)
        ps = tuple(sorted(int(p) + 1 for p in chosen))
        parents.append(ps)
        d_j = cards[j - 1]
        n_cfg = int(math.prod(cards[p - 1] for p in ps))
        raw = rng.dirichlet(np.full(d_j, alpha), size=n_cfg)
        rows = floor + (1.0 - d_j * floor) * raw
        cpts.append(rows)
    return DiscreteDag(n, cards, delta, parents, cpts)


def dag_to_dict(dag: DiscreteDag) -> dict:
    return {
        "n": dag.n,
        "cards": list(dag.cards),
        "delta": dag.delta,
        "parents": [list(ps) for ps in dag.parents],
        "cpts": [[list(row) for row in cpt] for cpt in dag.cpts],
    }


def dag_from_dict(data: dict) -> DiscreteDag:
    missing = {"n", "cards", "delta", "parents", "cpts"} - set(data)
    if missing:
        raise ValueError(f"DAG file missing fields: {sorted(missing)}")
    return DiscreteDag(data["n"], data["cards"], data["delta"], data["parents"], data["cpts"])


def save_dag(dag: DiscreteDag, path) -> None:
    """Write the JSON representation; floats round-trip bit-exactly."""
    with open(path, "w") as f:
        json.dump(dag_to_dict(dag), f, indent=2)
        f.write("\n")


def load_dag(path) -> DiscreteDag:
    with open(path) as f:
        return dag_from_dict(json.load(f))
