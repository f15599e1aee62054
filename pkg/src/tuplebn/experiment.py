"""End-to-end experiment harness: generate, sample, recover, validate, report.

Each (trial, sample-size) cell draws its own network instance and sample
matrix from seeds derived deterministically from (master seed, trial index,
sample-size index), recovers a structure with the empirical decider at the
full tuple budget, and validates the result against the exact joint. Reports
go to ``trials.csv`` plus an aggregate ``summary.json``; both are
byte-identical across reruns with the same configuration. Wall-clock timings
are kept on the in-memory reports and written only on request, to a separate
file, so the primary artifacts stay reproducible.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from .estimation import empirical_provider, sample, tuple_frequencies
from .model import factorized_joint, random_dag
from .oracle import is_markov_relative, marginal
from .recovery import ModelViolationError, attach_cpts, empirical_ci_decider, recover_structure
from .vcbounds import required_sample_size, risk_bound, vc_upper_bound

OUTCOME_OK = "markov-ok"
OUTCOME_VIOLATION = "model-violation"
OUTCOME_FAIL = "markov-fail"
OUTCOME_ERROR = "error"

TRIALS_HEADER = ["trial", "l_index", "l", "seed", "outcome", "max_freq_dev", "max_tuple_size", "graph_equal"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters; see from_dict for the file format."""

    n: int
    delta: int
    cards: tuple[int, ...]
    alpha: float
    floor: float
    sample_sizes: tuple[int, ...]
    epsilon: float
    delta_risk: float
    trials: int
    seed: int
    output_dir: str
    markov_tol: float = 1e-2

    def __post_init__(self):
        if self.n < 1 or self.delta < 0:
            raise ValueError(f"need n >= 1 and delta >= 0, got n={self.n}, delta={self.delta}")
        if len(self.cards) != self.n or any(c < 1 for c in self.cards):
            raise ValueError(f"cards must be {self.n} values >= 1, got {self.cards}")
        if not self.sample_sizes or any(l < 1 for l in self.sample_sizes):
            raise ValueError(f"sample_sizes must be nonempty positive, got {self.sample_sizes}")
        if not 0 < self.epsilon < 1 or not 0 < self.delta_risk < 1:
            raise ValueError("epsilon and delta_risk must be in (0,1)")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.markov_tol <= 0:
            raise ValueError(f"markov_tol must be > 0, got {self.markov_tol}")

    @property
    def k(self) -> int:
        """Tuple budget actually usable: 2*delta+1 capped at n."""
        return min(2 * self.delta + 1, self.n)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Build from the JSON config mapping; unknown keys are rejected.

        Cardinalities come either as "cards" (a list) or "d" (one uniform
        value), exactly one of the two.
        """
        allowed = {
            "n", "delta", "cards", "d", "alpha", "floor", "sample_sizes",
            "epsilon", "delta_risk", "trials", "seed", "output_dir", "markov_tol",
        }
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        missing = sorted(
            k for k in ("n", "delta", "sample_sizes", "epsilon", "delta_risk", "trials", "seed", "output_dir")
            if k not in data
        )
        if missing:
            raise ValueError(f"missing config keys: {missing}")
        if ("cards" in data) == ("d" in data):
            raise ValueError('exactly one of "cards" or "d" is required')
        n = int(data["n"])
        cards = tuple(int(c) for c in data["cards"]) if "cards" in data else (int(data["d"]),) * n
        return cls(
            n=n,
            delta=int(data["delta"]),
            cards=cards,
            alpha=float(data.get("alpha", 1.0)),
            floor=float(data.get("floor", 0.01)),
            sample_sizes=tuple(int(l) for l in data["sample_sizes"]),
            epsilon=float(data["epsilon"]),
            delta_risk=float(data["delta_risk"]),
            trials=int(data["trials"]),
            seed=int(data["seed"]),
            output_dir=str(data["output_dir"]),
            markov_tol=float(data.get("markov_tol", 1e-2)),
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "delta": self.delta,
            "cards": list(self.cards),
            "alpha": self.alpha,
            "floor": self.floor,
            "sample_sizes": list(self.sample_sizes),
            "epsilon": self.epsilon,
            "delta_risk": self.delta_risk,
            "trials": self.trials,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "markov_tol": self.markov_tol,
        }


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        return ExperimentConfig.from_dict(json.load(f))


@dataclass
class TrialReport:
    """One (trial, sample size) cell of the experiment grid.

    wall_time_ms is measurement-dependent and therefore excluded from the
    reproducible CSV; it is None on reports read back from disk.
    """

    trial: int
    l_index: int
    l: int
    seed: int
    outcome: str
    max_freq_dev: float
    max_tuple_size: int
    graph_equal: bool
    wall_time_ms: float | None = None


def _max_frequency_deviation(freq, joint) -> float:
    """Largest |empirical - exact| over all stored-size tuple cylinders."""
    worst = 0.0
    n = len(freq.cards)
    for pos in itertools.combinations(range(1, n + 1), freq.k):
        emp = freq.dense_counts(pos).astype(np.float64) / freq.l
        exact = marginal(joint, pos).probs
        dev = float(np.abs(emp - exact).max())
        if dev > worst:
            worst = dev
    return worst


def run_trial_cell(config: ExperimentConfig, trial: int, l_index: int) -> TrialReport:
    """Run one grid cell: generate, sample, recover, validate."""
    l = config.sample_sizes[l_index]
    state = np.random.SeedSequence([config.seed, trial, l_index]).generate_state(2, dtype=np.uint64)
    dag_seed, sample_seed = int(state[0]), int(state[1])
    start = time.perf_counter()
    dag = random_dag(config.n, config.delta, config.cards, dag_seed, alpha=config.alpha, floor=config.floor)
    joint = factorized_joint(dag)
    samples = sample(dag, l, sample_seed)
    freq = tuple_frequencies(samples, config.k)
    provider = empirical_provider(freq)
    max_dev = _max_frequency_deviation(freq, joint)
    graph_equal = False
    try:
        decider = empirical_ci_decider(provider, config.epsilon)
        skeleton, _ = recover_structure(decider, config.n, config.delta)
        recovered = attach_cpts(skeleton, provider).dag
        graph_equal = recovered.parents == dag.parents
        ok = is_markov_relative(joint, recovered, tol=config.markov_tol)
        outcome = OUTCOME_OK if ok else OUTCOME_FAIL
    except ModelViolationError:
        outcome = OUTCOME_VIOLATION
    except Exception:  # a cell failure must not abort the batch
        outcome = OUTCOME_ERROR
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return TrialReport(
        trial=trial,
        l_index=l_index,
        l=l,
        seed=dag_seed,
        outcome=outcome,
        max_freq_dev=max_dev,
        max_tuple_size=provider.access_log.max_size,
        graph_equal=graph_equal,
        wall_time_ms=elapsed_ms,
    )


def summarize(config: ExperimentConfig, reports: list[TrialReport]) -> dict:
    """Aggregate per sample size and set the observed rates beside the
    uniform-deviation bound at the same l."""
    h = vc_upper_bound(config.n, config.k, max(config.cards))
    sizes = required_sample_size(config.n, config.k, max(config.cards), config.epsilon, config.delta_risk)
    per_l = []
    for l_index, l in enumerate(config.sample_sizes):
        cell = [r for r in reports if r.l_index == l_index]
        counts = {
            OUTCOME_OK: 0,
            OUTCOME_VIOLATION: 0,
            OUTCOME_FAIL: 0,
            OUTCOME_ERROR: 0,
        }
        for r in cell:
            counts[r.outcome] += 1
        devs = [r.max_freq_dev for r in cell]
        per_l.append(
            {
                "l": l,
                "trials": len(cell),
                "outcomes": counts,
                "markov_ok_rate": counts[OUTCOME_OK] / len(cell),
                "graph_equal_rate": sum(r.graph_equal for r in cell) / len(cell),
                "max_freq_dev_max": max(devs),
                "max_freq_dev_mean": sum(devs) / len(devs),
                "freq_dev_exceed_rate": sum(d >= config.epsilon for d in devs) / len(devs),
                "risk_bound": risk_bound(h, l, config.epsilon).bound,
            }
        )
    return {
        "config": config.to_dict(),
        "k": config.k,
        "tuple_budget": 2 * config.delta + 1,
        "vc_upper_bound": h,
        "l_suff": sizes.l_suff,
        "l_risk": sizes.l_risk,
        "max_tuple_size_overall": max(r.max_tuple_size for r in reports),
        "per_l": per_l,
    }


def save_trial_reports(reports: list[TrialReport], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRIALS_HEADER)
        for r in reports:
            writer.writerow(
                [r.trial, r.l_index, r.l, r.seed, r.outcome, repr(r.max_freq_dev),
                 r.max_tuple_size, "true" if r.graph_equal else "false"]
            )


def load_trial_reports(path) -> list[TrialReport]:
    reports = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != TRIALS_HEADER:
            raise ValueError(f"unexpected trials header: {header}")
        for row in reader:
            reports.append(
                TrialReport(
                    trial=int(row[0]),
                    l_index=int(row[1]),
                    l=int(row[2]),
                    seed=int(row[3]),
                    outcome=row[4],
                    max_freq_dev=float(row[5]),
                    max_tuple_size=int(row[6]),
                    graph_equal=row[7] == "true",
                )
            )
    return reports


def run_experiment(config: ExperimentConfig, write_timings: bool = False) -> dict:
    """Run the full grid and write trials.csv plus summary.json.

    Rows appear in (trial, sample-size index) order. Returns the summary
    mapping. With write_timings, per-cell wall times go to timings.csv,
    which is deliberately outside the determinism guarantee.
    """
    os.makedirs(config.output_dir, exist_ok=True)
    reports = [
        run_trial_cell(config, trial, l_index)
        for trial in range(config.trials)
        for l_index in range(len(config.sample_sizes))
    ]
    summary = summarize(config, reports)
    save_trial_reports(reports, os.path.join(config.output_dir, "trials.csv"))
    with open(os.path.join(config.output_dir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    if write_timings:
        with open(os.path.join(config.output_dir, "timings.csv"), "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["trial", "l_index", "wall_time_ms"])
            for r in reports:
                writer.writerow([r.trial, r.l_index, repr(r.wall_time_ms)])
    return summary
