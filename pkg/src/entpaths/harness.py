"""Experiment harness: family collection and the minimum-sum success test.

For each target state the harness estimates its minimum gate count, gathers
successful synthesis solutions across gate counts, scores every solution by
the total-variation sum of its entanglement trajectory, bins those sums,
and marks the target a success iff some optimal-gate-count solution lands
in the minimum observed bin.  Aggregates report the empirical success rate
with a binomial confidence interval, plus a rank-correlation statistic
between bin and gate count (reported, never asserted).

Everything is deterministic for a fixed config and seed: per-target seeds
derive from (root seed, target index) and aggregation is by sorted target
index, so parallel runs reproduce serial ones byte for byte.
"""
from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .canonical import write_csv
from .core import (
    MAX_QUBITS,
    Circuit,
    StateVector,
    TwoQubitGate,
    load_state,
    run_circuit,
)
from .entanglement import Measure, geometric_entanglement
from .synthesis import (
    ComplexityEstimate,
    ComplexityNotFound,
    OptimizerBudget,
    SynthesisProblem,
    _seed_key,
    enumerate_architectures,
    estimate_state_complexity,
    optimize_gates_collect,
    padded_warm_start,
    sample_target,
)
from .trajectories import path_entanglement_sum, trajectory

DELTA_BIN_DEFAULT = 1e-3
DEGENERATE_ENTANGLEMENT = 1e-6
WILSON_Z_95 = 1.959963984540054


class ConfigError(ValueError):
    """An experiment config violates its schema; message names the field."""


def family_bin_of(sum_value: float, delta_bin: float = DELTA_BIN_DEFAULT) -> int:
    """Bin index floor(sum / delta) grouping trajectories into families."""
    if delta_bin <= 0.0:
        raise ValueError(f"delta_bin must be positive, got {delta_bin}")
    if not sum_value >= 0.0:
        raise ValueError(f"trajectory sums are nonnegative, got {sum_value}")
    return int(math.floor(sum_value / delta_bin))


@dataclass(frozen=True)
class PathFamilyRecord:
    """One successful synthesis solution scored by its trajectory sum."""

    record_id: str
    r: int
    sum_value: float
    family_bin: int
    is_optimal_r: bool
    achieved_fidelity: float
    architecture: tuple[tuple[int, int], ...]


def _record_from_circuit(record_id: str, circuit: Circuit, achieved: float, *,
                         r_star: int, measure: Measure, cut, geo_restarts: int,
                         delta_bin: float) -> PathFamilyRecord:
    traj = trajectory(run_circuit(circuit), measure, cut=cut,
                      geo_restarts=geo_restarts, geo_seed=0)
    total = path_entanglement_sum(traj)
    return PathFamilyRecord(
        record_id=record_id,
        r=circuit.num_gates,
        sum_value=total,
        family_bin=family_bin_of(total, delta_bin),
        is_optimal_r=circuit.num_gates == r_star,
        achieved_fidelity=achieved,
        architecture=tuple(g.qubit_pair for g in circuit.gates),
    )


def collect_families(target: StateVector, estimate: ComplexityEstimate, *,
                     r_values: Sequence[int], samples_per_r: int,
                     budget: OptimizerBudget, fidelity_tol: float,
                     delta_bin: float = DELTA_BIN_DEFAULT, seed=0,
                     measure: Measure = Measure.GEOMETRIC,
                     cut: Sequence[int] | None = None,
                     geo_restarts: int = 32,
                     record_prefix: str = "t") -> list[PathFamilyRecord]:
    """Gather successful synthesis solutions across gate counts.

    The estimate's witness is always included as a record; at each r the
    canonical architectures are searched in order and every restart that
    reaches the fidelity threshold contributes a record (up to
    samples_per_r per r).  Gate counts below r_star are skipped: the
    exhaustive search below r_star already failed, so they hold no
    solutions.  For r above r_star the search leads with a warm start that
    pads the previous anchor circuit by an identity gate, which guarantees
    solutions keep being found at larger gate counts.
    """
    if samples_per_r < 0:
        raise ValueError(f"samples_per_r must be >= 0, got {samples_per_r}")
    threshold = 1.0 - fidelity_tol
    r_star = estimate.r_star
    records = [_record_from_circuit(
        f"{record_prefix}-r{r_star}-witness", estimate.witness,
        estimate.achieved_fidelity, r_star=r_star, measure=measure, cut=cut,
        geo_restarts=geo_restarts, delta_bin=delta_bin)]
    anchor = estimate.witness
    for r in sorted(set(int(r) for r in r_values)):
        if r < max(r_star, 1):
            continue
        warm_arch = None
        warm_init = None
        if r == anchor.num_gates + 1:
            warm_arch, warm_init = padded_warm_start(anchor, target.num_qubits)
        archs = enumerate_architectures(target.num_qubits, r)
        ordered = list(range(len(archs)))
        if warm_arch is not None and warm_arch in archs:
            warm_index = archs.index(warm_arch)
            ordered.remove(warm_index)
            ordered.insert(0, warm_index)
        collected_r = 0
        first_at_r: Circuit | None = None
        for ai in ordered:
            if collected_r >= samples_per_r:
                break
            arch = archs[ai]
            init = warm_init if (warm_arch is not None and arch == warm_arch) else None
            solutions = optimize_gates_collect(
                arch, target, budget, _seed_key(seed, r, ai),
                success_fidelity=threshold, init_gates=init,
                max_collect=samples_per_r - collected_r)
            for result in solutions:
                record_id = f"{record_prefix}-r{r}-a{ai:02d}-k{result.best_restart:02d}"
                records.append(_record_from_circuit(
                    record_id, result.circuit, result.achieved_fidelity,
                    r_star=r_star, measure=measure, cut=cut,
                    geo_restarts=geo_restarts, delta_bin=delta_bin))
                collected_r += 1
                if first_at_r is None:
                    first_at_r = result.circuit
        if first_at_r is not None:
            anchor = first_at_r
        elif anchor.num_gates == r - 1:
            pad_arch, pad_init = padded_warm_start(anchor, target.num_qubits)
            anchor = Circuit(pad_arch, anchor.gates + (
                TwoQubitGate(pad_arch.gate_slots[-1], pad_init[-1]),))
    return records


# --- experiment config ----------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved conjecture-experiment parameters (see from_dict for schema)."""

    num_qubits: int
    target_count: int | None
    r_gen_max: int | None
    target_files: tuple[str, ...] | None
    seed: int
    fidelity_tol: float = 1e-4
    r_max: int = 3
    delta_bin: float = DELTA_BIN_DEFAULT
    measure: Measure = Measure.GEOMETRIC
    cut: tuple[int, ...] | None = None
    restarts: int = 64
    iterations: int = 2000
    samples_per_r: int = 6
    geo_restarts: int = 32
    max_architectures: int = 256
    parallelism: int = 1

    @property
    def num_targets(self) -> int:
        if self.target_files is not None:
            return len(self.target_files)
        return self.target_count

    @classmethod
    def from_dict(cls, doc: dict, base_dir=None) -> "ExperimentConfig":
        """Validate a config document; errors name the failing field.

        Schema: {n, targets: {count, r_gen, seed} | {files: [...]},
        fidelity_tol?, r_max?, delta_E_bin?, measure?, cut?,
        budget: {restarts?, iters?}?, samples_per_r?, geo_restarts?,
        max_architectures?, parallelism?}.
        """
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {"n", "targets", "fidelity_tol", "r_max", "delta_E_bin", "measure",
                 "cut", "budget", "samples_per_r", "geo_restarts",
                 "max_architectures", "parallelism"}
        for key in doc:
            if key not in known:
                raise ConfigError(f"unknown config field {key!r}")

        def need(cond, field, message):
            if not cond:
                raise ConfigError(f"{field} {message}")

        need("n" in doc, "n", "is required")
        n = doc["n"]
        need(isinstance(n, int) and not isinstance(n, bool) and 2 <= n <= MAX_QUBITS,
             "n", f"must be an integer in [2, {MAX_QUBITS}]")
        need("targets" in doc, "targets", "is required")
        targets = doc["targets"]
        need(isinstance(targets, dict), "targets", "must be an object")
        count = r_gen = None
        files = None
        seed = 0
        if "files" in targets:
            for key in targets:
                if key not in {"files", "seed"}:
                    raise ConfigError(f"targets.{key} not allowed alongside targets.files")
            raw = targets["files"]
            need(isinstance(raw, list) and raw and all(isinstance(f, str) for f in raw),
                 "targets.files", "must be a nonempty list of paths")
            base = Path(base_dir) if base_dir is not None else Path(".")
            files = tuple(str((base / f).resolve()) if not Path(f).is_absolute() else f
                          for f in raw)
            seed = targets.get("seed", 0)
            need(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
                 "targets.seed", "must be a nonnegative integer")
        else:
            for key in targets:
                if key not in {"count", "r_gen", "seed"}:
                    raise ConfigError(f"unknown field targets.{key}")
            need("count" in targets, "targets.count", "is required")
            count = targets["count"]
            need(isinstance(count, int) and not isinstance(count, bool) and count >= 1,
                 "targets.count", "must be an integer >= 1")
            need("r_gen" in targets, "targets.r_gen", "is required")
            r_gen = targets["r_gen"]
            need(isinstance(r_gen, int) and not isinstance(r_gen, bool) and r_gen >= 1,
                 "targets.r_gen", "must be an integer >= 1")
            seed = targets.get("seed", 0)
            need(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
                 "targets.seed", "must be a nonnegative integer")
        fidelity_tol = doc.get("fidelity_tol", 1e-4)
        need(isinstance(fidelity_tol, (int, float)) and 0.0 < float(fidelity_tol) < 1.0,
             "fidelity_tol", "must be a number in (0, 1)")
        r_max = doc.get("r_max", 3)
        need(isinstance(r_max, int) and not isinstance(r_max, bool) and r_max >= 1,
             "r_max", "must be an integer >= 1")
        delta_bin = doc.get("delta_E_bin", DELTA_BIN_DEFAULT)
        need(isinstance(delta_bin, (int, float)) and float(delta_bin) > 0.0,
             "delta_E_bin", "must be a positive number")
        measure_raw = doc.get("measure", "geometric")
        try:
            measure = Measure(measure_raw)
        except ValueError:
            raise ConfigError(
                f"measure must be one of {[m.value for m in Measure]}, got {measure_raw!r}"
            ) from None
        cut = None
        if "cut" in doc:
            raw_cut = doc["cut"]
            need(isinstance(raw_cut, list) and raw_cut
                 and all(isinstance(q, int) and not isinstance(q, bool) for q in raw_cut),
                 "cut", "must be a nonempty list of qubit indices")
            cut = tuple(sorted(set(int(q) for q in raw_cut)))
            need(len(cut) == len(raw_cut), "cut", "must not repeat qubits")
            need(0 <= cut[0] and cut[-1] < n and len(cut) < n,
                 "cut", f"must be a proper subset of 0..{n - 1}")
        if measure is Measure.VON_NEUMANN_BITS and cut is None:
            raise ConfigError("cut is required when measure is 'vonneumann'")
        budget = doc.get("budget", {})
        need(isinstance(budget, dict), "budget", "must be an object")
        for key in budget:
            if key not in {"restarts", "iters"}:
                raise ConfigError(f"unknown field budget.{key}")
        restarts = budget.get("restarts", 64)
        need(isinstance(restarts, int) and not isinstance(restarts, bool) and restarts >= 1,
             "budget.restarts", "must be an integer >= 1")
        iterations = budget.get("iters", 2000)
        need(isinstance(iterations, int) and not isinstance(iterations, bool) and iterations >= 1,
             "budget.iters", "must be an integer >= 1")
        samples_per_r = doc.get("samples_per_r", 6)
        need(isinstance(samples_per_r, int) and not isinstance(samples_per_r, bool)
             and samples_per_r >= 0, "samples_per_r", "must be an integer >= 0")
        geo_restarts = doc.get("geo_restarts", 32)
        need(isinstance(geo_restarts, int) and not isinstance(geo_restarts, bool)
             and geo_restarts >= 1, "geo_restarts", "must be an integer >= 1")
        max_architectures = doc.get("max_architectures", 256)
        need(isinstance(max_architectures, int) and not isinstance(max_architectures, bool)
             and max_architectures >= 1, "max_architectures", "must be an integer >= 1")
        parallelism = doc.get("parallelism", 1)
        need(isinstance(parallelism, int) and not isinstance(parallelism, bool)
             and parallelism >= 1, "parallelism", "must be an integer >= 1")
        return cls(num_qubits=n, target_count=count, r_gen_max=r_gen,
                   target_files=files, seed=seed, fidelity_tol=float(fidelity_tol),
                   r_max=r_max, delta_bin=float(delta_bin), measure=measure, cut=cut,
                   restarts=restarts, iterations=iterations,
                   samples_per_r=samples_per_r, geo_restarts=geo_restarts,
                   max_architectures=max_architectures, parallelism=parallelism)

    def to_dict(self) -> dict:
        """Resolved config echo (defaults materialized)."""
        if self.target_files is not None:
            targets = {"files": list(self.target_files), "seed": self.seed}
        else:
            targets = {"count": self.target_count, "r_gen": self.r_gen_max,
                       "seed": self.seed}
        doc = {
            "n": self.num_qubits,
            "targets": targets,
            "fidelity_tol": self.fidelity_tol,
            "r_max": self.r_max,
            "delta_E_bin": self.delta_bin,
            "measure": self.measure.value,
            "budget": {"restarts": self.restarts, "iters": self.iterations},
            "samples_per_r": self.samples_per_r,
            "geo_restarts": self.geo_restarts,
            "max_architectures": self.max_architectures,
            "parallelism": self.parallelism,
        }
        if self.cut is not None:
            doc["cut"] = list(self.cut)
        return doc


# --- per-target evaluation ------------------------------------------------


@dataclass(frozen=True)
class TargetOutcome:
    """Everything the report keeps about one target."""

    target_id: str
    r_gen: int | None
    r_star: int | None
    exhaustiveness: str | None
    witness_fidelity: float | None
    target_entanglement: float
    degenerate: bool
    records: tuple[PathFamilyRecord, ...]
    min_bin: int | None
    min_bin_optimal_r: int | None
    success: bool | None
    spearman_bin_vs_r: float | None
    best_fidelity_per_r: tuple[tuple[int, float], ...] = ()


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = average
        i = j + 1
    return ranks


def spearman_rank_correlation(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Spearman rho with average ranks for ties; None when undefined."""
    if len(xs) != len(ys):
        raise ValueError("rank correlation needs paired samples")
    if len(xs) < 2 or len(set(xs)) < 2 or len(set(ys)) < 2:
        return None
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    if vx == 0.0 or vy == 0.0:
        return None
    return cov / math.sqrt(vx * vy)


def wilson_interval(successes: int, trials: int,
                    z: float = WILSON_Z_95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (contains the MLE)."""
    if trials <= 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials
                         + z * z / (4.0 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def evaluate_target(config: ExperimentConfig, index: int) -> TargetOutcome:
    """Full pipeline for target `index`: sample/load, estimate, collect, score."""
    target_id = f"t{index:03d}"
    if config.target_files is not None:
        target = load_state(config.target_files[index])
        if target.num_qubits != config.num_qubits:
            raise ConfigError(
                f"targets.files[{index}] has {target.num_qubits} qubits, config n={config.num_qubits}"
            )
        r_gen: int | None = None
    else:
        rng = np.random.default_rng(_seed_key(config.seed, index, 0))
        r_gen = int(rng.integers(1, config.r_gen_max + 1))
        target, _ = sample_target(config.num_qubits, r_gen,
                                  _seed_key(config.seed, index, 1))
    entanglement = geometric_entanglement(
        target, restarts=config.geo_restarts, seed=0).value
    degenerate = entanglement < DEGENERATE_ENTANGLEMENT
    problem = SynthesisProblem(
        target, fidelity_tol=config.fidelity_tol, r_max=config.r_max,
        budget=OptimizerBudget(config.restarts, config.iterations),
        seed=_seed_key(config.seed, index, 2),
        max_architectures=config.max_architectures)
    estimate = estimate_state_complexity(problem)
    if isinstance(estimate, ComplexityNotFound):
        return TargetOutcome(
            target_id=target_id, r_gen=r_gen, r_star=None, exhaustiveness=None,
            witness_fidelity=None, target_entanglement=entanglement,
            degenerate=degenerate, records=(), min_bin=None,
            min_bin_optimal_r=None, success=None, spearman_bin_vs_r=None,
            best_fidelity_per_r=tuple(sorted(estimate.best_fidelity_per_r.items())))
    records = tuple(collect_families(
        target, estimate,
        r_values=range(estimate.r_star, config.r_max + 1),
        samples_per_r=config.samples_per_r,
        budget=OptimizerBudget(config.restarts, config.iterations),
        fidelity_tol=config.fidelity_tol, delta_bin=config.delta_bin,
        seed=_seed_key(config.seed, index, 3), measure=config.measure,
        cut=config.cut, geo_restarts=config.geo_restarts,
        record_prefix=target_id))
    min_bin = min(rec.family_bin for rec in records)
    optimal_bins = [rec.family_bin for rec in records if rec.is_optimal_r]
    min_bin_optimal = min(optimal_bins) if optimal_bins else None
    success = any(rec.is_optimal_r and rec.family_bin == min_bin for rec in records)
    spearman = spearman_rank_correlation(
        [float(rec.family_bin) for rec in records],
        [float(rec.r) for rec in records])
    return TargetOutcome(
        target_id=target_id, r_gen=r_gen, r_star=estimate.r_star,
        exhaustiveness=estimate.exhaustiveness,
        witness_fidelity=estimate.achieved_fidelity,
        target_entanglement=entanglement, degenerate=degenerate,
        records=records, min_bin=min_bin, min_bin_optimal_r=min_bin_optimal,
        success=success, spearman_bin_vs_r=spearman)


# --- the experiment -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConjectureReport:
    config: ExperimentConfig
    outcomes: tuple[TargetOutcome, ...]


def test_conjecture(config: ExperimentConfig, jobs: int | None = None) -> ConjectureReport:
    """Run the whole experiment; `jobs` overrides config.parallelism.

    Worker count never changes the result: each target is a pure function
    of (config, index) and outcomes are aggregated in index order.
    """
    workers = config.parallelism if jobs is None else jobs
    indices = list(range(config.num_targets))
    if workers <= 1 or len(indices) <= 1:
        outcomes = [evaluate_target(config, i) for i in indices]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(evaluate_target, config, i): i for i in indices}
            by_index: dict[int, TargetOutcome] = {}
            for future in concurrent.futures.as_completed(futures):
                by_index[futures[future]] = future.result()
        outcomes = [by_index[i] for i in indices]
    return ConjectureReport(config, tuple(outcomes))


def _rate_block(outcomes: Sequence[TargetOutcome]) -> dict:
    trials = len(outcomes)
    successes = sum(1 for o in outcomes if o.success)
    if trials == 0:
        return {"trials": 0, "successes": 0, "success_rate": None,
                "success_rate_ci95": None, "epsilon_hat": None,
                "epsilon_hat_ci95": None}
    rate = successes / trials
    low, high = wilson_interval(successes, trials)
    return {
        "trials": trials,
        "successes": successes,
        "success_rate": rate,
        "success_rate_ci95": [low, high],
        "epsilon_hat": 1.0 - rate,
        "epsilon_hat_ci95": [1.0 - high, 1.0 - low],
    }


def report_to_dict(report: ConjectureReport) -> dict:
    """Canonical-JSON-ready report with aggregates and per-target detail."""
    evaluated = [o for o in report.outcomes if o.r_star is not None]
    failures = [o for o in report.outcomes if o.r_star is None]
    nondegenerate = [o for o in evaluated if not o.degenerate]
    spearman_values = [o.spearman_bin_vs_r for o in evaluated
                      if o.spearman_bin_vs_r is not None]
    targets = []
    for o in report.outcomes:
        targets.append({
            "target_id": o.target_id,
            "r_gen": o.r_gen,
            "r_star": o.r_star,
            "exhaustiveness": o.exhaustiveness,
            "witness_fidelity": o.witness_fidelity,
            "target_entanglement": o.target_entanglement,
            "degenerate": o.degenerate,
            "min_bin": o.min_bin,
            "min_bin_optimal_r": o.min_bin_optimal_r,
            "success": o.success,
            "spearman_bin_vs_r": o.spearman_bin_vs_r,
            "best_fidelity_per_r": {str(r): f for r, f in o.best_fidelity_per_r},
            "records": [
                {
                    "record_id": rec.record_id,
                    "r": rec.r,
                    "sum_value": rec.sum_value,
                    "family_bin": rec.family_bin,
                    "is_optimal_r": rec.is_optimal_r,
                    "achieved_fidelity": rec.achieved_fidelity,
                    "architecture": [list(p) for p in rec.architecture],
                }
                for rec in o.records
            ],
        })
    return {
        "config": report.config.to_dict(),
        "aggregate": {
            "num_targets": len(report.outcomes),
            "num_synthesis_failures": len(failures),
            "num_degenerate": sum(1 for o in evaluated if o.degenerate),
            "all_targets": _rate_block(evaluated),
            "excluding_degenerate": _rate_block(nondegenerate),
            "spearman_bin_vs_r_mean": (sum(spearman_values) / len(spearman_values)
                                       if spearman_values else None),
            "spearman_defined_count": len(spearman_values),
        },
        "targets": targets,
    }


def write_records_csv(report: ConjectureReport, path) -> None:
    """Flat per-record table (one row per collected solution)."""
    rows = []
    for outcome in report.outcomes:
        for rec in outcome.records:
            arch = ";".join(f"{j}-{k}" for j, k in rec.architecture) or "-"
            rows.append((outcome.target_id, rec.record_id, rec.r,
                         rec.is_optimal_r, rec.sum_value, rec.family_bin,
                         rec.achieved_fidelity, arch))
    write_csv(path, ("target_id", "record_id", "r", "is_optimal_r",
                     "sum_value", "family_bin", "achieved_fidelity",
                     "architecture"), rows)
