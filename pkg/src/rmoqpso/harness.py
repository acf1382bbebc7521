"""Experiment orchestration: factorial sweeps, repeated runs, statistics and file export."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .archive import ParetoArchive
from .benchmarks import IAE, BenchmarkSpec, get_benchmark
from .config import OptimizerConfig, default_config
from .control import Trajectory
from .errors import EmptyGrid, SchemaError
from .objectives import OBJECTIVE_NAMES, ObjectiveVector, scalarized_fitness
from .optimizers.runner import run_method
from .stats import LESS, welch_t_test

SUMMARY_FIELDS = ("fitness",) + OBJECTIVE_NAMES
REPRESENTATIVE_RULE = "archive member minimizing the fixed-weight aggregate (w1 = w2 = 0.5)"
INT_PARAMS = {"swarm_size", "iterations", "sa_iterations", "dwa_f", "tournament", "archive_capacity"}

# Keys that may differ between otherwise identical invocations.
VOLATILE_KEYS = ("generated_at",)


def tail_label(bench: BenchmarkSpec) -> str:
    return "IAE" if bench.tail_kind == IAE else "Ess"


def metric_definitions(bench: BenchmarkSpec) -> dict:
    spec = bench.metric_spec
    return {
        "signal": spec.source,
        "reference": "relative to the signal's value at t = 0",
        "overshoot": "largest excursion past zero opposite y0, signal units",
        "rise_time": f"time from |y| <= {spec.rise_hi}|y0| to |y| <= {spec.rise_lo}|y0|",
        "settling_time": f"time after the last sample outside a {spec.settle_band:g}|y0| band",
        "tail": (
            "trapezoid integral of |-w + 1.133 theta + 0.2 h|"
            if bench.tail_kind == IAE
            else f"mean |y| over the final {spec.tail_fraction:g} of the horizon"
        ),
        "J": "trapezoid integral of x'Qx + u'Ru over the horizon",
    }


# --------------------------------------------------------------------------- sweeps


def _levels(lower: float, upper: float, step: float, integer: bool) -> list:
    if step <= 0:
        raise SchemaError("sweep step must be positive")
    if upper < lower:
        raise EmptyGrid(f"empty range [{lower}, {upper}]")
    count = int(math.floor((upper - lower) / step + 1e-9)) + 1
    values = [round(lower + k * step, 12) for k in range(count)]
    return [int(round(v)) for v in values] if integer else values


@dataclass
class SweepPlan:
    method: str
    benchmark: str
    ranges: dict
    repetitions: int = 5
    base_seed: int = 0
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        self.method = self.method.lower()
        if self.repetitions < 1:
            raise SchemaError("repetitions must be >= 1")
        if not self.ranges:
            raise EmptyGrid("a sweep needs at least one parameter range")
        known = set(OptimizerConfig.field_names())
        for name, triple in self.ranges.items():
            if name not in known:
                raise SchemaError(f"unknown optimizer parameter {name!r}")
            if len(triple) != 3:
                raise SchemaError(f"range for {name!r} must be [lower, upper, step]")
            self.ranges[name] = [float(v) for v in triple]
            _levels(*self.ranges[name], name in INT_PARAMS)

    def levels(self) -> dict:
        return {k: _levels(*v, k in INT_PARAMS) for k, v in self.ranges.items()}

    def cells(self) -> list:
        levels = self.levels()
        names = list(levels)
        return [dict(zip(names, combo)) for combo in itertools.product(*(levels[k] for k in names))]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "benchmark": self.benchmark,
            "ranges": {k: list(v) for k, v in self.ranges.items()},
            "repetitions": self.repetitions,
            "base_seed": self.base_seed,
            "fixed": dict(self.fixed),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepPlan":
        try:
            return cls(
                method=doc["method"],
                benchmark=doc.get("benchmark", "pendulum"),
                ranges=dict(doc["ranges"]),
                repetitions=int(doc.get("repetitions", 5)),
                base_seed=int(doc.get("base_seed", 0)),
                fixed=dict(doc.get("fixed", {})),
            )
        except KeyError as exc:
            raise SchemaError(f"sweep plan is missing {exc}") from exc

    @classmethod
    def load(cls, path, **override) -> "SweepPlan":
        """Read a JSON plan; keyword overrides (e.g. from the command line) win."""
        doc = json.loads(Path(path).read_text())
        if not isinstance(doc, dict):
            raise SchemaError("sweep plan must be a JSON object")
        return cls.from_dict({**doc, **override})


@dataclass
class SweepResult:
    plan: SweepPlan
    cells: list
    best_params: dict
    best_config: OptimizerConfig

    def to_csv(self) -> str:
        names = list(self.plan.ranges)
        rows = [names + ["mean_fitness"] + [f"run{k}" for k in range(self.plan.repetitions)]]
        for cell in self.cells:
            rows.append([cell["params"][k] for k in names] + [cell["mean"]] + cell["scores"])
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()


def factorial_sweep(plan: SweepPlan, bench: BenchmarkSpec | None = None, runner=None) -> SweepResult:
    """Evaluate every grid cell ``plan.repetitions`` times; the lowest mean fitness wins.

    Repetition k of every cell uses seed ``base_seed + k`` so cells are
    compared on common random numbers.
    """
    bench = bench or get_benchmark(plan.benchmark)
    runner = runner or run_method
    cells = []
    for params in plan.cells():
        config = default_config(plan.method, **{**plan.fixed, **params})
        scores = []
        for k in range(plan.repetitions):
            outcome = runner(config.with_(seed=plan.base_seed + k), bench)
            scores.append(float(outcome.fitness))
        cells.append({"params": params, "scores": scores, "mean": float(np.mean(scores))})
    if not cells:
        raise EmptyGrid("sweep plan produced no cells")
    best = min(range(len(cells)), key=lambda i: cells[i]["mean"])
    params = cells[best]["params"]
    return SweepResult(plan, cells, params, default_config(plan.method, seed=plan.base_seed, **{**plan.fixed, **params}))


# --------------------------------------------------------------------------- repeated runs


@dataclass
class RunRecord:
    config: OptimizerConfig
    seed: int
    benchmark: str
    objective: ObjectiveVector
    fitness: float
    position: np.ndarray
    seconds: float
    evaluations: int = 0
    archive: ParetoArchive | None = None

    @property
    def method(self) -> str:
        return self.config.method

    def value(self, name: str) -> float:
        return self.fitness if name == "fitness" else float(getattr(self.objective, name))


def repeated_runs(config: OptimizerConfig, bench: BenchmarkSpec, count: int, base_seed: int = 0, runner=None) -> list:
    """Run ``config`` with seeds ``base_seed .. base_seed+count-1``.

    The deterministic LM baseline is run once and its record repeated, since
    every seed would reproduce it.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    runner = runner or run_method
    records = []
    for k in range(count):
        seed = base_seed + k
        if config.method == "lm" and records:
            records.append(_reseeded(records[0], seed))
            continue
        cfg = config.with_(seed=seed)
        start = time.perf_counter()
        out = runner(cfg, bench)
        elapsed = time.perf_counter() - start
        records.append(
            RunRecord(cfg, seed, bench.name, out.objective, float(out.fitness), np.asarray(out.position, dtype=float),
                      elapsed, out.evaluations, out.archive)
        )
    return records


def _reseeded(rec: RunRecord, seed: int) -> RunRecord:
    return RunRecord(rec.config.with_(seed=seed), seed, rec.benchmark, rec.objective, rec.fitness, rec.position,
                     0.0, 0, rec.archive)


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


@dataclass
class SummaryTable:
    """Per method and objective: mean and sample SD (N-1); SD is None for LM or a single run."""

    rows: dict

    @classmethod
    def from_records(cls, by_method: dict) -> "SummaryTable":
        rows = {}
        for method, records in by_method.items():
            entry = {"runs": len(records)}
            for name in SUMMARY_FIELDS:
                vals = np.array([r.value(name) for r in records], dtype=float)
                mean = float(vals.mean()) if np.all(np.isfinite(vals)) else math.inf
                sd = None
                if method != "lm" and vals.size > 1 and np.all(np.isfinite(vals)):
                    sd = float(vals.std(ddof=1))
                entry[name] = {"mean": _finite_or_none(mean), "sd": sd}
            rows[method] = entry
        return cls(rows)

    def to_dict(self) -> dict:
        return self.rows


def t_test_matrix(by_method: dict, objectives=SUMMARY_FIELDS) -> dict:
    """``out[obj][a][b]`` is the one-tailed Welch p for "a has the smaller mean than b".

    Entries are None where a sample has fewer than two values or contains a
    non-finite value.
    """
    out = {}
    methods = list(by_method)
    for name in objectives:
        table = {}
        for a in methods:
            row = {}
            xa = [r.value(name) for r in by_method[a]]
            for b in methods:
                if a == b:
                    continue
                xb = [r.value(name) for r in by_method[b]]
                if len(xa) < 2 or len(xb) < 2 or not (np.all(np.isfinite(xa)) and np.all(np.isfinite(xb))):
                    row[b] = None
                    continue
                row[b] = welch_t_test(xa, xb, LESS).p
            table[a] = row
        out[name] = table
    return out


# --------------------------------------------------------------------------- export


def timeseries_csv(traj: Trajectory) -> str:
    names = ["t"] + [str(s) for s in traj.state_names] + [str(u) for u in traj.input_names]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for t, x, u in zip(traj.times, traj.states, traj.inputs):
        writer.writerow([repr(float(t))] + [repr(float(v)) for v in x] + [repr(float(v)) for v in u])
    return buf.getvalue()


def runs_csv(by_method: dict, n: int, m: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = ["method", "seed", "fitness"] + list(OBJECTIVE_NAMES) + ["feasible", "seconds", "evaluations"]
    cols += [f"Q{i + 1}" for i in range(n)] + [f"R{j + 1}" for j in range(m)]
    writer.writerow(cols)
    for method, records in by_method.items():
        for r in records:
            o = r.objective
            writer.writerow(
                [method, r.seed, repr(r.fitness)] + [repr(float(v)) for v in o.values()]
                + [o.feasible, f"{r.seconds:.3f}", r.evaluations] + [repr(float(v)) for v in r.position]
            )
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def load_summary(path) -> dict:
    return json.loads(Path(path).read_text())


def strip_volatile(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k not in VOLATILE_KEYS}


def pareto_header(bench: BenchmarkSpec, config: OptimizerConfig) -> list:
    return [
        f"benchmark={bench.name}",
        f"method={config.method} seed={config.seed}",
        "config=" + json.dumps(_jsonable(config.to_dict()), sort_keys=True),
    ]


def export_results(
    out_dir,
    summary: dict,
    bench: BenchmarkSpec,
    archive: ParetoArchive | None = None,
    traj: Trajectory | None = None,
    config: OptimizerConfig | None = None,
    timestamp: str | None = None,
) -> dict:
    """Write pareto.csv, timeseries.csv and summary.json into ``out_dir``.

    Files whose source is not given are skipped. Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    if archive is not None:
        header = pareto_header(bench, config) if config is not None else [f"benchmark={bench.name}"]
        path = out / "pareto.csv"
        path.write_text(archive.to_csv(bench.model.n, bench.model.m, tail_label(bench), header))
        written["pareto"] = path
    if traj is not None:
        path = out / "timeseries.csv"
        path.write_text(timeseries_csv(traj))
        written["timeseries"] = path
    doc = dict(summary)
    doc["benchmark"] = bench.to_dict()
    doc["metric_definitions"] = metric_definitions(bench)
    doc["representative_rule"] = REPRESENTATIVE_RULE
    if timestamp is not None:
        doc["generated_at"] = timestamp
    path = out / "summary.json"
    write_json(path, doc)
    written["summary"] = path
    return written


def comparison_summary(by_method: dict, configs: dict, base_seed: int, runs: int) -> dict:
    """Summary document for a multi-method comparison."""
    any_cfg = next(iter(configs.values()))
    return {
        "command": "compare",
        "base_seed": base_seed,
        "runs": runs,
        "methods": list(by_method),
        "configs": {m: c.to_dict() for m, c in configs.items()},
        "eq17_mode": any_cfg.eq17_mode,
        "rise_sign": any_cfg.rise_sign,
        "phi": any_cfg.phi,
        "summary": SummaryTable.from_records(by_method).to_dict(),
        "t_tests": {"test": "Welch one-tailed, p for row mean < column mean", **t_test_matrix(by_method)},
        "per_run": {
            m: [
                {"seed": r.seed, "fitness": r.fitness, "objective": r.objective.to_dict(), "position": r.position}
                for r in recs
            ]
            for m, recs in by_method.items()
        },
    }


def fitness_of(obj: ObjectiveVector, config: OptimizerConfig) -> float:
    return scalarized_fitness(obj, config.phi, config.rise_sign)
