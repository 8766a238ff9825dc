"""Seeded Monte Carlo campaigns, timing profiles and annealing-parameter sweeps.

Every trial draws its randomness from a ``SeedSequence`` keyed by
(master seed, model, d, p, trial index). Results are therefore identical
whatever the number of workers or the order in which chunks finish.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .anneal import TABLE_SCHEDULES, AnnealSchedule
from .decoder import DEFAULT_EXACT_CAP, OracleInfeasible, decode, exact_spin_count, observe, score
from .lattice import build_lattice
from .noise import KINDS, NoiseModel, sample

WORKERS_ENV = "COLORSA_WORKERS"
CSV_SCHEMA = "colorsa.mc/1"
TUNE_SCHEMA = "colorsa.tune/1"
CSV_COLUMNS = (
    "model", "d", "p", "trials", "failures", "p_L", "stderr",
    "mean_time_s", "median_time_s", "K", "R", "method", "seed",
)
_MODEL_CODE = {k: i for i, k in enumerate(KINDS)}


def p_key(p: float) -> int:
    return int(round(float(p) * 1e9))


def trial_rng(seed: int, model: str, d: int, p: float, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_MODEL_CODE[model], d, p_key(p), trial))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_workers(hint: int | None = None) -> int:
    if hint is not None:
        return max(1, int(hint))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return 1


@dataclass
class ExperimentConfig:
    model: str
    distances: list[int]
    ps: list[float]
    trials: int = 10_000
    method: str = "sa"
    cycles: int | None = None
    iterations: int | None = None
    beta_min: float | None = None
    beta_max: float | None = None
    beta_convention: str = "cooling"
    order: str = "random"
    seed: int = 0
    out: str | None = None
    workers: int | None = None
    timing: bool = False
    cap: int = DEFAULT_EXACT_CAP

    def validate(self) -> None:
        if self.model not in KINDS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.distances or not self.ps:
            raise ValueError("need at least one distance and one p")
        for p in self.ps:
            NoiseModel(self.model, p)
        for d in self.distances:
            build_lattice(d)
        if self.method == "exact":
            for d in self.distances:
                need = exact_spin_count(self.model, build_lattice(d))
                if need > self.cap:
                    raise OracleInfeasible(
                        f"exact oracle infeasible for {self.model} d={d}: {need} spins per sector > cap {self.cap}"
                    )
        elif self.method == "sa":
            for d in self.distances:
                self.schedule_for(d)
        else:
            raise ValueError(f"method must be 'sa' or 'exact', got {self.method!r}")

    def schedule_for(self, d: int) -> AnnealSchedule | None:
        if self.method != "sa":
            return None
        K, R = TABLE_SCHEDULES.get(self.model, {}).get(d, (None, None))
        K = self.cycles if self.cycles is not None else K
        R = self.iterations if self.iterations is not None else R
        if K is None or R is None:
            raise KeyError(f"no built-in schedule for model={self.model} d={d}; set cycles and iterations")
        return AnnealSchedule(
            cycles=K, iterations=R, beta_min=self.beta_min, beta_max=self.beta_max,
            beta_convention=self.beta_convention, order=self.order,
        )

    def resolved(self) -> dict:
        out = asdict(self)
        out.pop("workers")
        out.pop("out")
        out["schedules"] = {
            str(d): (None if self.method != "sa" else [self.schedule_for(d).cycles, self.schedule_for(d).iterations])
            for d in self.distances
        }
        return out


@dataclass
class ExperimentRecord:
    model: str
    d: int
    p: float
    trials: int
    failures: int
    p_L: float
    stderr: float
    mean_time_s: float | None
    median_time_s: float | None
    K: int | None
    R: int | None
    method: str
    seed: int
    verified: int = field(default=0, compare=False)

    def __post_init__(self):
        if not 0 <= self.failures <= self.trials:
            raise ValueError("failures must lie in [0, trials]")

    @classmethod
    def from_counts(cls, model, d, p, trials, failures, times, K, R, method, seed, verified=0):
        p_L = failures / trials
        return cls(
            model=model, d=d, p=p, trials=trials, failures=failures, p_L=p_L,
            stderr=binomial_stderr(p_L, trials),
            mean_time_s=None if times is None else float(np.mean(times)),
            median_time_s=None if times is None else float(np.median(times)),
            K=K, R=R, method=method, seed=seed, verified=verified,
        )

    def row(self) -> list:
        return ["" if getattr(self, c) is None else getattr(self, c) for c in CSV_COLUMNS]


def binomial_stderr(p_L: float, trials: int) -> float:
    return math.sqrt(max(p_L * (1.0 - p_L), 0.0) / trials)


def _trial_chunk(model, d, p, method, schedule, seed, start, stop, cap, timing):
    """Decode trials [start, stop); returns (failures, decode times, verified)."""
    lat = build_lattice(d)
    noise = NoiseModel(model, p)
    failures = 0
    times = np.empty(stop - start) if timing else None
    for k, trial in enumerate(range(start, stop)):
        rng = trial_rng(seed, model, d, p, trial)
        truth = sample(noise, lat, rng)
        sa_seed = int(rng.integers(2**63))
        res = decode(lat, model, observe(lat, model, truth), method, schedule, sa_seed, cap)
        if not score(lat, model, truth, res):
            failures += 1
        if timing:
            times[k] = res.wall_time
    return failures, times, stop - start


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    if workers <= 1:
        return [(0, trials)]
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(a, min(a + size, trials)) for a in range(0, trials, size)]


class _Runner:
    """Maps chunk jobs in order, serially or over a process pool."""

    def __init__(self, workers: int):
        self.workers = workers
        self.pool = ProcessPoolExecutor(workers) if workers > 1 else None

    def map(self, fn, jobs):
        if self.pool is None:
            return [fn(*job) for job in jobs]
        futures = [self.pool.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _run_point(runner: _Runner, cfg: ExperimentConfig, d: int, p: float) -> ExperimentRecord:
    sched = cfg.schedule_for(d)
    jobs = [
        (cfg.model, d, p, cfg.method, sched, cfg.seed, a, b, cfg.cap, cfg.timing)
        for a, b in _chunks(cfg.trials, runner.workers)
    ]
    parts = runner.map(_trial_chunk, jobs)
    failures = sum(f for f, _, _ in parts)
    verified = sum(v for _, _, v in parts)
    times = np.concatenate([t for _, t, _ in parts]) if cfg.timing else None
    return ExperimentRecord.from_counts(
        cfg.model, d, p, cfg.trials, failures, times,
        None if sched is None else sched.cycles,
        None if sched is None else sched.iterations,
        cfg.method, cfg.seed, verified,
    )


def sidecar_path(out: str) -> str:
    return out + ".json"


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_campaign(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Run every (d, p) grid point; rows are appended to ``cfg.out`` as they finish."""
    cfg.validate()
    writer = fh = None
    if cfg.out:
        write_json(sidecar_path(cfg.out), {"schema": CSV_SCHEMA, "config": cfg.resolved()})
        fh = open(cfg.out, "w", newline="", encoding="utf-8")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        fh.flush()
    records = []
    try:
        with _Runner(resolve_workers(cfg.workers)) as runner:
            for d in cfg.distances:
                for p in cfg.ps:
                    rec = _run_point(runner, cfg, d, p)
                    records.append(rec)
                    if writer is not None:
                        writer.writerow(rec.row())
                        fh.flush()
                        os.fsync(fh.fileno())
    finally:
        if fh is not None:
            fh.close()
    return records


def read_records(path: str) -> list[ExperimentRecord]:
    def num(v, cast):
        return None if v == "" else cast(v)

    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out.append(
                ExperimentRecord(
                    model=row["model"], d=int(row["d"]), p=float(row["p"]),
                    trials=int(row["trials"]), failures=int(row["failures"]),
                    p_L=float(row["p_L"]), stderr=float(row["stderr"]),
                    mean_time_s=num(row["mean_time_s"], float), median_time_s=num(row["median_time_s"], float),
                    K=num(row["K"], int), R=num(row["R"], int), method=row["method"], seed=int(row["seed"]),
                )
            )
    return out


def timing_profile(cfg: ExperimentConfig) -> dict[tuple[int, float], np.ndarray]:
    """Decode wall times per (d, p), single core, sampling and scoring excluded."""
    cfg.validate()
    out = {}
    for d in cfg.distances:
        for p in cfg.ps:
            _, times, _ = _trial_chunk(
                cfg.model, d, p, cfg.method, cfg.schedule_for(d), cfg.seed, 0, cfg.trials, cfg.cap, True
            )
            out[(d, p)] = times
    return out


# ---------------------------------------------------------------- tuning


@dataclass
class TuningPoint:
    K: int
    R: int
    p_L_sa: float
    p_L_exact: float
    gap: float
    gap_stderr: float
    exact_stderr: float
    indicator: float
    work: int
    mean_time_s: float | None
    selected: bool = False


@dataclass
class TuningReport:
    model: str
    d: int
    p: float
    trials: int
    seed: int
    points: list[TuningPoint]

    @property
    def selected(self) -> TuningPoint | None:
        return next((pt for pt in self.points if pt.selected), None)

    def selection_label(self) -> str:
        pt = self.selected
        return "none" if pt is None else f"({pt.K}, {pt.R})"

    def curve(self, R: int) -> list[TuningPoint]:
        return sorted((pt for pt in self.points if pt.R == R), key=lambda pt: pt.K)

    def to_dict(self) -> dict:
        return {
            "schema": TUNE_SCHEMA,
            "model": self.model, "d": self.d, "p": self.p, "trials": self.trials, "seed": self.seed,
            "selected": None if self.selected is None else [self.selected.K, self.selected.R],
            "points": [asdict(pt) for pt in self.points],
        }

    def write_csv(self, path: str) -> None:
        cols = [f.name for f in fields(TuningPoint)]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model", "d", "p", "trials", "seed", *cols])
            for pt in self.points:
                vals = ["" if v is None else v for v in asdict(pt).values()]
                w.writerow([self.model, self.d, self.p, self.trials, self.seed, *vals])


def _tuning_chunk(model, d, p, grid, seed, start, stop, golden, cap, beta_kw, timing):
    lat = build_lattice(d)
    noise = NoiseModel(model, p)
    m = stop - start
    fail_sa = np.zeros((len(grid), m), dtype=np.uint8)
    fail_ex = np.zeros(m, dtype=np.uint8)
    times = np.zeros((len(grid), m))
    schedules = [AnnealSchedule(cycles=K, iterations=R, **beta_kw) for K, R in grid]
    for k, trial in enumerate(range(start, stop)):
        rng = trial_rng(seed, model, d, p, trial)
        truth = sample(noise, lat, rng)
        sa_seed = int(rng.integers(2**63))
        obs = observe(lat, model, truth)
        if golden is None:
            fail_ex[k] = not score(lat, model, truth, decode(lat, model, obs, "exact", cap=cap))
        for g, sched in enumerate(schedules):
            res = decode(lat, model, obs, "sa", sched, sa_seed)
            fail_sa[g, k] = not score(lat, model, truth, res)
            times[g, k] = res.wall_time
    return fail_sa, fail_ex, (times if timing else None)


def tuning_sweep(
    model: str,
    d: int,
    p: float,
    grid: list[tuple[int, int]],
    trials: int,
    seed: int = 0,
    golden_exact: float | None = None,
    cap: int = DEFAULT_EXACT_CAP,
    beta_min: float | None = None,
    beta_max: float | None = None,
    beta_convention: str = "cooling",
    order: str = "random",
    workers: int | None = None,
    timing: bool = False,
) -> TuningReport:
    """Paired SA-vs-exact comparison over a grid of (cycles, iterations).

    The selected point is the cheapest one, by spin-update count, whose SA
    logical error rate lies within one standard error above the exact rate.
    """
    if trials < 1 or not grid:
        raise ValueError("need trials >= 1 and a non-empty grid")
    lat = build_lattice(d)
    if golden_exact is None and exact_spin_count(model, lat) > cap:
        raise OracleInfeasible(f"exact baseline infeasible for {model} d={d}; supply a golden p_L")
    grid = [(int(K), int(R)) for K, R in grid]
    beta_kw = dict(beta_min=beta_min, beta_max=beta_max, beta_convention=beta_convention, order=order)
    with _Runner(resolve_workers(workers)) as runner:
        jobs = [
            (model, d, p, grid, seed, a, b, golden_exact, cap, beta_kw, timing)
            for a, b in _chunks(trials, runner.workers)
        ]
        parts = runner.map(_tuning_chunk, jobs)
    fail_sa = np.concatenate([fs for fs, _, _ in parts], axis=1).astype(np.float64)
    if golden_exact is None:
        fail_ex = np.concatenate([fe for _, fe, _ in parts]).astype(np.float64)
        p_ex = float(fail_ex.mean())
    else:
        fail_ex = None
        p_ex = float(golden_exact)
    ex_se = binomial_stderr(p_ex, trials)
    times = np.concatenate([t for _, _, t in parts], axis=1) if timing else None

    spins = exact_spin_count(model, lat) * (4 if model == "depolarizing" else 2)
    points = []
    for g, (K, R) in enumerate(grid):
        p_sa = float(fail_sa[g].mean())
        if fail_ex is not None:
            diff = fail_sa[g] - fail_ex
            gap_se = float(diff.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        else:
            gap_se = math.hypot(binomial_stderr(p_sa, trials), ex_se)
        points.append(
            TuningPoint(
                K=K, R=R, p_L_sa=p_sa, p_L_exact=p_ex, gap=p_sa - p_ex, gap_stderr=gap_se,
                exact_stderr=ex_se, indicator=low_p_indicator(p_sa, p_ex, d),
                work=K * R * spins, mean_time_s=None if times is None else float(times[g].mean()),
            )
        )
    ok = [pt for pt in points if pt.p_L_sa <= pt.p_L_exact + pt.exact_stderr]
    if ok:
        best = min(ok, key=lambda pt: (pt.work, pt.R, pt.K))
        best.selected = True
    return TuningReport(model=model, d=d, p=p, trials=trials, seed=seed, points=points)


def low_p_indicator(p_sa: float, p_exact: float, d: int) -> float:
    """``(p_L^SA / p_L^exact)^(2/(d+1))``.

    With ``p_L = c (p / p_th)^((d+1)/2)`` for both decoders this is roughly
    the ratio of thresholds, exact over SA; 1 means no loss from annealing.
    """
    if p_exact <= 0:
        return math.nan if p_sa <= 0 else math.inf
    return (p_sa / p_exact) ** (2.0 / (d + 1))
