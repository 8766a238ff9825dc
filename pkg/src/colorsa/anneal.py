"""Simulated annealing for sparse multi-body Ising problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .hamiltonian import IsingProblem
from .kernels import anneal_kernel

# (cycles K, iterations R) keyed by model and distance.
TABLE_SCHEDULES: dict[str, dict[int, tuple[int, int]]] = {
    "bitflip": {3: (30, 5), 5: (70, 5), 7: (50, 10), 11: (100, 20), 15: (450, 20)},
    "depolarizing": {3: (150, 5), 5: (100, 10), 7: (200, 20), 11: (1200, 30)},
    "phenomenological": {3: (150, 5), 5: (100, 20), 7: (300, 40)},
}

BETA_CONVENTIONS = ("cooling", "inverted")
SWEEP_ORDERS = ("random", "sequential")


@dataclass(frozen=True)
class AnnealSchedule:
    """Exponential cooling schedule.

    ``beta_min``/``beta_max`` left as ``None`` are filled per problem by
    :func:`default_betas`. ``order`` is the spin visiting order within a
    sweep: a seeded random permutation per sweep, or plain index order.
    """

    cycles: int
    iterations: int
    beta_min: float | None = None
    beta_max: float | None = None
    sweeps_per_cycle: int = 1
    beta_convention: str = "cooling"
    order: str = "random"

    def __post_init__(self):
        if int(self.cycles) < 1 or int(self.iterations) < 1 or int(self.sweeps_per_cycle) < 1:
            raise ValueError("cycles, iterations and sweeps_per_cycle must be >= 1")
        if self.beta_convention not in BETA_CONVENTIONS:
            raise ValueError(f"beta_convention must be one of {BETA_CONVENTIONS}")
        if self.order not in SWEEP_ORDERS:
            raise ValueError(f"order must be one of {SWEEP_ORDERS}")
        for b in (self.beta_min, self.beta_max):
            if b is not None and not b > 0:
                raise ValueError("inverse temperatures must be positive")
        if self.beta_min is not None and self.beta_max is not None and self.beta_min > self.beta_max:
            raise ValueError("beta_min must not exceed beta_max")

    def resolve(self, problem: IsingProblem) -> "AnnealSchedule":
        if self.beta_min is not None and self.beta_max is not None:
            return self
        lo, hi = default_betas(problem, self.beta_convention)
        lo = self.beta_min if self.beta_min is not None else lo
        hi = self.beta_max if self.beta_max is not None else hi
        return replace(self, beta_min=lo, beta_max=hi)

    def betas(self) -> np.ndarray:
        if self.beta_min is None or self.beta_max is None:
            raise ValueError("schedule has unresolved inverse temperatures")
        if self.cycles == 1:
            ladder = np.array([self.beta_min])
        else:
            k = np.arange(self.cycles) / (self.cycles - 1)
            ladder = self.beta_min * (self.beta_max / self.beta_min) ** k
        return np.repeat(ladder, self.sweeps_per_cycle)


def table_schedule(model: str, d: int, **overrides) -> AnnealSchedule:
    try:
        K, R = TABLE_SCHEDULES[model][d]
    except KeyError:
        raise KeyError(f"no built-in schedule for model={model} d={d}; give cycles and iterations") from None
    return AnnealSchedule(cycles=K, iterations=R, **overrides)


@dataclass(frozen=True)
class AnnealOutcome:
    best_config: np.ndarray
    best_energy: float
    energy_per_restart: tuple[float, ...]
    sweeps_executed: int


def energy_scales(problem: IsingProblem) -> tuple[float, float]:
    """(smallest, largest) single-flip energy change magnitude."""
    st = problem.structure
    if st.num_terms == 0 or st.num_spins == 0:
        raise ValueError("empty problem")
    absc = np.abs(problem.coeffs)
    nz = absc[absc > 0]
    if nz.size == 0:
        raise ValueError("problem has no nonzero coefficients")
    per_spin = np.bincount(st.term_spins, weights=np.repeat(absc, st.arities()), minlength=st.num_spins)
    return 2.0 * float(nz.min()), 2.0 * float(per_spin.max())


def default_betas(problem: IsingProblem, convention: str = "cooling") -> tuple[float, float]:
    """Initial and final inverse temperatures.

    ``cooling`` (default) makes the largest possible flip acceptable with
    probability 1/2 at the start and the smallest one with probability 1/100
    at the end: ``(ln 2 / dE_max, ln 100 / dE_min)``. ``inverted`` returns
    ``(ln 2 / dE_min, ln 100 / dE_max)``, which heats rather than cools once a
    spin touches more than about three unit terms.
    """
    de_min, de_max = energy_scales(problem)
    if convention == "cooling":
        return math.log(2) / de_max, math.log(100) / de_min
    if convention == "inverted":
        return math.log(2) / de_min, math.log(100) / de_max
    raise ValueError(f"unknown convention {convention!r}")


def restart_seeds(seed: int, count: int) -> np.ndarray:
    """One uint32 seed per restart, derived from (run seed, restart index)."""
    return np.array(
        [np.random.SeedSequence(seed, spawn_key=(r,)).generate_state(1)[0] for r in range(count)],
        dtype=np.uint32,
    )


def as_seed(rng) -> int:
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(2**63))
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return int(rng)
    raise TypeError("rng must be a numpy Generator or an integer seed")


def anneal(problem: IsingProblem, schedule: AnnealSchedule, rng, check: bool = False) -> AnnealOutcome:
    """Best configuration over ``schedule.iterations`` independent restarts."""
    sched = schedule.resolve(problem)
    st = problem.structure
    seeds = restart_seeds(as_seed(rng), sched.iterations)
    cfgs, energies = anneal_kernel(
        st.term_ptr, st.term_spins, problem.coeffs, st.spin_ptr, st.spin_terms,
        sched.betas(), seeds, sched.order == "random", check,
    )
    best = int(np.argmin(energies))
    return AnnealOutcome(
        best_config=cfgs[best].copy(),
        best_energy=float(energies[best]),
        energy_per_restart=tuple(float(e) for e in energies),
        sweeps_executed=sched.cycles * sched.sweeps_per_cycle * sched.iterations,
    )
