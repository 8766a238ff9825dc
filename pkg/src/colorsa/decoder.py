"""Sector-wise minimum-distance decoding with SA or an exhaustive oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .anneal import AnnealOutcome, AnnealSchedule, anneal, as_seed, table_schedule
from .hamiltonian import (
    IsingProblem,
    build_bitflip,
    build_depolarizing,
    build_phenomenological,
    reconstruct_error,
)
from .kernels import exact_kernel
from .lattice import Lattice, logical_overlap_parity, syndrome
from .noise import NoiseModel, SampledError, SpaceTimeError, SpaceTimeSyndrome, space_time_syndrome

DEFAULT_EXACT_CAP = 26

SECTORS = {
    "bitflip": ((0,), (1,)),
    "phenomenological": ((0,), (1,)),
    "depolarizing": ((0, 0), (0, 1), (1, 0), (1, 1)),
}


class OracleInfeasible(RuntimeError):
    """The exhaustive oracle was asked to enumerate too many spins."""


class SyndromeMismatch(AssertionError):
    """A reconstructed error failed to reproduce the observed syndrome."""


def exact_minimize(problem: IsingProblem, cap: int = DEFAULT_EXACT_CAP) -> AnnealOutcome:
    """Global minimum by enumerating every spin configuration."""
    n = problem.num_spins
    if n > cap:
        raise OracleInfeasible(
            f"exact oracle needs 2^{n} configurations for {problem.model} d={problem.lattice.d}; cap is {cap} spins"
        )
    st = problem.structure
    cfg, e = exact_kernel(st.term_ptr, st.term_spins, problem.coeffs, st.spin_ptr, st.spin_terms)
    return AnnealOutcome(best_config=cfg, best_energy=float(e), energy_per_restart=(float(e),), sweeps_executed=0)


def exact_spin_count(model: str, lat: Lattice) -> int:
    if model == "bitflip":
        return lat.num_faces
    if model == "depolarizing":
        return 2 * lat.num_faces
    return lat.d * lat.num_faces + (lat.d - 1) * lat.n


@dataclass
class DecodeResult:
    sector: tuple[int, ...]
    energy: float
    recovery: SampledError | SpaceTimeError
    inferred_error_count: int
    wall_time: float
    config: np.ndarray
    sector_energies: tuple[float, ...]
    success: bool | None = None

    def to_dict(self, timing: bool = True) -> dict:
        rec = self.recovery
        if isinstance(rec, SampledError):
            recovery = {"x": np.flatnonzero(rec.x).tolist(), "z": np.flatnonzero(rec.z).tolist()}
        else:
            recovery = {
                "data": [np.flatnonzero(row).tolist() for row in rec.data],
                "meas": [np.flatnonzero(row).tolist() for row in rec.meas],
            }
        return {
            "sector": list(self.sector),
            "energy": self.energy,
            "sector_energies": list(self.sector_energies),
            "inferred_error_count": self.inferred_error_count,
            "recovery": recovery,
            "success": self.success,
            "wall_time": self.wall_time if timing else None,
        }


def _kind(model) -> str:
    return model.kind if isinstance(model, NoiseModel) else str(model)


def observe(lat: Lattice, model, sample):
    """What the decoder is allowed to see of a sampled error."""
    kind = _kind(model)
    if kind == "bitflip":
        return syndrome(lat, sample.x)
    if kind == "depolarizing":
        return syndrome(lat, sample.x), syndrome(lat, sample.z)
    if kind == "phenomenological":
        return sample.measured
    raise ValueError(f"unknown model {kind!r}")


def build_problem(lat: Lattice, model, observation, sector) -> IsingProblem:
    kind = _kind(model)
    if kind == "bitflip":
        return build_bitflip(lat, observation, *sector)
    if kind == "depolarizing":
        S_X, S_Z = observation
        return build_depolarizing(lat, S_X, S_Z, *sector)
    if kind == "phenomenological":
        return build_phenomenological(lat, observation, *sector)
    raise ValueError(f"unknown model {kind!r}")


def _check_observation(lat: Lattice, kind: str, observation):
    if kind == "bitflip":
        obs = np.asarray(observation, dtype=np.uint8)
        if obs.shape != (lat.num_faces,):
            raise ValueError(f"bitflip observation must be a length-{lat.num_faces} syndrome")
        return obs
    if kind == "depolarizing":
        if len(observation) != 2:
            raise ValueError("depolarizing observation must be a (S_X, S_Z) pair")
        pair = tuple(np.asarray(s, dtype=np.uint8) for s in observation)
        if any(s.shape != (lat.num_faces,) for s in pair):
            raise ValueError(f"each depolarizing syndrome must have length {lat.num_faces}")
        return pair
    if kind == "phenomenological":
        obs = observation.measured if isinstance(observation, SpaceTimeSyndrome) else np.asarray(observation, dtype=np.uint8)
        if obs.shape != (lat.d, lat.num_faces):
            raise ValueError(f"phenomenological observation must be ({lat.d}, {lat.num_faces}) measured bits")
        return obs
    raise ValueError(f"unknown model {kind!r}")


def _verify(lat: Lattice, kind: str, observation, recovery):
    if kind == "bitflip":
        ok = np.array_equal(syndrome(lat, recovery.x), observation)
    elif kind == "depolarizing":
        ok = np.array_equal(syndrome(lat, recovery.x), observation[0]) and np.array_equal(
            syndrome(lat, recovery.z), observation[1]
        )
    else:
        ok = np.array_equal(space_time_syndrome(lat, recovery.data, recovery.meas).measured, observation)
    if not ok:
        raise SyndromeMismatch("reconstructed error does not reproduce the observed syndrome")


def sector_seed(run_seed: int, index: int) -> int:
    return int(np.random.SeedSequence(run_seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def decode(
    lat: Lattice,
    model,
    observation,
    method: str = "sa",
    schedule: AnnealSchedule | None = None,
    rng=None,
    cap: int = DEFAULT_EXACT_CAP,
    check: bool = False,
) -> DecodeResult:
    """Minimize every logical sector and keep the lowest energy.

    Ties go to the earliest sector in ``SECTORS`` order, i.e. towards the
    all-zero sector. ``rng`` (Generator or int seed) is only used by SA.
    """
    kind = _kind(model)
    obs = _check_observation(lat, kind, observation)
    if method == "exact":
        n_spins = exact_spin_count(kind, lat)
        if n_spins > cap:
            raise OracleInfeasible(f"exact oracle needs {n_spins} spins per sector for {kind} d={lat.d}; cap is {cap}")
    elif method == "sa":
        if schedule is None:
            schedule = table_schedule(kind, lat.d)
        run_seed = as_seed(0 if rng is None else rng)
    else:
        raise ValueError(f"method must be 'sa' or 'exact', got {method!r}")

    start = time.perf_counter()
    best = None
    energies = []
    for idx, sector in enumerate(SECTORS[kind]):
        problem = build_problem(lat, kind, obs, sector)
        if method == "exact":
            out = exact_minimize(problem, cap)
        else:
            out = anneal(problem, schedule, sector_seed(run_seed, idx), check=check)
        energies.append(out.best_energy)
        if best is None or out.best_energy < best[1].best_energy - 1e-9:
            best = (problem, out)
    problem, out = best
    recovery = reconstruct_error(problem, out.best_config)
    wall = time.perf_counter() - start

    _verify(lat, kind, obs, recovery)
    count = problem.error_count(out.best_energy)
    return DecodeResult(
        sector=problem.sector,
        energy=out.best_energy,
        recovery=recovery,
        inferred_error_count=int(round(count)),
        wall_time=wall,
        config=out.best_config,
        sector_energies=tuple(energies),
    )


def score(lat: Lattice, model, truth, result: DecodeResult) -> bool:
    """True iff the residual error is a stabilizer (no logical flip)."""
    kind = _kind(model)
    rec = result.recovery
    if kind == "phenomenological":
        final = truth.truth.final if isinstance(truth, SpaceTimeSyndrome) else truth.final
        residuals = [final ^ rec.final]
    elif kind == "bitflip":
        residuals = [truth.x ^ rec.x]
    else:
        residuals = [truth.x ^ rec.x, truth.z ^ rec.z]
    ok = True
    for res in residuals:
        if syndrome(lat, res).any():
            raise SyndromeMismatch("residual error has a nonzero syndrome")
        ok = ok and logical_overlap_parity(lat, res) == 0
    result.success = bool(ok)
    return result.success
