import math

import numpy as np
import pytest

from colorsa.anneal import (
    TABLE_SCHEDULES,
    AnnealSchedule,
    anneal,
    default_betas,
    energy_scales,
    restart_seeds,
    table_schedule,
)
from colorsa.decoder import exact_minimize
from colorsa.hamiltonian import IsingProblem, TermStructure, build_bitflip, build_depolarizing
from colorsa.lattice import build_lattice, syndrome
from colorsa.noise import NoiseModel, sample_code_capacity


def custom_problem(num_spins, terms, coeffs=None):
    structure = TermStructure.from_terms(num_spins, terms, len(terms))
    coeffs = np.ones(len(terms)) if coeffs is None else np.asarray(coeffs, dtype=float)
    return IsingProblem("custom", None, structure, coeffs, (), np.zeros(0))


def test_betas_three_terms_per_spin():
    # ring of pair terms plus a field on spin 0: spin 0 touches 3 terms
    prob = custom_problem(4, [[0, 1], [1, 2], [2, 3], [3, 0], [0]])
    assert energy_scales(prob) == (2.0, 6.0)
    assert default_betas(prob, "inverted") == pytest.approx((math.log(2) / 2, math.log(100) / 6))
    assert default_betas(prob) == pytest.approx((math.log(2) / 6, math.log(100) / 2))


def test_betas_single_term():
    prob = custom_problem(1, [[0]])
    assert energy_scales(prob) == (2.0, 2.0)


def test_betas_bitflip_d5():
    lat = build_lattice(5)
    prob = build_bitflip(lat, np.zeros(lat.num_faces), 0)
    per_spin = np.bincount([j for b in lat.incidence for j in b])
    assert energy_scales(prob)[1] == 2 * per_spin.max() == 16
    lo, hi = default_betas(prob)
    assert 0 < lo <= hi


def test_default_betas_always_cool():
    lat = build_lattice(7)
    prob = build_depolarizing(lat, np.zeros(lat.num_faces), np.zeros(lat.num_faces), 0, 0)
    lo, hi = default_betas(prob)
    assert lo < hi


def test_schedule_ladder():
    s = AnnealSchedule(cycles=5, iterations=1, beta_min=0.1, beta_max=10.0)
    b = s.betas()
    assert b[0] == pytest.approx(0.1) and b[-1] == pytest.approx(10.0)
    assert np.allclose(b[1:] / b[:-1], b[1] / b[0])
    assert AnnealSchedule(1, 1, 0.3, 2.0).betas().tolist() == [0.3]
    assert len(AnnealSchedule(4, 1, 0.3, 2.0, sweeps_per_cycle=3).betas()) == 12


@pytest.mark.parametrize("kw", [
    dict(cycles=0, iterations=1), dict(cycles=1, iterations=0),
    dict(cycles=1, iterations=1, beta_min=2.0, beta_max=1.0),
    dict(cycles=1, iterations=1, beta_min=-1.0), dict(cycles=1, iterations=1, beta_convention="x"),
    dict(cycles=1, iterations=1, order="spiral"),
])
def test_schedule_validation(kw):
    with pytest.raises(ValueError):
        AnnealSchedule(**kw)


def test_table_schedules():
    assert table_schedule("bitflip", 3).cycles == 30 and table_schedule("bitflip", 3).iterations == 5
    assert TABLE_SCHEDULES["depolarizing"][11] == (1200, 30)
    assert TABLE_SCHEDULES["phenomenological"][7] == (300, 40)
    with pytest.raises(KeyError):
        table_schedule("bitflip", 9)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_zero_syndrome_ground_state(d):
    lat = build_lattice(d)
    prob = build_bitflip(lat, np.zeros(lat.num_faces), 0)
    out = anneal(prob, AnnealSchedule(30, 1), 4)
    assert out.best_energy == -lat.n


def test_outcome_consistency(rng):
    lat = build_lattice(5)
    prob = build_depolarizing(lat, rng.integers(0, 2, 8), rng.integers(0, 2, 8), 0, 1)
    out = anneal(prob, AnnealSchedule(20, 6), 99, check=True)
    assert out.best_energy == prob.energy(out.best_config)
    assert out.best_energy == min(out.energy_per_restart)
    assert len(out.energy_per_restart) == 6
    assert out.sweeps_executed == 120


def test_deterministic(rng):
    lat = build_lattice(7)
    prob = build_bitflip(lat, rng.integers(0, 2, lat.num_faces), 1)
    a = anneal(prob, AnnealSchedule(10, 3), 2024)
    b = anneal(prob, AnnealSchedule(10, 3), 2024)
    assert np.array_equal(a.best_config, b.best_config)
    assert a.energy_per_restart == b.energy_per_restart


def test_generator_seed_accepted():
    lat = build_lattice(3)
    prob = build_bitflip(lat, np.array([1, 0, 0]), 0)
    a = anneal(prob, AnnealSchedule(10, 2), np.random.default_rng(1))
    b = anneal(prob, AnnealSchedule(10, 2), np.random.default_rng(1))
    assert a.energy_per_restart == b.energy_per_restart


def test_more_restarts_never_worse(rng):
    lat = build_lattice(7)
    for _ in range(10):
        prob = build_bitflip(lat, rng.integers(0, 2, lat.num_faces), 0)
        energies = [anneal(prob, AnnealSchedule(3, R), 17).best_energy for R in range(1, 9)]
        assert all(b <= a for a, b in zip(energies, energies[1:]))


def test_restart_seeds_prefix_stable():
    assert np.array_equal(restart_seeds(5, 8)[:3], restart_seeds(5, 3))


def test_never_below_exact(rng):
    lat = build_lattice(5)
    for _ in range(300):
        prob = build_bitflip(lat, rng.integers(0, 2, lat.num_faces), int(rng.integers(2)))
        sa = anneal(prob, AnnealSchedule(5, 2), int(rng.integers(1 << 30)), check=True)
        assert sa.best_energy >= exact_minimize(prob).best_energy


def test_matches_exact_d3_table_schedule():
    lat = build_lattice(3)
    r = np.random.default_rng(21)
    N = 10_000
    agree = 0
    for k in range(N):
        S = syndrome(lat, sample_code_capacity(NoiseModel("bitflip", 0.1), lat, r).x)
        prob = build_bitflip(lat, S, int(r.integers(2)))
        sa = anneal(prob, table_schedule("bitflip", 3), k)
        agree += sa.best_energy == exact_minimize(prob).best_energy
    assert agree / N >= 0.99


def test_full_recompute_check_multibody(rng):
    lat = build_lattice(5)
    from colorsa.hamiltonian import build_phenomenological

    syn = rng.integers(0, 2, (5, lat.num_faces)).astype(np.uint8)
    syn[-1] = syndrome(lat, rng.integers(0, 2, lat.n).astype(np.uint8))
    prob = build_phenomenological(lat, syn, 1)
    out = anneal(prob, AnnealSchedule(20, 2), 3, check=True)
    assert out.best_energy == prob.energy(out.best_config)


def test_sequential_order_available(rng):
    lat = build_lattice(5)
    prob = build_bitflip(lat, rng.integers(0, 2, lat.num_faces), 0)
    out = anneal(prob, AnnealSchedule(20, 3, order="sequential"), 8, check=True)
    assert out.best_energy >= exact_minimize(prob).best_energy


def test_restarts_independent_of_count():
    # each restart depends only on (seed, index)
    lat = build_lattice(5)
    prob = build_bitflip(lat, np.array([1, 0, 1, 1, 0, 0, 1, 0]), 1)
    a = anneal(prob, AnnealSchedule(7, 2), 31).energy_per_restart
    b = anneal(prob, AnnealSchedule(7, 5), 31).energy_per_restart
    assert b[:2] == a
