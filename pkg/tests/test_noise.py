import numpy as np
import pytest

from colorsa.lattice import build_lattice, syndrome
from colorsa.noise import (
    NoiseModel,
    sample_code_capacity,
    sample_phenomenological,
    space_time_syndrome,
)


def test_model_validation():
    with pytest.raises(ValueError):
        NoiseModel("amplitude", 0.1)
    with pytest.raises(ValueError):
        NoiseModel("bitflip", 1.5)
    with pytest.raises(ValueError):
        NoiseModel("bitflip", -0.1)


@pytest.mark.parametrize("kind", ["bitflip", "depolarizing"])
def test_zero_rate(kind, rng):
    lat = build_lattice(5)
    e = sample_code_capacity(NoiseModel(kind, 0.0), lat, rng)
    assert not e.x.any() and not e.z.any()


def test_bitflip_full_rate(rng):
    lat = build_lattice(5)
    e = sample_code_capacity(NoiseModel("bitflip", 1.0), lat, rng)
    assert e.x.all() and not e.z.any()


def test_wrong_kind(rng):
    lat = build_lattice(3)
    with pytest.raises(ValueError):
        sample_code_capacity(NoiseModel("phenomenological", 0.1), lat, rng)
    with pytest.raises(ValueError):
        sample_phenomenological(NoiseModel("bitflip", 0.1), lat, rng)


def test_bitflip_marginal():
    lat = build_lattice(3)
    r = np.random.default_rng(7)
    N = 100_000
    hits = sum(int(sample_code_capacity(NoiseModel("bitflip", 0.1), lat, r).x[0]) for _ in range(N))
    sigma = np.sqrt(0.1 * 0.9 / N)
    assert abs(hits / N - 0.1) <= 3 * sigma


def test_depolarizing_marginals():
    lat = build_lattice(7)
    r = np.random.default_rng(8)
    p, N = 0.3, 20_000
    xs = np.empty((N, lat.n), dtype=np.uint8)
    zs = np.empty_like(xs)
    for k in range(N):
        e = sample_code_capacity(NoiseModel("depolarizing", p), lat, r)
        xs[k], zs[k] = e.x, e.z
    M = N * lat.n
    for observed, expected in [(xs.mean(), 2 * p / 3), (zs.mean(), 2 * p / 3), ((xs & zs).mean(), p / 3)]:
        assert abs(observed - expected) <= 4 * np.sqrt(expected * (1 - expected) / M)


def test_reproducible():
    lat = build_lattice(5)
    a = sample_phenomenological(NoiseModel("phenomenological", 0.2), lat, np.random.default_rng(3))
    b = sample_phenomenological(NoiseModel("phenomenological", 0.2), lat, np.random.default_rng(3))
    assert np.array_equal(a.measured, b.measured)
    assert np.array_equal(a.truth.data, b.truth.data)


def test_phenomenological_zero_rate(rng):
    lat = build_lattice(5)
    syn = sample_phenomenological(NoiseModel("phenomenological", 0.0), lat, rng)
    assert syn.rounds == 5
    assert not syn.measured.any() and not syn.increments.any()


def test_final_round_perfect(rng):
    lat = build_lattice(5)
    for _ in range(50):
        syn = sample_phenomenological(NoiseModel("phenomenological", 0.5), lat, rng)
        assert not syn.truth.meas[-1].any()
        assert np.array_equal(syn.measured[-1], syndrome(lat, syn.truth.final))


def test_increments_prefix_xor(rng):
    lat = build_lattice(5)
    syn = sample_phenomenological(NoiseModel("phenomenological", 0.2), lat, rng)
    assert np.array_equal(np.bitwise_xor.accumulate(syn.increments, axis=0), syn.measured)


def test_increment_consistency(rng):
    lat = build_lattice(7)
    for _ in range(100):
        syn = sample_phenomenological(NoiseModel("phenomenological", 0.15), lat, rng)
        r = syn.truth.meas
        r_prev = np.vstack([np.zeros_like(r[:1]), r[:-1]])
        assert np.array_equal(syndrome(lat, syn.truth.data) ^ r ^ r_prev, syn.increments)


def test_injected_data_error():
    lat = build_lattice(5)
    d, n, F = 5, lat.n, lat.num_faces
    data = np.zeros((d, n), dtype=np.uint8)
    data[2, 6] = 1
    syn = space_time_syndrome(lat, data, np.zeros((d, F), dtype=np.uint8))
    expected = np.zeros((d, F), dtype=np.uint8)
    expected[2, list(lat.incidence[6])] = 1
    assert np.array_equal(syn.increments, expected)


def test_injected_measurement_error():
    lat = build_lattice(5)
    d, n, F = 5, lat.n, lat.num_faces
    meas = np.zeros((d, F), dtype=np.uint8)
    meas[1, 3] = 1
    syn = space_time_syndrome(lat, np.zeros((d, n), dtype=np.uint8), meas)
    expected = np.zeros((d, F), dtype=np.uint8)
    expected[1, 3] = expected[2, 3] = 1
    assert np.array_equal(syn.increments, expected)


def test_final_round_measurement_error_rejected():
    lat = build_lattice(3)
    meas = np.zeros((3, 3), dtype=np.uint8)
    meas[-1, 0] = 1
    with pytest.raises(ValueError):
        space_time_syndrome(lat, np.zeros((3, 7), dtype=np.uint8), meas)
