import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorsa.lattice import build_lattice, logical_overlap_parity, pure_error, syndrome

DISTANCES = [3, 5, 7]


def gf2_rank(M):
    M = np.array(M, dtype=np.uint8) % 2
    rank = 0
    rows, cols = M.shape
    for c in range(cols):
        pivots = np.flatnonzero(M[rank:, c])
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        M[[rank, p]] = M[[p, rank]]
        others = np.flatnonzero(M[:, c])
        others = others[others != rank]
        M[others] ^= M[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def span(H):
    """All 2^F XOR combinations of the rows of H."""
    F, n = H.shape
    out = np.zeros((1 << F, n), dtype=np.uint8)
    for k in range(1, 1 << F):
        low = k & -k
        out[k] = out[k ^ low] ^ H[low.bit_length() - 1]
    return out


@pytest.mark.parametrize("d, n, faces", [(3, 7, 3), (5, 17, 8), (7, 31, 15)])
def test_sizes(d, n, faces):
    lat = build_lattice(d)
    assert (lat.n, lat.num_faces) == (n, faces)


@pytest.mark.parametrize("d", [3, 5, 7, 9, 11, 13, 15])
def test_size_formula(d):
    lat = build_lattice(d)
    assert lat.n == (d * d + 2 * d - 1) // 2
    assert lat.n - 2 * lat.num_faces == 1


@pytest.mark.parametrize("d", [3, 5, 7, 9, 11])
def test_structure_invariants(d):
    lat = build_lattice(d)
    H = lat.check
    assert lat.n - 2 * gf2_rank(H) == 1
    assert not (H.astype(int) @ H.T.astype(int) % 2).any()
    assert H.sum(axis=0).max() <= 3
    for f in lat.faces:
        assert len(f.qubits) in (4, 8) if f.color != "red" else len(f.qubits) == 4
        assert len(set(f.qubits)) == len(f.qubits)
        assert max(f.qubits) < lat.n
    assert {f.color for f in lat.faces} == {"red", "green", "blue"}
    for i, faces in enumerate(lat.incidence):
        assert all(H[f, i] for f in faces) and H[:, i].sum() == len(faces)


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_adjacent_faces_have_different_colors(d):
    lat = build_lattice(d)
    for a, b in itertools.combinations(lat.faces, 2):
        if set(a.qubits) & set(b.qubits):
            assert a.color != b.color


@pytest.mark.parametrize("d", DISTANCES)
def test_logical_operator(d):
    lat = build_lattice(d)
    L = lat.logical
    assert L.sum() == d
    assert not syndrome(lat, L).any()
    # odd self-overlap means L is not a product of stabilizers
    assert logical_overlap_parity(lat, L) == 1
    red = {q for f in lat.faces if f.color == "red" for q in f.qubits}
    assert not red & set(np.flatnonzero(L))


@pytest.mark.parametrize("d", DISTANCES)
def test_distance_by_enumeration(d):
    lat = build_lattice(d)
    coset = span(lat.check) ^ lat.logical
    assert coset.sum(axis=1).min() == d


@pytest.mark.parametrize("d", DISTANCES)
def test_pure_chains_flag_single_face(d):
    lat = build_lattice(d)
    eye = np.eye(lat.num_faces, dtype=np.uint8)
    for f in range(lat.num_faces):
        assert np.array_equal(syndrome(lat, lat.pure_chains[f]), eye[f])
        assert np.array_equal(pure_error(lat, eye[f]), lat.pure_chains[f])


def test_steane_geometry():
    lat = build_lattice(3)
    H = lat.check
    assert (H.sum(axis=1) == 4).all()
    # one qubit in all three faces, three in two, three in one
    assert sorted(H.sum(axis=0).tolist()) == [1, 1, 1, 2, 2, 2, 3]


@pytest.mark.parametrize("d", [4, 2, 1, 0, -3])
def test_rejects_bad_distance(d):
    with pytest.raises(ValueError):
        build_lattice(d)


def test_rejects_non_integer():
    with pytest.raises(TypeError):
        build_lattice(3.0)


def test_deterministic():
    a = build_lattice(7).to_dict()
    build_lattice.cache_clear()
    b = build_lattice(7).to_dict()
    assert a == b


def test_arrays_read_only():
    lat = build_lattice(3)
    with pytest.raises(ValueError):
        lat.check[0, 0] = 1


def test_syndrome_basics():
    lat = build_lattice(5)
    assert not syndrome(lat, np.zeros(lat.n, dtype=np.uint8)).any()
    for f in lat.faces:
        e = np.zeros(lat.n, dtype=np.uint8)
        e[list(f.qubits)] = 1
        assert not syndrome(lat, e).any()
        assert logical_overlap_parity(lat, e) == 0
    for i in range(lat.n):
        e = np.zeros(lat.n, dtype=np.uint8)
        e[i] = 1
        assert np.flatnonzero(syndrome(lat, e)).tolist() == list(lat.incidence[i])
    assert logical_overlap_parity(lat, np.zeros(lat.n, dtype=np.uint8)) == 0


def test_length_mismatch():
    lat = build_lattice(3)
    with pytest.raises(ValueError):
        syndrome(lat, np.zeros(6))
    with pytest.raises(ValueError):
        pure_error(lat, np.zeros(4))
    with pytest.raises(ValueError):
        logical_overlap_parity(lat, np.zeros(8))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(DISTANCES), st.integers(0, 2**32 - 1))
def test_pure_error_linear(d, seed):
    lat = build_lattice(d)
    r = np.random.default_rng(seed)
    s1, s2 = r.integers(0, 2, (2, lat.num_faces), dtype=np.uint8)
    assert np.array_equal(pure_error(lat, s1 ^ s2), pure_error(lat, s1) ^ pure_error(lat, s2))
    assert np.array_equal(syndrome(lat, pure_error(lat, s1)), s1)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(DISTANCES), st.integers(0, 2**32 - 1))
def test_stabilizers_invisible(d, seed):
    lat = build_lattice(d)
    r = np.random.default_rng(seed)
    e = r.integers(0, 2, lat.n, dtype=np.uint8)
    g = r.integers(0, 2, lat.num_faces, dtype=np.uint8)
    stab = (g.astype(int) @ lat.check) % 2
    assert np.array_equal(syndrome(lat, e ^ stab.astype(np.uint8)), syndrome(lat, e))


def test_decomposition_complete_d3():
    lat = build_lattice(3)
    reach = set()
    for bits in itertools.product((0, 1), repeat=lat.n):
        e = np.array(bits, dtype=np.uint8)
        t = pure_error(lat, syndrome(lat, e))
        found = False
        for g in itertools.product((0, 1), repeat=lat.num_faces):
            stab = (np.array(g) @ lat.check) % 2
            for l in (0, 1):
                if np.array_equal(e, (t ^ stab ^ (l * lat.logical)).astype(np.uint8)):
                    found = True
        assert found
        reach.add(bits)
    assert len(reach) == 2**lat.n


def test_to_dict_round_trip():
    lat = build_lattice(5)
    doc = lat.to_dict()
    assert doc["n"] == 17 and len(doc["faces"]) == 8
    assert len(doc["logical_support"]) == 5
    assert all(len(c) > 0 for c in doc["pure_chains"])
