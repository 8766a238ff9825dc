"""Decoding Hamiltonians: syndrome + logical sector -> multi-body Ising problem.

Every error consistent with a syndrome is written as a fixed pure error, a
product of stabilizer generators (one spin per generator) and, optionally,
the logical operator. The number of errors is then linear in the energy

    H(sigma) = -sum_k c_k prod_{j in term k} sigma_j

so minimizing ``H`` within a sector minimizes the error weight with no
penalty terms.

Term structure depends only on the lattice and the noise model, so it is
built once and cached; a problem instance only carries its coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import Lattice, build_lattice, pure_error
from .noise import SampledError, SpaceTimeError, SpaceTimeSyndrome


@dataclass(frozen=True, eq=False)
class TermStructure:
    """CSR layout of term spin lists and of the terms incident to each spin."""

    num_spins: int
    term_ptr: np.ndarray
    term_spins: np.ndarray
    spin_ptr: np.ndarray
    spin_terms: np.ndarray
    offset_count: int

    @property
    def num_terms(self) -> int:
        return len(self.term_ptr) - 1

    def arities(self) -> np.ndarray:
        return np.diff(self.term_ptr)

    @classmethod
    def from_terms(cls, num_spins: int, terms: list[list[int]], offset_count: int) -> "TermStructure":
        lengths = np.array([len(t) for t in terms], dtype=np.int64)
        if (lengths == 0).any():
            raise ValueError("empty term")
        term_ptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        term_spins = np.concatenate([np.asarray(sorted(t), dtype=np.int32) for t in terms])
        for t in terms:
            if len(set(t)) != len(t):
                raise ValueError("repeated spin inside a term")
        if term_spins.min() < 0 or term_spins.max() >= num_spins:
            raise ValueError("spin index out of range")
        owner = np.repeat(np.arange(len(terms), dtype=np.int32), lengths)
        order = np.argsort(term_spins, kind="stable")
        spin_terms = owner[order].astype(np.int32)
        counts = np.bincount(term_spins, minlength=num_spins)
        spin_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        for arr in (term_ptr, term_spins, spin_ptr, spin_terms):
            arr.setflags(write=False)
        return cls(num_spins, term_ptr, term_spins, spin_ptr, spin_terms, int(offset_count))


@lru_cache(maxsize=None)
def term_structure(model: str, d: int) -> TermStructure:
    lat = build_lattice(d)
    n, nf = lat.n, lat.num_faces
    B = [list(b) for b in lat.incidence]
    if model == "bitflip":
        return TermStructure.from_terms(nf, B, n)
    if model == "depolarizing":
        xs = B
        zs = [[nf + j for j in b] for b in B]
        ys = [a + b for a, b in zip(xs, zs)]
        return TermStructure.from_terms(2 * nf, xs + zs + ys, 3 * n)
    if model == "phenomenological":
        def space(t, j):
            return (t - 1) * nf + j

        def time(t, i):
            return d * nf + (t - 1) * n + i

        terms = []
        for t in range(1, d + 1):
            for i in range(n):
                term = [space(t, j) for j in B[i]]
                if t <= d - 1:
                    term.append(time(t, i))
                if t >= 2:
                    term.append(time(t - 1, i))
                terms.append(term)
        for t in range(1, d):
            for face in lat.faces:
                terms.append([time(t, i) for i in face.qubits])
        num_spins = d * nf + (d - 1) * n
        return TermStructure.from_terms(num_spins, terms, n * d + nf * (d - 1))
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """One sector of a decoding Hamiltonian.

    ``pure`` holds the pure-error bits the coefficients were built from:
    shape (n,) for bit-flip, (2, n) for depolarizing (X row, Z row) and
    (d, n) for phenomenological (one row per round).
    """

    model: str
    lattice: Lattice
    structure: TermStructure
    coeffs: np.ndarray
    sector: tuple[int, ...]
    pure: np.ndarray

    @property
    def num_spins(self) -> int:
        return self.structure.num_spins

    @property
    def offset_count(self) -> int:
        return self.structure.offset_count

    @property
    def terms(self) -> list[tuple[int, tuple[int, ...]]]:
        ptr, spins = self.structure.term_ptr, self.structure.term_spins
        return [
            (int(self.coeffs[k]), tuple(spins[ptr[k]:ptr[k + 1]].tolist()))
            for k in range(self.structure.num_terms)
        ]

    def energy(self, sigma) -> float | np.ndarray:
        """``H(sigma)``; accepts one configuration or a batch (rows)."""
        s = np.asarray(sigma, dtype=np.int8)
        if s.shape[-1] != self.num_spins:
            raise ValueError(f"expected {self.num_spins} spins, got shape {s.shape}")
        gathered = s[..., self.structure.term_spins].astype(np.int64)
        prods = np.multiply.reduceat(gathered, self.structure.term_ptr[:-1], axis=-1)
        e = -(prods * self.coeffs).sum(axis=-1)
        return float(e) if np.ndim(e) == 0 else e

    def error_count(self, energy) -> float:
        """Error count implied by an energy via the model's linear identity."""
        if self.model == "depolarizing":
            return (self.offset_count + energy) / 4.0
        return (self.offset_count + energy) / 2.0

    def to_dict(self) -> dict:
        return {
            "schema": "colorsa.ising/1",
            "model": self.model,
            "num_spins": self.num_spins,
            "offset_count": self.offset_count,
            "sector": list(self.sector),
            "terms": [[c, list(t)] for c, t in self.terms],
        }


def _bit(v, name: str) -> int:
    if v not in (0, 1):
        raise ValueError(f"{name} must be 0 or 1, got {v!r}")
    return int(v)


def _syn(lat: Lattice, S, name: str) -> np.ndarray:
    s = np.asarray(S, dtype=np.uint8)
    if s.shape != (lat.num_faces,):
        raise ValueError(f"{name} must have length {lat.num_faces}, got shape {s.shape}")
    return s


def _signs(bits: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * bits.astype(np.float64)


def build_bitflip(lat: Lattice, S, l: int) -> IsingProblem:
    l = _bit(l, "l")
    t = pure_error(lat, _syn(lat, S, "syndrome"))
    coeffs = _signs(t) * _signs(lat.logical * l)
    return IsingProblem("bitflip", lat, term_structure("bitflip", lat.d), coeffs, (l,), t)


def build_depolarizing(lat: Lattice, S_X, S_Z, l_X: int, l_Z: int) -> IsingProblem:
    l_X, l_Z = _bit(l_X, "l_X"), _bit(l_Z, "l_Z")
    tx = pure_error(lat, _syn(lat, S_X, "S_X"))
    tz = pure_error(lat, _syn(lat, S_Z, "S_Z"))
    jx = _signs(tx) * _signs(lat.logical * l_X)
    jz = _signs(tz) * _signs(lat.logical * l_Z)
    coeffs = np.concatenate([jx, jz, jx * jz])
    return IsingProblem(
        "depolarizing", lat, term_structure("depolarizing", lat.d), coeffs, (l_X, l_Z), np.stack([tx, tz])
    )


def build_phenomenological(lat: Lattice, syn, l: int) -> IsingProblem:
    """``syn`` is a SpaceTimeSyndrome or a (d, F) array of measured bits."""
    l = _bit(l, "l")
    measured = syn.measured if isinstance(syn, SpaceTimeSyndrome) else np.asarray(syn, dtype=np.uint8)
    if measured.shape != (lat.d, lat.num_faces):
        raise ValueError(f"expected {lat.d} rounds of {lat.num_faces} bits, got shape {measured.shape}")
    inc = measured ^ np.vstack([np.zeros_like(measured[:1]), measured[:-1]])
    tbar = pure_error(lat, inc)
    data = _signs(tbar)
    data[-1] *= _signs(lat.logical * l)
    nmeas = lat.num_faces * (lat.d - 1)
    coeffs = np.concatenate([data.ravel(), np.ones(nmeas)])
    return IsingProblem(
        "phenomenological", lat, term_structure("phenomenological", lat.d), coeffs, (l,), tbar
    )


def _flip_bits(sigma: np.ndarray) -> np.ndarray:
    return (np.asarray(sigma) < 0).astype(np.int64)


def reconstruct_error(problem: IsingProblem, sigma):
    """Physical error implied by a spin configuration (binary XOR form)."""
    sigma = np.asarray(sigma)
    if sigma.shape != (problem.num_spins,):
        raise ValueError(f"expected {problem.num_spins} spins, got shape {sigma.shape}")
    lat = problem.lattice
    H = lat.check.astype(np.int64)
    L = lat.logical.astype(np.int64)
    g = _flip_bits(sigma)
    nf = lat.num_faces

    if problem.model == "bitflip":
        (l,) = problem.sector
        x = (problem.pure + g @ H + l * L) & 1
        return SampledError(x=x.astype(np.uint8), z=np.zeros(lat.n, dtype=np.uint8))

    if problem.model == "depolarizing":
        l_X, l_Z = problem.sector
        x = (problem.pure[0] + g[:nf] @ H + l_X * L) & 1
        z = (problem.pure[1] + g[nf:] @ H + l_Z * L) & 1
        return SampledError(x=x.astype(np.uint8), z=z.astype(np.uint8))

    if problem.model == "phenomenological":
        (l,) = problem.sector
        d, n = lat.d, lat.n
        gspace = g[: d * nf].reshape(d, nf)
        gtime = np.zeros((d + 1, n), dtype=np.int64)
        gtime[1:d] = g[d * nf:].reshape(d - 1, n)
        data = problem.pure + gspace @ H + gtime[1:] + gtime[:-1]
        data[-1] += l * L
        meas = gtime[1:] @ H.T
        return SpaceTimeError(data=(data & 1).astype(np.uint8), meas=(meas & 1).astype(np.uint8))

    raise ValueError(f"unknown model {problem.model!r}")
