"""Error sampling for the bit-flip, depolarizing and phenomenological models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Lattice, syndrome

KINDS = ("bitflip", "depolarizing", "phenomenological")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise model {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= float(self.p) <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class SampledError:
    """Code-capacity error. ``x[i] = z[i] = 1`` is a Y error on qubit ``i``."""

    x: np.ndarray
    z: np.ndarray

    def count(self) -> int:
        return int(np.count_nonzero(self.x | self.z))


@dataclass(frozen=True)
class SpaceTimeError:
    """Per-round data errors ``x[t-1]`` and measurement errors ``r[t-1]``, t = 1..d."""

    data: np.ndarray
    meas: np.ndarray

    @property
    def final(self) -> np.ndarray:
        """Cumulative data error after the last round."""
        return (np.bitwise_xor.reduce(self.data, axis=0)).astype(np.uint8)

    def count(self) -> int:
        return int(self.data.sum() + self.meas.sum())


@dataclass(frozen=True)
class SpaceTimeSyndrome:
    """Measured syndromes over ``rounds`` rounds, plus the hidden truth.

    Decoders only look at ``measured`` (or ``increments``). ``truth`` keeps the
    per-round data and measurement errors for scoring.
    """

    measured: np.ndarray
    truth: SpaceTimeError | None = None

    @property
    def rounds(self) -> int:
        return self.measured.shape[0]

    @property
    def increments(self) -> np.ndarray:
        prev = np.vstack([np.zeros_like(self.measured[:1]), self.measured[:-1]])
        return self.measured ^ prev

    @property
    def cumulative(self) -> np.ndarray:
        if self.truth is None:
            raise ValueError("no truth retained")
        return np.bitwise_xor.accumulate(self.truth.data, axis=0)


def sample_code_capacity(model: NoiseModel, lat: Lattice, rng: np.random.Generator) -> SampledError:
    n = lat.n
    if model.kind == "bitflip":
        x = (rng.random(n) < model.p).astype(np.uint8)
        return SampledError(x=x, z=np.zeros(n, dtype=np.uint8))
    if model.kind == "depolarizing":
        u = rng.random(n)
        third = model.p / 3.0
        # [0, p/3) -> X, [p/3, 2p/3) -> Y, [2p/3, p) -> Z
        x = (u < 2 * third).astype(np.uint8)
        z = ((u >= third) & (u < model.p)).astype(np.uint8)
        return SampledError(x=x, z=z)
    raise ValueError(f"{model.kind} is not a code-capacity model")


def space_time_syndrome(lat: Lattice, data, meas) -> SpaceTimeSyndrome:
    """Measured syndromes for given per-round data and measurement errors.

    ``data`` has shape (d, n), ``meas`` has shape (d, F) with a zero last row.
    """
    data = np.asarray(data, dtype=np.uint8)
    meas = np.asarray(meas, dtype=np.uint8)
    if data.ndim != 2 or data.shape[1] != lat.n or meas.shape != (data.shape[0], lat.num_faces):
        raise ValueError("data must be (rounds, n) and meas (rounds, faces)")
    if meas[-1].any():
        raise ValueError("the final round is measured perfectly")
    w = np.bitwise_xor.accumulate(data, axis=0)
    measured = syndrome(lat, w) ^ meas
    return SpaceTimeSyndrome(measured=measured, truth=SpaceTimeError(data=data, meas=meas))


def sample_phenomenological(model: NoiseModel, lat: Lattice, rng: np.random.Generator) -> SpaceTimeSyndrome:
    if model.kind != "phenomenological":
        raise ValueError(f"{model.kind} is not the phenomenological model")
    d = lat.d
    data = (rng.random((d, lat.n)) < model.p).astype(np.uint8)
    meas = (rng.random((d, lat.num_faces)) < model.p).astype(np.uint8)
    meas[-1] = 0
    return space_time_syndrome(lat, data, meas)


def sample(model: NoiseModel, lat: Lattice, rng: np.random.Generator):
    if model.kind == "phenomenological":
        return sample_phenomenological(model, lat, rng)
    return sample_code_capacity(model, lat, rng)
