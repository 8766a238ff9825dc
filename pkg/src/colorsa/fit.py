"""Finite-size-scaling threshold fits.

Model: ``p_L = A + B (p - p_th) d^(1/nu)``, weighted least squares with
weights ``1/stderr^2``. For fixed ``(p_th, 1/nu)`` the model is linear in
``(A, B)``. A coarse grid over ``(p_th, 1/nu)`` with ``(A, B)`` solved in
closed form gives the starting point; bounded trust-region least squares on
all four parameters polishes it, and a seeded parametric bootstrap gives errors.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import least_squares

from .experiment import ExperimentRecord


# physical range the refinement may explore
_P_BOUNDS = (1e-6, 0.5)
_INV_NU_BOUNDS = (0.05, 10.0)


@dataclass(frozen=True)
class FitResult:
    A: float
    B: float
    p_th: float
    nu: float
    se_A: float
    se_B: float
    se_p_th: float
    se_nu: float
    residual_norm: float
    points_used: int
    at_bound: bool = False

    def to_dict(self) -> dict:
        return {"schema": "colorsa.fit/1", **asdict(self)}

    def summary(self) -> str:
        return (
            f"p_th = {self.p_th:.5f} +/- {self.se_p_th:.5f}, nu = {self.nu:.3f} +/- {self.se_nu:.3f}, "
            f"A = {self.A:.4f}, B = {self.B:.4f} ({self.points_used} points, residual norm {self.residual_norm:.3g})"
            + (" [at search bound: data do not constrain the fit]" if self.at_bound else "")
        )


@dataclass(frozen=True)
class _Data:
    p: np.ndarray
    d: np.ndarray
    y: np.ndarray
    w: np.ndarray
    trials: np.ndarray


def _weights(y: np.ndarray, stderr: np.ndarray, trials: np.ndarray, failures: np.ndarray) -> np.ndarray:
    # a point with zero observed failures (or successes) gets a continuity-corrected error
    se = np.asarray(stderr, dtype=float).copy()
    zero = se <= 0
    if zero.any():
        q = (failures[zero] + 0.5) / (trials[zero] + 1.0)
        se[zero] = np.sqrt(q * (1 - q) / trials[zero])
    return 1.0 / se**2


def _solve(data: _Data, p_th, inv_nu):
    """Closed-form (A, B) and chi^2; broadcasts over arrays of (p_th, inv_nu)."""
    p_th = np.asarray(p_th, dtype=float)[..., None]
    inv_nu = np.asarray(inv_nu, dtype=float)[..., None]
    x = (data.p - p_th) * data.d ** inv_nu
    w, y = data.w, data.y
    sw = w.sum()
    swx = (w * x).sum(-1)
    swxx = (w * x * x).sum(-1)
    swy = (w * y).sum()
    swxy = (w * x * y).sum(-1)
    det = sw * swxx - swx**2
    with np.errstate(divide="ignore", invalid="ignore"):
        A = (swxx * swy - swx * swxy) / det
        B = (sw * swxy - swx * swy) / det
        resid = y - A[..., None] - B[..., None] * x
        chi2 = (w * resid**2).sum(-1)
    bad = ~(det > 1e-12 * sw * np.maximum(swxx, 1e-300))
    chi2 = np.where(bad, np.inf, chi2)
    return A, B, chi2


def _refine(data: _Data, start) -> np.ndarray:
    """Bounded least squares on all four parameters from a grid optimum."""
    A, B, _ = _solve(data, start[0], start[1])
    sw = np.sqrt(data.w)

    def resid(v):
        a, b, pt, inv = v
        return sw * (data.y - a - b * (data.p - pt) * data.d**inv)

    x0 = np.array([float(A), float(B), start[0], start[1]])
    lo = [-np.inf, -np.inf, _P_BOUNDS[0], _INV_NU_BOUNDS[0]]
    hi = [np.inf, np.inf, _P_BOUNDS[1], _INV_NU_BOUNDS[1]]
    res = least_squares(resid, x0, bounds=(lo, hi), method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    return res.x[2:]


def _grid_fit(data: _Data, window, p_step, inv_nu_grid) -> np.ndarray:
    p_grid = np.arange(window[0], window[1] + 0.5 * p_step, p_step)
    P, V = np.meshgrid(p_grid, inv_nu_grid, indexing="ij")
    chi2 = _solve(data, P, V)[2]
    if not np.isfinite(chi2).any():
        raise ValueError("degenerate design: no finite fit on the grid")
    k = np.unravel_index(np.argmin(chi2), chi2.shape)
    return np.array([P[k], V[k]])


def _select(records, window, min_distances, min_points):
    recs = list(records)
    if not recs:
        raise ValueError("no records to fit")
    models = {r.model for r in recs}
    if len(models) != 1:
        raise ValueError(f"records mix models {sorted(models)}")
    lo, hi = window if window is not None else (min(r.p for r in recs), max(r.p for r in recs))
    if not 0 < lo < hi < 0.5:
        raise ValueError(f"window must satisfy 0 < lo < hi < 0.5, got {(lo, hi)}")
    tol = 1e-12
    inside = [r for r in recs if lo - tol <= r.p <= hi + tol]
    per_d: dict[int, int] = {}
    for r in inside:
        per_d[r.d] = per_d.get(r.d, 0) + 1
    usable = sorted(d for d, c in per_d.items() if c >= min_points)
    if len(usable) < min_distances:
        raise ValueError(
            f"need >= {min_distances} distances with >= {min_points} points in the window, got {per_d}"
        )
    inside = sorted((r for r in inside if r.d in usable), key=lambda r: (r.d, r.p))
    return inside, (lo, hi)


def _data(records, failures=None) -> _Data:
    p = np.array([r.p for r in records], dtype=float)
    d = np.array([r.d for r in records], dtype=float)
    trials = np.array([r.trials for r in records], dtype=float)
    if failures is None:
        failures = np.array([r.failures for r in records], dtype=float)
        y = np.array([r.p_L for r in records], dtype=float)
        stderr = np.array([r.stderr for r in records], dtype=float)
    else:
        y = failures / trials
        stderr = np.sqrt(y * (1 - y) / trials)
    return _Data(p=p, d=d, y=y, w=_weights(y, stderr, trials, failures), trials=trials)


def fit_threshold(
    records: list[ExperimentRecord],
    window: tuple[float, float] | None = None,
    min_distances: int = 3,
    min_points: int = 3,
    n_boot: int = 200,
    seed: int = 0,
    p_step: float = 1e-4,
    inv_nu_range: tuple[float, float] = (0.3, 2.0),
    inv_nu_step: float = 0.01,
) -> FitResult:
    """Fit the threshold and exponent from records of a single noise model."""
    recs, window = _select(records, window, min_distances, min_points)
    data = _data(recs)
    inv_grid = np.arange(inv_nu_range[0], inv_nu_range[1] + 0.5 * inv_nu_step, inv_nu_step)
    start = _grid_fit(data, window, p_step, inv_grid)
    p_th, inv_nu = _refine(data, start)
    A, B, chi2 = (float(v) for v in _solve(data, p_th, inv_nu))
    if not math.isfinite(chi2):
        raise ValueError("degenerate design at the optimum")

    se = [math.nan] * 4
    if n_boot > 1:
        rng = np.random.default_rng(seed)
        trials = data.trials.astype(np.int64)
        boot = []
        for _ in range(n_boot):
            fails = rng.binomial(trials, np.clip(data.y, 0.0, 1.0)).astype(float)
            bdata = _data(recs, fails)
            bp, bv = _refine(bdata, np.array([p_th, inv_nu]))
            bA, bB, bchi = _solve(bdata, bp, bv)
            if np.isfinite(bchi) and bv > 0:
                boot.append((float(bA), float(bB), bp, 1.0 / bv))
        if len(boot) > 1:
            se = list(np.std(np.array(boot), axis=0, ddof=1))

    nu = 1.0 / inv_nu
    if not (0 < p_th < 0.5 and nu > 0):
        raise ValueError(f"fit left the physical range: p_th={p_th}, nu={nu}")
    return FitResult(
        A=A, B=B, p_th=float(p_th), nu=float(nu),
        se_A=float(se[0]), se_B=float(se[1]), se_p_th=float(se[2]), se_nu=float(se[3]),
        residual_norm=math.sqrt(chi2), points_used=len(recs),
        at_bound=bool(np.isclose(p_th, _P_BOUNDS).any() or np.isclose(inv_nu, _INV_NU_BOUNDS).any()),
    )


def synthetic_records(model, distances, ps, A, B, p_th, nu, trials=10_000, rng=None) -> list[ExperimentRecord]:
    """Records following the scaling form, exact or with binomial noise."""
    out = []
    for d in distances:
        for p in ps:
            mean = A + B * (p - p_th) * d ** (1.0 / nu)
            if not 0 < mean < 1:
                raise ValueError("scaling form leaves (0, 1); pick other parameters")
            if rng is None:
                p_L = mean
                failures = int(round(mean * trials))
            else:
                failures = int(rng.binomial(trials, mean))
                p_L = failures / trials
            out.append(
                ExperimentRecord(
                    model=model, d=d, p=p, trials=trials, failures=failures, p_L=p_L,
                    stderr=math.sqrt(p_L * (1 - p_L) / trials), mean_time_s=None, median_time_s=None,
                    K=None, R=None, method="synthetic", seed=0,
                )
            )
    return out
