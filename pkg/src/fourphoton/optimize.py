"""Angle optimization of the efficiency threshold and the (v, rho) surface."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .apparatus import BeamSplitter
from .bell import hardy_scan

CSV_HEADER = ("v", "rho", "eta_min", "a1", "a2", "b1", "b2", "feasible")
TIE_TOL = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    coarse_grid_step: float = 15.0
    polish_iterations: int = 4000
    polish_tolerance: float = 1e-10
    multistart_count: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.coarse_grid_step <= 15.0:
            raise ValueError(f"coarse_grid_step must lie in (0, 15] degrees, got {self.coarse_grid_step!r}")
        if not 0.0 < self.polish_tolerance <= 1e-8:
            raise ValueError(f"polish_tolerance must lie in (0, 1e-8], got {self.polish_tolerance!r}")
        if self.polish_iterations < 1:
            raise ValueError("polish_iterations must be positive")
        if self.multistart_count < 1:
            raise ValueError("multistart_count must be positive")
        if not 0 <= self.seed < 2**63:
            raise ValueError(f"seed must lie in [0, 2**63), got {self.seed!r}")


@dataclass(frozen=True)
class AngleOptimum:
    eta_min: float | None
    angles: tuple[float, float, float, float] | None  # radians, each in [0, pi)
    ch_margin: float | None  # B_CH / (eta^2 s) at eta = 1, i.e. C - S
    feasible: bool
    coarse_best: float


def _rho_of(bs: BeamSplitter | float) -> float:
    rho = bs.rho if isinstance(bs, BeamSplitter) else float(bs)
    if not rho > 0.0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    return rho


def _canonical(x) -> tuple[float, ...]:
    return tuple(float(t) for t in np.mod(x, math.pi))


def optimize_angles(
    bs: BeamSplitter | float,
    v: float,
    config: OptimizerConfig = OptimizerConfig(),
    phi: float = 0.0,
) -> AngleOptimum:
    """Smallest eta_min over (a1, a2, b1, b2) for the gated Bell pair.

    Coarse product grid, then simplex polish from the best grid points and
    from seeded random starts.  The probabilities are pi-periodic in every
    angle, so returned angles are reduced to [0, pi).
    """
    rho = _rho_of(bs)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v!r}")
    kappa = v * math.cos(phi)
    step = math.radians(config.coarse_grid_step)
    grid = np.arange(0.0, math.pi - 1e-12, step)
    eta = kernels.eta_grid(grid, rho, kappa)
    flat = eta.ravel()
    finite = np.flatnonzero(np.isfinite(flat))
    coarse_best = float(flat[finite].min()) if finite.size else math.inf

    n_grid = config.multistart_count // 2 if config.multistart_count > 1 else 1
    order = finite[np.argsort(flat[finite], kind="stable")][:n_grid]
    starts = [grid[np.array(np.unravel_index(i, eta.shape))] for i in order]
    rng = np.random.default_rng(config.seed)
    n_random = config.multistart_count - len(starts)
    starts += list(rng.uniform(0.0, math.pi, size=(n_random, 4)))

    tol = config.polish_tolerance
    best_f, best_x = math.inf, None
    for x0 in starts:
        x, f, _ = kernels.nelder_mead(np.asarray(x0, float), step / 2, rho, kappa, tol, tol, config.polish_iterations)
        # restart once from the converged point to shake off a collapsed simplex
        x, f, _ = kernels.nelder_mead(x, math.radians(1.0), rho, kappa, tol, tol, config.polish_iterations)
        cx = _canonical(x)
        f = kernels.eta_objective(cx, rho, kappa)
        if f < best_f - TIE_TOL or (abs(f - best_f) <= TIE_TOL and cx < best_x):
            best_f, best_x = f, cx

    C, S = kernels.ch_parts(best_x, rho, kappa)
    if not C > 0.0:
        return AngleOptimum(None, None, None, False, coarse_best)
    eta_min = S / C
    return AngleOptimum(
        eta_min=eta_min,
        angles=best_x,
        ch_margin=C - S,
        feasible=eta_min < 1.0 - 1e-12,
        coarse_best=coarse_best,
    )


@dataclass
class EfficiencySurface:
    """eta_min over a (v, rho) grid; rows follow v_axis, columns rho_axis.

    Undefined cells (no violation at any efficiency up to 1) hold NaN.
    Angles are stored in degrees.
    """

    v_axis: list[float]
    rho_axis: list[float]
    eta_min_grid: np.ndarray
    argmin_angles_grid: np.ndarray
    feasible_grid: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        shape = (len(self.v_axis), len(self.rho_axis))
        if self.eta_min_grid.shape != shape or self.argmin_angles_grid.shape != shape + (4,):
            raise ValueError("grid dimensions do not match the axes")
        if self.feasible_grid.shape != shape:
            raise ValueError("feasibility grid does not match the axes")
        if not self.diagnostics:
            self.diagnostics = monotonicity(self)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for i, v in enumerate(self.v_axis):
                for j, rho in enumerate(self.rho_axis):
                    ang = self.argmin_angles_grid[i, j]
                    w.writerow(
                        [_fmt(v), _fmt(rho), _fmt(self.eta_min_grid[i, j])]
                        + [_fmt(a) for a in ang]
                        + [int(bool(self.feasible_grid[i, j]))]
                    )

    @classmethod
    def read_csv(cls, path: str | Path) -> "EfficiencySurface":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if tuple(rows[0]) != CSV_HEADER:
            raise ValueError(f"unexpected header {rows[0]!r}")
        body = [[float(x) for x in r[:7]] + [int(r[7])] for r in rows[1:]]
        v_axis = sorted({r[0] for r in body})
        rho_axis = sorted({r[1] for r in body})
        if len(body) != len(v_axis) * len(rho_axis):
            raise ValueError("rows do not form a full grid")
        vi = {v: i for i, v in enumerate(v_axis)}
        ri = {r: j for j, r in enumerate(rho_axis)}
        eta = np.full((len(v_axis), len(rho_axis)), np.nan)
        ang = np.full(eta.shape + (4,), np.nan)
        feas = np.zeros(eta.shape, dtype=bool)
        for r in body:
            i, j = vi[r[0]], ri[r[1]]
            eta[i, j] = r[2]
            ang[i, j] = r[3:7]
            feas[i, j] = bool(r[7])
        return cls(v_axis, rho_axis, eta, ang, feas)


def _fmt(x: float) -> str:
    return "nan" if not np.isfinite(x) else f"{float(x):.12g}"


def _round12(x: float) -> float:
    return float(_fmt(x)) if np.isfinite(x) else math.nan


def monotonicity(surface: EfficiencySurface) -> dict:
    """Rows whose defined cells do not rise with rho (tolerance 1e-9)."""
    bad = []
    for i, v in enumerate(surface.v_axis):
        row = surface.eta_min_grid[i]
        vals = row[np.isfinite(row)]
        if np.any(np.diff(vals) < -1e-9):
            bad.append(v)
    return {"nondecreasing_in_rho": not bad, "violating_rows": bad}


def _cell(args):
    v, rho, config = args
    return optimize_angles(rho, v, config)


def build_surface(
    v_axis: Sequence[float],
    rho_axis: Sequence[float],
    config: OptimizerConfig = OptimizerConfig(),
    workers: int = 1,
) -> EfficiencySurface:
    """Cell-wise :func:`optimize_angles`; cells may run in parallel.

    Stored values are rounded to the 12 significant digits the CSV carries,
    so a written surface reads back identically.
    """
    v_axis = [float(v) for v in v_axis]
    rho_axis = [float(r) for r in rho_axis]
    if not v_axis or not rho_axis:
        raise ValueError("axes must be nonempty")
    for name, ax, lo_open in (("v", v_axis, False), ("rho", rho_axis, True)):
        if any(b <= a for a, b in zip(ax, ax[1:])):
            raise ValueError(f"{name} axis must be strictly ascending")
    if v_axis[0] < 0.0 or v_axis[-1] > 1.0:
        raise ValueError("v axis must lie in [0, 1]")
    if rho_axis[0] <= 0.0 or rho_axis[-1] > 1.0:
        raise ValueError("rho axis must lie in (0, 1]")

    jobs = [(v, r, config) for v in v_axis for r in rho_axis]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_cell, jobs))
    else:
        results = [_cell(j) for j in jobs]

    shape = (len(v_axis), len(rho_axis))
    eta = np.full(shape, np.nan)
    ang = np.full(shape + (4,), np.nan)
    feas = np.zeros(shape, dtype=bool)
    for k, res in enumerate(results):
        i, j = divmod(k, len(rho_axis))
        if res.eta_min is not None:
            ang[i, j] = [_round12(math.degrees(a)) for a in res.angles]
            feas[i, j] = res.feasible
            # no violation for any efficiency up to 1: the cell stays undefined
            if res.feasible:
                eta[i, j] = _round12(res.eta_min)
    return EfficiencySurface(v_axis, rho_axis, eta, ang, feas)


@dataclass(frozen=True)
class HardyOptimum:
    best_R: float
    hardy_probability: float
    angles: tuple[float, float, float, float] | None


def hardy_optimum(
    v: float = 1.0,
    config: OptimizerConfig = OptimizerConfig(),
    resolution: float = 0.5,
) -> HardyOptimum:
    """Reflectance in (0, 0.5] with the largest Hardy probability."""
    if v != 1.0:
        raise ValueError("Hardy's equalities need v = 1")

    def value(R: float) -> float:
        return hardy_scan(BeamSplitter.from_reflectance(R), v, resolution).hardy_probability

    Rs = np.linspace(0.01, 0.5, 50)
    vals = np.array([value(R) for R in Rs])
    k = int(np.argmax(vals))
    lo, hi = Rs[max(k - 1, 0)], Rs[min(k + 1, len(Rs) - 1)]
    res = minimize_scalar(lambda R: -value(R), bounds=(lo, hi), method="bounded",
                          options={"xatol": config.polish_tolerance})
    R, p = (float(res.x), -float(res.fun)) if -res.fun >= vals[k] else (float(Rs[k]), float(vals[k]))
    report = hardy_scan(BeamSplitter.from_reflectance(R), v, resolution)
    return HardyOptimum(best_R=R, hardy_probability=p, angles=report.optimal_angles)
