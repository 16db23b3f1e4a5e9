"""Clauser-Horne statistic, efficiency thresholds, intruder correction and Hardy scan."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import analytic, oracle
from .apparatus import AnalyzerSettings, BeamSplitter, InterferenceModel
from .oracle import D1, D1S, D1SP, D2, D2S, D2SP, Kind

GATE_TOL = 1e-9
INTRUDER_ANGLE_NOTE = "intruders attached to the singles settings: P20 at a2, P02 at b1"
TERM_NAMES = ("+P(a1,b1)", "-P(a1,b2)", "+P(a2,b2)", "+P(a2,b1)", "-P(a2)", "-P(b1)")


def _check_gating(settings: AnalyzerSettings) -> None:
    def off(angle: float, target: float) -> float:
        d = (angle - target) % math.pi
        return min(d, math.pi - d)

    if off(settings.alpha, math.pi / 2) > GATE_TOL or off(settings.beta, 0.0) > GATE_TOL:
        raise ValueError("closed forms assume the gating configuration alpha=90 deg, beta=0 deg")


@dataclass(frozen=True)
class CHReport:
    terms: dict[str, float]
    B_CH: float
    violated: bool
    eta_min: float | None
    corrected_B: float
    corrected_violated: bool
    intruders: dict[str, float] = field(default_factory=dict)
    note: str = INTRUDER_ANGLE_NOTE


def ch_coefficients(settings: AnalyzerSettings, bs: BeamSplitter, v: float, phi: float = 0.0):
    """(C, S) with B_CH(eta) = eta^2 C - eta S."""
    im = InterferenceModel.with_visibility(v, phi)
    a1, a2, b1, b2 = settings.bell_angles
    p = lambda a, b: float(analytic.bell_pair_probability(a, b, bs, im, 1.0))
    C = p(a1, b1) - p(a1, b2) + p(a2, b2) + p(a2, b1)
    S = float(analytic.single_probability_D1(a2, bs, 1.0) + analytic.single_probability_D2(b1, bs, 1.0))
    return C, S


def minimal_efficiency(
    settings: AnalyzerSettings, bs: BeamSplitter, v: float, phi: float = 0.0
) -> float | None:
    """Efficiency above which B_CH > 0, or None when no efficiency works."""
    C, S = ch_coefficients(settings, bs, v, phi)
    if not C > 0.0:
        return None
    return S / C


def ch_statistic(
    settings: AnalyzerSettings, bs: BeamSplitter, interference: InterferenceModel, eta: float
) -> CHReport:
    _check_gating(settings)
    a1, a2, b1, b2 = settings.bell_angles
    p = lambda a, b: float(analytic.bell_pair_probability(a, b, bs, interference, eta))
    terms = {
        TERM_NAMES[0]: p(a1, b1),
        TERM_NAMES[1]: -p(a1, b2),
        TERM_NAMES[2]: p(a2, b2),
        TERM_NAMES[3]: p(a2, b1),
        TERM_NAMES[4]: -float(analytic.single_probability_D1(a2, bs, eta)),
        TERM_NAMES[5]: -float(analytic.single_probability_D2(b1, bs, eta)),
    }
    B = math.fsum(terms.values())
    p20 = float(analytic.intruder_probability_D1(a2, bs, interference, eta))
    p02 = float(analytic.intruder_probability_D2(b1, bs, interference, eta))
    corrected = B - p20 - p02
    return CHReport(
        terms=terms,
        B_CH=B,
        violated=B > 0.0,
        eta_min=minimal_efficiency(settings, bs, interference.v, interference.phi),
        corrected_B=corrected,
        corrected_violated=corrected > 0.0,
        intruders={"P20(a2)": p20, "P02(b1)": p02},
    )


def corrected_ch(
    settings: AnalyzerSettings, bs: BeamSplitter, interference: InterferenceModel, eta: float
) -> CHReport:
    """CH statistic with the same-crystal double counts added to the singles.

    The intruder formulas hold only at phi = 0 in the gating configuration.
    """
    if interference.phi != 0.0:
        raise ValueError("intruder probabilities are defined for phi = 0")
    return ch_statistic(settings, bs, interference, eta)


# --- Hardy -------------------------------------------------------------------------

@dataclass(frozen=True)
class HardyReport:
    hardy_probability: float
    constraint_residuals: tuple[float, float, float] | None
    optimal_angles: tuple[float, float, float, float] | None
    rho: float
    attainable: bool
    note: str = ""


def hardy_angles(a2, rho: float, kappa_sign: float = 1.0):
    """(a1, a2, b1, b2) that zero the three Hardy nulls when v cos(phi) = +-1.

    The nulls are P(a1, b2) = 0, P(a2, b1) = 0 and P(a2 + 90, b2 + 90) = 0;
    the last one uses the orthogonal analyzer ports.
    """
    r = kappa_sign * rho
    a2 = np.asarray(a2, dtype=float)
    s, c = np.sin(a2), np.cos(a2)
    b1 = np.arctan2(r * s, c)
    b2 = np.arctan2(s, r * c)
    a1 = np.arctan2(s, r * r * c)
    return a1, a2, b1, b2


def _hardy_eval(a2, bs: BeamSplitter, im: InterferenceModel, sign: float):
    a1, a2, b1, b2 = hardy_angles(a2, bs.rho, sign)
    p = lambda a, b: analytic.bell_pair_probability(a, b, bs, im, 1.0)
    half = math.pi / 2
    res = np.stack([p(a1, b2), p(a2, b1), p(a2 + half, b2 + half)])
    return p(a1, b1), res, (a1, a2, b1, b2)


def hardy_scan(
    bs: BeamSplitter,
    v: float,
    angle_grid_resolution: float = 1.0,
    tolerance: float = 1e-6,
    phi: float = 0.0,
) -> HardyReport:
    """Largest P(a1, b1) compatible with the three Hardy nulls.

    Grid over a2 at the given resolution (degrees), the other three angles
    solved from the nulls, then a bounded 1-D polish of the best grid cell.
    """
    if not 0.0 < angle_grid_resolution <= 1.0:
        raise ValueError("angle grid resolution must lie in (0, 1] degrees")
    im = InterferenceModel.with_visibility(v, phi)
    kappa = v * math.cos(phi)
    sign = 1.0 if kappa >= 0.0 else -1.0
    note = ""
    if abs(abs(kappa) - 1.0) > 1e-12:
        note = "exact nulls unattainable: v|cos(phi)| < 1 leaves the Bell pair partially classical"

    step = math.radians(angle_grid_resolution)
    grid = np.arange(step / 2, math.pi, step)
    val, res, _ = _hardy_eval(grid, bs, im, sign)
    ok = np.all(res < tolerance, axis=0)
    if not np.any(ok):
        return HardyReport(0.0, None, None, bs.rho, False, note or "no grid point meets the nulls")
    cand = np.where(ok, val, -np.inf)
    i = int(np.argmax(cand))

    def neg(x: float) -> float:
        v_, r_, _ = _hardy_eval(x, bs, im, sign)
        return -float(v_) if np.all(r_ < tolerance) else 1.0

    lo, hi = grid[i] - step, grid[i] + step
    polish = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    x = float(polish.x) if -polish.fun >= val[i] else float(grid[i])
    best, r, angles = _hardy_eval(x, bs, im, sign)
    return HardyReport(
        hardy_probability=float(best),
        constraint_residuals=tuple(float(t) for t in r),
        optimal_angles=tuple(float(t) for t in angles),
        rho=bs.rho,
        attainable=True,
        note=note,
    )


# --- polarizer-free selection ---------------------------------------------------

@dataclass(frozen=True)
class UnpolarizedThreshold:
    threshold: float
    violation_possible: bool
    best_splitter: BeamSplitter
    angles: tuple[float, float, float, float]
    per_splitter: list[float]


def _pinf_combination(x, bs: BeamSplitter, im: InterferenceModel) -> float:
    a1, a2, b1, b2 = x
    p = lambda a, b: analytic.unpolarized_selection_probability(a, b, bs, im, 1.0)
    return p(a1, b1) - p(a1, b2) + p(a2, b2) + p(a2, b1)


def unpolarized_singles(bs: BeamSplitter, v: float):
    """Singles at D1 and D2 for the polarizer-free selection, as functions of angle.

    Normalized like the coincidence formula (by the fully coherent selection
    rate).  A single is a quadratic form in (cos a, sin a), so the exact
    values at 0, 45 and 90 degrees fix it; they come from the Fock-space oracle.
    """
    def rates(state):
        out = []
        for a in (0.0, math.pi / 4, math.pi / 2):
            dist = oracle.outcome_distribution(state, bs, AnalyzerSettings(a, a, a, a))
            gate = [(k, p) for k, p in dist.items() if k[D1S] + k[D1SP] > 0 and k[D2S] + k[D2SP] > 0]
            out.append((sum(p for _, p in gate), sum(p for k, p in gate if k[D1]), sum(p for k, p in gate if k[D2])))
        return np.array(out)

    coh = rates(oracle.build_input_state(Kind.BOTH_CRYSTALS))
    inc = rates(oracle.build_input_state(Kind.BOTH_CRYSTALS, distinguishable=True))
    mix = (v * coh + (1.0 - v) * inc) / coh[0, 0]

    def form(col):
        u, h, w = mix[:, col]
        z = h - 0.5 * (u + w)
        return lambda a: u * np.cos(a) ** 2 + w * np.sin(a) ** 2 + 2.0 * z * np.sin(a) * np.cos(a)

    return form(1), form(2)


def _pinf_threshold(bs: BeamSplitter, im: InterferenceModel, grid_step: float, starts: int):
    single1, single2 = unpolarized_singles(bs, im.v)
    th = np.arange(0.0, math.pi, math.radians(grid_step))
    A1, A2, B1, B2 = np.meshgrid(th, th, th, th, indexing="ij")
    C = _pinf_combination((A1, A2, B1, B2), bs, im)
    S = single1(A2) + single2(B1)
    ratio = np.where(C > 1e-9, S / np.where(C > 1e-9, C, 1.0), np.inf)
    flat = np.argsort(ratio, axis=None, kind="stable")[:starts]
    best_eta, best_x = math.inf, None

    def f(x):
        c = float(_pinf_combination(x, bs, im))
        s = float(single1(x[1]) + single2(x[2]))
        return s / c if c > 1e-9 else 1e6 * (1.0 - c)

    for idx in flat:
        x0 = np.array([A1.flat[idx], A2.flat[idx], B1.flat[idx], B2.flat[idx]])
        r = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000})
        if r.fun < best_eta:
            best_eta, best_x = float(r.fun), r.x % math.pi
    return best_eta, tuple(float(t) for t in best_x)


def unpolarized_threshold_scan(
    bs_grid: Sequence[BeamSplitter],
    v: float,
    phi: float = 0.0,
    grid_step: float = 15.0,
    starts: int = 8,
) -> UnpolarizedThreshold:
    """Smallest efficiency for a CH violation by the polarizer-free selection."""
    im = InterferenceModel.with_visibility(v, phi)
    results = [_pinf_threshold(bs, im, grid_step, starts) for bs in bs_grid]
    etas = [r[0] for r in results]
    i = int(np.argmin(etas))
    return UnpolarizedThreshold(
        threshold=etas[i],
        violation_possible=etas[i] < 1.0 - 1e-9,
        best_splitter=bs_grid[i],
        angles=results[i][1],
        per_splitter=etas,
    )
