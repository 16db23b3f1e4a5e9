"""Acceptance criteria AC1-AC11, each printed as a PASS/FAIL line.

Monte Carlo seeds are fixed up front (SEED) and not tuned to outcomes.
"""

import math
import time

import numpy as np
import pytest

from acceptance_log import verdict
from hardy_oracle import hardy_maximum
from fourphoton import analytic, montecarlo, oracle
from fourphoton.apparatus import AnalyzerSettings, BeamSplitter, DetectorModel, InterferenceModel
from fourphoton.bell import corrected_ch, unpolarized_threshold_scan
from fourphoton.optimize import hardy_optimum, optimize_angles
from fourphoton.visibility import WavePacket, packet_visibility, visibility_vs_window

SEED = 2026
POINT = AnalyzerSettings.from_degrees(104, 89, 181, 161)
BS01 = BeamSplitter.from_rho(0.1)
V09 = InterferenceModel.with_visibility(0.9)
HARDY_EXACT = (5 * math.sqrt(5) - 11) / 2


def test_ac01_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    psi = oracle.build_input_state(oracle.Kind.BOTH_CRYSTALS)
    im, det = InterferenceModel(), DetectorModel(1.0)
    worst = 0.0
    for _ in range(1000):
        bs, s = oracle.random_configuration(rng)
        for pair in oracle.all_pairs():
            q = oracle.fourfold_probability(psi, bs, im, s, det, pair)
            c = analytic.settings_coincidence(s, pair, bs, im, 1.0)
            worst = max(worst, abs(q - c))
    dt = time.perf_counter() - t0
    verdict("AC1", worst <= 1e-12 and dt < 10, f"oracle vs closed form, 1000 configs x 4 pairs: max |diff| = {worst:.2e} (tol 1e-12), {dt:.2f}s (< 10s)")


def test_ac02_reduction_identity():
    t0 = time.perf_counter()
    th = np.radians(np.arange(0.0, 360.0, 1.0))
    a, b = np.meshgrid(th, th, indexing="ij")
    worst = 0.0
    for R in (0.01, 0.0909, 0.2, 0.32, 0.5, 0.7):
        bs = BeamSplitter.from_reflectance(R)
        for v in (0.0, 0.85, 1.0):
            im = InterferenceModel.with_visibility(v)
            full = analytic.coincidence_probability(a, b, math.pi / 2, 0.0, bs, im, 1.0)
            gated = analytic.bell_pair_probability(a, b, bs, im, 1.0)
            worst = max(worst, float(np.max(np.abs(full * 4 / (bs.R**2 + bs.T**2) - gated))))
    dt = time.perf_counter() - t0
    verdict("AC2", worst <= 1e-12 and dt < 30, f"four-fold x 4/(R^2+T^2) vs gated form on 1 deg grid: max |diff| = {worst:.2e}, {dt:.2f}s (< 30s)")


def test_ac03_violation_point():
    t0 = time.perf_counter()
    r = corrected_ch(POINT, BS01, V09, 0.75)
    ratio = r.corrected_B / r.B_CH
    dt = time.perf_counter() - t0
    ok = r.B_CH > 0 and r.corrected_B > 0 and 0.25 <= ratio <= 0.45 and dt < 1
    verdict("AC3", ok, f"B_CH = {r.B_CH:.6e}, B_CH - P20 - P02 = {r.corrected_B:.6e}, ratio = {ratio:.4f} (in [0.25, 0.45]), {dt:.3f}s")


def test_ac04_symmetric_threshold():
    t0 = time.perf_counter()
    eta = optimize_angles(BeamSplitter.symmetric(), 1.0).eta_min
    dt = time.perf_counter() - t0
    verdict("AC4", abs(eta - 0.828) <= 0.005 and dt < 60, f"eta_min(v=1, rho=1) = {eta:.6f} (0.828 +- 0.005), {dt:.2f}s")


def test_ac05_asymmetric_limit():
    t0 = time.perf_counter()
    rhos = [0.2, 0.1, 0.05, 0.01]
    etas = [optimize_angles(r, 1.0).eta_min for r in rhos]
    dt = time.perf_counter() - t0
    mono = all(b < a for a, b in zip(etas, etas[1:]))
    ok = 0.667 < etas[-1] < 0.70 and mono and dt < 120
    verdict("AC5", ok, "eta_min(v=1) over rho " + ", ".join(f"{r}: {e:.6f}" for r, e in zip(rhos, etas)) + f"; decreasing = {mono}, {dt:.2f}s")


def test_ac06_realistic_visibility():
    t0 = time.perf_counter()
    rhos = np.round(np.arange(0.01, 0.3001, 0.01), 10)
    etas = [optimize_angles(float(r), 0.85).eta_min for r in rhos]
    k = int(np.argmin(etas))
    dt = time.perf_counter() - t0
    verdict("AC6", etas[k] <= 0.75 and dt < 120, f"min over rho <= 0.3 of eta_min(v=0.85) = {etas[k]:.6f} at rho = {rhos[k]} (<= 0.75), {dt:.2f}s")


def test_ac07_surface_ordering():
    t0 = time.perf_counter()
    low = optimize_angles(BeamSplitter.from_reflectance(0.2), 0.7).eta_min
    high = optimize_angles(BeamSplitter.from_reflectance(0.5), 1.0).eta_min
    dt = time.perf_counter() - t0
    verdict("AC7", low < high and dt < 60, f"eta_min(v=0.7, R=0.2) = {low:.6f} < eta_min(v=1, R=0.5) = {high:.6f}, {dt:.2f}s")


def test_ac08_polarizer_free_selection():
    t0 = time.perf_counter()
    th = np.radians(np.arange(0.0, 360.0, 1.0))
    a, b = np.meshgrid(th, th, indexing="ij")
    p = analytic.unpolarized_selection_probability(a, b, BeamSplitter.symmetric(), InterferenceModel(), 1.0)
    worst = float(np.max(np.abs(p - 0.5 * np.sin(a - b) ** 2)))
    grid = [BeamSplitter.from_polarized(rx, ry) for rx in (0.2, 0.35, 0.5, 0.65, 0.8) for ry in (0.2, 0.35, 0.5, 0.65, 0.8)]
    scan = unpolarized_threshold_scan(grid, 1.0)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and abs(scan.threshold - 0.828) <= 0.01 and dt < 120
    verdict("AC8", ok, f"P_inf - sin^2(a-b)/2 max |diff| = {worst:.2e}; threshold over 25 splitters = {scan.threshold:.6f} (0.828 +- 0.01), {dt:.2f}s")


def test_ac09_hardy_endpoint():
    t0 = time.perf_counter()
    h = hardy_optimum(1.0)
    R_bf, p_bf = hardy_maximum()
    dt = time.perf_counter() - t0
    ok = (
        abs(h.best_R - 0.32) <= 0.02
        and abs(h.hardy_probability - 0.09) <= 0.005
        and abs(p_bf - HARDY_EXACT) <= 1e-3
        and dt < 300
    )
    verdict(
        "AC9",
        ok,
        f"best_R = {h.best_R:.4f} (0.32 +- 0.02), value = {h.hardy_probability:.6f} (0.09 +- 0.005); "
        f"brute force {p_bf:.6f} at R = {R_bf:.3f} vs (5 sqrt5 - 11)/2 = {HARDY_EXACT:.6f}, {dt:.2f}s",
    )


def test_ac10a_monte_carlo_probabilities():
    t0 = time.perf_counter()
    r = montecarlo.run(POINT, BS01, V09, 0.75, 1_000_000, SEED)
    targets = montecarlo.analytic_targets(POINT, BS01, V09, 0.75)
    z = {k: (e.value - targets[k]) / e.stderr for k, e in r.estimates.items()}
    dt = time.perf_counter() - t0
    ok = all(abs(v) <= 3 for v in z.values()) and dt < 300
    verdict("AC10a", ok, "n=1e6 z-scores " + ", ".join(f"{k} {v:+.2f}" for k, v in z.items()) + f" (|z| <= 3), {dt:.2f}s")


def test_ac10b_monte_carlo_violation():
    t0 = time.perf_counter()
    c = montecarlo.estimate_ch(POINT, BS01, V09, 0.75, 10_000_000, SEED)
    dt = time.perf_counter() - t0
    verdict(
        "AC10b",
        c.B_CH > 0 and c.significance >= 3 and dt < 300,
        f"n=1e7: B_CH = {c.B_CH:.3e} +- {c.stderr:.3e} ({c.significance:.2f} sigma, need >= 3) "
        f"from {c.n_gated} gated events, {dt:.2f}s",
    )


@pytest.mark.slow
def test_ac10b_supplement_larger_sample():
    # at the stated sample size the expected significance is just under 3 sigma;
    # ten times more trials shows the violation is resolved once statistics allow
    t0 = time.perf_counter()
    c = montecarlo.estimate_ch(POINT, BS01, V09, 0.75, 100_000_000, SEED)
    dt = time.perf_counter() - t0
    verdict(
        "AC10b-supplement",
        c.B_CH > 0 and c.significance >= 3,
        f"n=1e8: B_CH = {c.B_CH:.3e} +- {c.stderr:.3e} ({c.significance:.2f} sigma), {dt:.2f}s",
    )


def test_ac11_visibility():
    t0 = time.perf_counter()
    p = WavePacket("gaussian", 0.5, 0.0, 10.0)
    norm = packet_visibility(p, p)
    literal = packet_visibility(p, p, "paper-literal")
    far = packet_visibility(WavePacket("gaussian", 0.1, -2.0, 10.0), WavePacket("gaussian", 0.1, 2.0, 10.0))
    ws = visibility_vs_window(p, p.with_window(10.0), [5.0, 10.0, 20.0, 50.0])
    spread = max(ws) - min(ws)
    dt = time.perf_counter() - t0
    ok = abs(norm - 1) <= 1e-9 and abs(literal - 0.5) <= 1e-9 and far < 1e-6 and spread <= 1e-6 and dt < 10
    verdict(
        "AC11",
        ok,
        f"normalized {norm:.12f}, literal {literal:.12f}, large delay {far:.2e}, window spread {spread:.2e}, {dt:.2f}s",
    )
