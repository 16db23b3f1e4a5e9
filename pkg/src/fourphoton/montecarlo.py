"""Event-level simulation of the gated Bell experiment.

Each trial draws an emission origin, a Bell setting pair and a joint
photon-number pattern at the eight detectors from the oracle's exact
distribution, then thins the Bell-detector photons with efficiency eta.
Estimates are conditioned on the selector gate being open for a
both-crystal emission, which is the normalization the closed forms use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import analytic, oracle
from .apparatus import AnalyzerSettings, BeamSplitter, InterferenceModel
from .oracle import D1, D1P, D1S, D2, D2P, D2S, Kind

BLOCK = 1_000_000
KINDS = (Kind.BOTH_CRYSTALS, Kind.CRYSTAL1_DOUBLE, Kind.CRYSTAL2_DOUBLE)
PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))
SIGNS = {(1, 1): 1, (1, 2): -1, (2, 1): 1, (2, 2): 1}
ORIGIN_SAMPLING = ("uniform", "weighted")


def ket_weights(v: float) -> np.ndarray:
    """Relative emission weights of the three kinds.

    A same-crystal double emission puts two identical pairs into the same
    modes; its ket carries squared norm 3, reduced by the overlap of the two
    pairs' temporal modes, which is (1 + v) / 2.
    """
    d = 1.5 * (1.0 + v)
    return np.array([1.0, d, d])


@dataclass(frozen=True)
class TrialOutcome:
    origin: Kind
    setting: tuple[int, int]
    selector_gate_open: bool
    fired: dict[str, bool]
    photon_counts: dict[str, int]


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    count: int
    total: int


@dataclass(frozen=True)
class RunEstimate:
    n_trials: int
    seed: int
    origin_sampling: str
    estimates: dict[str, Estimate]
    gated_both_crystal_events: int


@dataclass(frozen=True)
class CHEstimate:
    B_CH: float
    stderr: float
    corrected_B: float
    corrected_stderr: float
    n_trials: int
    n_gated: int
    seed: int
    significance: float
    violated: bool
    corrected_violated: bool
    run: RunEstimate = field(repr=False)


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < 2**63:
        raise ValueError(f"seed must lie in [0, 2**63), got {seed}")
    return int(seed)


@lru_cache(maxsize=64)
def _tables(settings: AnalyzerSettings, bs: BeamSplitter, v: float):
    """Pattern table and cumulative probabilities per (kind, pair) group."""
    dists = []
    for kind in KINDS:
        for pair in PAIRS:
            if kind is Kind.BOTH_CRYSTALS:
                coh = oracle.outcome_distribution(oracle.build_input_state(kind), bs, settings, pair)
                dist = {k: v * p for k, p in coh.items()}
                if v < 1.0:
                    inc = oracle.outcome_distribution(
                        oracle.build_input_state(kind, distinguishable=True), bs, settings, pair
                    )
                    for k, p in inc.items():
                        dist[k] = dist.get(k, 0.0) + (1.0 - v) * p
            else:
                dist = oracle.outcome_distribution(oracle.build_input_state(kind), bs, settings, pair)
            dists.append(dist)
    patterns = sorted({k for d in dists for k in d})
    index = {k: i for i, k in enumerate(patterns)}
    cdf = np.zeros((len(dists), len(patterns)))
    for g, d in enumerate(dists):
        row = np.zeros(len(patterns))
        for k, p in d.items():
            row[index[k]] = p
        c = np.cumsum(row)
        cdf[g] = c / c[-1]
    return np.array(patterns, dtype=np.int64), cdf


def _origin_probabilities(v: float, origin_sampling: str) -> np.ndarray:
    if origin_sampling == "uniform":
        return np.full(3, 1.0 / 3.0)
    if origin_sampling == "weighted":
        w = ket_weights(v)
        return w / w.sum()
    raise ValueError(f"origin_sampling must be one of {ORIGIN_SAMPLING}, got {origin_sampling!r}")


def _simulate_block(rng, n, patterns, cdf, origin_p, eta):
    origin = rng.choice(3, size=n, p=origin_p)
    pair = rng.integers(0, 4, size=n)
    group = origin * 4 + pair
    u = rng.random(n)
    pat = np.empty(n, dtype=np.int64)
    for g in range(cdf.shape[0]):
        m = group == g
        if m.any():
            pat[m] = np.minimum(np.searchsorted(cdf[g], u[m], side="right"), cdf.shape[1] - 1)
    counts = patterns[pat]
    detected = counts.copy()
    for d in (D1, D1P, D2, D2P):
        detected[:, d] = rng.binomial(counts[:, d], eta)
    return origin, pair, counts, detected


def _trial_stream(settings, bs, interference, eta, n_trials, seed, origin_sampling):
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    if interference.phi != 0.0:
        raise ValueError("the simulator samples phase-free outcome distributions; phi must be 0")
    seed = _check_seed(seed)
    patterns, cdf = _tables(settings, bs, interference.v)
    origin_p = _origin_probabilities(interference.v, origin_sampling)
    n_blocks = -(-n_trials // BLOCK)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    for b, child in enumerate(children):
        n = min(BLOCK, n_trials - b * BLOCK)
        rng = np.random.Generator(np.random.Philox(child))
        yield _simulate_block(rng, n, patterns, cdf, origin_p, eta)


def sample_trials(
    settings: AnalyzerSettings,
    bs: BeamSplitter,
    interference: InterferenceModel,
    eta: float,
    n_trials: int,
    seed: int,
    origin_sampling: str = "uniform",
) -> list[TrialOutcome]:
    """Individual trials, identical to the stream that :func:`run` counts."""
    out = []
    names = oracle.DETECTOR_MODES
    for origin, pair, counts, detected in _trial_stream(
        settings, bs, interference, eta, n_trials, seed, origin_sampling
    ):
        for o, p, c, d in zip(origin, pair, counts, detected):
            fired = {
                "D1": bool(d[D1] > 0),
                "D1perp": bool(d[D1P] > 0),
                "D2": bool(d[D2] > 0),
                "D2perp": bool(d[D2P] > 0),
                "D1'": bool(d[D1S] > 0),
                "D2'": bool(d[D2S] > 0),
            }
            out.append(
                TrialOutcome(
                    origin=KINDS[o],
                    setting=PAIRS[p],
                    selector_gate_open=fired["D1'"] and fired["D2'"],
                    fired=fired,
                    photon_counts={k: int(x) for k, x in zip(names, c)},
                )
            )
    return out


def _tally(stream):
    """Integer tallies; sums over blocks, so aggregation order does not matter."""
    t = {
        "trials": 0,
        "gated_psi": np.zeros(4, dtype=np.int64),
        "coinc": np.zeros(4, dtype=np.int64),
        "d1": np.zeros(4, dtype=np.int64),
        "d2": np.zeros(4, dtype=np.int64),
        "double1": np.zeros(4, dtype=np.int64),
        "double2": np.zeros(4, dtype=np.int64),
        "z_sum": 0,
        "z_sq": 0,
    }
    for origin, pair, counts, detected in stream:
        t["trials"] += len(origin)
        gate = (counts[:, D1S] > 0) & (counts[:, D2S] > 0)
        f1 = detected[:, D1] > 0
        f2 = detected[:, D2] > 0
        psi = gate & (origin == 0)
        for k in range(4):
            m = psi & (pair == k)
            t["gated_psi"][k] += int(m.sum())
            t["coinc"][k] += int((m & f1 & f2).sum())
            t["d1"][k] += int((m & f1).sum())
            t["d2"][k] += int((m & f2).sum())
            pm = gate & (pair == k)
            t["double1"][k] += int((pm & (origin == 1) & (counts[:, D1] == 2) & f1).sum())
            t["double2"][k] += int((pm & (origin == 2) & (counts[:, D2] == 2) & f2).sum())
        # per-trial CH score in units of 1 (scaled by 2 to stay integer)
        sg = np.array([SIGNS[p] for p in PAIRS])[pair]
        z = 2 * sg * (f1 & f2) - (pair // 2 == 1) * f1 - (pair % 2 == 0) * f2
        z = z[psi].astype(np.int64)
        t["z_sum"] += int(z.sum())
        t["z_sq"] += int((z * z).sum())
    return t


def _binomial(count: int, total: int) -> Estimate:
    if total == 0:
        return Estimate(0.0, 0.0, count, total)
    p = count / total
    return Estimate(p, math.sqrt(p * (1.0 - p) / total), count, total)


def _ratio(x: int, y: int, scale: float) -> Estimate:
    """scale * x / y for independent Poisson-like counts x and y."""
    if y == 0:
        return Estimate(0.0, 0.0, x, y)
    r = scale * x / y
    se = r * math.sqrt(1.0 / x + 1.0 / y) if x > 0 else scale / y
    return Estimate(r, se, x, y)


def _estimates(t, v: float, origin_sampling: str) -> dict[str, Estimate]:
    # importance factor: the intruder weight relative to a both-crystal emission
    q = _origin_probabilities(v, origin_sampling)
    w = ket_weights(v)
    scale = float((w[1] / w[0]) / (q[1] / q[0]))
    g = t["gated_psi"]
    est = {}
    for k, (i, j) in enumerate(PAIRS):
        est[f"coincidence(a{i},b{j})"] = _binomial(int(t["coinc"][k]), int(g[k]))
    a2 = [k for k, p in enumerate(PAIRS) if p[0] == 2]
    b1 = [k for k, p in enumerate(PAIRS) if p[1] == 1]
    est["single_D1(a2)"] = _binomial(int(t["d1"][a2].sum()), int(g[a2].sum()))
    est["single_D2(b1)"] = _binomial(int(t["d2"][b1].sum()), int(g[b1].sum()))
    est["intruder_D1(a2)"] = _ratio(int(t["double1"][a2].sum()), int(g[a2].sum()), scale)
    est["intruder_D2(b1)"] = _ratio(int(t["double2"][b1].sum()), int(g[b1].sum()), scale)
    return est


def run(
    settings: AnalyzerSettings,
    bs: BeamSplitter,
    interference: InterferenceModel,
    eta: float,
    n_trials: int,
    seed: int,
    origin_sampling: str = "uniform",
) -> RunEstimate:
    t = _tally(_trial_stream(settings, bs, interference, eta, n_trials, seed, origin_sampling))
    return RunEstimate(
        n_trials=t["trials"],
        seed=seed,
        origin_sampling=origin_sampling,
        estimates=_estimates(t, interference.v, origin_sampling),
        gated_both_crystal_events=int(t["gated_psi"].sum()),
    )


def analytic_targets(
    settings: AnalyzerSettings, bs: BeamSplitter, interference: InterferenceModel, eta: float
) -> dict[str, float]:
    """Closed-form values of every quantity :func:`run` estimates.

    Bell detectors fire on any of their photons, so a doubly occupied
    detector registers with 1 - (1 - eta)^2 rather than eta.
    """
    a1, a2, b1, b2 = settings.bell_angles
    angles = {1: a1, 2: a2}, {1: b1, 2: b2}
    out = {}
    for i, j in PAIRS:
        out[f"coincidence(a{i},b{j})"] = float(
            analytic.bell_pair_probability(angles[0][i], angles[1][j], bs, interference, eta)
        )
    out["single_D1(a2)"] = float(analytic.single_probability_D1(a2, bs, eta))
    out["single_D2(b1)"] = float(analytic.single_probability_D2(b1, bs, eta))
    eta2 = 1.0 - (1.0 - eta) ** 2
    out["intruder_D1(a2)"] = float(analytic.intruder_probability_D1(a2, bs, interference, eta2))
    out["intruder_D2(b1)"] = float(analytic.intruder_probability_D2(b1, bs, interference, eta2))
    return out


def estimate_ch(
    settings: AnalyzerSettings,
    bs: BeamSplitter,
    interference: InterferenceModel,
    eta: float,
    n_trials: int,
    seed: int,
    origin_sampling: str = "uniform",
) -> CHEstimate:
    """CH statistic from counts, with its standard error.

    Every gated both-crystal trial contributes the score
    4 sgn(pair) [D1 and D2] - 2 [a = a2] [D1] - 2 [b = b1] [D2], whose mean
    is B_CH because the setting pair is drawn uniformly.  A violation is
    claimed only at three standard errors.
    """
    t = _tally(_trial_stream(settings, bs, interference, eta, n_trials, seed, origin_sampling))
    est = _estimates(t, interference.v, origin_sampling)
    n = int(t["gated_psi"].sum())
    if n < 2:
        raise ValueError("too few gated events to estimate B_CH")
    mean = t["z_sum"] / n
    var = (t["z_sq"] - n * mean * mean) / (n - 1)
    B = 2.0 * mean
    se = 2.0 * math.sqrt(max(var, 0.0) / n)
    i1, i2 = est["intruder_D1(a2)"], est["intruder_D2(b1)"]
    corrected = B - i1.value - i2.value
    cse = math.sqrt(se**2 + i1.stderr**2 + i2.stderr**2)
    significance = B / se if se > 0 else 0.0
    return CHEstimate(
        B_CH=B,
        stderr=se,
        corrected_B=corrected,
        corrected_stderr=cse,
        n_trials=t["trials"],
        n_gated=n,
        seed=seed,
        significance=significance,
        violated=se > 0 and B > 3.0 * se,
        corrected_violated=cse > 0 and corrected > 3.0 * cse,
        run=RunEstimate(t["trials"], seed, origin_sampling, est, n),
    )
