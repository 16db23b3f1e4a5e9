"""Closed-form detection probabilities.

Functions accept scalars or numpy arrays for the angle arguments and
broadcast.  The "reduced" probabilities (no efficiency factor) are exposed
separately because the threshold formula needs them.
"""

from __future__ import annotations

import math

import numpy as np

from .apparatus import AnalyzerSettings, BeamSplitter, InterferenceModel, sinc_squared


def _q(q_x: float, q_y: float, th_i, th_j):
    return q_x * np.sin(th_i) * np.cos(th_j) - q_y * np.cos(th_i) * np.sin(th_j)


def coincidence_probability(
    a,
    b,
    alpha,
    beta,
    bs: BeamSplitter,
    interference: InterferenceModel,
    eta: float,
):
    """Four-fold probability (eta^2/4)(A^2 + B^2 - 2 A B v cos(phi)).

    ``A = Q(t)_{1,1'} Q(t)_{2,2'}`` and ``B = Q(r)_{1,2'} Q(r)_{2,1'}`` with
    ``Q(q)_ij = q_x sin(th_i) cos(th_j) - q_y cos(th_i) sin(th_j)``; the
    primed angles are the selector polarizers ``alpha`` (D1') and ``beta`` (D2').
    """
    A = _q(bs.t_x, bs.t_y, a, alpha) * _q(bs.t_x, bs.t_y, b, beta)
    B = _q(bs.r_x, bs.r_y, a, beta) * _q(bs.r_x, bs.r_y, b, alpha)
    v = interference.v
    return eta**2 / 4.0 * (A * A + B * B - 2.0 * A * B * v * math.cos(interference.phi))


def settings_coincidence(settings: AnalyzerSettings, pair, bs, interference, eta):
    a = settings.a1 if pair[0] == 1 else settings.a2
    b = settings.b1 if pair[1] == 1 else settings.b2
    return coincidence_probability(a, b, settings.alpha, settings.beta, bs, interference, eta)


def reduced_pair_probability(a, b, rho: float, kappa: float):
    """Bell-pair probability without the ``eta^2 s`` prefactor.

    ``kappa`` is ``v cos(phi)``.
    """
    ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
    return ca * ca * sb * sb - 2.0 * kappa * rho * sa * ca * sb * cb + rho * rho * sa * sa * cb * cb


def bell_pair_probability(a, b, bs: BeamSplitter, interference: InterferenceModel, eta: float):
    """Gated nonmaximal singlet-like probability at selector angles 90/0 deg."""
    kappa = interference.v * math.cos(interference.phi)
    return eta**2 * bs.s * reduced_pair_probability(a, b, bs.rho, kappa)


def reduced_single_D1(a, rho: float):
    return np.cos(a) ** 2 + rho * rho * np.sin(a) ** 2


def reduced_single_D2(b, rho: float):
    return np.sin(b) ** 2 + rho * rho * np.cos(b) ** 2


def single_probability_D1(a, bs: BeamSplitter, eta: float):
    return eta * bs.s * reduced_single_D1(a, bs.rho)


def single_probability_D2(b, bs: BeamSplitter, eta: float):
    # sine and cosine are swapped relative to D1
    return eta * bs.s * reduced_single_D2(b, bs.rho)


def unpolarized_denominator(bs: BeamSplitter) -> float:
    Rx, Ry = bs.r_x**2, bs.r_y**2
    Tx, Ty = bs.t_x**2, bs.t_y**2
    return 2.0 * (1.0 - 2.0 * Rx * Tx - 2.0 * Ry * Ty + Tx * Ty + Rx * Ry)


def unpolarized_selection_probability(
    a, b, bs: BeamSplitter, interference: InterferenceModel, eta: float
):
    """Bell-pair probability when the selector polarizers are removed.

    Sum of the four selector-port combinations, valid for polarization
    dependent splitters.
    """
    tx, ty, rx, ry = bs.t_x, bs.t_y, bs.r_x, bs.r_y
    den = unpolarized_denominator(bs)
    if not den > 0.0:
        raise ValueError(f"nonpositive normalization {den!r}")
    sa, ca, sb, cb = np.sin(a), np.cos(a), np.sin(b), np.cos(b)
    S = (tx**2 * ty**2 + rx**2 * ry**2) * (sa**2 * cb**2 + ca**2 * sb**2)
    W = (tx * rx * sa * sb + ty * ry * ca * cb) ** 2
    num = (
        (1.0 - 2.0 * rx**2 * tx**2) * sa**2 * sb**2
        + (1.0 - 2.0 * ry**2 * ty**2) * ca**2 * cb**2
        + S
        - 2.0 * interference.v * W * math.cos(interference.phi)
    )
    return eta**2 * num / den


def intruder_probability_D1(a, bs: BeamSplitter, interference: InterferenceModel, eta: float):
    """Two photons from crystal 1 registered together at D1."""
    return eta * bs.s * bs.rho * (1.0 + interference.v) * np.sin(2.0 * a) ** 2


def intruder_probability_D2(b, bs: BeamSplitter, interference: InterferenceModel, eta: float):
    return eta * bs.s * bs.rho * (1.0 + interference.v) * np.sin(2.0 * b) ** 2


def visibility_combine(v_e: float, dz: float, L: float) -> float:
    if not L > 0.0:
        raise ValueError(f"fringe spacing must be positive, got {L!r}")
    if dz < 0.0:
        raise ValueError(f"pinhole width must be nonnegative, got {dz!r}")
    return v_e * sinc_squared(math.pi * dz / L)
