"""Pure-Python reference kernels for the efficiency-threshold search.

``_ckernels.pyx`` is a line-by-line port; keep the arithmetic order of the
two in step so that both backends return the same numbers.
"""

from __future__ import annotations

import math

import numpy as np

# Infeasible points (no violation possible) map onto a ramp starting at
# PENALTY, which joins continuously with the clipped feasible branch.
PENALTY = 1.0e6


def _pair(ca, sa, cb, sb, rho, kappa):
    return ca * ca * sb * sb - 2.0 * kappa * rho * sa * ca * sb * cb + rho * rho * sa * sa * cb * cb


def ch_parts(x, rho: float, kappa: float) -> tuple[float, float]:
    """(C, S): coincidence combination and singles sum, both without prefactors."""
    ca1, sa1 = math.cos(x[0]), math.sin(x[0])
    ca2, sa2 = math.cos(x[1]), math.sin(x[1])
    cb1, sb1 = math.cos(x[2]), math.sin(x[2])
    cb2, sb2 = math.cos(x[3]), math.sin(x[3])
    c = (
        _pair(ca1, sa1, cb1, sb1, rho, kappa)
        - _pair(ca1, sa1, cb2, sb2, rho, kappa)
        + _pair(ca2, sa2, cb2, sb2, rho, kappa)
        + _pair(ca2, sa2, cb1, sb1, rho, kappa)
    )
    s = (ca2 * ca2 + rho * rho * sa2 * sa2) + (sb1 * sb1 + rho * rho * cb1 * cb1)
    return c, s


def eta_objective(x, rho: float, kappa: float) -> float:
    c, s = ch_parts(x, rho, kappa)
    if c > 0.0:
        r = s / c
        if r < PENALTY:
            return r
        return PENALTY
    return PENALTY * (1.0 - c)


def eta_grid(angles, rho: float, kappa: float) -> np.ndarray:
    """eta_min on the full product grid angles^4, indexed [a1, a2, b1, b2].

    Cells without a violation hold +inf.
    """
    th = np.asarray(angles, dtype=float)
    c, s = np.cos(th), np.sin(th)
    # P[i, j] = reduced pair probability at (a=th[i], b=th[j])
    P = _pair(c[:, None], s[:, None], c[None, :], s[None, :], rho, kappa)
    s1 = c * c + rho * rho * s * s
    s2 = s * s + rho * rho * c * c
    C = (
        P[:, None, :, None]
        - P[:, None, None, :]
        + P[None, :, None, :]
        + P[None, :, :, None]
    )
    S = s1[None, :, None, None] + s2[None, None, :, None]
    S = np.broadcast_to(S, C.shape)
    out = np.full(C.shape, np.inf)
    ok = C > 0.0
    out[ok] = S[ok] / C[ok]
    return out


def nelder_mead(x0, step: float, rho: float, kappa: float, xtol: float, ftol: float, max_iter: int):
    """Minimize eta_objective from x0; returns (x, f, iterations)."""
    n = 4
    simplex = [list(map(float, x0))]
    for i in range(n):
        v = list(map(float, x0))
        v[i] = v[i] + step
        simplex.append(v)
    fs = [eta_objective(v, rho, kappa) for v in simplex]

    it = 0
    while it < max_iter:
        # stable insertion sort on f
        for i in range(1, n + 1):
            j = i
            while j > 0 and fs[j - 1] > fs[j]:
                fs[j - 1], fs[j] = fs[j], fs[j - 1]
                simplex[j - 1], simplex[j] = simplex[j], simplex[j - 1]
                j -= 1
        fspread = 0.0
        xspread = 0.0
        for i in range(1, n + 1):
            d = abs(fs[i] - fs[0])
            if d > fspread:
                fspread = d
            for k in range(n):
                d = abs(simplex[i][k] - simplex[0][k])
                if d > xspread:
                    xspread = d
        if fspread <= ftol and xspread <= xtol:
            break
        it += 1

        cen = [0.0] * n
        for i in range(n):
            for k in range(n):
                cen[k] += simplex[i][k]
        for k in range(n):
            cen[k] /= n
        worst = simplex[n]
        xr = [cen[k] + (cen[k] - worst[k]) for k in range(n)]
        fr = eta_objective(xr, rho, kappa)
        if fr < fs[0]:
            xe = [cen[k] + 2.0 * (cen[k] - worst[k]) for k in range(n)]
            fe = eta_objective(xe, rho, kappa)
            if fe < fr:
                simplex[n], fs[n] = xe, fe
            else:
                simplex[n], fs[n] = xr, fr
            continue
        if fr < fs[n - 1]:
            simplex[n], fs[n] = xr, fr
            continue
        if fr < fs[n]:
            xc = [cen[k] + 0.5 * (xr[k] - cen[k]) for k in range(n)]
            fc = eta_objective(xc, rho, kappa)
            if fc <= fr:
                simplex[n], fs[n] = xc, fc
                continue
        else:
            xc = [cen[k] + 0.5 * (worst[k] - cen[k]) for k in range(n)]
            fc = eta_objective(xc, rho, kappa)
            if fc < fs[n]:
                simplex[n], fs[n] = xc, fc
                continue
        best = simplex[0]
        for i in range(1, n + 1):
            simplex[i] = [best[k] + 0.5 * (simplex[i][k] - best[k]) for k in range(n)]
            fs[i] = eta_objective(simplex[i], rho, kappa)

    ibest = 0
    for i in range(1, n + 1):
        if fs[i] < fs[ibest]:
            ibest = i
    return np.array(simplex[ibest]), fs[ibest], it
