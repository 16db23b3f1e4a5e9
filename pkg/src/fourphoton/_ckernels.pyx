# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled efficiency-threshold kernels; mirrors _kernels_py."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, INFINITY

cnp.import_array()

cdef double PENALTY = 1.0e6


cdef inline double _pair(double ca, double sa, double cb, double sb, double rho, double kappa) nogil:
    return ca * ca * sb * sb - 2.0 * kappa * rho * sa * ca * sb * cb + rho * rho * sa * sa * cb * cb


cdef inline void _parts(const double* x, double rho, double kappa, double* c_out, double* s_out) nogil:
    cdef double ca1 = cos(x[0]), sa1 = sin(x[0])
    cdef double ca2 = cos(x[1]), sa2 = sin(x[1])
    cdef double cb1 = cos(x[2]), sb1 = sin(x[2])
    cdef double cb2 = cos(x[3]), sb2 = sin(x[3])
    c_out[0] = (
        _pair(ca1, sa1, cb1, sb1, rho, kappa)
        - _pair(ca1, sa1, cb2, sb2, rho, kappa)
        + _pair(ca2, sa2, cb2, sb2, rho, kappa)
        + _pair(ca2, sa2, cb1, sb1, rho, kappa)
    )
    s_out[0] = (ca2 * ca2 + rho * rho * sa2 * sa2) + (sb1 * sb1 + rho * rho * cb1 * cb1)


cdef inline double _objective(const double* x, double rho, double kappa) nogil:
    cdef double c, s, r
    _parts(x, rho, kappa, &c, &s)
    if c > 0.0:
        r = s / c
        if r < PENALTY:
            return r
        return PENALTY
    return PENALTY * (1.0 - c)


def ch_parts(x, double rho, double kappa):
    cdef double buf[4]
    cdef double c, s
    cdef int k
    for k in range(4):
        buf[k] = x[k]
    _parts(buf, rho, kappa, &c, &s)
    return c, s


def eta_objective(x, double rho, double kappa):
    cdef double buf[4]
    cdef int k
    for k in range(4):
        buf[k] = x[k]
    return _objective(buf, rho, kappa)


def eta_grid(angles, double rho, double kappa):
    cdef cnp.ndarray[cnp.double_t, ndim=1] th = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0]
    cdef cnp.ndarray[cnp.double_t, ndim=2] P = np.empty((n, n))
    cdef cnp.ndarray[cnp.double_t, ndim=1] s1 = np.empty(n)
    cdef cnp.ndarray[cnp.double_t, ndim=1] s2 = np.empty(n)
    cdef cnp.ndarray[cnp.double_t, ndim=4] out = np.empty((n, n, n, n))
    cdef double[:, ::1] Pv = P
    cdef double[:, :, :, ::1] ov = out
    cdef Py_ssize_t i, j, i1, i2, j1, j2
    cdef double ci, si, cj, sj, C, S
    for i in range(n):
        ci = cos(th[i]); si = sin(th[i])
        s1[i] = ci * ci + rho * rho * si * si
        s2[i] = si * si + rho * rho * ci * ci
        for j in range(n):
            cj = cos(th[j]); sj = sin(th[j])
            Pv[i, j] = _pair(ci, si, cj, sj, rho, kappa)
    with nogil:
        for i1 in range(n):
            for i2 in range(n):
                for j1 in range(n):
                    for j2 in range(n):
                        C = Pv[i1, j1] - Pv[i1, j2] + Pv[i2, j2] + Pv[i2, j1]
                        if C > 0.0:
                            ov[i1, i2, j1, j2] = (s1[i2] + s2[j1]) / C
                        else:
                            ov[i1, i2, j1, j2] = INFINITY
    return out


def nelder_mead(x0, double step, double rho, double kappa, double xtol, double ftol, int max_iter):
    cdef int n = 4
    cdef double simplex[5][4]
    cdef double fs[5]
    cdef double cen[4]
    cdef double xr[4]
    cdef double xe[4]
    cdef double xc[4]
    cdef double tmp[4]
    cdef double best[4]
    cdef double fr, fe, fc, ftmp, d, fspread, xspread
    cdef int i, j, k, it = 0, ibest
    for k in range(n):
        simplex[0][k] = x0[k]
    for i in range(n):
        for k in range(n):
            simplex[i + 1][k] = simplex[0][k]
        simplex[i + 1][i] = simplex[i + 1][i] + step
    for i in range(n + 1):
        fs[i] = _objective(simplex[i], rho, kappa)

    with nogil:
        while it < max_iter:
            for i in range(1, n + 1):
                j = i
                while j > 0 and fs[j - 1] > fs[j]:
                    ftmp = fs[j - 1]; fs[j - 1] = fs[j]; fs[j] = ftmp
                    for k in range(n):
                        tmp[k] = simplex[j - 1][k]
                        simplex[j - 1][k] = simplex[j][k]
                        simplex[j][k] = tmp[k]
                    j -= 1
            fspread = 0.0
            xspread = 0.0
            for i in range(1, n + 1):
                d = fabs(fs[i] - fs[0])
                if d > fspread:
                    fspread = d
                for k in range(n):
                    d = fabs(simplex[i][k] - simplex[0][k])
                    if d > xspread:
                        xspread = d
            if fspread <= ftol and xspread <= xtol:
                break
            it += 1

            for k in range(n):
                cen[k] = 0.0
            for i in range(n):
                for k in range(n):
                    cen[k] += simplex[i][k]
            for k in range(n):
                cen[k] /= n
            for k in range(n):
                xr[k] = cen[k] + (cen[k] - simplex[n][k])
            fr = _objective(xr, rho, kappa)
            if fr < fs[0]:
                for k in range(n):
                    xe[k] = cen[k] + 2.0 * (cen[k] - simplex[n][k])
                fe = _objective(xe, rho, kappa)
                if fe < fr:
                    for k in range(n):
                        simplex[n][k] = xe[k]
                    fs[n] = fe
                else:
                    for k in range(n):
                        simplex[n][k] = xr[k]
                    fs[n] = fr
                continue
            if fr < fs[n - 1]:
                for k in range(n):
                    simplex[n][k] = xr[k]
                fs[n] = fr
                continue
            if fr < fs[n]:
                for k in range(n):
                    xc[k] = cen[k] + 0.5 * (xr[k] - cen[k])
                fc = _objective(xc, rho, kappa)
                if fc <= fr:
                    for k in range(n):
                        simplex[n][k] = xc[k]
                    fs[n] = fc
                    continue
            else:
                for k in range(n):
                    xc[k] = cen[k] + 0.5 * (simplex[n][k] - cen[k])
                fc = _objective(xc, rho, kappa)
                if fc < fs[n]:
                    for k in range(n):
                        simplex[n][k] = xc[k]
                    fs[n] = fc
                    continue
            for k in range(n):
                best[k] = simplex[0][k]
            for i in range(1, n + 1):
                for k in range(n):
                    simplex[i][k] = best[k] + 0.5 * (simplex[i][k] - best[k])
                fs[i] = _objective(simplex[i], rho, kappa)

    ibest = 0
    for i in range(1, n + 1):
        if fs[i] < fs[ibest]:
            ibest = i
    return np.array([simplex[ibest][k] for k in range(n)]), fs[ibest], it
