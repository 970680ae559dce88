# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled residual/Jacobian assembly and tridiagonal solve."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

cdef double BIG = 1e8


def assemble(const double[::1] x, const double[::1] psi, const double[::1] phi, const double[::1] dphi,
             const double[::1] H, const double[::1] thp, const double[::1] thm, const double[::1] trk,
             const double[::1] knn, double eps, const double[::1] chi, double bc0, double bc1):
    cdef Py_ssize_t n = x.shape[0], i
    res_a = np.empty(n)
    lo_a = np.zeros(n)
    di_a = np.ones(n)
    up_a = np.zeros(n)
    cdef double[::1] res = res_a, lo = lo_a, di = di_a, up = up_a
    cdef double hm, hp, s_, cm, c0, cp, em, e0, ep, d1, d2, ph, dph, v, av, iq, s, iq2, iq3
    cdef double N, t2, r, D1, D2, kn, Hi
    for i in range(1, n - 1):
        hm = x[i] - x[i - 1]
        hp = x[i + 1] - x[i]
        s_ = hm + hp
        cm = -hp / (hm * s_)
        c0 = (hp - hm) / (hm * hp)
        cp = hm / (hp * s_)
        em = 2.0 / (hm * s_)
        e0 = -2.0 / (hm * hp)
        ep = 2.0 / (hp * s_)
        d1 = cm * psi[i - 1] + c0 * psi[i] + cp * psi[i + 1]
        d2 = em * psi[i - 1] + e0 * psi[i] + ep * psi[i + 1]
        ph = phi[i]
        dph = dphi[i]
        v = ph * d1
        av = fabs(v)
        if av > BIG:
            iq = 1.0 / (av * sqrt(1.0 + 1.0 / (av * av)))
        else:
            iq = 1.0 / sqrt(1.0 + v * v)
        s = v * iq
        iq2 = iq * iq
        iq3 = iq2 * iq
        N = ph * d2 + 2.0 * dph * d1
        Hi = H[i]
        kn = knn[i]
        if v < 0.0:
            t2 = -thp[i] + Hi * iq2 / (1.0 - s)
        elif v > 0.0:
            t2 = thm[i] - Hi * iq2 / (1.0 + s)
        else:
            t2 = -trk[i]
        r = N * iq3 + t2 - kn * iq2
        if eps != 0.0:
            r = r - eps * (psi[i] - chi[i])
        res[i] = r
        D2 = ph * iq3
        D1 = 2.0 * dph * iq3 - 3.0 * N * ph * s * iq2 * iq2 + ph * Hi * iq3 + 2.0 * kn * ph * s * iq3
        lo[i] = D1 * cm + D2 * em
        di[i] = -eps + D1 * c0 + D2 * e0
        up[i] = D1 * cp + D2 * ep
    res[0] = psi[0] - bc0
    res[n - 1] = psi[n - 1] - bc1
    return res_a, lo_a, di_a, up_a


def thomas(const double[::1] lo, const double[::1] di, const double[::1] up, const double[::1] rhs):
    """Thomas algorithm (no pivoting); lo[i] couples to i-1, up[i] to i+1."""
    cdef Py_ssize_t n = di.shape[0], i
    cp_a = np.empty(n)
    x_a = np.empty(n)
    cdef double[::1] c = cp_a, x = x_a
    cdef double m
    c[0] = up[0] / di[0]
    x[0] = rhs[0] / di[0]
    for i in range(1, n):
        m = di[i] - lo[i] * c[i - 1]
        c[i] = up[i] / m if i < n - 1 else 0.0
        x[i] = (rhs[i] - lo[i] * x[i - 1]) / m
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - c[i] * x[i + 1]
    return x_a
