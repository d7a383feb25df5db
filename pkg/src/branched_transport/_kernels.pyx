# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled grid sweeps; see _kernels_py for the reference implementations."""

from libc.math cimport sqrt, INFINITY


def ratio_grid_min(int n_branches, double lo, double hi, double step):
    """Scan the split-ratio objective over lo, lo+step, ..., plus hi exactly."""
    cdef double m = n_branches - 1.0
    cdef long n = <long> ((hi - lo) / step)
    cdef long k, total = 0
    cdef double best = INFINITY
    cdef double arg = lo
    cdef double phi, rest, num, den, val
    for k in range(n + 1):
        phi = lo + step * k
        rest = 1.0 - m * phi
        num = 1.0 - m * phi * phi * phi - rest * rest * rest
        den = 1.0 - m * phi * sqrt(phi) - rest * sqrt(rest)
        val = num / den
        total += 1
        if val < best:
            best = val
            arg = phi
    rest = 1.0 - m * hi
    num = 1.0 - m * hi * hi * hi - rest * rest * rest
    den = 1.0 - m * hi * sqrt(hi) - rest * sqrt(rest)
    val = num / den
    total += 1
    if val < best:
        best = val
        arg = hi
    return best, arg, total


def gap_grid_scan(double t_lo, double t_hi, long n_t,
                  double phi_lo, double phi_hi, long n_phi, double gap_tol):
    """Scan L - R on the (t, phi) grid of the two-branch endgame."""
    cdef double sqrt2 = sqrt(2.0)
    cdef double w = (sqrt2 - 1.0) * (sqrt2 - 1.0)
    cdef double dt = (t_hi - t_lo) / (n_t - 1)
    cdef double dphi = (phi_hi - phi_lo) / (n_phi - 1)
    cdef double best = INFINITY
    cdef double t_at = t_lo, phi_at = phi_lo
    cdef long n_small = 0
    cdef long max_di = -1, max_dj = -1
    cdef long i, j
    cdef double t, phi, rest, a, L, R, gap, bend, quad
    for i in range(n_t):
        t = t_hi if i == n_t - 1 else t_lo + dt * i
        a = (3.0 * sqrt2 / (sqrt2 - 1.0)) * t
        for j in range(n_phi):
            phi = phi_hi if j == n_phi - 1 else phi_lo + dphi * j
            rest = 1.0 - phi
            quad = phi * rest
            bend = 1.0 - phi * sqrt(phi) - rest * sqrt(rest)
            L = 1.0 + (9.0 / (2.0 * w)) * quad / (a * a)
            R = (3.0 / w) * bend / a
            gap = L - R
            if gap < best:
                best = gap
                t_at = t
                phi_at = phi
            if gap <= gap_tol:
                n_small += 1
                if n_t - 1 - i > max_di:
                    max_di = n_t - 1 - i
                if n_phi - 1 - j > max_dj:
                    max_dj = n_phi - 1 - j
    return best, t_at, phi_at, n_small, max_di, max_dj
