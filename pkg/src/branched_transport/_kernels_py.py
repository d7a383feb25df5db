"""NumPy implementations of the hot grid sweeps.

Same contracts as the compiled module `_kernels`; the arithmetic uses
x*sqrt(x) for the 3/2 powers so both backends produce identical doubles.
"""

from __future__ import annotations

import numpy as np


def ratio_grid_min(n_branches: int, lo: float, hi: float, step: float):
    """Scan the split-ratio objective over the grid lo, lo+step, ..., hi.

    The objective for an (N-1)-fold small mass phi is
    (1 - (N-1) phi^3 - (1-(N-1) phi)^3) / (1 - (N-1) phi^(3/2) - (1-(N-1) phi)^(3/2)).
    The right endpoint hi is always evaluated exactly.
    Returns (min_value, argmin_phi, n_evaluations); ties keep the smallest phi.
    """
    m = float(n_branches - 1)
    n = int(np.floor((hi - lo) / step))
    best = np.inf
    arg = lo
    total = 0
    chunk = 1 << 18
    for start in range(0, n + 1, chunk):
        stop = min(start + chunk, n + 1)
        phi = lo + step * np.arange(start, stop)
        rest = 1.0 - m * phi
        num = 1.0 - m * phi * phi * phi - rest * rest * rest
        den = 1.0 - m * phi * np.sqrt(phi) - rest * np.sqrt(rest)
        vals = num / den
        k = int(np.argmin(vals))
        total += stop - start
        if vals[k] < best:
            best = float(vals[k])
            arg = float(phi[k])
    rest = 1.0 - m * hi
    num = 1.0 - m * hi * hi * hi - rest * rest * rest
    den = 1.0 - m * hi * np.sqrt(hi) - rest * np.sqrt(rest)
    val = num / den
    total += 1
    if val < best:
        best, arg = float(val), float(hi)
    return best, arg, total


def gap_grid_scan(
    t_lo: float,
    t_hi: float,
    n_t: int,
    phi_lo: float,
    phi_hi: float,
    n_phi: int,
    gap_tol: float,
):
    """Scan L - R on the (t, phi) grid used by the two-branch endgame.

    L(a, phi) = 1 + 9 phi (1-phi) / (2 a^2 (sqrt(2)-1)^2) and
    R(a, phi) = 3 (1 - phi^(3/2) - (1-phi)^(3/2)) / (a (sqrt(2)-1)^2),
    with a = 3 sqrt(2) t / (sqrt(2)-1).  Grids are linspace-style with exact
    endpoints.  Returns (min_gap, t_at_min, phi_at_min, n_small, max_di,
    max_dj) where n_small counts grid points with gap <= gap_tol and
    max_di/max_dj are their largest index distances from the corner
    (t_hi, phi_hi); both are -1 when no point is that small.
    """
    ts = np.linspace(t_lo, t_hi, n_t)
    phis = np.linspace(phi_lo, phi_hi, n_phi)
    sqrt2 = np.sqrt(2.0)
    w = (sqrt2 - 1.0) * (sqrt2 - 1.0)
    a = (3.0 * sqrt2 / (sqrt2 - 1.0)) * ts
    rest = 1.0 - phis
    bend = 1.0 - phis * np.sqrt(phis) - rest * np.sqrt(rest)
    quad = phis * rest
    L = 1.0 + (9.0 / (2.0 * w)) * quad[None, :] / (a * a)[:, None]
    R = (3.0 / w) * bend[None, :] / a[:, None]
    gap = L - R
    k = int(np.argmin(gap))
    i, j = divmod(k, n_phi)
    small = np.argwhere(gap <= gap_tol)
    if len(small):
        max_di = int(np.max(n_t - 1 - small[:, 0]))
        max_dj = int(np.max(n_phi - 1 - small[:, 1]))
    else:
        max_di = max_dj = -1
    return (
        float(gap[i, j]),
        float(ts[i]),
        float(phis[j]),
        int(len(small)),
        max_di,
        max_dj,
    )
