"""Scalar theory of the minimal energy E(T) for the unit-flux problem.

For T >= 1/4 the minimizer waits and then runs the dyadic cascade, so
E(T) = 1/(2 - sqrt(2)) + T in closed form.  Splitting the root into masses
phi_1..phi_N (summing to 1) gives the recursion

    E(T) = min  sum_i phi_i^(3/2) E(T phi_i^(-3/2)) + (1 - sum_i phi_i^3) / (12 T),

whose shear term uses the exact identity
sum_i phi_i Xbar_i^2 = (1 - sum phi_i^3)/12 for the packed interval
barycenters Xbar_i.  This module evaluates the recursion, the equivalent
non-recursive ratio at the first-branching horizon, the elementary upper and
lower bounds sandwiching E, and a dynamic-programming solver for the
(exploratory) region T < 1/4.

Grid minimizations over mass partitions run as exact DPs over the separable
per-mass costs rather than raw enumeration; the feasible set (all partitions
with masses on the step grid, 2 <= N <= N_max) and the returned argmin are
identical to exhaustive search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

SQRT2 = math.sqrt(2.0)
CASCADE_CONSTANT = 1.0 / (2.0 - SQRT2)
CRITICAL_HORIZON = 0.25

PARTITION_TOL = 1e-12


def canonical_partition(masses) -> tuple:
    """Sorted (nondecreasing) positive masses summing to 1 within 1e-12."""
    p = tuple(sorted(float(m) for m in masses))
    if not p:
        raise ValueError("partition needs at least one mass")
    if any(m <= 0.0 or m > 1.0 + PARTITION_TOL for m in p):
        raise ValueError(f"masses must lie in (0, 1], got {p}")
    total = math.fsum(p)
    if abs(total - 1.0) > PARTITION_TOL:
        raise ValueError(f"masses must sum to 1 within {PARTITION_TOL}, got {total!r}")
    return p


def closed_form_energy(T: float) -> float:
    """E(T) = 1/(2 - sqrt(2)) + T, valid for T >= 1/4."""
    if T < CRITICAL_HORIZON - 1e-12:
        raise ValueError(f"closed form requires T >= 1/4, got {T!r}")
    return CASCADE_CONSTANT + T


def barycenter_shear_cost(masses) -> float:
    """Total shear cost sum_i phi_i Xbar_i^2 of the packed interval barycenters.

    Evaluates both the geometric sum (Xbar_i = -1/2 + sum_{j<i} phi_j + phi_i/2)
    and the closed form (1 - sum phi_i^3)/12, checks they agree to 1e-12, and
    returns the common value.
    """
    p = np.asarray(list(masses), dtype=float)
    if np.any(p <= 0.0):
        raise ValueError("masses must be positive")
    if abs(p.sum() - 1.0) > PARTITION_TOL:
        raise ValueError("masses must sum to 1")
    edges = np.concatenate([[0.0], np.cumsum(p)])
    centers = -0.5 + edges[:-1] + 0.5 * p
    geometric = float(np.dot(p, centers**2))
    closed = float((1.0 - np.sum(p**3)) / 12.0)
    if abs(geometric - closed) > 1e-12:
        raise ArithmeticError(
            f"barycenter identity violated: {geometric!r} vs {closed!r}"
        )
    return closed


def recursion_value(T: float, masses, energy: Callable[[float], float]) -> float:
    """One level of the energy recursion under a given energy oracle."""
    if not T > 0.0:
        raise ValueError("T must be positive")
    p = canonical_partition(masses)
    subtrees = math.fsum(m**1.5 * energy(T * m**-1.5) for m in p)
    shear = (1.0 - math.fsum(m**3 for m in p)) / (12.0 * T)
    return subtrees + shear


def j_ratio(T: float, masses) -> float:
    """Non-recursive branching ratio ((N-1) + (1 - sum phi^3)/(12 T^2)) / (1 - sum phi^(3/2))."""
    p = canonical_partition(masses)
    if len(p) < 2:
        raise ValueError("ratio needs at least two branches")
    den = 1.0 - math.fsum(m**1.5 for m in p)
    num = (len(p) - 1) + (1.0 - math.fsum(m**3 for m in p)) / (12.0 * T * T)
    return num / den


def equipartition_residual(T: float, masses) -> float:
    """T (N-1) - (1 - sum phi^3)/(12 T); zero at the critical two-way split."""
    p = canonical_partition(masses)
    return T * (len(p) - 1) - (1.0 - math.fsum(m**3 for m in p)) / (12.0 * T)


def dyadic_upper_bound(T: float) -> float:
    """Energy of the always-halving competitor: T (1 + sqrt(2)/(sqrt(2)-1) (1 + 1/(16 T^2)))."""
    if not T > 0.0:
        raise ValueError("T must be positive")
    return T * (1.0 + (SQRT2 / (SQRT2 - 1.0)) * (1.0 + 1.0 / (16.0 * T * T)))


def wasserstein_lower_bound(T: float) -> float:
    """Transport-only bound T + (1/12)/T (squared W2 from a Dirac to the unit block)."""
    if not T > 0.0:
        raise ValueError("T must be positive")
    return T + (1.0 / 12.0) / T


def branch_count_bound(alpha: float) -> int:
    """Largest branch count compatible with a ratio lower bound alpha.

    Largest integer N with sqrt(N) <= (-1 + sqrt(1 + 6/(alpha (sqrt(2)-1)^2)))/2,
    floored at 1 (a single branch is always admissible).
    """
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    rhs = 0.5 * (-1.0 + math.sqrt(1.0 + 6.0 / (alpha * (SQRT2 - 1.0) ** 2)))
    n = 1
    while math.sqrt(n + 1) <= rhs:
        n += 1
    return n


class TStarWindow(NamedTuple):
    t_minus: float
    t_star: float


def t_star_window() -> TStarWindow:
    """Certified window for the last branching horizon: (T_minus, 1/4].

    T_minus is the smaller root of T^2 - T/2 + 1/(6 sqrt(2) (sqrt(2)+1)) = 0,
    in closed form (1/4) (1 - sqrt(1 - (4/3)(2 - sqrt(2)))).
    """
    t_minus = 0.25 * (1.0 - math.sqrt(1.0 - (4.0 / 3.0) * (2.0 - SQRT2)))
    return TStarWindow(t_minus, CRITICAL_HORIZON)


# -- exact grid minimization over mass partitions ------------------------------


def enumerate_partitions(units: int, n_parts: int, _lo: int = 1):
    """All nondecreasing compositions of `units` into exactly n_parts >= 1 units."""
    if n_parts == 1:
        if units >= _lo:
            yield (units,)
        return
    for first in range(_lo, units // n_parts + 1):
        for rest in enumerate_partitions(units - first, n_parts - 1, first):
            yield (first,) + rest


def _separable_min(cost: np.ndarray, units: int, n_parts: int):
    """Exact min of sum_i cost[m_i] over compositions of `units` into n_parts.

    cost[m] is the per-part cost of a part of m units (cost[0] is ignored).
    Returns (value, parts) with parts the lexicographically smallest
    nondecreasing optimal composition.
    """
    big = np.inf
    layers = [None, cost.copy()]
    layers[1][0] = big
    for n in range(2, n_parts + 1):
        prev = layers[n - 1]
        cur = np.full(units + 1, big)
        for m in range(1, units - n + 2):
            upper = units - m + 1
            np.minimum(cur[m:], prev[:upper] + cost[m], out=cur[m:])
        layers.append(cur)
    value = layers[n_parts][units]
    parts = []
    u, n = units, n_parts
    while n > 1:
        target = layers[n][u]
        for m in range(1, u - n + 2):
            if layers[n - 1][u - m] + cost[m] <= target:
                parts.append(m)
                u -= m
                n -= 1
                break
        else:  # numerical safety net; cannot trigger for finite costs
            raise ArithmeticError("separable DP backtrack failed")
    parts.append(u)
    return float(value), tuple(sorted(parts))


def _grid_units(step: float) -> int:
    units = round(1.0 / step)
    if abs(units * step - 1.0) > 1e-9:
        raise ValueError(f"step {step!r} must divide 1")
    return units


def minimize_j(T: float, n_max: int, step: float):
    """Exact minimizer of the branching ratio over the mass grid.

    Searches all partitions with masses on the step grid and 2 <= N <= n_max
    (nondecreasing order, so permutations are never generated) via an exact
    Dinkelbach iteration on the separable DP.  Ties resolve to the
    lexicographically smallest partition, then the smallest N.
    Returns (partition, value).
    """
    if n_max < 2:
        raise ValueError("need n_max >= 2")
    units = _grid_units(step)
    phi = np.arange(units + 1) / units
    phi32 = phi**1.5
    phi3 = phi**3 / (12.0 * T * T)

    best = None
    for n in range(2, n_max + 1):
        if n > units:
            break
        parts = tuple([units // n] * (n - units % n) + [units // n + 1] * (units % n))
        q = _ratio_of(T, parts, units)
        argmin = parts
        for _ in range(60):
            cost = q * phi32 - phi3
            _, cand = _separable_min(cost, units, n)
            q_new = _ratio_of(T, cand, units)
            if q_new >= q - 1e-15 * abs(q):
                if q_new < q:
                    q, argmin = q_new, cand
                break
            q, argmin = q_new, cand
        key = (q, tuple(m / units for m in argmin), n)
        if best is None or key < best:
            best = key
    value, masses, _n = best
    return masses, value


def _ratio_of(T, parts, units):
    p = [m / units for m in parts]
    den = 1.0 - math.fsum(m**1.5 for m in p)
    num = (len(p) - 1) + (1.0 - math.fsum(m**3 for m in p)) / (12.0 * T * T)
    return num / den


def minimize_recursion(T: float, n_max: int, step: float, energy: Callable[[float], float]):
    """Exact grid minimizer of (N >= 2) recursion values under an energy oracle.

    Returns (partition, value) over all step-grid partitions with 2..n_max
    parts; the per-part costs are separable, so a DP searches the grid exactly.
    """
    units = _grid_units(step)
    cost = np.empty(units + 1)
    cost[0] = np.inf
    for m in range(1, units + 1):
        f = m / units
        cost[m] = f**1.5 * energy(T * f**-1.5) - f**3 / (12.0 * T) if m < units else np.inf
    best = None
    for n in range(2, n_max + 1):
        if n > units:
            break
        value, parts = _separable_min(cost, units, n)
        value += 1.0 / (12.0 * T)
        key = (value, tuple(m / units for m in parts), n)
        if best is None or key < best:
            best = key
    value, masses, _n = best
    return masses, value


# -- dynamic-programming energy curve ------------------------------------------


@dataclass(frozen=True)
class EnergyCurve:
    """E estimates on a horizon grid, sandwiched by the elementary bounds.

    Values at or above ``closed_form_floor`` (= 1/4) are the closed form;
    below it they come from the branching/waiting DP and are exploratory: the
    minimizer structure is only characterized above the floor, and the
    interpolation error of the DP is reported, not certified.
    """

    ts: np.ndarray
    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    closed_form_floor: float = CRITICAL_HORIZON

    def rows(self):
        return zip(self.ts.tolist(), self.values.tolist(), self.lower.tolist(), self.upper.tolist())

    def at(self, T: float) -> float:
        if T >= self.closed_form_floor:
            return closed_form_energy(T)
        return float(np.interp(T, self.ts, self.values))


def solve_E(
    t_lo: float = 0.05,
    t_hi: float = 2.0,
    ratio: float = 1.01,
    step_above: float = 0.01,
    mass_step: float = 0.01,
    n_max: int = 6,
    tol: float = 1e-12,
    max_sweeps: int = 60,
) -> EnergyCurve:
    """Tabulate E on a grid: closed form above 1/4, branching DP below.

    Below the floor, E(T) is the minimum over a first-branching time t on the
    grid and step-grid partitions of
    t + sum_i phi_i^(3/2) Ehat((T-t) phi_i^(-3/2)) + (1 - sum phi_i^3)/(12 (T-t)),
    with Ehat linearly interpolated between grid points.  The grid is
    geometric below the floor (ratio <= 1.01 recommended: small horizons get
    stretched by phi^(-3/2)); values converge by repeated decreasing sweeps
    from an always-halving upper-bound initialization.
    """
    if not 0.0 < t_lo < CRITICAL_HORIZON:
        raise ValueError("t_lo must lie in (0, 1/4)")
    if t_hi < CRITICAL_HORIZON:
        raise ValueError("t_hi must be >= 1/4")
    if ratio <= 1.0:
        raise ValueError("geometric ratio must exceed 1")
    units = _grid_units(mass_step)

    below = [t_lo]
    while below[-1] * ratio < CRITICAL_HORIZON - 1e-12:
        below.append(below[-1] * ratio)
    ts_below = np.array(below)
    n_below = len(ts_below)
    ts_above = [CRITICAL_HORIZON]
    while ts_above[-1] + step_above <= t_hi + 1e-12:
        ts_above.append(ts_above[-1] + step_above)
    ts = np.concatenate([ts_below, ts_above])

    values = np.array([dyadic_upper_bound(t) for t in ts_below] + [CASCADE_CONSTANT + t for t in ts_above])

    knots_t = np.concatenate([ts_below, [CRITICAL_HORIZON]])
    phi = np.arange(units + 1) / units
    phi_pow = phi**-1.5
    phi32 = phi**1.5
    phi3 = phi**3

    branch_now = np.empty(n_below)
    for _ in range(max_sweeps):
        knots_v = np.concatenate([values[:n_below], [CASCADE_CONSTANT + CRITICAL_HORIZON]])
        for j in range(n_below - 1, -1, -1):
            T = ts_below[j]
            args = T * phi_pow[1:units]
            evals = np.where(
                args >= CRITICAL_HORIZON,
                CASCADE_CONSTANT + args,
                np.interp(args, knots_t, knots_v),
            )
            cost = np.empty(units + 1)
            cost[0] = cost[units] = np.inf
            cost[1:units] = phi32[1:units] * evals - phi3[1:units] / (12.0 * T)
            b = np.inf
            for n in range(2, n_max + 1):
                if n > units:
                    break
                v, _ = _separable_min(cost, units, n)
                b = min(b, v)
            branch_now[j] = b + 1.0 / (12.0 * T)
            if branch_now[j] < knots_v[j]:
                knots_v[j] = branch_now[j]
        # waiting: E(T_j) = T_j + min_{i <= j} (branch_now_i - T_i)
        wait_best = np.minimum.accumulate(branch_now - ts_below)
        new_below = np.minimum(branch_now, ts_below + wait_best)
        delta = float(np.max(np.abs(values[:n_below] - new_below)))
        values[:n_below] = new_below
        if delta < tol:
            break

    lower = np.array([wasserstein_lower_bound(t) for t in ts])
    upper = np.array([dyadic_upper_bound(t) for t in ts])
    return EnergyCurve(ts, values, lower, upper)
