"""Exact constructors for the optimal self-similar irrigation trees.

The centered unit-flux problem on horizon 1/4 is solved by a dyadic cascade:
at times t_k = (1/4) (1 - 2^(-3k/2)) every branch splits in two equal halves,
each half moving at constant speed toward the barycenter of its dyadic target
interval (it would arrive exactly at time 1/4).  Above horizon 1/4 the
minimizer waits as a stationary atom and then runs the cascade; general flux,
horizon and initial offset are reached by the mass/time rescaling and the
shear of :mod:`.tree`.

Depth-K truncations are materialized as `TransportTree`s; their energies also
come in closed form (per split generation: length c*2^(-k/2) and kinetic
c*2^(-k/2)*(1-2^(-k)) with c = 1/sqrt(2) - 1/4), which gives exact truncation
tails and lets callers bracket the limit energy without building 2^K branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import (
    EnergyBreakdown,
    TransportTree,
    merge,
    mirror_time,
    prepend_stationary,
    rescale_mass_time,
    shear,
    translate,
)

SQRT2 = math.sqrt(2.0)

# Energy of the infinite cascade at horizon 1/4 splits off the additive horizon
# term: E = CASCADE_CONSTANT + T for every horizon T >= CRITICAL_HORIZON.
CASCADE_CONSTANT = 1.0 / (2.0 - SQRT2)
CRITICAL_HORIZON = 0.25
MU_STAR_LIMIT_ENERGY = CASCADE_CONSTANT + CRITICAL_HORIZON

# Fraction of the distance-to-target covered within one split generation.
_LEVEL_FRACTION = 1.0 - 2.0**-1.5
# Per-generation energy scale: length_k = _C * 2^(-k/2).
_C = 1.0 / SQRT2 - 0.25

# 2^K branches per generation: keep materialized trees below ~100M floats.
MAX_DEPTH = 21


def branching_time(k: int) -> float:
    """k-th splitting time of the cascade: (1/4) (1 - 2^(-3k/2))."""
    if k < 0:
        raise ValueError("branching_time needs k >= 0")
    return 0.25 * (1.0 - 2.0 ** (-1.5 * k))


def barycenter_interval(k: int, i: int) -> float:
    """Center of the i-th of 2^k equal subintervals of [-1/2, 1/2] (1-based i)."""
    if k < 0:
        raise ValueError("barycenter_interval needs k >= 0")
    if not 1 <= i <= 2**k:
        raise ValueError(f"interval index {i} out of range 1..2^{k}")
    return -0.5 + (i - 1) / 2.0**k + 2.0 ** -(k + 1)


def _check_depth(depth):
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(
            f"depth must be in 1..{MAX_DEPTH} (2^K branches per generation), got {depth}"
        )


def build_mu_star(depth: int) -> TransportTree:
    """Depth-K truncation of the dyadic cascade on [0, t_K], unit flux from 0."""
    _check_depth(depth)
    cols = {name: [] for name in ("masses", "t0", "t1", "x0", "x1")}
    ends = np.zeros(1)  # positions at the current splitting time
    for k in range(1, depth + 1):
        n = 2**k
        start = np.repeat(ends, 2)
        targets = -0.5 + (np.arange(n) + 0.5) / n
        ends = start + _LEVEL_FRACTION * (targets - start)
        cols["masses"].append(np.full(n, 2.0**-k))
        cols["t0"].append(np.full(n, branching_time(k - 1)))
        cols["t1"].append(np.full(n, branching_time(k)))
        cols["x0"].append(start)
        cols["x1"].append(ends)
    data = tuple(np.concatenate(cols[name]) for name in ("masses", "t0", "t1", "x0", "x1"))
    return TransportTree(data, (0.0, branching_time(depth)))


@dataclass(frozen=True)
class TruncatedEnergy:
    """Exact energy of a depth-K truncation plus analytic tail to the limit.

    ``tail_upper`` drops the negative kinetic correction of the exact tail, so
    it is a geometric bound with ratio 2^(-1/2):
    truncated.total <= limit <= truncated.total + tail_upper.
    """

    truncated: EnergyBreakdown
    tail_exact: float
    tail_upper: float
    limit: float

    @property
    def bracket(self):
        return (self.truncated.total, self.truncated.total + self.tail_upper)


def mu_star_energy(depth: int) -> TruncatedEnergy:
    """Closed-form energy of build_mu_star(depth) and its truncation tail."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    r = 2.0**-0.5
    q = 2.0**-1.5
    s1 = r * (1.0 - r**depth) / (1.0 - r)  # sum of 2^(-k/2), k = 1..K
    s3 = q * (1.0 - q**depth) / (1.0 - q)  # sum of 2^(-3k/2)
    length = _C * s1
    kinetic = _C * (s1 - s3)
    tail_exact = _C * (2.0 * r ** (depth + 1) / (1.0 - r) - q ** (depth + 1) / (1.0 - q))
    tail_upper = 2.0 * _C * r ** (depth + 1) / (1.0 - r)
    return TruncatedEnergy(
        EnergyBreakdown(length, kinetic), tail_exact, tail_upper, MU_STAR_LIMIT_ENERGY
    )


def _check_regime(T, phi):
    scaled = T * phi**-1.5
    if scaled < CRITICAL_HORIZON - 1e-12:
        raise ValueError(
            f"outside the waiting regime: T*phi^(-3/2) = {scaled!r} < {CRITICAL_HORIZON}"
        )
    return scaled


def optimal_tree(T: float, phi: float = 1.0, offset: float = 0.0, depth: int = 8) -> TransportTree:
    """Depth-K truncation of the minimizer connecting phi*delta_offset to the
    uniform measure of flux phi on [-phi/2, phi/2] at horizon T.

    Requires T*phi^(-3/2) >= 1/4.  The tree waits at the (sheared) atom for
    T - phi^(3/2)/4, then runs the rescaled cascade; its branches end at
    t_end = T - phi^(3/2) (1/4 - t_K) < T.
    """
    if phi <= 0.0:
        raise ValueError("flux must be positive")
    _check_regime(T, phi)
    _check_depth(depth)
    base = rescale_mass_time(build_mu_star(depth), phi)
    wait = T - phi**1.5 * CRITICAL_HORIZON
    if wait > 1e-15:
        base = prepend_stationary(base, wait)
    if offset != 0.0:
        base = shear(base, offset, T)
    return base


def optimal_tree_energy(T: float, phi: float = 1.0, offset: float = 0.0, depth: int = 8) -> TruncatedEnergy:
    """Closed-form energy of optimal_tree(...) with exact truncation tail.

    The limit (infinite depth) value is phi^(3/2)/(2 - sqrt(2)) + T + phi*offset^2/T.
    """
    if phi <= 0.0:
        raise ValueError("flux must be positive")
    _check_regime(T, phi)
    base = mu_star_energy(depth)
    tau = phi**1.5
    wait = T - tau * CRITICAL_HORIZON
    t_end = T - tau * (CRITICAL_HORIZON - branching_time(depth))
    length = wait + tau * base.truncated.length_term
    kinetic = tau * base.truncated.kinetic_term + phi * offset**2 * t_end / T**2
    limit = tau * CASCADE_CONSTANT + T + phi * offset**2 / T
    shear_tail = phi * offset**2 * (T - t_end) / T**2
    return TruncatedEnergy(
        EnergyBreakdown(length, kinetic),
        tau * base.tail_exact + shear_tail,
        tau * base.tail_upper + shear_tail,
        limit,
    )


def select_branch_count(T: float):
    """Optimal number of stems for the symmetric two-sided problem at horizon T.

    Minimizes n -> n^(-1/2)/(2-sqrt(2)) + n*T over positive integers by direct
    comparison of the floor/ceil neighbors of the continuous minimizer
    x_opt = (2T(2-sqrt(2)))^(-2/3); exact ties resolve to the smaller count.
    Returns (N, x_opt).
    """
    if T < CRITICAL_HORIZON - 1e-12:
        raise ValueError(f"horizon {T!r} below the analyzed regime {CRITICAL_HORIZON}")
    x_opt = (2.0 * T * (2.0 - SQRT2)) ** (-2.0 / 3.0)
    lo = max(1, math.floor(x_opt))
    candidates = {lo, lo + 1, 1}
    cost = lambda n: n**-0.5 * CASCADE_CONSTANT + n * T
    best = min(sorted(candidates), key=lambda n: (cost(n), n))
    return best, x_opt


def branch_count_thresholds():
    """Horizon thresholds for the stem count, by the two available readings.

    ``integer_switch``: where the direct integer minimization changes N=2 to
    N=1 (exact value 1/2).  ``x_opt_crossing``: where the continuous minimizer
    x_opt crosses 2, namely 1/(4(2*sqrt(2)-2)).  The two disagree; the library
    selects by direct integer minimization.
    """
    return {
        "integer_switch": 0.5,
        "x_opt_crossing": 1.0 / (4.0 * (2.0 * SQRT2 - 2.0)),
    }


def symmetric_minimizer(T: float, depth: int = 8) -> TransportTree:
    """Symmetric minimizer for uniform-to-uniform transport on [-T, T].

    N = select_branch_count(T) translated copies of the one-sided optimal tree
    (flux 1/N each, rooted at the interval barycenters), mirrored in time
    about t = 0.  Total energy converges to 2 (N^(-1/2)/(2-sqrt(2)) + N T).
    """
    n, _ = select_branch_count(T)
    piece = optimal_tree(T, 1.0 / n, 0.0, depth)
    t_end = piece.horizon[1]
    centers = [-0.5 + (i + 0.5) / n for i in range(n)]
    forward = merge([translate(piece, c) for c in centers], (0.0, t_end))
    return merge([mirror_time(forward), forward], (-t_end, t_end))


def symmetric_minimizer_energy(T: float, depth: int = 8) -> TruncatedEnergy:
    """Closed-form energy of symmetric_minimizer(...) with truncation tail."""
    n, _ = select_branch_count(T)
    piece = optimal_tree_energy(T, 1.0 / n, 0.0, depth)
    scale = 2.0 * n
    return TruncatedEnergy(
        EnergyBreakdown(scale * piece.truncated.length_term, scale * piece.truncated.kinetic_term),
        scale * piece.tail_exact,
        scale * piece.tail_upper,
        scale * piece.limit,
    )
