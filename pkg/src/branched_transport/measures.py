"""One-dimensional measures with exact squared Wasserstein-2 distances.

Two measure kinds are supported: finite sums of positive point masses
(`AtomicMeasure`) and a constant density on an interval (`UniformSegment`).
Squared W2 costs are computed through the monotone quantile coupling, piece
by piece in closed form; no numerical quadrature is involved, so equal-mass
inputs with exact dyadic data produce exact costs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative tolerance for treating two total masses as equal fluxes.
MASS_RTOL = 1e-12
# Atoms closer than this (relative to max(1, |x|)) are merged on construction.
MERGE_TOL = 1e-14


class MassMismatchError(ValueError):
    """Raised when a transport cost is requested between unequal fluxes."""


def _merge_sorted_atoms(positions, masses):
    """Merge consecutive atoms whose positions coincide up to MERGE_TOL."""
    out_x = [positions[0]]
    out_m = [masses[0]]
    for x, m in zip(positions[1:], masses[1:]):
        if x - out_x[-1] <= MERGE_TOL * max(1.0, abs(x)):
            out_m[-1] += m
        else:
            out_x.append(x)
            out_m.append(m)
    return np.array(out_x), np.array(out_m)


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite positive atomic measure on the line.

    Atoms are canonicalized on construction: sorted by position, with
    coinciding positions merged (masses summed).
    """

    positions: np.ndarray
    masses: np.ndarray

    def __init__(self, atoms):
        atoms = list(atoms)
        if not atoms:
            raise ValueError("atomic measure needs at least one atom")
        masses = np.array([float(m) for m, _ in atoms])
        positions = np.array([float(x) for _, x in atoms])
        if not (np.all(np.isfinite(masses)) and np.all(np.isfinite(positions))):
            raise ValueError("atom masses and positions must be finite")
        if np.any(masses <= 0.0):
            raise ValueError("atom masses must be positive")
        order = np.argsort(positions, kind="stable")
        positions, masses = _merge_sorted_atoms(positions[order], masses[order])
        positions.flags.writeable = False
        masses.flags.writeable = False
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def dirac(cls, mass, position):
        return cls([(mass, position)])

    @classmethod
    def from_arrays(cls, masses, positions):
        return cls(zip(masses, positions))

    @property
    def atoms(self):
        """Atoms as (mass, position) pairs, sorted by position."""
        return list(zip(self.masses.tolist(), self.positions.tolist()))

    def __len__(self):
        return len(self.masses)

    def translate(self, c):
        return AtomicMeasure.from_arrays(self.masses, self.positions + c)

    def dilate(self, lam):
        return AtomicMeasure.from_arrays(self.masses, self.positions * lam)


@dataclass(frozen=True)
class UniformSegment:
    """Measure with constant density mass/width on [center-width/2, center+width/2]."""

    center: float
    width: float
    mass: float = 1.0

    def __post_init__(self):
        if not (self.width > 0.0 and self.mass > 0.0):
            raise ValueError("uniform segment needs positive width and mass")

    @property
    def density(self):
        return self.mass / self.width

    @property
    def left(self):
        return self.center - 0.5 * self.width

    @property
    def right(self):
        return self.center + 0.5 * self.width

    def to_atoms(self, n):
        """Midpoint discretization into n equal atoms (refinement oracle)."""
        edges = self.left + self.width * np.arange(n + 1) / n
        mids = 0.5 * (edges[:-1] + edges[1:])
        return AtomicMeasure.from_arrays(np.full(n, self.mass / n), mids)


def total_mass(measure):
    """Total mass of an atomic measure or uniform segment."""
    if isinstance(measure, AtomicMeasure):
        return float(measure.masses.sum())
    return float(measure.mass)


def barycenter(measure):
    """Mass-weighted mean position."""
    if isinstance(measure, AtomicMeasure):
        return float(np.dot(measure.masses, measure.positions) / measure.masses.sum())
    return float(measure.center)


def _check_equal_mass(ma, mb):
    if abs(ma - mb) > MASS_RTOL * max(ma, mb):
        raise MassMismatchError(
            f"unequal fluxes: {ma!r} vs {mb!r} (relative tolerance {MASS_RTOL})"
        )


def w2_atomic_atomic(a: AtomicMeasure, b: AtomicMeasure) -> float:
    """Exact squared W2 distance between two equal-mass atomic measures.

    Uses the monotone coupling: sweep both cumulative-mass profiles with two
    pointers; every common mass slab of size m moving from x to y contributes
    m*(x-y)^2.
    """
    _check_equal_mass(total_mass(a), total_mass(b))
    cost = 0.0
    i = j = 0
    ra = a.masses[0]
    rb = b.masses[0]
    xa, xb = a.positions, b.positions
    while True:
        m = ra if ra < rb else rb
        d = xa[i] - xb[j]
        cost += m * d * d
        ra -= m
        rb -= m
        if ra <= 0.0:
            i += 1
            if i == len(a.masses):
                break
            ra = a.masses[i]
        if rb <= 0.0:
            j += 1
            if j == len(b.masses):
                break
            rb = b.masses[j]
    return cost


def w2_atomic_uniform(a: AtomicMeasure, u: UniformSegment) -> float:
    """Exact squared W2 distance between an atomic measure and a uniform segment.

    The monotone coupling sends atom j (mass m_j) to the consecutive
    sub-segment of u carrying mass m_j.  Each piece costs
    rho * [((hi-x)^3 - (lo-x)^3) / 3], the exact cubic antiderivative.
    """
    ma = total_mass(a)
    _check_equal_mass(ma, total_mass(u))
    rho = u.density
    cost = 0.0
    lo = u.left
    cum = 0.0
    last = len(a.masses) - 1
    for j, (m, x) in enumerate(zip(a.masses, a.positions)):
        cum += m
        hi = u.right if j == last else u.left + u.width * (cum / u.mass)
        dhi = hi - x
        dlo = lo - x
        cost += rho * (dhi * dhi * dhi - dlo * dlo * dlo) / 3.0
        lo = hi
    return cost


def w2(a, b) -> float:
    """Squared W2 between any supported pair of equal-mass measures."""
    if isinstance(a, AtomicMeasure) and isinstance(b, AtomicMeasure):
        return w2_atomic_atomic(a, b)
    if isinstance(a, AtomicMeasure) and isinstance(b, UniformSegment):
        return w2_atomic_uniform(a, b)
    if isinstance(a, UniformSegment) and isinstance(b, AtomicMeasure):
        return w2_atomic_uniform(b, a)
    raise TypeError(f"unsupported measure pair: {type(a).__name__}, {type(b).__name__}")
