"""Finite affine branched-transport trees and their energy.

A tree is a finite set of mass-carrying affine branches on a time horizon
[a, b].  Its cost is

    total = sum_i (t1_i - t0_i)  +  sum_i  mass_i * (x1_i - x0_i)^2 / (t1_i - t0_i),

the branch-count (length) term plus the kinetic term; branches are affine, so
the time integral of mass * speed^2 is exact.  The module also provides the
validity report (junction conservation, interior overlaps, trace
monotonicity), time slices as atomic measures, and the two energy-preserving
transforms used throughout: the shear by a terminal offset and the joint
mass/time/space rescaling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .measures import AtomicMeasure, w2_atomic_atomic

# Two endpoints are the same junction node iff times differ by <= NODE_TOL and
# positions by <= NODE_TOL * max(1, |x|).  Constructions are exact dyadic; the
# tolerance only absorbs rounding.
NODE_TOL = 1e-12
# |final-trace barycenter| above this rejects a shear.
SHEAR_BARYCENTER_TOL = 1e-9


class InvalidTreeError(ValueError):
    """Raised when an operation requires a structurally valid tree."""


@dataclass(frozen=True)
class Branch:
    """One affine branch: mass `mass` travelling x0 -> x1 during [t0, t1]."""

    mass: float
    t0: float
    t1: float
    x0: float
    x1: float

    def __post_init__(self):
        if not (self.t1 > self.t0):
            raise InvalidTreeError(f"branch needs t1 > t0, got [{self.t0}, {self.t1}]")
        if not (self.mass > 0.0):
            raise InvalidTreeError(f"branch mass must be positive, got {self.mass}")
        if not all(np.isfinite(v) for v in (self.mass, self.t0, self.t1, self.x0, self.x1)):
            raise InvalidTreeError("branch fields must be finite")

    @property
    def speed(self):
        return (self.x1 - self.x0) / (self.t1 - self.t0)

    def position_at(self, s):
        return self.x0 + (s - self.t0) * self.speed


@dataclass(frozen=True)
class EnergyBreakdown:
    """Length and kinetic parts of the tree cost; total is their exact sum."""

    length_term: float
    kinetic_term: float

    @property
    def total(self):
        return self.length_term + self.kinetic_term


class TransportTree:
    """Immutable finite affine tree on a horizon (a, b).

    Branch data is stored columnwise (numpy arrays) so that energy, traces and
    transforms stay vectorized for trees with millions of branches.
    """

    __slots__ = ("masses", "t0", "t1", "x0", "x1", "horizon")

    def __init__(self, branches, horizon):
        a, b = float(horizon[0]), float(horizon[1])
        if not a < b:
            raise InvalidTreeError(f"horizon needs a < b, got ({a}, {b})")
        if isinstance(branches, tuple) and len(branches) == 5:
            masses, t0, t1, x0, x1 = (np.asarray(c, dtype=float) for c in branches)
        else:
            branches = list(branches)
            if not branches:
                raise InvalidTreeError("tree needs at least one branch")
            masses = np.array([br.mass for br in branches])
            t0 = np.array([br.t0 for br in branches])
            t1 = np.array([br.t1 for br in branches])
            x0 = np.array([br.x0 for br in branches])
            x1 = np.array([br.x1 for br in branches])
        if masses.size == 0:
            raise InvalidTreeError("tree needs at least one branch")
        if np.any(masses <= 0.0) or np.any(t1 <= t0):
            raise InvalidTreeError("branches need positive mass and t1 > t0")
        if np.any(t0 < a - NODE_TOL) or np.any(t1 > b + NODE_TOL):
            raise InvalidTreeError("branch outside the time horizon")
        for arr in (masses, t0, t1, x0, x1):
            arr.flags.writeable = False
        self.masses, self.t0, self.t1, self.x0, self.x1 = masses, t0, t1, x0, x1
        self.horizon = (a, b)

    # -- basic views ---------------------------------------------------------

    def __len__(self):
        return len(self.masses)

    def branches(self):
        """Branches as dataclass views (use sparingly on huge trees)."""
        return [
            Branch(m, a, b, p, q)
            for m, a, b, p, q in zip(self.masses, self.t0, self.t1, self.x0, self.x1)
        ]

    def _replace(self, masses=None, t0=None, t1=None, x0=None, x1=None, horizon=None):
        return TransportTree(
            (
                self.masses if masses is None else masses,
                self.t0 if t0 is None else t0,
                self.t1 if t1 is None else t1,
                self.x0 if x0 is None else x0,
                self.x1 if x1 is None else x1,
            ),
            self.horizon if horizon is None else horizon,
        )

    def boundary_mass(self):
        """Total flux carried by the tree (mass of the initial trace)."""
        from .measures import total_mass

        return total_mass(trace_at(self, self.horizon[0]))


def energy(tree: TransportTree) -> EnergyBreakdown:
    """Length and kinetic cost of a tree; exact for affine branches."""
    dt = tree.t1 - tree.t0
    dx = tree.x1 - tree.x0
    length = float(dt.sum())
    kinetic = float((tree.masses * dx * dx / dt).sum())
    return EnergyBreakdown(length, kinetic)


def trace_at(tree: TransportTree, s) -> AtomicMeasure:
    """Time slice of the tree at s as an atomic measure.

    A branch owns the half-open interval [t0, t1); the final horizon time is
    owned by the branches ending there, so traces stay single-valued at
    branching times.
    """
    a, b = tree.horizon
    if not (a - NODE_TOL <= s <= b + NODE_TOL):
        raise ValueError(f"time {s} outside horizon [{a}, {b}]")
    if s >= b - NODE_TOL:
        alive = np.abs(tree.t1 - b) <= NODE_TOL
        s = b
    else:
        alive = (tree.t0 <= s + NODE_TOL) & (s < tree.t1 - NODE_TOL)
    if not np.any(alive):
        raise InvalidTreeError(f"no branch alive at time {s}")
    dt = tree.t1[alive] - tree.t0[alive]
    pos = tree.x0[alive] + (s - tree.t0[alive]) * (tree.x1[alive] - tree.x0[alive]) / dt
    return AtomicMeasure.from_arrays(tree.masses[alive], pos)


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "conservation" | "overlap" | "monotonicity"
    time: float
    detail: str
    magnitude: float = 0.0


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self):
        return not self.violations

    def by_kind(self, kind):
        return [v for v in self.violations if v.kind == kind]


def _cluster(values, tol_fn):
    """Group sorted indices of `values` into clusters of pairwise-close runs."""
    groups = []
    current = [0]
    for k in range(1, len(values)):
        if values[k] - values[current[0]] <= tol_fn(values[k]):
            current.append(k)
        else:
            groups.append(current)
            current = [k]
    groups.append(current)
    return groups


def validate(tree: TransportTree) -> ValidationReport:
    """Report junction-conservation, interior-overlap and monotonicity violations."""
    a, b = tree.horizon
    violations = []

    # Junction conservation: cluster branch endpoints into space-time nodes.
    times = np.concatenate([tree.t1, tree.t0])
    xs = np.concatenate([tree.x1, tree.x0])
    flows = np.concatenate([tree.masses, -tree.masses])  # + inflow, - outflow
    order = np.lexsort((xs, times))
    times, xs, flows = times[order], xs[order], flows[order]
    for tg in _cluster(times, lambda _t: NODE_TOL):
        t_node = times[tg[0]]
        if t_node <= a + NODE_TOL or t_node >= b - NODE_TOL:
            continue  # boundary traces are Dirichlet data, not junctions
        sub = sorted(tg, key=lambda k: xs[k])
        xs_sub = [xs[k] for k in sub]
        for xg in _cluster(xs_sub, lambda x: NODE_TOL * max(1.0, abs(x))):
            inflow = sum(max(flows[sub[k]], 0.0) for k in xg)
            outflow = sum(max(-flows[sub[k]], 0.0) for k in xg)
            if abs(inflow - outflow) > NODE_TOL * max(1.0, inflow + outflow):
                violations.append(
                    Violation(
                        "conservation",
                        float(t_node),
                        f"node (t={t_node!r}, x={xs_sub[xg[0]]!r}): "
                        f"inflow {inflow!r} != outflow {outflow!r}",
                        abs(inflow - outflow),
                    )
                )

    # Interior overlaps / order flips: sweep the event intervals.
    events = np.unique(np.concatenate([tree.t0, tree.t1]))
    for lo, hi in zip(events[:-1], events[1:]):
        if hi - lo <= 2 * NODE_TOL:
            continue
        alive = (tree.t0 <= lo + NODE_TOL) & (tree.t1 >= hi - NODE_TOL)
        if alive.sum() < 2:
            continue
        dt = tree.t1[alive] - tree.t0[alive]
        slope = (tree.x1[alive] - tree.x0[alive]) / dt
        p_lo = tree.x0[alive] + (lo - tree.t0[alive]) * slope
        p_hi = tree.x0[alive] + (hi - tree.t0[alive]) * slope
        order = np.lexsort((p_hi, p_lo))
        p_lo, p_hi = p_lo[order], p_hi[order]
        for k in range(len(p_lo) - 1):
            tol = NODE_TOL * max(1.0, abs(p_lo[k]))
            coincide_lo = p_lo[k + 1] - p_lo[k] <= tol
            if coincide_lo and abs(p_hi[k + 1] - p_hi[k]) <= tol:
                violations.append(
                    Violation(
                        "overlap",
                        float(lo),
                        f"branches coincide on [{lo!r}, {hi!r}] near x={p_lo[k]!r}",
                    )
                )
            elif p_hi[k] > p_hi[k + 1] + tol and not coincide_lo:
                cross = f"branch order flips on [{lo!r}, {hi!r}] near x={p_lo[k]!r}"
                violations.append(Violation("overlap", float(lo), cross))
                violations.append(Violation("monotonicity", float(lo), cross))

    return ValidationReport(tuple(violations))


# -- transforms ---------------------------------------------------------------


def _require_zero_based(tree, name):
    a, _b = tree.horizon
    if abs(a) > NODE_TOL:
        raise ValueError(f"{name} expects a tree on a horizon [0, T], got start {a!r}")


def shear(tree: TransportTree, offset, T) -> TransportTree:
    """Shift every trajectory by the decaying drift (1 - t/T) * offset.

    Requires a horizon [0, T] whose final trace has barycenter zero; under the
    additional property that the initial trace is centered as well (true for
    every construction here), the total cost changes by exactly
    total_mass * offset^2 / T.
    """
    from .measures import barycenter

    _require_zero_based(tree, "shear")
    a, b = tree.horizon
    if abs(b - T) > NODE_TOL:
        raise ValueError(f"shear expects horizon end {T!r}, tree ends at {b!r}")
    bary = barycenter(trace_at(tree, b))
    if abs(bary) > SHEAR_BARYCENTER_TOL:
        raise ValueError(
            "shear precondition violated: final trace must have barycenter 0, "
            f"got {bary!r}"
        )
    return tree._replace(
        x0=tree.x0 + (1.0 - tree.t0 / T) * offset,
        x1=tree.x1 + (1.0 - tree.t1 / T) * offset,
    )


def rescale_mass_time(tree: TransportTree, phi) -> TransportTree:
    """Scale masses by phi, positions by phi, times by phi^(3/2).

    The tree cost scales by exactly phi^(3/2).
    """
    if not phi > 0.0:
        raise ValueError(f"mass scale must be positive, got {phi!r}")
    _require_zero_based(tree, "rescale_mass_time")
    tau = phi**1.5
    return TransportTree(
        (tree.masses * phi, tree.t0 * tau, tree.t1 * tau, tree.x0 * phi, tree.x1 * phi),
        (0.0, tree.horizon[1] * tau),
    )


def translate(tree: TransportTree, c) -> TransportTree:
    """Shift all positions by c (cost is translation invariant)."""
    return tree._replace(x0=tree.x0 + c, x1=tree.x1 + c)


def mirror_time(tree: TransportTree) -> TransportTree:
    """Reflect the tree about t = 0: horizon [0, T] becomes [-T, 0]."""
    a, b = tree.horizon
    return TransportTree(
        (tree.masses, -tree.t1, -tree.t0, tree.x1, tree.x0), (-b, -a)
    )


def merge(trees, horizon) -> TransportTree:
    """Union of branch sets on a common horizon."""
    cols = tuple(
        np.concatenate([getattr(t, name) for t in trees])
        for name in ("masses", "t0", "t1", "x0", "x1")
    )
    return TransportTree(cols, horizon)


def prepend_stationary(tree: TransportTree, tau) -> TransportTree:
    """Wait for tau at the initial atom, then run the tree; cost grows by exactly tau."""
    if not tau > 0.0:
        raise ValueError(f"waiting time must be positive, got {tau!r}")
    _require_zero_based(tree, "prepend_stationary")
    start = trace_at(tree, 0.0)
    if len(start) != 1:
        raise ValueError("prepend_stationary needs a single initial atom")
    (m, x) = start.masses[0], start.positions[0]
    return TransportTree(
        (
            np.concatenate([[m], tree.masses]),
            np.concatenate([[0.0], tree.t0 + tau]),
            np.concatenate([[tau], tree.t1 + tau]),
            np.concatenate([[x], tree.x0]),
            np.concatenate([[x], tree.x1]),
        ),
        (0.0, tree.horizon[1] + tau),
    )


def holder_check(tree: TransportTree, s, s_prime):
    """Check the square-root modulus of continuity between two traces.

    Returns (lhs, rhs, ok): lhs is the squared W2 distance of the two traces,
    rhs is total cost * |s - s'|, and ok means lhs <= rhs + 1e-12.
    """
    lhs = w2_atomic_atomic(trace_at(tree, s), trace_at(tree, s_prime))
    rhs = energy(tree).total * abs(s - s_prime)
    return lhs, rhs, lhs <= rhs + 1e-12


# -- JSON schema ---------------------------------------------------------------


def _fmt(v):
    return format(float(v), ".17g")


def to_json(tree: TransportTree, energy_breakdown: EnergyBreakdown | None = None) -> str:
    """Serialize to the tree schema with 17 significant digits per number."""
    a, b = tree.horizon
    rows = ",".join(
        '{"mass":%s,"t0":%s,"t1":%s,"x0":%s,"x1":%s}'
        % (_fmt(m), _fmt(u), _fmt(v), _fmt(p), _fmt(q))
        for m, u, v, p, q in zip(tree.masses, tree.t0, tree.t1, tree.x0, tree.x1)
    )
    out = '{"horizon":[%s,%s],"branches":[%s]' % (_fmt(a), _fmt(b), rows)
    if energy_breakdown is not None:
        out += ',"energy":{"length_term":%s,"kinetic_term":%s,"total":%s}' % (
            _fmt(energy_breakdown.length_term),
            _fmt(energy_breakdown.kinetic_term),
            _fmt(energy_breakdown.total),
        )
    return out + "}"


def from_json(text: str) -> TransportTree:
    """Parse the tree schema (extra keys such as "energy" are ignored)."""
    obj = json.loads(text)
    branches = [
        Branch(br["mass"], br["t0"], br["t1"], br["x0"], br["x1"])
        for br in obj["branches"]
    ]
    return TransportTree(branches, tuple(obj["horizon"]))
