"""Certified lower bounds on the branch-split ratio and the two-branch endgame.

For an N-way split of the unit flux, the quantity driving the branch-count
exclusion is

    alpha_N = inf { (1 - sum phi_i^3) / (1 - sum phi_i^(3/2)) : sum phi_i = 1 }.

An interior minimizer can use at most two distinct mass values (a first-order
exchange argument), which collapses the N-dimensional problem to the family
f_N(phi) of one small mass phi repeated N-1 times; the infimum over the
remaining spike [0, eta] is the limit value 2 because f_N increases there.
The certificate is then a grid minimum over [eta, 1/N] minus a Lipschitz
slack Lambda * delta / 2: a rigorous lower bound given the derivative bound.

Every chained inequality feeding eta and Lambda is re-verified here as a
sampled property check rather than assumed; `neq2_suite` covers the scalar
inequality that pins the two-branch split in half and the largest branching
horizon at 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import gap_grid_scan, ratio_grid_min
from .recursion import t_star_window

SQRT2 = math.sqrt(2.0)

# f_N is nondecreasing on [0, ETA] for every N in 2..6 (sampled check in
# monotone_region_eta), so the infimum there is the phi -> 0 limit 2.
ETA = 1.0 / 540.0
# Conservative bound on sup |f_N'| over [ETA, 1/N]; checked, not assumed.
LAMBDA_LIPSCHITZ = 1.2e5


class CertificationError(RuntimeError):
    """A certificate ingredient failed its verification."""


def a_of_t(T: float) -> float:
    """Shear-window parameter a = 3 sqrt(2) T / (sqrt(2) - 1)."""
    return 3.0 * SQRT2 * T / (SQRT2 - 1.0)


def critical_threshold(n: int) -> float:
    """Ratio level below which an N-way split at the critical horizon survives:
    6 / ((sqrt(2)-1)^2 (2 sqrt(N) + 1)^2)."""
    return 6.0 / ((SQRT2 - 1.0) ** 2 * (2.0 * math.sqrt(n) + 1.0) ** 2)


def f_ratio(n: int, phi):
    """Two-value split ratio with N-1 masses phi and one mass 1-(N-1) phi.

    Vectorized over phi; phi = 0 returns the limit value 2.
    """
    m = n - 1
    phi = np.asarray(phi, dtype=float)
    rest = 1.0 - m * phi
    num = 1.0 - m * phi**3 - rest**3
    den = 1.0 - m * phi * np.sqrt(phi) - rest * np.sqrt(np.abs(rest))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(phi == 0.0, 2.0, num / den)
    return float(out) if out.ndim == 0 else out


def g_denominator(n: int, phi):
    """Denominator g_N(phi) = 1 - (N-1) phi^(3/2) - (1-(N-1) phi)^(3/2)."""
    m = n - 1
    phi = np.asarray(phi, dtype=float)
    rest = 1.0 - m * phi
    out = 1.0 - m * phi * np.sqrt(phi) - rest * np.sqrt(np.abs(rest))
    return float(out) if out.ndim == 0 else out


def f_ratio_prime(n: int, phi):
    """Derivative of f_ratio in phi (singular at phi = 0)."""
    m = n - 1
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0.0):
        raise ValueError("derivative is singular at phi = 0")
    rest = 1.0 - m * phi
    g = g_denominator(n, phi)
    out = (3.0 * m / g) * (
        -(phi**2) + rest**2 - 0.5 * (-np.sqrt(phi) + np.sqrt(rest)) * f_ratio(n, phi)
    )
    return float(out) if out.ndim == 0 else out


def h_sign(n: int, phi):
    """Carries the sign of f_ratio_prime: -phi^2 + rest^2 + (sqrt(phi) - sqrt(rest)) f/2."""
    m = n - 1
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0.0):
        raise ValueError("h is singular at phi = 0")
    rest = 1.0 - m * phi
    out = -(phi**2) + rest**2 + 0.5 * (np.sqrt(phi) - np.sqrt(rest)) * f_ratio(n, phi)
    return float(out) if out.ndim == 0 else out


# -- the two-branch value: alpha_2 = 2 -----------------------------------------


@dataclass(frozen=True)
class Alpha2Certificate:
    value: float
    root_residuals: dict
    quartic_min_inside: float
    ratio_min_on_grid: float


def alpha2_certificate() -> Alpha2Certificate:
    """Exact value 2 for the two-way split, with its polynomial evidence.

    Checks that P(X) = 2 X^4 - 2 X^3 - X^2 + X vanishes at
    {-1/sqrt(2), 0, 1/sqrt(2), 1} to 1e-12, that P > 0 strictly inside
    (0, 1/sqrt(2)), and that the two-way ratio stays >= 2 on a grid of (0, 1/2].
    """
    P = lambda x: 2.0 * x**4 - 2.0 * x**3 - x**2 + x
    roots = {"-1/sqrt2": -1.0 / SQRT2, "0": 0.0, "1/sqrt2": 1.0 / SQRT2, "1": 1.0}
    residuals = {name: abs(P(x)) for name, x in roots.items()}
    if max(residuals.values()) > 1e-12:
        raise CertificationError(f"quartic root residuals too large: {residuals}")
    xs = np.linspace(0.0, 1.0 / SQRT2, 20001)[1:-1]
    quartic_min = float(np.min(P(xs)))
    if quartic_min <= 0.0:
        raise CertificationError(f"quartic not positive inside (0, 1/sqrt2): {quartic_min}")
    phis = np.linspace(0.0, 0.5, 20001)[1:]
    ratio_min = float(np.min(f_ratio(2, phis)))
    if ratio_min < 2.0 - 1e-12:
        raise CertificationError(f"two-way ratio dips below 2: {ratio_min}")
    return Alpha2Certificate(2.0, residuals, quartic_min, ratio_min)


# -- certificate ingredients -----------------------------------------------------


def monotone_region_eta(n: int) -> float:
    """Right endpoint 1/540 of the region where f_ratio(n, .) is nondecreasing.

    Verifies the two sufficient inequalities eta <= (8/(1+16(N-1)))^2 and
    eta <= 1/(108 (N-1)), the sampled chain bound
    h >= sqrt(phi)/36 - 3 (N-1) phi on (0, eta], and the conclusion h >= 0
    itself on the sampled points (the chain bound alone is weaker than the
    conclusion away from 0, so the sign is checked directly).
    """
    if not 2 <= n <= 6:
        raise ValueError("supported split counts are 2..6")
    m = n - 1
    if ETA > (8.0 / (1.0 + 16.0 * m)) ** 2 + 1e-15:
        raise CertificationError(f"eta exceeds the square-root region for N={n}")
    if ETA > 1.0 / (108.0 * m) + 1e-15:
        raise CertificationError(f"eta exceeds 1/(108 (N-1)) for N={n}")
    phis = np.geomspace(1e-8, ETA, 1000)
    h = h_sign(n, phis)
    chain = np.sqrt(phis) / 36.0 - 3.0 * m * phis
    if np.any(h < chain - 1e-12):
        raise CertificationError(f"h chain bound fails on (0, eta] for N={n}")
    if np.any(h < 0.0):
        raise CertificationError(f"f_ratio not nondecreasing on (0, eta] for N={n}")
    return ETA


@dataclass(frozen=True)
class LambdaReport:
    lambda_: float
    g_eta: float
    g_right: float
    g_right_conservative: float
    g_min: float
    derivative_bound: float


def lipschitz_Lambda(n: int) -> LambdaReport:
    """Conservative Lipschitz constant 1.2e5 for f_ratio on [eta, 1/N].

    g is increasing on [eta, 1/N] (its derivative vanishes only at 1/N), so
    its minimum sits at an endpoint; the right endpoint also gets the
    conservative surrogate 1 - N^(-1/2) - 2 N^(-3/2) <= g(1/N).  With
    g >= g_min, |numerator| <= 1 and the two bracket terms at most 1, the
    derivative obeys |f'| <= 3 (N-1)/g_min (1 + 1/(2 g_min)); the constant is
    accepted only if that bound stays below it.
    """
    if not 2 <= n <= 6:
        raise ValueError("supported split counts are 2..6")
    g_eta = g_denominator(n, ETA)
    g_right = g_denominator(n, 1.0 / n)
    g_right_cons = 1.0 - n**-0.5 - 2.0 * n**-1.5
    g_min = min(g_eta, g_right, g_right_cons)
    bound = 3.0 * (n - 1) / g_min * (1.0 + 0.5 / g_min)
    if bound > LAMBDA_LIPSCHITZ:
        raise CertificationError(
            f"derivative bound {bound:.3g} exceeds Lambda = {LAMBDA_LIPSCHITZ:.3g} for N={n}"
        )
    return LambdaReport(LAMBDA_LIPSCHITZ, g_eta, g_right, g_right_cons, g_min, bound)


# -- the certified bound ---------------------------------------------------------


@dataclass(frozen=True)
class CertifiedBound:
    """Rigorous lower bound on the N-way split ratio from a grid sweep.

    grid_min is min(2, raw_grid_min): the plateau value 2 covers [0, eta] by
    the monotone region, the raw sweep covers [eta, 1/N].  certified_lower
    subtracts the Lipschitz slack Lambda * delta / 2.
    """

    n: int
    grid_min: float
    grid_argmin: float
    raw_grid_min: float
    slack: float
    certified_lower: float
    threshold: float
    verdict: bool
    evaluations: int

    def row(self):
        return (
            self.n,
            self.grid_min,
            self.grid_argmin,
            self.slack,
            self.certified_lower,
            self.threshold,
            self.verdict,
        )


def certify_alpha_lower(n: int, delta: float = 1e-6) -> CertifiedBound:
    """Grid-certified lower bound on the N-way split ratio (N in 3..6).

    The sweep runs over [eta, 1/N] at step delta (right endpoint included
    exactly); the verdict compares against critical_threshold(n).  A false
    verdict is reported, never raised.
    """
    if not 3 <= n <= 6:
        raise ValueError("certification covers split counts 3..6")
    if not 0.0 < delta <= 1e-2:
        raise ValueError("delta must lie in (0, 1e-2]")
    eta = monotone_region_eta(n)
    lam = lipschitz_Lambda(n).lambda_
    raw, raw_arg, evals = ratio_grid_min(n, eta, 1.0 / n, delta)
    if raw <= 2.0:
        grid_min, argmin = raw, raw_arg
    else:
        grid_min, argmin = 2.0, 0.0  # spike plateau governs; attained as phi -> 0
    slack = 0.5 * lam * delta
    certified = grid_min - slack
    thr = critical_threshold(n)
    return CertifiedBound(
        n, grid_min, argmin, raw, slack, certified, thr, certified > thr, evals
    )


def certify_all(delta: float = 1e-6):
    return [certify_alpha_lower(n, delta) for n in (3, 4, 5, 6)]


# -- exhaustive oracle over the full mass simplex --------------------------------


def simplex_bruteforce_alpha(n: int, step: float):
    """Brute-force minimum of (1 - sum phi^3)/(1 - sum phi^(3/2)) on the simplex grid.

    Enumerates all nondecreasing mass vectors on the step grid (zeros allowed;
    vectors with denominator ~ 0, i.e. a single unit mass, are skipped).
    Returns (value, masses).  This is the independent check of the two-value
    reduction and of the certified bounds; cost grows quickly, keep step >= 1e-2.
    """
    if n < 2:
        raise ValueError("need at least two masses")
    if step < 1e-2 - 1e-15:
        raise ValueError("step below 1e-2 is needlessly expensive for the oracle")
    units = round(1.0 / step)
    best = math.inf
    best_parts = None

    def rec(left, parts, lo):
        nonlocal best, best_parts
        if len(parts) == n - 1:
            if left < lo:
                return
            p = [q / units for q in parts + [left]]
            den = 1.0 - math.fsum(v * math.sqrt(v) for v in p)
            if den <= 1e-9:
                return
            val = (1.0 - math.fsum(v**3 for v in p)) / den
            if val < best:
                best, best_parts = val, tuple(p)
            return
        nxt = len(parts) + 1
        for q in range(lo, left // (n - nxt + 1) + 1):
            rec(left - q, parts + [q], q)

    rec(units, [], 0)
    return best, best_parts


@dataclass(frozen=True)
class TwoValueReport:
    n: int
    alpha: float
    stationary_root: float
    root_residual: float
    argmin: tuple
    distinct_values: int
    passed: bool


def two_value_reduction_check(n: int, step: float = 2e-2) -> TwoValueReport:
    """Check the exchange argument behind the one-dimensional reduction.

    The stationarity polynomial X^4 - (alpha/2) X has a single positive
    critical point (alpha/8)^(1/3); the brute-force simplex argmin must take
    at most two distinct mass values (tolerance 1e-6).
    """
    alpha, argmin = simplex_bruteforce_alpha(n, step)
    root = (alpha / 8.0) ** (1.0 / 3.0)
    residual = abs(4.0 * root**3 - alpha / 2.0)
    xs = np.linspace(0.0, 2.0 * root, 101)[1:]
    deriv = 4.0 * xs**3 - alpha / 2.0
    one_crossing = np.all(deriv[xs < root * (1 - 1e-9)] < 0.0) and np.all(
        deriv[xs > root * (1 + 1e-9)] > 0.0
    )
    interior = [v for v in argmin if v > 1e-12]
    distinct = 1
    for a, b in zip(sorted(interior), sorted(interior)[1:]):
        if b - a > 1e-6:
            distinct += 1
    passed = residual <= 1e-12 and bool(one_crossing) and distinct <= 2
    return TwoValueReport(n, alpha, root, residual, tuple(argmin), distinct, passed)


# -- the two-branch endgame ------------------------------------------------------


def window_gap(T, phi):
    """L - R of the endgame inequality at horizon T and split mass phi."""
    a = a_of_t(np.asarray(T, dtype=float))
    phi = np.asarray(phi, dtype=float)
    w = (SQRT2 - 1.0) ** 2
    rest = 1.0 - phi
    L = 1.0 + 9.0 / (2.0 * a**2 * w) * phi * rest
    R = 3.0 / (a * w) * (1.0 - phi * np.sqrt(phi) - rest * np.sqrt(np.abs(rest)))
    out = L - R
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Neq2Report:
    """Checks pinning the two-branch split in half at horizon 1/4.

    Fields ending in `_residual` are worst absolute defects of exact
    identities on verification grids.  `psi_slope_margin` is the minimum over
    the shear window of the exact expression whose excess over 1 makes the
    window minimum nonincreasing; `endpoint_slope_constant` is its closed-form
    left-endpoint surrogate (expected ~ 1.02) and `endpoint_termwise_bound`
    the weaker all-termwise variant (< 1, reported for completeness, not used
    in any verdict).
    """

    a_minus: float
    a_max: float
    factorization_residual: float
    half_root_residual: float
    window_root_residual: float
    root_square_identity_residual: float
    endpoint_slope_constant: float
    endpoint_termwise_bound: float
    psi_slope_margin: float
    psi_values_monotone: bool
    psi_at_sqrt2: float
    psi_monotone_on_extended_window: bool  # numeric observation only
    gap_min: float
    gap_min_at: tuple
    near_equality_count: int
    near_equality_max_index_distance: tuple
    failures: tuple

    @property
    def passed(self):
        return not self.failures


def neq2_suite(n_psi: int = 1000, n_grid: int = 1000, gap_tol: float = 1e-9) -> Neq2Report:
    """Run every check of the two-branch endgame; see Neq2Report."""
    t_minus, t_star = t_star_window()
    a_minus = a_of_t(t_minus)
    a_max = a_of_t(t_star)
    failures = []

    def quartic(a, x):
        return 4.0 * x**4 - 4.0 * a * x**3 + 2.0 * (a * a - 2.0) * x**2 + 2.0 * a * x + (1.0 - a * a)

    # (a) factorization of the stationarity quartic
    A, X = np.meshgrid(
        np.linspace(a_minus, a_max, 101), np.linspace(0.0, 1.0 / SQRT2, 101), indexing="ij"
    )
    factored = 2.0 * (X**2 - 0.5) * (2.0 * X**2 - 2.0 * A * X + (A * A - 1.0))
    fact_res = float(np.max(np.abs(quartic(A, X) - factored)))
    if fact_res > 1e-12:
        failures.append(f"quartic factorization residual {fact_res:.3g}")
    half_res = float(
        np.max(
            np.abs(
                [quartic(np.linspace(a_minus, a_max, 101), s / SQRT2) for s in (-1.0, 1.0)]
            )
        )
    )
    if half_res > 1e-12:
        failures.append(f"quartic residual at +-1/sqrt(2): {half_res:.3g}")

    # (b), (c) window roots and the squared-root identity
    aa = np.linspace(a_minus, SQRT2, n_psi)
    uu = np.sqrt(np.clip(2.0 - aa**2, 0.0, None))
    x_minus = (aa - uu) / 2.0
    x_plus = (aa + uu) / 2.0
    root_res = float(max(np.max(np.abs(quartic(aa, x_minus))), np.max(np.abs(quartic(aa, x_plus)))))
    if root_res > 1e-12:
        failures.append(f"window root residual {root_res:.3g}")
    sq_res = float(np.max(np.abs(x_minus**2 - 0.5 * (1.0 - aa * uu))))
    if sq_res > 1e-12:
        failures.append(f"root square identity residual {sq_res:.3g}")

    # (d) slope-margin constants at the window's left endpoint
    u0 = math.sqrt(2.0 - a_minus**2)
    third = (3.0 / (4.0 * SQRT2)) * (1.0 - a_minus**2 * (2.0 - a_minus**2))
    endpoint_constant = (1.0 / (2.0 * SQRT2)) * ((a_minus**2 - 1.0) ** 1.5 + 1.0) + third
    termwise = (1.0 / (2.0 * SQRT2)) * ((1.0 - a_minus * u0) ** 1.5 + 1.0) + third
    if not 1.015 <= endpoint_constant <= 1.025:
        failures.append(f"endpoint slope constant {endpoint_constant!r} outside [1.015, 1.025]")
    x2 = x_minus**2
    margin = x_minus**3 + (1.0 - x2) ** 1.5 + (3.0 / aa) * x2 * (1.0 - x2)
    psi_margin = float(np.min(margin))
    if psi_margin <= 1.0:
        failures.append(f"slope margin {psi_margin!r} not above 1")

    # (e) the window minimum itself is nonincreasing and positive at sqrt(2)
    psi = window_gap(aa * (SQRT2 - 1.0) / (3.0 * SQRT2), x2)
    psi_monotone = bool(np.all(np.diff(psi) <= 1e-12))
    if not psi_monotone:
        failures.append("window minimum not nonincreasing on [a_minus, sqrt(2)]")
    psi_end = float(psi[-1])
    if psi_end <= 0.0:
        failures.append(f"window minimum at sqrt(2) not positive: {psi_end!r}")
    ext = np.linspace(1.0, SQRT2, n_psi)
    uu_ext = np.sqrt(np.clip(2.0 - ext**2, 0.0, None))
    x2_ext = ((ext - uu_ext) / 2.0) ** 2
    psi_ext = window_gap(ext * (SQRT2 - 1.0) / (3.0 * SQRT2), x2_ext)
    psi_ext_monotone = bool(np.all(np.diff(psi_ext) <= 1e-12))

    # (f) global grid: L >= R with near-equality only next to (1/4, 1/2)
    gap_min, t_at, phi_at, n_small, max_di, max_dj = gap_grid_scan(
        t_minus, t_star, n_grid, 0.0, 0.5, n_grid, gap_tol
    )
    if gap_min < -1e-12:
        failures.append(f"endgame gap negative: {gap_min!r} at (T={t_at!r}, phi={phi_at!r})")
    if n_small < 1:
        failures.append("corner equality not observed")
    if max(max_di, max_dj) > 1:
        failures.append(
            f"near-equality {max_di, max_dj} grid steps away from the corner"
        )

    return Neq2Report(
        a_minus,
        a_max,
        fact_res,
        half_res,
        root_res,
        sq_res,
        endpoint_constant,
        termwise,
        psi_margin,
        psi_monotone,
        psi_end,
        psi_ext_monotone,
        gap_min,
        (t_at, phi_at),
        n_small,
        (max_di, max_dj),
        tuple(failures),
    )
