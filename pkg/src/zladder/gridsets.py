"""Generalized Gram grid and the disconnected set systems G1, G2.

The grid equation is theta(t_nu(tau)) = pi*nu + tau with tau in [-pi, pi];
tau = 0 gives the classical Gram points.  theta is smooth and strictly
increasing on the working range, so every grid point is found by Newton
iteration started from the Lambert-W inverse of the theta main term, with a
bisection safeguard for the rare step that leaves its bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .intervals import IntervalCollection
from .rscore import TWO_PI, theta, theta_deriv

#: Upper end of the validated working range.
T_MAX = 1.0e8

#: Lower end for grid solves.  The theta asymptotics are still ~1e-11 accurate
#: here, which admits the classical Gram points starting at t ~ 17.8.
GRID_T_MIN = 10.0


class SolverError(RuntimeError):
    """Grid-point solve failed to converge; message carries the bracket."""


@dataclass(frozen=True)
class GramLikePoint:
    """One solution t_nu(tau) of theta(t) = pi*nu + tau."""

    nu: int
    tau: float
    t: float


@dataclass(frozen=True)
class WindowSpec:
    """Observation window [T, T+H]; H defaults to T^(1/6 + 2*epsilon)."""

    T: float
    epsilon: float = 0.05
    H_override: float | None = None

    def __post_init__(self):
        if self.T < 1.0e3:
            raise ValueError("window requires T >= 1e3")
        if not 0.0 < self.epsilon < 1.0 / 12.0:
            raise ValueError("epsilon must lie in (0, 1/12)")
        if self.H_override is not None and self.H_override <= 0:
            raise ValueError("H_override must be positive")
        if self.T + self.H > T_MAX:
            raise ValueError(f"window exceeds validated range (T + H <= {T_MAX:g})")

    @property
    def H(self) -> float:
        if self.H_override is not None:
            return float(self.H_override)
        return float(self.T ** (1.0 / 6.0 + 2.0 * self.epsilon))


# ---------------------------------------------------------------------------
# theta inversion
# ---------------------------------------------------------------------------

def _theta_initial_guess(target):
    """Invert the theta main term: (t/2) ln(t/(2 pi e)) = target + pi/8."""
    y = np.asarray(target, dtype=float) + math.pi / 8.0
    w = np.real(lambertw(y / (math.pi * math.e)))
    return TWO_PI * np.exp(w + 1.0)


def invert_theta(targets, tol: float | None = None, max_iter: int = 30):
    """Vectorized safeguarded Newton solve of theta(t) = target.

    ``tol`` is the residual tolerance in theta units; the default scales with
    the solution as 1e-10 * t, which sits above double rounding of theta
    throughout the validated range.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    theta_min = theta(GRID_T_MIN)
    if np.any(targets < theta_min):
        raise ValueError(f"target below theta({GRID_T_MIN:g}) = {theta_min:.6f}")
    t = np.clip(_theta_initial_guess(targets), GRID_T_MIN, None)
    lo = np.full_like(t, GRID_T_MIN)
    hi = np.full_like(t, T_MAX * 1.01)
    tol_arr = None
    for _ in range(max_iter):
        resid = theta(t) - targets
        tol_arr = (1e-10 * t) if tol is None else np.full_like(t, tol)
        done = np.abs(resid) <= tol_arr
        if np.all(done):
            return t
        # monotonicity keeps the bracket shrinking
        hi = np.where(resid > 0, np.minimum(hi, t), hi)
        lo = np.where(resid < 0, np.maximum(lo, t), lo)
        step = resid / theta_deriv(t)
        nxt = t - step
        outside = (nxt <= lo) | (nxt >= hi)
        nxt = np.where(outside, 0.5 * (lo + hi), nxt)
        t = np.where(done, t, nxt)
    resid = theta(t) - targets
    bad = np.abs(resid) > tol_arr
    idx = int(np.argmax(bad))
    raise SolverError(
        f"theta solve did not converge for target {targets[idx]!r}; "
        f"bracket [{lo[idx]!r}, {hi[idx]!r}], residual {resid[idx]!r}"
    )


def solve_grid_point(nu: int, tau: float, tol: float | None = None) -> GramLikePoint:
    """Solve theta(t) = pi*nu + tau for one grid point."""
    if not -math.pi <= tau <= math.pi:
        raise ValueError("tau must lie in [-pi, pi]")
    if tol is not None and tol <= 0:
        raise ValueError("tol must be positive")
    target = math.pi * nu + tau
    t = float(invert_theta(np.array([target]), tol)[0])
    return GramLikePoint(nu=nu, tau=float(tau), t=t)


def grid_range(w: WindowSpec) -> list[GramLikePoint]:
    """All classical grid points t_nu (tau = 0) with T <= t_nu <= T + H."""
    nu_lo = int(math.ceil(theta(w.T) / math.pi))
    nu_hi = int(math.floor(theta(w.T + w.H) / math.pi))
    if nu_hi < nu_lo:
        return []
    nus = np.arange(nu_lo, nu_hi + 1)
    ts = invert_theta(math.pi * nus)
    keep = (ts >= w.T) & (ts <= w.T + w.H)
    return [GramLikePoint(int(nu), 0.0, float(t)) for nu, t in zip(nus[keep], ts[keep])]


# ---------------------------------------------------------------------------
# set systems
# ---------------------------------------------------------------------------

def _build_g(w: WindowSpec, half_width: float, parity: int, label: str) -> IntervalCollection:
    if not 0.0 < half_width <= math.pi / 2.0:
        raise ValueError("half-width must lie in (0, pi/2]")
    points = [g for g in grid_range(w) if g.nu % 2 == parity]
    if not points:
        return IntervalCollection((), label, (w.T, w.T + w.H))
    nus = np.array([g.nu for g in points])
    los = invert_theta(math.pi * nus - half_width)
    his = invert_theta(math.pi * nus + half_width)
    window = (min(w.T, float(los[0])), max(w.T + w.H, float(his[-1])))
    return IntervalCollection(tuple(zip(los, his)), label, window)


def build_g1(w: WindowSpec, x: float) -> IntervalCollection:
    """G1(x; T, H): one interval (t_2nu(-x), t_2nu(x)) per even grid point."""
    return _build_g(w, x, 0, "G1")


def build_g2(w: WindowSpec, y: float) -> IntervalCollection:
    """G2(y; T, H): odd-indexed counterpart of build_g1."""
    return _build_g(w, y, 1, "G2")


# ---------------------------------------------------------------------------
# sign partition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignPartition:
    pos: IntervalCollection
    neg: IntervalCollection
    gap_measure: float
    warnings: tuple


def sign_partition(c: IntervalCollection, f, root_tol: float = 1e-6) -> SignPartition:
    """Split ``c`` into subsets where f > 0 and f < 0.

    f must accept numpy arrays.  Roots of f are located by a uniform pre-scan
    with step (local zero gap)/8 = 2*pi/(8 ln t), followed by vectorized
    bisection; each root is excised inside a gap, and the total gap measure is
    kept at or below root_tol * measure(c).  Intervals whose scan resolves no
    sign at all are reported as suspected root clusters.
    """
    if len(c) == 0:
        raise ValueError("sign_partition requires a nonempty collection")
    if not 0 < root_tol < 1:
        raise ValueError("root_tol must lie in (0, 1)")
    total = c.measure()

    # scan nodes for all intervals at once
    nodes, owner = [], []
    for i, (lo, hi) in enumerate(c.intervals):
        step = TWO_PI / (8.0 * math.log(0.5 * (lo + hi)))
        k = max(2, int(math.ceil((hi - lo) / step)) + 1)
        xs = np.linspace(lo, hi, k)
        nodes.append(xs)
        owner.append(np.full(k, i))
    nodes = np.concatenate(nodes)
    owner = np.concatenate(owner)
    vals = np.asarray(f(nodes))

    flips = (np.sign(vals[:-1]) * np.sign(vals[1:]) < 0) & (owner[:-1] == owner[1:])
    n_roots = int(np.count_nonzero(flips))
    # width budget per root gap
    gap_w = root_tol * total / max(1, n_roots)

    a = nodes[:-1][flips].copy()
    b = nodes[1:][flips].copy()
    fa = vals[:-1][flips].copy()
    while np.any(b - a > gap_w):
        m = 0.5 * (a + b)
        fm = np.asarray(f(m))
        left = fa * fm <= 0
        b = np.where(left, m, b)
        a = np.where(left, a, m)
        fa = np.where(left, fa, fm)

    flip_owner = owner[:-1][flips]
    warnings = []
    pos_ivs, neg_ivs = [], []
    gap_measure = 0.0
    for i, (lo, hi) in enumerate(c.intervals):
        mask = owner == i
        xs = nodes[mask]
        vs = vals[mask]
        sel = flip_owner == i
        cuts_lo = a[sel]
        cuts_hi = b[sel]
        bounds = [lo] + [v for pair in zip(cuts_lo, cuts_hi) for v in pair] + [hi]
        gap_measure += float(np.sum(cuts_hi - cuts_lo))
        for j in range(0, len(bounds) - 1, 2):
            slo, shi = bounds[j], bounds[j + 1]
            if shi - slo <= 0:
                continue
            inside = (xs > slo) & (xs < shi)
            if np.any(inside):
                sgn = float(np.sign(np.median(np.sign(vs[inside]))))
            else:
                sgn = float(np.sign(f(np.array([0.5 * (slo + shi)]))[0]))
            if sgn > 0:
                pos_ivs.append((slo, shi))
            elif sgn < 0:
                neg_ivs.append((slo, shi))
            else:
                warnings.append(
                    f"unresolved sign on ({slo!r}, {shi!r}); suspected root cluster"
                )
    pos = IntervalCollection(tuple(pos_ivs), "pos-part", c.window) if pos_ivs else \
        IntervalCollection((), "pos-part", c.window)
    neg = IntervalCollection(tuple(neg_ivs), "neg-part", c.window) if neg_ivs else \
        IntervalCollection((), "neg-part", c.window)
    return SignPartition(pos, neg, gap_measure, tuple(warnings))
