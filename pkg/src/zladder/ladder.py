"""Computable models of the Jacob's ladder phi_1, prime counting, and mirrors.

The exact ladder is defined elsewhere through a nonlinear integral equation;
here it is represented by two surrogates:

* an asymptotic model  phi_1(t) = t - (1 - gamma) * li(t), capturing the
  global geometry t - phi_1(t) ~ (1 - gamma) * pi(t) (the separation law);
* an ODE model whose derivative is exactly Z~^2(t), built by cumulative
  high-order quadrature from an anchor supplied by the asymptotic model.
  This is the model under which the Z~^2 change of variables is an identity.

Both models are strictly monotone (the ODE model non-strictly at the isolated
zeros of Z), immutable after construction, and invertible by bisection plus
Newton polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expi

from . import rscore
from .intervals import IntervalCollection

EULER_GAMMA = float(np.euler_gamma)

# Gauss-Legendre 7 on [-1, 1]: for panels up to 0.125 wide the quadrature
# error on Z~^2 (oscillation rate ~ln(t/2pi) rad per unit) is below 1e-15,
# so the cumulative table and the partial panels agree to rounding.
_GL7_NODES = np.array([
    -0.949107912342759, -0.741531185599394, -0.405845151377397, 0.0,
    0.405845151377397, 0.741531185599394, 0.949107912342759,
])
_GL7_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


class LadderRangeError(ValueError):
    """Requested point falls outside a ladder model's validated range."""


def euler_constant() -> float:
    """Euler's constant gamma = 0.5772156649..."""
    return EULER_GAMMA


def li(t):
    """Principal-value logarithmic integral li(t) = Ei(ln t), li(2) ~ 1.045.

    Defined for t > 0, t != 1 (the PV through the ln-singularity at t = 1 is
    what expi provides); only t >= 10 is exercised here.
    """
    t = np.asarray(t, dtype=float)
    out = expi(np.log(t))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# prime counting
# ---------------------------------------------------------------------------

@dataclass
class PrimeCounter:
    """Exact prime counting by sieve up to ``limit`` (Li-approx as fallback)."""

    limit: int = 2_000_000
    method: str = "sieve"

    def __post_init__(self):
        if self.method not in ("sieve", "Li-approx"):
            raise ValueError(f"unknown method {self.method!r}")
        self._cum = None

    def _ensure_sieve(self):
        if self._cum is None:
            is_prime = np.ones(self.limit + 1, dtype=bool)
            is_prime[:2] = False
            for p in range(2, int(self.limit ** 0.5) + 1):
                if is_prime[p]:
                    is_prime[p * p:: p] = False
            self._cum = np.cumsum(is_prime)

    def count(self, t: float) -> int:
        if t < 2:
            return 0
        if self.method == "Li-approx":
            # error model: |li(t) - pi(t)| = O(sqrt(t) ln t) under RH
            return int(round(li(t)))
        if t > self.limit:
            raise ValueError(f"t={t} exceeds sieve limit {self.limit}")
        self._ensure_sieve()
        return int(self._cum[int(math.floor(t))])


def pi_count(t: float, pc: PrimeCounter | None = None) -> int:
    """Number of primes <= t."""
    return (pc or PrimeCounter()).count(t)


# ---------------------------------------------------------------------------
# ladder models
# ---------------------------------------------------------------------------

class LadderModel:
    """Increasing differentiable model of phi_1 on a working range."""

    kind: str
    lo: float
    hi: float

    @property
    def range(self):
        return (self.lo, self.hi)

    def eval(self, t):
        raise NotImplementedError

    def deriv(self, t):
        raise NotImplementedError

    def _check_range(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < self.lo - 1e-9) or np.any(t > self.hi + 1e-9):
            raise LadderRangeError(
                f"t outside model range [{self.lo!r}, {self.hi!r}]"
            )
        return t

    def invert(self, y, tol: float = 1e-10, max_iter: int = 80):
        """Monotone inversion: return t with eval(t) = y (scalar or array).

        Safeguarded Newton on a shrinking bracket: where the derivative is
        bounded away from zero the iteration converges in a handful of
        evaluations; near zeros of the derivative it degrades to bisection.
        Only the still-unconverged subset is evaluated each round.
        """
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        flo = float(np.asarray(self.eval(np.array([self.lo])))[0])
        fhi = float(np.asarray(self.eval(np.array([self.hi])))[0])
        if np.any(y_arr < flo - 1e-9) or np.any(y_arr > fhi + 1e-9):
            raise LadderRangeError(
                f"value outside model image [{flo!r}, {fhi!r}]"
            )
        a, b = self._initial_bracket(y_arr)
        t = 0.5 * (a + b)
        # eval carries rounding jitter ~eps*|y|, so the residual target cannot
        # sit below that floor
        ftol = np.maximum(0.01 * tol, 8.0 * np.finfo(float).eps * np.abs(y_arr))
        active = np.arange(len(y_arr))
        for _ in range(max_iter):
            ta = t[active]
            ft = np.asarray(self.eval(ta)) - y_arr[active]
            above = ft > 0
            b[active] = np.where(above, ta, b[active])
            a[active] = np.where(above, a[active], ta)
            d = np.asarray(self.deriv(ta))
            width = b[active] - a[active]
            # converged when the bracket is tight or Newton has pinned the
            # residual and the local slope bounds the remaining t error
            done = (width <= tol) | (
                (d > 1e-8) & (np.abs(ft) <= np.maximum(0.01 * tol * d, ftol[active])))
            step = np.where(d > 1e-8, ft / np.where(d > 1e-8, d, 1.0), 0.0)
            nxt = ta - step
            mid = 0.5 * (a[active] + b[active])
            bad = (d <= 1e-8) | (nxt <= a[active]) | (nxt >= b[active])
            t[active] = np.where(done, ta, np.where(bad, mid, nxt))
            active = active[~done]
            if active.size == 0:
                break
        return t if np.asarray(y).ndim else float(t[0])

    def _initial_bracket(self, y_arr):
        return np.full_like(y_arr, self.lo), np.full_like(y_arr, self.hi)


class AsymptoticLadder(LadderModel):
    """phi_1(t) = t - (1 - gamma) li(t); derivative 1 - (1 - gamma)/ln t."""

    kind = "asymptotic"

    def __init__(self, lo: float, hi: float):
        if not 10.0 <= lo < hi:
            raise ValueError("asymptotic ladder requires 10 <= lo < hi")
        self.lo = float(lo)
        self.hi = float(hi)
        self.anchor = None

    def eval(self, t):
        scalar = np.asarray(t).ndim == 0
        t = self._check_range(t)
        out = t - (1.0 - EULER_GAMMA) * li(t)
        return float(out[0]) if scalar else out

    def deriv(self, t):
        scalar = np.asarray(t).ndim == 0
        t = self._check_range(t)
        out = 1.0 - (1.0 - EULER_GAMMA) / np.log(t)
        return float(out[0]) if scalar else out


class OdeLadder(LadderModel):
    """Model with deriv(t) = Z~^2(t) exactly and eval built by cumulative
    Gauss-Kronrod quadrature from an anchor value.

    Checkpoints at fixed spacing carry exact running integrals (accumulated in
    extended precision); eval(t) adds a 7-point Gauss partial panel from the
    nearest checkpoint below t, so eval and deriv are mutually consistent to
    panel quadrature accuracy (~1e-12 absolute over desk-scale spans).
    """

    kind = "ode"

    def __init__(self, anchor_t: float, span: float, anchor_value: float,
                 rs_cfg: rscore.RSConfig = rscore.RSConfig(), step: float = 0.125):
        if span <= 0:
            raise ValueError("span must be positive")
        if anchor_t < rscore.T_MIN:
            raise ValueError("anchor below fast-path range")
        self.lo = float(anchor_t)
        self.hi = float(anchor_t + span)
        self.anchor = (float(anchor_t), float(anchor_value))
        self._rs_cfg = rs_cfg
        n = int(math.ceil(span / step))
        self._cp_t = np.linspace(self.lo, self.hi, n + 1)
        mids = 0.5 * (self._cp_t[:-1] + self._cp_t[1:])
        hws = 0.5 * np.diff(self._cp_t)
        pts = mids[:, None] + hws[:, None] * _GL7_NODES[None, :]
        vals = self._f(pts.ravel()).reshape(pts.shape)
        panel = (vals @ _GL7_WEIGHTS) * hws
        cum = np.cumsum(panel.astype(np.longdouble))
        self._cp_phi = float(anchor_value) + np.concatenate(
            [[0.0], cum.astype(float)]
        )

    def _f(self, t):
        return rscore.z_tilde_sq_many(t, self._rs_cfg)

    def eval(self, t):
        scalar = np.asarray(t).ndim == 0
        t = self._check_range(t)
        t = np.clip(t, self.lo, self.hi)
        idx = np.clip(np.searchsorted(self._cp_t, t, side="right") - 1, 0,
                      len(self._cp_t) - 2)
        base_t = self._cp_t[idx]
        mid = 0.5 * (base_t + t)
        hw = 0.5 * (t - base_t)
        pts = mid[:, None] + hw[:, None] * _GL7_NODES[None, :]
        vals = self._f(pts.ravel()).reshape(pts.shape)
        partial = (vals @ _GL7_WEIGHTS) * hw
        out = self._cp_phi[idx] + partial
        return float(out[0]) if scalar else out

    def deriv(self, t):
        scalar = np.asarray(t).ndim == 0
        t = self._check_range(t)
        out = self._f(t)
        return float(out[0]) if scalar else out

    def _initial_bracket(self, y_arr):
        # checkpoints are monotone nondecreasing, so they bracket the preimage
        idx = np.clip(np.searchsorted(self._cp_phi, y_arr) - 1, 0,
                      len(self._cp_t) - 2)
        return self._cp_t[idx].copy(), self._cp_t[idx + 1].copy()


def ladder_asymptotic(lo: float, hi: float) -> AsymptoticLadder:
    """Asymptotic ladder model on [lo, hi]."""
    return AsymptoticLadder(lo, hi)


def ladder_ode(anchor_t: float, span: float, seed_model: LadderModel,
               rs_cfg: rscore.RSConfig = rscore.RSConfig(),
               step: float = 0.125) -> OdeLadder:
    """ODE ladder on [anchor_t, anchor_t + span], anchored to the seed model."""
    anchor_value = float(np.asarray(seed_model.eval(np.array([anchor_t])))[0])
    return OdeLadder(anchor_t, span, anchor_value, rs_cfg, step)


# ---------------------------------------------------------------------------
# mirroring and the separation law
# ---------------------------------------------------------------------------

_MIRROR_LABEL = {"G1": "mirrored-G1", "G2": "mirrored-G2"}


def mirror_point(m: LadderModel, T: float) -> float:
    """The preimage T-ring with phi_1(T-ring) = T."""
    return float(np.asarray(m.invert(np.array([float(T)])))[0])


def mirror_collection(m: LadderModel, c: IntervalCollection) -> IntervalCollection:
    """Apply mirror_point to every endpoint; monotonicity preserves order."""
    if len(c) == 0:
        return IntervalCollection((), _MIRROR_LABEL.get(c.label, "other"), None)
    ends = np.concatenate([c.lows, c.highs])
    mirrored = np.asarray(m.invert(ends))
    los = mirrored[: len(c)]
    his = mirrored[len(c):]
    label = _MIRROR_LABEL.get(c.label, "other")
    return IntervalCollection(tuple(zip(los, his)), label)


def separation_rho(w, m: LadderModel, pc: PrimeCounter | None = None):
    """Distance between [T, T+H] and its mirror, with the predicted value.

    Returns (rho, predicted) where rho = T-ring - (T + H) and the prediction
    is (1 - gamma) * pi(T) with exact sieve counts.
    """
    T_ring = mirror_point(m, w.T)
    rho = T_ring - (w.T + w.H)
    if rho < 0:
        raise ArithmeticError(
            f"negative separation rho={rho}: model violates T+H < T-ring"
        )
    predicted = (1.0 - EULER_GAMMA) * pi_count(w.T, pc)
    return rho, predicted


# ---------------------------------------------------------------------------
# checkpoint-table serialization
# ---------------------------------------------------------------------------

def save_ladder_csv(m: LadderModel, path, step: float = 1.0):
    """Write a dense (t, phi1, phi1') checkpoint table with a header line
    declaring kind, anchor, and tolerance of the table."""
    ts = np.arange(m.lo, m.hi + 0.5 * step, step)
    ts[-1] = min(ts[-1], m.hi)
    phi = np.asarray(m.eval(ts))
    dphi = np.asarray(m.deriv(ts))
    anchor = getattr(m, "anchor", None)
    with open(path, "w") as fh:
        fh.write(f"# kind={m.kind} anchor={anchor!r} tol=1e-9\n")
        fh.write("t,phi1,dphi1\n")
        for a, b, c in zip(ts, phi, dphi):
            fh.write(f"{float(a)!r},{float(b)!r},{float(c)!r}\n")


class TabulatedLadder(LadderModel):
    """Ladder model reconstructed from a checkpoint table; monotone cubic
    interpolation between checkpoints."""

    def __init__(self, ts, phi, dphi, kind="tabulated"):
        from scipy.interpolate import PchipInterpolator

        self.kind = kind
        self.lo = float(ts[0])
        self.hi = float(ts[-1])
        self._interp = PchipInterpolator(ts, phi)
        self._dinterp = PchipInterpolator(ts, dphi)
        self.anchor = None

    def eval(self, t):
        t = self._check_range(t)
        return self._interp(np.clip(t, self.lo, self.hi))

    def deriv(self, t):
        t = self._check_range(t)
        return self._dinterp(np.clip(t, self.lo, self.hi))


def load_ladder_csv(path) -> TabulatedLadder:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# kind="):
            raise ValueError("bad ladder table header")
        kind = header.split()[1].split("=", 1)[1]
        cols = fh.readline().strip()
        if cols != "t,phi1,dphi1":
            raise ValueError("bad ladder table columns")
        data = np.array([[float(x) for x in line.split(",")] for line in fh])
    return TabulatedLadder(data[:, 0], data[:, 1], data[:, 2], kind=f"tabulated-{kind}")
