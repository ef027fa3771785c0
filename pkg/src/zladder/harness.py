"""Experiment runner: assembles grid, ladder, and quadrature into the
verification program and emits machine-readable reports.

Every report row pairs a measured integral with its predicted value, one
equation tag from a closed vocabulary, and a verdict.  Structural identities
(the change-of-variables residuals, coverage) are hard pass/fail at quadrature
tolerance; the mean-value rows carry the calibrated error budget
kappa * T^(1/6 + eps), with kappa fitted once on calibration windows disjoint
from the default experiment window and frozen below.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ladder as ladder_mod
from . import rscore
from .gridsets import WindowSpec, build_g1, build_g2, grid_range, sign_partition
from .intervals import IntervalCollection
from .quadrature import QuadSpec, integrate_collection, transform_check

REPORT_SCHEMA_VERSION = 2

#: Closed vocabulary of equation tags a report may cite.
EQ_TAGS = ("1.5", "1.6", "1.8", "2.1", "C2", "3.2", "4.1", "4.2", "4.4", "4.5")

#: Error-budget constant for the mean-value rows: budget = KAPPA * T^(1/6+eps).
#: Fitted once on the calibration windows T in {5e5, 2e6} (H = 1e3, x = pi/2,
#: eps = 0.05), disjoint from the default experiment window.  Observed
#: |integral - predicted| / T^(1/6+eps) there: 3.07 and 2.75 (G1, G2 at 5e5),
#: 3.44 and 3.56 (at 2e6); frozen at 1.25x the largest ratio.
KAPPA = 4.5

#: Hard multiple of the combined quadrature tolerance for substitution rows.
SUBSTITUTION_SLACK = 10.0


@dataclass(frozen=True)
class ExperimentConfig:
    T: float = 1.0e6
    epsilon: float = 0.05
    H_override: float | None = 1.0e3
    x: float = math.pi / 2
    y: float = math.pi / 2
    ladder_kind: str = "ode"
    # mean-value budgets are O(10), so the experiment default trades unneeded
    # quadrature accuracy for speed; pass a tighter QuadSpec to override
    quad: QuadSpec = field(
        default_factory=lambda: QuadSpec(rel_tol=1e-7, abs_tol=1e-5))
    rs: rscore.RSConfig = field(default_factory=rscore.RSConfig)
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if not (0.0 < self.x <= math.pi / 2 and 0.0 < self.y <= math.pi / 2):
            raise ValueError("x and y must lie in (0, pi/2]")
        if self.ladder_kind not in ("asymptotic", "ode"):
            raise ValueError(f"unknown ladder_kind {self.ladder_kind!r}")
        WindowSpec(self.T, self.epsilon, self.H_override)  # validate window

    @property
    def window(self) -> WindowSpec:
        return WindowSpec(self.T, self.epsilon, self.H_override)

    def snapshot(self) -> dict:
        d = dataclasses.asdict(self)
        return d


def config_from_file(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a flat ``key = value`` config file; ``overrides`` win over file keys."""
    values: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = val
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return _config_from_strings(values)


def _config_from_strings(values: dict) -> ExperimentConfig:
    kw: dict = {}
    quad_kw: dict = {}
    rs_kw: dict = {}
    for key, val in values.items():
        if key in ("T", "epsilon", "x", "y"):
            kw[key] = float(val)
        elif key == "H_override":
            kw[key] = None if str(val).lower() in ("none", "") else float(val)
        elif key == "ladder_kind":
            kw[key] = str(val)
        elif key == "seed":
            kw[key] = int(val)
        elif key == "output_dir":
            kw[key] = str(val)
        elif key in ("rel_tol", "abs_tol"):
            quad_kw[key] = float(val)
        elif key == "max_depth":
            quad_kw[key] = int(val)
        elif key == "correction_terms":
            rs_kw[key] = int(val)
        elif key == "summation_mode":
            rs_kw[key] = str(val)
        else:
            raise ValueError(f"unknown config key {key!r}")
    if quad_kw:
        kw["quad"] = QuadSpec(**quad_kw)
    if rs_kw:
        kw["rs"] = rscore.RSConfig(**rs_kw)
    return ExperimentConfig(**kw)


@dataclass(frozen=True)
class VerificationReport:
    experiment_id: str
    measured: float
    predicted: float
    error_estimate: float
    paper_eq: str
    verdict: str
    tolerance: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.paper_eq not in EQ_TAGS:
            raise ValueError(f"equation tag {self.paper_eq!r} not in vocabulary")
        if self.verdict not in ("pass", "fail", "informative"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict != "informative":
            ok = abs(self.measured - self.predicted) <= self.tolerance
            if (self.verdict == "pass") != ok:
                raise ValueError("verdict inconsistent with measured/tolerance")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _verdict(measured, predicted, tolerance) -> str:
    return "pass" if abs(measured - predicted) <= tolerance else "fail"


def mean_value_budget(cfg: ExperimentConfig) -> float:
    """The frozen calibrated error budget kappa * T^(1/6 + eps)."""
    return KAPPA * cfg.T ** (1.0 / 6.0 + cfg.epsilon)


# ---------------------------------------------------------------------------
# shared experiment context
# ---------------------------------------------------------------------------

class ExperimentContext:
    """Grid sets, ladder models, and integrands shared by the experiments."""

    def __init__(self, cfg: ExperimentConfig, need_mirror: bool = True):
        self.cfg = cfg
        self.w = cfg.window
        self.g1 = build_g1(self.w, cfg.x)
        self.g2 = build_g2(self.w, cfg.y)
        self.grid_cuts = np.array([g.t for g in grid_range(self.w)])
        self.asym = ladder_mod.ladder_asymptotic(10.0, 4.0 * cfg.T + 1e6)
        self.ode = None
        if need_mirror:
            self._build_ode()

    def z(self, ts):
        return rscore.hardy_z_many(np.asarray(ts, dtype=float), self.cfg.rs)

    def z_tilde_sq(self, ts):
        return rscore.z_tilde_sq_many(np.asarray(ts, dtype=float), self.cfg.rs)

    def _hull(self):
        los = [self.w.T]
        his = [self.w.T + self.w.H]
        for c in (self.g1, self.g2):
            if len(c):
                los.append(c.intervals[0][0])
                his.append(c.intervals[-1][1])
        return min(los), max(his)

    def _build_ode(self, margin: float = 3.0):
        lo_hull, hi_hull = self._hull()
        anchor_t = self.asym.invert(lo_hull - margin)
        span = (hi_hull + margin - lo_hull + 2 * margin) / 0.85
        for _ in range(6):
            ode = ladder_mod.ladder_ode(anchor_t, span, self.asym, self.cfg.rs)
            top = ode.eval(ode.hi)
            if top >= hi_hull + margin:
                self.ode = ode
                return
            span *= 1.3
        raise RuntimeError("ODE ladder failed to cover the mirrored window")

    @property
    def ladder(self):
        return self.ode if self.cfg.ladder_kind == "ode" else self.asym

    def mirrored(self, c: IntervalCollection) -> IntervalCollection:
        return ladder_mod.mirror_collection(self.ladder, c)

    def pushforward_z(self, ts):
        """Z(phi_1(t)) * Z~^2(t), the mirrored-side integrand."""
        m = self.ladder
        return self.z(np.asarray(m.eval(ts))) * np.asarray(m.deriv(ts))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _quad_meta(outcome) -> dict:
    return {
        "evaluations": outcome.evaluations,
        "subdivisions": outcome.subdivisions,
        "converged": outcome.converged,
    }


def verify_theorem(cfg: ExperimentConfig, ctx: ExperimentContext | None = None) -> list[VerificationReport]:
    """Direct and mirrored mean-value integrals plus the substitution residual."""
    ctx = ctx or ExperimentContext(cfg)
    H = ctx.w.H
    budget = mean_value_budget(cfg)
    q = cfg.quad
    reports = []

    direct = {}
    mirrored = {}
    for name, coll, sgn, amp in (
        ("g1", ctx.g1, 1.0, math.sin(cfg.x)),
        ("g2", ctx.g2, -1.0, math.sin(cfg.y)),
    ):
        pred = sgn * 2.0 / math.pi * H * amp
        out = integrate_collection(ctx.z, coll, q, initial_cuts=ctx.grid_cuts)
        direct[name] = out
        reports.append(VerificationReport(
            experiment_id=f"theorem.{name}-direct",
            measured=out.value, predicted=pred,
            error_estimate=out.error_estimate, paper_eq="4.5",
            verdict=_verdict(out.value, pred, budget), tolerance=budget,
            metadata=_quad_meta(out),
        ))
        mcoll = ctx.mirrored(coll)
        mout = integrate_collection(ctx.pushforward_z, mcoll, q)
        mirrored[name] = mout
        reports.append(VerificationReport(
            experiment_id=f"theorem.{name}-mirrored",
            measured=mout.value, predicted=pred,
            error_estimate=mout.error_estimate, paper_eq="1.5",
            verdict=_verdict(mout.value, pred, budget), tolerance=budget,
            metadata=_quad_meta(mout),
        ))
        resid = abs(out.value - mout.value)
        rtol = SUBSTITUTION_SLACK * (out.tolerance(q) + mout.tolerance(q))
        reports.append(VerificationReport(
            experiment_id=f"theorem.{name}-substitution",
            measured=resid, predicted=0.0,
            error_estimate=out.error_estimate + mout.error_estimate,
            paper_eq="4.4", verdict=_verdict(resid, 0.0, rtol), tolerance=rtol,
        ))
    return reports


def verify_corollaries(cfg: ExperimentConfig, ctx: ExperimentContext | None = None) -> list[VerificationReport]:
    """Union/difference integrals over the mirrored sets, and coverage."""
    ctx = ctx or ExperimentContext(cfg)
    H = ctx.w.H
    q = cfg.quad
    budget = mean_value_budget(cfg)
    m1 = integrate_collection(ctx.pushforward_z, ctx.mirrored(ctx.g1), q)
    m2 = integrate_collection(ctx.pushforward_z, ctx.mirrored(ctx.g2), q)
    reports = []

    union = m1.value + m2.value
    same = math.isclose(cfg.x, cfg.y, rel_tol=0.0, abs_tol=1e-12)
    if same:
        # cancellation: budget is a fraction of the single-set magnitude
        tol = 0.2 * (2.0 / math.pi) * H * math.sin(cfg.x)
        pred = 0.0
    else:
        tol = budget
        pred = 2.0 / math.pi * (math.sin(cfg.x) - math.sin(cfg.y)) * H
    reports.append(VerificationReport(
        experiment_id="corollary.union",
        measured=union, predicted=pred,
        error_estimate=m1.error_estimate + m2.error_estimate,
        paper_eq="2.1", verdict=_verdict(union, pred, tol), tolerance=tol,
        metadata=_quad_meta(m1.combine(m2)),
    ))

    diff = m1.value - m2.value
    diff_pred = 2.0 / math.pi * (math.sin(cfg.x) + math.sin(cfg.y)) * H
    at_half_pi = same and math.isclose(cfg.x, math.pi / 2, abs_tol=1e-9)
    reports.append(VerificationReport(
        experiment_id="corollary.difference",
        measured=diff, predicted=diff_pred,
        error_estimate=m1.error_estimate + m2.error_estimate,
        paper_eq="C2" if at_half_pi else "2.1",
        verdict=_verdict(diff, diff_pred, budget), tolerance=budget,
    ))

    if at_half_pi:
        # closure of the mirrored union must cover [T-ring, (T+H)-ring];
        # adjacent G1/G2 endpoints solve the same grid equation, so allow
        # solver-noise overlaps when merging
        merged = ctx.mirrored(ctx.g1).union(
            ctx.mirrored(ctx.g2), clip_tol=1e-8 * ctx.w.T)
        t_lo = ladder_mod.mirror_point(ctx.ladder, ctx.w.T)
        t_hi = ladder_mod.mirror_point(ctx.ladder, ctx.w.T + ctx.w.H)
        # the grid is discrete, so the first and last covered intervals can
        # stop up to one grid spacing pi/theta'(t) short of the window edges;
        # subtract that structural slack (measured in mirrored coordinates)
        spacing = math.pi / rscore.theta_deriv(ctx.w.T)
        allow_lo = ladder_mod.mirror_point(ctx.ladder, ctx.w.T + spacing) - t_lo
        allow_hi = t_hi - ladder_mod.mirror_point(
            ctx.ladder, ctx.w.T + ctx.w.H - spacing)
        gaps = [max(0.0, merged.intervals[0][0] - t_lo - allow_lo),
                max(0.0, t_hi - merged.intervals[-1][1] - allow_hi)]
        for (_, hi), (lo2, _) in zip(merged.intervals, merged.intervals[1:]):
            if hi < t_hi and lo2 > t_lo:
                gaps.append(max(0.0, min(lo2, t_hi) - max(hi, t_lo)))
        worst = max(gaps)
        cover_tol = 1e-6
        reports.append(VerificationReport(
            experiment_id="corollary.coverage",
            measured=worst, predicted=0.0, error_estimate=0.0,
            paper_eq="C2", verdict=_verdict(worst, 0.0, cover_tol),
            tolerance=cover_tol,
            metadata={"interval_count": len(merged)},
        ))
    return reports


def verify_sign_area(cfg: ExperimentConfig, ctx: ExperimentContext | None = None,
                     ratio_tol: float = 0.15) -> list[VerificationReport]:
    """Area-equality law for the sign partition of Z(phi_1) * Z~^2."""
    if not math.isclose(cfg.x, cfg.y, rel_tol=0.0, abs_tol=1e-12):
        raise ValueError("verify_sign_area requires x == y")
    ctx = ctx or ExperimentContext(cfg)
    q = cfg.quad
    H = ctx.w.H
    merged = ctx.mirrored(ctx.g1).union(
        ctx.mirrored(ctx.g2), clip_tol=1e-8 * ctx.w.T)
    part = sign_partition(merged, ctx.pushforward_z, root_tol=1e-6)
    a_pos = integrate_collection(ctx.pushforward_z, part.pos, q)
    a_neg = integrate_collection(ctx.pushforward_z, part.neg, q)
    if not (a_pos.value > 0 and a_neg.value < 0):
        raise ArithmeticError("sign partition produced empty or wrong-signed areas")
    ratio = a_pos.value / abs(a_neg.value)
    reports = [VerificationReport(
        experiment_id="sign-area.ratio",
        measured=ratio, predicted=1.0,
        error_estimate=(a_pos.error_estimate + a_neg.error_estimate) / abs(a_neg.value),
        paper_eq="3.2", verdict=_verdict(ratio, 1.0, ratio_tol), tolerance=ratio_tol,
        metadata={
            "area_pos": a_pos.value, "area_neg": a_neg.value,
            "root_gap_measure": part.gap_measure,
            "warnings": list(part.warnings),
        },
    )]
    # positive area dominates the single-set mean value from below
    eps_slack = 0.25
    floor = (1.0 - eps_slack) * 2.0 / math.pi * H * math.sin(cfg.x)
    reports.append(VerificationReport(
        experiment_id="sign-area.lower-bound",
        measured=a_pos.value, predicted=floor, error_estimate=a_pos.error_estimate,
        paper_eq="3.2",
        verdict="pass" if a_pos.value >= floor else "fail",
        tolerance=float("inf"),
        metadata={"eps_slack": eps_slack},
    ))
    return reports


def scan_shape(cfg: ExperimentConfig, x_grid=None,
               ctx: ExperimentContext | None = None):
    """Amplitude fit of the measured x -> integral law against (2H/pi) sin x.

    Returns (rows, report) where rows are (x, measured, predicted) tuples.
    """
    if x_grid is None:
        x_grid = [k * math.pi / 16 for k in range(1, 9)]
    x_grid = [float(x) for x in x_grid]
    if len(x_grid) < 8:
        raise ValueError("scan_shape needs at least 8 x values")
    if not all(0.0 < x <= math.pi / 2 for x in x_grid):
        raise ValueError("x grid must lie in (0, pi/2]")
    ctx = ctx or ExperimentContext(cfg, need_mirror=False)
    H = ctx.w.H
    rows = []
    for x in x_grid:
        coll = build_g1(ctx.w, x)
        out = integrate_collection(ctx.z, coll, cfg.quad, initial_cuts=ctx.grid_cuts)
        rows.append((x, out.value, 2.0 / math.pi * H * math.sin(x)))
    sines = np.array([math.sin(x) for x, _, _ in rows])
    meas = np.array([v for _, v, _ in rows])
    amp = float(np.dot(sines, meas) / np.dot(sines, sines))
    resid = float(np.linalg.norm(meas - amp * sines))
    rel = amp * math.pi / (2.0 * H)
    report = VerificationReport(
        experiment_id="shape.amplitude",
        measured=rel, predicted=1.0, error_estimate=resid / (2.0 * H / math.pi),
        paper_eq="1.5", verdict=_verdict(rel, 1.0, 0.1), tolerance=0.1,
        metadata={"fitted_amplitude": amp, "residual_norm": resid,
                  "x_grid": x_grid},
    )
    return rows, report


def separation_report(cfg: ExperimentConfig,
                      pc: ladder_mod.PrimeCounter | None = None) -> VerificationReport:
    """Separation law: rho against (1 - gamma) * pi(T), asymptotic ladder."""
    w = cfg.window
    asym = ladder_mod.ladder_asymptotic(10.0, 4.0 * cfg.T + 1e6)
    pc = pc or ladder_mod.PrimeCounter(limit=int(cfg.T) + 1)
    rho, predicted = ladder_mod.separation_rho(w, asym, pc)
    ratio = rho / predicted
    return VerificationReport(
        experiment_id="separation.rho",
        measured=ratio, predicted=1.0, error_estimate=0.0,
        paper_eq="1.8", verdict=_verdict(ratio, 1.0, 0.05), tolerance=0.05,
        metadata={"rho": rho, "predicted_rho": predicted, "H": w.H},
    )


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------

def write_report(path, cfg: ExperimentConfig, reports: list[VerificationReport],
                 runtime: float | None = None):
    """Serialize a run: schema-versioned JSON, keys sorted, timestamp isolated
    in its own field so deterministic reruns differ only there."""
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "runtime_seconds": runtime,
        "config": cfg.snapshot(),
        "reports": [r.as_dict() for r in reports],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    return path


def merge_reports(paths) -> list[dict]:
    """Flatten prior run files into rows keyed by (T, H, x, y)."""
    rows = []
    for p in sorted(map(str, paths)):
        payload = json.loads(Path(p).read_text())
        c = payload["config"]
        H = c.get("H_override")
        if H is None:
            H = WindowSpec(c["T"], c["epsilon"]).H
        for r in payload["reports"]:
            rows.append({
                "T": c["T"], "H": H, "x": c["x"], "y": c["y"],
                "experiment_id": r["experiment_id"],
                "measured": r["measured"], "predicted": r["predicted"],
                "paper_eq": r["paper_eq"], "verdict": r["verdict"],
                "source": p,
            })
    return rows


def hard_failures(reports: list[VerificationReport]) -> list[str]:
    return [r.experiment_id for r in reports if r.verdict == "fail"]
