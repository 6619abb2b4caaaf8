"""End-to-end verification of one member g_alpha of the family on CP^n."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import algebra as alg
from .geometry import ChartPoint, GeometryError, calibrate_orientation, evaluate_point
from .profile import ODETolerances, ProfileError, boundary_report, eval_phi, p_alpha, phi_minimum, solve_profile

log = logging.getLogger(__name__)

SCHEMA = "hpkahler.report/1"

DEFAULT_TOLERANCES = {
    "energy": 1e-10,
    "boundary": 1e-7,
    "parity": 1e-9,
    "hp": 1e-6,
    "qch": 1e-6,
    "a_plus_half_b": 1e-6,
    "nabla_J": 1e-6,
    "d_omega": 1e-8,
    "symmetry": 1e-8,
    "j_invariance": 1e-7,
    "hol_sec_probe": 1e-7,
    "killing": 1e-7,
    "isometry": 1e-7,
}

PSI_VALUES = (0.0, 1.0)


class VerificationError(RuntimeError):
    pass


@dataclass
class VerificationConfig:
    alpha: float
    n: int = 2
    samples_t: int = 10
    samples_base: int = 2
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    margin: float = 0.05
    probe_directions: int = 32

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        if self.samples_t < 1 or self.samples_base < 1:
            raise ValueError("sample counts must be >= 1")
        if not 0.0 < self.margin < 0.5:
            raise ValueError("margin must lie in (0, 0.5)")
        if self.probe_directions < 8:
            raise ValueError("need at least 8 probe directions")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        tols = dict(DEFAULT_TOLERANCES)
        tols.update({k: float(v) for k, v in self.tolerances.items()})
        if any(v <= 0.0 for v in tols.values()):
            raise ValueError("tolerances must be positive")
        self.tolerances = tols
        self.n = int(self.n)


@dataclass
class PointRecord:
    point: dict
    phi: float
    hp_residual: float
    rr_norm: float
    pir_norm: float
    r_norm: float
    qch: dict
    a_plus_half_b_minus_phi: float
    nabla_J: float
    d_omega: float
    symmetry: dict
    j_invariance: float
    killing: dict
    scalar_curvature: float
    hol_sec_probe: float
    frame_R: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("frame_R")
        return d


@dataclass
class VerificationReport:
    config: dict
    calibration: dict = field(default_factory=dict)
    profile: dict = field(default_factory=dict)
    points: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    phi_sign_summary: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(v == "pass" for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": self.config,
            "passed": self.passed,
            "error": self.error,
            "calibration": self.calibration,
            "profile": self.profile,
            "phi_sign_summary": self.phi_sign_summary,
            "aggregates": self.aggregates,
            "verdicts": self.verdicts,
            "points": [p.to_dict() for p in self.points],
        }


def sample_points(L: float, n: int, samples_t: int, samples_base: int, margin: float,
                  rng: np.random.Generator) -> list:
    """Uniform interior t-grid crossed with base points (origin first, then
    uniform in the unit ball of C^{n-1}); psi alternates over PSI_VALUES."""
    m = n - 1
    bases = [np.zeros(m, dtype=complex)]
    for _ in range(samples_base - 1):
        x = rng.standard_normal(2 * m)
        x *= rng.uniform() ** (1.0 / (2 * m)) / np.linalg.norm(x)
        bases.append(x[0::2] + 1j * x[1::2])
    if samples_t == 1:
        ts = np.array([0.5 * L])
    else:
        ts = np.linspace(margin * L, (1.0 - margin) * L, samples_t)
    return [ChartPoint(t, PSI_VALUES[j % len(PSI_VALUES)], w) for t in ts for j, w in enumerate(bases)]


def probe_directions(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit directions in the adapted frame: 4 inside D, 4 orthogonal to D,
    the rest generic.  D is spanned by the first two frame vectors."""
    X = rng.standard_normal((count, dim))
    X[:4, 2:] = 0.0
    X[4:8, :2] = 0.0
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _point_record(point: ChartPoint, sol, cfg: VerificationConfig, rng: np.random.Generator) -> PointRecord:
    pg = evaluate_point(point, sol, margin=cfg.margin)
    dim = point.dim
    eye = np.eye(dim)
    Rf = pg.to_frame(pg.R)
    Jf = pg.frame_J
    pDf = np.linalg.solve(pg.frame, pg.projector @ pg.frame)
    R = alg.CurvatureTensor(Rf, eye)
    Pi, Phi, Psi = alg.qch_model_tensors(eye, Jf, pDf)
    phi = float(eval_phi(sol, point.t))

    RR = alg.derivation_action(R, R)
    PR = alg.derivation_action(Pi, R)
    fit = alg.qch_fit(R, Pi, Phi, Psi)
    dirs = probe_directions(dim, cfg.probe_directions, rng)
    return PointRecord(
        point=point.to_dict(),
        phi=phi,
        hp_residual=alg.hp_residual(R, Pi, phi),
        rr_norm=float(np.abs(RR).max()),
        pir_norm=float(np.abs(PR).max()),
        r_norm=float(np.abs(Rf).max()),
        qch=asdict(fit),
        a_plus_half_b_minus_phi=abs(fit.a + 0.5 * fit.b - phi),
        nabla_J=float(np.abs(pg.frame_nabla_J).max()),
        d_omega=float(np.abs(pg.d_omega).max()),
        symmetry=alg.symmetry_residuals(Rf),
        j_invariance=alg.j_invariance_residual(Rf, Jf),
        killing={"lie_g": pg.lie_psi_g, "lie_J": pg.lie_psi_J},
        scalar_curvature=pg.scalar_curvature,
        hol_sec_probe=alg.probe_qch_law(R, Jf, pDf, fit, dirs),
        frame_R=Rf,
    )


def _isometry_residual(records: Sequence[PointRecord]) -> float:
    """Spread of t-only quantities among points sharing the same t."""
    groups: dict = {}
    for r in records:
        groups.setdefault(r.point["t"], []).append(r)
    worst = 0.0
    for recs in groups.values():
        ref = recs[0]
        for r in recs[1:]:
            diffs = [
                abs(r.phi - ref.phi),
                abs(r.scalar_curvature - ref.scalar_curvature),
                *(abs(r.qch[k] - ref.qch[k]) for k in "abc"),
                float(np.abs(r.frame_R - ref.frame_R).max()),
            ]
            worst = max(worst, max(diffs))
    return worst


def _stats(values) -> dict:
    arr = np.asarray(list(values), dtype=float)
    return {"max": float(arr.max()), "mean": float(arr.mean())}


def run_verification(cfg: VerificationConfig, ode_tol: ODETolerances = ODETolerances()) -> VerificationReport:
    """Solve the profile for ``cfg.alpha`` and check every identity at
    every sample point.  Deterministic given ``cfg.seed``."""
    report = VerificationReport(config=asdict(cfg))
    prof = p_alpha(cfg.alpha)
    sol = solve_profile(prof, ode_tol)
    rng = np.random.default_rng(cfg.seed)

    br = boundary_report(sol)
    pmin = phi_minimum(sol)
    report.profile = {
        "alpha": cfg.alpha,
        "coeffs": [float(c) for c in prof.coeffs],
        "L": sol.L,
        "boundary": br.to_dict(),
        "phi_at_0": float(eval_phi(sol, 0.0)),
    }
    report.phi_sign_summary = {
        "min_phi": pmin.value,
        "argmin_t": pmin.t,
        "argmin_h": pmin.h,
        "positive": pmin.value > 0.0,
    }

    points = sample_points(sol.L, cfg.n, cfg.samples_t, cfg.samples_base, cfg.margin, rng)
    report.calibration = calibrate_orientation(sol, points[len(points) // 2])
    report.calibration["rule"] = "J d/dt = orientation * (1/f) d/dpsi; sign minimising |nabla J| + |dOmega|"

    for pt in points:
        try:
            report.points.append(_point_record(pt, sol, cfg, rng))
        except (GeometryError, alg.AlgebraError, ValueError) as exc:
            raise VerificationError(f"alpha={cfg.alpha}, n={cfg.n}, point {pt.to_dict()}: {exc}") from exc

    recs = report.points
    scal = [r.scalar_curvature for r in recs]
    agg = {
        "energy": {"max": br.energy_drift, "mean": br.energy_drift},
        "boundary": {"max": br.max_endpoint(), "mean": br.max_endpoint()},
        "parity": {"max": max(br.h_parity_at_0, br.f_parity_at_L), "mean": max(br.h_parity_at_0, br.f_parity_at_L)},
        "hp": _stats(r.hp_residual for r in recs),
        "qch": _stats(r.qch["residual"] for r in recs),
        "a_plus_half_b": _stats(r.a_plus_half_b_minus_phi for r in recs),
        "nabla_J": _stats(r.nabla_J for r in recs),
        "d_omega": _stats(r.d_omega for r in recs),
        "symmetry": _stats(max(r.symmetry.values()) for r in recs),
        "j_invariance": _stats(r.j_invariance for r in recs),
        "hol_sec_probe": _stats(r.hol_sec_probe for r in recs),
        "killing": _stats(max(r.killing.values()) for r in recs),
        "isometry": {"max": _isometry_residual(recs), "mean": _isometry_residual(recs)},
    }
    report.verdicts = {k: ("pass" if agg[k]["max"] <= cfg.tolerances[k] else "fail") for k in DEFAULT_TOLERANCES}
    agg["scalar_curvature_spread"] = {"max": float(max(scal) - min(scal)), "mean": float(np.mean(scal))}
    agg["rr_relative"] = _stats(r.rr_norm / r.r_norm**2 for r in recs)
    report.aggregates = agg
    log.info("alpha=%g n=%d: %s", cfg.alpha, cfg.n, "pass" if report.passed else "fail")
    return report


def _run_one(cfg: VerificationConfig) -> VerificationReport:
    try:
        return run_verification(cfg)
    except (ProfileError, VerificationError) as exc:
        rep = VerificationReport(config=asdict(cfg), error=str(exc))
        witness = getattr(exc, "witness", None)
        if witness is not None:
            rep.profile = {"alpha": cfg.alpha, "witness": witness}
        return rep


def sweep(alphas: Sequence[float], n: int, template: Optional[VerificationConfig] = None,
          jobs: int = 1) -> list:
    """Independent runs over ``alphas``; failures are recorded per alpha
    and the sweep continues.  Output order matches input order."""
    template = template or VerificationConfig(alpha=0.0, n=n)
    cfgs = [replace(template, alpha=float(a), n=n, tolerances=dict(template.tolerances)) for a in alphas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, cfgs))
    return [_run_one(c) for c in cfgs]


def sweep_row(rep: VerificationReport) -> dict:
    """One summary row per alpha."""
    row = {"alpha": rep.config["alpha"], "n": rep.config["n"], "passed": rep.passed}
    if rep.error is not None:
        row.update(L=math.nan, min_phi=math.nan, max_hp=math.nan, max_qch=math.nan,
                   scalar_spread=math.nan, error=rep.error)
        return row
    row.update(
        L=rep.profile["L"],
        min_phi=rep.phi_sign_summary["min_phi"],
        max_hp=rep.aggregates["hp"]["max"],
        max_qch=rep.aggregates["qch"]["max"],
        scalar_spread=rep.aggregates["scalar_curvature_spread"]["max"],
        error="",
    )
    return row
