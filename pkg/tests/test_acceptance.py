"""The nine acceptance criteria, each at its stated tolerance.

Every test appends one ``[criterion k] PASS|FAIL ...`` line that the
terminal summary prints at the end of the run.
"""

import itertools
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, solution
from hpkahler import algebra as alg
from hpkahler import geometry as geo
from hpkahler.profile import ProfileError, boundary_report, eval_phi, p_alpha, phi_minimum
from hpkahler.verifier import VerificationConfig, run_verification, sample_points

HP_ALPHAS = (-3.5, -3.0, -1.0, 0.5, 1.0, 3.0)
DIMS = (2, 3)
SAMPLES = dict(samples_t=10, samples_base=2)  # 20 interior points per run


@lru_cache(maxsize=None)
def report(alpha, n):
    return run_verification(VerificationConfig(alpha=alpha, n=n, **SAMPLES))


def grid_reports():
    return [report(a, n) for a in HP_ALPHAS for n in DIMS]


def record(k, ok, detail):
    ACCEPTANCE_LINES.append(f"[criterion {k}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def worst(reports, key):
    return max(r.aggregates[key]["max"] for r in reports)


def test_criterion_1_round_metric_anchor():
    sol = solution(0.0)
    ts = np.linspace(0.0, sol.L, 2001)
    h_err = float(np.max(np.abs(sol.h(ts) - np.sin(ts))))
    L_err = abs(sol.L - np.pi / 2)
    rel, rr = 0.0, 0.0
    rng = np.random.default_rng(0)
    for n in DIMS:
        pts = sample_points(sol.L, n, 10, 2, 0.05, rng)
        assert len(pts) == 20
        for p in pts:
            pg = geo.evaluate_point(p, sol)
            # orthonormal frame, so plain array norms are the invariant ones
            Rf = alg.CurvatureTensor(pg.to_frame(pg.R), np.eye(p.dim))
            Pi = alg.pi_tensor(np.eye(p.dim), pg.frame_J)
            nR = np.linalg.norm(Rf.components)
            rel = max(rel, np.linalg.norm(Rf.components - 4 * Pi.components) / nR)
            rr = max(rr, np.linalg.norm(alg.derivation_action(Rf, Rf)) / nR**2)
    ok = h_err <= 1e-8 and L_err <= 1e-8 and rel <= 1e-6 and rr <= 1e-7
    record(1, ok, f"max|h-sin|={h_err:.2e} |L-pi/2|={L_err:.2e} |R-4Pi|/|R|={rel:.2e} |R.R|/|R|^2={rr:.2e}")


def test_criterion_2_hp_identity():
    reps = grid_reports()
    npts = min(len(r.points) for r in reps)
    hp = worst(reps, "hp")
    record(2, hp <= 1e-6 and npts >= 20,
           f"max hp_residual={hp:.2e} over alpha={list(HP_ALPHAS)}, n={list(DIMS)}, {npts} points each")


def test_criterion_3_qch_decomposition():
    reps = grid_reports()
    q, ab = worst(reps, "qch"), worst(reps, "a_plus_half_b")
    record(3, q <= 1e-6 and ab <= 1e-6, f"max qch residual={q:.2e} max|a+b/2-phi|={ab:.2e}")


def test_criterion_4_kahler():
    reps = grid_reports()
    nj, dO = worst(reps, "nabla_J"), worst(reps, "d_omega")
    documented = all(r.calibration.get("orientation") in (1, -1) and "rule" in r.calibration
                     and "scores" in r.calibration for r in reps)
    record(4, nj <= 1e-6 and dO <= 1e-8 and documented,
           f"max|nabla J|={nj:.2e} max|dOmega|={dO:.2e} calibration recorded={documented}")


def test_criterion_5_profile_integrity():
    energy = endpoint = parity = 0.0
    for a in HP_ALPHAS + (0.0,):
        br = boundary_report(solution(a))
        energy = max(energy, br.energy_drift)
        endpoint = max(endpoint, abs(br.fL), abs(br.fpL_plus_1), abs(br.hL_minus_1), abs(br.hpL))
        parity = max(parity, br.h_parity_at_0)
    ok = energy <= 1e-10 and endpoint <= 1e-7 and parity <= 1e-9
    record(5, ok, f"energy drift={energy:.2e} boundary={endpoint:.2e} parity of h at 0={parity:.2e}")


def test_criterion_6_sign_claims():
    positive = {a: phi_minimum(solution(a)).value for a in (-2.9, -1.0, 0.0, 0.9)}
    touching = {a: phi_minimum(solution(a)) for a in (-3.0, 1.0)}
    h2 = touching[-3.0].h ** 2
    phi0 = max(abs(float(eval_phi(solution(a), 0.0)) - 4 * (1 - a))
               for a in (-3.5, -3.0, -2.9, -1.0, 0.0, 0.5, 0.9, 1.0, 3.0))
    ok = (all(v > 0 for v in positive.values())
          and all(abs(m.value) <= 1e-6 for m in touching.values())
          and abs(h2 - 2 / 3) <= 1e-4 and phi0 <= 1e-8)
    record(6, ok, f"min phi (positive set)={min(positive.values()):.3e} "
                  f"min phi at -3,1={touching[-3.0].value:.1e},{touching[1.0].value:.1e} "
                  f"argmin h^2 at -3={h2:.6f} max|phi(0)-4(1-a)|={phi0:.1e}")


def test_criterion_7_non_semisymmetric_example():
    rep = report(1.0, 2)
    rr = max(r.rr_norm for r in rep.points)
    spread = rep.aggregates["scalar_curvature_spread"]["max"]
    ok = rep.passed and rr > 1e-3 and spread > 1e-3 and rep.phi_sign_summary["min_phi"] >= -1e-6
    record(7, ok, f"alpha=1 n=2: max|R.R|={rr:.3e} scalar spread={spread:.3e} "
                  f"min phi={rep.phi_sign_summary['min_phi']:.1e} HP checks pass={rep.passed}")


def test_criterion_8_tensor_algebra():
    g = np.eye(4)
    J = geo.base_complex_structure(2)
    pD = np.diag([1.0, 1.0, 0.0, 0.0])
    tensors = alg.qch_model_tensors(g, J, pD)
    sym = 0.0
    for T in (t.components for t in tensors):
        for x, y, z, u in itertools.product(range(4), repeat=4):
            v = T[x, y, z, u]
            sym = max(sym, abs(v + T[y, x, z, u]), abs(v + T[x, y, u, z]), abs(v - T[z, u, x, y]),
                      abs(v + T[y, z, x, u] + T[z, x, y, u]))
    pipi = float(np.abs(alg.derivation_action(tensors[0], tensors[0])).max())
    pts = max(max(p.symmetry.values()) for r in grid_reports() for p in r.points)
    pts = max(pts, max(max(p.symmetry.values()) for p in report(0.0, 2).points))
    ok = sym <= 1e-12 and pipi <= 1e-12 and pts <= 1e-8
    record(8, ok, f"model symmetries={sym:.1e} |Pi.Pi|={pipi:.1e} curvature symmetries at points={pts:.1e}")


def test_criterion_9_validation_boundary():
    with pytest.raises(ProfileError) as exc:
        p_alpha(-4.0)
    witness = exc.value.witness
    w_err = abs(witness - 2 ** -0.5) if witness is not None else np.inf
    try:
        p_alpha(-3.99)
        accepts = True
    except ProfileError:
        accepts = False
    record(9, w_err <= 1e-9 and accepts, f"alpha=-4 witness error={w_err:.1e} accepts -3.99={accepts}")
