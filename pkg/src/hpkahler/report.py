"""Serialisation of profiles, verification reports and sweep summaries."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .verifier import DEFAULT_TOLERANCES, VerificationReport, sweep_row


def fmt(x) -> str:
    """17 significant digits, so CSV round-trips exactly."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.16e}"
    return str(x)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


# -- profile ---------------------------------------------------------------


def profile_payload(sol, table: dict, boundary) -> dict:
    d = sol.to_dict()
    d["boundary"] = boundary.to_dict()
    d["table"] = {k: np.asarray(v).tolist() for k, v in table.items()}
    return d


def profile_csv(sol, table: dict, boundary) -> str:
    lines = [f"# alpha={sol.profile.alpha}", f"# L={fmt(sol.L)}"]
    lines += [f"# {k}={fmt(v)}" for k, v in boundary.to_dict().items()]
    cols = ["t", "h", "hp", "f", "phi"]
    body = _csv(cols, zip(*(table[c] for c in cols)))
    return "\n".join(lines) + "\n" + body


def profile_markdown(sol, table: dict, boundary) -> str:
    out = [f"# Profile alpha = {sol.profile.alpha}", "", f"L = {sol.L:.15g}", "", "| residual | value |", "|---|---|"]
    out += [f"| {k} | {v:.3e} |" for k, v in boundary.to_dict().items()]
    out += ["", "| t | h | h' | f | phi |", "|---|---|---|---|---|"]
    for row in zip(*(table[c] for c in ("t", "h", "hp", "f", "phi"))):
        out.append("| " + " | ".join(f"{x:.10g}" for x in row) + " |")
    return "\n".join(out) + "\n"


# -- verification ----------------------------------------------------------

POINT_CHECKS = (
    ("phi", lambda r: r.phi),
    ("hp_residual", lambda r: r.hp_residual),
    ("rr_norm", lambda r: r.rr_norm),
    ("pir_norm", lambda r: r.pir_norm),
    ("qch_a", lambda r: r.qch["a"]),
    ("qch_b", lambda r: r.qch["b"]),
    ("qch_c", lambda r: r.qch["c"]),
    ("qch_residual", lambda r: r.qch["residual"]),
    ("a_plus_half_b_minus_phi", lambda r: r.a_plus_half_b_minus_phi),
    ("nabla_J", lambda r: r.nabla_J),
    ("d_omega", lambda r: r.d_omega),
    ("symmetry", lambda r: max(r.symmetry.values())),
    ("j_invariance", lambda r: r.j_invariance),
    ("killing", lambda r: max(r.killing.values())),
    ("scalar_curvature", lambda r: r.scalar_curvature),
    ("hol_sec_probe", lambda r: r.hol_sec_probe),
)


def report_json(rep: VerificationReport) -> str:
    return to_json(rep.to_dict())


def report_csv(rep: VerificationReport) -> str:
    header = ["alpha", "n", "point", "t", "psi", "check", "value"]
    rows = []
    for i, r in enumerate(rep.points):
        for name, get in POINT_CHECKS:
            rows.append([rep.config["alpha"], rep.config["n"], i, r.point["t"], r.point["psi"], name, get(r)])
    return _csv(header, rows)


def report_markdown(rep: VerificationReport) -> str:
    cfg = rep.config
    out = [f"# Verification alpha = {cfg['alpha']}, n = {cfg['n']}", ""]
    if rep.error:
        return "\n".join(out + [f"**error:** {rep.error}", ""])
    out += [
        f"- L = {rep.profile['L']:.15g}",
        f"- min phi on [0, L] = {rep.phi_sign_summary['min_phi']:.6g} at h = {rep.phi_sign_summary['argmin_h']:.6g}",
        f"- orientation = {rep.calibration['orientation']:+d}",
        f"- scalar curvature spread = {rep.aggregates['scalar_curvature_spread']['max']:.3e}",
        "",
        "| check | max | mean | tolerance | verdict |",
        "|---|---|---|---|---|",
    ]
    for k in DEFAULT_TOLERANCES:
        a = rep.aggregates[k]
        out.append(f"| {k} | {a['max']:.3e} | {a['mean']:.3e} | {cfg['tolerances'][k]:.1e} | {rep.verdicts[k]} |")
    out += ["", f"**{'PASS' if rep.passed else 'FAIL'}**", ""]
    return "\n".join(out)


def summary_text(rep: VerificationReport) -> str:
    cfg = rep.config
    head = f"alpha={cfg['alpha']} n={cfg['n']}"
    if rep.error:
        return f"{head}: ERROR {rep.error}\n"
    lines = [f"{head} L={rep.profile['L']:.12g} points={len(rep.points)} "
             f"orientation={rep.calibration['orientation']:+d}"]
    for k in DEFAULT_TOLERANCES:
        lines.append(f"  {k:<14} max={rep.aggregates[k]['max']:.3e}  tol={cfg['tolerances'][k]:.1e}  "
                     f"{rep.verdicts[k].upper()}")
    lines.append(f"  {'qch a,b,c':<14} at first point = " + ", ".join(
        f"{rep.points[0].qch[k]:.9g}" for k in "abc"))
    lines.append(f"  min phi = {rep.phi_sign_summary['min_phi']:.6g}; "
                 f"scalar curvature spread = {rep.aggregates['scalar_curvature_spread']['max']:.3e}")
    lines.append("PASS" if rep.passed else "FAIL")
    return "\n".join(lines) + "\n"


def render_report(rep: VerificationReport, fmt_name: str) -> str:
    return {"json": report_json, "csv": report_csv, "md": report_markdown}[fmt_name](rep)


# -- sweep -----------------------------------------------------------------

SWEEP_COLUMNS = ["alpha", "n", "L", "min_phi", "max_hp", "max_qch", "scalar_spread", "passed", "error"]


def render_sweep(reports, fmt_name: str) -> str:
    rows = [sweep_row(r) for r in reports]
    if fmt_name == "json":
        return to_json({"schema": "hpkahler.sweep/1", "rows": rows})
    if fmt_name == "csv":
        return _csv(SWEEP_COLUMNS, ([row[c] for c in SWEEP_COLUMNS] for row in rows))
    out = ["| " + " | ".join(SWEEP_COLUMNS) + " |", "|" + "---|" * len(SWEEP_COLUMNS)]
    for row in rows:
        cells = []
        for c in SWEEP_COLUMNS:
            v = row[c]
            cells.append(f"{v:.6g}" if isinstance(v, float) else str(v))
        out.append("| " + " | ".join(cells) + " |")
    return "\n".join(out) + "\n"
