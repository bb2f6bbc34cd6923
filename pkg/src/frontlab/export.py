"""File writers for computed results (CSV and JSON)."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .spectrum import DEFAULT_XI, SIDES, dispersion_curves


def _num(v) -> str:
    return repr(float(v))


def _clean(obj):
    """Make numpy scalars/arrays and non-finite floats JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def _write_rows(path, header, rows, comments=()) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def profile_csv(front, path) -> Path:
    comments = [f"gamma_star = {_num(front.gamma_star)}", f"c_star = {_num(front.c_star)}",
                f"tau = {_num(front.tau)}", f"eta_minus = {_num(front.eta_minus)}",
                f"eta_plus = {_num(front.eta_plus)}"]
    rows = ([_num(a), _num(b), _num(c), _num(d)]
            for a, b, c, d in zip(front.xi, front.U, front.U_x, front.U_xx))
    return _write_rows(path, ["xi", "U", "U_x", "U_xx"], rows, comments)


def read_profile_csv(path) -> tuple[dict, np.ndarray]:
    """(header values, array with columns xi, U, U_x, U_xx)."""
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, val = line[1:].split("=")
            meta[key.strip()] = float(val)
    data = np.loadtxt(path, delimiter=",", skiprows=len(meta) + 1)
    return meta, data


def dispersion_csvs(data, outdir, xi_grid=None, tol: float = 1e-9) -> list[Path]:
    """One file per side and branch, columns xi, re_lambda, im_lambda, side, branch."""
    xi = DEFAULT_XI if xi_grid is None else np.asarray(xi_grid, dtype=float)
    paths = []
    for side in SIDES:
        for curve in dispersion_curves(data, side, xi, tol):
            rows = ([_num(x), _num(l.real), _num(l.imag), side, curve.branch]
                    for x, l in zip(curve.xi, curve.lam))
            p = Path(outdir) / f"dispersion_{side}_branch{curve.branch}.csv"
            paths.append(_write_rows(p, ["xi", "re_lambda", "im_lambda", "side", "branch"], rows))
    return paths


def evans_csv(report, path) -> Path:
    rows = ([_num(l.real), _num(l.imag), _num(d.real), _num(d.imag), _num(abs(d))]
            for l, d in zip(report.lam, report.D))
    return _write_rows(path, ["re_lambda", "im_lambda", "re_D", "im_D", "abs_D"], rows,
                       [f"contour = {report.contour}", f"winding = {report.winding}"])


def trajectory_csv(traj, path) -> Path:
    """Row per snapshot: t followed by the u samples; the first row holds the grid."""
    rows = [["x"] + [_num(v) for v in traj.x]]
    rows += [[_num(t)] + [_num(v) for v in u] for t, u in zip(traj.t, traj.u)]
    return _write_rows(path, ["t", "u..."], rows, [f"frame_speed = {_num(traj.c)}",
                                                   f"dt = {_num(traj.dt)}"])


def manifold_csv(traces, path) -> Path:
    """(V, W) points of saddle-manifold traces, columns gamma, side, V, W."""
    rows = []
    for tr in traces:
        rows += [[_num(tr.gamma), tr.side, _num(v), _num(w)] for v, w in zip(tr.V, tr.omega)]
    return _write_rows(path, ["gamma", "side", "V", "W"], rows)
