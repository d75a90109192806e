"""Deterministic on-disk formats for runs.

Snapshots are columnar text (x rho u m E z w) with '#' header lines, monitor
series go to CSV, violations to JSON.  Every float is rendered with 17
significant digits so repeated runs of the same build are byte-identical;
wall-clock timing lives in its own file outside the determinism contract.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import Boundary, DeviceProfile, GasModel, Grid1D, PressureConvention
from .monitors import MonitorReport
from .solver import Snapshot, Trajectory


def fmt(x) -> str:
    return format(float(x), ".17g")


def snapshot_text(snap: Snapshot, model: GasModel, grid: Grid1D) -> str:
    z, w = model.riemann_invariants(snap.rho, snap.mom)
    u = snap.mom / snap.rho
    lines = [
        f"# step = {snap.step}",
        f"# time = {fmt(snap.time)}",
        f"# gamma = {fmt(model.gamma)}",
        f"# delta = {fmt(model.delta)}",
        f"# pressure_convention = {model.convention.value}",
        "# columns: x rho u m E z w",
    ]
    cols = [grid.centers, snap.rho, u, snap.mom, snap.e_vals, z, w]
    for row in zip(*cols):
        lines.append(" ".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_snapshot(path, snap: Snapshot, model: GasModel, grid: Grid1D):
    Path(path).write_text(snapshot_text(snap, model, grid))


def read_snapshot(path) -> Snapshot:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                meta[key.strip()] = val.strip()
            continue
        if line.strip():
            rows.append([float(v) for v in line.split()])
    data = np.array(rows)
    return Snapshot(step=int(meta["step"]), time=float(meta["time"]),
                    rho=data[:, 1], mom=data[:, 3], e_vals=data[:, 4])


def monitors_csv_text(report: MonitorReport) -> str:
    lines = [",".join(report.columns)]
    for row in report.rows:
        cells = [str(int(row[0]))] + [fmt(v) for v in row[1:]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def profile_text(profile: DeviceProfile, grid: Grid1D) -> str:
    lines = [
        f"# e_minus = {fmt(profile.e_minus)}",
        f"# uniform_ok = {profile.uniform_ok}",
        "# columns: x a b c",
    ]
    for row in zip(grid.centers, profile.a_vals, profile.b_vals,
                   profile.c_vals):
        lines.append(" ".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def read_profile(path, grid: Grid1D) -> DeviceProfile:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                meta[key.strip()] = val.strip()
            continue
        if line.strip():
            rows.append([float(v) for v in line.split()])
    data = np.array(rows)
    return DeviceProfile.build(grid, data[:, 1], data[:, 2],
                               float(meta["e_minus"]))


def write_run_dir(out_dir, traj: Trajectory, profile: DeviceProfile,
                  report: MonitorReport, config_echo: dict,
                  extra_report: dict | None = None) -> Path:
    """Lay out a run directory: report.json, monitors.csv, violations.json,
    profile.dat, snapshots/."""
    out = Path(out_dir)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    model, grid = traj.model, traj.grid
    paths = []
    for snap in traj.snapshots:
        p = out / "snapshots" / f"snap_{snap.step:08d}.dat"
        write_snapshot(p, snap, model, grid)
        paths.append(str(p.relative_to(out)))
    (out / "monitors.csv").write_text(monitors_csv_text(report))
    (out / "violations.json").write_text(json_text(report.violations))
    (out / "profile.dat").write_text(profile_text(profile, grid))
    payload = {
        "config": config_echo,
        "summary": report.summary,
        "snapshots": paths,
        "n_violations": len(report.violations),
    }
    if extra_report:
        payload.update(extra_report)
    (out / "report.json").write_text(json_text(payload))
    return out


def load_run_dir(run_dir):
    """Read back config echo, snapshots, and the profile of a finished run."""
    out = Path(run_dir)
    payload = json.loads((out / "report.json").read_text())
    cfg = payload["config"]
    grid = Grid1D(x_min=float(cfg["x_min"]), x_max=float(cfg["x_max"]),
                  n_cells=int(cfg["n_cells"]),
                  boundary=Boundary(cfg["boundary"]))
    model = GasModel(gamma=float(cfg["gamma"]), delta=float(cfg["delta"]),
                     convention=PressureConvention(cfg["pressure_convention"]))
    profile = read_profile(out / "profile.dat", grid)
    snaps = [read_snapshot(out / rel) for rel in payload["snapshots"]]
    traj = Trajectory(grid=grid, model=model, snapshots=snaps)
    traj.min_rho_ever = min(float(np.min(s.rho)) for s in snaps)
    traj.n_steps = snaps[-1].step if snaps else 0
    return payload, traj, profile
