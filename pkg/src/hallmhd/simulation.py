"""Turn a :class:`SimConfig` into a run and write its artifacts."""
from __future__ import annotations

import platform
import time as _time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .config import SimConfig
from .fixedpoint import SolutionTrajectory, WindowConfig, march
from .galerkin import GalerkinState, Physics
from .kernels import BACKEND
from .material_laws import make_law, regularize_law
from .mollifier import InitialData, build_initial_state
from .presets import make_initial_data
from .spectral_basis import Basis, TorusDomain, enumerate_modes, synthesize
from .transport import level_set_histogram


@dataclass(frozen=True, eq=False)
class Setup:
    cfg: SimConfig
    domain: TorusDomain
    basis: Basis
    physics: Physics
    raw: InitialData
    initial: GalerkinState
    window: WindowConfig


def window_config(cfg: SimConfig) -> WindowConfig:
    s = cfg.solver
    return WindowConfig(dt_window=cfg.time.dt_window, picard_tol=s.picard_tol,
                        picard_max_iter=s.picard_max_iter, relaxation=s.relaxation,
                        ode_tol=s.ode_tol, max_halvings=s.max_halvings,
                        char_substep=s.char_substep or None)


def build_setup(cfg: SimConfig) -> Setup:
    d = TorusDomain(cfg.domain.L, cfg.domain.M)
    basis = enumerate_modes(d, cfg.modes.K)
    ini = cfg.init
    lo, hi = ini.rho_min, ini.rho_max
    mu = make_law(cfg.laws.mu, "mu", lo, hi)
    sigma = make_law(cfg.laws.sigma, "sigma", lo, hi)
    eps = cfg.mollify.eps
    if eps > 0:
        mu, sigma = regularize_law(mu, eps), regularize_law(sigma, eps)
    physics = Physics(mu, sigma, cfg.physics.h, lo, hi)
    files = {"rho": ini.rho_file, "u": ini.u_file, "B": ini.B_file} if ini.preset == "file" else None
    raw = make_initial_data(d, ini.preset, amplitude=ini.amplitude, rho_min=lo, rho_max=hi,
                            K_data=ini.K_data, seed=cfg.seed, files=files)
    initial = build_initial_state(raw, eps, basis)
    return Setup(cfg, d, basis, physics, raw, initial, window_config(cfg))


def run_config(cfg: SimConfig, on_window=None):
    """Build and march a config; returns (trajectory, setup)."""
    setup = build_setup(cfg)
    traj = march(setup.initial, cfg.time.T, setup.basis, setup.physics, setup.window, on_window)
    return traj, setup


def snapshot_states(traj: SolutionTrajectory, interval: float):
    """Boundary states to write: first, last and the first state past each interval mark."""
    states = traj.states
    if interval <= 0:
        return [states[0]] if len(states) == 1 else [states[0], states[-1]]
    out, nxt = [states[0]], states[0].t + interval
    for s in states[1:-1]:
        if s.t >= nxt - 1e-12:
            out.append(s)
            nxt = s.t - (s.t - states[0].t) % interval + interval
    if len(states) > 1:
        out.append(states[-1])
    return out


def levelset_rows(traj: SolutionTrajectory, physics: Physics, bins=None):
    lo, hi = physics.rho_lower, physics.rho_upper
    if hi <= lo:
        return []
    rows = []
    for s in traj.states:
        edges, vol = level_set_histogram(s.rho, lo, hi) if bins is None else \
            level_set_histogram(s.rho, lo, hi, bins)
        rows += [(s.t, a, b, v) for a, b, v in zip(edges[:-1], edges[1:], vol)]
    return rows


def write_artifacts(traj: SolutionTrajectory, setup: Setup, run_dir: Path) -> dict:
    """CSV streams and field snapshots for a finished (or failed) run."""
    cfg = setup.cfg
    run_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    ledger_path = run_dir / cfg.output.csv
    io.write_csv(ledger_path, io.LEDGER_COLUMNS, traj.ledger.rows())
    files["ledger_csv"] = str(ledger_path)
    ls_path = ledger_path.with_name(ledger_path.stem + "_levelsets.csv")
    io.write_csv(ls_path, io.LEVELSET_COLUMNS, levelset_rows(traj, setup.physics))
    files["levelset_csv"] = str(ls_path)
    snap_dir = run_dir / cfg.output.snapshot_dir
    snaps = []
    for i, s in enumerate(snapshot_states(traj, cfg.output.snapshot_interval)):
        for name, f in (("rho", s.rho), ("u", synthesize(s.alpha, setup.basis)),
                        ("B", synthesize(s.beta, setup.basis))):
            p = snap_dir / f"{name}_{i:05d}.bin"
            io.write_snapshot(p, f, s.t)
            snaps.append(str(p))
    files["snapshots"] = snaps
    return files


def manifest(cfg: SimConfig, command: str, status: str, *, traj=None, timings=None,
             files=None, verdicts=None, error=None, extra=None) -> dict:
    m = {
        "command": command,
        "status": status,
        "version": io.version_string(),
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "kernel_backend": BACKEND},
        "config": cfg.to_dict() if cfg is not None else None,
        "config_text": cfg.to_text() if cfg is not None else None,
        "timings": timings or {},
        "files": files or {},
        "verdicts": verdicts or [],
        "error": error,
    }
    if traj is not None:
        m["windows"] = [{"t0": r.t0, "t1": r.t1, "depth": r.depth, "iterations": r.iterations,
                         "residuals": r.residuals, "ode_steps": r.ode_steps} for r in traj.records]
        m["retries"] = traj.retries
        m["failure"] = traj.failure
        m["energy_violations"] = traj.energy_violations
        m["t_final"] = traj.states[-1].t
    if extra:
        m.update(extra)
    return m


class Timer:
    def __init__(self):
        self.marks, self._t = {}, _time.perf_counter()

    def mark(self, name):
        now = _time.perf_counter()
        self.marks[name] = now - self._t
        self._t = now
