"""Windowed Picard iteration coupling density transport and the Galerkin ODE.

Each window [t0, t1] carries the iterate (alpha, beta) at three knots t0,
tm = (t0 + t1)/2 and t1. One application of the map F:

1. transports the window-start density along the velocity that is
   quadratic in time through the alpha knots, giving rho(tm) and rho(t1);
2. assembles the linear system at the midpoint inputs (rho, u, B)(tm);
3. integrates the ODE from the window-start coefficients, with the mass
   matrix quadratic in time through the transported densities.

Iterates are relaxed, x <- (1 - w) x + w F(x), until the relative change
measured in the Simpson-weighted L2-in-time norm over the knots falls below
the tolerance. A window that fails is split in halves, recursively.
"""
from __future__ import annotations

import logging
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .galerkin import (GalerkinState, LinearODE, Physics, assemble, energy_balance,
                       mass_matrix, pack, unpack)
from .ode import StepUnderflow, dopri45
from .spectral_basis import Basis, synthesize
from .transport import VelocityTrajectory, advect_density

log = logging.getLogger(__name__)

SIMPSON = np.array([1.0, 4.0, 1.0]) / 6.0
ENERGY_SLACK = 1e-6


@dataclass(frozen=True)
class WindowConfig:
    dt_window: float = 0.1
    picard_tol: float = 1e-8
    picard_max_iter: int = 30
    relaxation: float = 1.0
    ode_tol: float = 1e-9
    max_halvings: int = 6
    first_residual_cap: float = 0.1
    char_substep: float | None = None

    def __post_init__(self):
        if self.dt_window <= 0:
            raise ValueError("dt_window must be positive")
        if self.picard_tol <= 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be at least 1")
        if not 0 < self.relaxation <= 1:
            raise ValueError("relaxation must lie in (0, 1]")
        if self.ode_tol <= 0:
            raise ValueError("ode_tol must be positive")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be nonnegative")


class WindowFailure(RuntimeError):
    def __init__(self, msg, t0, t1, history, depth=0):
        super().__init__(msg)
        self.t0, self.t1, self.history, self.depth = t0, t1, list(history), depth


@dataclass
class WindowRecord:
    t0: float
    t1: float
    depth: int
    iterations: int
    residuals: list
    ode_steps: int = 0


@dataclass
class FnOutput:
    alphas: np.ndarray
    betas: np.ndarray
    mid: GalerkinState
    end: GalerkinState
    ode_steps: int


def rel_change(new_a, new_b, old_a, old_b) -> float:
    """Relative Simpson-weighted L2-in-time norm of the change over the knots."""
    diff = SIMPSON @ (np.sum((new_a - old_a) ** 2, axis=1) + np.sum((new_b - old_b) ** 2, axis=1))
    ref = max(SIMPSON @ (np.sum(new_a ** 2, axis=1) + np.sum(new_b ** 2, axis=1)),
              SIMPSON @ (np.sum(old_a ** 2, axis=1) + np.sum(old_b ** 2, axis=1)))
    if diff == 0.0:
        return 0.0
    return float(np.sqrt(diff / ref))


def apply_Fn(alphas, betas, start: GalerkinState, t1: float, basis: Basis, physics: Physics,
             cfg: WindowConfig, start_mass=None, label="") -> FnOutput:
    """One application of the fixed-point map over [start.t, t1]."""
    t0 = start.t
    tm = 0.5 * (t0 + t1)
    knots = (t0, tm, t1)
    rho0 = start.rho
    if np.any(alphas):
        traj = VelocityTrajectory(knots, alphas, basis)
        rho_m = advect_density(rho0, traj, tm, substep=cfg.char_substep).field
        rho_1 = advect_density(rho0, traj, t1, substep=cfg.char_substep).field
    else:
        rho_m = rho_1 = rho0
    for r in (rho_m, rho_1):
        if r.min() < physics.rho_lower or r.max() > physics.rho_upper:
            raise AssertionError("transported density left its bounds")
    system = assemble(rho_m, synthesize(alphas[1], basis), synthesize(betas[1], basis), basis, physics)
    M0 = mass_matrix(rho0, basis) if start_mass is None else start_mass
    M1 = system.mass if rho_1 is rho_m else mass_matrix(rho_1, basis)
    rhs = LinearODE(system, (M0, system.mass, M1), knots)
    y_m, st = dopri45(rhs, t0, pack(start), tm, cfg.ode_tol, label=label)
    atol = cfg.ode_tol * max(float(np.max(np.abs(pack(start)))), 1e-300)
    y_1, st = dopri45(rhs, tm, y_m, t1, cfg.ode_tol, atol=atol, label=label, stats=st)
    mid, end = unpack(y_m, tm, rho_m), unpack(y_1, t1, rho_1)
    return FnOutput(np.stack([start.alpha, mid.alpha, end.alpha]),
                    np.stack([start.beta, mid.beta, end.beta]), mid, end, st.accepted)


def solve_window(state: GalerkinState, t1: float, basis: Basis, physics: Physics,
                 cfg: WindowConfig, depth: int = 0):
    """Picard iteration on one window; returns (mid, end, record)."""
    label = f"window [{state.t:.6g}, {t1:.6g}]"
    a = np.stack([state.alpha] * 3)
    b = np.stack([state.beta] * 3)
    M0 = mass_matrix(state.rho, basis)
    history = []
    steps = 0
    for it in range(1, cfg.picard_max_iter + 1):
        try:
            out = apply_Fn(a, b, state, t1, basis, physics, cfg, start_mass=M0, label=label)
        except StepUnderflow as exc:
            raise WindowFailure(f"{label}: {exc}", state.t, t1, history, depth) from exc
        steps += out.ode_steps
        res = rel_change(out.alphas, out.betas, a, b)
        history.append(res)
        if not np.isfinite(res):
            raise WindowFailure(f"{label}: non-finite iterate", state.t, t1, history, depth)
        if res <= cfg.picard_tol:
            return out.mid, out.end, WindowRecord(state.t, t1, depth, it, history, steps)
        if it == 1 and res > cfg.first_residual_cap:
            raise WindowFailure(f"{label}: first Picard change {res:.3g} exceeds "
                                f"{cfg.first_residual_cap}", state.t, t1, history, depth)
        w = cfg.relaxation
        a = (1 - w) * a + w * out.alphas
        b = (1 - w) * b + w * out.betas
    raise WindowFailure(f"{label}: no convergence after {cfg.picard_max_iter} iterations "
                        f"(last change {history[-1]:.3g})", state.t, t1, history, depth)


def _run_window(state, t1, basis, physics, cfg, depth, mids, ends, records, failures):
    try:
        mid, end, rec = solve_window(state, t1, basis, physics, cfg, depth)
    except WindowFailure as exc:
        failures.append({"t0": exc.t0, "t1": exc.t1, "depth": depth,
                         "reason": str(exc), "residuals": exc.history})
        if depth >= cfg.max_halvings:
            raise
        log.info("splitting %s at depth %d", f"[{state.t:.6g}, {t1:.6g}]", depth + 1)
        tm = 0.5 * (state.t + t1)
        s = _run_window(state, tm, basis, physics, cfg, depth + 1, mids, ends, records, failures)
        return _run_window(s, t1, basis, physics, cfg, depth + 1, mids, ends, records, failures)
    mids.append(mid)
    ends.append(end)
    records.append(rec)
    return end


@dataclass
class SolutionTrajectory:
    """Window-boundary states, window midpoints and per-window Picard records."""

    states: list
    mids: list
    basis: Basis
    records: list = field(default_factory=list)
    retries: list = field(default_factory=list)
    failure: dict | None = None
    energy_violations: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ledger(self):
        return energy_balance(self.states, self.basis)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def ok(self) -> bool:
        return self.failure is None

    def knots(self):
        """Time-ordered states at all knots (boundaries and midpoints)."""
        out = [self.states[0]]
        for m, e in zip(self.mids, self.states[1:]):
            out += [m, e]
        return out


def march(initial: GalerkinState, T: float, basis: Basis, physics: Physics, cfg: WindowConfig,
          on_window=None) -> SolutionTrajectory:
    """Advance windows of length dt_window from initial.t to T.

    Failures after the allowed halvings stop the march and are reported on
    the returned (partial) trajectory instead of being raised.
    """
    t_start = _time.perf_counter()
    traj = SolutionTrajectory([initial], [], basis)
    E0 = sum(_energy(initial, basis))
    n_win = max(1, int(np.ceil((T - initial.t) / cfg.dt_window - 1e-9)))
    edges = np.linspace(initial.t, T, n_win + 1)
    state = initial
    for t1 in edges[1:]:
        mids, ends, recs, fails = [], [], [], []
        try:
            state = _run_window(state, float(t1), basis, physics, cfg, 0, mids, ends, recs, fails)
        except WindowFailure as exc:
            traj.retries += fails
            traj.failure = {"t0": exc.t0, "t1": exc.t1, "depth": exc.depth,
                            "reason": str(exc), "residuals": exc.history}
            traj.mids += mids
            traj.states += ends
            traj.records += recs
            break
        traj.retries += fails
        traj.mids += mids
        traj.states += ends
        traj.records += recs
        for s in ends:
            ek, em = _energy(s, basis)
            if ek + em + s.d_visc + s.d_resist > E0 * (1 + ENERGY_SLACK):
                traj.energy_violations.append(s.t)
        if on_window is not None:
            on_window(traj, ends)
    traj.wall_time = _time.perf_counter() - t_start
    return traj


def _energy(state, basis):
    M = mass_matrix(state.rho, basis)
    return 0.5 * float(state.alpha @ M @ state.alpha), 0.5 * float(state.beta @ state.beta)
