"""Per-run verdicts: every check that can be judged from one trajectory."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import check_cancellations, divergence_residual
from .fixedpoint import apply_Fn, rel_change
from .harness import beltrami_reference
from .spectral_basis import synthesize


@dataclass(frozen=True)
class Verdict:
    criterion: str
    value: float
    threshold: float
    passed: bool
    note: str = ""

    def as_dict(self):
        return {"criterion": self.criterion, "value": self.value, "threshold": self.threshold,
                "verdict": "pass" if self.passed else "fail", "note": self.note}

    def line(self):
        return (f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion}: "
                f"{self.value:.3e} (threshold {self.threshold:.3e}){' ' + self.note if self.note else ''}")


def _le(name, value, thr, note=""):
    return Verdict(name, float(value), float(thr), bool(value <= thr), note)


def energy_checks(traj, cfg):
    led = traj.ledger
    E0 = led.total[0]
    tol = max(1e-6 * E0, 10 * (cfg.solver.picard_tol + cfg.solver.ode_tol) * E0)
    excess = np.max(led.total + led.dissipation - E0 * (1 + 1e-6))
    steps = np.diff(led.total + led.dissipation)
    return [
        _le("energy_balance", np.max(np.abs(led.residual)), tol, "max |E(t)+D(t)-E(0)|"),
        _le("energy_inequality", max(excess, 0.0), 0.0, "max excess of E(t)+D(t) over E(0)(1+1e-6)"),
        _le("energy_monotone", max(float(np.max(steps)) if len(steps) else 0.0, 0.0), tol,
            "largest increase of E+D between outputs"),
    ]


def density_checks(traj, physics):
    lo = min(float(s.rho.min()) for s in traj.states)
    hi = max(float(s.rho.max()) for s in traj.states)
    return [_le("density_lower_bound", physics.rho_lower - lo, 0.0, f"min rho = {lo!r}"),
            _le("density_upper_bound", hi - physics.rho_upper, 0.0, f"max rho = {hi!r}")]


def field_checks(traj, basis):
    div, pw, cr = 0.0, 0.0, 0.0
    for s in traj.states:
        u, B = synthesize(s.alpha, basis), synthesize(s.beta, basis)
        div = max(div, divergence_residual(u), divergence_residual(B))
        rep = check_cancellations(u, B)
        pw, cr = max(pw, rep.pointwise), max(cr, rep.cross)
    return [_le("divergence", div, 1e-10), _le("cancellation_pointwise", pw, 1e-14),
            _le("cancellation_cross", cr, 1e-12)]


def fixed_point_check(traj, basis, physics, window_cfg, windows=(0, -1)):
    """Re-apply the window map at converged knots; change must be <= 2 picard_tol."""
    worst = 0.0
    n = len(traj.mids)
    for w in sorted({i % n for i in windows}) if n else []:
        s0, sm, s1 = traj.states[w], traj.mids[w], traj.states[w + 1]
        a = np.stack([s0.alpha, sm.alpha, s1.alpha])
        b = np.stack([s0.beta, sm.beta, s1.beta])
        out = apply_Fn(a, b, s0, s1.t, basis, physics, window_cfg)
        worst = max(worst, rel_change(out.alphas, out.betas, a, b))
    return _le("fixed_point_consistency", worst, 2 * window_cfg.picard_tol)


def beltrami_check(traj, setup):
    """Decay against the analytic ABC solution; empty when the run is not that case."""
    cfg = setup.cfg
    if cfg.init.preset != "beltrami" or not setup.physics.sigma.is_constant or cfg.mollify.eps:
        return []
    end = traj.states[-1]
    sig = setup.physics.sigma.coeffs[0]
    ref = beltrami_reference(cfg.init.amplitude, sig, cfg.domain.L, end.t, cfg.domain.M)
    B = synthesize(end.beta, setup.basis)
    err = B.samples - ref.samples
    rel = np.sqrt(np.sum(err ** 2) / np.sum(ref.samples ** 2))
    u = synthesize(end.alpha, setup.basis)
    return [_le("beltrami_decay", rel, 1e-6, f"relative L2 error of B at t={end.t:g}"),
            _le("beltrami_velocity", u.norm(), 1e-8, "|u| at final time")]


def run_checks(traj, setup) -> list:
    out = energy_checks(traj, setup.cfg)
    out += density_checks(traj, setup.physics)
    out += field_checks(traj, setup.basis)
    if traj.mids:
        out.append(fixed_point_check(traj, setup.basis, setup.physics, setup.window))
    out += beltrami_check(traj, setup)
    return out
