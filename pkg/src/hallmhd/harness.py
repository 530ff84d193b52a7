"""Exact-solution checks, relative-energy comparison and refinement studies."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fixedpoint import SolutionTrajectory
from .galerkin import Physics
from .material_laws import MaterialLaw
from .presets import abc_field
from .spectral_basis import (Basis, GridField, TorusDomain, curl, deformation_tensor, gradient,
                             synthesize)
from .transport import level_set_histogram


def beltrami_reference(amplitude: float, sigma_const: float, L: float, t: float,
                       M: int = 16) -> GridField:
    """ABC field decaying as exp(-(2 pi / L)^2 t / sigma); curl B = (2 pi / L) B."""
    d = TorusDomain(L, M)
    decay = np.exp(-(d.kappa ** 2) * t / sigma_const)
    return GridField(d, abc_field(d, amplitude) * decay, "vector3")


# ----------------------------------------------------------------------------
# relative energy


@dataclass
class RelativeEnergy:
    """Time series of the weak-strong relative energy and its bounds.

    ``total`` is the left side (energies plus cumulative dissipation);
    ``gronwall_driver`` is the running integral of C(s) times the squared
    differences; ``hoelder_rhs`` the running integral of the right side of the
    Hoelder-estimated inequality with measured norms; ``bound`` the
    exponential Gronwall envelope.
    """

    t: np.ndarray
    term_u: np.ndarray
    term_B: np.ndarray
    term_rho: np.ndarray
    diss_u: np.ndarray
    diss_B: np.ndarray
    C: np.ndarray
    gronwall_driver: np.ndarray
    hoelder_rhs: np.ndarray
    bound: np.ndarray
    strong_norms: dict

    @property
    def total(self) -> np.ndarray:
        return self.term_u + self.term_B + self.term_rho + self.diss_u + self.diss_B

    def at(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} not among the comparison times")
        return i


def _pad(c, n):
    out = np.zeros(n)
    out[:len(c)] = c
    return out


def _lipschitz(law: MaterialLaw) -> float:
    xi = np.linspace(law.rho_lower, law.rho_upper, 2001)
    if len(xi) < 2 or law.rho_upper == law.rho_lower:
        return 0.0
    return float(np.max(np.abs(np.diff(law(xi)) / np.diff(xi))))


def _cumtrapz(y, t):
    out = np.zeros(len(t))
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def _common_knots(weak: SolutionTrajectory, strong: SolutionTrajectory, tol=1e-9):
    wk, sk = weak.knots(), strong.knots()
    st = np.array([s.t for s in sk])
    pairs = []
    for w in wk:
        j = int(np.argmin(np.abs(st - w.t)))
        if abs(st[j] - w.t) <= tol:
            pairs.append((w, sk[j]))
    return pairs


def _lp(f, cv, p):
    mag = np.sqrt(np.sum(f * f, axis=0)) if f.ndim == 4 else np.abs(f)
    if p == np.inf:
        return float(mag.max())
    return float((np.sum(mag ** p) * cv) ** (1.0 / p))


def relative_energy(weak: SolutionTrajectory, strong: SolutionTrajectory,
                    physics: Physics, min_ratio: float = 2.0) -> RelativeEnergy:
    """Relative energy of ``weak`` against a finer ``strong`` trajectory.

    Differences of u and B are taken exactly in coefficient space (the
    coarse basis is a prefix of the fine one). Both runs must share the grid
    so the densities can be compared samplewise.
    """
    bw, bs = weak.basis, strong.basis
    if bw.domain != bs.domain:
        raise ValueError("weak and strong runs must share the domain and grid")
    if bs.K < min_ratio * bw.K:
        raise ValueError(f"reference cutoff K={bs.K} is below {min_ratio:g} x K={bw.K}")
    pairs = _common_knots(weak, strong)
    if len(pairs) < 2:
        raise ValueError("trajectories share fewer than two time knots")
    d = bs.domain
    cv = d.cell_volume
    n = bs.n
    kap2 = (d.kappa * bs.kmag) ** 2
    rl, mu_l, sig_u = physics.rho_lower, physics.mu.lower_bound, physics.sigma.upper_bound
    t = np.array([p[0].t for p in pairs])

    du2, dB2, dr2, gdu2, cdB2 = (np.zeros(len(t)) for _ in range(5))
    norms = {k: np.zeros(len(t)) for k in
             ("curlB_inf", "u_inf", "gradu_inf", "gradB_inf", "u_L3", "dtu_L3", "dtB_L3",
              "B_inf", "inv_rho_inf", "rho_inf", "gradrho_L3", "du_L6", "du_u_inf")}
    strong_u = []
    for i, (w, s) in enumerate(pairs):
        da = _pad(w.alpha, n) - s.alpha
        db = _pad(w.beta, n) - s.beta
        du2[i], dB2[i] = da @ da, db @ db
        gdu2[i], cdB2[i] = kap2 @ (da * da), kap2 @ (db * db)
        dr2[i] = np.sum((w.rho.samples - s.rho.samples) ** 2) * cv
        uh = synthesize(s.alpha, bs)
        Bh = synthesize(s.beta, bs)
        strong_u.append((uh.samples, Bh.samples))
        J = synthesize(bs.curl_matrix @ s.beta, bs).samples
        norms["curlB_inf"][i] = _lp(J, cv, np.inf)
        norms["u_inf"][i] = _lp(uh.samples, cv, np.inf)
        norms["u_L3"][i] = _lp(uh.samples, cv, 3)
        norms["B_inf"][i] = _lp(Bh.samples, cv, np.inf)
        gu = gradient(uh).samples
        norms["gradu_inf"][i] = float(np.sqrt(np.sum(gu ** 2, axis=(0, 1))).max())
        gB = gradient(Bh).samples
        norms["gradB_inf"][i] = float(np.sqrt(np.sum(gB ** 2, axis=(0, 1))).max())
        norms["inv_rho_inf"][i] = 1.0 / s.rho.min()
        norms["rho_inf"][i] = max(s.rho.max(), w.rho.max())
        norms["gradrho_L3"][i] = _lp(gradient(s.rho).samples, cv, 3)
        norms["du_L6"][i] = _lp(synthesize(da, bs).samples, cv, 6)
        norms["du_u_inf"][i] = float(np.sqrt(np.sum(deformation_tensor(uh).samples ** 2, axis=(0, 1))).max())
    # time derivatives of the strong fields by second-order differences over knots
    U = np.stack([u for u, _ in strong_u])
    Bs = np.stack([b for _, b in strong_u])
    dU = np.gradient(U, t, axis=0, edge_order=2) if len(t) > 2 else np.gradient(U, t, axis=0)
    dB = np.gradient(Bs, t, axis=0, edge_order=2) if len(t) > 2 else np.gradient(Bs, t, axis=0)
    for i in range(len(t)):
        norms["dtu_L3"][i] = _lp(dU[i], cv, 3)
        norms["dtB_L3"][i] = _lp(dB[i], cv, 3)

    X, Yb, R = np.sqrt(du2), np.sqrt(dB2), np.sqrt(dr2)
    G, Jd = np.sqrt(gdu2), np.sqrt(cdB2)
    a, ub, gu = norms["curlB_inf"], norms["u_inf"], norms["gradu_inf"]
    ir, rmax, bb = norms["inv_rho_inf"], norms["rho_inf"], norms["B_inf"]
    h = physics.hall
    lip_s = _lipschitz(physics.sigma) / physics.sigma.lower_bound ** 2
    lip_m = _lipschitz(physics.mu)
    # Sobolev-type ratio |du|_L6 / |grad du|_L2, measured
    cs = np.divide(norms["du_L6"], G, out=np.zeros_like(G), where=G > 0)

    hoelder = (Yb * Jd * a * ir * (1 + 2 * rmax) * max(h, 1.0)
               + Yb * Jd * ub + Yb * X * a
               + R * norms["du_L6"] * (norms["dtu_L3"] + norms["u_L3"] * gu)
               + rmax * X ** 2 * gu
               + R * Jd * a + R * X * ub
               + R * Jd * ir * (1 + bb * a) * max(h, 1.0)
               + R * norms["du_L6"] * norms["gradrho_L3"])

    # Young absorption into half of the dissipation: four curl terms share
    # J^2 / (2 sigma_max), three gradient terms share mu_min G^2
    kj = 2.0 * sig_u
    kg = 3.0 / (2.0 * mu_l)
    c_B = kj * ((a * ir * (1 + 2 * rmax) * h) ** 2 + ub ** 2) + 0.5 * a
    c_R = (kj * ((lip_s * a) ** 2 + (ir * (1 + bb * a) * h) ** 2)
           + kg * cs ** 2 * ((norms["dtu_L3"] + norms["u_L3"] * gu) ** 2 + norms["gradrho_L3"] ** 2
                             + (2 * lip_m * norms["du_u_inf"]) ** 2)
           + 0.5 * ub)
    c_u = 0.5 * a + rmax * gu + 0.5 * ub
    C = np.maximum(np.maximum(c_u, c_B), c_R)

    term_u = 0.5 * rl * du2
    term_B = 0.5 * dB2
    term_rho = 0.5 * dr2
    diss_u = mu_l * _cumtrapz(gdu2, t)
    diss_B = _cumtrapz(cdB2, t) / sig_u
    Y0 = term_u[0] + term_B[0] + term_rho[0]
    m = min(rl, 1.0)
    chat = 4.0 * C / m
    bound = 2.0 * Y0 * np.exp(_cumtrapz(chat, t))
    return RelativeEnergy(t, term_u, term_B, term_rho, diss_u, diss_B, C,
                          _cumtrapz(C * (du2 + dB2 + dr2), t), _cumtrapz(hoelder, t), bound, norms)


# ----------------------------------------------------------------------------
# refinement studies


def _trajectory_diffs(a: SolutionTrajectory, b: SolutionTrajectory):
    """L2-in-time differences of (rho, alpha, beta) over shared boundary times."""
    n = max(a.basis.n, b.basis.n)
    tb = np.array([s.t for s in b.states])
    rows = []
    for s in a.states:
        j = int(np.argmin(np.abs(tb - s.t)))
        if abs(tb[j] - s.t) > 1e-9:
            continue
        o = b.states[j]
        cv = s.rho.domain.cell_volume
        same_grid = s.rho.domain == o.rho.domain
        dr = np.sum((s.rho.samples - o.rho.samples) ** 2) * cv if same_grid else np.nan
        rows.append((s.t, dr, np.sum((_pad(s.alpha, n) - _pad(o.alpha, n)) ** 2),
                     np.sum((_pad(s.beta, n) - _pad(o.beta, n)) ** 2)))
    r = np.array(rows)
    if len(r) < 2:
        return {"rho": np.nan, "alpha": np.nan, "beta": np.nan}
    return {k: float(np.sqrt(np.trapezoid(r[:, c], r[:, 0]))) for c, k in ((1, "rho"), (2, "alpha"), (3, "beta"))}


def fitted_rate(x, y) -> float:
    """Slope of log y against log x (nan when fewer than two positive points)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def study_levels(cfg, axis: str, levels: int):
    """Configs for each level of a refinement study along ``axis``."""
    if levels < 3:
        raise ValueError("a refinement study needs at least 3 levels")
    out = []
    for l in range(levels):
        if axis == "modes_n":
            K = cfg.modes.K + l
            M = max(cfg.domain.M, 4 * (cfg.modes.K + levels - 1))
            out.append(replace(cfg, modes=replace(cfg.modes, K=K), domain=replace(cfg.domain, M=M)))
        elif axis == "mollify_eps":
            if cfg.mollify.eps <= 0:
                raise ValueError("mollify_eps study needs mollify.eps > 0")
            out.append(replace(cfg, mollify=replace(cfg.mollify, eps=cfg.mollify.eps / 2 ** l)))
        elif axis == "tolerance":
            s = replace(cfg.solver, ode_tol=cfg.solver.ode_tol / 10 ** l,
                        picard_tol=cfg.solver.picard_tol / 10 ** l)
            out.append(replace(cfg, solver=s))
        else:
            raise ValueError(f"unknown study axis {axis!r}")
    return out


def level_value(cfg, axis):
    return {"modes_n": lambda c: c.modes.K, "mollify_eps": lambda c: c.mollify.eps,
            "tolerance": lambda c: c.solver.ode_tol}[axis](cfg)


def refinement_study(cfg, axis: str, levels: int, runner=None) -> dict:
    """Run each level and report Cauchy differences, decay rates and measure drift.

    ``runner(cfg)`` must return (trajectory, setup) as :func:`simulation.run_config`
    does; it defaults to that function.
    """
    if runner is None:
        from .simulation import run_config
        runner = run_config
    cfgs = study_levels(cfg, axis, levels)
    runs, report = [], {"axis": axis, "levels": [], "cauchy": [], "failure": None}
    for c in cfgs:
        try:
            traj, setup = runner(c)
        except Exception as exc:  # a level that cannot even start
            report["failure"] = {"level": level_value(c, axis), "reason": str(exc)}
            break
        runs.append((c, traj, setup))
        rho0 = traj.states[0].rho
        rhoT = traj.states[-1].rho
        lo, hi = setup.physics.rho_lower, setup.physics.rho_upper
        if hi > lo:
            _, h0 = level_set_histogram(rho0, lo, hi)
            _, hT = level_set_histogram(rhoT, lo, hi)
            drift = float(np.max(np.abs(h0 - hT)))
        else:
            drift = 0.0
        entry = {"level": level_value(c, axis), "ok": traj.ok, "windows": len(traj.records),
                 "measure_drift": drift, "t_final": traj.states[-1].t,
                 "energy_residual": float(np.max(np.abs(traj.ledger.residual)))}
        if axis == "mollify_eps":
            entry["rho0_mollify_error"] = float(np.sqrt(np.sum((rho0.samples - setup.raw.rho0.samples) ** 2)
                                                        * rho0.domain.cell_volume))
        report["levels"].append(entry)
        if not traj.ok:
            report["failure"] = {"level": entry["level"], "reason": traj.failure["reason"]}
            break
    for (c0, a, _), (c1, b, _) in zip(runs, runs[1:]):
        report["cauchy"].append({"from": level_value(c0, axis), "to": level_value(c1, axis),
                                 **_trajectory_diffs(a, b)})
    if len(report["cauchy"]) >= 2:
        xs = [e["to"] for e in report["cauchy"]]
        report["rates"] = {k: fitted_rate(xs, [e[k] for e in report["cauchy"]])
                           for k in ("rho", "alpha", "beta")}
    return report
