"""Assembly and time integration of the linearised Galerkin system.

Given a frozen density rho, velocity v and magnetic field H, the coefficient
vectors (alpha, beta) of u = sum alpha_i Theta_i and B = sum beta_i Gamma_i obey

    M alpha' = -(adv + visc)^T alpha - lorentz^T beta
    beta'    = -(hall + resist)^T beta - emf^T alpha

with M_ij = int rho Theta_i.Theta_j and the blocks described on
:class:`AssembledSystem`. ``lorentz`` carries the sign with which the Lorentz
pairing enters, so that lorentz + emf^T = 0 and the coupling drops out of the
energy balance exactly.

Inside a fixed-point window the density is transported, so the mass matrix
changes in time. There the advection block is split into its antisymmetric
part and a symmetric part that equals M'/2 at the continuous level; using the
transported M' for the latter makes the semi-discrete energy identity exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from .material_laws import MaterialLaw, eval_law
from .ode import dopri45
from .spectral_basis import Basis, GridField


@dataclass(frozen=True)
class Physics:
    """Material laws, Hall coefficient and the admissible density range."""

    mu: MaterialLaw
    sigma: MaterialLaw
    hall: float
    rho_lower: float
    rho_upper: float

    def __post_init__(self):
        if self.hall < 0:
            raise ValueError("Hall coefficient must be nonnegative")


@dataclass(frozen=True, eq=False)
class GalerkinState:
    """Coefficients at time t, the density there and cumulative dissipation."""

    t: float
    alpha: np.ndarray
    beta: np.ndarray
    rho: GridField
    d_visc: float = 0.0
    d_resist: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return len(self.alpha)


def _cross_pairs(x, y, tables):
    """sum_a (x_j cross y_i)_a * tables[a]  as an (n, n) array over (i, j)."""
    out = np.zeros(tables[0].shape)
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        out += (np.outer(y[:, c], x[:, b]) - np.outer(y[:, b], x[:, c])) * tables[a]
    return out


def mass_matrix(rho: GridField, basis: Basis) -> np.ndarray:
    M = (basis.e @ basis.e.T) * basis.pair_table(rho.samples)
    return 0.5 * (M + M.T)


@dataclass(eq=False)
class AssembledSystem:
    """Matrices of the linearised system for one set of frozen inputs.

    mass     int rho Theta_i.Theta_j
    adv      int rho (v.grad Theta_i).Theta_j
    visc     int 2 mu(rho) d(Theta_i):d(Theta_j)
    lorentz  -int (curl Gamma_i x H).Theta_j
    emf      int (H x Theta_i).curl Gamma_j
    hall     h int (curl Gamma_i x H)/rho . curl Gamma_j
    resist   int curl Gamma_i . curl Gamma_j / sigma(rho)
    """

    mass: np.ndarray
    adv: np.ndarray
    visc: np.ndarray
    lorentz: np.ndarray
    emf: np.ndarray
    hall: np.ndarray
    resist: np.ndarray
    rho_lower: float
    _chol: tuple | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.mass.shape[0]

    @property
    def skew(self) -> np.ndarray:
        """Antisymmetric part of the advection block."""
        return 0.5 * (self.adv - self.adv.T)

    @property
    def advect_visc(self) -> np.ndarray:
        return self.adv + self.visc

    @property
    def hall_resist(self) -> np.ndarray:
        return self.hall + self.resist

    @property
    def chol(self):
        if self._chol is None:
            self._chol = linalg.cho_factor(self.mass)
        return self._chol


def assemble(rho: GridField, vbar: GridField, Hbar: GridField, basis: Basis,
             physics: Physics) -> AssembledSystem:
    """All seven blocks by trapezoidal quadrature of products on the grid."""
    if rho.min() < physics.rho_lower:
        raise ValueError(f"density minimum {rho.min():.6g} below the lower bound "
                         f"{physics.rho_lower:.6g}: the Hall term degenerates")
    for f in (vbar, Hbar):
        if f.domain != basis.domain or not f.is_vector:
            raise ValueError("frozen velocity and field must be vector fields on the basis domain")
    kap = basis.domain.kappa
    e, w, k = basis.e, basis.w, basis.k.astype(np.float64)
    sg = basis.dsign
    P = basis.pair_table
    r = rho.samples
    v = vbar.samples
    H = Hbar.samples

    EE = e @ e.T
    mass = mass_matrix(rho, basis)

    adv = np.zeros_like(EE)
    for a in range(3):
        adv += k[:, a][:, None] * P(r * v[a], True, False)
    adv *= kap * sg[:, None] * EE

    mu = eval_law(physics.mu, rho).samples
    KE = k @ e.T
    visc = kap ** 2 * np.outer(sg, sg) * ((k @ k.T) * EE + KE * KE.T) * P(mu, True, True)
    visc = 0.5 * (visc + visc.T)

    PL = [P(H[a], True, False) for a in range(3)]
    lorentz = -kap * sg[:, None] * _cross_pairs(e, w, PL)

    PE = [P(H[a], False, True) for a in range(3)]
    # emf_ij uses (e_i x w_j): swap the roles of i and j in the helper
    emf = kap * sg[None, :] * _cross_pairs(e, w, [t.T for t in PE]).T

    if physics.hall > 0:
        PH = [P(H[a] / r, True, True) for a in range(3)]
        hall = physics.hall * kap ** 2 * np.outer(sg, sg) * _cross_pairs(w, w, PH)
        hall = 0.5 * (hall - hall.T)
    else:
        hall = np.zeros_like(EE)

    sig = eval_law(physics.sigma, rho).samples
    resist = kap ** 2 * np.outer(sg, sg) * (w @ w.T) * P(1.0 / sig, True, True)
    resist = 0.5 * (resist + resist.T)
    return AssembledSystem(mass, adv, visc, lorentz, emf, hall, resist, physics.rho_lower)


def _lagrange3(t, knots):
    t0, t1, t2 = knots
    w = np.array([(t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2)),
                  (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2)),
                  (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1))])
    dw = np.array([(2 * t - t1 - t2) / ((t0 - t1) * (t0 - t2)),
                   (2 * t - t0 - t2) / ((t1 - t0) * (t1 - t2)),
                   (2 * t - t0 - t1) / ((t2 - t0) * (t2 - t1))])
    return w, dw


class LinearODE:
    """Right-hand side of the Galerkin ODE on y = [alpha, beta, D_visc, D_resist].

    With ``masses=None`` the mass matrix is the frozen one of ``system`` and the
    full advection block is used. With ``masses=(M0, Mm, M1)`` at ``knots`` the
    mass matrix is the quadratic through them and the symmetric part of
    advection is replaced by M'(t) / 2.
    """

    def __init__(self, system: AssembledSystem, masses=None, knots=None):
        self.sys = system
        self.n = system.n
        self.masses = masses
        self.knots = knots
        if masses is None:
            self.A_T = (system.adv + system.visc).T.copy()
        else:
            self.A_T = (system.skew + system.visc).T.copy()
            self.delta = [Mk - system.mass for Mk in masses]
            self.varying = any(np.any(d != 0) for d in self.delta)
        self.L_T = system.lorentz.T.copy()
        self.D_T = (system.hall + system.resist).T.copy()
        self.E_T = system.emf.T.copy()

    def _solve(self, t, b):
        x = linalg.cho_solve(self.sys.chol, b)
        if self.masses is None or not self.varying:
            return x
        w, _ = _lagrange3(t, self.knots)
        dM = w[0] * self.delta[0] + w[1] * self.delta[1] + w[2] * self.delta[2]
        bn = np.max(np.abs(b))
        for _ in range(50):
            res = b - self.sys.mass @ x - dM @ x
            if np.max(np.abs(res)) <= 1e-16 * max(bn, 1e-300):
                break
            x = x + linalg.cho_solve(self.sys.chol, res)
        return x

    def __call__(self, t, y):
        n = self.n
        a, b = y[:n], y[n:2 * n]
        rhs = -self.A_T @ a - self.L_T @ b
        if self.masses is not None and self.varying:
            _, dw = _lagrange3(t, self.knots)
            Mdot = dw[0] * self.masses[0] + dw[1] * self.masses[1] + dw[2] * self.masses[2]
            rhs -= 0.5 * (Mdot @ a)
        da = self._solve(t, rhs)
        db = -self.D_T @ b - self.E_T @ a
        dv = a @ self.sys.visc @ a
        dr = b @ self.sys.resist @ b
        return np.concatenate([da, db, [dv, dr]])


def pack(state: GalerkinState) -> np.ndarray:
    return np.concatenate([state.alpha, state.beta, [state.d_visc, state.d_resist]])


def unpack(y, t, rho) -> GalerkinState:
    n = (len(y) - 2) // 2
    return GalerkinState(float(t), y[:n].copy(), y[n:2 * n].copy(), rho, float(y[-2]), float(y[-1]))


def step_linear(system: AssembledSystem, state: GalerkinState, dt: float, tol: float,
                label: str = "", fixed_step=None) -> GalerkinState:
    """Advance (alpha, beta) by dt with the frozen system; density unchanged."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rhs = LinearODE(system)
    y, _ = dopri45(rhs, state.t, pack(state), state.t + dt, tol, label=label, fixed_step=fixed_step)
    return unpack(y, state.t + dt, state.rho)


@dataclass
class EnergyLedger:
    times: np.ndarray
    e_kin: np.ndarray
    e_mag: np.ndarray
    d_visc: np.ndarray
    d_resist: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.e_kin + self.e_mag

    @property
    def dissipation(self) -> np.ndarray:
        return self.d_visc + self.d_resist

    @property
    def residual(self) -> np.ndarray:
        return self.total + self.dissipation - self.total[0]

    def rows(self):
        for r in zip(self.times, self.e_kin, self.e_mag, self.d_visc, self.d_resist, self.residual):
            yield tuple(float(x) for x in r)


def state_energy(state: GalerkinState, basis: Basis) -> tuple:
    """(1/2 alpha^T M(rho) alpha, 1/2 |beta|^2)."""
    M = mass_matrix(state.rho, basis)
    return 0.5 * float(state.alpha @ M @ state.alpha), 0.5 * float(state.beta @ state.beta)


def energy_balance(states, basis: Basis) -> EnergyLedger:
    """Energies, cumulative dissipation and balance residual along a trajectory."""
    ek, em = zip(*(state_energy(s, basis) for s in states)) if states else ((), ())
    return EnergyLedger(np.array([s.t for s in states]), np.array(ek), np.array(em),
                        np.array([s.d_visc for s in states]),
                        np.array([s.d_resist for s in states]))


def with_time(state: GalerkinState, t: float) -> GalerkinState:
    return replace(state, t=float(t))
