"""Numerical checks of the energy identities, cancellations and weak forms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .galerkin import GalerkinState, Physics
from .material_laws import eval_law
from .spectral_basis import (Basis, GridField, curl, deformation_tensor, divergence, gradient,
                             inner_product, synthesize)


def total_energy(state: GalerkinState, basis: Basis) -> tuple:
    """(1/2 int rho |u|^2, 1/2 int |B|^2) by grid quadrature of synthesized fields."""
    u = synthesize(state.alpha, basis)
    B = synthesize(state.beta, basis)
    return 0.5 * inner_product(u, u, state.rho), 0.5 * inner_product(B, B)


@dataclass(frozen=True)
class CancellationReport:
    pointwise: float
    cross: float
    lorentz_power: float
    emf_power: float

    def ok(self, tol_pointwise=1e-14, tol_cross=1e-12) -> bool:
        return self.pointwise <= tol_pointwise and self.cross <= tol_cross


def check_cancellations(u: GridField, B: GridField) -> CancellationReport:
    """Residuals of the two cancellations that remove the coupling from the energy.

    pointwise: max |(curl B x B) . curl B| / max(|curl B|^2 |B|)
    cross:     |<curl B x B, u> - <B x u, curl B>| / (|curl B| |B| |u|), i.e. the
               net power of the Lorentz force plus the power it draws from the
               induction equation, which enters there with the opposite sign.
    """
    J = curl(B).samples
    b = B.samples
    JxB = np.cross(J, b, axis=0)
    trip = np.sum(JxB * J, axis=0)
    scale = np.max(np.sum(J * J, axis=0) * np.sqrt(np.sum(b * b, axis=0)))
    pointwise = float(np.max(np.abs(trip)) / scale) if scale > 0 else 0.0
    d = u.domain
    lor = inner_product(GridField(d, JxB, "vector3"), u)
    emf = inner_product(GridField(d, np.cross(b, u.samples, axis=0), "vector3"), GridField(d, J, "vector3"))
    norms = GridField(d, J, "vector3").norm() * B.norm() * u.norm()
    cross = abs(lor - emf) / norms if norms > 0 else 0.0
    return CancellationReport(pointwise, float(cross), lor, emf)


def divergence_residual(field: GridField) -> float:
    """||div f|| / ||f|| in L2 with spectral derivatives."""
    n = field.norm()
    if n == 0:
        return 0.0
    return divergence(field).norm() / n


# ----------------------------------------------------------------------------
# weak-form residuals


@dataclass(frozen=True)
class SpaceTimeMode:
    """Spatial mode times a time profile vanishing at T."""

    space: int
    power: int

    def profile(self, t, T):
        return (1.0 - t / T) ** self.power

    def dprofile(self, t, T):
        return -self.power / T * (1.0 - t / T) ** (self.power - 1)


def default_test_bank(n_space=6):
    return [SpaceTimeMode(i, p) for i in range(n_space) for p in (1, 2)]


def _scalar_test(basis: Basis, i: int):
    """Scalar companion of mode i: c * phase(kappa k.x) and its gradient."""
    d = basis.domain
    el = basis[i]
    th = d.kappa * sum(k * x for k, x in zip(el.wavevector, d.coords()))
    c = basis.norm_factor
    if el.phase == "cos":
        f, g = np.cos(th), -np.sin(th)
    else:
        f, g = np.sin(th), np.cos(th)
    grad = np.stack([c * d.kappa * k * g for k in el.wavevector])
    return c * f, grad


def _simpson_weights(times):
    """Composite Simpson weights on knots (start, mid, end) per window."""
    t = np.asarray(times)
    w = np.zeros(len(t))
    for s in range(0, len(t) - 2, 2):
        h = t[s + 2] - t[s]
        w[s] += h / 6
        w[s + 1] += 4 * h / 6
        w[s + 2] += h / 6
    return w


def weak_residuals(knots, basis: Basis, physics: Physics, bank=None, T=None) -> dict:
    """Residuals of the density, momentum and induction weak forms.

    ``knots`` are states at window starts, midpoints and ends in time order
    (as returned by ``SolutionTrajectory.knots``). Each entry of the result is
    a list of (test function, absolute residual, scale) with scale the largest
    magnitude of any term entering that equation over the whole bank, so that
    modes the solution does not excite are judged against the equation's size
    rather than against their own roundoff.
    """
    bank = default_test_bank() if bank is None else bank
    times = np.array([s.t for s in knots])
    T = times[-1] if T is None else T
    wq = _simpson_weights(times)
    d = basis.domain
    cv = d.cell_volume
    spaces = sorted({tf.space for tf in bank})
    modes = {i: basis[i].evaluate(d) for i in spaces}
    dmodes = {i: deformation_tensor(modes[i]).samples for i in spaces}
    gmodes = {i: gradient(modes[i]).samples for i in spaces}
    cmodes = {i: curl(modes[i]).samples for i in spaces}
    smodes = {i: _scalar_test(basis, i) for i in spaces}

    # per-knot spatial integrals: for each mode, the pieces multiplying the
    # time profile and its derivative
    rows = {i: {"rho": [], "u": [], "B": []} for i in spaces}
    for s in knots:
        u = synthesize(s.alpha, basis)
        B = synthesize(s.beta, basis)
        rho = s.rho.samples
        J = curl(B).samples
        du = deformation_tensor(u).samples
        mu = eval_law(physics.mu, s.rho).samples
        sig = eval_law(physics.sigma, s.rho).samples
        m = rho * u.samples
        JxB = np.cross(J, B.samples, axis=0)
        E = np.cross(B.samples, u.samples, axis=0) + physics.hall * JxB / rho + J / sig
        for i in spaces:
            phi, gphi = smodes[i]
            Phi = modes[i].samples
            rows[i]["rho"].append((np.sum(rho * phi) * cv, np.sum(m * gphi) * cv))
            conv = np.einsum("axyz,bxyz,abxyz->", m, u.samples, gmodes[i])
            rows[i]["u"].append((np.sum(m * Phi) * cv,
                                 -conv * cv + np.sum(2 * mu * np.sum(du * dmodes[i], axis=(0, 1))) * cv
                                 - np.sum(JxB * Phi) * cv))
            rows[i]["B"].append((np.sum(B.samples * Phi) * cv, np.sum(E * cmodes[i]) * cv))

    out = {"density": [], "momentum": [], "induction": []}
    for tf in bank:
        p = tf.profile(times, T)
        dp = tf.dprofile(times, T)
        for key, name in (("rho", "density"), ("u", "momentum"), ("B", "induction")):
            a = np.array([r[0] for r in rows[tf.space][key]])
            b = np.array([r[1] for r in rows[tf.space][key]])
            if key == "rho":
                # -int int (rho phi_t + rho u . grad phi) = int rho0 phi(0)
                lhs = -np.sum(wq * (a * dp + b * p))
            else:
                lhs = np.sum(wq * (-a * dp + b * p))
            rhs = a[0] * p[0]
            scale = max(abs(rhs), np.sum(wq * np.abs(a * dp)), np.sum(wq * np.abs(b * p)))
            out[name].append((tf, float(lhs - rhs), float(scale)))
    for name, rows in out.items():
        top = max([sc for _, _, sc in rows] + [1e-300])
        out[name] = [(tf, r, top) for tf, r, _ in rows]
    return out
