"""Closed-form no-jump trajectory and drive synthesis for a target envelope.

Given the emitter parameters, a normalized envelope, and a target
efficiency E below the bound, every amplitude of the single-excitation
ansatz follows in closed form, and the drive Rabi frequency that realizes
the emission is obtained by reverse solution. The drive is independent of
the initial qubit state; the phase of the initial |1> amplitude is carried
by the photon amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from . import bounds, depletion
from .errors import (DomainError, NumericError, PoleError, ValidationError)
from .model import EmitterParams
from .pulse import CosineSeriesPulse, as_envelope


@dataclass(frozen=True)
class InitialState:
    """Qubit amplitudes at t = 0; must be normalized."""

    alpha0: complex
    beta0: complex = 0.0

    def __post_init__(self):
        norm = abs(self.alpha0) ** 2 + abs(self.beta0) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(
                f"initial state must be normalized, got |a|^2+|b|^2 = {norm!r}")


@dataclass
class Trajectory:
    """Amplitudes, drive, and error probability sampled on a grid."""

    grid: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    zeta: np.ndarray
    eta: np.ndarray
    lam: np.ndarray
    Omega: np.ndarray
    E: float
    p_e: np.ndarray
    drive_valid: bool = True
    drive_irrelevant: bool = False

    def fidelity(self, init: InitialState) -> float:
        """Overlap with the target flying-qubit state at the end of the grid."""
        amp = (np.conj(init.alpha0) * self.lam[-1]
               + np.conj(init.beta0) * self.beta[-1])
        return float(abs(amp) ** 2)

    def to_csv(self, path: str | Path, header: str = ""):
        cols = ["t_ns"]
        for name in ("alpha", "beta", "zeta", "eta", "lambda", "Omega"):
            cols += [f"re_{name}", f"im_{name}"]
        cols.append("p_e")
        arrays = [self.alpha, self.beta, self.zeta, self.eta, self.lam, self.Omega]
        with open(path, "w", encoding="utf-8") as fh:
            if header:
                fh.write(f"# {header}\n")
            fh.write(",".join(cols) + "\n")
            for i, t in enumerate(self.grid):
                row = [f"{t:.12g}"]
                for arr in arrays:
                    row += [f"{arr[i].real:.12g}", f"{arr[i].imag:.12g}"]
                row.append(f"{self.p_e[i]:.12g}")
                fh.write(",".join(row) + "\n")


def max_efficiency(p: EmitterParams, env) -> float:
    """Efficiency bound for this envelope, via the fastest valid route."""
    if isinstance(env, CosineSeriesPulse) and env.is_real:
        profile = depletion.analytic_profile(p, env)
    else:
        e = as_envelope(env)
        profile = depletion.integrated_depletion_numeric(
            p, e, np.linspace(0.0, e.T, 101))
    return bounds.e_max(profile)


class ClosedFormSolution:
    """Continuum closed-form solution for fixed (params, envelope, E).

    Exposes the amplitudes with the initial |1> amplitude divided out, plus
    the drive Omega(t); those are what the verification integrators need.
    For a real series pulse G(t) is exact and, on resonance, so is the
    phase, which makes the synthesized drive itself exact.
    """

    def __init__(self, p: EmitterParams, env, E: float):
        self.p = p
        self.pulse = env if isinstance(env, CosineSeriesPulse) else None
        self.env = as_envelope(env)
        if E < 0:
            raise ValidationError("efficiency E must be >= 0")
        norm = float(self.env.cumulative_norm(self.env.T))
        if abs(norm - 1.0) > 1e-6:
            raise ValidationError(
                f"envelope must be normalized, int |v|^2 = {norm:.8g}")
        self.E = float(E)
        self.E_max = max_efficiency(p, env)
        if self.E > self.E_max * (1.0 + 1e-12):
            raise DomainError(
                f"target efficiency {E:.6g} exceeds the bound {self.E_max:.6g}")
        self._setup_g_phi()

    # -- G(t) and phi(t) providers ------------------------------------------

    def _setup_g_phi(self):
        p, env = self.p, self.env
        analytic = self.pulse is not None and self.pulse.is_real
        if analytic:
            self._G = lambda t: depletion.integrated_depletion_analytic(
                p, self.pulse, t)
        if analytic and p.Delta == 0.0:
            self._phi = lambda t: np.zeros_like(np.asarray(t, dtype=float))[()]
            return
        if self.E == 0.0:
            # phase accumulates proportionally to E^2
            if not analytic:
                prof = depletion.integrated_depletion_numeric(
                    p, env, np.linspace(0.0, env.T, 257), refine_max=False)
                from scipy.interpolate import CubicSpline
                gs = CubicSpline(prof.grid, prof.G)
                self._G = lambda t: gs(np.clip(t, 0.0, env.T))[()]
            self._phi = lambda t: np.zeros_like(np.asarray(t, dtype=float))[()]
            return

        E = self.E
        gamma = p.Gamma1 - p.Gamma2
        x = 1.0 + p.kappa_tilde / p.kappa
        g2 = p.g ** 2

        def rhs(t, y):
            G = y[0]
            r2 = 1.0 - E * E * G
            if r2 <= 0.0:
                raise DomainError("1 - E^2 G reached zero during phase integration")
            f = float(env.f(t))
            df = float(env.df(t))
            d2f = float(env.d2f(t))
            dth = float(env.dtheta(t))
            d2th = float(env.d2theta(t))
            num = ((x * (p.Delta + dth) + d2th / p.kappa) * f * df
                   + (p.Delta + 2.0 * dth) / p.kappa * df ** 2
                   - dth / p.kappa * f * d2f
                   + (p.kappa * x * x * (p.Delta + dth) / 4.0 + x * d2th / 2.0
                      + (p.Delta * dth ** 2 - g2 * dth + dth ** 3) / p.kappa) * f ** 2)
            dG = float(depletion.depletion_rate(p, env, t))
            dphi = E * E * math.exp(gamma * t) * num / (g2 * r2)
            return [dG, dphi]

        sol = solve_ivp(rhs, (0.0, env.T), [0.0, 0.0], method="DOP853",
                        rtol=1e-11, atol=1e-13, dense_output=True)
        if not sol.success:
            raise NumericError(f"phase integration failed: {sol.message}")
        dense = sol.sol

        if not analytic:
            self._G = lambda t: dense(np.clip(t, 0.0, env.T))[0][()]
        self._phi = lambda t: dense(np.clip(t, 0.0, env.T))[1][()]

    # -- amplitudes with alpha0 divided out ----------------------------------

    def G(self, t):
        return self._G(t)

    def phi(self, t):
        return self._phi(t)

    def r2(self, t):
        return np.maximum(1.0 - self.E ** 2 * np.asarray(self.G(t)), 0.0)[()]

    def _v(self, t, deriv=0):
        env = self.env
        f = np.asarray(env.f(t))
        th = np.asarray(env.theta(t))
        ph = np.exp(1j * th)
        if deriv == 0:
            return ph * f
        df = np.asarray(env.df(t))
        dth = np.asarray(env.dtheta(t))
        if deriv == 1:
            return ph * (df + 1j * dth * f)
        d2f = np.asarray(env.d2f(t))
        d2th = np.asarray(env.d2theta(t))
        return ph * (d2f + 2j * dth * df + 1j * d2th * f - dth ** 2 * f)

    def eta(self, t):
        p = self.p
        decay = np.exp(-0.5 * p.Gamma2 * np.asarray(t, dtype=float))
        return (self.E * decay * self._v(t) / math.sqrt(p.kappa))[()]

    def deta(self, t):
        p = self.p
        decay = np.exp(-0.5 * p.Gamma2 * np.asarray(t, dtype=float))
        return (self.E * decay * (self._v(t, 1) - 0.5 * p.Gamma2 * self._v(t))
                / math.sqrt(p.kappa))[()]

    def d2eta(self, t):
        p = self.p
        decay = np.exp(-0.5 * p.Gamma2 * np.asarray(t, dtype=float))
        core = (self._v(t, 2) - p.Gamma2 * self._v(t, 1)
                + 0.25 * p.Gamma2 ** 2 * self._v(t))
        return (self.E * decay * core / math.sqrt(p.kappa))[()]

    def lam(self, t):
        p = self.p
        decay = np.exp(-0.5 * p.Gamma2 * np.asarray(t, dtype=float))
        cum = np.sqrt(np.maximum(np.asarray(self.env.cumulative_norm(t)), 0.0))
        return (self.E * decay * cum)[()]

    def zeta(self, t):
        p = self.p
        a = (p.Gamma2 + p.kappa + p.kappa_tilde) / (2.0 * p.g)
        return (a * np.asarray(self.eta(t)) + np.asarray(self.deta(t)) / p.g)[()]

    def dzeta(self, t):
        p = self.p
        a = (p.Gamma2 + p.kappa + p.kappa_tilde) / (2.0 * p.g)
        return (a * np.asarray(self.deta(t)) + np.asarray(self.d2eta(t)) / p.g)[()]

    def alpha(self, t):
        p = self.p
        t_arr = np.asarray(t, dtype=float)
        r = np.sqrt(self.r2(t))
        return (np.exp(1j * np.asarray(self.phi(t)) - 0.5 * p.Gamma1 * t_arr) * r)[()]

    def Omega(self, t):
        """Drive Rabi frequency; diverges where the ground state empties."""
        p = self.p
        num = ((0.5 * p.gamma_tilde + 1j * p.Delta) * np.asarray(self.zeta(t))
               + p.g * np.asarray(self.eta(t)) + np.asarray(self.dzeta(t)))
        alpha = np.asarray(self.alpha(t))
        tiny = np.abs(alpha) < 1e-14
        if np.any(tiny & (np.abs(num) > 1e-12)):
            raise PoleError(
                "drive diverges: alpha(t) vanished with a finite numerator; "
                "lower the target efficiency below E_max")
        safe = np.where(tiny, 1.0, alpha)
        return (np.where(tiny, 0.0, -num / safe))[()]


def closed_form_trajectory(p: EmitterParams, env, E: float,
                           init: InitialState, grid) -> Trajectory:
    """Sample the closed-form solution for a given initial qubit state.

    The drive is synthesized when the initial |1> amplitude is nonzero and
    the efficiency stays clear of the pole; otherwise it is zeroed and
    flagged (for alpha0 = 0 no emission occurs and the drive is irrelevant).
    """
    grid = np.asarray(grid, dtype=float)
    cf = ClosedFormSolution(p, env, E)
    a0, b0 = complex(init.alpha0), complex(init.beta0)
    beta = b0 * np.exp(-0.5 * p.Gamma2 * grid)
    eta = a0 * np.asarray(cf.eta(grid))
    lam = a0 * np.asarray(cf.lam(grid))
    zeta = a0 * np.asarray(cf.zeta(grid))
    alpha = a0 * np.asarray(cf.alpha(grid))

    drive_irrelevant = a0 == 0.0
    drive_valid = not drive_irrelevant
    Omega = np.zeros_like(grid, dtype=complex)
    if not drive_irrelevant:
        r2min = float(np.min(np.asarray(cf.r2(grid))))
        if r2min < 1e-10:
            drive_valid = False
        else:
            Omega = np.asarray(cf.Omega(grid), dtype=complex)

    norm = (np.abs(alpha) ** 2 + np.abs(beta) ** 2 + np.abs(zeta) ** 2
            + np.abs(eta) ** 2 + np.abs(lam) ** 2)
    p_e = 1.0 - norm
    return Trajectory(grid=grid, alpha=alpha, beta=beta, zeta=zeta, eta=eta,
                      lam=lam, Omega=Omega, E=cf.E, p_e=p_e,
                      drive_valid=drive_valid, drive_irrelevant=drive_irrelevant)


def drive_omega(p: EmitterParams, env, E: float, grid) -> np.ndarray:
    """Synthesized drive samples; raises PoleError too close to the bound."""
    grid = np.asarray(grid, dtype=float)
    cf = ClosedFormSolution(p, env, E)
    r2min = float(np.min(np.asarray(cf.r2(grid)))) if grid.size else 1.0
    if r2min < 1e-10:
        raise PoleError(
            "requested efficiency leaves no ground-state amplitude at the "
            "depletion maximum; reduce E relative to E_max")
    return np.asarray(cf.Omega(grid), dtype=complex)


def virtual_coupling(env, t, kappa: float | None = None):
    """Time-dependent coupling g_v(t) = -v*(t) / sqrt(int_0^t |v|^2).

    Returns 0 at t = 0 where the expression is 0/0. When kappa is given the
    magnitude is clamped to 1e3 sqrt(kappa) wherever the accumulated norm is
    below 1e-12; only the master-equation oracle consumes the clamped
    values, and the virtual mode is essentially unoccupied there.
    """
    env = as_envelope(env)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    cum = np.atleast_1d(np.asarray(env.cumulative_norm(t_arr), dtype=float))
    v = np.atleast_1d(env.v(t_arr))
    out = np.zeros_like(v, dtype=complex)
    pos = cum > 0.0
    out[pos] = -np.conj(v[pos]) / np.sqrt(cum[pos])
    if kappa is not None:
        cap = 1e3 * math.sqrt(kappa)
        small = pos & (cum < 1e-12)
        mag = np.abs(out[small])
        scale = np.where(mag > cap, cap / np.where(mag > 0, mag, 1.0), 1.0)
        out[small] = out[small] * scale
    return out[0] if np.ndim(t) == 0 else out


def mode_matching_coupling(p: EmitterParams, eta, lam):
    """g_v from the emission amplitudes, g_v = -sqrt(kappa) eta* / lam*.

    Along closed-form trajectories this agrees with virtual_coupling
    wherever the photon amplitude is nonzero.
    """
    eta = np.asarray(eta)
    lam = np.asarray(lam)
    return -math.sqrt(p.kappa) * np.conj(eta) / np.conj(lam)
