"""Depletion rate d(t), its integral G(t), and the drive phase phi(t).

Reverse-solving the no-jump amplitude equations for a prescribed envelope
v = exp(i theta) f turns the ground-state dynamics into

    r rdot = -(1/2) E^2 d(t),      r^2(t) = 1 - E^2 G(t),

with a depletion rate d(t) that is a closed-form expression in f, theta,
their first two derivatives, and the system rates. d is independent of the
detuning and of the target efficiency E. G(t) = int_0^t d is available on
two routes: adaptive quadrature of d for arbitrary envelopes, and exact
term-wise integrals for the real cosine series. The running maximum of G
sets the efficiency bound, so it is located with a grid scan plus
golden-section refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import DomainError, NumericError, UnsupportedError, ValidationError
from .model import EmitterParams
from .pulse import CosineSeriesPulse, as_envelope

TWO_PI = 2.0 * math.pi

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class DepletionProfile:
    """Sampled depletion data on a time grid.

    G_max is the maximum of G over t >= 0 (d vanishes beyond the pulse, so
    the search domain [0, T] is exhaustive), refined beyond the grid.
    """

    grid: np.ndarray
    d: np.ndarray
    G: np.ndarray
    G_max: float
    argmax_t: float
    phi: np.ndarray | None = None

    def to_csv(self, path: str | Path, gamma2: float = 0.0, header: str = ""):
        """Columns t_ns, d_per_ns, G, G_weighted, phi_rad.

        G_weighted = exp(gamma2 * t) G(t); both the bare and the weighted
        integral are written since either can be the quantity of interest.
        """
        phi = self.phi if self.phi is not None else np.zeros_like(self.grid)
        with open(path, "w", encoding="utf-8") as fh:
            if header:
                fh.write(f"# {header}\n")
            fh.write("t_ns,d_per_ns,G,G_weighted,phi_rad\n")
            for t, d, g, q in zip(self.grid, self.d, self.G, phi):
                gw = math.exp(gamma2 * t) * g
                fh.write(f"{t:.12g},{d:.12g},{g:.12g},{gw:.12g},{q:.12g}\n")


def _rate_weights(p: EmitterParams):
    """Constant prefactors of the five quadratic envelope terms in d(t)."""
    if p.g <= 0:
        raise DomainError("depletion rate undefined for g = 0")
    if p.kappa <= 0:
        raise DomainError("depletion rate undefined for kappa = 0")
    x = 1.0 + p.kappa_tilde / p.kappa
    gp = p.gamma_tilde - p.Gamma2
    g2 = p.g ** 2
    w_ff = x + gp * p.kappa * x * x / (4.0 * g2)
    w_dfdf = x / g2 + gp / (p.kappa * g2)
    w_fdf = 2.0 / p.kappa + p.kappa * x * x / (2.0 * g2) + gp * x / g2
    w_fddf = x / g2
    w_dfddf = 2.0 / (p.kappa * g2)
    return x, gp, w_ff, w_fdf, w_dfdf, w_fddf, w_dfddf


def depletion_rate(p: EmitterParams, env, t):
    """d(t) for an arbitrary envelope, including the phase terms.

    Vanishes wherever f and its derivatives vanish; grows as
    exp((Gamma1 - Gamma2) t) when the two ground-state rates differ.
    """
    env = as_envelope(env)
    x, gp, w_ff, w_fdf, w_dfdf, w_fddf, w_dfddf = _rate_weights(p)
    g2 = p.g ** 2
    t = np.asarray(t, dtype=float)
    f = np.asarray(env.f(t))
    df = np.asarray(env.df(t))
    d2f = np.asarray(env.d2f(t))
    dth = np.asarray(env.dtheta(t))
    d2th = np.asarray(env.d2theta(t))
    gamma = p.Gamma1 - p.Gamma2
    base = (
        (w_ff + gp * dth ** 2 / (g2 * p.kappa)
         + 2.0 * d2th * dth / (p.kappa * g2)) * f ** 2
        + w_fddf * f * d2f
        + w_dfddf * df * d2f
        + (w_fdf + 2.0 * dth ** 2 / (p.kappa * g2)) * f * df
        + w_dfdf * df ** 2
    )
    return (np.exp(gamma * t) * base)[()]


# ---------------------------------------------------------------------------
# Exact integrals for the cosine series
#
# With f = sum_n v_n f_n, f_n = 1 - cos(w_n t), w_n = 2 pi n / T, every term
# of G(t) reduces to combinations of
#     h_k(t) = int_0^t e^(Gamma tau) cos(w_k tau) dtau
#     u_k(t) = int_0^t e^(Gamma tau) sin(w_k tau) dtau
# h is even and u odd in the frequency index; h_0 is the plain exponential
# integral. The five families below were re-derived from the product-to-sum
# identities and are cross-checked against quadrature in the test suite.
# ---------------------------------------------------------------------------


def h_integral(omega: float, t, Gamma: float):
    """h(omega, t) = int_0^t exp(Gamma tau) cos(omega tau) dtau."""
    t = np.asarray(t, dtype=float)
    if Gamma == 0.0:
        if omega == 0.0:
            return t.copy()[()]
        return (np.sin(omega * t) / omega)[()]
    if omega == 0.0:
        return (np.expm1(Gamma * t) / Gamma)[()]
    den = Gamma * Gamma + omega * omega
    eg = np.exp(Gamma * t)
    return ((eg * (omega * np.sin(omega * t) + Gamma * np.cos(omega * t)) - Gamma) / den)[()]


def u_integral(omega: float, t, Gamma: float):
    """u(omega, t) = int_0^t exp(Gamma tau) sin(omega tau) dtau."""
    t = np.asarray(t, dtype=float)
    if omega == 0.0:
        return np.zeros_like(t)[()]
    if Gamma == 0.0:
        return ((1.0 - np.cos(omega * t)) / omega)[()]
    den = Gamma * Gamma + omega * omega
    eg = np.exp(Gamma * t)
    return ((omega + eg * (Gamma * np.sin(omega * t) - omega * np.cos(omega * t))) / den)[()]


@dataclass
class AnalyticGTerms:
    """Per-(n, m) closed-form integrals for a series of given order.

    I1..I5 hold int_0^t e^(Gamma tau) X dtau for X = f_n f_m, f_n f'_m,
    f'_n f'_m, f_n f''_m, f'_n f''_m with shape (nt, order, order); H and U
    hold the helper integrals indexed by frequency multiple, shape
    (2 order + 1, nt).
    """

    T: float
    Gamma: float
    I1: np.ndarray
    I2: np.ndarray
    I3: np.ndarray
    I4: np.ndarray
    I5: np.ndarray
    H: np.ndarray
    U: np.ndarray


def family_integrals(T: float, Gamma: float, order: int, t) -> AnalyticGTerms:
    """Evaluate the five integral families on a time array."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    nt = t.size
    kmax = 2 * order
    H = np.empty((kmax + 1, nt))
    U = np.empty((kmax + 1, nt))
    for k in range(kmax + 1):
        w = TWO_PI * k / T
        H[k] = np.atleast_1d(h_integral(w, t, Gamma))
        U[k] = np.atleast_1d(u_integral(w, t, Gamma))

    def w_of(k):
        return TWO_PI * k / T

    I1 = np.empty((nt, order, order))
    I2 = np.empty_like(I1)
    I3 = np.empty_like(I1)
    I4 = np.empty_like(I1)
    I5 = np.empty_like(I1)
    E0 = H[0]
    for i in range(order):
        n = i + 1
        for j in range(order):
            m = j + 1
            wn, wm = w_of(n), w_of(m)
            dk = abs(m - n)
            sgn = float(np.sign(m - n))
            sk = m + n
            # u at the difference frequency is odd, h is even
            u_diff = sgn * U[dk]
            I1[:, i, j] = E0 - H[n] - H[m] + 0.5 * (H[dk] + H[sk])
            I2[:, i, j] = wm * (U[m] - 0.5 * U[sk] - 0.5 * u_diff)
            I3[:, i, j] = 0.5 * wn * wm * (H[dk] - H[sk])
            I4[:, i, j] = 0.5 * wm * wm * (2.0 * H[m] - H[dk] - H[sk])
            I5[:, i, j] = 0.5 * wn * wm * wm * (U[sk] - u_diff)
    return AnalyticGTerms(T=T, Gamma=Gamma, I1=I1, I2=I2, I3=I3, I4=I4, I5=I5,
                          H=H, U=U)


def g_matrix(p: EmitterParams, T: float, order: int, t) -> np.ndarray:
    """Quadratic form X with G(t) = v . X(t) . v for a real series pulse.

    Shape (nt, order, order). The pulse coefficients enter bilinearly, so
    grid optimizers can reuse one X per duration for every candidate.
    """
    x, gp, w_ff, w_fdf, w_dfdf, w_fddf, w_dfddf = _rate_weights(p)
    fam = family_integrals(T, p.Gamma1 - p.Gamma2, order, t)
    return (w_ff * fam.I1 + w_fdf * fam.I2 + w_dfdf * fam.I3
            + w_fddf * fam.I4 + w_dfddf * fam.I5)


def integrated_depletion_analytic(p: EmitterParams, pulse: CosineSeriesPulse, t):
    """G(t) by the exact term-wise route; real series pulses only."""
    if not isinstance(pulse, CosineSeriesPulse):
        raise ValidationError("analytic G needs a CosineSeriesPulse")
    if not pulse.is_real:
        raise UnsupportedError(
            "analytic G covers real pulses only; use integrated_depletion_numeric")
    scalar = np.ndim(t) == 0
    # d vanishes beyond the support, so clipping to [0, T] freezes G there
    tt = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, pulse.T)
    X = g_matrix(p, pulse.T, pulse.order, tt)
    v = np.asarray(pulse.coeffs)
    out = np.einsum("tnm,n,m->t", X, v, v)
    return out[0] if scalar else out


def _golden_max(fun, lo: float, hi: float, tol: float):
    """Golden-section maximizer on [lo, hi] for a unimodal bracket."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    mid = 0.5 * (a + b)
    return mid, fun(mid)


def _refine_max(g_fun, T: float, n_grid: int = 1001):
    """Grid scan plus golden-section refinement of max_t G on [0, T]."""
    ts = np.linspace(0.0, T, n_grid)
    vals = np.asarray(g_fun(ts))
    i = int(np.argmax(vals))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, n_grid - 1)]
    t_ref, v_ref = _golden_max(lambda s: float(g_fun(s)), lo, hi, tol=1e-6 * T)
    if v_ref >= vals[i]:
        return float(v_ref), float(t_ref)
    return float(vals[i]), float(ts[i])


def analytic_profile(p: EmitterParams, pulse: CosineSeriesPulse,
                     grid=None, n_search: int = 1001) -> DepletionProfile:
    """DepletionProfile through the closed-form route (real series pulse)."""
    if grid is None:
        grid = np.linspace(0.0, pulse.T, n_search)
    grid = np.asarray(grid, dtype=float)
    G = np.atleast_1d(integrated_depletion_analytic(p, pulse, grid))
    d = np.atleast_1d(depletion_rate(p, pulse.envelope(), grid))
    gmax, targ = _refine_max(
        lambda s: integrated_depletion_analytic(p, pulse, s), pulse.T, n_search)
    gmax = max(gmax, float(G.max()))
    return DepletionProfile(grid=grid, d=d, G=G, G_max=gmax, argmax_t=targ)


def integrated_depletion_numeric(p: EmitterParams, env, t_grid,
                                 refine_max: bool = True,
                                 n_search: int = 1001) -> DepletionProfile:
    """G by adaptive quadrature of d; works for any envelope, chirped or not.

    Integrates interval by interval over the supplied grid, each to an
    estimated absolute error of 1e-9 (scaled up when G itself is large).
    The maximum search runs on an internal uniform grid with golden-section
    refinement; disable it with refine_max=False when only samples of G are
    needed.
    """
    env = as_envelope(env)
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValidationError("t_grid must be a one-dimensional array")
    if np.any(np.diff(grid) < 0):
        raise ValidationError("t_grid must be sorted")
    if grid[0] < 0 or grid[-1] > env.T * (1 + 1e-12):
        raise ValidationError("t_grid must lie within [0, T]")

    def d_fun(t):
        return float(depletion_rate(p, env, t))

    def segment(a, b):
        if b <= a:
            return 0.0
        val, err = quad(d_fun, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)
        if err > max(1e-9, 1e-9 * abs(val)):
            raise NumericError(
                f"quadrature of d(t) did not converge on [{a:.6g}, {b:.6g}]: "
                f"estimated error {err:.3e}")
        return val

    G = np.empty_like(grid)
    prev_t = 0.0
    acc = 0.0
    for i, t in enumerate(grid):
        acc += segment(prev_t, t)
        G[i] = acc
        prev_t = t
    d_samples = np.atleast_1d(depletion_rate(p, env, grid))

    if refine_max:
        ts = np.linspace(0.0, env.T, n_search)
        Gs = np.empty_like(ts)
        acc2 = 0.0
        prev = 0.0
        for i, t in enumerate(ts):
            acc2 += segment(prev, t)
            Gs[i] = acc2
            prev = t
        i = int(np.argmax(Gs))
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n_search - 1)]
        base_t, base_G = ts[max(i - 1, 0)], Gs[max(i - 1, 0)]
        targ, gmax = _golden_max(lambda s: base_G + segment(base_t, s), lo, hi,
                                 tol=1e-6 * env.T)
        if Gs[i] > gmax:
            gmax, targ = Gs[i], ts[i]
        gmax = max(gmax, float(G.max()))
    else:
        i = int(np.argmax(G))
        gmax, targ = float(G[i]), float(grid[i])
    return DepletionProfile(grid=grid, d=d_samples, G=G, G_max=float(gmax),
                            argmax_t=float(targ))


def phase_evolution(p: EmitterParams, env, E: float, t_grid,
                    rtol: float = 1e-11, atol: float = 1e-13) -> np.ndarray:
    """Drive phase phi(t) accumulated by the ground-state amplitude.

    phi solves phidot = E^2 exp((Gamma1-Gamma2) t) Phi(t) / (g^2 r^2) with
    r^2 = 1 - E^2 G(t); G is integrated alongside. Identically zero for a
    resonant cavity and a constant envelope phase, and proportional to E^2,
    so it vanishes in the weak-extraction limit.
    """
    env = as_envelope(env)
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) < 0):
        raise ValidationError("t_grid must be a sorted one-dimensional array")
    if E < 0:
        raise ValidationError("efficiency E must be >= 0")
    if E == 0.0:
        return np.zeros_like(grid)

    x = 1.0 + p.kappa_tilde / p.kappa
    g2 = p.g ** 2
    gamma = p.Gamma1 - p.Gamma2
    Delta = p.Delta

    def integrands(t):
        f = np.asarray(env.f(t))
        df = np.asarray(env.df(t))
        d2f = np.asarray(env.d2f(t))
        dth = np.asarray(env.dtheta(t))
        d2th = np.asarray(env.d2theta(t))
        phi_num = (
            (x * (Delta + dth) + d2th / p.kappa) * f * df
            + (Delta + 2.0 * dth) / p.kappa * df ** 2
            - dth / p.kappa * f * d2f
            + (p.kappa * x * x * (Delta + dth) / 4.0 + x * d2th / 2.0
               + (Delta * dth ** 2 - g2 * dth + dth ** 3) / p.kappa) * f ** 2
        )
        d_val = depletion_rate(p, env, t)
        return d_val, phi_num

    def rhs(t, y):
        G, _ = y
        r2 = 1.0 - E * E * G
        if r2 <= 0.0:
            raise DomainError(
                "r^2 = 1 - E^2 G(t) reached zero: requested efficiency exceeds "
                "the bound for this envelope")
        d_val, phi_num = integrands(t)
        dphi = E * E * math.exp(gamma * t) * float(phi_num) / (g2 * r2)
        return [float(d_val), dphi]

    t_end = grid[-1] if grid.size else env.T
    if t_end == 0.0:
        return np.zeros_like(grid)
    sol = solve_ivp(rhs, (0.0, t_end), [0.0, 0.0], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise NumericError(f"phase integration failed: {sol.message}")
    phi = sol.sol(grid)[1]
    return phi
