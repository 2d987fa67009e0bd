"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a single PASS line when it holds; run with `pytest -v -s
tests/test_acceptance.py` to see them. Criterion 5 is known to fail at its
stated tolerance: the master equation legitimately recycles jump branches
(a decayed or repumped excitation is re-driven and partially re-emitted
into the target mode), which lifts the fidelity above the coherent-branch
formula by several 1e-3 at the benchmark decoherence rates. The effect is
first order in the jump probability and vanishes linearly with the rates;
the zero-decoherence and gentle-rate agreement tests in test_verify pin
the oracle itself to 1e-9. See the decisions ledger for the analysis.
"""

import math
import time

import numpy as np
import pytest

from ramanpulse import (CosineSeriesPulse, EmitterParams, InitialState,
                        ghz, sin2_pulse)
from ramanpulse import bounds, depletion, optimize, protocol, verify
from ramanpulse.trajectory import (ClosedFormSolution, closed_form_trajectory,
                                   max_efficiency)


def test_c1_optimized_pulse_table(siv_params, table_row_unconstrained):
    t0 = time.time()
    res = table_row_unconstrained
    grid_step = 0.032
    assert abs(res.E_max - 0.988) <= 1e-3
    assert abs(res.pulse.T - 0.44) <= grid_step
    assert abs(res.pulse.coeffs[0] - 1.23) <= 0.01

    res_c = optimize.optimize_shape(
        siv_params, optimize.full_config(1, constrained=True, refine=False))
    assert abs(res_c.E_max - 0.987) <= 1e-3
    assert abs(res_c.pulse.T - 0.50) <= grid_step
    assert abs(res_c.pulse.coeffs[0] - 1.35) <= 0.02
    assert abs(res_c.pulse.coeffs[1] - (-0.34)) <= 0.02
    elapsed = time.time() - t0
    assert elapsed < 60.0
    print(f"\nACCEPTANCE 1 optimized-pulse table (L=1, both modes): PASS "
          f"[E_max={res.E_max:.4f}/{res_c.E_max:.4f}, {elapsed:.1f}s]")


def test_c1b_desk_grid_runtime(siv_params):
    t0 = time.time()
    res = optimize.optimize_shape(siv_params, optimize.desk_config(2))
    elapsed = time.time() - t0
    assert elapsed < 600.0
    assert res.E_max == pytest.approx(0.988, abs=2e-3)
    print(f"ACCEPTANCE 1b desk-grid L=2 runtime: PASS [{elapsed:.1f}s]")


def test_c2_slow_pulse_asymptote(perfect_params):
    limit = bounds.slow_pulse_bound(perfect_params)
    e2 = []
    for T in (1.0, 2.0, 5.0, 12.0):
        prof = depletion.analytic_profile(perfect_params, sin2_pulse(T))
        e2.append(bounds.e_max(prof) ** 2)
    assert all(a < b for a, b in zip(e2, e2[1:]))      # monotone approach
    assert all(v < limit for v in e2)                  # from below
    assert abs(e2[-1] - limit) / limit <= 0.02
    print(f"ACCEPTANCE 2 slow-pulse asymptote: PASS "
          f"[E^2(12ns)={e2[-1]:.5f} vs {limit:.5f}]")


def test_c3_analytic_vs_quadrature():
    rng = np.random.default_rng(2024)
    t0 = time.time()
    worst = 0.0
    for _ in range(100):
        rates = 2 * math.pi * 10 ** rng.uniform(-2.0, 0.5, size=3)
        p = EmitterParams(g=ghz(rng.uniform(2, 10)),
                          kappa=ghz(rng.uniform(5, 60)),
                          kappa_tilde=ghz(float(rng.choice([0.0, 1.0]))
                                          * rng.uniform(0, 10)),
                          gamma_tilde=rates[0], Gamma1=rates[1],
                          Gamma2=rates[2])
        L = int(rng.integers(1, 4))
        coeffs = np.concatenate([[1.0], rng.uniform(-1, 1, size=L - 1)])
        pl = CosineSeriesPulse(float(rng.uniform(0.1, 1.5)),
                               tuple(coeffs)).normalize()
        ts = np.array([0.3, 0.7, 1.0]) * pl.T
        ana = depletion.integrated_depletion_analytic(p, pl, ts)
        num = depletion.integrated_depletion_numeric(p, pl.envelope(), ts,
                                                     refine_max=False)
        worst = max(worst, float(np.max(
            np.abs(ana - num.G) / np.maximum(np.abs(num.G), 1e-12))))
    elapsed = time.time() - t0
    assert worst <= 1e-6
    assert elapsed < 60.0
    print(f"ACCEPTANCE 3 closed-form vs quadrature G (100 cases): PASS "
          f"[worst rel dev {worst:.2e}, {elapsed:.1f}s]")


def test_c4_synthesis_closure(siv_params, optimal_sin2):
    E = 0.99 * max_efficiency(siv_params, optimal_sin2)
    grid = np.linspace(0.0, optimal_sin2.T, 301)
    init = InitialState(0.6, 0.8)
    traj = closed_form_trajectory(siv_params, optimal_sin2, E, init, grid)
    cf = ClosedFormSolution(siv_params, optimal_sin2, E)
    ode = verify.integrate_nonhermitian(siv_params, cf.Omega, init, grid)
    rep = verify.compare(traj, ode, tol=1e-6)
    assert rep.passed, rep.max_dev
    lam_expected = E * math.exp(-siv_params.Gamma2 * optimal_sin2.T / 2)
    lam_ode = abs(ode.lam[-1] / init.alpha0)
    assert abs(lam_ode - lam_expected) / lam_expected <= 1e-6
    print(f"ACCEPTANCE 4 synthesis closure (drive -> amplitude equations): "
          f"PASS [max dev {max(rep.max_dev.values()):.2e}]")


def test_c5_lindblad_confirmation(siv_raw, siv_params, optimal_sin2):
    """Master-equation agreement with the coherent-branch fidelity at 1e-3.

    Known red at the stated tolerance: jump-branch recycling adds
    +4e-3..+1.3e-2 at these rates for every admissible dissipator
    realization (see the decisions ledger). The oracle itself is exact
    on jump-free configurations (test_verify), so the deviation below is
    measured physics, not a numerical artifact.
    """
    T = optimal_sin2.T
    E_max = max_efficiency(siv_params, optimal_sin2)
    E = 0.99 * E_max
    cf = ClosedFormSolution(siv_params, optimal_sin2, E)
    t0 = time.time()
    deviations = {}
    excesses = {}
    for a0sq in (0.0, 0.5, 1.0):
        init = InitialState(math.sqrt(a0sq), math.sqrt(1.0 - a0sq))
        res = verify.lindblad_simulate(siv_raw, siv_params, optimal_sin2,
                                       cf.Omega, init)
        formula = bounds.fidelity(E, siv_params.Gamma2, T, a0sq)
        bound = bounds.fidelity(E_max, siv_params.Gamma2, T, a0sq)
        deviations[a0sq] = res.fidelity - formula
        excesses[a0sq] = res.fidelity - bound
    elapsed = time.time() - t0
    assert elapsed < 60.0
    report = (f"formula dev {deviations}, bound excess {excesses}, "
              f"{elapsed:.1f}s")
    ok = (all(abs(d) <= 1e-3 for d in deviations.values())
          and all(x <= 1e-3 for x in excesses.values()))
    print(f"ACCEPTANCE 5 master-equation confirmation at 1e-3: "
          f"{'PASS' if ok else 'FAIL'} [{report}]")
    assert all(abs(d) <= 1e-3 for d in deviations.values()), (
        "master-equation fidelity exceeds the coherent-branch formula by "
        f"{max(deviations.values()):+.2e} (> 1e-3): jump-branch recycling, "
        "first order in the jump probability; unattainable at these rates, "
        "see decisions ledger")
    assert all(x <= 1e-3 for x in excesses.values())


def test_c6_phase_properties(siv_params, optimal_sin2):
    env = optimal_sin2.envelope()
    grid = np.linspace(0.0, optimal_sin2.T, 101)
    phi = depletion.phase_evolution(siv_params, env, E=0.9, t_grid=grid)
    assert np.max(np.abs(phi)) <= 1e-10

    assert siv_params.Gamma1 < siv_params.gamma_tilde
    E0 = bounds.e_max(depletion.analytic_profile(siv_params, optimal_sin2))
    chirped_bounds = []
    for c in (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0):
        pl = CosineSeriesPulse(optimal_sin2.T, optimal_sin2.coeffs,
                               chirp=c * siv_params.kappa)
        prof = depletion.integrated_depletion_numeric(
            siv_params, pl.envelope(), np.linspace(0, optimal_sin2.T, 11))
        chirped_bounds.append(bounds.e_max(prof))
    assert all(e < E0 for e in chirped_bounds)
    print(f"ACCEPTANCE 6 phase properties: PASS "
          f"[max |phi| {np.max(np.abs(phi)):.1e}, "
          f"max chirped E_max {max(chirped_bounds):.4f} < {E0:.4f}]")


def test_c7_bloch_average_identity(siv_params):
    rng = np.random.default_rng(31415)
    E, T = 0.92, 0.44
    samples = rng.random(100_000)
    mc = float(np.mean([bounds.fidelity(E, siv_params.Gamma2, T, a)
                        for a in samples]))
    exact = bounds.avg_fidelity(E, siv_params.Gamma2, T)
    assert abs(mc - exact) <= 1e-3
    print(f"ACCEPTANCE 7 Bloch-average identity: PASS "
          f"[MC dev {abs(mc - exact):.2e}]")


def test_c8_protocol_exactness():
    for which in protocol.PROTOCOLS:
        res = protocol.run_protocol(which, 0.6, 0.8, efficiency=1.0)
        assert res.fidelity == pytest.approx(1.0, abs=1e-12), which
        for key, amp in res.target.amps.items():
            assert res.state.amps.get(key, 0.0) == pytest.approx(
                amp, abs=1e-12), (which, key)
    print("ACCEPTANCE 8 protocol exactness (all four circuits): PASS")
