"""Fast self-contained invariant battery behind the `validate` subcommand.

Every check is seeded and runs in at most a few seconds; together they
exercise the operator algebra, the master-equation assembly, steady-state
contracts, the concurrence oracles, the closed-form population formulas,
and the correlation pipeline. Each check reports ok/FAIL; any failure
makes the battery fail as a whole.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .liouvillian import (
    JumpTerm,
    apply_liouvillian,
    build_liouvillian,
    evolve,
    steady_state,
    steady_state_residual,
)
from .models import (
    FullModelParams,
    adiabatic_eliminate,
    analytic_populations,
    build_effective_model,
    build_full_model,
    closed_form_inputs,
    dicke_basis_vectors,
    dicke_hamiltonian,
    dicke_populations,
    dicke_transform,
    ground_state,
    rabi_frequency,
)
from .observables import concurrence, g2_trace, g2_zero, default_tau_max, post_jump_state
from .operators import (
    TWO_QUBIT_LAYOUT,
    DensityMatrix,
    partial_trace,
    qubit_pair_boson_layout,
)

SEED = 20240817


def _random_density(rng, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def _check_partial_trace(rng):
    layout = qubit_pair_boson_layout(2)
    rho = DensityMatrix.from_matrix(layout, _random_density(rng, layout.total_dim))
    reduced = partial_trace(rho, (0, 1)).matrix
    # quadruple-loop contraction as the independent oracle
    t = rho.matrix.reshape(2, 2, 3, 2, 2, 3)
    oracle = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for m in range(2):
                    oracle[2 * i + j, 2 * k + m] = sum(t[i, j, b, k, m, b] for b in range(3))
    err = np.abs(reduced - oracle).max()
    assert err < 1e-13, f"partial trace deviates from loop oracle by {err:.3e}"


def _check_lindblad_action(rng):
    for _ in range(5):
        h = _random_density(rng, 4) * 4
        h = (h + h.conj().T) / 2
        lop = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = _random_density(rng, 4)
        liou = build_liouvillian(h, (JumpTerm(0.3, lop),), TWO_QUBIT_LAYOUT)
        got = apply_liouvillian(liou, rho)
        ld = lop.conj().T @ lop
        want = -1j * (h @ rho - rho @ h) + 0.3 * (
            lop @ rho @ lop.conj().T - 0.5 * (ld @ rho + rho @ ld))
        err = np.abs(got - want).max()
        assert err < 1e-12, f"superoperator action deviates from direct form by {err:.3e}"


def _check_steady_state(rng):
    for _ in range(5):
        p = FullModelParams(
            delta0=rng.uniform(-0.1, 0.1), delta1=rng.uniform(-0.1, 0.1),
            g0=rng.uniform(0.01, 0.1), g1=rng.uniform(0.01, 0.1),
            eta0=rng.uniform(0.01, 0.1), eta1=rng.uniform(0.01, 0.1))
        h, jumps, layout = build_full_model(p)
        liou = build_liouvillian(h, jumps, layout)
        rho = steady_state(liou)
        res = steady_state_residual(liou, rho)
        assert res < 1e-10, f"steady-state residual {res:.3e}"
        mineig = np.linalg.eigvalsh(rho.matrix).min()
        assert mineig > -1e-9, f"steady-state min eigenvalue {mineig:.3e}"


def _check_propagation_agreement(rng):
    p = FullModelParams()
    h, jumps, layout = build_full_model(p)
    liou = build_liouvillian(h, jumps, layout)
    times = np.linspace(0.0, 200.0, 21)
    spectral = evolve(liou, ground_state(layout), times, method="spectral")
    rk = evolve(liou, ground_state(layout), times, method="rk")
    err = max(np.abs(a.matrix - b.matrix).max()
              for a, b in zip(spectral.states, rk.states))
    assert err < 1e-6, f"spectral and integrator propagation differ by {err:.3e}"
    assert spectral.max_trace_drift <= 1e-9, f"trace drift {spectral.max_trace_drift:.3e}"


def _check_concurrence_oracles(rng):
    a_ket = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    werner_base = np.outer(a_ket, a_ket.conj())
    for p in (0.2, 0.5, 0.9):
        rho = DensityMatrix.from_matrix(
            TWO_QUBIT_LAYOUT, p * werner_base + (1 - p) * np.eye(4) / 4)
        want = max(0.0, (3 * p - 1) / 2)
        got = concurrence(rho).value
        assert abs(got - want) < 1e-9, f"Werner p={p}: {got} vs {want}"
    sy = np.array([[0, -1j], [1j, 0]])
    syy = np.kron(sy, sy)
    for _ in range(20):
        ket = rng.normal(size=4) + 1j * rng.normal(size=4)
        ket /= np.linalg.norm(ket)
        # C(|psi>) = |<psi|sy x sy|psi*>|; sy x sy is real symmetric, so the
        # bilinear (not sesquilinear) form psi^T (sy x sy) psi gives it up to
        # global conjugation, which abs() removes.
        want = abs(ket @ syy @ ket)
        got = concurrence(DensityMatrix.pure(TWO_QUBIT_LAYOUT, ket)).value
        assert abs(got - want) < 1e-9, f"pure-state concurrence {got} vs {want}"


def _check_population_formulas(rng):
    for _ in range(5):
        delta, eta = rng.uniform(0.005, 0.05, size=2)
        t = rng.uniform(0, 500, size=7)
        pops = analytic_populations(delta, eta, t)
        total = sum(pops)
        assert np.abs(total - 1).max() < 1e-12, "closed-form populations do not sum to 1"
    p = FullModelParams(delta0=0.02, delta1=-0.02, eta0=0.02, eta1=0.02,
                        g0=0.02, g1=0.02, gamma_r0=0, gamma_r1=0,
                        gamma_d0=0, gamma_d1=0)
    e = adiabatic_eliminate(p)
    e = dataclasses.replace(e, gamma00=0.0, gamma11=0.0, gamma01=0.0)
    h, jumps, layout = build_effective_model(e)
    liou = build_liouvillian(h, jumps, layout)
    times = np.linspace(0.0, 2 * np.pi / rabi_frequency(p), 50)
    res = evolve(liou, ground_state(layout), times)
    delta, eta = closed_form_inputs(p)
    want = np.stack(analytic_populations(delta, eta, times))
    got = np.stack([dicke_populations(s) for s in res.states], axis=1)
    err = np.abs(got - want).max()
    assert err < 1e-6, f"dissipationless evolution deviates from closed form by {err:.3e}"


def _check_dicke_consistency(rng):
    for _ in range(5):
        p = FullModelParams(
            delta0=rng.uniform(-0.05, 0.05), delta1=rng.uniform(-0.05, 0.05),
            delta_a=rng.uniform(-0.5, 0.5), eta0=rng.uniform(0, 0.1),
            eta1=rng.uniform(0, 0.1), g0=rng.uniform(0.01, 0.1),
            g1=rng.uniform(0.01, 0.1))
        e = adiabatic_eliminate(p)
        d = dicke_transform(e)
        h, _, _ = build_effective_model(e)
        u = dicke_basis_vectors()
        err = np.abs(dicke_hamiltonian(d) - u.conj().T @ h @ u).max()
        assert err < 1e-12, f"Dicke-basis reconstruction deviates by {err:.3e}"
        assert abs(d.gamma_S + d.gamma_A - (e.gamma00 + e.gamma11)) < 1e-12


def _check_correlations(rng):
    p = FullModelParams()
    h, jumps, layout = build_full_model(p)
    liou = build_liouvillian(h, jumps, layout)
    rho_ss = steady_state(liou)
    trace = g2_trace(liou, rho_ss, default_tau_max(p), 1024)
    direct = g2_zero(liou, rho_ss)
    assert abs(direct - trace.g2_zero) < 1e-12, "g2_zero disagrees with trace at tau=0"
    assert trace.normalized.min() > -1e-9
    state, weight = post_jump_state(rho_ss, 0)
    want = rho_ss.expect(np.kron(np.diag([0.0, 1.0]), np.eye(layout.total_dim // 2))).real
    assert abs(weight - want) < 1e-12, "post-jump weight differs from <n_0>"


def _check_exchange_symmetry(rng):
    p = FullModelParams(delta0=0.03, delta1=-0.02, eta0=0.04, eta1=0.06)
    values = []
    for q in (p, p.swapped_qubits()):
        h, jumps, layout = build_full_model(q)
        rho = steady_state(build_liouvillian(h, jumps, layout))
        values.append(concurrence(partial_trace(rho, (0, 1))).value)
    err = abs(values[0] - values[1])
    assert err < 1e-8, f"concurrence changes by {err:.3e} under qubit exchange"


CHECKS = (
    ("partial-trace oracle", _check_partial_trace),
    ("master-equation action", _check_lindblad_action),
    ("steady-state contract", _check_steady_state),
    ("propagation agreement", _check_propagation_agreement),
    ("concurrence oracles", _check_concurrence_oracles),
    ("closed-form populations", _check_population_formulas),
    ("collective-basis consistency", _check_dicke_consistency),
    ("correlation pipeline", _check_correlations),
    ("qubit-exchange symmetry", _check_exchange_symmetry),
)


def run_validation(emit=print) -> int:
    """Run every check; returns the number of failures (0 means all pass)."""
    failures = 0
    rng = np.random.default_rng(SEED)
    for name, check in CHECKS:
        try:
            check(rng)
        except Exception as exc:
            failures += 1
            emit(f"FAIL - {name}: {exc}")
        else:
            emit(f"ok - {name}")
    emit(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
