"""Lindblad generators: construction, propagation, steady states.

The generator rho_dot = -i[H, rho] + sum_k gamma_k (L_k rho L_k+ - {L_k+ L_k, rho}/2)
is materialized as a dense superoperator acting on column-stacked vectorized
density matrices, vec(A X B) = (B^T kron A) vec(X). The spectral decomposition
is computed eagerly at build time and drives both propagation and the
steady-state solve; an independent adaptive Runge-Kutta integrator provides
the cross-check path and the fallback for ill-conditioned eigenbases.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .operators import (
    DensityMatrix,
    SpaceLayout,
    hermitize,
    is_hermitian,
    partial_trace,
)

# residual and drift tolerances, about 100x the double-precision noise
# floor at total_dim <= 16
RESIDUAL_TOL = 1e-10
DEGENERACY_TOL = 1e-10
TRACE_DRIFT_TOL = 1e-9
STEADY_EIG_TOL = 1e-9
EVOLVED_EIG_TOL = 1e-8
COND_LIMIT = 1e12

RK_RTOL = 1e-9
RK_ATOL = 1e-12


class NumericalError(RuntimeError):
    """A numerical tolerance contract was violated."""


class DegenerateSteadyStateError(NumericalError):
    """The Liouvillian kernel is (numerically) degenerate: no unique steady state."""


@dataclass(frozen=True)
class JumpTerm:
    """One dissipation channel: collapse operator with a nonnegative rate."""

    rate: float
    operator: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"jump rate must be nonnegative, got {self.rate}")
        op = np.asarray(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"jump operator must be square, got shape {op.shape}")
        op = op.copy()
        op.flags.writeable = False
        object.__setattr__(self, "operator", op)


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of vec for square matrices."""
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector length {v.size} is not a perfect square")
    return v.reshape((d, d), order="F")


@dataclass(frozen=True)
class Liouvillian:
    """Dense Lindblad superoperator with an eagerly computed spectral cache.

    Immutable after construction; safe to share across sweep workers.
    """

    layout: SpaceLayout
    superop: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)     # right eigenvectors, columns
    eigenvectors_inv: np.ndarray = field(repr=False)
    condition: float

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def spectral_ok(self) -> bool:
        """Whether the eigenbasis is well enough conditioned for propagation."""
        return np.isfinite(self.condition) and self.condition <= COND_LIMIT


def build_liouvillian(h: np.ndarray, jumps: list[JumpTerm] | tuple[JumpTerm, ...],
                      layout: SpaceLayout | None = None) -> Liouvillian:
    """Assemble the dense superoperator for Hamiltonian h and jump terms.

    Parameters
    ----------
    h : ndarray
        Hamiltonian, Hermitian within 1e-10.
    jumps : sequence of JumpTerm
        Dissipation channels; operator dims must match h.
    layout : SpaceLayout, optional
        Subsystem structure of the space h acts on. Defaults to a single
        subsystem of matching dimension.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
    if not is_hermitian(h, 1e-10):
        raise ValueError("Hamiltonian is not Hermitian within 1e-10")
    d = h.shape[0]
    if layout is None:
        layout = SpaceLayout((d,))
    if layout.total_dim != d:
        raise ValueError(f"layout dimension {layout.total_dim} does not match Hamiltonian dim {d}")

    eye = np.eye(d, dtype=complex)
    # vec(A X B) = (B^T kron A) vec(X), column stacking
    sop = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for j in jumps:
        op = j.operator
        if op.shape != (d, d):
            raise ValueError(f"jump operator shape {op.shape} does not match dim {d}")
        if j.rate == 0.0:
            continue
        opdop = op.conj().T @ op
        sop += j.rate * (np.kron(op.conj(), op)
                         - 0.5 * np.kron(eye, opdop)
                         - 0.5 * np.kron(opdop.T, eye))

    vals, vecs = scipy.linalg.eig(sop)
    try:
        cond = float(np.linalg.cond(vecs))
        vecs_inv = np.linalg.inv(vecs)
    except np.linalg.LinAlgError:
        cond = np.inf
        vecs_inv = np.full_like(vecs, np.nan)
    sop = sop.copy()
    for arr in (sop, vals, vecs, vecs_inv):
        arr.flags.writeable = False
    return Liouvillian(layout, sop, vals, vecs, vecs_inv, cond)


def apply_liouvillian(l: Liouvillian, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """Evaluate d(rho)/dt for a state; Hermitian and traceless up to roundoff."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (l.dim, l.dim):
        raise ValueError(f"state shape {m.shape} does not match Liouvillian dim {l.dim}")
    return unvec(l.superop @ vec(m))


@dataclass(frozen=True)
class EvolveResult:
    """Sampled Lindblad trajectory."""

    times: np.ndarray = field(repr=False)
    states: tuple[DensityMatrix, ...] = field(repr=False)
    method: str = "spectral"
    max_trace_drift: float = 0.0
    fallback_reason: str | None = None


def _validate_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a nonempty 1-D sequence")
    if t[0] < 0:
        raise ValueError("times must be nonnegative")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    return t


def _spectral_propagate(l: Liouvillian, m0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Propagated vectorized states, one column per sample time."""
    w = l.eigenvectors_inv @ vec(m0)
    phases = np.exp(np.outer(l.eigenvalues, times))  # (d^2, n_t)
    return l.eigenvectors @ (phases * w[:, None])


def _rk_propagate(l: Liouvillian, m0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Adaptive RK 4(5) integration of the vectorized master equation."""
    y0 = vec(m0)
    if times[-1] == 0.0:
        return np.tile(y0[:, None], (1, times.size))
    sop = l.superop
    sol = solve_ivp(lambda t, y: sop @ y, (0.0, float(times[-1])), y0,
                    method="RK45", t_eval=times, rtol=RK_RTOL, atol=RK_ATOL)
    if not sol.success:
        raise NumericalError(f"RK45 integration failed: {sol.message}")
    return sol.y


def evolve(l: Liouvillian, rho0: DensityMatrix, times,
           method: str = "auto") -> EvolveResult:
    """Propagate rho0 along the given sample times.

    The spectral decomposition is the primary path; the integrator path is
    used on request (method="rk") or as automatic fallback when the
    eigenbasis condition estimate exceeds 1e12 or the spectral trace drift
    exceeds 1e-9. Each sampled state is hermitized and trace-renormalized;
    the pre-normalization drift is reported in the result.
    """
    if rho0.layout.total_dim != l.dim:
        raise ValueError("initial state dimension does not match Liouvillian")
    if method not in ("auto", "spectral", "rk"):
        raise ValueError(f"unknown method {method!r}")
    t = _validate_times(times)

    chosen = method
    reason = None
    if method == "auto":
        if l.spectral_ok:
            chosen = "spectral"
        else:
            chosen = "rk"
            reason = f"eigenbasis condition {l.condition:.3e} exceeds {COND_LIMIT:.0e}"
    elif method == "spectral" and not l.spectral_ok:
        raise NumericalError(
            f"spectral path requested but eigenbasis condition {l.condition:.3e} "
            f"exceeds {COND_LIMIT:.0e}")

    cols = (_spectral_propagate if chosen == "spectral" else _rk_propagate)(l, rho0.matrix, t)
    drift = float(np.max(np.abs(np.einsum("iik->k", cols.reshape(l.dim, l.dim, t.size, order="F")).real - 1.0)))
    if chosen == "spectral" and method == "auto" and drift > TRACE_DRIFT_TOL:
        reason = f"spectral trace drift {drift:.3e} exceeds {TRACE_DRIFT_TOL:.0e}"
        chosen = "rk"
        cols = _rk_propagate(l, rho0.matrix, t)
        drift = float(np.max(np.abs(np.einsum("iik->k", cols.reshape(l.dim, l.dim, t.size, order="F")).real - 1.0)))
    if drift > TRACE_DRIFT_TOL:
        raise NumericalError(f"trace drift {drift:.3e} exceeds {TRACE_DRIFT_TOL:.0e} on both paths")

    states = tuple(
        DensityMatrix.from_matrix(rho0.layout, unvec(cols[:, k]), normalize=True,
                                  eig_tol=EVOLVED_EIG_TOL)
        for k in range(t.size))
    return EvolveResult(times=t, states=states, method=chosen,
                        max_trace_drift=drift, fallback_reason=reason)


def _trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d, dtype=complex)
    row[::d + 1] = 1.0  # diagonal positions of column-stacked vec
    return row


def steady_state(l: Liouvillian) -> DensityMatrix:
    """Unique fixed point of the generator.

    Computed from the kernel eigenvector of the superoperator (smallest
    eigenvalue magnitude), hermitized and trace-normalized. A direct
    linear solve with the trace constraint substituted for one row is used
    as refinement if the eigenvector residual misses the 1e-10 contract.

    Raises
    ------
    DegenerateSteadyStateError
        If two eigenvalues have magnitude < 1e-10 (decoupled sectors).
    NumericalError
        If the residual stays above 1e-10 or the state has an eigenvalue
        below -1e-9.
    """
    mags = np.abs(l.eigenvalues)
    order = np.argsort(mags)
    if mags.size > 1 and mags[order[1]] < DEGENERACY_TOL:
        raise DegenerateSteadyStateError(
            "Liouvillian kernel is degenerate (two eigenvalues below "
            f"{DEGENERACY_TOL:.0e}: {l.eigenvalues[order[0]]:.3e}, "
            f"{l.eigenvalues[order[1]]:.3e}); no unique steady state. "
            "This signals a decoupled-sector parameter choice.")

    candidates = []
    if np.all(np.isfinite(l.eigenvectors)):
        v = unvec(l.eigenvectors[:, order[0]])
        tr = np.trace(v)
        if abs(tr) > 1e-12:
            candidates.append(hermitize(v / tr))

    d = l.dim
    a = np.array(l.superop)
    a[0, :] = _trace_row(d)
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    try:
        candidates.append(hermitize(unvec(np.linalg.solve(a, b))))
    except np.linalg.LinAlgError:
        pass

    best = None
    best_res = np.inf
    for m in candidates:
        m = m / np.trace(m).real
        res = float(np.max(np.abs(l.superop @ vec(m))))
        if res < best_res:
            best, best_res = m, res
    if best is None:
        raise NumericalError("steady-state solve failed on all paths")
    if best_res >= RESIDUAL_TOL:
        raise NumericalError(
            f"steady-state residual {best_res:.3e} exceeds {RESIDUAL_TOL:.0e}")
    min_eig = float(np.linalg.eigvalsh(best).min())
    if min_eig < -STEADY_EIG_TOL:
        raise NumericalError(
            f"steady state has negative eigenvalue {min_eig:.3e} below -{STEADY_EIG_TOL:.0e}")
    return DensityMatrix(l.layout, best, STEADY_EIG_TOL)


def steady_state_residual(l: Liouvillian, rho: DensityMatrix) -> float:
    """Max-entry norm of L(rho); < 1e-10 for accepted steady states."""
    return float(np.max(np.abs(l.superop @ vec(rho.matrix))))


def truncation_check(params, n_max: int | None = None) -> float:
    """Boson-truncation convergence probe.

    Recomputes steady-state concurrence and zero-delay g2 at n_max and
    n_max + 1 and returns the largest absolute change. A decoupled boson
    (g0 = g1 = 0 with no boson drive) cannot influence the qubit
    observables, so the change is identically zero there.
    """
    from . import models, observables  # deferred to avoid an import cycle

    if n_max is None:
        n_max = params.n_max
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if params.g0 == 0.0 and params.g1 == 0.0 and params.eta_a == 0.0:
        return 0.0

    def observables_at(nm: int) -> tuple[float, float]:
        p = dataclasses.replace(params, n_max=nm)
        h, jumps, layout = models.build_full_model(p)
        liou = build_liouvillian(h, jumps, layout)
        rho = steady_state(liou)
        c = observables.concurrence(partial_trace(rho, (0, 1))).value
        g = observables.g2_zero(liou, rho)
        return c, g

    c_lo, g_lo = observables_at(n_max)
    c_hi, g_hi = observables_at(n_max + 1)
    return max(abs(c_hi - c_lo), abs(g_hi - g_lo))
