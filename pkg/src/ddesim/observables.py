"""Entanglement and photon-correlation diagnostics.

Wootters concurrence of two-qubit states, quantum-jump photon correlations
g2(tau) built from post-emission conditional states, and FFT extraction of
the anti-bunching timescale. Times are in units of the inverse boson decay
rate; absolute seconds enter only through the configured rate in Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liouvillian import Liouvillian, NumericalError, evolve, vec
from .models import adiabatic_eliminate, rabi_frequency
from .operators import QUBIT_NUMBER, SIGMA_MINUS, DensityMatrix, embed

DARK_TOL = 1e-14
TAIL_FRACTION = 0.05
TAIL_TOL = 0.05
NEGATIVE_TOL = 1e-9
FLATNESS_MIN = 3.0
DEFAULT_N_SAMPLES = 4096
MIN_N_SAMPLES = 256
AMPLITUDE_CUTOFF = 1e-16


class DarkEmitterError(ValueError):
    """The requested emitter carries no excitation to emit."""


class FlatSpectrumError(ValueError):
    """The correlation spectrum has no oscillation peak (overdamped regime)."""


@dataclass(frozen=True)
class ConcurrenceResult:
    """Wootters concurrence and the four sorted spectral values behind it."""

    value: float
    lambdas: tuple[float, float, float, float]


_SY_SY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho2q: DensityMatrix, take_sqrt: bool = True) -> ConcurrenceResult:
    """Wootters concurrence of a two-qubit density matrix.

    Computes the spin-flipped state rho_tilde = (sy x sy) rho* (sy x sy),
    takes the square roots of the eigenvalues of rho @ rho_tilde sorted
    descending, and returns max(0, l1 - l2 - l3 - l4) clamped to [0, 1].

    take_sqrt=False skips the square root, reproducing a literal
    eigenvalues-of-the-product variant for comparison; the standard
    definition (default) is the one with the correct pure-state limits.
    """
    if rho2q.layout.dims != (2, 2):
        raise ValueError(f"concurrence needs a [2, 2] state, got layout {rho2q.layout.dims}")
    rho = rho2q.matrix
    if abs(np.trace(rho) - 1.0) > 1e-8 or np.abs(rho - rho.conj().T).max() > 1e-8:
        raise ValueError("input is not a valid density matrix within 1e-8")

    # The lambdas are sqrt(eig(rho @ rho_tilde)) with
    # rho_tilde = (sy x sy) rho* (sy x sy). Computing eig of that
    # non-Hermitian product loses ~sqrt(eps) on the near-zero eigenvalues of
    # low-rank states; instead use B = sqrt(rho) (sy x sy) sqrt(rho)*, whose
    # singular values equal those square roots exactly (rho rho_tilde is
    # similar to B B-dagger) and come out at machine precision.
    w, u = np.linalg.eigh(rho)
    sqrt_rho = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    b = sqrt_rho @ _SY_SY @ sqrt_rho.conj()
    sv = np.linalg.svd(b, compute_uv=False)
    lam = np.sort(sv if take_sqrt else sv**2)[::-1]
    value = float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))
    return ConcurrenceResult(value=value, lambdas=tuple(float(x) for x in lam))


def _lower_at(layout, emitter: int) -> np.ndarray:
    if emitter not in (0, 1):
        raise ValueError(f"emitter must be 0 or 1, got {emitter}")
    if layout.dims[emitter] != 2:
        raise ValueError(f"subsystem {emitter} of layout {layout.dims} is not a qubit")
    return embed(SIGMA_MINUS, emitter, layout)


def post_jump_state(rho: DensityMatrix, emitter: int) -> tuple[DensityMatrix, float]:
    """Conditional state after a photon emission from the given qubit.

    Returns (sigma_i- rho sigma_i+ / weight, weight) with
    weight = Tr[sigma_i- rho sigma_i+] = <n_i>. A weight below 1e-14 means
    the emitter is dark and raises DarkEmitterError.
    """
    sm = _lower_at(rho.layout, emitter)
    unnorm = sm @ rho.matrix @ sm.conj().T
    weight = float(np.trace(unnorm).real)
    if weight < DARK_TOL:
        raise DarkEmitterError(f"emitter {emitter} dark: weight {weight:.3e} < {DARK_TOL}")
    return DensityMatrix.from_matrix(rho.layout, unnorm / weight), weight


@dataclass(frozen=True)
class CorrelationTrace:
    """Two-emitter photon correlation versus delay.

    raw[k] = sum_ij Tr[n_j rho_i(tau_k)] over bright emitters i and both
    number operators j; normalized = raw / asymptote with
    asymptote = sum_ij Tr[n_j rho_ss], so normalized -> 1 at long delay.
    g2_zero is the normalized value at tau = 0.
    """

    taus: np.ndarray
    raw: np.ndarray
    normalized: np.ndarray
    asymptote: float
    g2_zero: float
    bright_emitters: tuple[int, ...]
    dark_emitters: tuple[int, ...]
    method: str

    def __post_init__(self):
        for name in ("taus", "raw", "normalized"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _emission_setup(l: Liouvillian, rho_ss: DensityMatrix):
    """Bright/dark split, normalized post-jump states, number-sum operator."""
    residual = np.abs(l.superop @ vec(rho_ss.matrix)).max()
    if residual > 1e-8:
        raise ValueError(f"rho_ss is not a steady state of l (residual {residual:.3e})")

    number_sum = sum(embed(QUBIT_NUMBER, j, rho_ss.layout) for j in (0, 1))
    bright, dark, initial = [], [], []
    for i in (0, 1):
        try:
            state, _ = post_jump_state(rho_ss, i)
        except DarkEmitterError:
            dark.append(i)
            continue
        bright.append(i)
        initial.append(state)
    if not bright:
        raise DarkEmitterError("both emitters dark: no emission statistics exist")
    asymptote = len(bright) * float(np.trace(number_sum @ rho_ss.matrix).real)
    raw_zero = sum(float(np.trace(number_sum @ s.matrix).real) for s in initial)
    return tuple(bright), tuple(dark), initial, number_sum, asymptote, raw_zero


def g2_zero(l: Liouvillian, rho_ss: DensityMatrix) -> float:
    """Normalized zero-delay correlation, computed without propagation."""
    _, _, _, _, asymptote, raw_zero = _emission_setup(l, rho_ss)
    return raw_zero / asymptote


def g2_trace(l: Liouvillian, rho_ss: DensityMatrix, tau_max: float,
             n_samples: int = DEFAULT_N_SAMPLES) -> CorrelationTrace:
    """Photon correlation g2 over a uniform delay grid [0, tau_max].

    Propagates the normalized post-emission states of each bright emitter
    under l and records sum_ij Tr[n_j rho_i(tau)]. Uses the cached spectral
    decomposition of l as a single exponential series when it is well
    conditioned, falling back to direct integration otherwise. The zero
    delay sample is always computed directly (no propagation), so it agrees
    exactly with g2_zero.

    tau_max should be long enough for the tail to settle; default_tau_max
    provides the standard window for a parameter set. n_samples must be a
    power of two >= 256 (the grid feeds an FFT downstream).
    """
    if not (np.isfinite(tau_max) and tau_max > 0):
        raise ValueError(f"tau_max must be positive and finite, got {tau_max}")
    if n_samples < MIN_N_SAMPLES or (n_samples & (n_samples - 1)) != 0:
        raise ValueError(f"n_samples must be a power of two >= {MIN_N_SAMPLES}, got {n_samples}")

    bright, dark, initial, number_sum, asymptote, raw_zero = _emission_setup(l, rho_ss)
    taus = np.linspace(0.0, tau_max, n_samples)

    if l.spectral_ok:
        method = "spectral"
        rho0_vec = np.zeros(l.dim * l.dim, dtype=complex)
        for s in initial:
            rho0_vec += vec(s.matrix)
        # Tr[O rho(tau)] = vec(O^T) . V exp(lambda tau) V^-1 vec(rho0):
        # one amplitude per eigenmode, negligible ones dropped
        row = vec(number_sum.T) @ l.eigenvectors
        col = l.eigenvectors_inv @ rho0_vec
        amps = row * col
        keep = np.abs(amps) > AMPLITUDE_CUTOFF * max(1.0, np.abs(amps).sum())
        amps, lams = amps[keep], l.eigenvalues[keep]
        raw = (amps[None, :] * np.exp(lams[None, :] * taus[:, None])).sum(axis=1).real
    else:
        method = "rk"
        raw = np.zeros(n_samples)
        for s in initial:
            res = evolve(l, s, taus, method="rk")
            raw += np.array([st.expect(number_sum).real for st in res.states])

    raw[0] = raw_zero
    normalized = raw / asymptote

    if normalized.min() < -NEGATIVE_TOL:
        raise NumericalError(
            f"normalized correlation dips to {normalized.min():.3e}, below -{NEGATIVE_TOL}")
    tail = normalized[-max(1, int(n_samples * TAIL_FRACTION)):]
    tail_err = np.abs(tail - 1.0).max()
    if tail_err > TAIL_TOL:
        raise NumericalError(
            f"correlation tail not converged: max |normalized - 1| = {tail_err:.3e} "
            f"over the last {TAIL_FRACTION:.0%} of the grid (tau_max too short "
            "or relaxation too slow)")

    return CorrelationTrace(
        taus=taus, raw=raw, normalized=normalized, asymptote=asymptote,
        g2_zero=float(normalized[0]), bright_emitters=bright, dark_emitters=dark,
        method=method)


def default_tau_max(params) -> float:
    """Standard correlation window for a parameter set.

    Ten oscillation periods 2*pi/Omega_est, but at least 50 relaxation
    times of the slower of the two effective qubit decay rates so that the
    tail has settled.
    """
    omega = rabi_frequency(params)
    e = adiabatic_eliminate(params)
    gamma_slow = min(e.gamma00, e.gamma11)
    osc = 10.0 * 2.0 * np.pi / omega if omega > 0 else 0.0
    relax = 50.0 / gamma_slow if gamma_slow > 0 else 0.0
    window = max(osc, relax)
    if window <= 0:
        raise ValueError("parameters define no oscillation or relaxation timescale")
    return window


@dataclass(frozen=True)
class TimescaleResult:
    """Dominant oscillation of a correlation trace.

    peak_frequency is in cycles per native time unit (gamma_a units),
    period_native its inverse, period_seconds the conversion through the
    absolute decay rate. spectrum holds the (frequency, magnitude) samples
    used, flatness the peak-to-median magnitude ratio.
    """

    peak_frequency: float
    period_native: float
    period_seconds: float
    spectrum: tuple[np.ndarray, np.ndarray]
    flatness: float


def extract_timescale(trace: CorrelationTrace, gamma_a_abs: float) -> TimescaleResult:
    """Anti-bunching timescale from the FFT of a correlation trace.

    Subtracts the long-delay limit from the normalized trace, applies a
    Hann window, and picks the magnitude-maximal non-DC bin, refined by
    quadratic interpolation over its three-bin neighborhood. A spectrum
    whose peak is under 3 times the median magnitude has no usable
    oscillation and raises FlatSpectrumError.
    """
    if gamma_a_abs <= 0:
        raise ValueError(f"gamma_a_abs must be positive, got {gamma_a_abs}")
    y = trace.normalized - 1.0
    n = y.size
    dtau = trace.taus[1] - trace.taus[0]
    mags = np.abs(np.fft.rfft(y * np.hanning(n)))
    freqs = np.fft.rfftfreq(n, d=dtau)

    # exclude the full DC main lobe: a Hann window spreads the trace's mean
    # and slow envelope over bins 0..2, and picking those would just return
    # a fraction of the (arbitrary) window length
    first = 3
    k = first + int(np.argmax(mags[first:]))
    peak = mags[k]
    if k == first and mags[first - 1] > peak:
        raise FlatSpectrumError(
            "no oscillation: spectrum is a monotone low-frequency shoulder")
    median = float(np.median(mags[first:]))
    flatness = peak / median if median > 0 else (np.inf if peak > 0 else 0.0)
    if not flatness >= FLATNESS_MIN:
        raise FlatSpectrumError(
            f"no oscillation: peak/median magnitude {flatness:.2f} < {FLATNESS_MIN}")

    # three-point quadratic refinement of the peak bin
    p = 0.0
    if k + 1 < mags.size:
        a, b, c = mags[k - 1], mags[k], mags[k + 1]
        denom = a - 2 * b + c
        if denom != 0:
            p = float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))
    peak_frequency = (k + p) * freqs[1]
    period_native = 1.0 / peak_frequency
    return TimescaleResult(
        peak_frequency=float(peak_frequency),
        period_native=float(period_native),
        period_seconds=float(period_native / gamma_a_abs),
        spectrum=(freqs, mags),
        flatness=float(flatness),
    )
