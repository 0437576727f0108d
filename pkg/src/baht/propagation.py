"""Exact and average-Hamiltonian propagators, time series and spectra.

Public functions take the static Hamiltonian ``H0`` and perturbation
amplitudes in Hz and durations in seconds; a frame of length ``tau`` evolves
as ``exp(-i 2 pi H tau)``. Magnus terms carry angular units, so
:func:`aht_unitary` uses ``exp(-i Hbar t)`` directly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UsageError
from .linalg import (
    PAULI_X,
    check_hermitian,
    check_state,
    mat_exp_hermitian,
    plus_state,
    spectral_norm,
    spin_operators,
    state_fidelity,
)
from .magnus import M_MAX, magnus_terms
from .sequences import split_to_equal_tau, toggling_frames

NONE, DC, AC_SQUARE = "none", "dc", "ac_square"


def alternating_signs(k):
    """Default square-wave pattern ``(-1)^k`` over 1-based frame indices."""
    return -1 if k % 2 else 1


@dataclass(frozen=True)
class PerturbationModel:
    """Signal ``V_k = s(k) * epsilon * A`` added during frame ``k``.

    ``axis_operator`` (``A``) defaults to ``S_z``. For a square wave the sign
    pattern ``s`` defaults to the sequence's own pattern when it declares one,
    otherwise to ``(-1)^k``.
    """

    kind: str = NONE
    epsilon: float = 0.0
    axis_operator: np.ndarray = None
    sign_pattern: object = None

    def __post_init__(self):
        if self.kind not in (NONE, DC, AC_SQUARE):
            raise UsageError(f"unknown perturbation kind {self.kind!r}")
        if not self.epsilon >= 0:
            raise UsageError("epsilon must be non-negative")
        if self.axis_operator is not None:
            check_hermitian(self.axis_operator)

    @classmethod
    def dc(cls, epsilon, axis_operator=None):
        return cls(DC, float(epsilon), axis_operator)

    @classmethod
    def ac_square(cls, epsilon, axis_operator=None, sign_pattern=None):
        return cls(AC_SQUARE, float(epsilon), axis_operator, sign_pattern)

    def with_epsilon(self, epsilon):
        return PerturbationModel(self.kind, float(epsilon), self.axis_operator, self.sign_pattern)

    def operator(self, dim):
        if self.axis_operator is None:
            return spin_operators(dim).z
        if self.axis_operator.shape[0] != dim:
            raise DimensionError("perturbation operator dimension does not match the sequence")
        return np.asarray(self.axis_operator, dtype=complex)

    def signs(self, seq):
        n = seq.n
        if self.kind == NONE:
            return [0] * n
        if self.kind == DC:
            return [1] * n
        if self.sign_pattern is not None:
            return [int(self.sign_pattern(k)) for k in range(1, n + 1)]
        if seq.ac_signs is not None:
            return list(seq.ac_signs)
        return [alternating_signs(k) for k in range(1, n + 1)]

    def frame_operators(self, seq):
        """Lab-frame ``V_k`` in Hz for every interval of ``seq``."""
        a = self.operator(seq.dim)
        return [s * self.epsilon * a for s in self.signs(seq)]


def _frame_hamiltonians(seq, h0_hz, pert):
    h0 = check_hermitian(h0_hz)
    if h0.shape[0] != seq.dim:
        raise DimensionError(f"H0 is {h0.shape[0]}-dimensional, sequence is {seq.dim}")
    if pert is None or pert.kind == NONE:
        return [h0] * seq.n
    return [h0 + v for v in pert.frame_operators(seq)]


def exact_unitary(seq, h0_hz, pert=None):
    """Lab-frame product ``(e^{-i2pi(H0+V_n)tau_n} P_n) ... (e^{-i2pi(H0+V_1)tau_1} P_1)``.

    The closing pulse of a cyclic built-in is applied last.
    """
    u = np.eye(seq.dim, dtype=complex)
    hs = _frame_hamiltonians(seq, h0_hz, pert)
    for p, h, dt in zip(seq.pulse_unitaries(), hs, seq.durations):
        u = mat_exp_hermitian(h, 2 * np.pi * dt) @ p @ u
    if seq.closing_pulse is not None:
        u = seq.closing_pulse.unitary(seq.dim) @ u
    return u


def aht_hamiltonian(terms):
    """Sum of Magnus terms (orders must run 1..m with one shared duration)."""
    if not terms:
        raise UsageError("no Magnus terms given")
    if [t.order for t in terms] != list(range(1, len(terms) + 1)):
        raise UsageError("Magnus orders must be contiguous from 1")
    t0 = terms[0].t_total
    if any(abs(t.t_total - t0) > 1e-12 * abs(t0) for t in terms):
        raise UsageError("Magnus terms were computed for different durations")
    return sum(t.matrix for t in terms)


def aht_unitary(terms, t):
    """``exp(-i (Hbar_1 + ... + Hbar_m) t)`` with angular-unit terms."""
    return mat_exp_hermitian(aht_hamiltonian(terms), t)


def propagator_distance(ua, ub):
    return spectral_norm(np.asarray(ua) - np.asarray(ub))


def _partial_unitaries(seq, h0_hz, times):
    """Lab-frame propagators from 0 to each time in ``times`` within one period.

    Pulses at or before a sample time are included; the closing pulse only
    at the period end.
    """
    hs = _frame_hamiltonians(seq, h0_hz, None)
    pulses = seq.pulse_unitaries()
    edges = np.concatenate([[0.0], np.cumsum(seq.durations)])
    out = []
    for s in times:
        u = np.eye(seq.dim, dtype=complex)
        for i, (p, h) in enumerate(zip(pulses, hs)):
            if edges[i] > s + 1e-12 * edges[-1]:
                break
            dt = min(s, edges[i + 1]) - edges[i]
            u = mat_exp_hermitian(h, 2 * np.pi * max(dt, 0.0)) @ p @ u
        if s >= edges[-1] * (1 - 1e-12) and seq.closing_pulse is not None:
            u = seq.closing_pulse.unitary(seq.dim) @ u
        out.append(u)
    return out


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    observable_label: str = "sigma_x"


def parse_propagator(spec):
    """``'exact'`` or ``'aht:m'`` -> ``None`` or ``m``."""
    if spec == "exact":
        return None
    if isinstance(spec, str) and spec.startswith("aht:"):
        try:
            m = int(spec[4:])
        except ValueError:
            raise UsageError(f"bad propagator {spec!r}") from None
        if not 1 <= m <= M_MAX:
            raise UsageError(f"AHT order must be in [1, {M_MAX}], got {m}")
        return m
    raise UsageError(f"propagator must be 'exact' or 'aht:m', got {spec!r}")


def stroboscopic_series(seq, h0_hz, psi0=None, observable=None, n_periods=64,
                        samples_per_period=1, propagator="exact", label=None):
    """Expectation of ``observable`` sampled every ``period / samples_per_period``.

    ``propagator`` is ``'exact'`` or ``'aht:m'``. Samples start at ``t = 0``.
    The AHT evolution is continuous in ``t`` and carries no intra-period
    micromotion. The default observable is ``sigma_x`` on ``|+x>``.
    """
    if samples_per_period < 1 or n_periods < 1:
        raise UsageError("n_periods and samples_per_period must be positive")
    psi0 = check_state(plus_state("x", seq.dim) if psi0 is None else psi0)
    if observable is None:
        if seq.dim != 2:
            raise UsageError("give an observable explicitly for dim > 2")
        observable, label = PAULI_X, label or "sigma_x"
    observable = check_hermitian(observable)
    period = seq.period
    step = period / samples_per_period
    n_samples = n_periods * samples_per_period
    times = np.arange(n_samples) * step
    order = parse_propagator(propagator)
    values = np.empty(n_samples)
    if order is None:
        subs = _partial_unitaries(seq, h0_hz, step * np.arange(samples_per_period))
        u_period = exact_unitary(seq, h0_hz)
        psi = psi0
        for p in range(n_periods):
            for k, u in enumerate(subs):
                phi = u @ psi
                values[p * samples_per_period + k] = np.vdot(phi, observable @ phi).real
            psi = u_period @ psi
    else:
        frames = split_to_equal_tau(toggling_frames(seq, 2 * np.pi * h0_hz))
        h = aht_hamiltonian(magnus_terms(frames, order))
        step_u = mat_exp_hermitian(h, step)
        psi = psi0
        for j in range(n_samples):
            values[j] = np.vdot(psi, observable @ psi).real
            psi = step_u @ psi
    return TimeSeries(times, values, label or "observable")


RECT, HANN = "rect", "hann"


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray
    power: np.ndarray

    @property
    def bin_width(self):
        return float(self.freqs[1] - self.freqs[0]) if len(self.freqs) > 1 else 0.0

    def peak_frequency(self, exclude_dc=True):
        start = 1 if exclude_dc else 0
        return float(self.freqs[start + int(np.argmax(self.power[start:]))])

    def band_power(self, f0, bins=1):
        """Largest power within ``bins`` bins of ``f0``; 0 beyond the last bin."""
        k = int(round(f0 / self.bin_width))
        lo, hi = max(k - bins, 0), min(k + bins, len(self.power) - 1)
        if lo > hi:
            return 0.0
        return float(self.power[lo:hi + 1].max())

    def max_peak(self, exclude_dc=True):
        return float(self.power[1:].max() if exclude_dc else self.power.max())


def power_spectrum(series, window=RECT):
    """One-sided power spectrum with frequencies in Hz.

    Normalised so the powers sum to the energy ``sum (w x)^2`` of the
    windowed series.
    """
    t = np.asarray(series.times, dtype=float)
    x = np.asarray(series.values, dtype=float)
    if len(t) < 2:
        raise UsageError("need at least two samples")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt.mean())) > 1e-9 * dt.mean():
        raise UsageError("samples are not uniformly spaced")
    n = len(x)
    if window == RECT:
        w = np.ones(n)
    elif window == HANN:
        w = np.hanning(n)
    else:
        raise UsageError(f"unknown window {window!r}")
    spec = np.fft.rfft(w * x)
    power = np.abs(spec) ** 2 / n
    if n % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    freqs = np.fft.rfftfreq(n, d=dt.mean())
    return Spectrum(freqs, power)


@dataclass(frozen=True)
class FidelityRow:
    t_seconds: float
    m: int
    fidelity: float


def fidelity_sweep(seq, h0_hz, m_list=(1, 3), t_grid=(), psi0=None):
    """State fidelity between AHT-m and exact evolution over sequence durations.

    Durations are realised by rescaling the base interval.
    """
    psi0 = plus_state("x", seq.dim) if psi0 is None else psi0
    m_list = [int(m) for m in m_list]
    if any(not 1 <= m <= M_MAX for m in m_list):
        raise UsageError(f"orders must be in [1, {M_MAX}]")
    rows = []
    for t in t_grid:
        s = seq.with_period(t)
        u0 = exact_unitary(s, h0_hz)
        net = s.net_rotation()
        frames = split_to_equal_tau(toggling_frames(s, 2 * np.pi * h0_hz))
        terms = magnus_terms(frames, max(m_list))
        for m in m_list:
            um = net @ aht_unitary(terms[:m], t)
            rows.append(FidelityRow(float(t), m, state_fidelity(psi0, um, u0)))
    return rows
