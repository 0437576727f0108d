"""Sensor coupling factors from first-order AHT and from the exact propagator.

The projection of an effective Hamiltonian ``H`` onto ``S_x, S_y, S_z`` is
normalised as a cosine similarity against the bare signal ``V``::

    a_i = Tr(H^dagger S_i) / sqrt(Tr(V^dagger V) Tr(S_i^dagger S_i))

so ``H = V`` gives exactly 1. The literal ratio ``Tr(H S_i) / Tr(V V)``
scales as ``1/epsilon`` and cannot return 1 for an unrotated signal.

The exact factor is read from ``U_eps = U_1 U_0^dagger``, the rotation the
signal adds on top of the unperturbed sequence, through its principal
logarithm ``U_eps = exp(-i 2 pi H_eps t)``.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import LinearityError, UsageError
from .linalg import hs_inner, principal_log_unitary, spin_operators
from .propagation import DC, NONE, exact_unitary
from .sequences import toggling_frames

log = logging.getLogger(__name__)

AHT1, EXACT = "aht1", "exact"
MAX_PHASE = 0.1
START_PHASE = 0.01
LINEARITY_TOL = 1e-6
MAX_HALVINGS = 40


@dataclass(frozen=True)
class CouplingResult:
    t: float
    alpha: float
    components: tuple
    h_eff: np.ndarray
    epsilon_used: float
    method: str


def projection_components(h, v):
    """Cosine-normalised projections of ``h`` onto the spin operators."""
    basis = spin_operators(h.shape[0])
    vv = hs_inner(v, v).real
    if vv <= 0:
        raise UsageError("perturbation operator has zero norm")
    return tuple(
        hs_inner(h, s).real / np.sqrt(vv * hs_inner(s, s).real) for s in basis
    )


def _result(t, h, v, epsilon, method):
    comps = projection_components(h, v)
    return CouplingResult(float(t), float(np.sqrt(sum(c * c for c in comps))), comps, h,
                          float(epsilon), method)


def alpha_aht1(seq, pert):
    """First-order coupling factor: sign-weighted mean of the toggled signal.

    Only the signal's operator and sign pattern matter; its amplitude cancels.
    ``h_eff`` is reported for the model's ``epsilon`` (or unit amplitude when
    it is zero).
    """
    if pert.kind == NONE:
        raise UsageError("perturbation kind 'none' has no coupling factor")
    a = pert.operator(seq.dim)
    frames = toggling_frames(seq, a)
    signs = pert.signs(seq)
    mean = sum(s * f.hamiltonian * f.duration for s, f in zip(signs, frames)) / seq.period
    eps = pert.epsilon or 1.0
    return _result(seq.period, eps * mean, eps * a, pert.epsilon, AHT1)


def u_epsilon(seq, h0_hz, pert):
    """``U_eps = U_1 U_0^dagger``; the identity when the signal vanishes."""
    u1 = exact_unitary(seq, h0_hz, pert)
    u0 = exact_unitary(seq, h0_hz)
    return u1 @ u0.conj().T


def effective_hamiltonian(u_eps, t):
    """``H_eps`` in Hz with ``U_eps = exp(-i 2 pi H_eps t)``."""
    if not t > 0:
        raise UsageError("duration must be positive")
    return principal_log_unitary(u_eps) / (2 * np.pi * t)


def _alpha_at(seq, h0_hz, pert):
    t = seq.period
    phase = 2 * np.pi * pert.epsilon * t
    if not 0 < phase <= MAX_PHASE * (1 + 1e-12):
        raise UsageError(
            f"need 0 < 2*pi*epsilon*t <= {MAX_PHASE} rad, got {phase:.3g}"
        )
    h = effective_hamiltonian(u_epsilon(seq, h0_hz, pert), t)
    return _result(t, h, pert.epsilon * pert.operator(seq.dim), pert.epsilon, EXACT)


def alpha_exact(seq, h0_hz, pert, tol=LINEARITY_TOL):
    """Exact coupling factor over one pass of ``seq``.

    The value is accepted only if repeating the calculation at half the
    amplitude changes it by less than ``tol``.
    """
    if pert.kind == NONE:
        raise UsageError("perturbation kind 'none' has no coupling factor")
    full = _alpha_at(seq, h0_hz, pert)
    half = _alpha_at(seq, h0_hz, pert.with_epsilon(pert.epsilon / 2))
    if abs(full.alpha - half.alpha) >= tol:
        raise LinearityError(
            f"coupling factor changed by {abs(full.alpha - half.alpha):.2e} when epsilon was "
            f"halved from {pert.epsilon:.3g} Hz"
        )
    return full


def auto_epsilon(t):
    """Starting amplitude giving a 0.01 rad signal phase over ``t``."""
    return START_PHASE / (2 * np.pi * t)


def alpha_exact_auto(seq, h0_hz, pert, tol=LINEARITY_TOL):
    """:func:`alpha_exact` with the amplitude chosen automatically.

    Starts at ``auto_epsilon`` and halves until the linearity check passes.
    """
    eps = auto_epsilon(seq.period)
    for _ in range(MAX_HALVINGS):
        try:
            res = alpha_exact(seq, h0_hz, pert.with_epsilon(eps), tol)
        except LinearityError:
            eps /= 2
            continue
        log.debug("t=%.6g s: epsilon %.6g Hz", seq.period, eps)
        return res
    raise LinearityError(f"no linear-response amplitude found down to {eps:.3g} Hz")


def _threads(threads):
    if threads is not None:
        return max(1, int(threads))
    import os

    env = os.environ.get("BAHT_THREADS")
    return max(1, int(env)) if env else 1


def alpha_sweep(seq, h0_hz, pert, t_grid, threads=None, tol=LINEARITY_TOL):
    """Exact coupling factor over sequence durations ``t_grid``.

    Each duration rescales the base interval with ``H0`` fixed. Results are in
    grid order whatever the thread count.
    """
    if pert.kind not in (DC, "ac_square"):
        raise UsageError("sweep needs a DC or square-wave perturbation")

    def point(t):
        return alpha_exact_auto(seq.with_period(t), h0_hz, pert, tol)

    n = _threads(threads)
    if n == 1:
        return [point(t) for t in t_grid]
    with ThreadPoolExecutor(n) as pool:
        return list(pool.map(point, t_grid))
