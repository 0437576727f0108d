"""Rapid-echo detection, random rapid-echo sequences and a vanishing check.

A frame list is a rapid echo when every even frame is the negation of the
frame before it, ``H_{2l} = -H_{2l-1}``. For such sequences every Magnus
order vanishes; :func:`verify_vanishing` checks this numerically with the
combinatorial engine.

Random sequences use NumPy's Philox counter-based generator. Sequence
``index`` under ``seed`` draws from ``Philox(SeedSequence([seed, index]))``,
so each sequence is reproducible on its own and independent of how many
others are generated or in which order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .linalg import spectral_norm
from .magnus import DEFAULT_BUDGET, magnus_term_combinatorial
from .sequences import frames_from_matrices, pauli_vector_hamiltonian

ECHO_TOL = 1e-10
VANISH_TOL = 1e-12
RNG_NAME = "numpy.random.Philox(SeedSequence([seed, index]))"


@dataclass(frozen=True)
class EchoReport:
    is_rapid_echo: bool
    violating_pairs: list = field(default_factory=list)
    m_checked: int = 0
    max_norm: float = 0.0
    note: str = ""
    norms: tuple = ()
    tolerance: float = VANISH_TOL

    @property
    def passed(self):
        """True only for a rapid echo whose checked orders all vanish."""
        return self.is_rapid_echo and self.m_checked > 0 and self.max_norm <= self.tolerance


def is_rapid_echo(frames, tol=ECHO_TOL):
    """Check ``max |H_{2l} + H_{2l-1}| <= tol`` entrywise for every pair.

    ``tol`` is relative to ``max(1, largest entry)`` over all frames, so the
    verdict does not depend on whether frames are in Hz or rad/s. Violations
    are reported as 1-based ``(2l-1, 2l)`` pairs. An odd frame count is never
    a rapid echo.
    """
    n = len(frames)
    scale = max([1.0] + [float(np.max(np.abs(f.hamiltonian))) for f in frames])
    pairs = []
    for a, b in zip(frames[0::2], frames[1::2]):
        if float(np.max(np.abs(a.hamiltonian + b.hamiltonian))) > tol * scale:
            pairs.append((a.index, b.index))
    note = ""
    if n % 2:
        note = f"odd number of frames ({n}); the last frame has no partner"
    elif n == 0:
        note = "no frames"
    ok = not pairs and n > 0 and n % 2 == 0
    return EchoReport(ok, pairs, note=note)


def echo_rng(seed, index=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def random_hamiltonian(rng):
    """``sin th cos ph sx + sin th sin ph sy + cos th sz``, th on [0, pi], ph on [0, 2 pi]."""
    th = rng.uniform(0.0, np.pi)
    ph = rng.uniform(0.0, 2 * np.pi)
    return pauli_vector_hamiltonian(
        [math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]
    )


def random_echo_sequence(M, seed, index=0, tau=None):
    """``2M`` equal-length frames ``H_1, -H_1, ..., H_M, -H_M``.

    ``tau`` defaults to ``1 / (2M)`` so the sequence lasts one time unit.
    """
    if int(M) != M or M < 1:
        raise UsageError("M must be a positive integer")
    M = int(M)
    tau = 1.0 / (2 * M) if tau is None else float(tau)
    rng = echo_rng(seed, index)
    mats = []
    for _ in range(M):
        h = random_hamiltonian(rng)
        mats.extend([h, -h])
    return frames_from_matrices(mats, tau)


def verify_vanishing(frames, m_max, budget=DEFAULT_BUDGET):
    """Largest spectral norm (Hz) of the Magnus terms of orders ``1..m_max``.

    The pass threshold is ``1e-12`` Hz times ``max(1, largest |H_i| in Hz)``,
    which is the plain 1e-12 for unit-scale frames. A frame list that is not a
    rapid echo is reported as a precondition failure with nothing computed;
    its ``passed`` is false.
    """
    report = is_rapid_echo(frames)
    if not report.is_rapid_echo:
        note = "precondition failed: not a rapid echo"
        if report.note:
            note += f" ({report.note})"
        return EchoReport(False, report.violating_pairs, 0, 0.0, note)
    norms = tuple(magnus_term_combinatorial(frames, m, budget).norm_hz
                  for m in range(1, int(m_max) + 1))
    scale = max(spectral_norm(f.hamiltonian) for f in frames) / (2 * np.pi)
    return EchoReport(True, [], int(m_max), max(norms), norms=norms,
                      tolerance=VANISH_TOL * max(1.0, scale))


def verification_run(count, M, m_max, seed, threads=1, budget=DEFAULT_BUDGET):
    """Check ``count`` random rapid-echo sequences; returns the JSON-ready report.

    Results are listed by sequence index whatever the thread count.
    """
    if count < 1:
        raise UsageError("count must be positive")

    def one(index):
        return verify_vanishing(random_echo_sequence(M, seed, index), m_max, budget)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            reports = list(pool.map(one, range(count)))
    else:
        reports = [one(i) for i in range(count)]
    failures = [
        {"index": i, "max_norm": r.max_norm, "norms": list(r.norms)}
        for i, r in enumerate(reports) if not r.passed
    ]
    return {
        "seed": int(seed),
        "count": int(count),
        "n": 2 * int(M),
        "m_max": int(m_max),
        "max_norm_overall": max(r.max_norm for r in reports),
        "failures": failures,
        "rng": RNG_NAME,
    }
