"""Pulse sequences and their toggling-frame Hamiltonians.

A sequence is a list of instantaneous pulses, each followed by a free
evolution interval. After pulse ``i`` the static Hamiltonian ``H0`` appears
in the toggling frame as ``Q_i^dagger H0 Q_i`` with ``Q_i = P_i ... P_1``.

Built-in sequences are specified by their toggling-frame table (which signed
axis ``S_z`` is mapped onto in each interval); the pulses realising a table
are derived from it, together with a closing pulse that returns the frame
to the identity so the sequence can be repeated.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CommensurabilityError, DimensionError, UnknownSequenceError, UsageError
from .linalg import PAULIS, check_hermitian, mat_exp_hermitian, spin_operators

AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
_AXIS_TOL = 1e-10
_DURATION_RTOL = 1e-9


@dataclass(frozen=True)
class Pulse:
    """Instantaneous rotation ``exp(i phase) exp(-i angle n . S)``."""

    axis: tuple
    angle: float
    label: str = ""
    phase: float = 0.0

    def __post_init__(self):
        axis = tuple(float(c) for c in self.axis)
        if len(axis) != 3:
            raise UsageError(f"pulse axis must have 3 components, got {len(axis)}")
        if abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL:
            raise UsageError(f"pulse axis {axis} is not a unit vector")
        if not np.isfinite(self.angle):
            raise UsageError("pulse angle must be finite")
        object.__setattr__(self, "axis", axis)

    def unitary(self, dim=2):
        generator = spin_operators(dim).along(self.axis)
        return np.exp(1j * self.phase) * mat_exp_hermitian(generator, self.angle)

    @classmethod
    def identity(cls):
        return cls((0.0, 0.0, 1.0), 0.0, "id")


@dataclass(frozen=True)
class FrameInterval:
    hamiltonian: np.ndarray
    duration: float
    index: int

    def __post_init__(self):
        if not self.duration > 0:
            raise UsageError(f"frame {self.index} has non-positive duration {self.duration}")


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pulses with free-evolution durations in units of ``base_unit_tau``.

    ``units[i]`` is the integer length of interval ``i``; ``frame_table`` is
    kept when the sequence was built from signed axes, so it can be written
    back in that form.
    """

    name: str
    pulses: tuple
    units: tuple
    base_unit_tau: float
    dim: int = 2
    closing_pulse: Pulse = None
    frame_table: tuple = None
    ac_signs: tuple = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.pulses) != len(self.units):
            raise UsageError("pulses and durations must have the same length")
        if not self.pulses:
            raise UsageError("a sequence needs at least one interval")
        if not self.base_unit_tau > 0:
            raise UsageError("base_unit_tau must be positive")
        for i, k in enumerate(self.units, 1):
            if int(k) != k or k < 1:
                raise CommensurabilityError(
                    f"interval {i}: duration must be a positive integer number of base units, got {k}"
                )
        object.__setattr__(self, "units", tuple(int(k) for k in self.units))
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.ac_signs is not None:
            signs = tuple(int(s) for s in self.ac_signs)
            if len(signs) != len(self.pulses) or any(s not in (1, -1) for s in signs):
                raise UsageError("ac_signs needs one +1/-1 entry per interval")
            object.__setattr__(self, "ac_signs", signs)

    @property
    def n(self):
        return len(self.pulses)

    @property
    def durations(self):
        return tuple(k * self.base_unit_tau for k in self.units)

    @property
    def period(self):
        return sum(self.units) * self.base_unit_tau

    def with_tau(self, tau):
        return replace(self, base_unit_tau=float(tau))

    def with_period(self, t):
        """Rescale the base unit so the whole sequence lasts ``t`` seconds."""
        return self.with_tau(t / sum(self.units))

    def pulse_unitaries(self):
        return [p.unitary(self.dim) for p in self.pulses]

    def frame_rotations(self):
        """Accumulated pulse products ``Q_i = P_i ... P_1``."""
        q = np.eye(self.dim, dtype=complex)
        out = []
        for p in self.pulse_unitaries():
            q = p @ q
            out.append(q)
        return out

    def net_rotation(self):
        """Frame rotation left over after one pass, including the closing pulse."""
        q = self.frame_rotations()[-1]
        if self.closing_pulse is not None:
            q = self.closing_pulse.unitary(self.dim) @ q
        return q


def _signed_axis_su2(axis, sign):
    """SU(2) rotation ``Q`` with ``Q^dagger S_z Q = sign * S_axis``."""
    # exp(-i a S_x)^dagger S_z exp(-i a S_x) = S_z cos a + S_y sin a
    # exp(-i a S_y)^dagger S_z exp(-i a S_y) = S_z cos a - S_x sin a
    table = {
        ("z", 1): ("z", 0.0),
        ("z", -1): ("x", np.pi),
        ("y", 1): ("x", np.pi / 2),
        ("y", -1): ("x", -np.pi / 2),
        ("x", 1): ("y", -np.pi / 2),
        ("x", -1): ("y", np.pi / 2),
    }
    rot_axis, angle = table[(axis, sign)]
    return Pulse(AXES[rot_axis], angle).unitary(2)


def _axis_of_signed(vector):
    """``(name, sign)`` for a signed Cartesian axis, else ``None``."""
    vec = np.asarray(vector, dtype=float)
    for name, ref in AXES.items():
        if np.allclose(np.abs(vec), ref, atol=1e-12):
            return name, int(np.sign(vec @ np.array(ref)))
    return None


def _frame_su2(axis, sign):
    """``Q`` with ``Q^dagger S_z Q = sign * n . S`` for a named or vector axis."""
    if isinstance(axis, str):
        return _signed_axis_su2(axis, sign)
    named = _axis_of_signed(axis)
    if named is not None:
        return _signed_axis_su2(named[0], sign * named[1])
    n = sign * np.asarray(axis, dtype=float)
    polar = np.arccos(np.clip(n[2], -1.0, 1.0))
    e = np.exp(1j * np.arctan2(n[1], n[0]))
    c, s = np.cos(polar / 2), np.sin(polar / 2)
    # columns are the +n and -n spinors, so P S_z P^dagger = n . S
    p = np.array([[c, -s / e], [s * e, c]], dtype=complex)
    return p.conj().T


def pulse_from_su2(u, label=""):
    """Axis-angle pulse equal to the SU(2) matrix ``u`` (no global phase)."""
    c = ((u[0, 0] + u[1, 1]) / 2).real
    s = np.array([
        -((u[0, 1] + u[1, 0]) / 2).imag,
        ((u[1, 0] - u[0, 1]) / 2).real,
        -((u[0, 0] - u[1, 1]) / 2).imag,
    ])
    sn = float(np.linalg.norm(s))
    if sn < 1e-14 and c > 0:
        return Pulse.identity()
    half = np.arctan2(sn, c)
    axis = s / sn if sn >= 1e-14 else np.array([1.0, 0.0, 0.0])
    return Pulse(tuple(axis / np.linalg.norm(axis)), float(2 * half), label)


def from_frame_table(name, table, units, tau, dim=2, ac_signs=None):
    """Build a cyclic sequence whose toggling frames follow ``table``.

    ``table`` is a list of ``(axis, sign)`` where axis is one of ``'xyz'`` or
    a real unit 3-vector; frame ``i`` sees ``H0 = S_z`` as ``sign * n . S``.
    """
    table = tuple((a if isinstance(a, str) else tuple(float(c) for c in a), int(s))
                  for a, s in table)
    if len(table) != len(units):
        raise UsageError("frame table and durations differ in length")
    q_prev = np.eye(2, dtype=complex)
    pulses = []
    for i, (axis, sign) in enumerate(table, 1):
        bad_axis = (axis not in AXES) if isinstance(axis, str) else (
            len(axis) != 3 or abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL)
        if bad_axis or sign not in (1, -1):
            raise UsageError(f"frame {i}: invalid signed axis ({axis}, {sign})")
        q = _frame_su2(axis, sign)
        pulses.append(pulse_from_su2(q @ q_prev.conj().T, f"P{i}"))
        q_prev = q
    closing = pulse_from_su2(q_prev.conj().T, "close")
    if closing.angle == 0.0:
        closing = None
    return PulseSequence(
        name=name,
        pulses=tuple(pulses),
        units=tuple(units),
        base_unit_tau=float(tau),
        dim=dim,
        closing_pulse=closing,
        frame_table=table,
        ac_signs=None if ac_signs is None else tuple(ac_signs),
    )


def _negated(table):
    return [(a, -s) for a, s in table]


WAHUHA_TABLE = [("z", 1), ("y", 1), ("x", 1), ("x", 1), ("y", 1), ("z", 1)]

BUILTIN_TABLES = {
    "ramsey": [("z", 1)],
    "echo": [("z", 1), ("z", -1)],
    "wahuha": WAHUHA_TABLE,
    "wahuha_echo": WAHUHA_TABLE + _negated(WAHUHA_TABLE),
    "xy8": [("z", 1), ("z", -1)] * 4,
    "droid_like": [
        ("z", 1), ("z", -1), ("y", 1), ("y", -1), ("x", 1), ("x", -1),
        ("x", 1), ("x", -1), ("y", 1), ("y", -1), ("z", 1), ("z", -1),
    ],
}

BUILTIN_NAMES = tuple(BUILTIN_TABLES)

# Square-wave signs per frame where the plain (-1)^k pattern is not intended.
# wahuha_echo flips the signal once per WAHUHA block, so the sign reversal of
# the frames and of the signal cancel.
BUILTIN_AC_SIGNS = {
    "wahuha_echo": [1] * 6 + [-1] * 6,
}


def builtin(name, tau, repetitions=1, dim=2):
    """Return a built-in sequence with base interval ``tau`` seconds.

    Frame tables (for ``H0`` along ``S_z``):

    ============  =====================================================
    ramsey        z
    echo          z, -z
    wahuha        z, y, x, x, y, z  (the tau, tau, 2tau, tau, tau cycle)
    wahuha_echo   wahuha followed by its sign-reversed frames
                  (square-wave signal: +1 on the first block, -1 on the second)
    xy8           z, -z repeated four times
    droid_like    z,-z, y,-y, x,-x, x,-x, y,-y, z,-z  (rapid echoes)
    ============  =====================================================
    """
    try:
        table = BUILTIN_TABLES[name]
    except KeyError:
        raise UnknownSequenceError(
            f"unknown sequence {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None
    if not tau > 0:
        raise UsageError("tau must be positive")
    if int(repetitions) != repetitions or repetitions < 1:
        raise UsageError("repetitions must be a positive integer")
    table = list(table) * int(repetitions)
    signs = BUILTIN_AC_SIGNS.get(name)
    if signs is not None:
        signs = list(signs) * int(repetitions)
    return from_frame_table(name, table, [1] * len(table), tau, dim, ac_signs=signs)


def toggling_frames(seq, h0):
    """Toggling-frame Hamiltonians ``H_i = Q_i^dagger H0 Q_i`` with durations.

    Units of ``h0`` are preserved. The Magnus routines read frame Hamiltonians
    as angular frequencies, so pass ``2*pi*H0`` for an ``H0`` given in Hz.
    """
    h0 = check_hermitian(h0)
    if h0.shape[0] != seq.dim:
        raise DimensionError(f"H0 is {h0.shape[0]}-dimensional, sequence is {seq.dim}")
    frames = []
    for i, (q, dt) in enumerate(zip(seq.frame_rotations(), seq.durations), 1):
        h = q.conj().T @ h0 @ q
        frames.append(FrameInterval((h + h.conj().T) / 2, dt, i))
    return frames


def split_to_equal_tau(frames, tau=None):
    """Replace a frame of duration ``k*tau`` by ``k`` copies of duration ``tau``.

    ``tau`` defaults to the shortest duration present.
    """
    if not frames:
        return []
    if tau is None:
        tau = min(f.duration for f in frames)
    out = []
    for f in frames:
        k = f.duration / tau
        kr = round(k)
        if kr < 1 or abs(k - kr) > _DURATION_RTOL * max(1.0, k):
            raise CommensurabilityError(
                f"frame {f.index}: duration {f.duration:g} is not a multiple of {tau:g}"
            )
        out.extend(FrameInterval(f.hamiltonian, tau, 0) for _ in range(kr))
    return [replace(f, index=i) for i, f in enumerate(out, 1)]


def frames_from_matrices(matrices, tau):
    """Equal-duration frames from a list of Hamiltonian matrices."""
    return [FrameInterval(np.asarray(h, dtype=complex), tau, i) for i, h in enumerate(matrices, 1)]


def pauli_vector_hamiltonian(vector):
    """``v . sigma`` for a real 3-vector (two-level only)."""
    return sum(c * p for c, p in zip(vector, PAULIS))
