"""Dense complex linear algebra for small spin systems.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``. Role checks
(Hermitian, unitary) are explicit functions rather than wrapper types.
Two-level systems get closed-form exponentials and eigensystems; larger
dimensions fall back to ``eigh`` and a complex Schur decomposition, which is
diagonal for normal matrices.

Hermiticity and unitarity tolerances are relative to the matrix scale, so a
Hamiltonian expressed in rad/s at MHz scale is judged like one of order one.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import BranchCutError, DimensionError, RoleViolationError, StateNormError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
BRANCH_GUARD = 1e-6

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


@dataclass(frozen=True)
class SpinBasis:
    """Spin operators ``S_x, S_y, S_z`` for a ``dim``-level system."""

    dim: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def ops(self):
        return (self.x, self.y, self.z)

    def __iter__(self):
        return iter(self.ops)

    def along(self, vector):
        """Return ``n . S`` for a real 3-vector ``n``."""
        nx, ny, nz = vector
        return nx * self.x + ny * self.y + nz * self.z


def spin_operators(dim=2):
    """Spin-J matrices with J = (dim - 1) / 2 in the S_z eigenbasis."""
    if int(dim) != dim or dim < 2:
        raise DimensionError(f"dimension must be an integer >= 2, got {dim}")
    dim = int(dim)
    j = (dim - 1) / 2
    m = j - np.arange(dim)
    # <m+1|S+|m> on the superdiagonal
    raise_ = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    sx = (raise_ + raise_.conj().T) / 2
    sy = (raise_ - raise_.conj().T) / 2j
    sz = np.diag(m).astype(complex)
    for op in (sx, sy, sz):
        op.setflags(write=False)
    return SpinBasis(dim, sx, sy, sz)


def _scale(a):
    return max(1.0, float(np.max(np.abs(a))))


def _square(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
        raise DimensionError(f"expected a square matrix of size >= 2, got shape {a.shape}")
    return a


def hermiticity_error(a):
    """Largest entry of ``|A - A^dagger|`` relative to the matrix scale."""
    a = _square(a)
    return float(np.max(np.abs(a - a.conj().T))) / _scale(a)


def unitarity_error(u):
    u = _square(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_hermitian(a, tol=HERMITIAN_TOL):
    a = _square(a)
    err = hermiticity_error(a)
    if err > tol:
        raise RoleViolationError(f"matrix is not Hermitian (relative error {err:.2e})")
    return a


def check_unitary(u, tol=UNITARY_TOL):
    u = _square(u)
    err = unitarity_error(u)
    if err > tol:
        raise RoleViolationError(f"matrix is not unitary (error {err:.2e})")
    return u


def is_hermitian(a, tol=HERMITIAN_TOL):
    return hermiticity_error(a) <= tol


def is_unitary(u, tol=UNITARY_TOL):
    return unitarity_error(u) <= tol


def pauli_components(a):
    """Return ``(a0, [ax, ay, az])`` with ``A = a0 I + a . sigma`` for 2x2 ``A``."""
    a0 = (a[0, 0] + a[1, 1]) / 2
    vec = np.array([
        (a[0, 1] + a[1, 0]) / 2,
        (a[1, 0] - a[0, 1]) / 2j,
        (a[0, 0] - a[1, 1]) / 2,
    ])
    return a0, vec


def mat_exp_hermitian(h, phase_scale=1.0):
    """Return ``exp(-i * phase_scale * H)`` for Hermitian ``H``.

    ``phase_scale`` carries the time (and the 2*pi when ``H`` is in Hz).
    """
    h = check_hermitian(h)
    if h.shape[0] == 2:
        a0, vec = pauli_components(h)
        vec = vec.real * phase_scale
        r = float(np.sqrt(vec @ vec))
        # sin(r)/r -> 1 as r -> 0
        sinc = np.sinc(r / np.pi)
        out = np.cos(r) * np.eye(2, dtype=complex) - 1j * sinc * (
            vec[0] * PAULI_X + vec[1] * PAULI_Y + vec[2] * PAULI_Z
        )
        return np.exp(-1j * phase_scale * a0.real) * out
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(-1j * phase_scale * w)) @ v.conj().T


def _su2_parameters(u):
    """Split a 2x2 unitary as ``e^{i phi} (cos th I - i sin th n . sigma)``.

    Returns ``(phi, s)`` where ``s = sin(th) n`` and ``c = cos(th)``; the
    components are read off directly so small rotations keep full
    absolute precision.
    """
    phi = np.angle(u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]) / 2
    v = u * np.exp(-1j * phi)
    c = ((v[0, 0] + v[1, 1]) / 2).real
    s = np.array([
        -((v[0, 1] + v[1, 0]) / 2).imag,
        ((v[1, 0] - v[0, 1]) / 2).real,
        -((v[0, 0] - v[1, 1]) / 2).imag,
    ])
    return phi, c, s


def _spinor_basis(n):
    """Unitary whose columns are the +1 and -1 eigenvectors of ``n . sigma``."""
    polar = np.arccos(np.clip(n[2], -1.0, 1.0))
    azimuth = np.arctan2(n[1], n[0])
    c, s = np.cos(polar / 2), np.sin(polar / 2)
    e = np.exp(1j * azimuth)
    return np.array([[c, -s / e], [s * e, c]], dtype=complex)


def diagonalize_unitary(u):
    """Eigendecomposition ``U = P diag(d) P^dagger`` with unitary ``P``.

    Returns ``(P, d)`` where ``d`` is the vector of unit-modulus eigenvalues.
    """
    u = check_unitary(u)
    if u.shape[0] == 2:
        phi, c, s = _su2_parameters(u)
        sn = float(np.sqrt(s @ s))
        th = np.arctan2(sn, c)
        n = s / sn if sn > 0 else np.array([0.0, 0.0, 1.0])
        p = _spinor_basis(n)
        d = np.exp(1j * (phi + np.array([-th, th])))
        return p, d
    t, z = scipy.linalg.schur(u, output="complex")
    return z, np.diag(t).copy()


def _wrap(phase):
    """Map phases into [-pi, pi); values already inside are returned unchanged."""
    phase = np.asarray(phase, dtype=float)
    # shifting by pi and back would round small phases to ~1e-16 absolute
    inside = (phase >= -np.pi) & (phase < np.pi)
    return np.where(inside, phase, (phase + np.pi) % (2 * np.pi) - np.pi)


def eigenphases(u):
    return _wrap(np.angle(diagonalize_unitary(u)[1]))


def principal_log_unitary(u, guard=BRANCH_GUARD):
    """Hermitian generator ``Omega`` with ``exp(-i Omega) = U``.

    ``Omega = i P log(D) P^dagger`` using principal eigenphases. Raises
    :class:`BranchCutError` if an eigenphase is within ``guard`` of +-pi.
    """
    p, d = diagonalize_unitary(u)
    if p.shape[0] == 2:
        # Recompute phases from the SU(2) split so small angles stay exact.
        phi, c, s = _su2_parameters(u)
        th = np.arctan2(float(np.sqrt(s @ s)), c)
        phases = _wrap(phi + np.array([-th, th]))
    else:
        phases = np.angle(d)
    worst = float(np.max(np.abs(phases)))
    if worst > np.pi - guard:
        raise BranchCutError(
            f"eigenphase {worst:.9f} rad is within {guard:g} of the branch cut; "
            "reduce the perturbation amplitude or the duration"
        )
    omega = -(p * phases) @ p.conj().T
    return (omega + omega.conj().T) / 2


def spectral_norm(a):
    a = np.asarray(a, dtype=complex)
    if not a.any():
        return 0.0
    return float(np.linalg.norm(a, 2))


def hs_inner(a, b):
    """Hilbert-Schmidt pairing ``Tr(A^dagger B)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def check_state(psi, tol=1e-12):
    psi = np.asarray(psi, dtype=complex).ravel()
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > tol:
        raise StateNormError(f"state is not normalized (|psi| = {norm:.15g})")
    return psi


def state_fidelity(psi, ua, ub):
    """``|<psi| Ua^dagger Ub |psi>|^2``."""
    psi = check_state(psi)
    ua = np.asarray(ua, dtype=complex)
    ub = np.asarray(ub, dtype=complex)
    if ua.shape != ub.shape or ua.shape[0] != psi.size:
        raise DimensionError("state and operators have mismatched dimensions")
    amp = np.vdot(ua @ psi, ub @ psi)
    return float(min(1.0, abs(amp) ** 2))


def commutator(a, b):
    return a @ b - b @ a


def plus_state(axis="x", dim=2):
    """+1/2-projection eigenstate of ``S_axis`` (largest eigenvalue)."""
    basis = spin_operators(dim)
    op = {"x": basis.x, "y": basis.y, "z": basis.z}[axis]
    w, v = np.linalg.eigh(op)
    psi = v[:, -1]
    # fix the global phase so the first nonzero component is real positive
    k = int(np.flatnonzero(np.abs(psi) > 1e-12)[0])
    return psi * np.exp(-1j * np.angle(psi[k]))
