"""Average-Hamiltonian (Magnus) terms for piecewise-constant Hamiltonians.

Frame Hamiltonians are read as angular frequencies: the propagator of frame
``k`` is ``exp(-i H_k tau_k)`` and the generator is ``O_k = -i H_k``. The
order-``m`` term is returned as the Hermitian matrix ``Hbar_m = i Omega_m / t``
in the same units as the frames.

For equal-duration frames, arbitrary orders use the permutation form of the
Magnus series,

    Omega_m = sum_sigma g(sigma) sum_x f(x) O_{x_sigma(1)} ... O_{x_sigma(m)},

with ``x`` running over non-increasing index vectors in ``[1..n]^m``,
``f(x) = tau^m / prod_j k_j!`` over runs of repeated indices, and the
product-form weight ``g(sigma) = (-1)^{d_b} d_a! d_b! / m!`` from the ascent
and descent counts of ``sigma``.

Radius of convergence: ``r_c = 1.086868702`` is the Blanes-Moan upper bound
(S. Blanes, F. Casas, J. A. Oteo, J. Ros, J. Phys. A 31, 259 (1998);
P. C. Moan, Ph.D. thesis, Cambridge (1998)).
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import combinations_with_replacement, groupby, permutations

import numpy as np

from .errors import BudgetError, CommensurabilityError, UsageError
from .linalg import commutator, spectral_norm
from .sequences import split_to_equal_tau, toggling_frames

R_C = 1.086868702
M_MAX = 7
DEFAULT_BUDGET = 2e8
_CHUNK = 1 << 16

CLOSED_FORM = "closed_form"
COMBINATORIAL = "combinatorial"


@dataclass(frozen=True)
class MagnusTerm:
    """One Magnus term ``Hbar_m``; ``residual`` is the discarded anti-Hermitian part."""

    order: int
    matrix: np.ndarray
    norm: float
    t_total: float
    method: str
    residual: float = 0.0

    @property
    def norm_hz(self):
        return self.norm / (2 * np.pi)


def _make_term(order, raw, t_total, method):
    herm = (raw + raw.conj().T) / 2
    residual = float(np.max(np.abs(raw - herm))) if raw.size else 0.0
    return MagnusTerm(order, herm, spectral_norm(herm), t_total, method, residual)


def _check_frames(frames):
    if not frames:
        raise UsageError("frame list is empty")
    dims = {f.hamiltonian.shape for f in frames}
    if len(dims) != 1:
        raise UsageError("frames have mixed dimensions")


def hbar1(frames):
    """Duration-weighted mean of the frame Hamiltonians."""
    _check_frames(frames)
    t = sum(f.duration for f in frames)
    raw = sum(f.hamiltonian * f.duration for f in frames) / t
    return _make_term(1, raw, t, CLOSED_FORM)


def hbar2(frames):
    """Second-order term ``1/(2i t) sum_{j>i} [H_j, H_i] tau_j tau_i``."""
    _check_frames(frames)
    t = sum(f.duration for f in frames)
    acc = np.zeros_like(frames[0].hamiltonian, dtype=complex)
    earlier = np.zeros_like(acc)
    for f in frames:
        acc += commutator(f.hamiltonian, earlier) * f.duration
        earlier = earlier + f.hamiltonian * f.duration
    return _make_term(2, acc / (2j * t), t, CLOSED_FORM)


@dataclass(frozen=True)
class PermutationStat:
    sigma: tuple
    ascents: int
    descents: int
    weight: Fraction


def permutation_weight(m, descents):
    """Product-form weight ``(-1)^{d_b} d_a! d_b! / m!``."""
    ascents = m - 1 - descents
    sign = -1 if descents % 2 else 1
    return Fraction(sign * math.factorial(ascents) * math.factorial(descents), math.factorial(m))


def permutation_stats(m):
    """All permutations of ``1..m`` in lexicographic order with their weights."""
    if m < 1:
        raise UsageError("order must be >= 1")
    out = []
    for sigma in permutations(range(1, m + 1)):
        descents = sum(a > b for a, b in zip(sigma, sigma[1:]))
        ascents = m - 1 - descents
        out.append(PermutationStat(sigma, ascents, descents, permutation_weight(m, descents)))
    return out


@dataclass(frozen=True)
class IndexVector:
    """Non-increasing index vector with its run-length factor ``prod 1/k_j!``.

    ``factor`` omits ``tau^m``, which is common to all vectors of one order.
    """

    x: tuple
    factor: Fraction

    def multiplicity_factor(self, tau):
        return float(self.factor) * tau ** len(self.x)


def run_factor(x):
    out = Fraction(1)
    for _, run in groupby(x):
        out /= math.factorial(len(list(run)))
    return out


def index_vectors(n, m):
    """Non-increasing vectors in ``[1..n]^m`` (reversed lexicographic combinations)."""
    for combo in combinations_with_replacement(range(1, n + 1), m):
        x = combo[::-1]
        yield IndexVector(x, run_factor(x))


def work_estimate(n, m):
    """Matrix products needed by the permutation sum: ``m! C(n+m-1, m)``."""
    return math.factorial(m) * math.comb(n + m - 1, m)


@lru_cache(maxsize=32)
def _index_array(n, m):
    xs = np.array(
        [c[::-1] for c in combinations_with_replacement(range(n), m)], dtype=np.intp
    ).reshape(-1, m)
    # prod_j k_j! as the product of running run lengths; exact in integers
    run = np.ones(len(xs), dtype=np.int64)
    denom = np.ones(len(xs), dtype=np.int64)
    for j in range(1, m):
        run = np.where(xs[:, j] == xs[:, j - 1], run + 1, 1)
        denom *= run
    factors = 1.0 / denom
    xs.setflags(write=False)
    factors.setflags(write=False)
    return xs, factors


def _bmm(a, b):
    """Batched product of (d, d, N) stacks."""
    if a.shape[0] == 2:
        out = np.empty_like(a)
        out[0, 0] = a[0, 0] * b[0, 0] + a[0, 1] * b[1, 0]
        out[0, 1] = a[0, 0] * b[0, 1] + a[0, 1] * b[1, 1]
        out[1, 0] = a[1, 0] * b[0, 0] + a[1, 1] * b[1, 0]
        out[1, 1] = a[1, 0] * b[0, 1] + a[1, 1] * b[1, 1]
        return out
    return np.einsum("ijn,jkn->ikn", a, b)


def _permutation_sum(ops, xs, factors, m, rng=None):
    """``sum_sigma g(sigma) sum_x f(x) O_{x_sigma(1)} ... O_{x_sigma(m)}``.

    Permutations are walked as a prefix tree so partial products are shared
    between permutations with a common prefix; each node multiplies the whole
    batch of index vectors at once. Leaves are accumulated per descent count
    and weighted at the end; the last product of each leaf is fused with the
    weighted sum over the batch.
    """
    d = ops.shape[1]
    stack = np.ascontiguousarray(ops.transpose(1, 2, 0))  # (d, d, n)
    cols = [stack[:, :, xs[:, j]] for j in range(m)]
    weighted = [c * factors for c in cols]
    by_descents = [np.zeros((d, d), dtype=complex) for _ in range(m)]

    def leaf(product, j):
        if product is None:
            return weighted[j].sum(axis=2)
        # sum_x (A_x B_x f_x)[i, k] = sum_l A[i, l, :] . (B f)[l, k, :]
        w = weighted[j]
        return np.array([[sum(np.dot(product[i, l], w[l, k]) for l in range(d))
                          for k in range(d)] for i in range(d)])

    def visit(prefix, product, descents):
        remaining = [j for j in range(m) if j not in prefix]
        if rng is not None:
            rng.shuffle(remaining)
        for j in remaining:
            dsc = descents + (1 if prefix and prefix[-1] > j else 0)
            if len(prefix) + 1 == m:
                by_descents[dsc] += leaf(product, j)
            else:
                nxt = cols[j] if product is None else _bmm(product, cols[j])
                visit(prefix + (j,), nxt, dsc)

    visit((), None, 0)
    out = np.zeros((d, d), dtype=complex)
    for dsc, acc in enumerate(by_descents):
        out += float(permutation_weight(m, dsc)) * acc
    return out


def magnus_term_combinatorial(frames, m, budget=DEFAULT_BUDGET, m_max=M_MAX, rng=None):
    """Order-``m`` average Hamiltonian from the permutation formula.

    ``frames`` must share one duration (see :func:`split_to_equal_tau`).
    ``rng`` shuffles the enumeration order; the result is the same sum.
    """
    _check_frames(frames)
    if int(m) != m or not 1 <= m <= m_max:
        raise UsageError(f"order must be in [1, {m_max}], got {m}")
    m = int(m)
    tau = frames[0].duration
    if any(abs(f.duration - tau) > 1e-12 * tau for f in frames):
        raise CommensurabilityError("combinatorial evaluation needs equal frame durations")
    n = len(frames)
    estimate = work_estimate(n, m)
    if estimate > budget:
        raise BudgetError(estimate, budget)
    ops = np.array([-1j * f.hamiltonian * tau for f in frames])
    xs, factors = _index_array(n, m)
    if rng is not None:
        order = rng.permutation(len(xs))
        xs, factors = xs[order], factors[order]
    omega = np.zeros_like(ops[0])
    for start in range(0, len(xs), _CHUNK):
        sl = slice(start, start + _CHUNK)
        omega += _permutation_sum(ops, xs[sl], factors[sl], m, rng)
    t = n * tau
    return _make_term(m, 1j * omega / t, t, COMBINATORIAL)


def magnus_terms(frames, m, budget=DEFAULT_BUDGET):
    """Terms of orders ``1..m``; closed forms for 1 and 2, combinatorial above."""
    terms = [hbar1(frames)]
    if m >= 2:
        terms.append(hbar2(frames))
    if m >= 3:
        equal = split_to_equal_tau(frames)
        terms.extend(magnus_term_combinatorial(equal, k, budget) for k in range(3, m + 1))
    return terms


def nested_integral_oracle(frames, m, steps):
    """Order-``m`` Magnus integral ``Omega_m`` by nested Riemann sums (m <= 3).

    Every frame is cut into ``steps`` cells and the simplex integrals of the
    standard commutator forms are summed over strictly ordered cells, so the
    error is O(1/steps). Returns ``Omega_m`` itself (anti-Hermitian), not the
    average Hamiltonian.
    """
    _check_frames(frames)
    if m not in (1, 2, 3):
        raise UsageError("the nested-integral oracle is limited to m <= 3")
    if steps < 1:
        raise UsageError("steps must be positive")
    cells = []
    for f in frames:
        x = -1j * f.hamiltonian * (f.duration / steps)
        cells.extend([x] * steps)
    x = np.array(cells)  # (N, d, d), one weighted generator per cell

    def excl_cumsum(a):
        out = np.cumsum(a, axis=0)
        return np.concatenate([np.zeros_like(a[:1]), out[:-1]])

    def excl_rcumsum(a):
        return excl_cumsum(a[::-1])[::-1]

    if m == 1:
        return x.sum(axis=0)
    lo = excl_cumsum(x)  # sum over earlier cells
    if m == 2:
        return 0.5 * (x @ lo - lo @ x).sum(axis=0)
    hi = excl_rcumsum(x)  # sum over later cells
    t123 = (x @ excl_cumsum(x @ lo)).sum(axis=0)
    t321 = (x @ excl_rcumsum(x @ hi)).sum(axis=0)
    t132 = (x @ excl_cumsum(lo @ x)).sum(axis=0)
    t312 = (x @ excl_rcumsum(hi @ x)).sum(axis=0)
    t231 = (x @ lo @ hi).sum(axis=0)
    t213 = (x @ hi @ lo).sum(axis=0)
    return (2 * t123 + 2 * t321 - t132 - t231 - t312 - t213) / 6


@dataclass(frozen=True)
class ConvergenceMargin:
    lhs: float
    bound: float
    converged_guaranteed: bool

    @property
    def delta_t_equivalent(self):
        """``2 * lhs``: equals ``Delta * t`` when every ``|H_i| = Delta / 2``."""
        return 2 * self.lhs


def convergence_margin(frames):
    """Sufficient Magnus convergence test ``sum |H_i| tau_i < r_c / (2 pi)``.

    ``|H_i|`` is converted from the frames' angular units to Hz.
    """
    _check_frames(frames)
    lhs = sum(spectral_norm(f.hamiltonian) / (2 * np.pi) * f.duration for f in frames)
    bound = R_C / (2 * np.pi)
    return ConvergenceMargin(lhs, bound, lhs < bound)


def delta_t_threshold():
    """Largest guaranteed ``Delta * t`` for a two-level sequence, ``r_c / pi``."""
    return R_C / np.pi


@dataclass(frozen=True)
class NormRow:
    t_seconds: float
    order: int
    spectral_norm_hz: float


def norm_scaling_sweep(seq, h0_hz, orders, t_grid, budget=DEFAULT_BUDGET):
    """``|Hbar_m|`` in Hz over sequence durations ``t_grid``.

    Durations are realised by rescaling the base interval at a fixed frame
    count.
    """
    orders = sorted(int(m) for m in orders)
    if orders and not 1 <= orders[0] <= orders[-1] <= M_MAX:
        raise UsageError(f"orders must lie in [1, {M_MAX}]")
    for m in orders:
        if m > 2:
            work = work_estimate(sum(seq.units), m)
            if work > budget:
                raise BudgetError(work, budget)
    rows = []
    for t in t_grid:
        frames = split_to_equal_tau(toggling_frames(seq.with_period(t), 2 * np.pi * h0_hz))
        for m in orders:
            if m == 1:
                term = hbar1(frames)
            else:
                term = magnus_term_combinatorial(frames, m, budget)
            rows.append(NormRow(float(t), m, term.norm_hz))
    return rows


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
