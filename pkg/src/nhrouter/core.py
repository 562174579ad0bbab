"""Small open-quantum-system algebra.

Density matrices are column-stacked into vectors (``vec``), so that
``vec(A X B) = (B.T kron A) vec(X)``. A Hamiltonian may be non-Hermitian;
its anti-Hermitian part then removes norm from the state.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import NoSteadyState, NonUniqueSteadyState, SolverError

MAX_DIM = 16
TRACE_TOL = 1e-12
RESIDUAL_TOL = 1e-10


def as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    if not 2 <= a.shape[0] <= MAX_DIM:
        raise ValueError(f"operator dimension must be in [2, {MAX_DIM}], got {a.shape[0]}")
    return a


def hermitian(a) -> bool:
    """Exact Hermiticity test (no tolerance)."""
    a = np.asarray(a)
    return bool(np.array_equal(a, a.conj().T))


def dag(a):
    return np.conjugate(np.transpose(a))


def vec(rho):
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v, dim=None):
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def ket(dim, i):
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def projector(dim, i):
    p = np.zeros((dim, dim), dtype=complex)
    p[i, i] = 1.0
    return p


def transition(dim, i, j):
    """|i><j|"""
    op = np.zeros((dim, dim), dtype=complex)
    op[i, j] = 1.0
    return op


def trace_row(dim):
    """Row vector t with t @ vec(rho) == Tr(rho)."""
    return vec(np.eye(dim))


def check_density_matrix(rho, *, trace_tol=1e-10, herm_tol=1e-12, eig_tol=-1e-8):
    """Raise ``ValueError`` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise ValueError(f"trace {np.trace(rho)} differs from 1")
    if np.max(np.abs(rho - dag(rho))) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    lo = np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0]
    if lo < eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo}")
    return rho


def is_density_matrix(rho, **kw) -> bool:
    try:
        check_density_matrix(rho, **kw)
    except ValueError:
        return False
    return True


def eigenvalues(h) -> np.ndarray:
    """Eigenvalues sorted by real part, then imaginary part."""
    h = as_operator(h)
    w = np.linalg.eigvals(h)
    order = np.lexsort((w.imag, w.real))
    return w[order]


@dataclass(frozen=True, eq=False)
class LindbladTerm:
    jump: np.ndarray
    rate: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"Lindblad rate must be nonnegative, got {self.rate}")
        object.__setattr__(self, "jump", as_operator(self.jump))


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Matrix of the map rho -> drho/dt acting on vec(rho)."""

    matrix: np.ndarray
    dim: int
    trace_preserving: bool = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"Liouvillian shape {m.shape} inconsistent with dim {self.dim}")
        object.__setattr__(self, "matrix", m)
        leak = trace_row(self.dim) @ m
        object.__setattr__(self, "trace_preserving", bool(np.max(np.abs(leak)) < TRACE_TOL))

    def __add__(self, other):
        if not isinstance(other, Liouvillian) or other.dim != self.dim:
            return NotImplemented
        return Liouvillian(self.matrix + other.matrix, self.dim)

    def apply(self, rho):
        return unvec(self.matrix @ vec(rho), self.dim)


def spre(a):
    """Superoperator of rho -> a rho."""
    return np.kron(np.eye(a.shape[0]), a)


def spost(a):
    """Superoperator of rho -> rho a."""
    return np.kron(a.T, np.eye(a.shape[0]))


def hamiltonian_superop(h):
    """rho -> -i (H rho - rho H^dagger); non-Hermitian H gives a trace-decreasing map."""
    return -1j * (spre(h) - spost(dag(h)))


def dissipator(j, rate=1.0):
    jdj = dag(j) @ j
    return rate * (np.kron(j.conj(), j) - 0.5 * spre(jdj) - 0.5 * spost(jdj))


def recycling_superop(h):
    """Feeding term that returns the norm removed by the anti-Hermitian part of ``h``.

    With K = i(H - H^dagger) = sum_k k_k |u_k><u_k|, this adds
    sum_k k_k |u_k><u_k| rho |u_k><u_k|, so the lost population reappears in
    the state it was taken from (a closed cycling transition). Combined with
    the non-Hermitian evolution it equals pure dephasing of those states.
    """
    h = as_operator(h)
    k = 1j * (h - dag(h))
    k = 0.5 * (k + dag(k))
    w, u = np.linalg.eigh(k)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -1e-12 * scale:
        raise ValueError("anti-Hermitian part describes gain; cannot recycle")
    d = h.shape[0]
    out = np.zeros((d * d, d * d), dtype=complex)
    for kk, col in zip(w, u.T):
        if kk > 1e-15 * scale:
            p = np.outer(col, col.conj())
            out += kk * np.kron(p.conj(), p)
    return out


def build_liouvillian(h, terms=(), *, recycle=False) -> Liouvillian:
    """Generator of drho/dt = -i(H rho - rho H^dag) + sum_k rate_k D[J_k] rho.

    ``recycle=True`` adds :func:`recycling_superop`, making a dissipative
    non-Hermitian ``h`` trace preserving.
    """
    h = as_operator(h)
    d = h.shape[0]
    m = hamiltonian_superop(h)
    for term in terms:
        if not isinstance(term, LindbladTerm):
            term = LindbladTerm(*term)
        if term.jump.shape != h.shape:
            raise ValueError(
                f"jump operator shape {term.jump.shape} does not match Hamiltonian {h.shape}"
            )
        if term.rate:
            m = m + dissipator(term.jump, term.rate)
    if recycle and not hermitian(h):
        m = m + recycling_superop(h)
    return Liouvillian(m, d)


def kernel_dimension(lv: Liouvillian, rtol=1e-11) -> int:
    s = np.linalg.svd(lv.matrix, compute_uv=False)
    scale = max(1.0, float(s[0]))
    return int(np.sum(s <= rtol * scale))


def steady_state(lv: Liouvillian) -> np.ndarray:
    """Unit-trace fixed point from the bordered system [L; Tr] x = [0; 1]."""
    d = lv.dim
    kdim = kernel_dimension(lv)
    if kdim > 1:
        raise NonUniqueSteadyState(kdim)
    if kdim == 0:
        raise NoSteadyState("Liouvillian has a trivial kernel; no stationary state exists")
    a = np.vstack([lv.matrix, trace_row(d)[None, :]])
    b = np.zeros(d * d + 1, dtype=complex)
    b[-1] = 1.0
    x = np.linalg.lstsq(a, b, rcond=None)[0]
    rho = unvec(x, d)
    rho = 0.5 * (rho + dag(rho))
    tr = np.trace(rho).real
    if abs(tr) < 1e-12:
        raise NoSteadyState("kernel vector has zero trace")
    rho = rho / tr
    res = np.linalg.norm(lv.matrix @ vec(rho))
    if res >= RESIDUAL_TOL:
        raise NoSteadyState(f"steady-state residual {res:.3e} exceeds {RESIDUAL_TOL:g}")
    return rho


def linear_response(l0: Liouvillian, l1, rho0) -> np.ndarray:
    """First-order steady-state change for L = L0 + eps L1 about the fixed point rho0.

    Solves L0 rho1 = -L1 rho0 with Tr rho1 = 0 (bordered least squares).
    """
    d = l0.dim
    l1 = np.asarray(l1, dtype=complex)
    r0 = vec(rho0)
    if np.linalg.norm(l0.matrix @ r0) > RESIDUAL_TOL:
        raise SolverError("rho0 is not stationary under L0")
    rhs = -(l1 @ r0)
    x = _backend.bordered_solve(l0.matrix, rhs, 0.0)
    res = np.linalg.norm(l0.matrix @ x - rhs)
    if res > RESIDUAL_TOL * max(1.0, np.linalg.norm(rhs)):
        raise SolverError(f"linear-response residual {res:.3e}")
    return unvec(x, d)
