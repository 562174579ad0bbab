"""Six-basis polarization tomography: simulated counts and state reconstruction."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .core import check_density_matrix
from .qubit import BASIS_VECTORS, PAULI

BASES = ("H", "V", "D", "A", "R", "L")
_PROJECTORS = {b: np.outer(v, v.conj()) for b, v in BASIS_VECTORS.items()}


@dataclass(frozen=True)
class MeasurementRecord:
    basis: str
    counts: int
    shots: int

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.shots <= 0:
            raise ValueError("shots must be positive")
        if not 0 <= self.counts <= self.shots:
            raise ValueError("counts must lie in [0, shots]")

    @property
    def frequency(self):
        return self.counts / self.shots


def simulate_counts(rho, shots, seed) -> list[MeasurementRecord]:
    """Binomial counts in each of the six bases from a seeded generator."""
    rho = check_density_matrix(rho)
    if rho.shape != (2, 2):
        raise ValueError("tomography expects a qubit density matrix")
    shots = int(shots)
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    out = []
    for b in BASES:
        p = float(np.clip(np.vdot(BASIS_VECTORS[b], rho @ BASIS_VECTORS[b]).real, 0.0, 1.0))
        out.append(MeasurementRecord(b, int(rng.binomial(shots, p)), shots))
    return out


def _by_basis(records):
    table = {r.basis: r for r in records}
    missing = [b for b in BASES if b not in table]
    if missing:
        raise ValueError(f"missing bases: {', '.join(missing)}")
    if len(table) != len(records):
        raise ValueError("duplicate basis in records")
    return [table[b] for b in BASES]


@dataclass(frozen=True)
class LinearEstimate:
    rho: np.ndarray
    physical: bool


def linear_inversion(records) -> LinearEstimate:
    r = {x.basis: x.frequency for x in _by_basis(records)}
    stokes = (r["D"] - r["A"], r["R"] - r["L"], r["H"] - r["V"])
    rho = 0.5 * (np.eye(2, dtype=complex) + sum(s * p for s, p in zip(stokes, PAULI)))
    return LinearEstimate(rho, bool(np.linalg.eigvalsh(rho)[0] >= -1e-12))


def project_to_physical(rho) -> np.ndarray:
    """Nearest density matrix in Frobenius norm (eigenvalue simplex projection)."""
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.nonzero(u - css / np.arange(1, len(u) + 1) > 0)[0][-1]
    w = np.maximum(w - css[k] / (k + 1), 0.0)
    return (v * w) @ v.conj().T


def log_likelihood(rho, records) -> float:
    recs = _by_basis(records)
    total = 0.0
    for r in recs:
        p = float(np.clip(np.trace(_PROJECTORS[r.basis] @ rho).real, 0.0, 1.0))
        total += xlogy(r.counts, p) + xlogy(r.shots - r.counts, 1.0 - p)
    return float(total)


@dataclass(frozen=True)
class ReconstructionResult:
    rho_hat: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    history: tuple = ()


_J = np.array([[0, 1], [1, 0]])


def _params_to_t(x):
    return np.array([[x[0], 0], [x[2] + 1j * x[3], x[1]]], dtype=complex)


def _rho_to_params(rho):
    # rho = T^dag T with T lower triangular
    c = np.linalg.cholesky(_J @ rho @ _J)
    t = _J @ c.conj().T @ _J
    return np.array([t[0, 0].real, t[1, 1].real, t[1, 0].real, t[1, 0].imag])


def _rho_from_params(x):
    t = _params_to_t(x)
    a = t.conj().T @ t
    return a / np.trace(a).real


class _Objective:
    """Per-shot mean log-likelihood and its gradient in the Cholesky parameters."""

    def __init__(self, records):
        recs = _by_basis(records)
        self.total = float(sum(r.shots for r in recs))
        self.proj = np.array([_PROJECTORS[r.basis] for r in recs])
        self.c = np.array([r.counts for r in recs], dtype=float) / self.total
        self.nc = np.array([r.shots - r.counts for r in recs], dtype=float) / self.total

    def probs(self, rho):
        return np.clip(np.einsum("kij,ji->k", self.proj, rho).real, 0.0, 1.0)

    def value(self, x):
        p = self.probs(_rho_from_params(x))
        return float(np.sum(xlogy(self.c, p) + xlogy(self.nc, 1.0 - p)))

    def grad(self, x):
        t = _params_to_t(x)
        a = t.conj().T @ t
        tr = np.trace(a).real
        rho = a / tr
        p = self.probs(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            g1 = np.where(self.c > 0, self.c / p, 0.0)
            g2 = np.where(self.nc > 0, self.nc / (1.0 - p), 0.0)
        g = np.einsum("k,kij->ij", g1 - g2, self.proj)
        g = g - np.trace(g @ rho).real * np.eye(2)
        m = g @ t.conj().T / tr
        # d/dRe T_ij = 2 Re M_ji, d/dIm T_ij = -2 Im M_ji
        return np.array([2 * m[0, 0].real, 2 * m[1, 1].real, 2 * m[0, 1].real, -2 * m[0, 1].imag])


def mle_reconstruct(records, tol=1e-10, max_iter=10_000) -> ReconstructionResult:
    """Maximum-likelihood qubit state from six-basis counts.

    BFGS ascent on rho = T^dag T / Tr(T^dag T) with Armijo backtracking,
    started from the projected linear-inversion estimate.
    Convergence means the gradient norm of the per-shot mean log-likelihood
    dropped below ``tol``; otherwise ``converged`` is False.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    obj = _Objective(records)
    start = project_to_physical(linear_inversion(records).rho)
    start = (1 - 1e-3) * start + 1e-3 * np.eye(2) / 2
    x = _rho_to_params(start)
    f = obj.value(x)
    g = obj.grad(x)
    hinv = np.eye(4)
    history = [f]
    it = 0
    converged = bool(np.linalg.norm(g) < tol)
    while not converged and it < max_iter:
        d = hinv @ g
        slope = g @ d
        if slope <= 0:
            hinv = np.eye(4)
            d, slope = g, g @ g
        step = 1.0
        for _ in range(60):
            x_new = x + step * d
            f_new = obj.value(x_new)
            if f_new >= f + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            break
        g_new = obj.grad(x_new)
        s, y = x_new - x, g_new - g
        sy = -(s @ y)  # ascent: curvature of -f
        if sy > 1e-300:
            rho_k = 1.0 / sy
            i4 = np.eye(4)
            hinv = (i4 + rho_k * np.outer(s, y)) @ hinv @ (i4 + rho_k * np.outer(y, s)) + rho_k * np.outer(s, s)
        # keep T well scaled; rho is invariant under T -> c T
        scale = np.linalg.norm(x_new)
        x, f, g = x_new / scale, f_new, g_new * scale
        if scale != 1.0:
            hinv = hinv / scale**2
        history.append(f)
        it += 1
        converged = bool(np.linalg.norm(g) < tol)
    rho = _rho_from_params(x)
    rho = 0.5 * (rho + rho.conj().T)
    return ReconstructionResult(rho, log_likelihood(rho, records), it, converged, tuple(history))


def records_to_json(records) -> str:
    return json.dumps([{"basis": r.basis, "counts": r.counts, "shots": r.shots} for r in records])


def records_from_json(text) -> list[MeasurementRecord]:
    return [MeasurementRecord(str(d["basis"]), int(d["counts"]), int(d["shots"])) for d in json.loads(text)]


def rho_to_json_obj(rho):
    rho = np.asarray(rho)
    return {"re": rho.real.tolist(), "im": rho.imag.tolist()}
