"""Time evolution under (possibly time-dependent) Liouvillians."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .core import Liouvillian, unvec, vec


@dataclass(frozen=True, eq=False)
class TimeDependentLiouvillian:
    """L(t) = static + sum_k f_k(t) * terms[k].

    ``coefficients`` maps a time to the sequence (f_0(t), f_1(t), ...).
    """

    static: Liouvillian
    terms: Sequence[np.ndarray] = ()
    coefficients: Callable[[float], Sequence[complex]] | None = None

    def __post_init__(self):
        n = self.static.dim**2
        stack = np.array([np.asarray(m, dtype=complex) for m in self.terms]).reshape(-1, n, n)
        object.__setattr__(self, "terms", stack)
        if len(stack) and self.coefficients is None:
            raise ValueError("time-dependent terms need a coefficient function")

    @property
    def dim(self):
        return self.static.dim

    def at(self, t) -> Liouvillian:
        m = self.static.matrix.copy()
        if len(self.terms):
            for c, term in zip(self.coefficients(t), self.terms):
                m = m + c * term
        return Liouvillian(m, self.dim)


def evolve(rho0, generator, times, *, rtol=1e-8, atol=1e-14, h0=None, max_steps=5_000_000):
    """States at each entry of ``times`` (``times[0]`` is the initial time).

    Adaptive Dormand-Prince 5(4) with PI step control; each accepted step
    has estimated local error below ``atol + rtol*|y|`` componentwise (RMS).
    Raises :class:`~nhrouter.errors.IntegrationError` on step underflow.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a non-empty 1-D grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if isinstance(generator, Liouvillian):
        generator = TimeDependentLiouvillian(generator)
    d = generator.dim
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (d, d):
        raise ValueError(f"initial state shape {rho0.shape} does not match dimension {d}")
    if times.size == 1:
        return rho0[None].copy()
    if h0 is None:
        scale = np.max(np.abs(generator.at(times[0]).matrix).sum(axis=1))
        h0 = min(0.01 / max(scale, 1e-300), times[-1] - times[0])
    ls = generator.terms if len(generator.terms) else None
    ys, _, _ = _backend.dopri5_linear(
        generator.static.matrix, ls, generator.coefficients, vec(rho0), times,
        rtol, atol, h0, max_steps,
    )
    return np.array([unvec(y, d) for y in ys])
