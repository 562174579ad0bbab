"""Zeeman sublevel structure and relative dipole strengths."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, sqrt

import numpy as np


def _fact(x):
    n = int(round(x))
    if abs(n - x) > 1e-9 or n < 0:
        raise ValueError(f"factorial of non-natural number {x}")
    return factorial(n)


def clebsch_gordan(j1, m1, j2, m2, j, m):
    """<j1 m1; j2 m2 | j m> by the Racah formula (Condon-Shortley phases)."""
    if abs(m1 + m2 - m) > 1e-9:
        return 0.0
    if not (abs(j1 - j2) - 1e-9 <= j <= j1 + j2 + 1e-9):
        return 0.0
    if abs(m1) > j1 + 1e-9 or abs(m2) > j2 + 1e-9 or abs(m) > j + 1e-9:
        return 0.0
    pre = sqrt(
        (2 * j + 1)
        * _fact(j + j1 - j2) * _fact(j - j1 + j2) * _fact(j1 + j2 - j)
        / _fact(j1 + j2 + j + 1)
    )
    pre *= sqrt(
        _fact(j + m) * _fact(j - m) * _fact(j1 - m1) * _fact(j1 + m1)
        * _fact(j2 - m2) * _fact(j2 + m2)
    )
    total = 0.0
    kmin = int(round(max(0, j2 - j - m1, j1 + m2 - j)))
    kmax = int(round(min(j1 + j2 - j, j1 - m1, j2 + m2)))
    for k in range(kmin, kmax + 1):
        total += (-1) ** k / (
            _fact(k) * _fact(j1 + j2 - j - k) * _fact(j1 - m1 - k)
            * _fact(j2 + m2 - k) * _fact(j - j2 + m1 + k) * _fact(j - j1 - m2 + k)
        )
    return pre * total


def dipole_weight_table(f_g, f_e):
    """Squared CG coefficients <F_g n; 1 q | F_e m>^2, scaled so the largest is 1.

    Keys are ``(m_excited, n_ground)``.
    """
    table = {}
    for n in np.arange(-f_g, f_g + 1):
        for q in (-1, 0, 1):
            m = n + q
            if abs(m) <= f_e:
                table[(int(m), int(n))] = clebsch_gordan(f_g, n, 1, q, f_e, m) ** 2
    top = max(table.values())
    return {k: v / top for k, v in table.items()}


@dataclass(frozen=True)
class SubSystem:
    """One Lambda sub-system |g, n> -- |e, m> -- |s> of the Zeeman manifold."""

    ground_m: int
    excited_m: int
    weight: float
    population: float
    control_scale: float = 1.0


@dataclass(frozen=True)
class ZeemanScheme:
    f_g: int = 2
    f_e: int = 3
    populations: tuple = None
    dipole_weights: dict = field(default=None, compare=False)

    def __post_init__(self):
        n = 2 * self.f_g + 1
        pops = self.populations
        if pops is None:
            pops = tuple([1.0 / n] * n)
        pops = tuple(float(p) for p in pops)
        if len(pops) != n:
            raise ValueError(f"need {n} ground populations, got {len(pops)}")
        if min(pops) < 0 or abs(sum(pops) - 1) > 1e-12:
            raise ValueError("populations must be nonnegative and sum to 1")
        object.__setattr__(self, "populations", pops)
        if self.dipole_weights is None:
            object.__setattr__(self, "dipole_weights", dipole_weight_table(self.f_g, self.f_e))
        for (m, g), w in self.dipole_weights.items():
            if abs(m - g) > 1 and w != 0:
                raise ValueError(f"dipole weight for |m-n|>1 transition ({m}, {g})")

    def population(self, n):
        return self.populations[n + self.f_g]

    def weight(self, m, n):
        return self.dipole_weights.get((m, n), 0.0)

    def ground_levels(self):
        return range(-self.f_g, self.f_g + 1)

    def subsystems(self, q):
        """Sub-systems driven by a probe of polarization q (+1: sigma+, -1: sigma-)."""
        return [
            SubSystem(n, n + q, self.weight(n + q, n), self.population(n))
            for n in self.ground_levels()
            if abs(n + q) <= self.f_e
        ]

    def cycling_pair(self):
        """The stretched (-F_e, -F_g) transition that hosts the dissipative channel."""
        n = -self.f_g
        return SubSystem(n, -self.f_e, self.weight(-self.f_e, n), self.population(n))

    def coupling_total(self, q):
        return sum(s.population * s.weight for s in self.subsystems(q))
