"""The four confining 1-D potential families and their derived coefficients.

Units are hbar = 2m = 1 throughout, so the eigenproblem is
``-psi'' + V(x) psi = E psi``.

Each family is a frozen record of its defining parameters; the coefficient
combinations the rest of the pipeline needs are exposed as properties, and
parameter ranges are validated at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Circular",
    "Hyperbolic",
    "PotentialFamily",
    "RadialSextic",
    "Sextic",
    "family_kind",
]


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Sextic:
    """Even sextic oscillator V(x) = alpha x^2 + beta x^4 + gamma x^6 on the line."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        _check_finite(alpha=self.alpha, beta=self.beta, gamma=self.gamma)
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def a(self) -> float:
        """Leading gauge coefficient, gamma = a**2 with a > 0."""
        return math.sqrt(self.gamma)

    @property
    def b(self) -> float:
        """Subleading gauge coefficient, beta = 2 a b."""
        return self.beta / (2.0 * self.a)

    @property
    def condition_value(self) -> float:
        """(1/sqrt(gamma)) * (beta^2/(4 gamma) - alpha); solvable iff = 3 + 2n."""
        return (self.b * self.b - self.alpha) / self.a

    @property
    def qes_n(self) -> float:
        """The (possibly non-integer) n implied by the closed-form condition."""
        return (self.condition_value - 3.0) / 2.0

    def potential(self, x):
        x2 = x * x
        return x2 * (self.alpha + x2 * (self.beta + x2 * self.gamma))


@dataclass(frozen=True)
class RadialSextic:
    """Sextic oscillator with a centrifugal barrier on the half line x > 0.

    V(x) = g/x^2 + c2 x^2 + 2ab x^4 + a^2 x^6 with g = 4(S-1/4)(S-3/4) and
    c2 = b^2 - 4a(S + 1/2 + M). The barrier strength requires 4S > 3.
    """

    S: float
    a: float
    b: float
    M: int

    def __post_init__(self):
        _check_finite(S=self.S, a=self.a, b=self.b)
        if not 4.0 * self.S > 3.0:
            raise ValueError("RadialSextic requires 4S > 3")
        if not self.a > 0:
            raise ValueError("RadialSextic requires a > 0")
        if self.M < 0 or self.M != int(self.M):
            raise ValueError("M must be a nonnegative integer")

    @property
    def g(self) -> float:
        return 4.0 * (self.S - 0.25) * (self.S - 0.75)

    @property
    def c2(self) -> float:
        return self.b * self.b - 4.0 * self.a * (self.S + 0.5 + self.M)

    @property
    def mu(self) -> float:
        """Indicial exponent at the origin, psi ~ x^mu with mu = 2S - 1/2."""
        return 2.0 * self.S - 0.5

    def potential(self, x):
        x2 = x * x
        return self.g / x2 + x2 * (self.c2 + x2 * (2.0 * self.a * self.b + x2 * self.a**2))


@dataclass(frozen=True)
class Circular:
    """Trigonometric double-wall family on (0, pi/2).

    V(x) = A/sin^2 x + B/cos^2 x + C sin^2 x - D sin^4 x with
    A = 4(S1-1/4)(S1-3/4), B = 4(S2-1/4)(S2-3/4), C = q1^2 + 4q1(S1+S2+M),
    D = q1^2. The signs of the C and D terms are fixed by requiring a
    normalizable polynomial sector: with them, the gauge factor
    exp(-q1 sin^2 x / 2) truncates the series sector at degree M and the
    residue ledger closes.
    """

    S1: float
    S2: float
    q1: float
    M: int

    def __post_init__(self):
        _check_finite(S1=self.S1, S2=self.S2, q1=self.q1)
        if not (2.0 * self.S1 > 1.0 and 2.0 * self.S2 > 1.0):
            raise ValueError("Circular requires 2*S1 > 1 and 2*S2 > 1")
        if self.q1 == 0:
            raise ValueError("Circular requires q1 != 0 (the sin^4 coupling)")
        if self.M < 0 or self.M != int(self.M):
            raise ValueError("M must be a nonnegative integer")

    @property
    def A(self) -> float:
        return 4.0 * (self.S1 - 0.25) * (self.S1 - 0.75)

    @property
    def B(self) -> float:
        return 4.0 * (self.S2 - 0.25) * (self.S2 - 0.75)

    @property
    def C(self) -> float:
        return self.q1**2 + 4.0 * self.q1 * (self.S1 + self.S2 + self.M)

    @property
    def D(self) -> float:
        return self.q1**2

    def potential(self, x):
        s2 = np.sin(x) ** 2
        c2 = np.cos(x) ** 2
        return self.A / s2 + self.B / c2 + self.C * s2 - self.D * s2 * s2


@dataclass(frozen=True)
class Hyperbolic:
    """Hyperbolic confining family on the half line x > 0.

    V(x) = -A/cosh^2 x + B/sinh^2 x - C cosh^2 x + D cosh^4 x with the same
    A, B, C, D combinations as the trigonometric family. Normalizability of
    the gauge factor exp(-q1 cosh^2 x / 2) requires q1 > 0.
    """

    S1: float
    S2: float
    q1: float
    M: int

    def __post_init__(self):
        _check_finite(S1=self.S1, S2=self.S2, q1=self.q1)
        if not (2.0 * self.S1 > 1.0 and 2.0 * self.S2 > 1.0):
            raise ValueError("Hyperbolic requires 2*S1 > 1 and 2*S2 > 1")
        if not self.q1 > 0:
            raise ValueError("Hyperbolic requires q1 > 0")
        if self.M < 0 or self.M != int(self.M):
            raise ValueError("M must be a nonnegative integer")

    @property
    def A(self) -> float:
        return 4.0 * (self.S1 - 0.25) * (self.S1 - 0.75)

    @property
    def B(self) -> float:
        return 4.0 * (self.S2 - 0.25) * (self.S2 - 0.75)

    @property
    def C(self) -> float:
        return self.q1**2 + 4.0 * self.q1 * (self.S1 + self.S2 + self.M)

    @property
    def D(self) -> float:
        return self.q1**2

    def potential(self, x):
        ch2 = np.cosh(x) ** 2
        sh2 = np.sinh(x) ** 2
        return -self.A / ch2 + self.B / sh2 - self.C * ch2 + self.D * ch2 * ch2


PotentialFamily = Union[Sextic, RadialSextic, Circular, Hyperbolic]

_KINDS = {
    Sextic: "sextic",
    RadialSextic: "radial_sextic",
    Circular: "circular",
    Hyperbolic: "hyperbolic",
}


def family_kind(family: PotentialFamily) -> str:
    """Stable lowercase name for a family instance."""
    try:
        return _KINDS[type(family)]
    except KeyError:
        raise TypeError(f"not a potential family: {family!r}") from None
