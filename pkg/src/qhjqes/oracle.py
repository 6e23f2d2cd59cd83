"""Independent numerical ground truth for the eigenproblem -psi'' + V psi = E psi.

Second-order central finite differences on a uniform grid with Dirichlet
walls. Eigenvalues of the symmetric tridiagonal operator come from bisection
(LAPACK stebz via scipy), which is deterministic. ``refine`` doubles the
grid until the requested eigenvalues stop moving and then enlarges the
domain once to bound the truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .families import family_kind

__all__ = [
    "DEFAULT_DOMAINS",
    "Grid",
    "OracleConvergenceError",
    "OracleSpectrum",
    "discretize",
    "low_spectrum",
    "refine",
]

DEFAULT_DOMAINS = {
    "sextic": (-6.0, 6.0),
    "radial_sextic": (1e-3, 6.0),
    "circular": (1e-3, math.pi / 2 - 1e-3),
    # cosh^4 x reaches ~2e9 already at x = 6; pushing the wall further would
    # swamp the eigenvalues in the matrix norm (bisection resolves eigenvalues
    # only to machine-eps times the Gershgorin radius), while the gauge factor
    # exp(-q1 cosh^2 x / 2) is dead long before x = 4.
    "hyperbolic": (1e-3, 4.0),
}

_N_MAX = 2**16


class OracleConvergenceError(RuntimeError):
    """Grid refinement hit its ceiling; carries the best spectrum found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class Grid:
    """Uniform interior grid with Dirichlet (psi = 0) walls at both ends."""

    x_min: float
    x_max: float
    n_interior: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_interior < 100:
            raise ValueError("need at least 100 interior points")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_interior + 1)

    def points(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(1, self.n_interior + 1)


def _potential_of(family_or_callable):
    if hasattr(family_or_callable, "potential"):
        return family_or_callable.potential
    return family_or_callable


def discretize(family, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal 2/h^2 + V(x_i) and off-diagonal -1/h^2 of the discrete operator."""
    pot = _potential_of(family)
    x = grid.points()
    v = np.asarray(pot(x), dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("potential is not finite on a grid node")
    inv_h2 = 1.0 / grid.h**2
    diag = 2.0 * inv_h2 + v
    off = -inv_h2 * np.ones(grid.n_interior - 1)
    return diag, off


def low_spectrum(diag: np.ndarray, off: np.ndarray, k: int) -> np.ndarray:
    """The k smallest eigenvalues, ascending, via Sturm-sequence bisection."""
    n = len(diag)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    return eigh_tridiagonal(
        diag, off, eigvals_only=True, select="i", select_range=(0, k - 1),
        lapack_driver="stebz",
    )


@dataclass(frozen=True)
class OracleSpectrum:
    """Converged low eigenvalues with per-energy error estimates."""

    energies: tuple[float, ...]
    error_estimates: tuple[float, ...]
    grid: Grid

    def __post_init__(self):
        e = self.energies
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("oracle energies must be strictly increasing")
        if any(not err > 0 for err in self.error_estimates):
            raise ValueError("error estimates must be positive")


def _converge_grid(pot, domain, k, tol, n_start, n_max):
    prev = None
    n = n_start
    best = None
    while n <= n_max:
        grid = Grid(domain[0], domain[1], n)
        energies = low_spectrum(*discretize(pot, grid), k)
        if prev is not None:
            delta = float(np.max(np.abs(energies - prev)))
            best = (energies, delta, grid)
            if delta < tol:
                return best
        prev = energies
        n *= 2
    raise OracleConvergenceError(
        f"no grid convergence below {tol:g} with up to {n_max} points", best=best
    )


def _grow_domain(kind: str, domain: tuple[float, float]) -> tuple[float, float]:
    """Enlarged domain for the truncation check.

    Families with a singular wall also halve the wall offset: the Dirichlet
    error there scales like a low power of the offset when the local
    exponent is small, and only moving the wall exposes it.
    """
    lo, hi = domain
    if kind == "sextic":
        half = (hi - lo) / 2.0
        mid = (hi + lo) / 2.0
        return (mid - 2 * half, mid + 2 * half)
    if kind == "circular":
        # The physical interval is fixed; shrink the wall offsets instead.
        eps_lo = lo
        eps_hi = math.pi / 2 - hi
        return (eps_lo / 2.0, math.pi / 2 - eps_hi / 2.0)
    if kind == "hyperbolic":
        # Additive outer growth: another unit of x multiplies the tail bound
        # enormously while keeping cosh^4 within floating-point reach.
        return (lo / 2.0, hi + 1.0)
    return (lo / 2.0, 2.0 * hi)


def refine(
    family,
    k: int,
    tol: float = 1e-6,
    domain: tuple[float, float] | None = None,
    n_start: int = 1024,
    n_max: int = _N_MAX,
) -> OracleSpectrum:
    """Certified low spectrum: grid-doubled to ``tol`` plus domain checks.

    The per-eigenvalue error estimate combines the last grid change with the
    observed shift under an enlarged domain. If that shift is itself above
    tolerance (a slowly converging singular wall), one more growth step
    measures the convergence order and the estimate becomes the Richardson
    remainder; only a gross shift (percent scale) raises.
    """
    if tol < 1e-8:
        raise ValueError("tol below 1e-8 is not certifiable with this discretization")
    kind = family_kind(family) if hasattr(family, "potential") else None
    if domain is None:
        if kind is None:
            raise ValueError("a domain is required for a bare potential callable")
        domain = DEFAULT_DOMAINS[kind]
    pot = _potential_of(family)

    energies, delta, grid = _converge_grid(pot, domain, k, tol, n_start, n_max)
    g_kind = kind or "sextic"
    bigger = _grow_domain(g_kind, domain)
    # The enlarged domain needs proportionally more points for the same
    # resolution, so its ceiling scales with the width ratio.
    stretch = max(1.0, (bigger[1] - bigger[0]) / (domain[1] - domain[0]))
    energies2, delta2, grid2 = _converge_grid(
        pot, bigger, k, tol, max(n_start, grid.n_interior), int(n_max * math.ceil(stretch))
    )
    shift = np.abs(energies2 - energies)

    if float(np.max(shift)) > 2.0 * tol:
        # The boundary moved the eigenvalues: a wall with a small local
        # exponent converges slowly in the offset. One more growth step
        # gives the convergence order, and with it a Richardson-style bound
        # on what is still missing from the finest run.
        bigger2 = _grow_domain(g_kind, bigger)
        stretch2 = max(1.0, (bigger2[1] - bigger2[0]) / (domain[1] - domain[0]))
        energies3, delta3, grid3 = _converge_grid(
            pot, bigger2, k, tol, grid2.n_interior, int(n_max * math.ceil(stretch2))
        )
        shift2 = np.abs(energies3 - energies2)
        remaining = np.empty_like(shift2)
        for i in range(len(shift2)):
            if shift2[i] <= tol:
                remaining[i] = shift2[i]
            elif shift2[i] >= shift[i]:
                remaining[i] = max(shift[i], shift2[i])  # not converging; stay honest
            else:
                order = math.log2(shift[i] / shift2[i])
                # 1.5x guards the extrapolation against higher-order terms.
                remaining[i] = 1.5 * shift2[i] / (2.0**order - 1.0)
        energies_out, delta_out, grid_out = energies3, delta3, grid3
    else:
        remaining = shift
        energies_out, delta_out, grid_out = energies2, delta2, grid2

    gross = 0.02 * (1.0 + float(np.max(np.abs(energies_out))))
    if float(np.max(remaining)) > gross:
        raise OracleConvergenceError(
            f"domain truncation error {float(np.max(remaining)):.3g} is gross; "
            "the default domain does not hold this family",
            best=(energies_out, delta_out, grid_out),
        )
    estimates = np.maximum(np.maximum(delta_out, remaining), 1e-16)
    return OracleSpectrum(
        energies=tuple(float(e) for e in energies_out),
        error_estimates=tuple(float(e) for e in estimates),
        grid=grid_out,
    )
