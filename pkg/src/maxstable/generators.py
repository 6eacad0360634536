"""Catalog of generator processes: nonnegative paths with unit mean.

Every variant describes a random path Z on the grid with E(Z_t) = 1 at the
points it supports.  The catalog spans the dependence range with independent
ground truths for each construction:

* Constant        -- Z == 1, complete dependence (weighted sup-norms are exact).
* FiniteSpectral  -- Z drawn uniformly from K fixed atom paths; expectations of
                     any path functional reduce to weighted enumeration.
* RandomCosine    -- Z_t = 1 + a*cos(2*pi*t + Theta) with uniform phase; paths
                     are differentiable, Z'_t = -2*pi*a*sin(2*pi*t + Theta).
* DiscreteSimplex -- point-supported: value d at one of d locations picked
                     uniformly, zero elsewhere (independence at the locations).
* LogisticFidis   -- point-supported with scaled Frechet values; unbounded, so
                     only expectation-style estimation is available, not exact
                     path simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import gamma as gamma_fn

from .function_space import Grid, _readonly

MEAN_ONE_TOL = 1e-12

# closed-form atom families usable on any grid
ATOM_FORMS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear-up": lambda t: 2.0 * t,
    "linear-down": lambda t: 2.0 - 2.0 * t,
}


@dataclass(frozen=True)
class Constant:
    """Z identically one."""


@dataclass(frozen=True, eq=False)
class FiniteSpectral:
    """Uniform mixture over K fixed nonnegative atom paths averaging to one.

    ``atoms`` is either a tuple of named closed forms (keys of ATOM_FORMS) or
    an explicit (K, N) array bound to a particular grid size.
    """

    atoms: "tuple[str, ...] | np.ndarray"

    def __post_init__(self) -> None:
        atoms = self.atoms
        if isinstance(atoms, np.ndarray):
            arr = _readonly(np.asarray(atoms, dtype=float))
            if arr.ndim != 2 or arr.shape[0] < 1:
                raise ValueError("explicit atoms must form a (K, N) array")
            object.__setattr__(self, "atoms", arr)
        else:
            names = tuple(atoms)
            if not names:
                raise ValueError("need at least one atom")
            unknown = [n for n in names if n not in ATOM_FORMS]
            if unknown:
                raise ValueError(f"unknown atom forms: {unknown}")
            object.__setattr__(self, "atoms", names)

    @classmethod
    def linear_pair(cls) -> "FiniteSpectral":
        return cls(("linear-up", "linear-down"))

    @property
    def count(self) -> int:
        if isinstance(self.atoms, np.ndarray):
            return int(self.atoms.shape[0])
        return len(self.atoms)

    def atom_matrix(self, grid: Grid) -> np.ndarray:
        if isinstance(self.atoms, np.ndarray):
            if self.atoms.shape[1] != grid.size:
                raise ValueError("explicit atoms do not fit this grid")
            mat = self.atoms
        else:
            mat = _readonly(np.stack([ATOM_FORMS[n](grid.points) for n in self.atoms]))
        if np.any(mat < 0):
            raise ValueError("atom paths must be nonnegative")
        mean = mat.mean(axis=0)
        if np.max(np.abs(mean - 1.0)) > MEAN_ONE_TOL:
            raise ValueError("atom paths must average to one at every grid point")
        return mat


@dataclass(frozen=True)
class RandomCosine:
    """Z_t = 1 + a*cos(2*pi*t + Theta), Theta uniform on [0, 2*pi)."""

    a: float

    def __post_init__(self) -> None:
        if not 0 < self.a <= 1:
            raise ValueError("cosine amplitude must lie in (0, 1]")


@dataclass(frozen=True)
class DiscreteSimplex:
    """Point-supported: value d at one of d locations (uniform pick), 0 elsewhere."""

    d: int
    locations: tuple[float, ...]

    def __post_init__(self) -> None:
        locs = tuple(float(t) for t in self.locations)
        object.__setattr__(self, "locations", locs)
        if self.d != len(locs) or self.d < 1:
            raise ValueError("d must equal the number of locations")
        if len(set(locs)) != len(locs):
            raise ValueError("locations must be distinct")


@dataclass(frozen=True)
class LogisticFidis:
    """Point-supported with iid Frechet(shape lam) values scaled to unit mean.

    Closed-form norms exist for every lam >= 1; path sampling additionally
    needs lam > 1 (the unit-mean scaling diverges at lam == 1) and the values
    are unbounded, which rules this variant out of exact path simulation.
    """

    lam: float
    locations: tuple[float, ...]

    def __post_init__(self) -> None:
        locs = tuple(float(t) for t in self.locations)
        object.__setattr__(self, "locations", locs)
        if not self.lam >= 1:
            raise ValueError("logistic shape lam must be >= 1")
        if not locs or len(set(locs)) != len(locs):
            raise ValueError("locations must be nonempty and distinct")

    @property
    def d(self) -> int:
        return len(self.locations)

    def mean_scale(self) -> float:
        # E(Frechet(lam)) = Gamma(1 - 1/lam), finite only for lam > 1
        if self.lam == 1:
            raise ValueError("logistic generator with lam = 1 cannot be sampled")
        return float(gamma_fn(1.0 - 1.0 / self.lam))


GeneratorSpec = Union[Constant, FiniteSpectral, RandomCosine, DiscreteSimplex, LogisticFidis]


@dataclass(frozen=True, eq=False)
class GeneratorSample:
    """One realized generator path, with the pathwise derivative when it exists."""

    grid: Grid
    values: np.ndarray
    derivative: np.ndarray | None = None

    def __post_init__(self) -> None:
        vals = _readonly(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.size,):
            raise ValueError("values must hold one entry per grid point")
        if np.any(vals < 0):
            raise ValueError("generator values must be nonnegative")
        if self.derivative is not None:
            der = _readonly(np.asarray(self.derivative, dtype=float))
            if der.shape != vals.shape:
                raise ValueError("derivative must match the grid")
            object.__setattr__(self, "derivative", der)


def _location_indices(locations: tuple[float, ...], grid: Grid) -> np.ndarray:
    try:
        return np.array([grid.index_of(t) for t in locations], dtype=int)
    except ValueError as exc:
        raise ValueError(f"off-grid location: {exc}") from None


def generator_bound(spec: GeneratorSpec, grid: Grid | None = None) -> float:
    """Tight pointwise upper bound m on Z, math.inf when unbounded.

    FiniteSpectral needs a grid to resolve named atom forms; the other
    variants ignore the argument.
    """
    if isinstance(spec, Constant):
        return 1.0
    if isinstance(spec, FiniteSpectral):
        if isinstance(spec.atoms, np.ndarray):
            return float(spec.atoms.max())
        if grid is None:
            grid = Grid.uniform()
        return float(spec.atom_matrix(grid).max())
    if isinstance(spec, RandomCosine):
        return 1.0 + spec.a
    if isinstance(spec, DiscreteSimplex):
        return float(spec.d)
    if isinstance(spec, LogisticFidis):
        return math.inf
    raise TypeError(f"unknown generator spec {spec!r}")


def is_bounded(spec: GeneratorSpec) -> bool:
    return not isinstance(spec, LogisticFidis)


def is_enumerable(spec: GeneratorSpec) -> bool:
    """True when expectations of path functionals reduce to finite enumeration."""
    return isinstance(spec, (Constant, FiniteSpectral, DiscreteSimplex))


def has_derivative(spec: GeneratorSpec) -> bool:
    return isinstance(spec, (Constant, RandomCosine))


def support_indices(spec: GeneratorSpec, grid: Grid) -> np.ndarray:
    """Grid indices where the generator can be positive."""
    if isinstance(spec, (DiscreteSimplex, LogisticFidis)):
        return np.sort(_location_indices(spec.locations, grid))
    return np.arange(grid.size)


def finite_spectral_atoms(spec: FiniteSpectral, grid: Grid) -> list[tuple[float, np.ndarray]]:
    """The K atom paths with their equal weights 1/K.

    Callers can compute exact expectations of any functional of the path by
    weighted enumeration over the returned atoms.
    """
    if not isinstance(spec, FiniteSpectral):
        raise ValueError("finite_spectral_atoms requires a FiniteSpectral spec")
    mat = spec.atom_matrix(grid)
    w = 1.0 / mat.shape[0]
    return [(w, mat[k]) for k in range(mat.shape[0])]


def atom_decomposition(spec: GeneratorSpec, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """(weights, paths) of the exact atom decomposition of an enumerable spec."""
    if isinstance(spec, Constant):
        return np.array([1.0]), np.ones((1, grid.size))
    if isinstance(spec, FiniteSpectral):
        mat = spec.atom_matrix(grid)
        k = mat.shape[0]
        return np.full(k, 1.0 / k), mat
    if isinstance(spec, DiscreteSimplex):
        idx = _location_indices(spec.locations, grid)
        paths = np.zeros((spec.d, grid.size))
        paths[np.arange(spec.d), idx] = float(spec.d)
        return np.full(spec.d, 1.0 / spec.d), paths
    raise ValueError("spec is not enumerable; use Monte Carlo")


def sample_generator_matrix(
    spec: GeneratorSpec, grid: Grid, count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray | None]:
    """Draw `count` generator paths at once; returns (values, derivatives or None)."""
    n = grid.size
    if isinstance(spec, Constant):
        return np.ones((count, n)), np.zeros((count, n))
    if isinstance(spec, FiniteSpectral):
        mat = spec.atom_matrix(grid)
        picks = rng.integers(0, mat.shape[0], size=count)
        return mat[picks], None
    if isinstance(spec, RandomCosine):
        theta = rng.uniform(0.0, 2.0 * math.pi, size=count)
        phase = 2.0 * math.pi * grid.points[None, :] + theta[:, None]
        return 1.0 + spec.a * np.cos(phase), -2.0 * math.pi * spec.a * np.sin(phase)
    if isinstance(spec, DiscreteSimplex):
        idx = _location_indices(spec.locations, grid)
        picks = rng.integers(0, spec.d, size=count)
        values = np.zeros((count, n))
        values[np.arange(count), idx[picks]] = float(spec.d)
        return values, None
    if isinstance(spec, LogisticFidis):
        idx = _location_indices(spec.locations, grid)
        scale = spec.mean_scale()
        u = 1.0 - rng.random(size=(count, spec.d))  # in (0, 1]
        frechet = np.power(-np.log(u), -1.0 / spec.lam)
        values = np.zeros((count, n))
        values[:, idx] = frechet / scale
        return values, None
    raise TypeError(f"unknown generator spec {spec!r}")


def sample_generator(spec: GeneratorSpec, grid: Grid, rng: np.random.Generator) -> GeneratorSample:
    """One realized generator path on the grid."""
    values, derivative = sample_generator_matrix(spec, grid, 1, rng)
    der = derivative[0] if derivative is not None else None
    return GeneratorSample(grid, values[0], der)
