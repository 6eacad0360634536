"""Grid model of bounded functions on [0, 1] with finitely many jump points.

A function is stored as a piecewise-linear base part sampled at the grid
nodes plus a finite map of per-index overrides.  Overrides model isolated
redefinitions (jump points, point-supported functions) exactly; the base part
is resolved only at the nodes, so suprema over [0, 1] are approximated by
grid maxima with the grid size acting as the convergence knob.

Point-supported functions carry finite-dimensional data: a vector
``(x_1, ..., x_d)`` attached to locations ``t_1 < ... < t_d`` embeds as the
function equal to ``x_i`` at ``t_i`` and zero elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Mapping

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .generators import GeneratorSample

UNRESTRICTED = "unrestricted"
NONPOSITIVE = "nonpositive"

DEFAULT_GRID_SIZE = 101


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing evaluation points t_0 = 0 < ... < t_{N-1} = 1."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = _readonly(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least two points")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise ValueError("grid must start at 0 and end at 1")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")

    @classmethod
    def uniform(cls, n: int = DEFAULT_GRID_SIZE) -> "Grid":
        return cls(np.linspace(0.0, 1.0, n))

    @classmethod
    def containing(cls, locations: Iterable[float], n: int = DEFAULT_GRID_SIZE) -> "Grid":
        """Uniform grid refined so that every requested location is a node."""
        pts = np.union1d(np.linspace(0.0, 1.0, n), np.asarray(list(locations), float))
        return cls(pts)

    @property
    def size(self) -> int:
        return int(self.points.size)

    def index_of(self, location: float) -> int:
        """Exact membership lookup; no tolerance snapping."""
        i = int(np.searchsorted(self.points, location))
        if i < self.points.size and self.points[i] == location:
            return i
        raise ValueError(f"location {location!r} is not a grid point")

    def matches(self, other: "Grid") -> bool:
        return self is other or np.array_equal(self.points, other.points)


def _require_same_grid(a: Grid, b: Grid) -> None:
    if not a.matches(b):
        raise ValueError("grid mismatch")


@dataclass(frozen=True, eq=False)
class EFunction:
    """Bounded function on [0, 1]: piecewise-linear base plus point overrides.

    The effective value at grid index i is ``overrides[i]`` when present and
    ``base[i]`` otherwise.  ``sign_class == "nonpositive"`` asserts that every
    effective value is <= 0.
    """

    grid: Grid
    base: np.ndarray
    overrides: Mapping[int, float] = field(default_factory=dict)
    sign_class: str = UNRESTRICTED

    def __post_init__(self) -> None:
        base = _readonly(np.asarray(self.base, dtype=float))
        object.__setattr__(self, "base", base)
        if base.shape != (self.grid.size,):
            raise ValueError("base must hold one value per grid point")
        if not np.all(np.isfinite(base)):
            raise ValueError("base values must be finite")
        overrides = {int(i): float(v) for i, v in dict(self.overrides).items()}
        object.__setattr__(self, "overrides", overrides)
        for i, v in overrides.items():
            if not 0 <= i < self.grid.size:
                raise ValueError(f"override index {i} outside grid")
            if not math.isfinite(v):
                raise ValueError("override values must be finite")
        if self.sign_class not in (UNRESTRICTED, NONPOSITIVE):
            raise ValueError(f"unknown sign class {self.sign_class!r}")
        eff = base.copy()
        for i, v in overrides.items():
            eff[i] = v
        if self.sign_class == NONPOSITIVE and np.any(eff > 0):
            raise ValueError("nonpositive function has a positive value")
        object.__setattr__(self, "_effective", _readonly(eff))

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "EFunction":
        sign = NONPOSITIVE if value <= 0 else UNRESTRICTED
        return cls(grid, np.full(grid.size, float(value)), {}, sign)

    @classmethod
    def zero(cls, grid: Grid) -> "EFunction":
        return cls.constant(grid, 0.0)

    @classmethod
    def from_values(cls, grid: Grid, values, sign_class: str | None = None) -> "EFunction":
        vals = np.asarray(values, dtype=float)
        if sign_class is None:
            sign_class = NONPOSITIVE if np.all(vals <= 0) else UNRESTRICTED
        return cls(grid, vals, {}, sign_class)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray],
                      sign_class: str | None = None) -> "EFunction":
        return cls.from_values(grid, fn(grid.points), sign_class)

    # -- accessors ---------------------------------------------------------

    def effective(self) -> np.ndarray:
        """Per-node values with overrides applied (read-only array)."""
        return self._effective  # type: ignore[attr-defined]

    def value_at(self, index: int) -> float:
        return float(self.effective()[index])

    def sup_norm(self) -> float:
        return float(np.abs(self.effective()).max())

    # -- derived functions --------------------------------------------------

    def with_override(self, index: int, value: float) -> "EFunction":
        if not 0 <= index < self.grid.size:
            raise ValueError(f"override index {index} outside grid")
        new = dict(self.overrides)
        new[index] = float(value)
        sign = self.sign_class if value <= 0 else UNRESTRICTED
        return EFunction(self.grid, self.base, new, sign)

    def scaled(self, c: float) -> "EFunction":
        sign = self.sign_class if c >= 0 else UNRESTRICTED
        return EFunction(self.grid, self.base * c,
                         {i: v * c for i, v in self.overrides.items()}, sign)

    def transform(self, fn: Callable[[float], float],
                  sign_class: str = UNRESTRICTED) -> "EFunction":
        """Apply a scalar map to the base and the override values."""
        return EFunction(self.grid, np.array([fn(v) for v in self.base]),
                         {i: fn(v) for i, v in self.overrides.items()}, sign_class)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "grid": [float(t) for t in self.grid.points],
            "base": [float(v) for v in self.base],
            "overrides": [[int(i), float(v)] for i, v in sorted(self.overrides.items())],
            "sign_class": self.sign_class,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "EFunction":
        grid = Grid(np.asarray(record["grid"], dtype=float))
        overrides = {int(i): float(v) for i, v in record.get("overrides", [])}
        return cls(grid, np.asarray(record["base"], dtype=float), overrides,
                   record.get("sign_class", UNRESTRICTED))


def efun_embed_fidis(grid: Grid, points: Iterable[tuple[float, float]]) -> EFunction:
    """Embed finite-dimensional data as a point-supported nonpositive function.

    ``points`` is an iterable of (location, value) with negative values and
    distinct locations that must coincide exactly with grid nodes.  The result
    equals each value at its location and zero elsewhere.
    """
    overrides: dict[int, float] = {}
    for loc, val in points:
        try:
            idx = grid.index_of(loc)
        except ValueError:
            raise ValueError(f"off-grid fidis point: {loc!r}") from None
        if not val < 0:
            raise ValueError("fidis values must be negative")
        if idx in overrides:
            raise ValueError(f"duplicate fidis location {loc!r}")
        overrides[idx] = float(val)
    return EFunction(grid, np.zeros(grid.size), overrides, NONPOSITIVE)


def efun_sup_weighted(f: EFunction, z: "GeneratorSample") -> float:
    """max over grid nodes of |f| * z, override points included exactly."""
    _require_same_grid(f.grid, z.grid)
    return float((np.abs(f.effective()) * z.values).max())


def efun_sup_weighted_excluding(f: EFunction, z: "GeneratorSample", t0_index: int) -> float:
    """Same as efun_sup_weighted but the maximum skips index t0_index."""
    _require_same_grid(f.grid, z.grid)
    n = f.grid.size
    if not 0 <= t0_index < n:
        raise ValueError(f"index {t0_index} outside grid")
    prod = np.abs(f.effective()) * z.values
    mask = np.ones(n, dtype=bool)
    mask[t0_index] = False
    if not mask.any():
        return 0.0
    return float(prod[mask].max())
