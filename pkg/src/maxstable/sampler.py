"""Exact path samplers for max-stable and generalized Pareto processes.

The max-stable sampler superposes a unit-rate Poisson process P_1 < P_2 < ...
with iid generator marks Z^(i) and returns eta_t = max_i(-P_i / Z^(i)_t).
With a bounded generator (Z <= m) the summation stops once
P_j > m * |min_t eta_t|: any later point satisfies -P/Z <= -P/m < min eta
everywhere, so no grid value can change and the sampled path is exact in
distribution, with no truncation bias.  Point-supported generators never put
mass outside their support; grid values there stay at -inf, which encodes
"no constraint" and is consistent with the norm's view of those points.

The Pareto-type samplers share one radius draw per path: V_t = max(-U/Z_t, M)
with U uniform on (0, 1] (standard case), Y_t = Z_t / U (positive case), and
a perturbed radial variant drawing the radius from F_S(s) = s + kappa *
s^(1+delta) instead of the uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.optimize import brentq

from . import generators, parallel
from .function_space import EFunction, Grid, _require_same_grid, _readonly
from .generators import GeneratorSpec, generator_bound, sample_generator_matrix, support_indices
from .streams import Stream, as_generator, as_stream

SMSP = "smsp"
SGPP = "sgpp"
GPP = "gpp"
COPULA = "copula"
MARGINS = "margins"

_KINDS = (SMSP, SGPP, GPP, COPULA, MARGINS)

ENSEMBLE_BATCH = 4096
DEFAULT_FLOOR = -1.0
RADIAL_INV_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProcessPath:
    """One realized path on the grid.

    kind 'smsp' paths are negative (possibly -inf outside a point-supported
    generator's support), 'sgpp' paths live in [floor, 0), 'gpp' paths are
    nonnegative, 'copula' paths live in [0, 1].
    """

    grid: Grid
    values: np.ndarray
    kind: str
    floor: float | None = None

    def __post_init__(self) -> None:
        vals = _readonly(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.size,):
            raise ValueError("values must hold one entry per grid point")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Homogeneous collection of paths stored as an (n, N) matrix."""

    grid: Grid
    values: np.ndarray
    kind: str
    provenance: dict = field(default_factory=dict)
    floor: float | None = None

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2 or vals.shape[1] != self.grid.size:
            raise ValueError("ensemble values must be an (n, N) matrix")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}")

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __iter__(self) -> Iterator[ProcessPath]:
        for row in self.values:
            yield ProcessPath(self.grid, row, self.kind, self.floor)

    def path(self, i: int) -> ProcessPath:
        return ProcessPath(self.grid, self.values[i], self.kind, self.floor)


@dataclass(frozen=True)
class PerturbedRadialSpec:
    """Radius law F_S(s) = s + kappa * s^(1+delta) on [0, s_max].

    kappa = 0 recovers the uniform radius of the standard Pareto-type process;
    kappa > 0 tilts the radial df by a polynomial term of order 1 + delta,
    which is exactly what shifts the process into a delta-neighborhood of the
    standard one.  Mass above s_max stays uniform, so the law is a proper df
    as long as F_S(s_max) <= 1.
    """

    delta: float
    kappa: float
    s_max: float = 0.5

    def __post_init__(self) -> None:
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if not 0 < self.s_max <= 1:
            raise ValueError("s_max must lie in (0, 1]")
        if self.cdf(self.s_max) > 1.0:
            raise ValueError("radial df exceeds 1 on [0, s_max]; shrink kappa or s_max")

    def cdf(self, s):
        return s + self.kappa * np.power(s, 1.0 + self.delta)

    def pdf(self, s):
        return 1.0 + self.kappa * (1.0 + self.delta) * np.power(s, self.delta)

    def inverse(self, w: float) -> float:
        """Solve F_S(s) = w on [0, s_max] to absolute tolerance 1e-12."""
        if self.kappa == 0.0:
            return float(w)
        if not 0.0 <= w <= self.cdf(self.s_max):
            raise ValueError("w outside the radial df range")
        if w == 0.0:
            return 0.0
        return float(brentq(lambda s: self.cdf(s) - w, 0.0, self.s_max, xtol=RADIAL_INV_TOL))

    def sample_radius(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Radii with df F_S below s_max and the leftover mass kept uniform above."""
        w = 1.0 - rng.random(count)  # in (0, 1]
        cap = self.cdf(self.s_max)
        out = w.copy()
        if self.kappa != 0.0:
            low = w <= cap
            out[low] = [self.inverse(v) for v in w[low]]
        return out


def _require_bounded(spec: GeneratorSpec, grid: Grid) -> float:
    m = generator_bound(spec, grid)
    if not math.isfinite(m):
        raise ValueError("exact sampler requires bounded generator")
    return m


def _provenance(stream: Stream, n: int, extra: dict | None = None) -> dict:
    rec = {"stream": stream.describe(), "paths": n, "batch": ENSEMBLE_BATCH}
    if extra:
        rec.update(extra)
    return rec


# -- max-stable -------------------------------------------------------------


def _smsp_block(spec: GeneratorSpec, grid: Grid, count: int,
                rng: np.random.Generator, threshold_factor: float) -> np.ndarray:
    m = generator_bound(spec, grid)
    support = support_indices(spec, grid)
    eta = np.full((count, grid.size), -np.inf)
    radius = np.zeros(count)
    alive = np.arange(count)
    while alive.size:
        radius[alive] += rng.standard_exponential(alive.size)
        z, _ = sample_generator_matrix(spec, grid, alive.size, rng)
        with np.errstate(divide="ignore"):
            contrib = np.where(z > 0, -radius[alive, None] / z, -np.inf)
        eta[alive] = np.maximum(eta[alive], contrib)
        mins = eta[np.ix_(alive, support)].min(axis=1)
        done = np.isfinite(mins) & (radius[alive] > threshold_factor * m * np.abs(mins))
        alive = alive[~done]
    return eta


def sample_smsp(spec: GeneratorSpec, grid: Grid, rng, *,
                threshold_factor: float = 1.0) -> ProcessPath:
    """One exact max-stable path with standard negative exponential margins.

    threshold_factor scales the stopping threshold; any factor >= 1 yields the
    same path for the same stream, which is the checkable form of exactness.
    """
    _require_bounded(spec, grid)
    gen = as_generator(rng)
    values = _smsp_block(spec, grid, 1, gen, threshold_factor)[0]
    return ProcessPath(grid, values, SMSP)


def sample_smsp_ensemble(spec: GeneratorSpec, grid: Grid, n_paths: int,
                         rng: Stream | int, *, threshold_factor: float = 1.0) -> PathEnsemble:
    """n exact max-stable paths; batch b always draws from stream.child(b)."""
    _require_bounded(spec, grid)
    stream = as_stream(rng)
    counts = parallel.batch_counts(n_paths, ENSEMBLE_BATCH)

    def one_batch(b: int, count: int) -> np.ndarray:
        return _smsp_block(spec, grid, count, stream.child(b).generator(), threshold_factor)

    blocks = parallel.run_batches(one_batch, counts)
    values = np.vstack(blocks) if blocks else np.empty((0, grid.size))
    return PathEnsemble(grid, values, SMSP, _provenance(stream, n_paths))


# -- Pareto-type ------------------------------------------------------------


def _sgpp_block(spec, grid, count, rng, floor, radial: PerturbedRadialSpec | None):
    if radial is None:
        radius = 1.0 - rng.random(count)  # uniform on (0, 1]
    else:
        radius = radial.sample_radius(count, rng)
    z, _ = sample_generator_matrix(spec, grid, count, rng)
    with np.errstate(divide="ignore"):
        ratio = np.where(z > 0, -radius[:, None] / z, -np.inf)
    return np.maximum(ratio, floor)


def sample_sgpp(spec: GeneratorSpec, grid: Grid, rng, floor: float = DEFAULT_FLOOR) -> ProcessPath:
    """One standard Pareto-type path V_t = max(-U/Z_t, floor), floor < 0."""
    if not floor < 0:
        raise ValueError("floor must be negative")
    gen = as_generator(rng)
    values = _sgpp_block(spec, grid, 1, gen, floor, None)[0]
    return ProcessPath(grid, values, SGPP, floor)


def sample_sgpp_ensemble(spec: GeneratorSpec, grid: Grid, n_paths: int,
                         rng: Stream | int, floor: float = DEFAULT_FLOOR) -> PathEnsemble:
    if not floor < 0:
        raise ValueError("floor must be negative")
    stream = as_stream(rng)
    counts = parallel.batch_counts(n_paths, ENSEMBLE_BATCH)

    def one_batch(b: int, count: int) -> np.ndarray:
        return _sgpp_block(spec, grid, count, stream.child(b).generator(), floor, None)

    blocks = parallel.run_batches(one_batch, counts)
    values = np.vstack(blocks) if blocks else np.empty((0, grid.size))
    return PathEnsemble(grid, values, SGPP, _provenance(stream, n_paths), floor)


def sample_gpp(spec: GeneratorSpec, grid: Grid, rng) -> ProcessPath:
    """One positive Pareto-type path Y_t = Z_t / U."""
    gen = as_generator(rng)
    u = 1.0 - gen.random()
    z, _ = sample_generator_matrix(spec, grid, 1, gen)
    return ProcessPath(grid, z[0] / u, GPP)


def sample_gpp_ensemble(spec: GeneratorSpec, grid: Grid, n_paths: int,
                        rng: Stream | int) -> PathEnsemble:
    stream = as_stream(rng)
    counts = parallel.batch_counts(n_paths, ENSEMBLE_BATCH)

    def one_batch(b: int, count: int) -> np.ndarray:
        gen = stream.child(b).generator()
        u = 1.0 - gen.random(count)
        z, _ = sample_generator_matrix(spec, grid, count, gen)
        return z / u[:, None]

    blocks = parallel.run_batches(one_batch, counts)
    values = np.vstack(blocks) if blocks else np.empty((0, grid.size))
    return PathEnsemble(grid, values, GPP, _provenance(stream, n_paths))


def sample_perturbed_sgpp(spec: GeneratorSpec, grid: Grid, radial: PerturbedRadialSpec,
                          rng, floor: float = DEFAULT_FLOOR) -> ProcessPath:
    """Pareto-type path whose radius follows the perturbed radial df.

    With kappa = 0 this reproduces sample_sgpp draw for draw.
    """
    if not floor < 0:
        raise ValueError("floor must be negative")
    gen = as_generator(rng)
    values = _sgpp_block(spec, grid, 1, gen, floor, radial)[0]
    return ProcessPath(grid, values, SGPP, floor)


def sample_perturbed_sgpp_ensemble(spec: GeneratorSpec, grid: Grid, n_paths: int,
                                   radial: PerturbedRadialSpec, rng: Stream | int,
                                   floor: float = DEFAULT_FLOOR) -> PathEnsemble:
    if not floor < 0:
        raise ValueError("floor must be negative")
    stream = as_stream(rng)
    counts = parallel.batch_counts(n_paths, ENSEMBLE_BATCH)

    def one_batch(b: int, count: int) -> np.ndarray:
        return _sgpp_block(spec, grid, count, stream.child(b).generator(), floor, radial)

    blocks = parallel.run_batches(one_batch, counts)
    values = np.vstack(blocks) if blocks else np.empty((0, grid.size))
    return PathEnsemble(grid, values, SGPP, _provenance(stream, n_paths), floor)


# -- empirical functionals ----------------------------------------------------


def fdf_empirical(ensemble: PathEnsemble, f: EFunction) -> tuple[float, float]:
    """Fraction of paths lying below f at every grid point, with binomial error."""
    if len(ensemble) == 0:
        raise ValueError("ensemble is empty")
    _require_same_grid(ensemble.grid, f.grid)
    hits = np.all(ensemble.values <= f.effective()[None, :], axis=1)
    p = float(hits.mean())
    se = math.sqrt(p * (1.0 - p) / len(ensemble))
    return p, se


def eta_functional(path: ProcessPath, f: EFunction) -> float:
    """sup over grid points with f != 0 of path value / |f|; zeros impose nothing."""
    if path.kind not in (SMSP, SGPP):
        raise ValueError("eta functional applies to smsp or sgpp paths")
    return float(eta_functional_ensemble(
        PathEnsemble(path.grid, path.values[None, :], path.kind), f)[0])


def eta_functional_ensemble(ensemble: PathEnsemble, f: EFunction) -> np.ndarray:
    _require_same_grid(ensemble.grid, f.grid)
    eff = np.abs(f.effective())
    mask = eff != 0
    if not mask.any():
        raise ValueError("eta functional undefined for the zero function")
    return (ensemble.values[:, mask] / eff[None, mask]).max(axis=1)
