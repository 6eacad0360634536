"""Weighted-sup norms induced by generator processes.

The norm of f is E(sup_t |f(t)| Z_t).  It is evaluated exactly by atom
enumeration (Constant, FiniteSpectral, DiscreteSimplex), by the closed
logistic form (LogisticFidis on its own locations), or by Monte Carlo.

The one-sided derivative of eps -> norm(f + eps * 1_{t0}) reduces to the mass
E(1_{A} Z_{t0}) of a comparison event A between sup_{t != t0} |f| Z and
|f(t0)| Z_{t0}.  Whether A compares weakly or strictly depends on the side
and on the sign of f(t0): with a = |f(t0)|, W = Z_{t0}, S the excluded sup,

    d/deps_+ E max(S, (a + eps) W) = E(1_{S <= a W} W)   (value grows),
    d/deps_+ E max(S, (a - eps) W) = -E(1_{S < a W} W)   (value shrinks),

and the plus/minus sides map onto grow/shrink according to sgn(f(t0)).
Ties S == a W therefore matter exactly when they have positive probability,
which only happens for enumerable specs; enumeration resolves them with exact
comparisons rather than tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import generators
from .function_space import EFunction
from .generators import GeneratorSpec, LogisticFidis, atom_decomposition, is_enumerable
from .parallel import batch_counts, run_batches
from .streams import Stream, as_stream

DEFAULT_REPLICATES = 100_000
MC_BATCH = 16_384

EXACT = "exact"
MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class DnormEstimate:
    """Norm value with method tag and sampling error (zero when exact)."""

    value: float
    method: str
    std_error: float = 0.0
    replicates: int = 0

    def __post_init__(self) -> None:
        if self.value < 0 or self.std_error < 0:
            raise ValueError("norm value and standard error must be nonnegative")
        if self.method == EXACT and self.std_error != 0:
            raise ValueError("exact estimates carry no standard error")


def _logistic_fidis_values(spec: LogisticFidis, f: EFunction) -> np.ndarray:
    """|f| at the spec locations, provided f vanishes everywhere else."""
    idx = generators._location_indices(spec.locations, f.grid)
    eff = np.abs(f.effective())
    mask = np.zeros(f.grid.size, dtype=bool)
    mask[idx] = True
    if np.any(eff[~mask] != 0):
        raise ValueError("no closed form; use dnorm_mc")
    return eff[idx]


def dnorm_exact(spec: GeneratorSpec, f: EFunction) -> DnormEstimate:
    """Closed-form norm where one exists.

    Constant gives the sup-norm, enumerable specs the weighted enumeration
    over atoms, LogisticFidis the power-mean of the point values.  Anything
    else raises ("no closed form; use dnorm_mc").
    """
    if is_enumerable(spec):
        weights, paths = atom_decomposition(spec, f.grid)
        eff = np.abs(f.effective())
        sups = (eff[None, :] * paths).max(axis=1)
        value = math.fsum(w * s for w, s in zip(weights, sups))
        return DnormEstimate(value, EXACT)
    if isinstance(spec, LogisticFidis):
        vals = _logistic_fidis_values(spec, f)
        if np.all(vals == 0):
            return DnormEstimate(0.0, EXACT)
        # power mean computed in a scale-invariant way for large exponents
        top = float(vals.max())
        value = top * float(np.power(np.sum(np.power(vals / top, spec.lam)), 1.0 / spec.lam))
        return DnormEstimate(value, EXACT)
    raise ValueError("no closed form; use dnorm_mc")


def _mc_sups(spec: GeneratorSpec, f: EFunction, replicates: int, stream: Stream) -> np.ndarray:
    """Per-replicate weighted sups, batched with per-batch derived streams."""
    eff = np.abs(f.effective())
    counts = batch_counts(replicates, MC_BATCH)

    def one_batch(b: int, count: int) -> np.ndarray:
        gen = stream.child(b).generator()
        values, _ = generators.sample_generator_matrix(spec, f.grid, count, gen)
        return (eff[None, :] * values).max(axis=1)

    return np.concatenate(run_batches(one_batch, counts))


def dnorm_mc(spec: GeneratorSpec, f: EFunction, replicates: int = DEFAULT_REPLICATES,
             rng: Stream | int = 0) -> DnormEstimate:
    """Monte Carlo norm estimate: mean of per-path weighted sups."""
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    sups = _mc_sups(spec, f, replicates, as_stream(rng))
    value = float(sups.mean())
    std_error = float(sups.std(ddof=1) / math.sqrt(replicates))
    return DnormEstimate(value, MONTE_CARLO, std_error, replicates)


def dnorm(spec: GeneratorSpec, f: EFunction, replicates: int = DEFAULT_REPLICATES,
          rng: Stream | int = 0) -> DnormEstimate:
    """Exact norm when available, Monte Carlo otherwise."""
    try:
        return dnorm_exact(spec, f)
    except ValueError:
        return dnorm_mc(spec, f, replicates, rng)


PLUS = "plus"
MINUS = "minus"


def variation(spec: GeneratorSpec, f: EFunction, t0_index: int, side: str = PLUS,
              replicates: int = DEFAULT_REPLICATES, rng: Stream | int = 0) -> float:
    """One-sided derivative of eps -> norm(f + eps * 1_{t0}) at eps = 0.

    Exact enumeration for enumerable specs (ties resolved by exact
    comparisons), Monte Carlo otherwise.  Requires f(t0) != 0.
    """
    if side not in (PLUS, MINUS):
        raise ValueError("side must be 'plus' or 'minus'")
    ft0 = f.value_at(t0_index)
    if ft0 == 0:
        raise ValueError("variation undefined at zero")
    sign = 1.0 if ft0 > 0 else -1.0
    a = abs(ft0)
    # weak comparison exactly when the perturbation grows |f(t0)|
    weak = (side == PLUS) == (ft0 > 0)

    eff = np.abs(f.effective())
    mask = np.ones(f.grid.size, dtype=bool)
    mask[t0_index] = False

    if is_enumerable(spec):
        weights, paths = atom_decomposition(spec, f.grid)
        excluded = (eff[None, mask] * paths[:, mask]).max(axis=1)
        w_at = paths[:, t0_index]
        hit = excluded <= a * w_at if weak else excluded < a * w_at
        return sign * math.fsum(w * z for w, z, h in zip(weights, w_at, hit) if h) + 0.0

    stream = as_stream(rng)
    counts = batch_counts(replicates, MC_BATCH)

    def one_batch(b: int, count: int) -> float:
        gen = stream.child(b).generator()
        values, _ = generators.sample_generator_matrix(spec, f.grid, count, gen)
        excluded = (eff[None, mask] * values[:, mask]).max(axis=1)
        w_at = values[:, t0_index]
        hit = excluded <= a * w_at if weak else excluded < a * w_at
        return float((hit * w_at).sum())

    totals = run_batches(one_batch, counts)
    return sign * math.fsum(totals) / replicates + 0.0
