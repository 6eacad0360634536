"""Closed-form convergence-rate laboratory for perturbed Pareto-type processes.

For an enumerable generator with atoms z_k (weights w_k) and the perturbed
radial law F_S(s) = s + kappa * s^(1+delta), the spectral df of the process
at a unit-sup function f is exact:

    H_f(c) = 1 - sum_k w_k F_S(|c| M_k),      M_k = sup_t |f(t)| z_k(t),

so the distance curves  n |-> sup_f |H_f(c/n)^n - exp(-|c| norm(f))|  carry no
sampling noise and the decay exponent can be recovered by log-log regression
to tight tolerances.  The von Mises remainder of H_f is likewise closed form:

    r_f(c) = kappa * delta * |c|^delta * E_f / (norm(f) + kappa * |c|^delta * E_f),
    E_f    = sum_k w_k M_k^(1+delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .dnorm import dnorm_exact
from .function_space import EFunction, Grid, efun_embed_fidis
from .generators import Constant, FiniteSpectral, GeneratorSpec, atom_decomposition, generator_bound
from .sampler import PerturbedRadialSpec

MAGNITUDE_LADDER = 20
MAGNITUDE_SPAN = 100.0


@dataclass(frozen=True)
class RateFitReport:
    """Log-log fit of a sup-distance curve."""

    ns: tuple[int, ...]
    sup_diffs: tuple[float, ...]
    delta_hat: float
    fit_r2: float
    family_size: int = 0

    def __post_init__(self) -> None:
        if len(self.ns) != len(self.sup_diffs):
            raise ValueError("ns and sup_diffs must have equal length")
        if any(d < 0 for d in self.sup_diffs):
            raise ValueError("sup differences must be nonnegative")


def _atom_sups(spec: GeneratorSpec, f: EFunction) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(spec, (Constant, FiniteSpectral)):
        raise ValueError("spectral closed forms require a Constant or FiniteSpectral generator")
    weights, paths = atom_decomposition(spec, f.grid)
    sups = (np.abs(f.effective())[None, :] * paths).max(axis=1)
    return weights, sups


def _check_unit_sphere(f: EFunction) -> None:
    if f.sup_norm() != 1.0:
        raise ValueError("f must have sup-norm exactly 1; normalize with unit_sphere()")


def unit_sphere(f: EFunction) -> EFunction:
    """Rescale f to sup-norm exactly one."""
    s = f.sup_norm()
    if s == 0:
        raise ValueError("cannot normalize the zero function")
    return f.scaled(1.0 / s)


def _check_radial_range(spec: GeneratorSpec, radial: PerturbedRadialSpec,
                        magnitude: float, grid: Grid) -> None:
    m = generator_bound(spec, grid)
    if magnitude * m > radial.s_max * (1.0 + 1e-12):
        raise ValueError(
            f"radial validity range exceeded: |c| * m = {magnitude * m:.6g} > s_max = {radial.s_max}")


def spectral_df(spec: GeneratorSpec, radial: PerturbedRadialSpec,
                f: EFunction, c: float) -> float:
    """Exact H_f(c) = P(process <= c |f|) for unit-sup f and c < 0."""
    if not c < 0:
        raise ValueError("c must be negative")
    _check_unit_sphere(f)
    _check_radial_range(spec, radial, abs(c), f.grid)
    weights, sups = _atom_sups(spec, f)
    return 1.0 - math.fsum(w * float(radial.cdf(abs(c) * s)) for w, s in zip(weights, sups))


def default_test_family(grid: Grid) -> list[EFunction]:
    """Eight unit-sup nonpositive shapes: constants, ramps, a vee, a bump,
    a plateau, a cosine hump, and a two-point fidis."""
    t = grid.points
    shapes = [
        EFunction.constant(grid, -1.0),
        EFunction.from_values(grid, -t),
        EFunction.from_values(grid, -(1.0 - t)),
        EFunction.from_values(grid, -np.maximum(t, 1.0 - t)),
        unit_sphere(EFunction.from_values(grid, -np.exp(-((t - 0.5) / 0.2) ** 2))),
        EFunction.from_values(grid, -np.minimum(2.0 * t, 1.0)),
        EFunction.from_values(grid, -(0.5 + 0.5 * np.cos(2.0 * math.pi * t))),
        efun_embed_fidis(grid, [(0.25, -1.0), (0.75, -0.5)]),
    ]
    return [unit_sphere(s) for s in shapes]


def magnitude_ladder(spec: GeneratorSpec, radial: PerturbedRadialSpec, n_min: int,
                     grid: Grid, size: int = MAGNITUDE_LADDER) -> np.ndarray:
    """Geometric |c| ladder filling the radial validity range at the smallest n."""
    m = generator_bound(spec, grid)
    top = radial.s_max * n_min / m
    return top * np.geomspace(1.0, 1.0 / MAGNITUDE_SPAN, size)


def sup_diff(spec: GeneratorSpec, radial: PerturbedRadialSpec,
             family: Sequence[EFunction], n: int,
             magnitudes: Sequence[float] | None = None) -> float:
    """max over the family and magnitude ladder of |H_f(c/n)^n - exp(-|c| norm f)|."""
    if not family:
        raise ValueError("family must be nonempty")
    if n < 1:
        raise ValueError("n must be positive")
    grid = family[0].grid
    if magnitudes is None:
        magnitudes = magnitude_ladder(spec, radial, n, grid)
    worst = 0.0
    for f in family:
        u = unit_sphere(f)
        weights, sups = _atom_sups(spec, u)
        norm = float(dnorm_exact(spec, u).value)
        for mag in magnitudes:
            _check_radial_range(spec, radial, mag / n, grid)
            h = 1.0 - math.fsum(
                w * float(radial.cdf(mag * s / n)) for w, s in zip(weights, sups))
            worst = max(worst, abs(h ** n - math.exp(-mag * norm)))
    return worst


def rate_curve(spec: GeneratorSpec, radial: PerturbedRadialSpec,
               family: Sequence[EFunction], ns: Sequence[int]) -> "RateFitReport":
    """Deterministic sup-distance curve over ns with a fixed ladder, plus fit.

    The ladder is sized to the smallest n so that every (c, n) pair stays in
    the radial validity range; the same magnitudes are used for all n.
    """
    ns = sorted(int(n) for n in ns)
    if not family:
        raise ValueError("family must be nonempty")
    grid = family[0].grid
    magnitudes = magnitude_ladder(spec, radial, ns[0], grid)
    diffs = [sup_diff(spec, radial, family, n, magnitudes) for n in ns]
    report = fit_delta(ns, diffs, family_size=len(family))
    return report


def fit_delta(ns: Sequence[int], sup_diffs: Sequence[float],
              family_size: int = 0) -> RateFitReport:
    """Least-squares slope of log sup_diff against log n, negated."""
    ns = [int(n) for n in ns]
    diffs = [float(d) for d in sup_diffs]
    if len(ns) != len(diffs):
        raise ValueError("ns and sup_diffs must have equal length")
    if len(ns) < 4:
        raise ValueError("need at least 4 curve points")
    if any(d <= 0 for d in diffs):
        raise ValueError("sup differences must be positive to fit a rate (exact coincidence)")
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(diffs))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFitReport(tuple(ns), tuple(diffs), float(-slope), float(r2), family_size)


def von_mises_remainder(spec: GeneratorSpec, radial: PerturbedRadialSpec,
                        f: EFunction, c: float) -> float:
    """Closed-form remainder r_f(c) of -c h_f(c) / (1 - H_f(c)) = 1 + r_f(c)."""
    if not c < 0:
        raise ValueError("c must be negative")
    _check_unit_sphere(f)
    _check_radial_range(spec, radial, abs(c), f.grid)
    weights, sups = _atom_sups(spec, f)
    norm = math.fsum(w * s for w, s in zip(weights, sups))
    e_f = math.fsum(w * s ** (1.0 + radial.delta) for w, s in zip(weights, sups))
    tilt = radial.kappa * abs(c) ** radial.delta * e_f
    return radial.delta * tilt / (norm + tilt)


def remainder_integral(spec: GeneratorSpec, radial: PerturbedRadialSpec,
                       f: EFunction, c: float, abs_tol: float = 1e-10) -> float:
    """Adaptive quadrature of integral over [c, 0) of r_f(t)/t dt.

    The integrand behaves like |t|^(delta-1) at the upper endpoint, so the
    quadrature runs in the variable w = |t|^delta, where it is bounded and
    smooth:  integral = -(1/delta) int_0^{|c|^delta} r_f(-w^{1/delta}) / w dw.
    """
    if not c < 0:
        raise ValueError("c must be negative")
    if radial.kappa == 0.0:
        return 0.0
    _check_unit_sphere(f)
    inv_delta = 1.0 / radial.delta

    def integrand(w: float) -> float:
        t = -(w ** inv_delta)
        if t == 0.0:
            return 0.0
        return von_mises_remainder(spec, radial, f, t) / w

    value, err = integrate.quad(integrand, 0.0, abs(c) ** radial.delta,
                                epsabs=abs_tol * radial.delta / 2.0, limit=200)
    if err > abs_tol * radial.delta:
        raise RuntimeError(f"remainder quadrature achieved only {err:.3g} > {abs_tol:.3g}")
    return float(-value * inv_delta)


def remainder_integral_exact(spec: GeneratorSpec, radial: PerturbedRadialSpec,
                             f: EFunction, c: float) -> float:
    """Antiderivative form of the remainder integral, for cross-checking."""
    _check_unit_sphere(f)
    weights, sups = _atom_sups(spec, f)
    norm = math.fsum(w * s for w, s in zip(weights, sups))
    e_f = math.fsum(w * s ** (1.0 + radial.delta) for w, s in zip(weights, sups))
    return -math.log1p(radial.kappa * e_f * abs(c) ** radial.delta / norm)
