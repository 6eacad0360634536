"""Distributional calculus of max-stable paths at one or two grid points.

Everything here reduces to expectations of functionals of (Z_{t0}, Z'_{t0})
or of a pair (Z_s, Z_t), weighted by the exponential density of the
conditioning margin:

* conditional law of the path given one observed value,
* law of an increment between two grid points (outer quadrature over the
  conditioning value),
* limit law of difference quotients (the distributional derivative) and the
  auxiliary df F(x) = E(1_{Z' <= x Z} Z) with its sampler.

For the cosine generator the inner expectations have exact arc integrals:
any event {offset + amp * cos(theta + phase) >= 0} is an arc of the uniform
phase, and integrating 1 + a*cos against an arc is elementary.  Enumerable
generators use exact atom sums with the weak comparison taken as stated; the
unbounded point-supported generator falls back to shared-sample Monte Carlo.

Outer integrals over the conditioning value y < 0 carry an exp(y) factor, so
truncating at y_min = log(tol) bounds the neglected mass by tol exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import generators
from .function_space import EFunction, Grid, _readonly
from .generators import (
    Constant,
    GeneratorSpec,
    LogisticFidis,
    RandomCosine,
    atom_decomposition,
    has_derivative,
    is_enumerable,
)
from .streams import Stream, as_generator

TWO_PI = 2.0 * math.pi

MAX_QUAD_POINTS = 64


class QuadratureConvergenceError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""

    def __init__(self, achieved: float, requested: float):
        super().__init__(
            f"quadrature did not converge: achieved {achieved:.3g}, requested {requested:.3g}")
        self.achieved = achieved
        self.requested = requested


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the improper conditioning integrals."""

    abs_tol: float = 1e-10
    max_subdivisions: int = 400
    y_min: float | None = None

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions too small")
        if self.y_min is not None:
            if not self.y_min < 0:
                raise ValueError("y_min must be negative")
            if math.exp(self.y_min) > self.abs_tol:
                raise ValueError("exp(y_min) exceeds the tolerance; lower y_min")

    @property
    def lower_cutoff(self) -> float:
        return self.y_min if self.y_min is not None else math.log(self.abs_tol)


def _quad(fn, lo: float, hi: float, abs_tol: float, *, limit: int = 400,
          points=None, raise_factor: float = 100.0) -> float:
    if hi <= lo:
        return 0.0
    if points is not None:
        points = sorted(p for p in set(points) if lo < p < hi)
        if not points or len(points) > MAX_QUAD_POINTS:
            points = None
    value, err = integrate.quad(fn, lo, hi, epsabs=abs_tol, epsrel=1e-10,
                                limit=limit, points=points)
    if err > raise_factor * abs_tol and err > 1e-8:
        raise QuadratureConvergenceError(err, abs_tol)
    return float(value)


def _arc_mean(beta: float, a: float, offset: float, amp: float) -> float:
    """Mean of (1 + a*cos(beta + psi)) 1_{offset + amp*cos(psi) >= 0}, psi uniform.

    amp must be nonnegative; the event is the arc |psi| <= arccos(-offset/amp).
    """
    if amp <= 0.0:
        return 1.0 if offset >= 0.0 else 0.0
    ratio = -offset / amp
    if ratio >= 1.0:
        return 0.0
    if ratio <= -1.0:
        return 1.0
    alpha = math.acos(ratio)
    return (alpha + a * math.cos(beta) * math.sin(alpha)) / math.pi


def _positive_part_mean(offset: float, amp: float) -> float:
    """Mean of max(offset + amp*cos(psi), 0) over uniform psi, amp >= 0."""
    if amp <= 0.0:
        return max(offset, 0.0)
    if offset >= amp:
        return offset
    if offset <= -amp:
        return 0.0
    alpha = math.acos(-offset / amp)
    return (offset * alpha + amp * math.sin(alpha)) / math.pi


class _PairLaw:
    """Exact two-point functionals of a generator at grid indices (s, t)."""

    def __init__(self, spec: GeneratorSpec, grid: Grid, s_index: int, t_index: int,
                 mc_replicates: int = 100_000, rng: Stream | int = 0):
        self.spec = spec
        if is_enumerable(spec):
            weights, paths = atom_decomposition(spec, grid)
            self.weights = weights
            self.zs = paths[:, s_index]
            self.zt = paths[:, t_index]
            self.mode = "atoms"
        elif isinstance(spec, RandomCosine):
            self.a = spec.a
            self.alpha_s = TWO_PI * float(grid.points[s_index])
            self.alpha_t = TWO_PI * float(grid.points[t_index])
            self.mode = "cosine"
        elif isinstance(spec, LogisticFidis):
            gen = as_generator(rng)
            values, _ = generators.sample_generator_matrix(spec, grid, mc_replicates, gen)
            self.weights = np.full(mc_replicates, 1.0 / mc_replicates)
            self.zs = values[:, s_index]
            self.zt = values[:, t_index]
            self.mode = "atoms"
        else:
            raise ValueError(f"unsupported generator {spec!r}")

    def norm2(self, u: float, v: float) -> float:
        """E max(u Z_s, v Z_t) for u, v >= 0."""
        if self.mode == "atoms":
            return float(np.sum(self.weights * np.maximum(u * self.zs, v * self.zt)))
        # max(u Zs, v Zt) = v Zt + (u Zs - v Zt)^+ and E(Zt) = 1
        zdiff = u * cmath.exp(1j * self.alpha_s) - v * cmath.exp(1j * self.alpha_t)
        return v + _positive_part_mean(u - v, self.a * abs(zdiff))

    def event_expect(self, x: float, y: float) -> float:
        """E(1_{y Z_t <= (x+y) Z_s} Z_t), weak comparison as stated."""
        if self.mode == "atoms":
            hit = y * self.zt <= (x + y) * self.zs
            return float(np.sum(self.weights * self.zt * hit))
        zdiff = (x + y) * cmath.exp(1j * self.alpha_s) - y * cmath.exp(1j * self.alpha_t)
        return _arc_mean(self.alpha_t - cmath.phase(zdiff), self.a, x, self.a * abs(zdiff))

    def event_breakpoints(self, x: float) -> list[float]:
        """y values where the event indicator can switch (atom modes only)."""
        if self.mode != "atoms" or self.weights.size > MAX_QUAD_POINTS:
            return []
        pts = set()
        for zs, zt in zip(self.zs, self.zt):
            if zt != zs:
                pts.add(x * zs / (zt - zs))
        return sorted(pts)


def conditional_fdf(spec: GeneratorSpec, f: EFunction, t0_index: int, x: float,
                    replicates: int = 100_000, rng: Stream | int = 0) -> float:
    """Conditional probability that the path stays below f given the value x at t0.

    Requires f(t0) = 0 and x < 0.  The value is
    exp(-(x + norm(f + x 1_{t0}))) * E(1_{sup |f| Z <= |x| Z_{t0}} Z_{t0});
    enumerable generators evaluate both factors exactly, the cosine generator
    by phase quadrature, the unbounded one by shared-sample Monte Carlo.
    Evaluation points x should avoid the finitely many tie values of
    |x| Z_{t0} against atom sups, where the conditional law has null-set
    ambiguity.
    """
    if f.value_at(t0_index) != 0.0:
        raise ValueError("conditional law requires f(t0) = 0")
    if not x < 0:
        raise ValueError("conditioning value must be negative")
    g = f.with_override(t0_index, x)
    eff = np.abs(f.effective())
    g_eff = np.abs(g.effective())

    if is_enumerable(spec):
        weights, paths = atom_decomposition(spec, f.grid)
        norm = math.fsum(w * s for w, s in zip(weights, (g_eff[None, :] * paths).max(axis=1)))
        sup_f = (eff[None, :] * paths).max(axis=1)
        hit = sup_f <= abs(x) * paths[:, t0_index]
        expect = math.fsum(w * z for w, z, h in zip(weights, paths[:, t0_index], hit) if h)
        return math.exp(-(x + norm)) * expect

    if isinstance(spec, RandomCosine):
        a = spec.a
        t = f.grid.points

        def z_path(theta: float) -> np.ndarray:
            return 1.0 + a * np.cos(TWO_PI * t + theta)

        norm = _quad(lambda th: float((g_eff * z_path(th)).max()) / TWO_PI,
                     0.0, TWO_PI, 1e-10)

        def indicator(th: float) -> float:
            z = z_path(th)
            return z[t0_index] / TWO_PI if (eff * z).max() <= abs(x) * z[t0_index] else 0.0

        expect = _quad(indicator, 0.0, TWO_PI, 1e-8)
        return math.exp(-(x + norm)) * expect

    # shared samples estimate both factors for unbounded specs
    gen = as_generator(rng)
    values, _ = generators.sample_generator_matrix(spec, f.grid, replicates, gen)
    norm = float((g_eff[None, :] * values).max(axis=1).mean())
    sup_f = (eff[None, :] * values).max(axis=1)
    expect = float((values[:, t0_index] * (sup_f <= abs(x) * values[:, t0_index])).mean())
    return math.exp(-(x + norm)) * expect


def increment_df(spec: GeneratorSpec, grid: Grid, s_index: int, t_index: int, x: float,
                 quad: QuadratureSpec = QuadratureSpec(),
                 replicates: int = 100_000, rng: Stream | int = 0) -> float:
    """P(path(s) - path(t) <= x) for an exact max-stable path.

    Integrates exp(-norm2(|x+y|, |y|)) * E(1_{y Z_t <= (x+y) Z_s} Z_t) over
    the conditioning value y up to min(0, -x); for x >= 0 the closed term
    1 - e^{-x} is added.  The truncated mass below the cutoff is at most
    exp(cutoff) <= abs_tol.
    """
    if s_index == t_index:
        raise ValueError("increment requires two distinct grid points")
    pair = _PairLaw(spec, grid, s_index, t_index, replicates, rng)

    def integrand(y: float) -> float:
        return math.exp(-pair.norm2(abs(x + y), abs(y))) * pair.event_expect(x, y)

    lo = quad.lower_cutoff
    hi = 0.0 if x < 0.0 else -x
    closed = 0.0 if x < 0.0 else 1.0 - math.exp(-x)
    if hi <= lo:
        return closed
    value = _quad(integrand, lo, hi, quad.abs_tol, limit=quad.max_subdivisions,
                  points=pair.event_breakpoints(x))
    return min(max(closed + value, 0.0), 1.0)


def zeta_df(spec: GeneratorSpec, t0_index: int, x: float) -> float:
    """F(x) = E(1_{Z'_{t0} <= x Z_{t0}} Z_{t0}) for generators with a derivative.

    For the uniform-phase cosine generator the law does not depend on t0.
    """
    if not has_derivative(spec):
        raise ValueError("generator not distributionally differentiable in catalog")
    if isinstance(spec, Constant):
        return 1.0 if x >= 0.0 else 0.0
    a = spec.a
    # event: x + a*(x cos(phi) + 2 pi sin(phi)) >= 0 over the uniform phase
    r = math.hypot(x, TWO_PI)
    return _arc_mean(math.atan2(TWO_PI, x), a, x, a * r)


def sample_zeta(spec: GeneratorSpec, t0_index: int, count: int, rng) -> np.ndarray:
    """Draws from zeta_df: phase proposals accepted with probability Z / (1 + a)."""
    if not has_derivative(spec):
        raise ValueError("generator not distributionally differentiable in catalog")
    gen = as_generator(rng)
    if isinstance(spec, Constant):
        return np.zeros(count)
    a = spec.a
    chunks: list[np.ndarray] = []
    have = 0
    while have < count:
        need = count - have
        phi = gen.uniform(0.0, TWO_PI, size=2 * need + 16)
        z = 1.0 + a * np.cos(phi)
        keep = gen.random(phi.size) * (1.0 + a) <= z
        zeta = -TWO_PI * a * np.sin(phi[keep]) / z[keep]
        chunks.append(zeta)
        have += zeta.size
    return np.concatenate(chunks)[:count]


def derivative_df(spec: GeneratorSpec, t0_index: int, x: float,
                  quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Limit df H(x) of the difference quotients of the path at t0.

    H(x) integrates e^y F(x / |y|) over y < 0, with F = zeta_df.
    """
    if not has_derivative(spec):
        raise ValueError("generator not distributionally differentiable in catalog")
    if isinstance(spec, Constant):
        return 1.0 if x >= 0.0 else 0.0

    def integrand(y: float) -> float:
        return math.exp(y) * zeta_df(spec, t0_index, x / abs(y))

    value = _quad(integrand, quad.lower_cutoff, 0.0, quad.abs_tol,
                  limit=quad.max_subdivisions)
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True, eq=False)
class DerivativeLaw:
    """Derivative law H and auxiliary df F tabulated on an x grid."""

    xs: np.ndarray
    H: np.ndarray
    F: np.ndarray
    mean: float

    def __post_init__(self) -> None:
        xs = _readonly(np.asarray(self.xs, dtype=float))
        H = _readonly(np.asarray(self.H, dtype=float))
        F = _readonly(np.asarray(self.F, dtype=float))
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "F", F)
        if not (xs.shape == H.shape == F.shape):
            raise ValueError("xs, H, F must have matching shapes")
        for name, arr in (("H", H), ("F", F)):
            if np.any(arr < -1e-9) or np.any(arr > 1.0 + 1e-9):
                raise ValueError(f"{name} must lie in [0, 1]")
            if np.any(np.diff(arr) < -1e-9):
                raise ValueError(f"{name} must be nondecreasing")


def derivative_law(spec: GeneratorSpec, t0_index: int, xs,
                   quad: QuadratureSpec = QuadratureSpec()) -> DerivativeLaw:
    """Tabulate H and F on xs and attach the tail-integrated mean of H."""
    xs = np.asarray(xs, dtype=float)
    H = np.array([derivative_df(spec, t0_index, float(v), quad) for v in xs])
    F = np.array([zeta_df(spec, t0_index, float(v)) for v in xs])
    return DerivativeLaw(xs, H, F, _law_mean(spec, t0_index, quad))


def _tail_cut(spec: RandomCosine, tol: float) -> float:
    """x beyond which both tails of the derivative law are below tol.

    For amplitude a < 1 the slope ratio Z'/Z is bounded by 2 pi a / (1 - a)
    and the tails decay exponentially; at a = 1 the ratio has a cubic tail and
    the cut switches to the corresponding power bound.
    """
    a = spec.a
    if a < 1.0:
        rate = (1.0 - a) / (TWO_PI * a)
        return max(10.0, -math.log(tol) / rate)
    return max(50.0, (2.0 / tol) ** 0.5)


def _law_mean(spec: GeneratorSpec, t0_index: int, quad: QuadratureSpec) -> float:
    """Mean of H by tail integration: int_0^inf (1 - H(x)) - int_0^inf H(-x)."""
    if isinstance(spec, Constant):
        return 0.0
    tol = max(quad.abs_tol, 1e-8)
    cut = _tail_cut(spec, tol)
    upper = _quad(lambda u: 1.0 - derivative_df(spec, t0_index, u, quad),
                  0.0, cut, tol, limit=quad.max_subdivisions)
    lower = _quad(lambda u: derivative_df(spec, t0_index, -u, quad),
                  0.0, cut, tol, limit=quad.max_subdivisions)
    return upper - lower


@dataclass(frozen=True)
class DerivativeMeans:
    """The three mean diagnostics of the derivative law."""

    zeta_mean: float
    zeta_se: float
    generator_derivative_mean: float
    law_mean: float


def derivative_mean(spec: GeneratorSpec, t0_index: int, replicates: int = 100_000,
                    rng: Stream | int = 0,
                    quad: QuadratureSpec = QuadratureSpec()) -> DerivativeMeans:
    """Sampled mean of the auxiliary df, exact E(Z'), and tail-integrated mean of H."""
    if not has_derivative(spec):
        raise ValueError("generator not distributionally differentiable in catalog")
    draws = sample_zeta(spec, t0_index, replicates, rng)
    zeta_mean = float(draws.mean())
    zeta_se = float(draws.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    if isinstance(spec, Constant):
        ez = 0.0
    else:
        ez = _quad(lambda th: -spec.a * math.sin(th), 0.0, TWO_PI, 1e-12)
    return DerivativeMeans(zeta_mean, zeta_se, ez, _law_mean(spec, t0_index, quad))
