"""Step graphons, their quotient set systems, and closed-form entropies of
the distance-based and arc examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DomainError,
    Distribution,
    SetSystem,
    _bits,
    _frozen,
    _order_key,
    maximal_cliques_bits,
)


@dataclass(frozen=True)
class StepGraphon:
    """Graphon constant on the blocks of a finite partition.

    Only the zero set matters for independence, so ``support`` is boolean:
    True where W > 0 on that block pair.
    """

    block_masses: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)

    def __post_init__(self):
        masses = np.asarray(self.block_masses, dtype=float).reshape(-1)
        support = np.asarray(self.support) > 0
        m = masses.size
        if m == 0:
            raise DomainError("graphon needs at least one block")
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-12:
            raise DomainError("block masses must be nonnegative and sum to 1")
        if support.shape != (m, m):
            raise DomainError(f"support must be {m}x{m}, got {support.shape}")
        if not np.array_equal(support, support.T):
            raise DomainError("support must be symmetric")
        object.__setattr__(self, "block_masses", _frozen(masses))
        object.__setattr__(self, "support", _frozen(support))

    @classmethod
    def from_values(cls, masses, values) -> "StepGraphon":
        """Build from block values of W in [0, 1]; positive values become support."""
        values = np.asarray(values, dtype=float)
        if np.any(values < 0) or np.any(values > 1):
            raise DomainError("graphon values must lie in [0, 1]")
        return cls(np.asarray(masses, dtype=float), values > 0)

    def __len__(self) -> int:
        return self.block_masses.size

    def block_ids(self) -> tuple[str, ...]:
        return tuple(f"B{i}" for i in range(len(self)))

    def permuted(self, perm) -> "StepGraphon":
        perm = np.asarray(perm)
        return StepGraphon(self.block_masses[perm], self.support[np.ix_(perm, perm)])

    def split_block(self, i: int) -> "StepGraphon":
        """Split block ``i`` into two equal halves with the same support pattern."""
        m = len(self)
        order = list(range(m)) + [i]
        masses = self.block_masses[order].copy()
        masses[i] /= 2
        masses[m] = masses[i]
        return StepGraphon(masses, self.support[np.ix_(order, order)])


def quotient_system(w: StepGraphon) -> SetSystem:
    """Maximal independent block sets of ``w`` as a set system over the blocks.

    A block with W > 0 on its own diagonal belongs to no independent set.
    """
    m = len(w)
    ids = w.block_ids()
    universe = Distribution(ids, w.block_masses.copy())
    loopfree = 0
    compat = [0] * m
    for i in range(m):
        if not w.support[i, i]:
            loopfree |= 1 << i
    for i in range(m):
        row = 0
        for j in np.flatnonzero(~w.support[i]):
            if j != i:
                row |= 1 << int(j)
        compat[i] = row & loopfree
    masks = sorted(maximal_cliques_bits(compat, loopfree), key=_order_key)
    masks = [mk for mk in masks if mk]
    if not masks:
        # no independent blocks at all; keep the family non-empty with a null set
        return SetSystem(universe, (frozenset(),), "graphon-quotient")
    family = tuple(frozenset(ids[i] for i in _bits(mk)) for mk in masks)
    return SetSystem(universe, family, "graphon-quotient")


def circle_graphon_entropy(c: float) -> float:
    """Entropy of the circle graphon (distinguishable iff arc distance > c), uniform measure."""
    if not 0 < c < 0.5:
        raise DomainError("c must lie in (0, 1/2)")
    return -math.log(c)


def interval_graph_n(c: float) -> int:
    """The positive integer n with 1/(n+1) < c <= 1/n."""
    n = max(1, int(math.floor(1.0 / c)))
    while n > 1 and c > 1.0 / n:
        n -= 1
    while c <= 1.0 / (n + 1):
        n += 1
    return n


def interval_graphon_entropy(c: float) -> float:
    """Entropy of the unit-interval graphon (distinguishable iff |x - y| > c).

    Written as the convex combination w log(n+1) + (1 - w) log n with
    w = n(n+1)(1/n - c), so that c = 1/n collapses to log n exactly.
    """
    if not 0 < c <= 1:
        raise DomainError("c must lie in (0, 1]")
    n = interval_graph_n(c)
    w = n * (n + 1) * (1.0 / n - c)
    return w * math.log(n + 1) + (1.0 - w) * math.log(n)


def discretize_circle(c: float, m: int) -> StepGraphon:
    """m equal arcs; blocks i, j distinguishable iff their centers are more than c apart."""
    if m < 1:
        raise DomainError("m must be positive")
    if not 0 < c < 0.5:
        raise DomainError("c must lie in (0, 1/2)")
    k = np.arange(m)
    diff = np.abs(k[:, None] - k[None, :])
    dist = np.minimum(diff, m - diff) / m
    return StepGraphon(np.full(m, 1.0 / m), dist > c)


@dataclass(frozen=True)
class ArcDensity:
    """Piecewise-linear density on the circle [0, 1).

    Piece i covers [breakpoints[i], breakpoints[i+1]) (the last piece ends
    at 1) and there g(x) = intercepts[i] + slopes[i] * (x - breakpoints[i]).
    """

    breakpoints: np.ndarray = field(repr=False)
    intercepts: np.ndarray = field(repr=False)
    slopes: np.ndarray = field(repr=False)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        c0 = np.asarray(self.intercepts, dtype=float).reshape(-1)
        c1 = np.asarray(self.slopes, dtype=float).reshape(-1)
        if not (bp.size == c0.size == c1.size) or bp.size == 0:
            raise DomainError("breakpoints, intercepts and slopes must align")
        if bp[0] != 0.0 or np.any(np.diff(bp) <= 0) or bp[-1] >= 1.0:
            raise DomainError("breakpoints must start at 0, increase, and stay below 1")
        ends = c0 + c1 * (np.append(bp[1:], 1.0) - bp)
        if np.any(c0 < -1e-12) or np.any(ends < -1e-12):
            raise DomainError("density must be nonnegative")
        for name, arr in (("breakpoints", bp), ("intercepts", c0), ("slopes", c1)):
            object.__setattr__(self, name, _frozen(arr))
        if abs(self.total() - 1.0) > 1e-10:
            raise DomainError(f"density integrates to {float(self.total())!r}, not 1")

    @classmethod
    def piecewise_constant(cls, breakpoints, values) -> "ArcDensity":
        values = np.asarray(values, dtype=float)
        return cls(np.asarray(breakpoints, dtype=float), values, np.zeros_like(values))

    @classmethod
    def uniform(cls) -> "ArcDensity":
        return cls(np.array([0.0]), np.array([1.0]), np.array([0.0]))

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(np.append(self.breakpoints, 1.0))

    @property
    def end_values(self) -> np.ndarray:
        return self.intercepts + self.slopes * self.lengths

    def total(self) -> float:
        return float(np.sum(self.lengths * (self.intercepts + 0.5 * self.slopes * self.lengths)))

    def __call__(self, x):
        x = np.mod(np.asarray(x, dtype=float), 1.0)
        i = np.searchsorted(self.breakpoints, x, side="right") - 1
        return self.intercepts[i] + self.slopes[i] * (x - self.breakpoints[i])

    def cumulative(self, x):
        """Integral of g over [0, x] for x in [0, 1]."""
        x = np.asarray(x, dtype=float)
        L = self.lengths
        full = np.concatenate(([0.0], np.cumsum(L * (self.intercepts + 0.5 * self.slopes * L))))
        i = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, None)
        dx = x - self.breakpoints[i]
        return full[i] + dx * (self.intercepts[i] + 0.5 * self.slopes[i] * dx)


def smooth_density(g_hat: ArcDensity, alpha: float) -> ArcDensity:
    """Circular window average g(x) = (1/alpha) * integral of g_hat over (x, x + alpha).

    ``g_hat`` must be piecewise constant, so the result is piecewise linear.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if np.any(g_hat.slopes != 0):
        raise DomainError("smoothing is implemented for piecewise-constant densities")
    bp = g_hat.breakpoints
    cuts = np.unique(np.round(np.concatenate((bp, np.mod(bp - alpha, 1.0))), 15))
    cuts = cuts[cuts < 1.0]
    if cuts[0] != 0.0:
        cuts = np.concatenate(([0.0], cuts))

    def window(x):
        x = np.asarray(x, dtype=float)
        upper = x + alpha
        wrap = upper > 1.0
        val = np.where(wrap, g_hat.cumulative(np.minimum(upper, 1.0)) - g_hat.cumulative(x)
                       + g_hat.cumulative(np.where(wrap, upper - 1.0, 0.0)),
                       g_hat.cumulative(np.minimum(upper, 1.0)) - g_hat.cumulative(x))
        return val / alpha

    intercepts = window(cuts)
    # slope on each piece is (g_hat(x + alpha) - g_hat(x)) / alpha at the piece midpoint
    mids = cuts + 0.5 * np.diff(np.append(cuts, 1.0))
    slopes = (g_hat(mids + alpha) - g_hat(mids)) / alpha
    return ArcDensity(cuts, intercepts, slopes)


def _int_u_log_u(u0: float, u1: float) -> float:
    """Average of u log u over the linear ramp from u0 to u1."""

    def F(u):
        return 0.0 if u <= 0 else 0.5 * u * u * math.log(u) - 0.25 * u * u

    def f(u):
        return 0.0 if u <= 0 else u * math.log(u)

    du = u1 - u0
    if abs(du) <= 1e-7 * max(abs(u0), abs(u1), 1e-300):
        # Simpson is exact to O(du^4) here
        m = 0.5 * (u0 + u1)
        return (f(u0) + 4 * f(m) + f(u1)) / 6.0
    return (F(u1) - F(u0)) / du


def differential_entropy(g: ArcDensity) -> float:
    """-integral of g log g over the circle, exact on each linear piece."""
    total = 0.0
    for L, u0, u1 in zip(g.lengths, g.intercepts, g.end_values):
        total += L * _int_u_log_u(max(u0, 0.0), max(u1, 0.0))
    return -total


def arc_entropy(g: ArcDensity, alpha: float, smoothed: bool = False) -> dict:
    """Lower bound -integral g log g - log alpha for the arc system of length alpha.

    When ``smoothed`` is True the caller attests that ``g`` came from
    :func:`smooth_density` with the same ``alpha``; the bound is then exact.
    """
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    lower = differential_entropy(g) - math.log(alpha)
    return {"lower_bound": lower, "exact": lower if smoothed else None}


def independent_events_allbutone(m1: float, m_inf: float) -> float:
    """Entropy of independent events with masses m1, m_inf, m_inf, ...

    Rearranged as -log m_inf - m1 (log m1 - log m_inf)
    + (1 - m1)(log(1 - m_inf) - log(1 - m1)); with m1 = m_inf every
    correction term vanishes exactly.
    """
    if not (0 < m_inf <= m1 < 1):
        raise DomainError("need 1 > m1 >= m_inf > 0")
    return (-math.log(m_inf) - m1 * (math.log(m1) - math.log(m_inf))
            + (1 - m1) * (math.log1p(-m_inf) - math.log1p(-m1)))
