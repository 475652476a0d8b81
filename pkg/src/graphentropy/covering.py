"""Box covers of product spaces: exact minimum covers on tiny instances and
the random-box construction that realizes the upper bound.

A box is J_1 x ... x J_ell with every J_i in the family. N_ell(lambda) is
the least number of boxes whose union has product mass >= 1 - lambda, and
the reported rate is log(N) / ell.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass

import numpy as np

from .core import (
    Distribution,
    DomainError,
    PackingPoint,
    SetSystem,
    SizeError,
    as_vector,
    evaluate_packing_point,
    phi,
)
from .rng import stream
from .solver import _point_vector, _resolve_pi, fw_gap, set_scores

MASS_EPS = 1e-12
CHUNK = 1024
BIT_BLOCK = 64


@dataclass(frozen=True)
class CoverReport:
    ell: int
    lam: float
    boxes_used: int | None
    covered_mass: float
    rate: float
    method: str
    success: bool = True
    std_error: float = 0.0
    log_boxes: float | None = None

    def row(self) -> dict:
        return {"ell": self.ell, "M": self.boxes_used, "covered_mass": self.covered_mass,
                "rate": self.rate}


def _check_lambda(lam: float):
    if not 0 < lam < 1:
        raise DomainError("lambda must lie in (0, 1)")


def _maximal_restricted_sets(system: SetSystem, support: np.ndarray) -> np.ndarray:
    """Family sets restricted to the support, without empties, duplicates or dominated sets."""
    rows = {tuple(r) for r in (system.incidence[:, support] > 0) if r.any()}
    rows = [np.array(r) for r in rows]
    keep = [r for r in rows if not any((o is not r) and np.all(o >= r) and np.any(o > r) for o in rows)]
    keep.sort(key=lambda r: (-r.sum(), tuple(~r)))
    return np.array(keep, dtype=bool).reshape(len(keep), int(support.sum()))


def exact_min_cover(system: SetSystem, ell: int, lam: float, max_boxes: int = 10**6,
                    max_cells: int = 5 * 10**7, max_nodes: int = 200_000) -> CoverReport:
    """Minimum number of ell-dimensional boxes covering mass >= 1 - lam.

    Branch and bound over the non-dominated candidate boxes, seeded by the
    greedy cover and pruned with the bound "the k best remaining boxes
    must supply the missing mass". When even all boxes together fall short
    (part of the support lies in no set) the report has ``success=False``.
    """
    _check_lambda(lam)
    if ell < 1:
        raise DomainError("ell must be at least 1")
    pi = system.universe
    if len(pi) > 10:
        raise SizeError("exact covers are limited to universes of at most 10 atoms")
    support = pi.support
    p = pi.masses[support]
    sets = _maximal_restricted_sets(system, support)
    target = 1.0 - lam
    reach = float(p[sets.any(axis=0)].sum()) ** ell if len(sets) else 0.0
    if reach < target - MASS_EPS:
        return CoverReport(ell, lam, None, reach, math.inf, "exact", success=False)

    n_boxes = len(sets) ** ell
    n_points = len(p) ** ell
    if n_boxes > max_boxes or n_boxes * n_points > max_cells:
        raise SizeError(f"{n_boxes} candidate boxes over {n_points} points is too large")

    points = np.array(list(itertools.product(range(len(p)), repeat=ell))).reshape(n_points, ell)
    w = np.prod(p[points], axis=1)
    boxes = np.array(list(itertools.product(range(len(sets)), repeat=ell))).reshape(n_boxes, ell)
    cov = np.ones((n_boxes, n_points), dtype=bool)
    for i in range(ell):
        cov &= sets[boxes[:, i]][:, points[:, i]]

    gains0 = cov @ w
    order = np.argsort(-gains0, kind="stable")
    cov = cov[order]

    # greedy upper bound
    covered = np.zeros(n_points, dtype=bool)
    mass = 0.0
    best = 0
    while mass < target - MASS_EPS:
        g = cov[:, ~covered] @ w[~covered]
        k = int(np.argmax(g))
        covered |= cov[k]
        mass = float(w[covered].sum())
        best += 1
    best_mass = mass
    nodes = 0

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10_000))

    def dfs(start, covered, mass, count):
        nonlocal best, best_mass, nodes
        nodes += 1
        if nodes > max_nodes:
            raise SizeError("branch and bound exceeded its node budget")
        if mass >= target - MASS_EPS:
            if count < best:
                best, best_mass = count, mass
            return
        if count + 1 >= best or start >= n_boxes:
            return
        free = ~covered
        gains = cov[start:, free] @ w[free]
        need = target - mass
        top = np.cumsum(np.sort(gains)[::-1])
        if top[-1] < need - MASS_EPS:
            return
        if count + int(np.searchsorted(top, need - MASS_EPS)) + 1 >= best:
            return
        for off in np.flatnonzero(gains > MASS_EPS):
            if count + 1 >= best:
                return
            j = start + int(off)
            dfs(j + 1, covered | cov[j], mass + float(gains[off]), count + 1)

    dfs(0, np.zeros(n_points, dtype=bool), 0.0, 0)
    return CoverReport(ell, lam, best, best_mass, math.log(best) / ell, "exact")


def greedy_cover_count(system: SetSystem, ell: int, lam: float, max_cells: int = 5 * 10**7) -> CoverReport:
    """Greedy box cover; an upper bound on N_ell when the exact search is too big."""
    _check_lambda(lam)
    pi = system.universe
    support = pi.support
    p = pi.masses[support]
    sets = _maximal_restricted_sets(system, support)
    n_points = len(p) ** ell
    n_boxes = len(sets) ** ell
    if n_boxes * n_points > max_cells:
        raise SizeError("instance too large for the greedy cover")
    points = np.array(list(itertools.product(range(len(p)), repeat=ell))).reshape(n_points, ell)
    w = np.prod(p[points], axis=1)
    boxes = np.array(list(itertools.product(range(len(sets)), repeat=ell))).reshape(n_boxes, ell)
    cov = np.ones((n_boxes, n_points), dtype=bool)
    for i in range(ell):
        cov &= sets[boxes[:, i]][:, points[:, i]]
    covered = np.zeros(n_points, dtype=bool)
    count = 0
    while w[covered].sum() < 1 - lam - MASS_EPS:
        g = cov[:, ~covered] @ w[~covered]
        if g.max() <= 0:
            return CoverReport(ell, lam, None, float(w[covered].sum()), math.inf, "greedy", success=False)
        covered |= cov[int(np.argmax(g))]
        count += 1
    return CoverReport(ell, lam, count, float(w[covered].sum()), math.log(count) / ell, "greedy")


def typical_set_check(pi: Distribution, a, delta: float, sequence) -> bool:
    """True iff the mean of log a(x_i) along ``sequence`` is within delta of -phi(a)."""

    vec = as_vector(pi, a)
    idx = []
    for sym in sequence:
        i = pi.index.get(str(sym))
        if i is None or pi.masses[i] <= 0:
            raise DomainError(f"symbol {sym!r} is outside the support")
        if vec[i] <= 0:
            raise DomainError(f"a vanishes at {sym!r}")
        idx.append(i)
    if not idx:
        raise DomainError("empty sequence")
    mean_log = float(np.mean(np.log(vec[idx])))
    return abs(mean_log + phi(pi, vec)) <= delta


def rate_lower_bound(system: SetSystem, point, ell: int, lam: float, witness_tol: float = 1e-9) -> float:
    """Rigorous lower bound on log(N_ell) / ell from a packing point.

    With g the antiblocker gap at ``point`` and b = min(1, a (1 + g)), the
    weights f = 1/b satisfy sum_{x in J} pi(x) f(x) <= 1 + witness_tol for
    every family set, so each box carries at most (1 + witness_tol)^ell of
    the product weight prod f(x_i). Points where that product is at least
    exp(ell (phi(b) - delta)) therefore need that many boxes apiece, and
    Chebyshev bounds the mass of the remaining points by Var / (ell delta^2),
    and that mass is zero once delta exceeds the spread of log f below its mean.
    The best delta on a grid is used. Returns -inf when no delta helps.
    """
    _check_lambda(lam)
    pi = _resolve_pi(system, None)
    a = _point_vector(system, point)
    gap = max(fw_gap(system, pi, a), 0.0)
    if not math.isfinite(gap):
        return -math.inf
    b = np.minimum(1.0, a * (1.0 + gap))
    slack = float(set_scores(system, pi, b).max()) - 1.0
    if slack > witness_tol:
        return -math.inf
    s = pi.support
    p = pi.masses[s]
    logf = -np.log(b[s])
    mean = float(p @ logf)
    var = float(p @ (logf - mean) ** 2)
    spread = max(mean - float(logf.min()), 0.0)  # beyond this no point falls short
    best = -math.inf
    for delta in np.concatenate(([spread], np.geomspace(1e-6, max(mean, 1e-6) + 1.0, 400))):
        if delta >= spread:
            bad = 0.0
        else:
            bad = 1.0 if delta == 0 else min(1.0, var / (ell * delta * delta))
        good = 1.0 - lam - bad
        if good <= 0:
            continue
        bound = mean - delta + (math.log(good) - ell * math.log1p(max(slack, 0.0))) / ell
        best = max(best, bound)
    return best


@dataclass(frozen=True)
class CountableFamilySampler:
    """Independent events J_1, J_2, ... with masses m_1, m_inf, m_inf, ...

    A point is an infinite sequence of independent bits, bit k set with
    probability m_k, and J_k is the event that bit k is set. Boxes draw each
    coordinate's index from the mixture eps * geometric(1/2) + (1 - eps) *
    uniform over the first n indices. With ``first_weight`` the uniform
    part instead puts that weight on J_1 and spreads the rest over J_2..J_{n+1}.
    """

    n: int
    eps: float
    m1: float = 0.5
    m_inf: float = 0.5
    first_weight: float | None = None
    kind: str = "independent_events"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if not 0 <= self.eps <= 1:
            raise DomainError("eps must lie in [0, 1]")
        for m in (self.m1, self.m_inf):
            if not 0 < m < 1:
                raise DomainError("event masses must lie in (0, 1)")
        if self.first_weight is not None and not 0 <= self.first_weight <= 1:
            raise DomainError("first_weight must lie in [0, 1]")

    @property
    def span(self) -> int:
        """Largest index reached by the uniform part of the mixture."""
        return self.n if self.first_weight is None else self.n + 1

    def event_masses(self, K: int) -> np.ndarray:
        m = np.full(K, self.m_inf)
        m[0] = self.m1
        return m

    def mixture_weights(self, K: int) -> np.ndarray:
        """Weights of J_1..J_K (the geometric tail past K is dropped)."""
        k = np.arange(1, K + 1)
        w = self.eps * 0.5 ** k
        u = np.zeros(K)
        if self.first_weight is None:
            u[: min(self.n, K)] = 1.0 / self.n
        else:
            u[0] = self.first_weight
            u[1: min(self.n + 1, K)] = (1.0 - self.first_weight) / self.n
        return w + (1.0 - self.eps) * u

    def sample_indices(self, rng: np.random.Generator, size) -> np.ndarray:
        """1-based event indices drawn from the mixture."""
        geo = rng.geometric(0.5, size=size)
        if self.first_weight is None:
            uni = rng.integers(1, self.n + 1, size=size)
        else:
            first = rng.random(size) < self.first_weight
            uni = np.where(first, 1, rng.integers(2, self.n + 2, size=size))
        pick_geo = rng.random(size) < self.eps
        return np.where(pick_geo, geo, uni)

    def bits(self, seed: int, chunk: int, block: int, rows: int, ell: int) -> np.ndarray:
        """Bits k in [64*block + 1, 64*block + 64] of the points in one chunk."""
        rng = stream(seed, "bits", chunk, block)
        k0 = BIT_BLOCK * block
        m = self.event_masses(k0 + BIT_BLOCK)[k0:]
        return rng.random((rows, ell, BIT_BLOCK)) < m


def _chunks(total: int):
    for c, start in enumerate(range(0, total, CHUNK)):
        yield c, min(CHUNK, total - start)


def _finite_weights(system: SetSystem, weights) -> np.ndarray:
    if isinstance(weights, PackingPoint):
        return weights.q
    return evaluate_packing_point(system, weights).q


def _finite_points(system: SetSystem, ell: int, trials: int, seed: int) -> np.ndarray:
    p = system.universe.masses
    out = []
    for c, rows in _chunks(trials):
        out.append(stream(seed, "points", c).choice(len(p), size=(rows, ell), p=p))
    return np.vstack(out)


def _log_point_probs_finite(system, q, points) -> np.ndarray:
    a = q @ system.incidence
    with np.errstate(divide="ignore"):
        return np.log(a)[points].sum(axis=1)


def _log_point_probs_countable(sampler: CountableFamilySampler, ell: int, trials: int, seed: int) -> np.ndarray:
    K = sampler.span + BIT_BLOCK
    n_blocks = -(-K // BIT_BLOCK)
    w = sampler.mixture_weights(n_blocks * BIT_BLOCK)
    out = []
    for c, rows in _chunks(trials):
        a = np.zeros((rows, ell))
        for b in range(n_blocks):
            a += sampler.bits(seed, c, b, rows, ell) @ w[b * BIT_BLOCK:(b + 1) * BIT_BLOCK]
        with np.errstate(divide="ignore"):
            out.append(np.log(a).sum(axis=1))
    return np.concatenate(out)


def _log_hazard(logP: np.ndarray) -> np.ndarray:
    """log(-log(1 - P)) for P = exp(logP); +inf where P = 1."""
    out = logP.copy()
    big = logP > -18
    P = np.exp(logP[big])
    with np.errstate(divide="ignore"):
        out[big] = np.log(-np.log1p(-np.minimum(P, 1.0)))
    return out


def _coverage_expected(loghaz: np.ndarray, log_m: float) -> tuple[float, float]:
    with np.errstate(over="ignore"):
        prob = -np.expm1(-np.exp(loghaz + log_m))
    return float(prob.mean()), float(prob.std(ddof=1) / math.sqrt(prob.size)) if prob.size > 1 else 0.0


def _grid_search(covered, target: float, resolution: float, k_max: int):
    """Smallest k in [0, k_max] with covered(k) >= target, assuming monotonicity."""
    if covered(k_max) < target:
        return None
    lo, hi = -1, k_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if covered(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _m_of(k: int, resolution: float) -> float:
    return max(1.0, math.ceil(resolution ** k - 1e-9)) if k * math.log(resolution) < 700 else resolution ** k


def random_cover_rate(source, weights=None, ell: int = 1, lam: float = 0.5, trials: int = 10_000,
                      seed: int = 0, mode: str = "auto", resolution: float = 1.05,
                      explicit_limit: int = 5_000) -> CoverReport:
    """Rate of the random-box cover at block length ``ell``.

    ``source`` is a SetSystem (boxes drawn coordinatewise from ``weights``
    over the family) or a CountableFamilySampler. ``trials`` IID test
    points estimate the covered mass. The box count M is searched on the
    grid ceil(resolution**k).

    mode="explicit" draws M boxes and tests every point against them.
    mode="expected" uses the fact that one random box covers x with
    probability prod_i a(x_i), so M independent boxes cover it with
    probability 1 - (1 - prod a)^M; this is the only feasible route once M
    is astronomically large. "auto" picks explicit when M is small.
    """
    _check_lambda(lam)
    if ell < 1 or trials < 2:
        raise DomainError("need ell >= 1 and trials >= 2")
    if mode not in ("auto", "explicit", "expected"):
        raise DomainError(f"unknown mode {mode!r}")
    target = 1.0 - lam
    countable = isinstance(source, CountableFamilySampler)
    if countable:
        logP = _log_point_probs_countable(source, ell, trials, seed)
    else:
        q = _finite_weights(source, weights)
        points = _finite_points(source, ell, trials, seed)
        logP = _log_point_probs_finite(source, q, points)

    loghaz = _log_hazard(logP)
    finite = np.isfinite(logP)
    if not finite.any():
        return CoverReport(ell, lam, None, 0.0, math.inf, mode, success=False)
    log_cap = float(-logP[finite].min()) + 40.0
    k_max = int(math.ceil(log_cap / math.log(resolution)))

    def cov_expected(k):
        return _coverage_expected(loghaz, k * math.log(resolution))[0]

    k = _grid_search(cov_expected, target, resolution, k_max)
    use_explicit = mode == "explicit" or (mode == "auto" and k is not None
                                          and _m_of(k, resolution) <= explicit_limit)
    if use_explicit:
        if countable:
            first = _first_hits_countable(source, ell, trials, seed, explicit_limit)
        else:
            first = _first_hits_finite(source, q, points, seed, explicit_limit)
        k_lim = int(math.floor(math.log(explicit_limit) / math.log(resolution)))

        def cov_explicit(k):
            return float(np.mean(first < _m_of(k, resolution)))

        k = _grid_search(cov_explicit, target, resolution, k_lim)
        if k is None:
            hit = first < explicit_limit
            return CoverReport(ell, lam, None, float(hit.mean()), math.inf, "explicit", success=False,
                               std_error=float(hit.std(ddof=1) / math.sqrt(trials)))
        M = int(_m_of(k, resolution))
        hit = first < M
        return CoverReport(ell, lam, M, float(hit.mean()), math.log(M) / ell, "explicit",
                           std_error=float(hit.std(ddof=1) / math.sqrt(trials)), log_boxes=math.log(M))

    if k is None:
        mass, se = _coverage_expected(loghaz, log_cap)
        return CoverReport(ell, lam, None, mass, math.inf, "expected", success=False, std_error=se)
    log_m = math.log(_m_of(k, resolution)) if k * math.log(resolution) < 700 else k * math.log(resolution)
    mass, se = _coverage_expected(loghaz, log_m)
    M = int(round(math.exp(log_m))) if log_m < 700 else None
    return CoverReport(ell, lam, M, mass, log_m / ell, "expected", std_error=se, log_boxes=log_m)


def _first_hits_finite(system: SetSystem, q: np.ndarray, points: np.ndarray, seed: int, limit: int) -> np.ndarray:
    """Index of the first box (in draw order) covering each point; ``limit`` if none does."""
    member = system.incidence > 0
    first = np.full(len(points), limit)
    open_ = np.arange(len(points))
    for c, rows in _chunks(limit):
        boxes = stream(seed, "boxes", c).choice(len(q), size=(rows, points.shape[1]), p=q)
        for r in range(rows):
            if open_.size == 0:
                return first
            hit = member[boxes[r][None, :], points[open_]].all(axis=1)
            first[open_[hit]] = c * CHUNK + r
            open_ = open_[~hit]
    return first


def _first_hits_countable(sampler: CountableFamilySampler, ell: int, trials: int, seed: int,
                          limit: int) -> np.ndarray:
    boxes = np.vstack([sampler.sample_indices(stream(seed, "boxes", c), (rows, ell))
                       for c, rows in _chunks(limit)])
    n_blocks = -(-int(boxes.max()) // BIT_BLOCK)
    first = np.full(trials, limit)
    base = 0
    for c, rows in _chunks(trials):
        bits = np.concatenate([sampler.bits(seed, c, b, rows, ell) for b in range(n_blocks)], axis=2)
        open_ = np.arange(rows)
        cols = np.arange(ell)
        for r in range(limit):
            if open_.size == 0:
                break
            hit = bits[open_][:, cols, boxes[r] - 1].all(axis=1)
            first[base + open_[hit]] = r
            open_ = open_[~hit]
        base += rows
    return first


def single_box_coverage(source, weights=None, ell: int = 1, trials: int = 100_000,
                        seed: int = 0) -> dict:
    """Empirical probability that one random box covers one random point.

    Each trial draws a fresh point and a fresh box. The exact conditional
    probability given the point is prod_i a(x_i); the returned
    ``expected`` averages it over the same points, so the two should agree
    within a few ``std_error``.
    """
    if isinstance(source, CountableFamilySampler):
        raise DomainError("single_box_coverage supports finite systems")
    q = _finite_weights(source, weights)
    points = _finite_points(source, ell, trials, seed)
    member = source.incidence > 0
    boxes = np.vstack([stream(seed, "boxes", c).choice(len(q), size=(rows, ell), p=q)
                       for c, rows in _chunks(trials)])
    hits = member[boxes, points].all(axis=1)
    expected = np.exp(_log_point_probs_finite(source, q, points))
    diff = hits - expected
    return {
        "empirical": float(hits.mean()),
        "expected": float(expected.mean()),
        "std_error": float(diff.std(ddof=1) / math.sqrt(trials)),
        "trials": trials,
    }


def independent_events_system(masses) -> SetSystem:
    """Finite system of independent events J_1..J_n over the 2^n bit patterns."""
    masses = np.asarray(masses, dtype=float)
    n = masses.size
    if n > 10:
        raise SizeError("at most 10 events")
    patterns = list(itertools.product((0, 1), repeat=n))
    ids = tuple("".join(map(str, pat)) for pat in patterns)
    probs = np.array([np.prod(np.where(np.array(pat) == 1, masses, 1 - masses)) for pat in patterns])
    family = tuple(frozenset(i for i, pat in zip(ids, patterns) if pat[k]) for k in range(n))
    return SetSystem(Distribution(ids, probs / probs.sum()), family)
