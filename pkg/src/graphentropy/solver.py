"""Conditional-gradient minimization of phi over the vertex-packing set.

The linear minimization oracle picks the family set maximizing
sum_{x in J} p_x / a_x, and the Frank-Wolfe duality gap at ``a`` is exactly
that maximum minus one. A gap ``g`` therefore certifies the bracket
``[phi(a) - log(1 + g), phi(a)]`` on the entropy: ``a * (1 + g)`` satisfies the
antiblocker condition, which gives the lower end.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import (
    Distribution,
    DomainError,
    EntropyError,
    PackingPoint,
    SetSystem,
    as_vector,
    check_unit_interval,
    evaluate_packing_point,
    phi,
    shannon_entropy,
)

log = logging.getLogger(__name__)

LINE_SEARCH_ITERS = 60
LINE_SEARCH_TOL = 1e-12
TIE_TOL = 1e-12


class ZeroOnSupportError(EntropyError, ValueError):
    """The packing function vanishes on an atom of positive mass."""

    def __init__(self, symbol: str, set_index: int | None = None):
        self.symbol = symbol
        self.set_index = set_index
        where = f" (member of set {set_index})" if set_index is not None else ""
        super().__init__(f"a vanishes on positive-mass atom {symbol!r}{where}")


@dataclass(frozen=True)
class EntropyCertificate:
    point: PackingPoint | None
    value: float
    gap: float
    bracket_lo: float
    bracket_hi: float
    iterations: int
    converged: bool
    history: tuple = field(default=(), repr=False, compare=False)

    @property
    def bracket(self) -> tuple[float, float]:
        return (self.bracket_lo, self.bracket_hi)

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def _resolve_pi(system: SetSystem, pi: Distribution | None) -> Distribution:
    if pi is None:
        return system.universe
    if pi.symbols != system.universe.symbols:
        if set(pi.symbols) != set(system.universe.symbols):
            raise DomainError("pi and the system universe have different symbols")
        pi = Distribution(system.universe.symbols,
                          np.array([pi.mass(s) for s in system.universe.symbols]))
    return pi


def _point_vector(system: SetSystem, point) -> np.ndarray:
    if isinstance(point, PackingPoint):
        return point.a
    return check_unit_interval(as_vector(system.universe, point))


def set_scores(system: SetSystem, pi: Distribution, a: np.ndarray) -> np.ndarray:
    """sum_{x in J, p_x > 0} p_x / a_x for every family set J (inf if a_x = 0)."""
    s = pi.support
    ratio = np.zeros(len(pi))
    with np.errstate(divide="ignore"):
        ratio[s] = pi.masses[s] / a[s]
    A = system.incidence
    scores = A @ np.where(np.isinf(ratio), 0.0, ratio)
    bad = np.isinf(ratio)
    if bad.any():
        scores = np.where(A[:, bad].any(axis=1), math.inf, scores)
    return scores


def _argmax_low(scores: np.ndarray) -> int:
    best = scores.max()
    if math.isinf(best):
        return int(np.flatnonzero(np.isinf(scores))[0])
    return int(np.flatnonzero(scores >= best - TIE_TOL * max(1.0, abs(best)))[0])


def fw_gap(system: SetSystem, pi: Distribution | None, point) -> float:
    """max_J sum_{x in J} p_x / a_x - 1; +inf when a is zero on positive mass."""
    pi = _resolve_pi(system, pi)
    a = _point_vector(system, point)
    if np.any(a[pi.support] == 0):
        return math.inf
    return float(set_scores(system, pi, a).max() - 1.0)


def lmo(system: SetSystem, pi: Distribution | None, a) -> int:
    """Index of the family set with the largest score (lowest index on ties)."""
    pi = _resolve_pi(system, pi)
    a = _point_vector(system, a)
    zero = np.flatnonzero(pi.support & (a == 0))
    if zero.size:
        x = zero[0]
        owners = np.flatnonzero(system.incidence[:, x])
        raise ZeroOnSupportError(pi.symbols[x], int(owners[0]) if owners.size else None)
    return _argmax_low(set_scores(system, pi, a))


def greedy_cover(system: SetSystem, pi: Distribution, rng: np.random.Generator | None = None) -> list[int] | None:
    """Greedy cover of the support of ``pi``; None if the support is not coverable.

    Ties go to the lowest index, or to a random one when ``rng`` is given.
    """
    A = system.incidence > 0
    need = pi.support.copy()
    if not np.all(A.any(axis=0)[need]):
        return None
    order = np.arange(len(system.family))
    if rng is not None:
        order = rng.permutation(order)
    chosen = []
    while need.any():
        gains = A[order][:, need].sum(axis=1)
        k = int(order[int(np.argmax(gains))])
        chosen.append(k)
        need &= ~A[k]
    return sorted(chosen) if chosen else [int(order[0])]


def _line_search(p: np.ndarray, a: np.ndarray, d: np.ndarray, tmax: float) -> float:
    """Minimize -sum p log(a + t d) over [0, tmax].

    The derivative is increasing in t; bisection on it, accelerated by
    Newton steps that stay inside the current bracket.
    """

    def deriv(t):
        val = a + t * d
        if np.any(val <= 0):
            return math.inf, math.inf
        r = d / val
        return float(-np.sum(p * r)), float(np.sum(p * r * r))

    h0, _ = deriv(0.0)
    if h0 >= 0:
        return 0.0
    hmax, _ = deriv(tmax)
    if hmax <= 0:
        return tmax
    lo, hi = 0.0, tmax
    t = 0.5 * tmax
    for _ in range(LINE_SEARCH_ITERS):
        h, hp = deriv(t)
        if h > 0:
            hi = t
        else:
            lo = t
        if hi - lo <= LINE_SEARCH_TOL * tmax or h == 0:
            break
        t_new = t - h / hp if hp > 0 and math.isfinite(h) else math.nan
        t = t_new if lo < t_new < hi else 0.5 * (lo + hi)
    return min(max(t, 0.0), tmax)


def _infinite_certificate() -> EntropyCertificate:
    return EntropyCertificate(None, math.inf, math.inf, math.inf, math.inf, 0, True)


def _certificate(system, pi, q, iterations, converged_tol, history) -> EntropyCertificate:
    q = np.clip(q, 0.0, None)
    q = q / q.sum()
    point = evaluate_packing_point(system, q)
    value = phi(pi, point.a)
    gap = fw_gap(system, pi, point)
    lo = value - math.log1p(max(gap, 0.0))
    return EntropyCertificate(point, value, gap, lo, value, iterations,
                              bool(gap <= converged_tol), tuple(history))


def _newton_direction(B: np.ndarray, p: np.ndarray, a: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Newton step for the weights of the active sets, keeping their sum fixed."""
    r = B.shape[0]
    H = (B * (p / (a * a))) @ B.T
    kkt = np.zeros((r + 1, r + 1))
    kkt[:r, :r] = H
    kkt[:r, r] = 1.0
    kkt[r, :r] = 1.0
    rhs = np.concatenate((-grad, [0.0]))
    # affinely dependent active sets make the system singular; truncating
    # small singular values keeps the step out of the null space
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            sol = scipy.linalg.solve(kkt, rhs, assume_a="sym", check_finite=False)
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError):
            sol = np.linalg.lstsq(kkt, rhs, rcond=1e-10)[0]
    return sol[:r]


def _correct(q: np.ndarray, As: np.ndarray, p: np.ndarray, tol: float, max_newton: int = 100) -> int:
    """Re-optimize the weights over the current active sets in place.

    Damped Newton with exact line search; a set whose weight reaches zero
    leaves the active set. Returns the number of Newton steps taken.
    """
    for step in range(max_newton):
        idx = np.flatnonzero(q > 0)
        B = As[idx]
        a = q[idx] @ B
        scores = B @ (p / a)
        if scores.max() - scores.min() <= tol:
            return step
        grad = -scores
        dw = _newton_direction(B, p, a, grad)
        dw -= dw.mean() if abs(dw.sum()) > 1e-12 else 0.0
        slope = float(grad @ dw)
        if not slope < 0:
            # fall back to the pairwise direction between best and worst active set
            dw = np.zeros_like(dw)
            dw[np.argmax(scores)] = 1.0
            dw[np.argmin(scores)] = -1.0
        neg = np.flatnonzero(dw < 0)
        if neg.size:
            ratios = -q[idx[neg]] / dw[neg]
            blocking = idx[neg[np.argmin(ratios)]]
            tmax = float(ratios.min())
        else:
            blocking, tmax = None, 1.0
        t = _line_search(p, a, dw @ B, tmax)
        if t <= 0:
            return step
        q[idx] += t * dw
        if blocking is not None and t >= tmax * (1 - 1e-12):
            q[blocking] = 0.0
        q[q < 1e-300] = 0.0
        q /= q.sum()
    return max_newton


def solve_entropy(system: SetSystem, pi: Distribution | None = None, tol: float = 1e-8,
                  max_iters: int = 10_000, corrective: bool = True, away_steps: bool = False,
                  init_seed: int | None = None, record_history: bool = False) -> EntropyCertificate:
    """Minimize phi over VP(system) and return a certified entropy bracket.

    Starts from the uniform mixture over a greedy cover of the support.
    Each iteration calls the LMO; the selected set (plus any other set that
    violates the antiblocker condition by at least half the gap) joins the
    active set. With ``corrective`` the weights are then re-optimized over
    the active sets by Newton steps; otherwise a classic step toward the
    LMO vertex is taken, or an away step when ``away_steps`` allows it.
    ``init_seed`` randomizes the greedy cover's tie-breaking.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    pi = _resolve_pi(system, pi)
    rng = np.random.default_rng(init_seed) if init_seed is not None else None
    cover = greedy_cover(system, pi, rng)
    if cover is None:
        log.info("support not covered by the family: entropy is infinite")
        return _infinite_certificate()

    A = system.incidence
    s = pi.support
    As = A[:, s]
    p = pi.masses[s]
    K = A.shape[0]
    q = np.zeros(K)
    q[cover] = 1.0 / len(cover)
    history = []
    it = 0
    for it in range(max_iters + 1):
        a = q @ As
        scores = As @ (p / a)
        k_fw = _argmax_low(scores)
        gap = float(scores[k_fw] - 1.0)
        if record_history:
            history.append((it, float(-np.sum(p * np.log(a))), gap))
        if gap <= tol or it == max_iters:
            break
        if corrective:
            entering = np.flatnonzero((scores >= 1.0 + 0.5 * gap) & (q == 0))
            if q[k_fw] == 0 and k_fw not in entering:
                entering = np.append(entering, k_fw)
            if entering.size:
                d = As[entering].mean(axis=0) - a
                t = _line_search(p, a, d, 1.0)
                q *= 1.0 - t
                q[entering] += t / entering.size
            _correct(q, As, p, 0.1 * tol)
            continue
        active = np.flatnonzero(q > 0)
        k_aw = int(active[np.argmin(scores[active])])
        away_gap = float(1.0 - scores[k_aw])
        if away_steps and away_gap > gap and q[k_aw] < 1.0:
            d = a - As[k_aw]
            tmax = q[k_aw] / (1.0 - q[k_aw])
            t = _line_search(p, a, d, tmax)
            q *= 1.0 + t
            q[k_aw] -= t
            if t >= tmax * (1 - 1e-15):
                q[k_aw] = 0.0
        else:
            d = As[k_fw] - a
            t = _line_search(p, a, d, 1.0)
            q *= 1.0 - t
            q[k_fw] += t
        q[q < 1e-300] = 0.0
    cert = _certificate(system, pi, q, it, tol, history)
    if not cert.converged:
        log.warning("solver stopped after %d iterations with gap %.3g", it, cert.gap)
    return cert


def verify_certificate(system: SetSystem, pi: Distribution | None, point, tol: float = 1e-8) -> dict:
    """Check a packing point as a two-sided entropy certificate.

    The upper end phi(a) is valid for any genuine packing point. The lower
    end uses the witness b = min(1, a (1 + g)), which is checked against the
    antiblocker condition on every family set.
    """
    pi = _resolve_pi(system, pi)
    if isinstance(point, PackingPoint):
        if point.symbols != system.universe.symbols or point.q.size != len(system.family):
            raise DomainError("packing point does not belong to this system")
        recomputed = point.q @ system.incidence
        if not np.allclose(recomputed, point.a, atol=1e-12, rtol=0):
            raise DomainError("packing point's a does not match its weights")
    a = _point_vector(system, point)
    value = phi(pi, a)
    gap = fw_gap(system, pi, a)
    if math.isinf(gap):
        return {"is_upper_valid": True, "is_lower_valid": False, "bracket": (0.0, math.inf),
                "gap": gap, "witness_ok": False}
    g = max(gap, 0.0)
    b = np.minimum(1.0, a * (1.0 + g))
    witness = set_scores(system, pi, b)
    witness_ok = bool(np.all(witness <= 1.0 + 1e-9))
    return {
        "is_upper_valid": True,
        "is_lower_valid": bool(gap <= tol and witness_ok),
        "bracket": (value - math.log1p(g), value),
        "gap": gap,
        "witness_ok": witness_ok,
    }


class PreconditionFailure(EntropyError):
    """The closed form's hypothesis does not hold for this input."""


def cycle_entropy(n: int, pi: Distribution) -> float:
    """Entropy of the odd cycle C_{2n+1}, valid when adjacent masses sum to at most 1/n.

    ``pi`` lists the atoms in cyclic order. Raises PreconditionFailure when
    some adjacent pair is too heavy; use :func:`solve_entropy` then.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    if len(pi) != 2 * n + 1:
        raise DomainError(f"expected {2 * n + 1} atoms, got {len(pi)}")
    p = pi.masses
    pairs = p + np.roll(p, -1)
    bad = np.flatnonzero(pairs > 1.0 / n + 1e-15)
    if bad.size:
        k = int(bad[0])
        raise PreconditionFailure(
            f"p[{k}] + p[{(k + 1) % len(p)}] = {pairs[k]:.6g} exceeds 1/{n}")
    return shannon_entropy(pi) - math.log(n)
