"""Fractional chromatic and clique numbers by a dense tableau simplex.

The simplex uses Bland's rule and a big-M phase for >= rows. Duals are
recovered from the final basis by solving B^T y = c_B against the original
constraint matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Distribution, DomainError, EntropyError, SetSystem

PIVOT_TOL = 1e-11
MAX_PIVOTS = 1_000_000


class LPError(EntropyError):
    pass


class Unbounded(LPError):
    pass


class Infeasible(LPError):
    pass


@dataclass(frozen=True)
class SimplexSolution:
    x: np.ndarray
    y: np.ndarray
    objective: float
    pivots: int


def simplex_max(c, A, b, senses, big_m: float | None = None) -> SimplexSolution:
    """Maximize c.x subject to A x (<=|>=|=) b, x >= 0, with b >= 0.

    ``senses`` holds one of '<=', '>=', '=' per row. Returns the primal x,
    the row duals y (y >= 0 for '<=' rows, y <= 0 for '>=' rows in this
    maximization convention) and the pivot count.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise DomainError("right-hand sides must be nonnegative")
    if big_m is None:
        big_m = 1e6 * max(1.0, np.abs(c).max(initial=0.0))

    # columns: structural | slack/surplus | artificial
    cols = [A]
    cost = [c]
    basis = np.empty(m, dtype=int)
    n_slack = sum(1 for s in senses if s in ("<=", ">="))
    S = np.zeros((m, n_slack))
    n_art = sum(1 for s in senses if s in (">=", "="))
    R = np.zeros((m, n_art))
    js = ja = 0
    for i, sense in enumerate(senses):
        if sense == "<=":
            S[i, js] = 1.0
            basis[i] = n + js
            js += 1
        elif sense == ">=":
            S[i, js] = -1.0
            js += 1
            R[i, ja] = 1.0
            basis[i] = n + n_slack + ja
            ja += 1
        elif sense == "=":
            R[i, ja] = 1.0
            basis[i] = n + n_slack + ja
            ja += 1
        else:
            raise DomainError(f"unknown constraint sense {sense!r}")
    cols += [S, R]
    cost += [np.zeros(n_slack), np.full(n_art, -big_m)]
    M = np.hstack(cols)
    cfull = np.concatenate(cost)
    N = M.shape[1]

    T = np.hstack((M, b[:, None]))
    # reduced-cost row: z_j - c_j; optimal when all >= 0
    z = cfull[basis] @ T - np.append(cfull, 0.0)

    pivots = 0
    while True:
        entering = np.flatnonzero(z[:N] < -PIVOT_TOL)
        if entering.size == 0:
            break
        j = int(entering[0])  # Bland: lowest index
        col = T[:, j]
        pos = np.flatnonzero(col > PIVOT_TOL)
        if pos.size == 0:
            raise Unbounded("objective is unbounded")
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        i = int(ties[np.argmin(basis[ties])])  # Bland: lowest basic index
        T[i] /= T[i, j]
        others = np.arange(m) != i
        T[others] -= np.outer(T[others, j], T[i])
        z -= z[j] * T[i]
        basis[i] = j
        pivots += 1
        if pivots > MAX_PIVOTS:
            raise LPError("pivot limit reached")

    x_full = np.zeros(N)
    x_full[basis] = T[:, -1]
    if n_art and np.any(x_full[n + n_slack:] > 1e-9):
        raise Infeasible("problem is infeasible")
    B = M[:, basis]
    y = np.linalg.solve(B.T, cfull[basis])
    x = x_full[:n]
    return SimplexSolution(x, y, float(c @ x), pivots)


@dataclass(frozen=True)
class LpResult:
    """Optimal LP pair for a set system.

    ``primal`` maps family index -> c(J) (the covering weights) and
    ``dual`` maps symbol -> b(x) (the clique masses), whichever of the two
    programs was solved; ``objective`` is that program's optimum.
    """

    objective: float
    primal: dict
    dual: dict
    duality_gap: float

    @property
    def infinite(self) -> bool:
        return math.isinf(self.objective)


def _restricted(system: SetSystem):
    pi = system.universe
    atoms = np.flatnonzero(pi.support)
    A = system.incidence[:, atoms].T  # rows: positive-mass atoms, cols: sets
    return pi, atoms, A


def _infinite_result(system: SetSystem) -> LpResult:
    return LpResult(math.inf, {}, {}, math.nan)


def frac_chromatic(system: SetSystem) -> LpResult:
    """min sum_J c(J) s.t. every positive-mass atom is covered with weight >= 1."""
    if not system.covers_support():
        return _infinite_result(system)
    pi, atoms, A = _restricted(system)
    K = A.shape[1]
    sol = simplex_max(-np.ones(K), A, np.ones(len(atoms)), [">="] * len(atoms))
    c = np.clip(sol.x, 0.0, None)
    b_vals = np.clip(-sol.y, 0.0, None)
    objective = float(c.sum())
    dual_obj = float(b_vals.sum())
    b = {s: 0.0 for s in pi.symbols}
    for x, val in zip(atoms, b_vals):
        b[pi.symbols[x]] = float(val)
    return LpResult(objective, {k: float(c[k]) for k in range(K)}, b, abs(objective - dual_obj))


def frac_clique(system: SetSystem) -> LpResult:
    """max sum_x b_x s.t. sum_{x in J} b_x <= 1 for every family set, over positive-mass atoms."""
    if not system.covers_support():
        return _infinite_result(system)
    pi, atoms, A = _restricted(system)
    K = A.shape[1]
    sol = simplex_max(np.ones(len(atoms)), A.T, np.ones(K), ["<="] * K)
    b_vals = np.clip(sol.x, 0.0, None)
    c = np.clip(sol.y, 0.0, None)
    objective = float(b_vals.sum())
    b = {s: 0.0 for s in pi.symbols}
    for x, val in zip(atoms, b_vals):
        b[pi.symbols[x]] = float(val)
    return LpResult(objective, {k: float(c[k]) for k in range(K)}, b, abs(objective - float(c.sum())))


def lp_residuals(system: SetSystem, result: LpResult) -> dict:
    """Primal/dual infeasibility and complementary slackness of an LpResult."""
    pi, atoms, A = _restricted(system)
    c = np.array([result.primal[k] for k in range(len(system.family))])
    b = np.array([result.dual[pi.symbols[x]] for x in atoms])
    cover = A @ c
    load = A.T @ b
    return {
        "cover_violation": float(max(0.0, (1.0 - cover).max(initial=0.0))),
        "packing_violation": float(max(0.0, (load - 1.0).max(initial=0.0))),
        "negativity": float(max(0.0, -min(c.min(initial=0.0), b.min(initial=0.0)))),
        "slackness": float(max(np.abs(b * (cover - 1.0)).max(initial=0.0),
                               np.abs(c * (load - 1.0)).max(initial=0.0))),
    }


def entropy_maximizing_distribution(system: SetSystem) -> Distribution:
    """Normalized optimal fractional clique b / omega_frac.

    Under this distribution the constant 1/omega_frac satisfies the
    antiblocker condition, so the entropy is at least log omega_frac.
    """
    res = frac_clique(system)
    if res.infinite or res.objective <= 0:
        raise DomainError("fractional clique is degenerate")
    pi = system.universe
    b = np.array([res.dual[s] for s in pi.symbols])
    if b.sum() <= 0:
        raise DomainError("fractional clique is all zero")
    return Distribution(pi.symbols, b / b.sum())
