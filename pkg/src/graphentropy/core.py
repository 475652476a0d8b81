"""Value types for distributions, set systems and graphs, plus the basic
entropy functionals.

All quantities are in nats. Atoms with zero mass stay in the universe but
are ignored by every functional (they are null sets).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

MASS_TOL = 1e-12
WEIGHT_TOL = 1e-10
MAX_GRAPH_VERTICES = 40


class EntropyError(Exception):
    """Base class for errors raised by this package."""


class DomainError(EntropyError, ValueError):
    pass


class SizeError(EntropyError):
    """Instance exceeds the desk-scale limits of an exact routine."""


class InvalidWeightsError(EntropyError, ValueError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Distribution:
    """Finite atomic probability measure.

    ``symbols`` and ``masses`` are aligned; build from pairs with
    :meth:`from_pairs` or from a mapping with :meth:`from_mapping`.
    """

    symbols: tuple[str, ...]
    masses: np.ndarray = field(repr=False)

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        masses = np.array(self.masses, dtype=float).reshape(-1)
        if len(symbols) != masses.size:
            raise DomainError("symbols and masses differ in length")
        if len(set(symbols)) != len(symbols):
            raise DomainError("symbol ids must be unique")
        if masses.size == 0:
            raise DomainError("distribution needs at least one atom")
        if np.any(~np.isfinite(masses)) or np.any(masses < 0):
            raise DomainError("masses must be finite and nonnegative")
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise DomainError(f"masses sum to {float(masses.sum())!r}, not 1")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "masses", _frozen(masses))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> "Distribution":
        pairs = list(pairs)
        return cls(tuple(s for s, _ in pairs), np.array([m for _, m in pairs], dtype=float))

    @classmethod
    def from_mapping(cls, masses: Mapping[str, float]) -> "Distribution":
        return cls.from_pairs(masses.items())

    @classmethod
    def uniform(cls, symbols: Sequence[str]) -> "Distribution":
        n = len(symbols)
        return cls(tuple(symbols), np.full(n, 1.0 / n))

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.symbols == other.symbols and np.array_equal(self.masses, other.masses)

    def __hash__(self):
        return hash((self.symbols, self.masses.tobytes()))

    @cached_property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    @property
    def atoms(self) -> list[tuple[str, float]]:
        return list(zip(self.symbols, self.masses.tolist()))

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of atoms with positive mass."""
        return self.masses > 0

    def mass(self, symbol: str) -> float:
        return float(self.masses[self.index[symbol]])

    def as_dict(self) -> dict[str, float]:
        return dict(self.atoms)


@dataclass(frozen=True)
class SetSystem:
    """A finite universe with a finite family of subsets.

    ``family`` holds frozensets of symbol ids; its order is significant
    (family indices are used by packing weights and the LMO tie-break).
    """

    universe: Distribution
    family: tuple[frozenset, ...]
    origin: str = "explicit"

    ORIGINS = ("explicit", "graph-derived", "graphon-quotient")

    def __post_init__(self):
        family = tuple(frozenset(str(x) for x in J) for J in self.family)
        if not family:
            raise DomainError("family must be non-empty")
        if len(set(family)) != len(family):
            raise DomainError("family contains duplicate sets")
        known = set(self.universe.symbols)
        for k, J in enumerate(family):
            unknown = J - known
            if unknown:
                raise DomainError(f"set {k} contains unknown symbols {sorted(unknown)}")
        if self.origin not in self.ORIGINS:
            raise DomainError(f"unknown origin {self.origin!r}")
        object.__setattr__(self, "family", family)

    @classmethod
    def from_sets(cls, universe: Distribution, sets: Iterable[Iterable[str]],
                  origin: str = "explicit") -> "SetSystem":
        return cls(universe, tuple(frozenset(J) for J in sets), origin)

    def __len__(self) -> int:
        return len(self.family)

    @cached_property
    def incidence(self) -> np.ndarray:
        """Float matrix of shape (sets, atoms) with 1 where the atom is in the set."""
        idx = self.universe.index
        A = np.zeros((len(self.family), len(self.universe)))
        for k, J in enumerate(self.family):
            A[k, [idx[x] for x in J]] = 1.0
        return _frozen(A)

    def covers_support(self, pi: Distribution | None = None) -> bool:
        pi = self.universe if pi is None else pi
        covered = self.incidence.any(axis=0)
        return bool(np.all(covered[pi.support]))

    def uncovered(self, pi: Distribution | None = None) -> list[str]:
        pi = self.universe if pi is None else pi
        covered = self.incidence.any(axis=0)
        return [s for s, c, m in zip(pi.symbols, covered, pi.masses) if m > 0 and not c]

    def with_universe(self, pi: Distribution) -> "SetSystem":
        return SetSystem(pi, self.family, self.origin)

    def sorted_members(self, k: int) -> list[str]:
        """Members of set ``k`` in universe order."""
        idx = self.universe.index
        return sorted(self.family[k], key=idx.__getitem__)


@dataclass(frozen=True)
class FiniteGraph:
    vertices: tuple[str, ...]
    edges: frozenset
    pi: Distribution

    def __post_init__(self):
        vertices = tuple(str(v) for v in self.vertices)
        if len(set(vertices)) != len(vertices):
            raise DomainError("duplicate vertices")
        vset = set(vertices)
        edges = set()
        for e in self.edges:
            e = tuple(e)
            if len(e) == 1:
                raise DomainError(f"loop at vertex {e[0]!r}")
            if len(e) != 2:
                raise DomainError(f"edge {e!r} must have two endpoints")
            u, v = (str(x) for x in e)
            if u == v:
                raise DomainError(f"loop at vertex {u!r}")
            if u not in vset or v not in vset:
                raise DomainError(f"edge ({u!r}, {v!r}) uses an unknown vertex")
            edge = frozenset((u, v))
            if edge in edges:
                raise DomainError(f"duplicate edge ({u!r}, {v!r})")
            edges.add(edge)
        if set(self.pi.symbols) != vset:
            raise DomainError("pi must be defined on exactly the vertex set")
        if self.pi.symbols != vertices:
            pi = Distribution(vertices, np.array([self.pi.mass(v) for v in vertices]))
            object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def build(cls, vertices: Sequence, edges: Iterable, pi: Distribution | Mapping | None = None):
        vertices = [str(v) for v in vertices]
        if pi is None:
            pi = Distribution.uniform(vertices)
        elif not isinstance(pi, Distribution):
            pi = Distribution.from_mapping({str(k): v for k, v in pi.items()})
        return cls(tuple(vertices), tuple(tuple(map(str, e)) for e in edges), pi)

    def adjacency_bits(self) -> list[int]:
        idx = {v: i for i, v in enumerate(self.vertices)}
        adj = [0] * len(self.vertices)
        for e in self.edges:
            u, v = (idx[x] for x in e)
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj


def cycle_graph(n_vertices: int, pi: Distribution | None = None) -> FiniteGraph:
    vs = [str(i) for i in range(n_vertices)]
    edges = [(vs[i], vs[(i + 1) % n_vertices]) for i in range(n_vertices)]
    return FiniteGraph.build(vs, edges, pi)


def complete_graph(n_vertices: int, pi: Distribution | None = None) -> FiniteGraph:
    vs = [str(i) for i in range(n_vertices)]
    return FiniteGraph.build(vs, itertools.combinations(vs, 2), pi)


def empty_graph(n_vertices: int, pi: Distribution | None = None) -> FiniteGraph:
    vs = [str(i) for i in range(n_vertices)]
    return FiniteGraph.build(vs, [], pi)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def maximal_cliques_bits(adj: Sequence[int], candidates: int | None = None) -> list[int]:
    """All maximal cliques of the graph given by bitmask adjacency rows.

    Bron-Kerbosch with Tomita pivoting, iterative. ``candidates`` restricts
    the vertex set (vertices outside it are ignored entirely).
    """
    n = len(adj)
    if candidates is None:
        candidates = (1 << n) - 1
    out = []
    stack = [(0, candidates, 0)]
    while stack:
        R, P, X = stack.pop()
        if not P:
            if not X:
                out.append(R)
            continue
        PX = P | X
        pivot = max(_bits(PX), key=lambda u: (adj[u] & P).bit_count())
        for v in _bits(P & ~adj[pivot]):
            stack.append((R | (1 << v), P & adj[v], X & adj[v]))
            P &= ~(1 << v)
            X |= 1 << v
    return out


def _order_key(mask: int) -> tuple:
    return tuple(_bits(mask))


def maximal_independent_sets(graph: FiniteGraph, max_vertices: int = MAX_GRAPH_VERTICES) -> SetSystem:
    """Inclusion-maximal independent sets of ``graph`` as a set system.

    Enumerated as maximal cliques of the complement graph. Sets are ordered
    lexicographically by vertex position.
    """
    n = len(graph.vertices)
    if n > max_vertices:
        raise SizeError(f"graph has {n} vertices, limit is {max_vertices}")
    full = (1 << n) - 1
    comp = [full & ~row & ~(1 << i) for i, row in enumerate(graph.adjacency_bits())]
    masks = sorted(maximal_cliques_bits(comp), key=_order_key)
    family = tuple(frozenset(graph.vertices[i] for i in _bits(m)) for m in masks)
    return SetSystem(graph.pi, family, "graph-derived")


def independent_sets(graph: FiniteGraph, max_vertices: int = 20) -> SetSystem:
    """Every non-empty independent set (not only maximal ones).

    Exponential; meant for small graphs and for packing points that use
    non-maximal sets, such as proper colorings.
    """
    n = len(graph.vertices)
    if n > max_vertices:
        raise SizeError(f"graph has {n} vertices, limit is {max_vertices}")
    adj = graph.adjacency_bits()
    found = []

    def extend(mask, start):
        for v in range(start, n):
            if not adj[v] & mask:
                new = mask | (1 << v)
                found.append(new)
                extend(new, v + 1)

    extend(0, 0)
    found.sort(key=lambda m: (m.bit_count(), _order_key(m)))
    family = tuple(frozenset(graph.vertices[i] for i in _bits(m)) for m in found)
    return SetSystem(graph.pi, family, "graph-derived")


def shannon_entropy(pi: Distribution) -> float:
    p = pi.masses[pi.masses > 0]
    return float(-np.sum(p * np.log(p)))


def as_vector(pi: Distribution, a) -> np.ndarray:
    """Align ``a`` (mapping or sequence) with the atoms of ``pi``."""
    if isinstance(a, Mapping):
        try:
            return np.array([float(a[s]) for s in pi.symbols])
        except KeyError as exc:
            raise DomainError(f"no value for symbol {exc.args[0]!r}") from None
    vec = np.asarray(a, dtype=float).reshape(-1)
    if vec.size != len(pi):
        raise DomainError(f"expected {len(pi)} values, got {vec.size}")
    return vec


def check_unit_interval(a: np.ndarray, slack: float = 1e-12) -> np.ndarray:
    if np.any(~np.isfinite(a)) or np.any(a < -slack) or np.any(a > 1 + slack):
        raise DomainError("values must lie in [0, 1]")
    return np.clip(a, 0.0, 1.0)


def phi(pi: Distribution, a) -> float:
    """Integral of -log(a) against ``pi``; +inf iff a vanishes on positive mass."""
    vec = check_unit_interval(as_vector(pi, a))
    s = pi.support
    p, av = pi.masses[s], vec[s]
    if np.any(av == 0):
        return math.inf
    return float(-np.sum(p * np.log(av))) + 0.0


@dataclass(frozen=True)
class PackingPoint:
    """A convex combination of family indicators and the function it induces.

    ``q`` is dense over the family; ``a`` is aligned with the universe.
    """

    symbols: tuple[str, ...]
    q: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)

    @property
    def weights(self) -> list[tuple[int, float]]:
        return [(int(k), float(self.q[k])) for k in np.flatnonzero(self.q)]

    def a_map(self) -> dict[str, float]:
        return dict(zip(self.symbols, self.a.tolist()))


def evaluate_packing_point(system: SetSystem, weights) -> PackingPoint:
    """Materialize sum_k q_k 1_{J_k}.

    ``weights`` is either a dense sequence over the family or an iterable of
    ``(index, q)`` pairs.
    """
    K = len(system.family)
    q = np.zeros(K)
    arr = None
    if not isinstance(weights, np.ndarray):
        weights = list(weights)
        if weights and isinstance(weights[0], (tuple, list)):
            for k, w in weights:
                k = int(k)
                if not 0 <= k < K:
                    raise InvalidWeightsError(f"family index {k} out of range")
                q[k] += float(w)
        else:
            arr = np.asarray(weights, dtype=float)
    else:
        arr = weights.astype(float)
    if arr is not None:
        if arr.shape != (K,):
            raise InvalidWeightsError(f"expected {K} weights, got shape {arr.shape}")
        q = arr.copy()
    if np.any(~np.isfinite(q)) or np.any(q < 0):
        raise InvalidWeightsError("weights must be finite and nonnegative")
    if abs(q.sum() - 1.0) > WEIGHT_TOL:
        raise InvalidWeightsError(f"weights sum to {float(q.sum())!r}, not 1")
    a = np.clip(q @ system.incidence, 0.0, 1.0)
    return PackingPoint(system.universe.symbols, _frozen(q), _frozen(a))
