import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphentropy import (
    Distribution,
    DomainError,
    PreconditionFailure,
    SetSystem,
    ZeroOnSupportError,
    complete_graph,
    cycle_entropy,
    cycle_graph,
    empty_graph,
    evaluate_packing_point,
    fw_gap,
    independent_sets,
    lmo,
    maximal_independent_sets,
    phi,
    shannon_entropy,
    solve_entropy,
    verify_certificate,
)

from .conftest import graphs


def coloring_point():
    system = independent_sets(cycle_graph(5))
    sets = [frozenset({"0", "2"}), frozenset({"1", "3"}), frozenset({"4"})]
    return system, evaluate_packing_point(system, [(system.family.index(J), 1 / 3) for J in sets])


class TestGap:
    def test_c5_optimum(self, c5):
        assert fw_gap(c5, None, evaluate_packing_point(c5, np.full(5, 0.2))) == pytest.approx(0.0, abs=1e-15)

    def test_c5_coloring(self):
        system, point = coloring_point()
        assert fw_gap(system, None, point) == pytest.approx(0.2, abs=1e-15)

    def test_k3(self):
        system = maximal_independent_sets(complete_graph(3))
        assert fw_gap(system, None, np.full(3, 1 / 3)) == pytest.approx(0.0, abs=1e-15)

    def test_zero_on_support_is_infinite(self, c5):
        assert fw_gap(c5, None, np.array([0, 0.5, 0.5, 0.5, 0.5])) == math.inf


class TestLmo:
    def test_tie_breaks_low(self, c5):
        assert lmo(c5, None, np.full(5, 1 / 3)) == 0

    def test_superset_wins(self):
        system = SetSystem.from_sets(Distribution.uniform(["1", "2"]), [["1"], ["1", "2"]])
        assert lmo(system, None, np.full(2, 0.5)) == 1

    def test_single_set(self):
        system = SetSystem.from_sets(Distribution.uniform(["1", "2"]), [["1", "2"]])
        assert lmo(system, None, np.ones(2)) == 0

    def test_reports_offender(self, c5):
        with pytest.raises(ZeroOnSupportError) as info:
            lmo(c5, None, np.array([0.5, 0.0, 0.5, 0.5, 0.5]))
        assert info.value.symbol == "1"


class TestSolve:
    def test_c5(self, c5):
        cert = solve_entropy(c5, tol=1e-9)
        assert cert.value == pytest.approx(math.log(2.5), abs=1e-9)
        assert cert.gap <= 1e-9 and cert.converged

    @pytest.mark.parametrize("n", [2, 4, 7])
    def test_complete(self, n):
        rng = np.random.default_rng(n)
        pi = Distribution(tuple(map(str, range(n))), rng.dirichlet(np.ones(n)))
        cert = solve_entropy(maximal_independent_sets(complete_graph(n, pi)))
        assert cert.value == pytest.approx(shannon_entropy(pi), abs=1e-8)
        np.testing.assert_allclose(cert.point.a, pi.masses, atol=1e-6)

    def test_edgeless(self):
        cert = solve_entropy(maximal_independent_sets(empty_graph(4)))
        assert cert.value == 0.0
        np.testing.assert_array_equal(cert.point.a, 1.0)

    def test_k2_skewed(self):
        system = SetSystem.from_sets(Distribution(("1", "2"), [0.3, 0.7]), [["1"], ["2"]])
        assert solve_entropy(system).value == pytest.approx(0.610864302, abs=1e-8)

    def test_uncovered_is_infinite(self):
        system = SetSystem.from_sets(Distribution.uniform(["a", "b"]), [["a"]])
        cert = solve_entropy(system)
        assert cert.infinite and cert.value == math.inf and cert.point is None

    def test_null_atoms_need_no_cover(self):
        system = SetSystem.from_sets(Distribution(("a", "b"), [1.0, 0.0]), [["a"]])
        assert solve_entropy(system).value == 0.0

    def test_bad_tolerance(self, c5):
        with pytest.raises(DomainError):
            solve_entropy(c5, tol=0)

    def test_budget_exhausted_keeps_valid_bracket(self):
        system = maximal_independent_sets(cycle_graph(9, Distribution(tuple(map(str, range(9))),
                                                                      np.arange(1, 10) / 45)))
        truth = solve_entropy(system, tol=1e-12).value
        cert = solve_entropy(system, tol=1e-14, max_iters=1, corrective=False)
        assert not cert.converged
        assert cert.bracket_lo - 1e-12 <= truth <= cert.bracket_hi + 1e-12

    @pytest.mark.parametrize("kwargs", [dict(corrective=False), dict(corrective=False, away_steps=True)])
    def test_plain_variants_agree(self, kwargs):
        system = maximal_independent_sets(cycle_graph(7))
        cert = solve_entropy(system, tol=1e-6, max_iters=100_000, **kwargs)
        assert cert.converged
        assert cert.value == pytest.approx(math.log(7 / 3), abs=1e-6)

    def test_history(self, c5):
        cert = solve_entropy(c5, record_history=True)
        assert cert.history and cert.history[-1][2] == pytest.approx(cert.gap)


class TestCertificate:
    def test_coloring_bracket(self):
        system, point = coloring_point()
        res = verify_certificate(system, None, point)
        assert res["is_upper_valid"] and not res["is_lower_valid"] and res["witness_ok"]
        lo, hi = res["bracket"]
        assert lo == pytest.approx(math.log(2.5), abs=1e-12)
        assert hi == pytest.approx(math.log(3), abs=1e-12)

    def test_optimum_collapses(self, c5):
        res = verify_certificate(c5, None, evaluate_packing_point(c5, np.full(5, 0.2)))
        assert res["is_lower_valid"]
        lo, hi = res["bracket"]
        assert hi - lo <= 1e-12 and lo == pytest.approx(math.log(2.5), abs=1e-12)

    def test_vacuous(self):
        system = SetSystem.from_sets(Distribution.uniform(["a", "b"]), [["a"], ["b"]])
        res = verify_certificate(system, None, evaluate_packing_point(system, [1.0, 0.0]))
        assert res["bracket"] == (0.0, math.inf) and not res["is_lower_valid"]

    def test_rejects_foreign_point(self, c5, k2):
        with pytest.raises(DomainError):
            verify_certificate(c5, None, evaluate_packing_point(k2, [0.5, 0.5]))

    def test_certificate_invariants(self, c5):
        cert = solve_entropy(c5)
        assert cert.bracket_hi == cert.value
        assert cert.bracket_lo == pytest.approx(cert.value - math.log1p(max(cert.gap, 0)), abs=0)
        assert cert.gap >= -1e-12


class TestCycleClosedForm:
    def test_c5(self):
        assert cycle_entropy(2, Distribution.uniform(list("abcde"))) == pytest.approx(math.log(2.5))

    def test_c7(self):
        assert cycle_entropy(3, Distribution.uniform(list("abcdefg"))) == pytest.approx(0.847297860, abs=1e-9)

    def test_precondition(self):
        with pytest.raises(PreconditionFailure):
            cycle_entropy(2, Distribution(tuple("abcde"), [0.5, 0.2, 0.1, 0.1, 0.1]))

    def test_atom_count(self):
        with pytest.raises(DomainError):
            cycle_entropy(2, Distribution.uniform(list("abcd")))

    def test_matches_solver_under_hypothesis(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            p = rng.dirichlet(np.full(7, 20.0))
            pi = Distribution(tuple(map(str, range(7))), p)
            try:
                closed = cycle_entropy(3, pi)
            except PreconditionFailure:
                continue
            assert solve_entropy(maximal_independent_sets(cycle_graph(7, pi))).value == pytest.approx(closed, abs=1e-8)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(graphs(max_vertices=8))
    def test_gap_positive_off_optimum(self, graph):
        system = maximal_independent_sets(graph)
        cert = solve_entropy(system, tol=1e-10)
        q = cert.point.q.copy()
        uniform = np.full_like(q, 1.0 / q.size)
        if np.allclose(q, uniform) or len(q) == 1:
            return
        moved = evaluate_packing_point(system, 0.7 * q + 0.3 * uniform)
        if phi(graph.pi, moved.a) > cert.value + 1e-9:
            assert fw_gap(system, None, moved) > 0

    @settings(max_examples=60, deadline=None)
    @given(graphs(max_vertices=8), st.data())
    def test_appending_set_never_increases(self, graph, data):
        system = maximal_independent_sets(graph)
        base = solve_entropy(system).value
        extra = frozenset(data.draw(st.sets(st.sampled_from(graph.vertices), min_size=1)))
        if extra in system.family:
            return
        bigger = SetSystem(system.universe, system.family + (extra,))
        assert solve_entropy(bigger).value <= base + 1e-8

    @settings(max_examples=60, deadline=None)
    @given(graphs(max_vertices=8), st.randoms(use_true_random=False))
    def test_permutation_equivariance(self, graph, rnd):
        system = maximal_independent_sets(graph)
        perm = list(graph.vertices)
        rnd.shuffle(perm)
        rename = dict(zip(graph.vertices, perm))
        pi2 = Distribution(tuple(rename[v] for v in graph.vertices), graph.pi.masses)
        system2 = SetSystem(pi2, tuple(frozenset(rename[x] for x in J) for J in system.family))
        c1, c2 = solve_entropy(system, tol=1e-10), solve_entropy(system2, tol=1e-10)
        assert c1.value == pytest.approx(c2.value, abs=1e-9)
        a1, a2 = c1.point.a_map(), c2.point.a_map()
        for v in graph.vertices:
            assert a1[v] == pytest.approx(a2[rename[v]], abs=1e-4)

    @settings(max_examples=60, deadline=None)
    @given(graphs(max_vertices=10), st.integers(0, 2**31))
    def test_uniqueness_bound(self, graph, seed):
        system = maximal_independent_sets(graph)
        c1 = solve_entropy(system, init_seed=seed)
        c2 = solve_entropy(system, init_seed=seed + 1)
        dist = math.sqrt(float(np.sum(graph.pi.masses * (c1.point.a - c2.point.a) ** 2)))
        assert dist <= math.sqrt(8 * (max(c1.gap, 0) + max(c2.gap, 0))) + 1e-12

    @settings(max_examples=60, deadline=None)
    @given(graphs(max_vertices=8))
    def test_bracket_soundness_across_runs(self, graph):
        system = maximal_independent_sets(graph)
        loose = solve_entropy(system, tol=1e-3, corrective=False, max_iters=200)
        tight = solve_entropy(system, tol=1e-11)
        assert loose.bracket_lo - 1e-9 <= tight.value <= loose.bracket_hi + 1e-9
        assert tight.bracket_lo - 1e-9 <= loose.value

    @settings(max_examples=40, deadline=None)
    @given(graphs(max_vertices=8))
    def test_deterministic(self, graph):
        system = maximal_independent_sets(graph)
        c1, c2 = solve_entropy(system), solve_entropy(system)
        assert c1.value == c2.value and np.array_equal(c1.point.q, c2.point.q)
