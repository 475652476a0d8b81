import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from graphentropy import (
    ArcDensity,
    DomainError,
    StepGraphon,
    arc_entropy,
    circle_graphon_entropy,
    differential_entropy,
    discretize_circle,
    independent_events_allbutone,
    interval_graphon_entropy,
    quotient_system,
    smooth_density,
    solve_entropy,
)
from graphentropy.graphon import interval_graph_n


@st.composite
def step_graphons(draw, max_blocks=6):
    m = draw(st.integers(1, max_blocks))
    raw = np.array(draw(st.lists(st.floats(0.05, 1), min_size=m, max_size=m)))
    upper = draw(st.lists(st.booleans(), min_size=m * m, max_size=m * m))
    sup = np.array(upper).reshape(m, m)
    sup = np.triu(sup) | np.triu(sup).T
    return StepGraphon(raw / raw.sum(), sup)


class TestQuotient:
    def test_bipartition(self):
        w = StepGraphon([0.5, 0.5], [[False, True], [True, False]])
        system = quotient_system(w)
        assert set(system.family) == {frozenset({"B0"}), frozenset({"B1"})}
        assert solve_entropy(system).value == pytest.approx(math.log(2), abs=1e-10)

    def test_all_zero(self):
        system = quotient_system(StepGraphon([0.3, 0.7], np.zeros((2, 2), bool)))
        assert system.family == (frozenset({"B0", "B1"}),)
        assert solve_entropy(system).value == 0.0

    def test_looped_block_is_infinite(self):
        w = StepGraphon([0.5, 0.5], [[True, False], [False, False]])
        system = quotient_system(w)
        assert system.origin == "graphon-quotient"
        assert solve_entropy(system).infinite

    def test_fully_looped(self):
        system = quotient_system(StepGraphon([1.0], [[True]]))
        assert solve_entropy(system).infinite

    def test_from_values(self):
        w = StepGraphon.from_values([0.5, 0.5], [[0.0, 0.3], [0.3, 0.0]])
        assert w.support.tolist() == [[False, True], [True, False]]
        with pytest.raises(DomainError):
            StepGraphon.from_values([1.0], [[1.5]])

    def test_validation(self):
        with pytest.raises(DomainError):
            StepGraphon([0.5, 0.5], [[False, True], [False, False]])
        with pytest.raises(DomainError):
            StepGraphon([0.5, 0.6], np.zeros((2, 2)))
        with pytest.raises(DomainError):
            StepGraphon([1.0], np.zeros((2, 2)))

    @settings(max_examples=80, deadline=None)
    @given(step_graphons(), st.randoms(use_true_random=False))
    def test_permutation_invariance(self, w, rnd):
        perm = list(range(len(w)))
        rnd.shuffle(perm)
        v1 = solve_entropy(quotient_system(w)).value
        v2 = solve_entropy(quotient_system(w.permuted(perm))).value
        assert v1 == v2 or v1 == pytest.approx(v2, abs=1e-8)

    @settings(max_examples=80, deadline=None)
    @given(step_graphons(), st.data())
    def test_refinement_invariance(self, w, data):
        i = data.draw(st.integers(0, len(w) - 1))
        v1 = solve_entropy(quotient_system(w)).value
        v2 = solve_entropy(quotient_system(w.split_block(i))).value
        assert v1 == v2 or v1 == pytest.approx(v2, abs=1e-8)


class TestCircle:
    def test_values(self):
        assert circle_graphon_entropy(0.25) == pytest.approx(math.log(4))
        assert circle_graphon_entropy(0.5 - 1e-9) == pytest.approx(math.log(2), abs=1e-8)
        assert circle_graphon_entropy(1 / math.e) == pytest.approx(1.0)

    @pytest.mark.parametrize("c", [0.0, 0.5, -1.0])
    def test_domain(self, c):
        with pytest.raises(DomainError):
            circle_graphon_entropy(c)

    def test_discretize_m8(self):
        w = discretize_circle(0.25, 8)
        row = w.support[0].tolist()
        assert row == [False, False, False, True, True, True, False, False]
        assert np.array_equal(w.support, w.support.T)

    def test_discretize_antipodal(self):
        w = discretize_circle(0.5 - 1e-9, 4)
        assert w.support.astype(int).tolist() == [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]

    def test_m8_c04_antipodal_transversals(self):
        # only antipodal centers (distance 1/2) are farther apart than 0.4
        system = quotient_system(discretize_circle(0.4, 8))
        expected = {frozenset(f"B{i + 4 * b}" for i, b in enumerate(bits))
                    for bits in itertools.product((0, 1), repeat=4)}
        assert set(system.family) == expected
        assert solve_entropy(system).value == pytest.approx(math.log(2), abs=1e-10)

    def test_five_blocks(self):
        # consecutive blocks compatible, blocks two apart distinguishable: the C_5 pattern
        system = quotient_system(discretize_circle(0.2 + 1e-9, 5))
        assert set(system.family) == {frozenset({f"B{i}", f"B{(i + 1) % 5}"}) for i in range(5)}
        assert solve_entropy(system).value == pytest.approx(math.log(2.5), abs=1e-9)
        # just below 1/5 every pair of blocks is distinguishable
        assert len(quotient_system(discretize_circle(0.2 - 1e-9, 5)).family) == 5
        assert solve_entropy(quotient_system(discretize_circle(0.2 - 1e-9, 5))).value == pytest.approx(math.log(5))

    def test_convergence_direction(self):
        errs = [abs(solve_entropy(quotient_system(discretize_circle(0.25, m))).value - math.log(4))
                for m in (40, 80, 160)]
        assert errs[2] <= errs[1] + 1e-9 <= errs[0] + 2e-9


class TestInterval:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_collapse(self, n):
        assert interval_graphon_entropy(1.0 / n) == math.log(n)

    def test_values(self):
        assert interval_graphon_entropy(0.5) == pytest.approx(math.log(2), abs=1e-15)
        assert interval_graphon_entropy(0.3) == pytest.approx(1.213685117, abs=1e-9)

    def test_n(self):
        assert interval_graph_n(0.3) == 3
        assert interval_graph_n(1.0) == 1
        assert interval_graph_n(1 / 3) == 3

    def test_domain(self):
        with pytest.raises(DomainError):
            interval_graphon_entropy(0.0)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.01, 1.0))
    def test_between_neighbours(self, c):
        n = interval_graph_n(c)
        assert 1 / (n + 1) < c <= 1 / n
        v = interval_graphon_entropy(c)
        assert math.log(n) - 1e-12 <= v <= math.log(n + 1) + 1e-12


class TestArc:
    def test_tent(self):
        tent = smooth_density(ArcDensity.piecewise_constant([0.0, 0.5], [2.0, 0.0]), 0.5)
        np.testing.assert_allclose(tent.breakpoints, [0.0, 0.5])
        np.testing.assert_allclose(tent.intercepts, [2.0, 0.0])
        np.testing.assert_allclose(tent.slopes, [-4.0, 4.0])
        assert tent(0.25) == pytest.approx(1.0)
        res = arc_entropy(tent, 0.5, smoothed=True)
        assert res["exact"] == pytest.approx(0.5, abs=1e-12)

    def test_uniform_matches_circle(self):
        res = arc_entropy(ArcDensity.uniform(), 0.25)
        assert res["lower_bound"] == circle_graphon_entropy(0.25)
        assert res["exact"] is None
        assert arc_entropy(ArcDensity.uniform(), 1.0)["lower_bound"] == 0.0

    def test_smoothing_uniform(self):
        g = smooth_density(ArcDensity.uniform(), 0.3)
        assert g(np.linspace(0, 0.99, 7)) == pytest.approx(1.0)

    def test_wide_window_flattens(self):
        g = smooth_density(ArcDensity.piecewise_constant([0.0, 0.5], [2.0, 0.0]), 0.999)
        assert np.max(np.abs(g(np.linspace(0, 0.999, 101)) - 1.0)) < 5e-3

    def test_validation(self):
        with pytest.raises(DomainError):
            ArcDensity.piecewise_constant([0.0, 0.5], [1.0, 0.5])
        with pytest.raises(DomainError):
            ArcDensity.piecewise_constant([0.1], [1.0])
        with pytest.raises(DomainError):
            ArcDensity([0.0], [2.0], [-4.0])
        with pytest.raises(DomainError):
            smooth_density(ArcDensity([0.0, 0.5], [2.0, 0.0], [-4.0, 4.0]), 0.2)

    def test_entropy_against_quadrature(self):
        g = ArcDensity([0.0, 0.3], [0.5, 1.29], [1.0, -0.4])
        f = lambda x: float(g(x) * np.log(g(x)))  # noqa: E731
        numeric = -(quad(f, 0.0, 0.3, epsabs=1e-13)[0] + quad(f, 0.3, 1.0 - 1e-15, epsabs=1e-13)[0])
        assert differential_entropy(g) == pytest.approx(numeric, abs=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.0, 5.0), min_size=1, max_size=6), st.floats(0.01, 0.99))
    def test_smoothing_preserves_mass(self, values, alpha):
        values = np.array(values)
        if values.sum() <= 0:
            values[0] = 1.0
        m = values.size
        g_hat = ArcDensity.piecewise_constant(np.arange(m) / m, values * m / values.sum())
        g = smooth_density(g_hat, alpha)
        assert abs(g.total() - 1.0) <= 1e-10
        assert g.intercepts.min() >= 0 and g.end_values.min() >= -1e-12
        assert arc_entropy(g, alpha)["lower_bound"] <= -math.log(alpha) + 1e-9


class TestIndependentEvents:
    def test_half(self):
        assert independent_events_allbutone(0.5, 0.5) == math.log(2)

    @pytest.mark.parametrize("m", [0.5, 0.25, 0.1])
    def test_collapse(self, m):
        assert independent_events_allbutone(m, m) == -math.log(m)

    def test_value(self):
        expected = -0.9 * math.log(0.9) + 0.1 * (math.log(0.5) - math.log(0.5) - math.log(0.1))
        assert independent_events_allbutone(0.9, 0.5) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("m1, m_inf", [(0.3, 0.5), (1.0, 0.5), (0.5, 0.0)])
    def test_domain(self, m1, m_inf):
        with pytest.raises(DomainError):
            independent_events_allbutone(m1, m_inf)
