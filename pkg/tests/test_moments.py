"""Moment tables, finite differences, positivity scan, mass identities."""

import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urnwalk import (
    DirichletEnv,
    DirichletLaw,
    MomentOrderError,
    NotAdmissibleError,
    build_moment_table,
    finite_difference,
    hildebrandt_schoenberg_check,
    log_multinomial,
    multinomial,
    simplex_mass,
    tabulated_witness,
)
from urnwalk.moments import ball_indices, slice_indices


def iterated_difference(table, h, k):
    """Independent oracle: apply the one-step differences recursively."""
    h = tuple(h)
    k = tuple(k)
    for axis, steps in enumerate(h):
        if steps > 0:
            lower = h[:axis] + (steps - 1,) + h[axis + 1 :]
            bump = k[:axis] + (k[axis] + 1,) + k[axis + 1 :]
            return iterated_difference(table, lower, bump) - iterated_difference(
                table, lower, k
            )
    return table.value(k)


@pytest.fixture(scope="module")
def uniform_urn_table():
    return build_moment_table(DirichletLaw([1.0, 1.0]), 8)


class TestBuildMomentTable:
    def test_origin_is_one(self, uniform_urn_table):
        assert uniform_urn_table.value((0, 0)) == 1.0

    def test_staircase_values(self, uniform_urn_table):
        assert uniform_urn_table.value((1, 1)) == pytest.approx(1 / 6, rel=1e-13)
        assert uniform_urn_table.value((2, 0)) == pytest.approx(1 / 3, rel=1e-13)

    def test_matches_dirichlet_closed_form(self, law_map, env_map):
        pairs = [
            ("polya_1_1", "dirichlet_1_1"),
            ("polya_2_3", "dirichlet_2_3"),
            ("polya_h_h_2", "dirichlet_h_h_2"),
            ("polya_1_2_3_4", "dirichlet_1_2_3_4"),
        ]
        for law_name, env_name in pairs:
            table = build_moment_table(law_map[law_name], 6)
            env = env_map[env_name]
            for k in ball_indices(env.dimension, 6):
                assert table.value(k) == pytest.approx(
                    env.mixed_moment(k), rel=1e-12
                ), law_name

    def test_monotone_in_every_coordinate(self, law_map):
        for name, law in law_map.items():
            table = build_moment_table(law, 5)
            for k in ball_indices(law.dimension, 4):
                for i in range(law.dimension):
                    bumped = k[:i] + (k[i] + 1,) + k[i + 1 :]
                    assert table.value(bumped) <= table.value(k), name

    def test_witness_is_rejected(self):
        with pytest.raises(NotAdmissibleError):
            build_moment_table(tabulated_witness(), 2)


class TestFiniteDifference:
    def test_zero_difference_returns_the_value(self, uniform_urn_table):
        assert finite_difference(uniform_urn_table, (0, 0), (2, 1)) == pytest.approx(
            uniform_urn_table.value((2, 1))
        )

    def test_one_step(self, uniform_urn_table):
        assert finite_difference(uniform_urn_table, (1, 0), (0, 0)) == pytest.approx(
            -0.5, rel=1e-13
        )

    def test_mixed_second_difference(self, uniform_urn_table):
        assert finite_difference(uniform_urn_table, (1, 1), (0, 0)) == pytest.approx(
            1 / 6, rel=1e-12
        )

    def test_out_of_order_request(self, uniform_urn_table):
        with pytest.raises(MomentOrderError):
            finite_difference(uniform_urn_table, (5, 0), (4, 0))

    @given(
        h1=st.integers(min_value=0, max_value=3),
        h2=st.integers(min_value=0, max_value=3),
        k1=st.integers(min_value=0, max_value=2),
        k2=st.integers(min_value=0, max_value=2),
    )
    @settings(max_examples=100, deadline=None)
    def test_expansion_equals_iterated_one_step(self, uniform_urn_table, h1, h2, k1, k2):
        if h1 + h2 + k1 + k2 > uniform_urn_table.order:
            return
        expansion = finite_difference(uniform_urn_table, (h1, h2), (k1, k2))
        iterated = iterated_difference(uniform_urn_table, (h1, h2), (k1, k2))
        assert expansion == pytest.approx(iterated, abs=1e-12)

    def test_one_step_difference_equals_minus_neighbor_sum(self, law_map):
        # when the law's weights sum to 1, -Delta^{e_i} v(k) = sum_{j != i} v_{k+e_j}
        for name, law in law_map.items():
            table = build_moment_table(law, 5)
            d = law.dimension
            for k in ball_indices(d, 3):
                for i in range(d):
                    lhs = -finite_difference(table, tuple(int(a == i) for a in range(d)), k)
                    rhs = math.fsum(
                        table.value(k[:j] + (k[j] + 1,) + k[j + 1 :])
                        for j in range(d)
                        if j != i
                    )
                    assert lhs == pytest.approx(rhs, abs=1e-12), name


class TestPositivityScan:
    def test_uniform_urn_passes(self, uniform_urn_table):
        report = hildebrandt_schoenberg_check(uniform_urn_table)
        assert report.passed
        assert report.max_negativity >= -1e-12

    def test_polynomial_law_passes(self, law_map):
        table = build_moment_table(law_map["poly_quadratic_3d"], 8)
        assert hildebrandt_schoenberg_check(table).passed

    def test_corrupted_table_fails(self, uniform_urn_table):
        corrupted = uniform_urn_table.with_value((1, 0), 1.5)
        report = hildebrandt_schoenberg_check(corrupted)
        assert not report.passed
        # the overwritten entry breaks monotonicity: -(v(1,0) - v(0,0)) = -0.5
        assert finite_difference(corrupted, (1, 0), (0, 0)) == pytest.approx(0.5)
        assert report.max_negativity <= -0.5

    def test_threads_agree_with_sequential(self, uniform_urn_table):
        seq = hildebrandt_schoenberg_check(uniform_urn_table)
        par = hildebrandt_schoenberg_check(uniform_urn_table, threads=4)
        assert seq == par

    def test_report_serializes(self, uniform_urn_table):
        import json

        payload = json.loads(json.dumps(hildebrandt_schoenberg_check(uniform_urn_table).to_dict()))
        assert payload["passed"] is True
        assert payload["order_checked"] == 8


class TestSimplexMass:
    def test_degree_zero(self, uniform_urn_table):
        assert simplex_mass(uniform_urn_table, 0) == 1.0

    def test_degree_one_is_the_simplex_constraint(self, law_map):
        for name, law in law_map.items():
            table = build_moment_table(law, 2)
            assert simplex_mass(table, 1) == pytest.approx(1.0, abs=1e-12), name

    def test_degree_two_slice(self, uniform_urn_table):
        # 1/3 + 2 * 1/6 + 1/3
        assert simplex_mass(uniform_urn_table, 2) == pytest.approx(1.0, abs=1e-13)

    def test_beyond_order_raises(self, uniform_urn_table):
        with pytest.raises(MomentOrderError):
            simplex_mass(uniform_urn_table, 9)


class TestMultinomial:
    def test_small_values(self):
        assert multinomial((1, 1)) == 2
        assert multinomial((2, 2)) == 6
        assert multinomial((0, 0, 0)) == 1

    def test_row_sums_are_powers(self):
        for n in range(7):
            assert sum(multinomial(k) for k in slice_indices(3, n)) == 3**n

    def test_log_agrees_with_exact(self):
        for k in [(3, 4), (10, 20, 5), (40, 1, 2)]:
            assert log_multinomial(k) == pytest.approx(
                math.log(multinomial(k)), rel=1e-12
            )


def test_moment_table_round_trips_environment_moments(env_map):
    env = env_map["poly_quadratic_3d"]
    from urnwalk import law_from_env

    table = build_moment_table(law_from_env(env), 6)
    for k in ball_indices(3, 6):
        assert table.value(k) == pytest.approx(env.mixed_moment(k), rel=1e-11)


def test_with_value_requires_positive_entries(uniform_urn_table):
    with pytest.raises(ValueError):
        uniform_urn_table.with_value((1, 0), 0.0)
