import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sortrefine.evaluate import (
    StructurednessValue, build_count_table, count_for_tau, expand, falling_factorial, restricted_partitions,
    round_half_up, satisfies, sigma_fast, sigma_naive, sigma_subset,
)
from sortrefine.rules import (
    And, CellEq, Not, PropEq, Rule, SubjConst, ValConst, cov_rule, depdisj_rule, dep_rule, parse_rule,
    sim_rule, symdep_rule,
)
from sortrefine.view import build_view, make_view

from _support import NS, P, Q, d1, d2, d3, dataset, random_dataset, random_rule, views


def test_d2_values():
    v = d2(3)
    assert sigma_naive(v, cov_rule()) == StructurednessValue(4, 6)
    assert sigma_fast(v, cov_rule()).value == Fraction(2, 3)
    assert sigma_fast(v, sim_rule()).value == Fraction(3, 4)
    assert sigma_fast(v, dep_rule(P, Q)).value == Fraction(1, 3)
    assert sigma_fast(v, dep_rule(Q, P)).value == 1


def test_cov_count_table_on_d2():
    t = build_count_table(d2(3), cov_rule())
    rows = {e.tau: (e.ante, e.both) for e in t.entries}
    assert rows == {((0, 0),): (2, 2), ((0, 1),): (2, 0), ((1, 0),): (1, 1), ((1, 1),): (1, 1)}
    assert t.totals() == StructurednessValue(4, 6)
    assert t.dump_tsv().splitlines()[1] == "(0:0)\t2\t2"


def test_dep_table_example():
    v = build_view(dataset({"a": ["p", "q"], "b": ["p"], "c": ["q"]}))
    assert sigma_fast(v, dep_rule(P, Q)).value == Fraction(1, 2)
    assert sigma_fast(v, dep_rule(Q, P)).value == Fraction(1, 2)
    assert sigma_fast(v, symdep_rule(P, Q)).value == Fraction(1, 3)
    # absent property: no antecedent case
    assert sigma_fast(v, dep_rule(NS + "zzz", P)).value == 1


def test_empty_total_is_one():
    v = d1(3)
    r = parse_rule("val($c) = 0 -> val($c) = 1")
    assert sigma_fast(v, r) == StructurednessValue(0, 0)
    assert sigma_fast(v, r).value == 1


def test_toy_dataset_closed_forms():
    for n in (2, 3, 10):
        assert sigma_naive(d1(n), cov_rule()).value == 1
        assert sigma_naive(d3(n), sim_rule()).value == 0
        assert sigma_naive(d2(n), cov_rule()).value == Fraction(n + 1, 2 * n)
        assert sigma_naive(d2(n), sim_rule()).value == Fraction(n, n + 1)
    assert sigma_fast(d2(1000), cov_rule()).value == Fraction(1001, 2000)
    assert sigma_fast(d2(1000), sim_rule()).value == Fraction(1000, 1001)


def test_falling_factorial_and_partitions():
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(2, 3) == 0
    assert list(restricted_partitions(3, 2)) == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1)]


@given(st.integers(0, 7), st.integers(0, 7))
def test_stirling_identity(m, cap):
    # n^m maps of m items into n labels, grouped by the partition of their fibres
    n = cap
    total = sum(falling_factorial(n, len(set(p))) for p in restricted_partitions(m, cap))
    assert total == n ** m
    blocks = [len(set(p)) for p in restricted_partitions(m, m)]
    assert len(blocks) == _bell(m)


def _bell(m):
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fast_matches_naive_on_random_rules(seed):
    rng = random.Random(seed)
    v = build_view(random_dataset(rng, 5, 3))
    subjects = sorted(v.members) + [NS + "ghost"]
    rule = random_rule(rng, list(v.properties), subjects, max_vars=2)
    assert sigma_fast(v, rule) == sigma_naive(v, rule)


@settings(max_examples=40, deadline=None)
@given(views(max_sigs=4, max_props=3, max_count=3))
def test_fast_matches_naive_builtins(v):
    rules = [cov_rule(), sim_rule()]
    for a in v.properties:
        for b in v.properties:
            rules += [dep_rule(a, b), symdep_rule(a, b), depdisj_rule(a, b)]
    for r in rules:
        assert sigma_fast(v, r) == sigma_naive(v, r)


@settings(max_examples=40, deadline=None)
@given(views(max_sigs=4, max_props=3, max_count=3), st.data())
def test_subset_matches_materialized_subview(v, data):
    chosen = data.draw(st.sets(st.integers(0, len(v) - 1), min_size=1))
    for r in (cov_rule(), sim_rule()):
        t = build_count_table(v, r)
        assert sigma_subset(t, v, chosen) == sigma_naive(v.subview(chosen), r)


@given(views(max_sigs=4, max_props=4, max_count=4), st.integers(2, 5))
def test_cov_is_invariant_under_scaling(v, c):
    scaled = make_view(v.properties, [(s.bits, s.count * c, s.sample) for s in v.signatures])
    assert sigma_fast(scaled, cov_rule()).value == sigma_fast(v, cov_rule()).value


def test_sim_ordered_pairs_form():
    # pairs of distinct cells sharing a column, first one set
    rng = random.Random(3)
    for _ in range(25):
        v = build_view(random_dataset(rng))
        m = expand(v)
        fav = tot = 0
        for p in range(len(m.properties)):
            col = [m.cells[s][p] for s in range(len(m.subjects))]
            for i in range(len(col)):
                for j in range(len(col)):
                    if i != j and col[i]:
                        tot += 1
                        fav += col[j]
        assert sigma_fast(v, sim_rule()) == StructurednessValue(fav, tot)


def test_subject_constants():
    v = build_view(dataset({"a": ["p", "q"], "b": ["p"], "c": ["p"]}))
    r = Rule(And(SubjConst("c", NS + "a"), CellEq("c", "c")), ValConst("c", 1))
    assert sigma_fast(v, r) == sigma_naive(v, r) == StructurednessValue(2, 2)
    r2 = Rule(And(SubjConst("c", NS + "b"), CellEq("c", "c")), ValConst("c", 1))
    assert sigma_fast(v, r2) == sigma_naive(v, r2) == StructurednessValue(1, 2)


def test_subject_constant_needs_index():
    v = make_view([P], [((1,), 2, NS + "a")])
    r = Rule(And(SubjConst("c", NS + "a"), CellEq("c", "c")), ValConst("c", 1))
    with pytest.raises(ValueError, match="no subject index"):
        sigma_fast(v, r)


def test_count_for_tau_direct():
    v = d2(3)
    assert count_for_tau(v, CellEq("c", "c"), [(0, 1)]) == 2
    f = And(And(Not(CellEq("a", "b")), PropEq("a", "b")), ValConst("a", 1))
    assert count_for_tau(v, f, [(0, 0), (0, 0)]) == 2
    assert count_for_tau(v, f, [(1, 0), (1, 0)]) == 0


def test_satisfies_matches_table():
    v = d2(2)
    m = expand(v)
    assert m.subjects == (NS + "s2", NS + "s1")
    assert satisfies(m, {"c": (1, 1)}, ValConst("c", 1))
    assert not satisfies(m, {"c": (0, 1)}, ValConst("c", 1))


def test_round_half_up():
    assert round_half_up(Fraction(2, 3)) == "0.67"
    assert round_half_up(Fraction(1, 8)) == "0.13"
    assert round_half_up(Fraction(1, 200)) == "0.01"
    assert round_half_up(Fraction(1)) == "1.00"
