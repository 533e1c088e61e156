import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from sortrefine.evaluate import build_count_table
from sortrefine.ilp import (
    IlpSolution, ModelTooLarge, add_symmetry_breaking, build_model, export_lp, hash_coefficients, sort_hash,
    verify_solution, violated,
)
from sortrefine.rules import cov_rule, sim_rule
from sortrefine.solver import solve_native

from _support import d2, exhaustive_feasible, random_view, views

GOLDEN = Path(__file__).parent / "golden"


def _model(v, rule, k, theta, symmetry=True):
    m = build_model(v, build_count_table(v, rule), k, Fraction(theta))
    return add_symmetry_breaking(m) if symmetry else m


def test_d2_counts():
    m = _model(d2(3), cov_rule(), 2, 1, symmetry=False)
    assert m.counts() == {"X": 4, "U": 4, "T": 8}
    assert len(m.var_names) == 16
    assert not any(c.name.startswith("hash") for c in m.constraints)
    assert [c.name for c in _model(d2(3), cov_rule(), 2, 1).constraints if c.name.startswith("hash")] == ["hash_1"]
    assert not any(c.name.startswith("hash") for c in _model(d2(3), cov_rule(), 1, 1).constraints)


def test_golden_lp():
    text = export_lp(_model(d2(3), cov_rule(), 2, 1))
    assert text == (GOLDEN / "d2_cov_k2_theta1.lp").read_text()


def test_export_is_deterministic():
    v = random_view(random.Random(11), max_sigs=5)
    a = export_lp(_model(v, sim_rule(), 3, Fraction(3, 4)))
    b = export_lp(_model(v, sim_rule(), 3, Fraction(3, 4)))
    assert a == b


def test_theta_row_coefficients():
    m = _model(d2(3), cov_rule(), 1, Fraction(2, 3), symmetry=False)
    row = next(c for c in m.constraints if c.name == "theta_1")
    # 3*both - 2*ante for each rough assignment
    assert dict((v, c) for c, v in row.terms) == {"T_1_t0": 2, "T_1_t1": -4, "T_1_t2": 1, "T_1_t3": 1}


def test_hash_coefficients_wrap():
    assert hash_coefficients(5, 3) == [1, 2, 4, 1, 2]
    assert sort_hash([0, 2], 5, 3) == 5
    with pytest.raises(ValueError):
        hash_coefficients(3, 0)


def test_size_cap():
    v = d2(3)
    with pytest.raises(ModelTooLarge):
        build_model(v, build_count_table(v, cov_rule()), 2, Fraction(1), max_t_vars=3)


def test_verify_detects_perturbation():
    v = d2(3)
    t = build_count_table(v, cov_rule())
    res = solve_native(v, t, 2, Fraction(1))
    m = add_symmetry_breaking(build_model(v, t, 2, Fraction(1)))
    assert verify_solution(m, res.solution)
    for name in m.var_names:
        flipped = dict(res.solution.values)
        flipped[name] ^= 1
        assert not verify_solution(m, IlpSolution(flipped)), name
        assert violated(m, IlpSolution(flipped))
    missing = dict(res.solution.values)
    del missing["X_1_0"]
    assert not verify_solution(m, IlpSolution(missing))


def _brute_force_model(m) -> bool:
    """Feasibility by enumerating X and deriving U, T (tiny models only)."""
    import itertools

    k, L, P = m.k, m.n_signatures, m.n_properties
    for labels in itertools.product(range(k), repeat=L):
        free = [v for v in m.var_names if not v.startswith("X_")]
        base = {f"X_{i}_{s}": int(labels[s] == i - 1) for i in range(1, k + 1) for s in range(L)}
        for bits in itertools.product((0, 1), repeat=len(free)):
            vals = dict(base, **dict(zip(free, bits)))
            if all(c.holds(vals) for c in m.constraints):
                return True
    return False


@settings(max_examples=15, deadline=None)
@given(views(max_sigs=3, max_props=2, max_count=2), st.integers(1, 2),
       st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(3, 4), Fraction(1)]))
def test_model_feasibility_matches_partition_oracle(v, k, theta):
    m = _model(v, cov_rule(), k, theta, symmetry=False)
    if len(m.var_names) - k * len(v) > 14:
        return
    assert _brute_force_model(m) == exhaustive_feasible(v, cov_rule(), k, theta)


highspy = pytest.importorskip("highspy")


def _highs_feasible(text: str, tmp_path) -> bool:
    path = tmp_path / "m.lp"
    path.write_text(text)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    h.run()
    status = h.getModelStatus()
    assert status in (highspy.HighsModelStatus.kOptimal, highspy.HighsModelStatus.kInfeasible)
    return status == highspy.HighsModelStatus.kOptimal


def test_highs_reads_golden(tmp_path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(GOLDEN / "d2_cov_k2_theta1.lp")) == highspy.HighsStatus.kOk
    lp = h.getLp()
    assert lp.num_col_ == 16
    assert lp.num_row_ == 31


@pytest.mark.parametrize("seed", range(25))
def test_highs_agrees_with_native(seed, tmp_path):
    rng = random.Random(seed)
    v = random_view(rng, max_sigs=4, max_props=3)
    rule = rng.choice([cov_rule(), sim_rule()])
    k = rng.randint(1, 3)
    theta = rng.choice([Fraction(1, 2), Fraction(3, 4), Fraction(9, 10), Fraction(1)])
    t = build_count_table(v, rule)
    text = export_lp(add_symmetry_breaking(build_model(v, t, k, theta)))
    assert _highs_feasible(text, tmp_path) == solve_native(v, t, k, theta).feasible
