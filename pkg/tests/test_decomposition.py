from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import P_GRID
from pacman_decomp.decomposition import (
    Variant,
    atomic_splittings,
    beta_plus_by_F,
    beta_plus_by_inf,
    chasing,
    colliding,
    colliding_gap_witness,
    coupling_oracle_beta_star,
    csv_rows,
    decompose,
    find_positive_p,
    gap_report,
    marginals,
    sample_decomposed,
    w_form,
)
from pacman_decomp.errors import ConditionViolated, DegenerateMeasure, DomainError, TooLarge, ValidationError
from pacman_decomp.measure import ProbabilityMeasure, ks_statistic

HALF = F(1, 2)


def test_chasing_examples(measures):
    d = chasing(measures["two_point"], HALF)
    assert d.Y1 == d.Y1.constant(0) and d.delta == d.delta.constant(1)
    d = chasing(measures["uniform"], HALF)
    assert d.Y(F(3, 10)) == F(3, 20)
    assert d.delta == d.delta.constant(HALF)
    d = chasing(measures["three_point"], HALF)
    assert [d.delta(F(1, 3)), d.delta(HALF), d.delta(F(2, 3)), d.delta(F(5, 6))] == [1, 2, 2, 1]
    assert d.delta(F(1, 6)) == 1


def test_colliding_examples(measures):
    d = colliding(measures["uniform"], HALF)
    assert d.delta(F(3, 10)) == F(7, 10)
    assert d.delta.ess_supremum() == 1
    d = colliding(measures["three_point"], HALF)
    assert d.delta(F(1, 2)) == 2
    # at t = 2/3 the markers sit at G(1/3) = 0 and G(2/3) = 1
    assert d.delta(F(2, 3)) == 1
    assert d.delta(F(3, 4)) == 0
    d = colliding(measures["two_point"], F(1, 3))
    # Y1 reaches the atom at 1 once (2/3) t > 1/2
    assert all(d.delta(t) == 1 for t in (F(1, 10), HALF, F(3, 4)))
    assert d.delta(F(9, 10)) == 0


def test_invalid_inputs(measures):
    with pytest.raises(DomainError):
        chasing(measures["uniform"], 0)
    with pytest.raises(DomainError):
        chasing(measures["uniform"], 1 - F(1, 10**13))
    with pytest.raises(DegenerateMeasure):
        chasing(ProbabilityMeasure(atoms=[(1, 1)]), HALF)


@pytest.mark.parametrize("variant", list(Variant))
def test_structural_invariants(measures, variant):
    for mu in measures.values():
        for p in P_GRID:
            d = decompose(mu, p, variant)
            assert d.delta.infimum() >= 0
            assert d.delta == d.Y2 - d.Y1
            if variant is Variant.CHASING:
                assert d.Y1.is_monotone() and d.Y2.is_monotone()
                assert d.Y1.supremum() <= d.G(1 - p) <= d.G.right_limit(1 - p) <= d.Y2.infimum()
            else:
                assert d.delta.is_monotone(increasing=False)
                assert d.delta.ess_supremum() == mu.diameter


def test_marginal_examples(measures):
    rho1, rho2, res = marginals(chasing(measures["uniform"], HALF), measures["uniform"])
    assert res == 0
    assert rho1 == ProbabilityMeasure.uniform(0, HALF)
    assert rho2 == ProbabilityMeasure.uniform(HALF, 1)
    rho1, rho2, _ = marginals(chasing(measures["two_point"], HALF), measures["two_point"])
    assert rho1.atoms == ((0, 1),) and rho2.atoms == ((1, 1),)
    rho1, rho2, res = marginals(colliding(measures["uniform"], HALF), measures["uniform"])
    assert res == 0 and rho2 == ProbabilityMeasure.uniform(HALF, 1)


def test_beta_plus_examples(measures):
    for name, expected in (("two_point", 1), ("uniform", HALF), ("three_point", 1)):
        assert beta_plus_by_inf(chasing(measures[name], HALF)) == expected
        assert beta_plus_by_F(measures[name], HALF) == expected


def test_beta_plus_routes_agree(measures):
    for mu in measures.values():
        for p in P_GRID + [F(1, 3), F(3, 4), F(5, 8)]:
            assert beta_plus_by_inf(chasing(mu, p)) == beta_plus_by_F(mu, p)


def test_beta_plus_requires_chasing(measures):
    with pytest.raises(DomainError):
        beta_plus_by_inf(colliding(measures["uniform"], HALF))


def test_gap_report_examples(measures):
    g = gap_report(measures["uniform"], HALF)
    assert g.halftime_lower_bound == F(1, 4) and g.beta_plus == HALF and g.check()
    g = gap_report(measures["two_point"], HALF)
    assert g.halftime_lower_bound == 0 and g.beta_plus == 1 and g.check()
    g = gap_report(measures["three_point"], HALF, Variant.COLLIDING)
    assert g.beta_sharp == 2 == g.diameter


def test_gap_report_order_chain(measures):
    for mu in measures.values():
        for p in P_GRID:
            for v in Variant:
                assert gap_report(mu, p, v).check()


def test_find_positive_p(measures):
    assert find_positive_p(measures["two_point"]) == (HALF, 1)
    assert find_positive_p(measures["uniform"]) == (HALF, F(1, 4))
    p, lower = find_positive_p(measures["three_point"])
    assert p == F(2, 3) and lower > 0
    for mu in measures.values():
        p, lower = find_positive_p(mu)
        assert beta_plus_by_inf(chasing(mu, p)) >= lower > 0
    with pytest.raises(DegenerateMeasure):
        find_positive_p(ProbabilityMeasure(atoms=[(0, 1)]))


def test_colliding_witness(measures):
    p, mass = colliding_gap_witness(measures["uniform"], F(1, 4), F(3, 4), F(1, 4), F(1, 5))
    assert p == F(4, 9) and mass >= F(9, 20)
    p, mass = colliding_gap_witness(measures["two_point"], 0, HALF, HALF, F(2, 5))
    assert p == F(4, 9) and mass >= F(9, 10)
    with pytest.raises(ConditionViolated):
        colliding_gap_witness(measures["uniform"], F(1, 4), F(3, 4), HALF, F(1, 5))


def test_w_form_examples(measures):
    W, table = w_form(chasing(measures["two_point"], HALF))
    assert W == W.constant(HALF) and table == [(HALF, HALF)]
    W, table = w_form(chasing(measures["uniform"], HALF))
    assert W(F(1, 2)) == HALF and {b for _, b in table} == {F(1, 4)}
    W, table = w_form(chasing(measures["three_point"], HALF))
    assert table == [(HALF, HALF), (1, 1), (F(3, 2), HALF)]


def test_coupling_oracle_examples(measures):
    best, count = coupling_oracle_beta_star(measures["two_point"], HALF, return_count=True)
    assert best == 1 and count == 11
    beta = beta_plus_by_inf(chasing(measures["three_point"], HALF))
    assert coupling_oracle_beta_star(measures["three_point"], HALF) <= beta + measures["three_point"].diameter / 10
    p = F(1, 4)
    assert coupling_oracle_beta_star(measures["skewed_two_point"], p) <= beta_plus_by_F(measures["skewed_two_point"], p)


def test_coupling_oracle_limits(measures):
    with pytest.raises(ValidationError):
        coupling_oracle_beta_star(measures["uniform"], HALF)
    with pytest.raises(ValidationError):
        coupling_oracle_beta_star(ProbabilityMeasure.discrete(range(5)), HALF)
    with pytest.raises(ValidationError):
        coupling_oracle_beta_star(measures["three_point"], HALF, grid=21)
    with pytest.raises(TooLarge):
        coupling_oracle_beta_star(ProbabilityMeasure.discrete(range(4)), HALF, grid=20, budget=100)


def test_splittings_respect_marginals(measures):
    mu = measures["three_point"]
    p = HALF
    for rho1, rho2 in atomic_splittings(mu, p, grid=4):
        a, b = dict(rho1), dict(rho2)
        assert sum(a.values()) == 1 and sum(b.values()) == 1
        for x, m in mu.atoms:
            assert (1 - p) * a.get(x, 0) + p * b.get(x, 0) == m


def test_sample_decomposed(measures):
    n = 10**4
    s = sample_decomposed(chasing(measures["two_point"], HALF), n, seed=0)
    assert abs(s.values.mean() - 0.5) < 0.02
    n = 10**5
    for v in Variant:
        s = sample_decomposed(decompose(measures["uniform"], HALF, v), n, seed=1)
        assert ks_statistic(s, measures["uniform"]) < 1.95 / np.sqrt(n)
    a = sample_decomposed(chasing(measures["mixed"], HALF), 1, seed=5)
    b = sample_decomposed(chasing(measures["mixed"], HALF), 1, seed=5)
    assert a.values.tolist() == b.values.tolist()


def test_csv_rows_sides(measures):
    rows = csv_rows(chasing(measures["three_point"], HALF), grid=2)
    sides = [(r[0], r[1]) for r in rows]
    assert sides[0] == (0, "R") and sides[-1] == (1, "L")
    assert (F(1, 3), "L") in sides and (F(1, 3), "R") in sides and (F(1, 3), "V") in sides


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 12), st.integers(1, 6)), min_size=2, max_size=4, unique_by=lambda a: a[0]),
    st.integers(1, 19),
)
def test_routes_agree_random_atomic(raw, k):
    total = sum(m for _, m in raw)
    mu = ProbabilityMeasure(atoms=[(x, F(m, total)) for x, m in raw])
    p = F(k, 20)
    assert beta_plus_by_inf(chasing(mu, p)) == beta_plus_by_F(mu, p)
    for v in Variant:
        assert marginals(decompose(mu, p, v), mu)[2] == 0
