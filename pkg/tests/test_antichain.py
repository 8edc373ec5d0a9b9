import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from pacman_decomp.antichain import (
    Antichain,
    BernoulliProfile,
    antichain_probability,
    binomial_mode_mass,
    comparable_pair,
    dedekind_count,
    double_sampling_split,
    engel_trend,
    enumerate_antichains,
    is_antichain,
    lym_sum,
    max_weight_antichain,
    parse_configurations,
    sperner_bound_iid,
    sperner_bound_varied,
    within_sperner_iid,
)
from pacman_decomp.errors import DomainError, MixedDimensions, NotAntichain, TooLarge, ValidationError

MIDDLE4 = [(0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1), (1, 0, 1, 0), (1, 1, 0, 0)]


def test_is_antichain_examples():
    assert is_antichain(MIDDLE4)
    assert not is_antichain([(0, 0), (0, 1)])
    assert is_antichain([(0, 2), (1, 1), (2, 0)])


def test_antichain_construction():
    A = Antichain.of(MIDDLE4 + MIDDLE4[:2])
    assert len(A) == 6 and A.N == 4 and A.layer_counts() == [0, 0, 6, 0, 0]
    with pytest.raises(NotAntichain) as exc:
        Antichain.of([(1, 0), (1, 1)])
    assert exc.value.pair == ((1, 0), (1, 1))
    with pytest.raises(MixedDimensions):
        Antichain.of([(1, 0), (1,)])
    with pytest.raises(ValidationError):
        Antichain.of([])
    assert len(Antichain.of([], N=3)) == 0


def test_lym_examples():
    assert lym_sum(Antichain.of(MIDDLE4)) == 1
    assert lym_sum(Antichain.of([(1, 0, 0, 0, 0)])) == F(1, 5)
    assert lym_sum(Antichain.of([], N=4)) == 0


def test_probability_examples():
    half = BernoulliProfile.iid(4, F(1, 2))
    assert antichain_probability(Antichain.of(MIDDLE4), half) == F(3, 8)
    assert antichain_probability(Antichain.of([], N=4), half) == 0
    layer1 = Antichain.of([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert antichain_probability(layer1, BernoulliProfile((0.2, 0.5, 0.8))) == F(42, 100)


def test_iid_layer_formula_matches_direct_sum():
    prof = BernoulliProfile.iid(4, F(3, 10))
    for A in enumerate_antichains(4):
        direct = sum((F(3, 10) ** sum(c) * F(7, 10) ** (4 - sum(c)) for c in A), F(0))
        assert antichain_probability(A, prof) == direct


def test_sperner_bounds():
    assert sperner_bound_iid(4, 0.5) == pytest.approx(2 * math.sqrt(2))
    assert sperner_bound_iid(64, 0.5) == pytest.approx(0.70710678)
    assert sperner_bound_iid(100, 0.1) == pytest.approx(0.94280904)
    assert sperner_bound_varied(BernoulliProfile.iid(4, 0.5)) == pytest.approx(4)
    prof = BernoulliProfile([0.25, 0.75] * 50)
    assert sperner_bound_varied(prof, 100) == pytest.approx(1.6)
    assert sperner_bound_varied(BernoulliProfile.iid(1, 0.5)) == pytest.approx(8)
    assert within_sperner_iid(F(3, 8), 4, F(1, 2))
    assert not within_sperner_iid(1, 64, F(1, 2))


def test_binomial_mode():
    assert binomial_mode_mass(4, F(1, 2)) == (2, F(3, 8))
    assert binomial_mode_mass(1, 0.3) == (0, F(7, 10))
    k, m = binomial_mode_mass(10, 0.3)
    assert k == 3 and float(m) == pytest.approx(0.2668279)


def test_double_sampling():
    assert double_sampling_split(0.3, 0.75) == F(2, 5)
    assert double_sampling_split(0.4, 0.4) == 1
    with pytest.raises(DomainError):
        double_sampling_split(0.1, 0.05)


def test_enumeration_counts():
    assert [len(enumerate_antichains(n)) for n in (1, 2, 3, 4)] == [3, 6, 20, 168]
    assert [dedekind_count(n) for n in (1, 2, 3, 4, 5)] == [3, 6, 20, 168, 7581]
    listing = enumerate_antichains(1)
    assert [A.members for A in listing] == [(), ((0,),), ((1,),)]
    with pytest.raises(TooLarge):
        enumerate_antichains(6)


def test_enumeration_all_valid():
    for A in enumerate_antichains(3):
        assert comparable_pair(A.members) is None


def test_max_weight_examples():
    _, w = max_weight_antichain(4, BernoulliProfile.iid(4, F(1, 2)))
    assert w == F(3, 8)
    A, w = max_weight_antichain(1, BernoulliProfile.iid(1, F(7, 10)))
    assert w == F(7, 10) and A.members == ((1,),)
    _, w = max_weight_antichain(5, BernoulliProfile.iid(5, F(1, 2)))
    assert w == F(10, 32)
    with pytest.raises(TooLarge):
        max_weight_antichain(17, BernoulliProfile.iid(17, F(1, 2)))


@settings(max_examples=15, deadline=None)
@given(st.lists(st.fractions(min_value=F(1, 20), max_value=F(19, 20)), min_size=3, max_size=4))
def test_max_weight_matches_enumeration_varied(ps):
    prof = BernoulliProfile(ps)
    N = len(ps)
    best = max(antichain_probability(A, prof) for A in enumerate_antichains(N))
    A, w = max_weight_antichain(N, prof)
    assert w == best == antichain_probability(A, prof)


def test_engel_trend_values():
    # exact binomials: C(N, N/2) 2^-N * sqrt(pi N / 2)
    out = dict(engel_trend([4, 16, 64]))
    for N, v in out.items():
        expected = math.comb(N, N // 2) / 2**N * 0.5 * math.sqrt(2 * math.pi * N)
        assert v == pytest.approx(expected, rel=1e-12)
    assert out[4] == pytest.approx(0.9400, abs=1e-3)
    assert out[4] < out[16] < out[64] < 1
    with pytest.raises(DomainError):
        engel_trend([5])


def test_parse_configurations():
    groups = parse_configurations("0 1\n1 0\n\n# next\n1 1\n")
    assert groups == [[(0, 1), (1, 0)], [(1, 1)]]
    with pytest.raises(MixedDimensions):
        parse_configurations("0 1\n1\n")
    with pytest.raises(ValidationError):
        parse_configurations("0 a\n")
