import dataclasses
import io
from fractions import Fraction as F

import numpy as np
import pytest

from pacman_decomp.errors import DomainError, GapViolation, SupportViolation, ValidationError
from pacman_decomp.lattice import (
    SingleSiteProfile,
    parse_box,
    parse_stencil,
    site_draws,
    split_potential,
    verify_split,
    write_split_csv,
)
from pacman_decomp.measure import ProbabilityMeasure

HALF = F(1, 2)
KRON1 = SingleSiteProfile.kronecker(1)


def test_two_point_split(measures):
    s = split_potential(measures["two_point"], HALF, KRON1, (8,), seed=0, M=1)
    assert np.all(s.background == 0) and np.all(s.delta == 1)
    assert verify_split(s, measures["two_point"]).ok


def test_uniform_split(measures):
    s = split_potential(measures["uniform"], HALF, KRON1, (8,), seed=0)
    assert np.all(s.background == s.Y)
    assert all(0 <= y <= HALF for y in s.Y)
    assert set(s.delta) == {HALF}
    assert s.b_minus == HALF and s.b_plus == 1


def test_overlapping_stencil(measures):
    u = SingleSiteProfile({(-1,): 1, (0,): 1, (1,): 1})
    s = split_potential(measures["uniform"], HALF, u, (8,), seed=0)
    assert s.U_plus == 3
    r = verify_split(s, measures["uniform"])
    assert r.ok, r.failures


def test_background_is_periodic_convolution(measures):
    u = SingleSiteProfile({(0, 0): 1, (1, 0): HALF})
    s = split_potential(measures["mixed"], None, u, (4, 3), seed=1)
    for x in np.ndindex(4, 3):
        left = ((x[0] - 1) % 4, x[1])
        assert s.background[x] == s.Y[x] + HALF * s.Y[left]


def test_fault_injection(measures):
    mu = measures["three_point"]
    s = split_potential(mu, None, SingleSiteProfile.kronecker(2), (8, 8), seed=2)
    bad = s.delta.copy()
    bad[3, 3] = s.b_minus - F(1, 10**9)
    assert "GapViolation" in verify_split(dataclasses.replace(s, delta=bad), mu).failures
    bg = s.background.copy()
    bg[0, 0] = s.U_plus + 1
    assert "BackgroundBound" in verify_split(dataclasses.replace(s, background=bg), mu).failures
    eta = s.eta.copy()
    eta[1, 1] = 2
    assert "BinaryEta" in verify_split(dataclasses.replace(s, eta=eta), mu).failures


def test_errors(measures):
    with pytest.raises(SupportViolation):
        split_potential(ProbabilityMeasure.discrete([-1, 1]), HALF, KRON1, (4,), 0)
    with pytest.raises(SupportViolation):
        split_potential(measures["three_point"], HALF, KRON1, (4,), 0, M=1)
    with pytest.raises(GapViolation):
        split_potential(measures["skewed_two_point"], HALF, KRON1, (4,), 0)
    with pytest.raises(DomainError):
        split_potential(measures["uniform"], HALF, KRON1, (4, 4), 0)


def test_warns_without_mass_near_ends():
    mu = ProbabilityMeasure.discrete([1, 2])
    with pytest.warns(UserWarning):
        split_potential(mu, HALF, KRON1, (4,), 0, M=5)


def test_profile_validation():
    with pytest.raises(ValidationError):
        SingleSiteProfile({(1,): 1})
    with pytest.raises(ValidationError):
        SingleSiteProfile({(0,): 1, (1,): -1})
    u = parse_stencil("# plus\n0 0 1\n1 0 1/2\n")
    assert u.dim == 2 and u.total == F(3, 2) and u.radius == 1
    assert parse_box("32x32") == (32, 32) and parse_box("8") == (8,)
    with pytest.raises(ValidationError):
        parse_box("3x0")


def test_site_draws_prefix_stable():
    t1, v1 = site_draws(5, 10)
    t2, v2 = site_draws(5, 100)
    assert np.array_equal(t1, t2[:10]) and np.array_equal(v1, v2[:10])


def test_float_split_matches_exact(measures):
    mu = measures["gapped"]
    u = SingleSiteProfile.kronecker(2)
    a = split_potential(mu, None, u, (6, 6), seed=4)
    b = split_potential(mu, None, u, (6, 6), seed=4, exact=False)
    assert np.allclose(np.asarray(a.omega, float), b.omega, rtol=1e-12, atol=1e-12)
    assert verify_split(b, mu, tolerance=1e-12).ok


def test_csv_header(measures):
    s = split_potential(measures["uniform"], HALF, KRON1, (3,), seed=0)
    buf = io.StringIO()
    write_split_csv(s, buf)
    lines = buf.getvalue().splitlines()
    assert lines[:5] == ["# M=1.0", "# p=0.5", "# U_plus=1.0", "# b_minus=0.5", "# b_plus=1.0"]
    assert lines[5] == "xi,t,eta,Y,delta,omega" and len(lines) == 9
