"""Chasing and colliding Pac-Man decompositions ``X = Y(t) + delta(t) * eta``.

Both variants consume the quantile function ``G`` of the measure with two
markers moving at rates ``1-p`` and ``p``:

* chasing:   ``Y1(t) = G((1-p)t)``,  ``Y2(t) = G(1-p+pt)``
* colliding: ``Y1(t) = G((1-p)t)``,  ``Y2(t) = G(1-pt)``

with ``delta = Y2 - Y1``. Everything here is exact rational arithmetic except
the sampling helpers.
"""

import csv
import enum
import itertools
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._exact import as_fraction, fmt
from .errors import ConditionViolated, DegenerateMeasure, DomainError, TooLarge, ValidationError
from .measure import EmpiricalSample, ProbabilityMeasure
from .piecewise import PiecewiseAffine

P_EDGE = Fraction(1, 10**12)


class Variant(str, enum.Enum):
    CHASING = "chasing"
    COLLIDING = "colliding"


@dataclass(frozen=True, eq=False)
class BernoulliDecomposition:
    p: Fraction
    variant: Variant
    G: PiecewiseAffine
    Y1: PiecewiseAffine
    Y2: PiecewiseAffine
    delta: PiecewiseAffine

    @property
    def Y(self):
        return self.Y1

    def breakpoints(self):
        return sorted(set(self.Y1.breakpoints) | set(self.Y2.breakpoints))


def _check_inputs(mu, p):
    p = as_fraction(p)
    if not (P_EDGE < p < 1 - P_EDGE):
        raise DomainError(f"p = {p} must lie strictly inside (0, 1)")
    if mu.is_degenerate:
        raise DegenerateMeasure("support of the measure is a single point")
    return p


def chasing(mu, p):
    """Decomposition with both markers moving right; ``inf delta > 0`` for suitable p."""
    p = _check_inputs(mu, p)
    G = mu.quantile
    Y1 = G.compose(1 - p, 0)
    Y2 = G.compose(p, 1 - p)
    return BernoulliDecomposition(p, Variant.CHASING, G, Y1, Y2, (Y2 - Y1).simplify())


def colliding(mu, p):
    """Decomposition with markers moving toward each other; ``sup delta`` is the diameter."""
    p = _check_inputs(mu, p)
    G = mu.quantile
    Y1 = G.compose(1 - p, 0)
    Y2 = G.compose(-p, 1)
    return BernoulliDecomposition(p, Variant.COLLIDING, G, Y1, Y2, (Y2 - Y1).simplify())


def decompose(mu, p, variant=Variant.CHASING):
    return chasing(mu, p) if Variant(variant) is Variant.CHASING else colliding(mu, p)


def pushforward_measure(f):
    """Image of Lebesgue measure on (0, 1) under a monotone piecewise-affine ``f``."""
    atoms, segments = {}, []
    for l, r, a, c in f.pieces():
        if a == 0:
            atoms[c] = atoms.get(c, Fraction(0)) + (r - l)
        else:
            lo, hi = sorted((a * l + c, a * r + c))
            segments.append((lo, hi, r - l))
    segments.sort()
    merged = []
    for seg in segments:
        # adjacent pieces with equal density form one segment
        if merged and merged[-1][1] == seg[0]:
            a0, b0, m0 = merged[-1]
            if m0 * (seg[1] - seg[0]) == seg[2] * (b0 - a0):
                merged[-1] = (a0, seg[1], m0 + seg[2])
                continue
        merged.append(seg)
    return ProbabilityMeasure(atoms.items(), merged)


def marginals(d, mu):
    """Marginal laws of ``Y1`` and ``Y2`` and the worst CDF residual of
    ``(1-p) F1 + p F2 - F``.

    The residual is evaluated at every knot of the three measures and at the
    left limits there; between knots all three CDFs are affine, so this is the
    exact supremum.
    """
    rho1, rho2 = pushforward_measure(d.Y1), pushforward_measure(d.Y2)
    p = d.p
    pts = set(mu.knots) | set(rho1.knots) | set(rho2.knots)
    worst = Fraction(0)
    for x in pts:
        r = (1 - p) * rho1.cdf(x) + p * rho2.cdf(x) - mu.cdf(x)
        rl = (1 - p) * rho1.cdf_left(x) + p * rho2.cdf_left(x) - mu.cdf_left(x)
        worst = max(worst, abs(r), abs(rl))
    return rho1, rho2, worst


def beta_plus_by_inf(d):
    """inf over t of the chasing gap, from one-sided limits at every breakpoint."""
    if d.variant is not Variant.CHASING:
        raise DomainError("beta_plus is defined for the chasing decomposition")
    return d.delta.infimum()


# -- distribution-function route ---------------------------------------------


class _CDF:
    """Right-continuous CDF that is affine between knots.

    ``left[i]`` and ``right[i]`` hold F(x_i-) and F(x_i).
    """

    def __init__(self, knots, left, right):
        self.x = list(knots)
        self.left = list(left)
        self.right = list(right)

    @classmethod
    def of(cls, mu):
        xs = mu.knots
        return cls(xs, [mu.cdf_left(x) for x in xs], [mu.cdf(x) for x in xs])

    def clipped(self, level, transform):
        """Apply ``transform`` (affine on each side of ``level``) to the values,
        inserting a knot wherever F crosses ``level`` on an affine stretch."""
        xs, ls, rs = [], [], []
        for i, x in enumerate(self.x):
            if i > 0:
                x0, v0, v1 = self.x[i - 1], self.right[i - 1], self.left[i]
                if v0 < level < v1:
                    xc = x0 + (level - v0) * (x - x0) / (v1 - v0)
                    xs.append(xc)
                    ls.append(level)
                    rs.append(level)
            xs.append(x)
            ls.append(self.left[i])
            rs.append(self.right[i])
        return _CDF(xs, [transform(v) for v in ls], [transform(v) for v in rs])

    def __call__(self, x):
        i = bisect_right(self.x, x)
        if i == 0:
            return Fraction(0)
        if self.x[i - 1] == x or i == len(self.x):
            return self.right[i - 1]
        return self._interp(i - 1, x)

    def at_left(self, x):
        i = bisect_left(self.x, x)
        if i < len(self.x) and self.x[i] == x:
            return self.left[i]
        if i == 0:
            return Fraction(0)
        if i == len(self.x):
            return self.right[-1]
        return self._interp(i - 1, x)

    def _interp(self, k, x):
        x0, x1 = self.x[k], self.x[k + 1]
        v0, v1 = self.right[k], self.left[k + 1]
        return v0 + (v1 - v0) * (x - x0) / (x1 - x0)

    def vertex_levels(self):
        for x, l, r in zip(self.x, self.left, self.right):
            yield x, l
            yield x, r

    def first_reaching(self, y):
        """inf{x : F(x) >= y}, or None when infinite."""
        if y <= 0:
            return None
        for i, x in enumerate(self.x):
            if self.right[i] >= y:
                if i > 0 and self.right[i - 1] < y < self.left[i]:
                    return self._solve(i - 1, y)
                return x
        return None

    def last_below(self, y):
        """sup{x : F(x-) <= y}, or None when infinite."""
        if y < 0 or y >= 1:
            return None
        for i in range(len(self.x) - 1, -1, -1):
            if self.left[i] <= y:
                if self.right[i] <= y and i + 1 < len(self.x):
                    return self._solve(i, y)
                return self.x[i]
        return None

    def _solve(self, k, y):
        x0, x1 = self.x[k], self.x[k + 1]
        v0, v1 = self.right[k], self.left[k + 1]
        return x0 + (y - v0) * (x1 - x0) / (v1 - v0)


def _dominates(F1, F2, b):
    """True iff F1(x) >= F2(x + b) for every real x."""
    pts = sorted(set(F1.x) | {x - b for x in F2.x})
    for x in pts:
        if F1(x) < F2(x + b) or F1.at_left(x) < F2.at_left(x + b):
            return False
    return True


def _domination_sup(F1, F2):
    """sup{b : F1(x) >= F2(x+b) for all x}.

    The supremum is a contact shift: a vertex of one completed CDF graph meets
    the other graph at an end of its level set. Those shifts are enumerated,
    then the feasible/infeasible boundary is located among them.
    """
    cands = set()
    for x1, y in F1.vertex_levels():
        for x2 in (F2.first_reaching(y), F2.last_below(y)):
            if x2 is not None:
                cands.add(x2 - x1)
    for x2, y in F2.vertex_levels():
        for x1 in (F1.first_reaching(y), F1.last_below(y)):
            if x1 is not None:
                cands.add(x2 - x1)
    cands = sorted(cands)
    lo, hi = 0, len(cands)  # feasible prefix length
    while lo < hi:
        mid = (lo + hi) // 2
        if _dominates(F1, F2, cands[mid]):
            lo = mid + 1
        else:
            hi = mid
    if lo == 0:
        return cands[0]
    best = cands[lo - 1]
    if lo == len(cands):
        return best
    nxt = cands[lo]
    # the boundary is a candidate; decide whether it is attained
    return nxt if _dominates(F1, F2, (best + nxt) / 2) else best


def plus_marginal_cdfs(mu, p):
    """The chasing marginal CDFs ``min{F, 1-p}/(1-p)`` and ``max{F+p-1, 0}/p``."""
    p = _check_inputs(mu, p)
    F = _CDF.of(mu)
    F1 = F.clipped(1 - p, lambda v: min(v, 1 - p) / (1 - p))
    F2 = F.clipped(1 - p, lambda v: max(v + p - 1, Fraction(0)) / p)
    return F1, F2


def beta_plus_by_F(mu, p):
    """beta+ from the chasing marginal CDFs alone, without building G."""
    F1, F2 = plus_marginal_cdfs(mu, p)
    return _domination_sup(F1, F2)


# -- gap report ---------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    beta_plus: Fraction
    beta_sharp: Fraction
    T1: Fraction
    T2: Fraction
    halftime_lower_bound: Fraction
    diameter: Fraction

    def check(self):
        ok = (
            self.halftime_lower_bound <= self.beta_plus
            and 0 <= self.beta_plus <= self.beta_sharp <= self.diameter
        )
        if self.T1 > self.T2:
            ok = ok and self.beta_plus > 0
        return ok


def gap_report(mu, p, variant=Variant.CHASING):
    """beta+, the ess sup of the gap for ``variant``, arrival/departure times
    and the half-time lower bound."""
    d = chasing(mu, p)
    p = d.p
    G = d.G
    g_mid = G(1 - p)
    g_mid_plus = G.right_limit(1 - p)
    T1 = d.Y1.level_set_inf(g_mid)
    T2 = d.Y2.level_set_sup(g_mid_plus)
    T1 = Fraction(1) if T1 is None else T1
    T2 = Fraction(0) if T2 is None else T2
    halftime = min(g_mid - G((1 - p) / 2), G((2 - p) / 2) - g_mid)
    other = d if Variant(variant) is Variant.CHASING else colliding(mu, p)
    return GapReport(
        beta_plus=beta_plus_by_inf(d),
        beta_sharp=other.delta.ess_supremum(),
        T1=T1,
        T2=T2,
        halftime_lower_bound=halftime,
        diameter=mu.diameter,
    )


# -- choosing p ---------------------------------------------------------------


def _left_strict_increase(mu, x):
    if mu.mass_at(x) > 0:
        return True
    return any(a < x <= b for a, b, _ in mu.segments)


def _xhat_candidates(mu):
    pts = {x for x, _ in mu.atoms}
    for a, b, _ in mu.segments:
        pts.update(a + k * (b - a) / 4 for k in range(1, 5))
    for x in sorted(pts):
        if _left_strict_increase(mu, x) and 0 < mu.cdf_left(x) and mu.cdf(x) < 1:
            yield x


def certified_lower_bound(mu, x_hat):
    """``(p, bound)`` with ``p = 1 - F(x_hat-)`` and the lower bound on beta+
    evaluated half way into the admissible window of t."""
    G = mu.quantile
    p = 1 - mu.cdf_left(x_hat)
    t = (mu.mass_at(x_hat) / p + 1) / 2
    return p, min(x_hat - G((1 - p) * t), G(1 - p + p * t) - x_hat)


def find_positive_p(mu):
    """A p with beta+(p) > 0 together with a certified lower bound on it."""
    if mu.is_degenerate:
        raise DegenerateMeasure("support of the measure is a single point")
    if mu.is_atomic and len(mu.atoms) == 2:
        (x0, _), (x1, m1) = mu.atoms
        p, lower = m1, x1 - x0
    else:
        best = None
        for x in _xhat_candidates(mu):
            p, lower = certified_lower_bound(mu, x)
            if best is None or lower > best[1]:
                best = (p, lower)
        if best is None:
            raise DegenerateMeasure("no admissible split point found")
        p, lower = best
    exact = beta_plus_by_inf(chasing(mu, p))
    if not (exact >= lower > 0):
        raise AssertionError(f"certified bound {lower} not below beta+ {exact}")
    return p, lower


def colliding_gap_witness(mu, x_minus, x_plus, p_minus, p_plus):
    """At ``p = p+/(p- + p+)``, the exact Lebesgue measure of
    ``{t : delta-(t) > x+ - x-}``, which is at least ``p- + p+``."""
    x_minus, x_plus = as_fraction(x_minus), as_fraction(x_plus)
    p_minus, p_plus = as_fraction(p_minus), as_fraction(p_plus)
    if not x_minus < x_plus or p_minus <= 0 or p_plus <= 0:
        raise DomainError("need x- < x+ and p+-, p- > 0")
    if not (mu.cdf(x_minus) >= p_minus and 1 - mu.cdf(x_plus) > p_plus):
        raise ConditionViolated(
            f"P(X <= {x_minus}) = {mu.cdf(x_minus)} vs p- = {p_minus}, "
            f"P(X > {x_plus}) = {1 - mu.cdf(x_plus)} vs p+ = {p_plus}"
        )
    p = p_plus / (p_minus + p_plus)
    d = colliding(mu, p)
    mass = d.delta.measure_gt(x_plus - x_minus)
    if mass < p_minus + p_plus:
        raise AssertionError(f"witness mass {mass} below p- + p+ = {p_minus + p_plus}")
    return p, mass


def w_form(d):
    """Rewrite a chasing decomposition as ``X = W + b(W) sigma`` with
    ``sigma = 2 eta - 1``.

    Returns ``W = Y + delta/2`` and a sorted table of ``(w, b)`` pairs taken at
    both ends of every piece; ``b`` is affine in ``w`` between table rows.
    """
    if d.variant is not Variant.CHASING:
        raise DomainError("the W form is built from the chasing decomposition")
    W = (d.Y1 + d.Y2) * Fraction(1, 2)
    half = d.delta * Fraction(1, 2)
    if not W.is_monotone():
        raise AssertionError("W is not non-decreasing")
    table = {}
    b = sorted(set(W.breakpoints) | set(half.breakpoints))
    for l, r in zip(b, b[1:]):
        w_l, w_r = W.right_limit(l), W.left_limit(r)
        h_l, h_r = half.right_limit(l), half.left_limit(r)
        if w_l == w_r and h_l != h_r:
            raise AssertionError(f"delta varies on an interval where W is constant ({l}, {r})")
        for w, h in ((w_l, h_l), (w_r, h_r)):
            if table.setdefault(w, h) != h:
                raise AssertionError(f"b(W) is not single-valued at W = {w}")
    return W, sorted(table.items())


# -- coupling oracle ----------------------------------------------------------


def _best_coupling_gap(xs, a, ys, b):
    """max over couplings of the smallest ``y - x`` on the coupling's support.

    For each threshold, a coupling using only pairs with ``y - x >= d``
    exists iff Hall's condition holds for every subset of the x-atoms.
    """
    n = len(xs)
    subsets = [
        [i for i in range(n) if mask >> i & 1] for mask in range(1, 1 << n)
    ]
    for d in sorted({y - x for x in xs for y in ys}, reverse=True):
        ok = True
        for S in subsets:
            reach = {j for j, y in enumerate(ys) if any(y - xs[i] >= d for i in S)}
            if sum(a[i] for i in S) > sum(b[j] for j in reach):
                ok = False
                break
        if ok:
            return d
    raise AssertionError("no coupling found")  # unreachable: min difference is always feasible


def atomic_splittings(mu, p, grid=10):
    """Yield ``(rho1, rho2)`` atom-mass tables for every grid splitting of
    ``mu`` with ``(1-p) rho1 + p rho2 = mu``.

    The first ``n-1`` atoms send ``k/grid`` of their mass to ``rho1``; the last
    atom takes up the remainder when it fits.
    """
    p = as_fraction(p)
    locs = [x for x, _ in mu.atoms]
    masses = [m for _, m in mu.atoms]
    for ks in itertools.product(range(grid + 1), repeat=len(masses) - 1):
        s = [m * k / grid for m, k in zip(masses, ks)]
        last = (1 - p) - sum(s)
        if not 0 <= last <= masses[-1]:
            continue
        s.append(last)
        rho1 = [(x, si / (1 - p)) for x, si in zip(locs, s) if si > 0]
        rho2 = [(x, (m - si) / p) for x, m, si in zip(locs, masses, s) if m - si > 0]
        yield rho1, rho2


def coupling_oracle_beta_star(mu, p, grid=10, budget=10**5, return_count=False):
    """Brute-force upper estimate of the best essential-inf gap over all
    ``(1-p, p)`` decompositions of a purely atomic measure with at most 4 atoms.
    """
    p = _check_inputs(mu, p)
    if not mu.is_atomic or len(mu.atoms) > 4:
        raise ValidationError("coupling oracle needs a purely atomic measure with <= 4 atoms")
    if grid < 1 or grid > 20:
        raise ValidationError("grid must be between 1 and 20")
    if (grid + 1) ** (len(mu.atoms) - 1) > budget:
        raise TooLarge(f"{(grid + 1) ** (len(mu.atoms) - 1)} splittings exceed budget {budget}")
    best, count = None, 0
    for rho1, rho2 in atomic_splittings(mu, p, grid):
        count += 1
        xs, a = zip(*rho1)
        ys, b = zip(*rho2)
        gap = _best_coupling_gap(xs, a, ys, b)
        if best is None or gap > best:
            best = gap
    if best is None:
        raise AssertionError("grid admits no splitting")
    return (best, count) if return_count else best


# -- sampling and export ----------------------------------------------------------


def sample_decomposed(d, n, seed):
    """Two-stage sampling: ``t`` uniform, ``eta ~ Bernoulli(p)`` independent,
    returns ``Y(t) + delta(t) eta``."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    rng = np.random.default_rng(seed)
    t = rng.random(n)
    eta = rng.random(n) < float(d.p)
    # Y2 directly rather than Y1 + delta: the float sum can step off an atom
    return EmpiricalSample(np.where(eta, d.Y2.evaluate(t), d.Y1.evaluate(t)))


CSV_HEADER = ("t", "side", "Y", "delta", "Y1", "Y2")


def csv_rows(d, grid=16):
    """Rows at every breakpoint (left limit ``L`` and right limit ``R``) and
    at ``grid`` interior points ``k/(grid+1)`` (point value, side ``V``)."""
    funcs = (d.Y1, d.delta, d.Y1, d.Y2)
    rows = []
    for t in d.breakpoints():
        if t > 0:
            rows.append((t, "L", *[f.left_limit(t) for f in funcs]))
        if t < 1:
            rows.append((t, "R", *[f.right_limit(t) for f in funcs]))
    for k in range(1, grid + 1):
        t = Fraction(k, grid + 1)
        rows.append((t, "V", *[f(t) for f in funcs]))
    order = {"L": 0, "V": 1, "R": 2}
    rows.sort(key=lambda r: (r[0], order[r[1]]))
    return rows


def write_csv(d, fh, grid=16):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for t, side, *vals in csv_rows(d, grid):
        w.writerow([fmt(t), side, *[fmt(v) for v in vals]])
