"""Probability measures on the real line built from atoms and uniform segments.

The class is closed under every construction the decomposition needs:
quantile functions are piecewise affine, and pushing Lebesgue measure
through a monotone piecewise-affine map lands back in the class.
"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from ._exact import as_fraction
from .errors import ValidationError
from .piecewise import PiecewiseAffine

MASS_TOLERANCE = Fraction(1, 10**9)


class ProbabilityMeasure:
    """Finite atoms plus piecewise-uniform density segments.

    Parameters
    ----------
    atoms : iterable of (location, mass)
    segments : iterable of (left, right, mass)
        Uniform density ``mass / (right - left)`` on ``(left, right)``.
        Segments may not overlap each other but may contain atoms.

    Masses summing to 1 within 1e-9 are rescaled to sum exactly to 1.
    """

    def __init__(self, atoms=(), segments=()):
        atoms = sorted((as_fraction(x), as_fraction(m)) for x, m in atoms)
        segments = sorted(
            (as_fraction(a), as_fraction(b), as_fraction(m)) for a, b, m in segments
        )
        if not atoms and not segments:
            raise ValidationError("measure has no atoms and no segments")
        for x, m in atoms:
            if m <= 0:
                raise ValidationError(f"atom at {x} has non-positive mass {m}")
        for (x, _), (y, _) in zip(atoms, atoms[1:]):
            if x == y:
                raise ValidationError(f"duplicate atom location {x}")
        for a, b, m in segments:
            if not a < b:
                raise ValidationError(f"segment ({a}, {b}) has left >= right")
            if m <= 0:
                raise ValidationError(f"segment ({a}, {b}) has non-positive mass {m}")
        for s, t in zip(segments, segments[1:]):
            if t[0] < s[1]:
                raise ValidationError(f"segments ({s[0]}, {s[1]}) and ({t[0]}, {t[1]}) overlap")
        total = sum(m for _, m in atoms) + sum(m for *_, m in segments)
        if abs(total - 1) > MASS_TOLERANCE:
            raise ValidationError(f"total mass {float(total)!r} differs from 1 by more than 1e-9")
        self.atoms = tuple((x, m / total) for x, m in atoms)
        self.segments = tuple((a, b, m / total) for a, b, m in segments)

    # -- constructors -------------------------------------------------------

    @classmethod
    def uniform(cls, left=0, right=1):
        return cls(segments=[(left, right, 1)])

    @classmethod
    def discrete(cls, locations, masses=None):
        """Atoms at ``locations``; equal masses when ``masses`` is omitted."""
        locations = list(locations)
        if masses is None:
            masses = [Fraction(1, len(locations))] * len(locations)
        return cls(atoms=zip(locations, masses))

    @classmethod
    def empirical(cls, values):
        """Empirical measure: mass 1/n at every sample value (ties merged)."""
        values = [as_fraction(v) for v in values]
        if not values:
            raise ValidationError("empirical sample is empty")
        counts = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        n = len(values)
        return cls(atoms=[(v, Fraction(c, n)) for v, c in counts.items()])

    def __repr__(self):
        parts = [f"{float(m):.4g}δ({float(x):.4g})" for x, m in self.atoms]
        parts += [f"{float(m):.4g}U({float(a):.4g},{float(b):.4g})" for a, b, m in self.segments]
        return "ProbabilityMeasure(" + " + ".join(parts) + ")"

    def __eq__(self, other):
        if not isinstance(other, ProbabilityMeasure):
            return NotImplemented
        return self.atoms == other.atoms and self.segments == other.segments

    def __hash__(self):
        return hash((self.atoms, self.segments))

    # -- basic properties ---------------------------------------------------

    @cached_property
    def support_bounds(self):
        lo = [x for x, _ in self.atoms] + [a for a, _, _ in self.segments]
        hi = [x for x, _ in self.atoms] + [b for _, b, _ in self.segments]
        return min(lo), max(hi)

    @property
    def diameter(self):
        lo, hi = self.support_bounds
        return hi - lo

    @property
    def is_degenerate(self):
        return not self.segments and len(self.atoms) == 1

    @property
    def is_atomic(self):
        return not self.segments

    def mass_at(self, x):
        x = as_fraction(x)
        for y, m in self.atoms:
            if y == x:
                return m
        return Fraction(0)

    @cached_property
    def knots(self):
        """Sorted atom locations and segment endpoints."""
        pts = {x for x, _ in self.atoms}
        for a, b, _ in self.segments:
            pts.update((a, b))
        return tuple(sorted(pts))

    @cached_property
    def _atom_locations(self):
        return [x for x, _ in self.atoms]

    @cached_property
    def _atom_cumulative(self):
        cum, out = Fraction(0), [Fraction(0)]
        for _, m in self.atoms:
            cum += m
            out.append(cum)
        return out

    def _segment_mass_below(self, x):
        total = Fraction(0)
        for a, b, m in self.segments:
            if x >= b:
                total += m
            elif x > a:
                total += m * (x - a) / (b - a)
        return total

    def cdf(self, x):
        """F(x) = μ((-∞, x]), exact."""
        x = as_fraction(x)
        k = bisect_right(self._atom_locations, x)
        return self._atom_cumulative[k] + self._segment_mass_below(x)

    def cdf_left(self, x):
        """F(x-) = μ((-∞, x)), exact."""
        x = as_fraction(x)
        k = bisect_left(self._atom_locations, x)
        return self._atom_cumulative[k] + self._segment_mass_below(x)

    def cdf_array(self, x, left=False):
        """Floating-point F (or F(x-) with ``left=True``) on an array."""
        x = np.asarray(x, dtype=float)
        locs = np.array([float(v) for v in self._atom_locations])
        cum = np.array([float(c) for c in self._atom_cumulative])
        side = "left" if left else "right"
        out = cum[np.searchsorted(locs, x, side=side)] if len(locs) else np.zeros_like(x)
        for a, b, m in self.segments:
            a, b, m = float(a), float(b), float(m)
            out = out + m * np.clip((x - a) / (b - a), 0.0, 1.0)
        return np.minimum(out, 1.0)

    @cached_property
    def quantile(self):
        """G(t) = inf{u : F(u) >= t} as an exact :class:`PiecewiseAffine`."""
        return _build_quantile(self)


def _items_in_order(mu):
    # split segments at interior atoms so mass is consumed strictly left to right
    atom_locs = [x for x, _ in mu.atoms]
    items = [(x, x, m) for x, m in mu.atoms]
    for a, b, m in mu.segments:
        cuts = [a, *[x for x in atom_locs if a < x < b], b]
        for l, r in zip(cuts, cuts[1:]):
            items.append((l, r, m * (r - l) / (b - a)))
    items.sort(key=lambda it: (it[0], it[1]))
    return items


def _build_quantile(mu):
    bps, slopes, intercepts = [Fraction(0)], [], []
    cum = Fraction(0)
    for l, r, m in _items_in_order(mu):
        # on (cum, cum+m]: G(s) = l + (s - cum) * (r - l) / m
        a = (r - l) / m
        slopes.append(a)
        intercepts.append(l - a * cum)
        cum += m
        bps.append(cum)
    bps[-1] = Fraction(1)
    return PiecewiseAffine(bps, slopes, intercepts).simplify()


def cdf(mu, x):
    return mu.cdf(x)


def quantile(mu):
    return mu.quantile


def pushforward_check(mu, G, grid):
    """Max over ``c`` in ``grid`` of ``|Leb{t : G(t) <= c} - F(c)|``.

    The left side is integrated exactly piece by piece, so for ``G`` equal
    to the quantile of ``mu`` the result is exactly zero.
    """
    worst = Fraction(0)
    for c in grid:
        worst = max(worst, abs(G.measure_le(c) - mu.cdf(c)))
    return worst


@dataclass(frozen=True)
class EmpiricalSample:
    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or v.size < 1:
            raise ValidationError("sample must be a non-empty 1-d sequence")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    def __len__(self):
        return self.values.size


def sample(mu, n, seed):
    """Inverse-transform sampling: ``G(u)`` for ``u`` uniform on (0, 1)."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    u = np.random.default_rng(seed).random(n)
    return EmpiricalSample(mu.quantile.evaluate(u))


def ks_statistic(sample, mu):
    """sup_x |F_n(x) - F(x)|, checking both one-sided limits at sample points."""
    x = sample.values if isinstance(sample, EmpiricalSample) else np.sort(np.asarray(sample, float))
    n = x.size
    if n == 0:
        raise ValidationError("sample is empty")
    v = np.unique(x)
    fn_right = np.searchsorted(x, v, side="right") / n
    fn_left = np.searchsorted(x, v, side="left") / n
    d_right = np.abs(fn_right - mu.cdf_array(v))
    d_left = np.abs(fn_left - mu.cdf_array(v, left=True))
    return float(max(d_right.max(), d_left.max()))


# -- text formats --------------------------------------------------------------


def _number(token, lineno):
    try:
        return as_fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"line {lineno}: cannot parse number {token!r}") from None


def parse_distribution(text):
    """Parse ``atom <x> <mass>`` / ``segment <a> <b> <mass>`` lines."""
    atoms, segments = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *args = line.split()
        if kind == "atom":
            if len(args) != 2:
                raise ValidationError(f"line {lineno}: 'atom' takes 2 numbers, got {len(args)}")
            atoms.append(tuple(_number(a, lineno) for a in args))
        elif kind == "segment":
            if len(args) != 3:
                raise ValidationError(f"line {lineno}: 'segment' takes 3 numbers, got {len(args)}")
            segments.append(tuple(_number(a, lineno) for a in args))
        else:
            raise ValidationError(f"line {lineno}: unknown directive {kind!r}")
    try:
        return ProbabilityMeasure(atoms, segments)
    except ValidationError as exc:
        raise ValidationError(f"invalid distribution: {exc}") from None


def parse_empirical(text):
    """One real number per line; blank lines and ``#`` comments skipped."""
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if len(line.split()) != 1:
            raise ValidationError(f"line {lineno}: expected a single number")
        values.append(_number(line, lineno))
    return ProbabilityMeasure.empirical(values)


def load_distribution(path):
    return parse_distribution(Path(path).read_text(encoding="utf-8"))


def load_empirical(path):
    return parse_empirical(Path(path).read_text(encoding="utf-8"))
