"""Exact piecewise-affine functions on the open unit interval.

A :class:`PiecewiseAffine` is stored as breakpoints ``0 = b0 < ... < bm = 1``,
an affine map ``t -> a*t + c`` on each open interval ``(b_k, b_{k+1})``, and an
explicit value at each interior breakpoint. Point values let one type hold
left-continuous functions such as ``G(s*t)`` as well as right-continuous ones
such as ``G(1 - p*t)``. All arithmetic is done in :class:`fractions.Fraction`.
"""

from bisect import bisect_left, bisect_right
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._exact import as_fraction
from .errors import DomainError, ValidationError

_ZERO = Fraction(0)
_ONE = Fraction(1)


class PiecewiseAffine:

    def __init__(self, breakpoints, slopes, intercepts, values=None):
        bps = tuple(as_fraction(b) for b in breakpoints)
        slopes = tuple(as_fraction(a) for a in slopes)
        intercepts = tuple(as_fraction(c) for c in intercepts)
        if len(bps) < 2 or bps[0] != 0 or bps[-1] != 1:
            raise ValidationError("breakpoints must start at 0 and end at 1")
        if any(b >= nb for b, nb in zip(bps, bps[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        m = len(bps) - 1
        if len(slopes) != m or len(intercepts) != m:
            raise ValidationError("need one affine piece per interval")
        if values is None:
            # left-continuous default
            values = tuple(slopes[k] * bps[k + 1] + intercepts[k] for k in range(m - 1))
        else:
            values = tuple(as_fraction(v) for v in values)
            if len(values) != m - 1:
                raise ValidationError("need one value per interior breakpoint")
        self.breakpoints = bps
        self.slopes = slopes
        self.intercepts = intercepts
        self.values = values

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, c):
        return cls((0, 1), (0,), (c,))

    @classmethod
    def affine(cls, a, c):
        return cls((0, 1), (a,), (c,))

    def __repr__(self):
        pieces = ", ".join(
            f"({float(l):.6g},{float(r):.6g}): {float(a):.6g}t{float(c):+.6g}"
            for l, r, a, c in self.pieces()
        )
        return f"PiecewiseAffine[{pieces}]"

    def __eq__(self, other):
        if not isinstance(other, PiecewiseAffine):
            return NotImplemented
        a, b = self.simplify(), other.simplify()
        return (
            a.breakpoints == b.breakpoints
            and a.slopes == b.slopes
            and a.intercepts == b.intercepts
            and a.values == b.values
        )

    def __hash__(self):
        s = self.simplify()
        return hash((s.breakpoints, s.slopes, s.intercepts, s.values))

    # -- evaluation ---------------------------------------------------------

    @property
    def n_pieces(self):
        return len(self.slopes)

    def pieces(self):
        """Yield ``(left, right, slope, intercept)`` for every open piece."""
        b = self.breakpoints
        for k, (a, c) in enumerate(zip(self.slopes, self.intercepts)):
            yield b[k], b[k + 1], a, c

    def _piece_index(self, t):
        # index k with b_k < t < b_{k+1}; caller excludes breakpoints
        return bisect_right(self.breakpoints, t) - 1

    def __call__(self, t):
        t = as_fraction(t)
        if not 0 < t < 1:
            raise DomainError(f"evaluation point {t} outside (0, 1)")
        b = self.breakpoints
        i = bisect_left(b, t)
        if b[i] == t:
            return self.values[i - 1]
        k = i - 1
        return self.slopes[k] * t + self.intercepts[k]

    def left_limit(self, t):
        """Limit from the left; defined on (0, 1]."""
        t = as_fraction(t)
        if not 0 < t <= 1:
            raise DomainError(f"left limit at {t} outside (0, 1]")
        k = bisect_left(self.breakpoints, t) - 1
        return self.slopes[k] * t + self.intercepts[k]

    def right_limit(self, t):
        """Limit from the right; defined on [0, 1)."""
        t = as_fraction(t)
        if not 0 <= t < 1:
            raise DomainError(f"right limit at {t} outside [0, 1)")
        k = bisect_right(self.breakpoints, t) - 1
        return self.slopes[k] * t + self.intercepts[k]

    @cached_property
    def _float_tables(self):
        return (
            np.array([float(b) for b in self.breakpoints]),
            np.array([float(a) for a in self.slopes]),
            np.array([float(c) for c in self.intercepts]),
            np.array([float(v) for v in self.values]),
        )

    def evaluate(self, t):
        """Vectorized floating-point evaluation on an array of points in [0, 1).

        ``t = 0`` is mapped to the right limit there; exact hits on interior
        breakpoints return the stored point value.
        """
        bps, slopes, intercepts, values = self._float_tables
        t = np.asarray(t, dtype=float)
        m = len(slopes)
        k = np.clip(np.searchsorted(bps, t, side="left") - 1, 0, m - 1)
        out = slopes[k] * t + intercepts[k]
        if m > 1:
            inner = bps[1:-1]
            j = np.clip(np.searchsorted(inner, t), 0, m - 2)
            hit = inner[j] == t
            if np.any(hit):
                out[hit] = values[j[hit]]
        return out

    # -- algebra ------------------------------------------------------------

    def compose(self, scale, shift):
        """Return ``t -> self(scale*t + shift)``.

        The affine map must send (0, 1) into (0, 1); ``scale`` may be negative.
        """
        scale, shift = as_fraction(scale), as_fraction(shift)
        if scale == 0:
            raise DomainError("scale must be non-zero")
        lo, hi = sorted((shift, scale + shift))
        if lo < 0 or hi > 1:
            raise DomainError("inner map leaves the unit interval")
        b = self.breakpoints
        inner = [x for x in b if lo < x < hi]
        ts = [(x - shift) / scale for x in inner]
        vals = [self.values[b.index(x) - 1] for x in inner]
        if scale < 0:
            ts.reverse()
            vals.reverse()
        new_b = [_ZERO, *ts, _ONE]
        slopes, intercepts = [], []
        for l, r in zip(new_b, new_b[1:]):
            k = self._piece_index(scale * (l + r) / 2 + shift)
            a, c = self.slopes[k], self.intercepts[k]
            slopes.append(a * scale)
            intercepts.append(a * shift + c)
        return PiecewiseAffine(new_b, slopes, intercepts, vals)

    def _combine(self, other, op):
        if not isinstance(other, PiecewiseAffine):
            other = PiecewiseAffine.constant(other)
        b = sorted(set(self.breakpoints) | set(other.breakpoints))
        slopes, intercepts = [], []
        for l, r in zip(b, b[1:]):
            mid = (l + r) / 2
            i, j = self._piece_index(mid), other._piece_index(mid)
            slopes.append(op(self.slopes[i], other.slopes[j]))
            intercepts.append(op(self.intercepts[i], other.intercepts[j]))
        values = [op(self(x), other(x)) for x in b[1:-1]]
        return PiecewiseAffine(b, slopes, intercepts, values)

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return PiecewiseAffine.constant(other) - self

    def __mul__(self, k):
        k = as_fraction(k)
        return PiecewiseAffine(
            self.breakpoints,
            [a * k for a in self.slopes],
            [c * k for c in self.intercepts],
            [v * k for v in self.values],
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def simplify(self):
        """Merge neighbouring pieces that are the same affine map and
        continuous through the shared breakpoint."""
        b = [self.breakpoints[0]]
        slopes, intercepts, values = [self.slopes[0]], [self.intercepts[0]], []
        for k in range(1, self.n_pieces):
            x = self.breakpoints[k]
            a, c, v = self.slopes[k], self.intercepts[k], self.values[k - 1]
            if a == slopes[-1] and c == intercepts[-1] and v == a * x + c:
                continue
            b.append(x)
            slopes.append(a)
            intercepts.append(c)
            values.append(v)
        b.append(self.breakpoints[-1])
        return PiecewiseAffine(b, slopes, intercepts, values)

    # -- order statistics of the function ---------------------------------

    def limits(self):
        """Yield ``(t, left_limit, right_limit)`` over all breakpoints.

        At ``t = 0`` the left limit is ``None``; at ``t = 1`` the right one.
        """
        for k, t in enumerate(self.breakpoints):
            left = self.slopes[k - 1] * t + self.intercepts[k - 1] if k > 0 else None
            right = self.slopes[k] * t + self.intercepts[k] if k < self.n_pieces else None
            yield t, left, right

    def _piece_ends(self):
        for l, r, a, c in self.pieces():
            yield a * l + c
            yield a * r + c

    def infimum(self):
        """Exact inf over (0, 1), point values included."""
        return min([*self._piece_ends(), *self.values])

    def supremum(self):
        return max([*self._piece_ends(), *self.values])

    def ess_infimum(self):
        """Essential inf: point values at breakpoints carry no Lebesgue mass."""
        return min(self._piece_ends())

    def ess_supremum(self):
        return max(self._piece_ends())

    def is_monotone(self, increasing=True):
        """Check monotonicity across pieces, jumps and point values."""
        seq = []
        for k, (l, r, a, c) in enumerate(self.pieces()):
            if k > 0:
                seq.append(self.values[k - 1])
            seq.extend((a * l + c, a * r + c))
        if not increasing:
            seq = [-x for x in seq]
        # a point value must sit between the neighbouring one-sided limits
        return all(x <= y for x, y in zip(seq, seq[1:]))

    def measure_le(self, y):
        """Lebesgue measure of ``{t in (0,1) : f(t) <= y}``."""
        y = as_fraction(y)
        total = _ZERO
        for l, r, a, c in self.pieces():
            if a == 0:
                if c <= y:
                    total += r - l
            elif a > 0:
                total += max(_ZERO, min(r, (y - c) / a) - l)
            else:
                total += max(_ZERO, r - max(l, (y - c) / a))
        return total

    def measure_gt(self, y):
        return 1 - self.measure_le(y)

    def level_set_inf(self, y):
        """inf of ``{t in (0,1) : f(t) = y}``, or ``None`` when empty."""
        cands = self._level_set(as_fraction(y), low=True)
        return min(cands) if cands else None

    def level_set_sup(self, y):
        cands = self._level_set(as_fraction(y), low=False)
        return max(cands) if cands else None

    def _level_set(self, y, low):
        out = []
        for l, r, a, c in self.pieces():
            if a == 0:
                if c == y:
                    out.append(l if low else r)
            else:
                t = (y - c) / a
                if l < t < r:
                    out.append(t)
        out.extend(x for x, v in zip(self.breakpoints[1:-1], self.values) if v == y)
        return out
