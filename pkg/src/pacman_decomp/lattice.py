"""Split an alloy-type random potential ``sum_xi omega_xi u(x - xi)`` on a
periodic box into a background field plus a uniformly gapped Bernoulli part.

Each site carries ``t_xi`` uniform and ``eta_xi ~ Bernoulli(p)``; with the
chasing decomposition of the single-site law,
``omega_xi = Y(t_xi) + delta(t_xi) eta_xi``.
"""

import csv
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._exact import as_fraction, fmt
from .decomposition import beta_plus_by_inf, chasing, find_positive_p
from .errors import DomainError, GapViolation, SupportViolation, ValidationError
from .measure import ks_statistic

KS_FACTOR = 1.95
EXACT_SITE_LIMIT = 1 << 14


@dataclass(frozen=True)
class SingleSiteProfile:
    """Non-negative single-site potential on a finite stencil of offsets."""

    offsets: dict

    def __post_init__(self):
        clean = {}
        for off, val in dict(self.offsets).items():
            off = tuple(int(o) for o in (off if isinstance(off, tuple) else (off,)))
            val = as_fraction(val)
            if val < 0:
                raise ValidationError(f"negative value {val} at offset {off}")
            if off in clean:
                raise ValidationError(f"duplicate offset {off}")
            if val:
                clean[off] = val
        if not clean:
            raise ValidationError("profile is identically zero")
        dims = {len(o) for o in clean}
        if len(dims) != 1:
            raise ValidationError("offsets of mixed dimension")
        origin = (0,) * dims.pop()
        if clean.get(origin, 0) <= 0:
            raise ValidationError("profile must be strictly positive at the origin")
        object.__setattr__(self, "offsets", dict(sorted(clean.items())))

    @classmethod
    def kronecker(cls, dim=1):
        return cls({(0,) * dim: 1})

    @property
    def dim(self):
        return len(next(iter(self.offsets)))

    @property
    def radius(self):
        return max(max(abs(o) for o in off) for off in self.offsets)

    @property
    def max_value(self):
        return max(self.offsets.values())

    @property
    def total(self):
        return sum(self.offsets.values())


def parse_stencil(text):
    """Lines ``<offset_1> ... <offset_d> <value>``."""
    offsets = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) < 2:
            raise ValidationError(f"line {lineno}: need offsets followed by a value")
        try:
            off = tuple(int(x) for x in toks[:-1])
            val = as_fraction(toks[-1])
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"line {lineno}: cannot parse {line!r}") from None
        if off in offsets:
            raise ValidationError(f"line {lineno}: duplicate offset {off}")
        offsets[off] = val
    return SingleSiteProfile(offsets)


def load_stencil(path):
    return parse_stencil(Path(path).read_text(encoding="utf-8"))


def parse_box(text):
    """``"32x32"`` -> ``(32, 32)``."""
    try:
        box = tuple(int(s) for s in str(text).lower().split("x"))
    except ValueError:
        raise ValidationError(f"cannot parse box {text!r}") from None
    if not box or any(n < 1 for n in box):
        raise ValidationError(f"box sides must be positive, got {text!r}")
    return box


def site_draws(seed, n_sites):
    """Per-site ``(t, v)`` uniforms from a Philox stream keyed by ``seed``.

    Site ``i`` reads stream positions ``2i`` and ``2i+1``, so its values
    depend only on ``(seed, i)`` and a worker can jump to any block with
    ``Philox.advance``. A ``t`` that lands exactly on 0 is reflected to the
    smallest positive double.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((n_sites, 2))
    t = u[:, 0]
    t[t == 0.0] = np.nextafter(0.0, 1.0)
    return t, u[:, 1]


@dataclass(frozen=True, eq=False)
class PotentialSplit:
    box: tuple
    t: np.ndarray
    eta: np.ndarray
    Y: np.ndarray
    delta: np.ndarray
    background: np.ndarray
    omega: np.ndarray
    M: Fraction
    p: Fraction
    U_plus: Fraction
    b_minus: Fraction
    b_plus: Fraction
    profile: SingleSiteProfile
    exact: bool = True
    seed: int = 0

    @property
    def n_sites(self):
        return int(np.prod(self.box))


def _field(coeffs, profile):
    """``x -> sum_xi c_xi u(x - xi)`` on the torus, via shifted copies."""
    out = None
    for off, val in profile.offsets.items():
        term = np.roll(coeffs, off, axis=tuple(range(coeffs.ndim))) * val
        out = term if out is None else out + term
    return out


def split_potential(mu, p, u, box, seed, M=None, exact=True):
    """Draw a split of the alloy potential with single-site law ``mu``.

    ``p=None`` picks p with a certified positive gap. ``M`` defaults to the
    top of the support; ``exact=False`` evaluates in floating point, which
    is needed for boxes beyond ``EXACT_SITE_LIMIT`` sites.
    """
    box = tuple(box)
    if len(box) != u.dim:
        raise DomainError(f"box has dimension {len(box)}, profile has {u.dim}")
    lo, hi = mu.support_bounds
    M = hi if M is None else as_fraction(M)
    if lo < 0 or hi > M:
        raise SupportViolation(f"support [{lo}, {hi}] is not inside [0, {M}]")
    scale = M if M > 0 else Fraction(1)
    for end, gap in (("0", lo), ("M", M - hi)):
        if gap > scale / 10:
            warnings.warn(f"no mass near {end}: nearest support point is {float(gap)} away")
    p = find_positive_p(mu)[0] if p is None else as_fraction(p)
    d = chasing(mu, p)
    b_minus = beta_plus_by_inf(d)
    if b_minus <= 0:
        raise GapViolation(f"beta+ = {b_minus} at p = {p}; choose p with a positive gap")

    n = int(np.prod(box))
    if exact and n > EXACT_SITE_LIMIT:
        raise DomainError(f"exact split limited to {EXACT_SITE_LIMIT} sites, use exact=False")
    t, v = site_draws(seed, n)
    eta = (v < float(p)).astype(int)
    # omega is drawn as G-marginal values Y1 or Y2, independently of delta,
    # so that verify_split can check omega = Y + delta * eta
    if exact:
        tf = [Fraction(x) for x in t]
        Y = np.array([d.Y1(x) for x in tf], dtype=object)
        delta = np.array([d.delta(x) for x in tf], dtype=object)
        omega = np.array([d.Y2(x) if e else y for x, e, y in zip(tf, eta, Y)], dtype=object)
        eta = eta.astype(object)
    else:
        Y, delta = d.Y1.evaluate(t), d.delta.evaluate(t)
        omega = np.where(eta == 1, d.Y2.evaluate(t), Y)
    Y, delta, eta, omega = (a.reshape(box) for a in (Y, delta, eta, omega))
    return PotentialSplit(
        box=box,
        t=t.reshape(box),
        eta=eta,
        Y=Y,
        delta=delta,
        background=_field(Y, u),
        omega=omega,
        M=M,
        p=p,
        U_plus=M * u.total,
        b_minus=b_minus,
        b_plus=M,
        profile=u,
        exact=exact,
        seed=seed,
    )


@dataclass
class SplitReport:
    checks: dict = field(default_factory=dict)
    ks: float = 0.0
    ks_threshold: float = 0.0
    n: int = 0

    @property
    def ok(self):
        return all(self.checks.values())

    @property
    def failures(self):
        return [name for name, passed in self.checks.items() if not passed]


def verify_split(s, mu, tolerance=0):
    """Check every bound of a split and KS-test the coupling field against mu."""
    tol = as_fraction(tolerance) if s.exact else float(tolerance)
    U, delta, eta = s.background, s.delta, s.eta
    checks = {
        "BackgroundNonNegative": bool(np.all(U >= -tol)),
        "BackgroundBound": bool(np.all(U <= s.U_plus + tol)),
        "GapViolation": bool(np.all(delta >= s.b_minus - tol)),
        "GapUpperBound": bool(np.all(delta <= s.b_plus + tol)),
        "BinaryEta": bool(np.all((eta == 0) | (eta == 1))),
    }
    # total potential two ways: background plus Bernoulli part, and directly from omega
    direct = _field(s.omega, s.profile)
    split = U + _field(delta * eta, s.profile)
    diff = np.abs(np.asarray(direct - split, dtype=object if s.exact else float))
    checks["Reconstruction"] = bool(np.all(diff <= tol))
    omega = np.asarray(s.omega, dtype=float).ravel()
    ks = ks_statistic(omega, mu)
    threshold = KS_FACTOR / math.sqrt(omega.size)
    checks["KolmogorovSmirnov"] = ks < threshold
    return SplitReport(checks, ks, threshold, omega.size)


SPLIT_HEADER = ("xi", "t", "eta", "Y", "delta", "omega")


def write_split_csv(s, fh):
    fh.write(f"# M={fmt(s.M)}\n# p={fmt(s.p)}\n# U_plus={fmt(s.U_plus)}\n")
    fh.write(f"# b_minus={fmt(s.b_minus)}\n# b_plus={fmt(s.b_plus)}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SPLIT_HEADER)
    omega = s.omega
    for idx in np.ndindex(*s.box):
        w.writerow([
            ":".join(str(i) for i in idx),
            fmt(s.t[idx]),
            int(s.eta[idx]),
            fmt(s.Y[idx]),
            fmt(s.delta[idx]),
            fmt(omega[idx]),
        ])
