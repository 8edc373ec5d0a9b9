"""Anti-concentration of ``Z = Phi(X_1, ..., X_N)`` for functions with a
uniform monotone gap.

``Q_Z(eps) = sup_x P(Z in [x, x + eps])`` is estimated by Monte Carlo and, on
small discrete instances, computed exactly by enumeration; both are compared
with ``4/sqrt(N) * sqrt(1/p+ + 1/p-)``.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ._exact import as_fraction
from .antichain import Antichain, is_antichain
from .errors import (
    DomainError,
    GapConditionError,
    GapMismatch,
    MarginDerivationFailed,
    MarginViolation,
    NotAntichain,
    TooLarge,
    ValidationError,
)
from .measure import EmpiricalSample, ProbabilityMeasure, load_distribution

SHARD_SIZE = 1 << 16
CERTIFY_PROBES = 10_000
EXACT_OUTCOME_LIMIT = 3**12


@dataclass(frozen=True, eq=False)
class MonotoneGapFunction:
    """``Phi`` acting row-wise on an ``(m, N)`` array, with the claim that
    ``s_j * (Phi(u + v e_j) - Phi(u)) > epsilon`` whenever ``v >= v_threshold``.

    ``directions`` holds ``s_j = +1`` (increasing) or ``-1`` (decreasing); the
    claim is spot-checked on random probes at construction.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    dim: int
    v_threshold: float
    epsilon: float
    directions: Optional[tuple] = None
    probes: int = CERTIFY_PROBES
    certify_seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dimension must be at least 1")
        if self.epsilon <= 0 or self.v_threshold <= 0:
            raise DomainError("epsilon and v_threshold must be positive")
        if self.directions is not None:
            dirs = tuple(int(s) for s in self.directions)
            if len(dirs) != self.dim or any(s not in (-1, 1) for s in dirs):
                raise ValidationError("directions must be +1/-1, one per coordinate")
            object.__setattr__(self, "directions", dirs)
        if self.probes:
            self.certify()

    @property
    def mixed(self):
        return self.directions is not None and len(set(self.directions)) > 1

    def __call__(self, X):
        return self.func(np.asarray(X, dtype=float))

    def certify(self, probes=None, scale=10.0):
        probes = self.probes if probes is None else probes
        rng = np.random.default_rng(self.certify_seed)
        v_min = float(self.v_threshold)
        for j in range(self.dim):
            U = rng.uniform(-scale, scale, size=(probes, self.dim))
            v = v_min + rng.exponential(v_min, size=probes)
            v[: probes // 4] = v_min
            V = U.copy()
            V[:, j] += v
            gap = self(V) - self(U)
            if self.directions is not None:
                gap = gap * self.directions[j]
            bad = np.flatnonzero(~(gap > self.epsilon))
            if bad.size:
                i = bad[0]
                raise GapConditionError(
                    f"{self.name}: coordinate {j}, step {v[i]:.6g} changes Phi by "
                    f"{gap[i]:.6g} <= epsilon {self.epsilon}"
                )


def sum_phi(dim, v_threshold, epsilon, **kw):
    """Phi(u) = sum u_j; the gap equals the step v."""
    return MonotoneGapFunction("sum", lambda X: X.sum(axis=1), dim, v_threshold, epsilon, **kw)


def weighted_sum_phi(weights, v_threshold, epsilon, **kw):
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValidationError("weights must be positive")
    return MonotoneGapFunction("wsum", lambda X: X @ w, w.size, v_threshold, epsilon, **kw)


def polymono_phi(dim, coeffs, v_threshold, epsilon, **kw):
    """Phi(u) = sum_j sum_k c_k u_j^(2k+1) with c_0 > 0 and c_k >= 0.

    Odd powers are increasing, so a step v raises Phi by at least c_0 v.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0 or c[0] <= 0 or np.any(c < 0):
        raise ValidationError("need c_0 > 0 and non-negative higher coefficients")
    powers = 2 * np.arange(c.size) + 1

    def f(X):
        return sum(ck * (X**pk).sum(axis=1) for ck, pk in zip(c, powers))

    return MonotoneGapFunction("polymono", f, dim, v_threshold, epsilon, **kw)


def maxplus_phi(dim, lam, v_threshold, epsilon, **kw):
    """Phi(u) = sum u_j + lam * max_j u_j with lam >= 0."""
    if lam < 0:
        raise ValidationError("lam must be non-negative")
    return MonotoneGapFunction(
        "maxplus", lambda X: X.sum(axis=1) + lam * X.max(axis=1), dim, v_threshold, epsilon, **kw
    )


def signed_sum_phi(signs, v_threshold, epsilon, **kw):
    """Phi(u) = sum s_j u_j, increasing in some coordinates and decreasing in others."""
    s = np.asarray(signs, dtype=float)
    return MonotoneGapFunction(
        "signed", lambda X: X @ s, s.size, v_threshold, epsilon, directions=tuple(s), **kw
    )


@dataclass(frozen=True)
class MarginAssumption:
    x_minus: Fraction
    x_plus: Fraction
    p_minus: Fraction
    p_plus: Fraction

    def __post_init__(self):
        for name in ("x_minus", "x_plus", "p_minus", "p_plus"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not self.x_minus < self.x_plus:
            raise DomainError("need x- < x+")
        if self.p_minus <= 0 or self.p_plus <= 0:
            raise DomainError("need p-, p+ > 0")

    @property
    def width(self):
        return self.x_plus - self.x_minus

    def holds_for(self, mu):
        # second inequality is strict, no tolerance
        return mu.cdf(self.x_minus) >= self.p_minus and 1 - mu.cdf(self.x_plus) > self.p_plus


def check_margins(mus, m):
    return all(m.holds_for(mu) for mu in mus)


def theorem_bound(N, p_minus, p_plus):
    """4/sqrt(N) * sqrt(1/p+ + 1/p-), uncapped."""
    if N < 1 or p_minus <= 0 or p_plus <= 0:
        raise DomainError("need N >= 1 and p+-, p- > 0")
    return 4 / math.sqrt(N) * math.sqrt(1 / float(p_plus) + 1 / float(p_minus))


def theorem_bound_for(phi, N, m):
    if phi.mixed:
        p_hat = min(m.p_minus, m.p_plus)
        return theorem_bound(N, p_hat, p_hat)
    return theorem_bound(N, m.p_minus, m.p_plus)


def estimate_Q(samples, epsilon):
    """Largest fraction of samples in a closed window ``[z_i, z_i + eps]``
    anchored at a sample point."""
    z = samples.values if isinstance(samples, EmpiricalSample) else np.sort(np.asarray(samples, float))
    if z.size < 2:
        raise ValidationError("need at least 2 samples")
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    lo = np.searchsorted(z, z, side="left")
    hi = np.searchsorted(z, z + epsilon, side="right")
    return float((hi - lo).max() / z.size)


@dataclass(frozen=True)
class ConcentrationReport:
    epsilon: float
    q_hat: float
    bound: float
    n_samples: int
    seed: int
    N: int
    stderr: float = field(default=0.0)

    FIELDS = ("epsilon", "q_hat", "bound", "n_samples", "seed", "N", "stderr")

    def row(self):
        return [getattr(self, f) for f in self.FIELDS]


class _Sampler:
    """Float quantile evaluators, shared between identical measures."""

    def __init__(self, mus):
        self.mus = list(mus)
        self.iid = all(mu is self.mus[0] or mu == self.mus[0] for mu in self.mus)

    def draw(self, rng, m):
        N = len(self.mus)
        U = rng.random((m, N))
        if self.iid:
            return self.mus[0].quantile.evaluate(U)
        X = np.empty_like(U)
        for j, mu in enumerate(self.mus):
            X[:, j] = mu.quantile.evaluate(U[:, j])
        return X


def simulate_Z(phi, mus, n, seed, threads=None, shard_size=SHARD_SIZE):
    """n draws of Z. Shard ``i`` covers draws ``[i*shard_size, ...)`` with
    seed ``seed + i``, so the result does not depend on ``threads``."""
    sampler = _Sampler(mus)
    n_shards = -(-n // shard_size)

    def shard(i):
        m = min(shard_size, n - i * shard_size)
        return phi(sampler.draw(np.random.default_rng(seed + i), m))

    if threads == 1 or n_shards == 1:
        parts = [shard(i) for i in range(n_shards)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(shard, range(n_shards)))
    return np.concatenate(parts)


def monte_carlo_report(phi, mus, m, n=10**6, seed=0, threads=None):
    if n < 2:
        raise ValidationError("need at least 2 samples")
    mus = list(mus)
    if len(mus) != phi.dim:
        raise ValidationError(f"{len(mus)} distributions for a {phi.dim}-dimensional Phi")
    if not check_margins(mus, m):
        raise MarginViolation("margin assumption fails for at least one coordinate")
    if phi.v_threshold > m.width:
        raise GapMismatch(f"gap threshold {phi.v_threshold} exceeds x+ - x- = {float(m.width)}")
    z = EmpiricalSample(simulate_Z(phi, mus, n, seed, threads))
    q = estimate_Q(z, phi.epsilon)
    return ConcentrationReport(
        epsilon=float(phi.epsilon),
        q_hat=q,
        bound=theorem_bound_for(phi, phi.dim, m),
        n_samples=n,
        seed=seed,
        N=phi.dim,
        stderr=math.sqrt(q * (1 - q) / n),
    )


def exact_Q_discrete(phi, mus, epsilon=None, limit=EXACT_OUTCOME_LIMIT):
    """sup_x P(Z in [x, x+eps]) by enumerating every outcome of atomic X_j
    with at most 3 atoms each."""
    epsilon = phi.epsilon if epsilon is None else epsilon
    mus = list(mus)
    if any(not mu.is_atomic for mu in mus):
        raise ValidationError("exact enumeration needs purely atomic distributions")
    if len(mus) > 12 or any(len(mu.atoms) > 3 for mu in mus):
        raise TooLarge("exact enumeration is limited to N <= 12 and <= 3 atoms each")
    total = math.prod(len(mu.atoms) for mu in mus)
    if total > limit:
        raise TooLarge(f"{total} outcomes exceed the limit {limit}")
    locs = [np.array([float(x) for x, _ in mu.atoms]) for mu in mus]
    probs = [np.array([float(w) for _, w in mu.atoms]) for mu in mus]
    idx = np.array(list(itertools.product(*[range(len(l)) for l in locs])), dtype=int)
    X = np.column_stack([locs[j][idx[:, j]] for j in range(len(mus))])
    P = np.prod(np.column_stack([probs[j][idx[:, j]] for j in range(len(mus))]), axis=1)
    Z = phi(X)
    order = np.argsort(Z, kind="stable")
    Z, P = Z[order], P[order]
    cum = np.concatenate([[0.0], np.cumsum(P)])
    lo = np.searchsorted(Z, Z, side="left")
    hi = np.searchsorted(Z, Z + epsilon, side="right")
    return float((cum[hi] - cum[lo]).max())


def rogozin_functional(epsilon, eps_j, q_j):
    """``eps * [sum eps_j^2 (1 - q_j)]^(-1/2)``, without the unspecified constant."""
    eps_j, q_j = list(eps_j), list(q_j)
    if len(eps_j) != len(q_j):
        raise ValidationError("eps_j and q_j lengths differ")
    if any(not 0 <= q <= 1 for q in q_j):
        raise DomainError("q_j must lie in [0, 1]")
    s = math.fsum(e * e * (1 - q) for e, q in zip(eps_j, q_j))
    if s <= 0:
        raise DomainError("the weighted sum vanishes")
    return epsilon / math.sqrt(s)


def derive_lattice_margins(mus):
    """Margins for integer-valued coordinates with steps of at least 1.

    ``x- = max_j min supp mu_j``, ``x+ = x- + 1/2``,
    ``p- = min_j P(X_j <= x-)`` and ``p+ = 4/5 * min_j P(X_j > x+)``.
    """
    x_minus = max(mu.support_bounds[0] for mu in mus)
    x_plus = x_minus + Fraction(1, 2)
    p_minus = min(mu.cdf(x_minus) for mu in mus)
    above = min(1 - mu.cdf(x_plus) for mu in mus)
    if p_minus <= 0 or above <= 0:
        raise MarginDerivationFailed("some coordinate has no mass above x+")
    return MarginAssumption(x_minus, x_plus, p_minus, Fraction(4, 5) * above)


def multiset_antichain_Q(A, mus, epsilon=0.5):
    """Exact P(tau in A) for independent integer-valued tau_j, with the
    concentration bound at ``epsilon = 1/2`` as comparison."""
    mus = list(mus)
    for mu in mus:
        if not mu.is_atomic or any(x.denominator != 1 or x < 0 for x, _ in mu.atoms):
            raise ValidationError("coordinates must be atomic on non-negative integers")
    members = A.members if isinstance(A, Antichain) else tuple(map(tuple, A))
    if members and len(members[0]) != len(mus):
        raise ValidationError("antichain length differs from the number of coordinates")
    if not is_antichain(members):
        raise NotAntichain("input is not an antichain")
    m = derive_lattice_margins(mus)
    bound = theorem_bound(len(mus), m.p_minus, m.p_plus)
    prob = Fraction(0)
    for tau in members:
        term = Fraction(1)
        for x, mu in zip(tau, mus):
            term *= mu.mass_at(x)
        prob += term
    if prob > bound:
        raise AssertionError(f"antichain probability {prob} exceeds bound {bound}")
    return prob, bound


# -- experiment config ---------------------------------------------------------------


@dataclass
class ExperimentConfig:
    phi: MonotoneGapFunction
    mus: list
    margins: MarginAssumption
    epsilon: float
    samples: int
    seed: int
    sources: list


def _parse_phi(kind, args, dim, width, epsilon, lineno):
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise ValidationError(f"line {lineno}: non-numeric phi parameter") from None
    if kind == "sum":
        return sum_phi(dim, width, epsilon)
    if kind == "wsum":
        if len(nums) != dim:
            raise ValidationError(f"line {lineno}: wsum needs {dim} weights")
        return weighted_sum_phi(nums, width, epsilon)
    if kind == "polymono":
        return polymono_phi(dim, nums, width, epsilon)
    if kind == "maxplus":
        return maxplus_phi(dim, nums[0] if nums else 1.0, width, epsilon)
    if kind == "signed":
        if len(nums) != dim:
            raise ValidationError(f"line {lineno}: signed needs {dim} signs")
        return signed_sum_phi(nums, width, epsilon)
    raise ValidationError(f"line {lineno}: unknown phi {kind!r}")


def parse_config(text, base_dir=".", resolve=None):
    """Parse an experiment config.

    Keys: ``phi``, ``dims``, ``dist <j|a-b|*> <file>`` (1-based), ``margins``,
    ``epsilon``, ``samples``, ``seed``. ``resolve`` maps a file name to a path.
    """
    resolve = resolve or (lambda name: Path(base_dir) / name)
    entries, dists = {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        if key == "dist":
            if len(args) != 2:
                raise ValidationError(f"line {lineno}: dist takes <index> <file>")
            dists.append((args[0], args[1], lineno))
        elif key in ("phi", "dims", "margins", "epsilon", "samples", "seed"):
            entries[key] = (args, lineno)
        else:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
    for key in ("phi", "margins", "epsilon"):
        if key not in entries:
            raise ValidationError(f"missing '{key}' line")
    if not dists:
        raise ValidationError("missing 'dist' line")

    def number(key, cast):
        args, lineno = entries[key]
        if len(args) != 1:
            raise ValidationError(f"line {lineno}: '{key}' takes one value")
        try:
            return cast(args[0])
        except ValueError:
            raise ValidationError(f"line {lineno}: bad value for '{key}'") from None

    dim = number("dims", int) if "dims" in entries else None
    if dim is None:
        dim = 0
        for index, _, lineno in dists:
            if index == "*":
                raise ValidationError(f"line {lineno}: 'dist *' requires a 'dims' line")
            dim = max(dim, int(index.split("-")[-1]))
    slots = [None] * dim
    sources, cache = [], {}
    for index, name, lineno in dists:
        path = resolve(name)
        if path not in cache:
            try:
                cache[path] = load_distribution(path)
            except ValidationError as exc:
                raise ValidationError(f"{name}: {exc}") from None
            sources.append(path)
        try:
            if index == "*":
                idx = range(dim)
            elif "-" in index:
                a, b = (int(s) for s in index.split("-"))
                idx = range(a - 1, b)
            else:
                idx = [int(index) - 1]
        except ValueError:
            raise ValidationError(f"line {lineno}: bad index {index!r}") from None
        for j in idx:
            if not 0 <= j < dim:
                raise ValidationError(f"line {lineno}: index {j + 1} outside 1..{dim}")
            slots[j] = cache[path]
    if any(s is None for s in slots):
        missing = [j + 1 for j, s in enumerate(slots) if s is None]
        raise ValidationError(f"no distribution for coordinates {missing[:5]}")

    margs, lineno = entries["margins"]
    if len(margs) != 4:
        raise ValidationError(f"line {lineno}: margins takes x- x+ p- p+")
    try:
        margins = MarginAssumption(*(as_fraction(a) for a in margs))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"line {lineno}: {exc}") from None
    epsilon = number("epsilon", float)
    kind_args, lineno = entries["phi"]
    phi = _parse_phi(kind_args[0], kind_args[1:], dim, float(margins.width), epsilon, lineno)
    samples = number("samples", int) if "samples" in entries else 10**6
    seed = number("seed", int) if "seed" in entries else None
    return ExperimentConfig(phi, slots, margins, epsilon, samples, seed, sources)
