"""Antichains in {0,...,K}^N and probabilistic Sperner bounds.

Configurations are tuples of ints. For K = 1 the enumeration and max-weight
code switches to a bitmask encoding in which integer order equals
lexicographic order of the tuples.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import networkx as nx

from ._exact import as_fraction
from .errors import DomainError, MixedDimensions, NotAntichain, TooLarge, ValidationError

SPERNER_THETA_SQUARED = 8  # (2 sqrt 2)^2
VARIED_THETA = 4


def _leq(u, v):
    return all(a <= b for a, b in zip(u, v))


def _dims(configs):
    lengths = {len(c) for c in configs}
    if len(lengths) > 1:
        raise MixedDimensions(f"configurations of lengths {sorted(lengths)}")
    return lengths.pop() if lengths else None


def comparable_pair(configs):
    """First comparable pair in lexicographic order, or ``None``."""
    configs = sorted(set(map(tuple, configs)))
    _dims(configs)
    for i, u in enumerate(configs):
        for v in configs[i + 1:]:
            if _leq(u, v) or _leq(v, u):
                return u, v
    return None


def is_antichain(configs):
    return comparable_pair(configs) is None


@dataclass(frozen=True)
class Antichain:
    members: tuple
    N: int
    K: int = 1

    @classmethod
    def of(cls, configs, N=None, K=None, check=True):
        """Build from any iterable of configurations; duplicates are dropped."""
        members = tuple(sorted(set(tuple(int(x) for x in c) for c in configs)))
        n = _dims(members)
        if n is None:
            if N is None:
                raise ValidationError("empty antichain needs an explicit N")
            n = N
        elif N is not None and N != n:
            raise MixedDimensions(f"configurations have length {n}, expected {N}")
        top = max((max(c) for c in members if c), default=0)
        if K is None:
            K = max(1, top)
        if any(x < 0 or x > K for c in members for x in c):
            raise ValidationError(f"entries must lie in [0, {K}]")
        if check:
            pair = comparable_pair(members)
            if pair is not None:
                raise NotAntichain(f"{pair[0]} and {pair[1]} are comparable", pair)
        return cls(members, n, K)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, config):
        return tuple(config) in self.members

    def layer_counts(self):
        counts = [0] * (self.N * self.K + 1)
        for c in self.members:
            counts[sum(c)] += 1
        return counts


@dataclass(frozen=True)
class BernoulliProfile:
    ps: tuple

    def __post_init__(self):
        ps = tuple(as_fraction(p) for p in self.ps)
        if not ps:
            raise ValidationError("profile is empty")
        if any(not 0 < p < 1 for p in ps):
            raise DomainError("every p_j must lie strictly inside (0, 1)")
        object.__setattr__(self, "ps", ps)

    @classmethod
    def iid(cls, N, p):
        return cls((as_fraction(p),) * N)

    @property
    def N(self):
        return len(self.ps)

    @property
    def alpha(self):
        return min(min(p, 1 - p) for p in self.ps)

    @property
    def is_iid(self):
        return len(set(self.ps)) == 1


def lym_sum(A):
    """Sum of 1/C(N, |eta|) over the antichain; at most 1."""
    if A.K != 1:
        raise ValidationError("LYM sum is defined on {0,1}^N")
    if not is_antichain(A.members):
        raise NotAntichain("input is not an antichain")
    return sum((Fraction(1, math.comb(A.N, sum(c))) for c in A.members), Fraction(0))


def config_probability(config, profile):
    prob = Fraction(1)
    for x, p in zip(config, profile.ps):
        prob *= p if x else 1 - p
    return prob


def antichain_probability(A, profile, allow_non_antichain=False):
    """Exact P(eta in A) under independent Bernoulli(p_j) coordinates."""
    members = A.members if isinstance(A, Antichain) else tuple(map(tuple, A))
    if not allow_non_antichain and not is_antichain(members):
        raise NotAntichain("input is not an antichain")
    if members and len(members[0]) != profile.N:
        raise MixedDimensions("antichain and profile lengths differ")
    if profile.is_iid:
        # sum_k |A_k| p^k q^(N-k)
        p, N = profile.ps[0], profile.N
        counts = {}
        for c in members:
            counts[sum(c)] = counts.get(sum(c), 0) + 1
        return sum((n * p**k * (1 - p) ** (N - k) for k, n in counts.items()), Fraction(0))
    return sum((config_probability(c, profile) for c in members), Fraction(0))


def sperner_bound_iid(N, p):
    """2 sqrt 2 / (sqrt(p(1-p)) sqrt N)."""
    p = float(p)
    if N < 1 or not 0 < p < 1:
        raise DomainError("need N >= 1 and p in (0, 1)")
    return 2 * math.sqrt(2) / (math.sqrt(p * (1 - p)) * math.sqrt(N))


def within_sperner_iid(prob, N, p):
    """Exact test of ``prob <= 2 sqrt 2 / sqrt(p q N)`` by squaring."""
    prob, p = as_fraction(prob), as_fraction(p)
    return prob * prob * p * (1 - p) * N <= SPERNER_THETA_SQUARED


def sperner_bound_varied(profile, N=None):
    """4 / (alpha sqrt N) for independent but non-identical Bernoulli coordinates."""
    if N is not None and N != profile.N:
        raise DomainError("N must equal the profile length")
    return VARIED_THETA / (float(profile.alpha) * math.sqrt(profile.N))


def within_sperner_varied(prob, profile):
    prob = as_fraction(prob)
    return prob * prob * profile.alpha**2 * profile.N <= VARIED_THETA**2


def binomial_mode_mass(N, p):
    """``(k*, b(k*; N, p))`` with ties broken toward smaller k, exact."""
    p = as_fraction(p)
    if N < 1 or not 0 < p < 1:
        raise DomainError("need N >= 1 and p in (0, 1)")
    best_k, best = 0, None
    for k in range(N + 1):
        b = math.comb(N, k) * p**k * (1 - p) ** (N - k)
        if best is None or b > best:
            best_k, best = k, b
    return best_k, best


def double_sampling_split(p_eta, p_chi):
    """p_xi with ``p_xi * p_chi == p_eta`` exactly."""
    p_eta, p_chi = as_fraction(p_eta), as_fraction(p_chi)
    if not 0 < p_eta or not p_chi < 1:
        raise DomainError("need 0 < p_eta and p_chi < 1")
    if p_eta > p_chi:
        raise DomainError(f"p_eta = {p_eta} exceeds p_chi = {p_chi}")
    return p_eta / p_chi


# -- Boolean lattice helpers -----------------------------------------------------


def _bits_to_config(e, N):
    return tuple((e >> (N - 1 - i)) & 1 for i in range(N))


def _config_to_bits(c):
    e = 0
    for x in c:
        e = (e << 1) | x
    return e


def enumerate_antichains(N, limit=5):
    """All antichains of {0,1}^N, the empty one included, in lexicographic order."""
    if N < 1:
        raise DomainError("N must be at least 1")
    if N > limit:
        raise TooLarge(f"enumeration of {{0,1}}^{N} is beyond the limit N <= {limit}")
    size = 1 << N
    blocks = []
    for e in range(size):
        mask = 0
        for f in range(size):
            if f != e and (e & f == e or e & f == f):
                mask |= 1 << f
        blocks.append(mask | (1 << e))
    found = []

    def extend(start, blocked, chosen):
        found.append(tuple(chosen))
        for e in range(start, size):
            if not blocked >> e & 1:
                chosen.append(e)
                extend(e + 1, blocked | blocks[e], chosen)
                chosen.pop()

    extend(0, 0, [])
    found.sort()
    return [Antichain(tuple(_bits_to_config(e, N) for e in ac), N, 1) for ac in found]


def dedekind_count(n):
    """Number of antichains of {0,1}^n, counted as monotone Boolean functions.

    A monotone function on n variables is a pair ``f0 <= f1`` of monotone
    functions on n - 1 variables; truth tables are bitmasks.
    """
    funcs = [0, 1]  # n = 0: constants
    width = 1
    for _ in range(n - 1):
        funcs = [f0 | (f1 << width) for f0 in funcs for f1 in funcs if f0 & f1 == f0]
        width *= 2
    if n == 0:
        return 2
    return sum(1 for f0 in funcs for f1 in funcs if f0 & f1 == f0)


def max_weight_antichain(N, profile, limit=16):
    """Maximum-probability antichain of {0,1}^N and its exact probability.

    Weighted Dilworth duality as a minimum cut: every element v becomes a pair
    ``L_v -> R_v`` with capacities w(v) on ``s -> L_v`` and ``R_v -> t``,
    uncapacitated edges ``L_u -> R_v`` along Hasse covers ``u < v`` and
    ``R_v -> L_v`` so that flow can continue up a chain. The maximum antichain
    is ``{v : L_v on the source side, R_v on the sink side}`` and weighs
    ``sum(w) - maxflow``.
    """
    if N > limit:
        raise TooLarge(f"2^{N} lattice nodes exceed the limit N <= {limit}")
    if profile.N != N:
        raise DomainError("profile length must equal N")
    size = 1 << N
    configs = [_bits_to_config(e, N) for e in range(size)]
    weights = [config_probability(c, profile) for c in configs]
    scale = math.lcm(*(w.denominator for w in weights))
    cap = [int(w * scale) for w in weights]

    g = nx.DiGraph()
    src, sink = -1, -2
    for e in range(size):
        g.add_edge(src, e, capacity=cap[e])
        g.add_edge(e + size, sink, capacity=cap[e])
        g.add_edge(e + size, e)
        for i in range(N):
            f = e | (1 << i)
            if f != e:
                g.add_edge(e, f + size)
    cut, (source_side, _) = nx.minimum_cut(g, src, sink)
    chosen = [e for e in range(size) if e in source_side and e + size not in source_side]
    A = Antichain.of((configs[e] for e in chosen), N=N)
    weight = sum((weights[e] for e in chosen), Fraction(0))
    if weight != Fraction(sum(cap) - cut, scale):
        raise AssertionError("cut does not certify the antichain weight")
    return A, weight


def engel_trend(N_list, p=Fraction(1, 2)):
    """``(N, w_N * sigma * sqrt(2 pi N))`` where ``w_N`` is the largest antichain
    probability in {0,1}^N.

    By LYM, ``w_N`` is the largest binomial point mass, attained by a full
    layer, so it is computed from exact binomials.
    """
    p = as_fraction(p)
    sigma = math.sqrt(p * (1 - p))
    out = []
    for N in N_list:
        if N < 2 or N % 2:
            raise DomainError(f"N = {N} must be even and positive")
        _, w = binomial_mode_mass(N, p)
        out.append((N, float(w) * sigma * math.sqrt(2 * math.pi * N)))
    return out


# -- file format -----------------------------------------------------------------


def parse_configurations(text):
    """Configurations, one per line as space-separated ints.

    Blank lines separate groups; returns a list of groups (lists of tuples).
    """
    groups, current, width = [], [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if current:
                groups.append(current)
                current = []
            continue
        try:
            config = tuple(int(tok) for tok in line.split())
        except ValueError:
            raise ValidationError(f"line {lineno}: expected integers") from None
        if any(x < 0 for x in config):
            raise ValidationError(f"line {lineno}: negative entry")
        if width is not None and len(config) != width:
            raise MixedDimensions(f"line {lineno}: length {len(config)}, expected {width}")
        width = len(config)
        current.append(config)
    if current:
        groups.append(current)
    return groups


def load_configurations(path):
    return parse_configurations(Path(path).read_text(encoding="utf-8"))
