"""Brute-force checks over the signed permutation group.

Everything here is exhaustive and meant for small ``n``: enumerating all
``2^n n!`` signed permutations, orbit membership by search, invariance
sweeps, separation experiments, and the regular-graph example where the W1
invariants cannot tell two non-isomorphic graphs apart.

Conventions: a signed permutation ``g = (tau, sigma)`` acts on multi-indices
by ``sigma(mu)_i = mu[sigma[i]]`` and on coordinates by
``(g.c)_mu = tau^mu * c_{sigma(mu)}``.  On forms it substitutes
``x_k -> tau[sigma[k]] * x_{sigma[k]}``, which is ``f o M^{-1}`` for the
matrix ``M e_k = tau[sigma[k]] e_{sigma[k]}``.  With these choices
``coordinates(act_form(g, s)) == act_coords(g, coordinates(s))``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .forms import Form, MultiIndex
from .invariants import (DEFAULT, InvariantVariant, SingularBlockError, fingerprint, p_w1,
                         q_w1, reconstruct, u_point, z_w1)
from .slice import SliceCoordinates, check_domain, pair_indices, slice_dimension, w2_indices

MAX_GROUP_N = 6
MAX_ORBIT_N = 5
MAX_SWEEP_N = 4


class GuardError(ValueError):
    """Raised when a brute-force request exceeds the size guards."""


@dataclass(frozen=True)
class SignedPermutation:
    tau: tuple[int, ...]
    sigma: tuple[int, ...]

    def __post_init__(self):
        if len(self.tau) != len(self.sigma):
            raise ValueError("tau and sigma differ in length")
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise ValueError("sigma is not a permutation: %r" % (self.sigma,))
        if any(t not in (1, -1) for t in self.tau):
            raise ValueError("tau entries must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.sigma)

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls((1,) * n, tuple(range(n)))

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        """Composition ``self o other``: acting by the product acts by ``other`` first."""
        inv = self.sigma_inverse
        sigma = tuple(self.sigma[other.sigma[i]] for i in range(self.n))
        tau = tuple(self.tau[k] * other.tau[inv[k]] for k in range(self.n))
        return SignedPermutation(tau, sigma)

    @property
    def sigma_inverse(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for i, s in enumerate(self.sigma):
            inv[s] = i
        return tuple(inv)

    def inverse(self) -> "SignedPermutation":
        inv = self.sigma_inverse
        return SignedPermutation(tuple(self.tau[self.sigma[k]] for k in range(self.n)), inv)

    def permute_index(self, mu: Sequence[int]) -> MultiIndex:
        return tuple(mu[s] for s in self.sigma)

    def sign(self, mu: Sequence[int]) -> int:
        return -1 if sum(e for t, e in zip(self.tau, mu) if t < 0) % 2 else 1

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for k, s in enumerate(self.sigma):
            m[s, k] = self.tau[s]
        return m

    def describe(self) -> dict:
        return {"tau": list(self.tau), "sigma": [s + 1 for s in self.sigma]}


def enumerate_group(n: int) -> list[SignedPermutation]:
    """All ``2^n n!`` signed permutations, permutations outermost."""
    if n > MAX_GROUP_N:
        raise GuardError("group too large: 2^%d * %d! elements (limit n <= %d)"
                         % (n, n, MAX_GROUP_N))
    if n < 1:
        raise ValueError("n must be positive")
    return [SignedPermutation(tau, sigma)
            for sigma in itertools.permutations(range(n))
            for tau in itertools.product((1, -1), repeat=n)]


@lru_cache(maxsize=None)
def _coord_action(g: SignedPermutation, d: int):
    n = g.n
    inv = g.sigma_inverse
    pairs = pair_indices(n)
    pos = {p: k for k, p in enumerate(pairs)}
    pair_src = []
    for i, j in pairs:
        a, b = inv[i], inv[j]
        sign = g.tau[i] * g.tau[j]
        if a > b:
            a, b, sign = b, a, -sign
        pair_src.append((pos[(a, b)], sign))
    mus = w2_indices(n, d)
    mpos = {mu: k for k, mu in enumerate(mus)}
    mu_src = [(mpos[g.permute_index(mu)], g.sign(mu)) for mu in mus]
    return inv, tuple(pair_src), tuple(mu_src)


def act_coords(g: SignedPermutation, c: SliceCoordinates) -> SliceCoordinates:
    if g.n != c.n:
        raise ValueError("group element and coordinates differ in n")
    inv, pair_src, mu_src = _coord_action(g, c.d)
    point = tuple(c.point[inv[i]] for i in range(c.n))
    pair = tuple(c.pair[k] if s > 0 else -c.pair[k] for k, s in pair_src)
    mu = tuple(c.mu[k] if s > 0 else -c.mu[k] for k, s in mu_src)
    return SliceCoordinates(c.n, c.d, point, pair, mu, c.exact)


def act_form(g: SignedPermutation, f: Form) -> Form:
    """Exact relabelling of monomials with signs; equals ``apply_orthogonal(f, g.matrix())``."""
    if g.n != f.n:
        raise ValueError("group element and form differ in n")
    coeffs = {}
    for mu, c in f.items():
        nu = [0] * f.n
        sign = 1
        for k, e in enumerate(mu):
            s = g.sigma[k]
            nu[s] = e
            if e % 2 and g.tau[s] < 0:
                sign = -sign
        coeffs[tuple(nu)] = c if sign > 0 else -c
    return Form(f.n, f.degree, coeffs, f.exact)


def same_orbit_bruteforce(c: SliceCoordinates, other: SliceCoordinates
                          ) -> SignedPermutation | None:
    """Some ``g`` with ``act_coords(g, c) == other``, or None."""
    if c.n > MAX_ORBIT_N:
        raise GuardError("orbit search limited to n <= %d" % MAX_ORBIT_N)
    if (c.n, c.d) != (other.n, other.d):
        return None
    for g in enumerate_group(c.n):
        if act_coords(g, c) == other:
            return g
    return None


# ---------------------------------------------------------------------------
# random points


def random_rational(rng: np.random.Generator) -> Fraction:
    """Nonzero rational with numerator in [-99, 99] and denominator in [1, 9]."""
    while True:
        num = int(rng.integers(-99, 100))
        if num:
            return Fraction(num, int(rng.integers(1, 10)))


def random_coordinates(n: int, d: int, rng: np.random.Generator) -> SliceCoordinates:
    dim = slice_dimension(n, 2 * d)
    return SliceCoordinates.from_vector(n, d, [random_rational(rng) for _ in range(dim)])


def random_points(n: int, d: int, count: int, seed: int) -> list[SliceCoordinates]:
    """``count`` independent points, point ``k`` drawn from child stream ``k`` of ``seed``."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [random_coordinates(n, d, np.random.default_rng(s)) for s in children]


def _coord_strings(c: SliceCoordinates) -> list[str]:
    return [str(v) for v in c.vector()]


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepReport:
    seed: int | None
    n: int | None
    degree: int | None
    variant: str
    points: int = 0
    pairs_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return asdict(self)


def invariance_sweep(points: Sequence[SliceCoordinates], variant: InvariantVariant = DEFAULT,
                     seed: int | None = None) -> SweepReport:
    """Check fingerprint constancy over every group element for every point."""
    if not points:
        return SweepReport(seed, None, None, variant.name)
    n, d = points[0].n, points[0].d
    if n > MAX_SWEEP_N:
        raise GuardError("full sweeps limited to n <= %d" % MAX_SWEEP_N)
    report = SweepReport(seed, n, 2 * d, variant.name, points=len(points))
    group = enumerate_group(n)
    for idx, c in enumerate(points):
        base = fingerprint(c, variant)
        for g in group:
            report.pairs_checked += 1
            if fingerprint(act_coords(g, c), variant) != base:
                report.violations.append({"seed": seed, "point_index": idx,
                                          "point": _coord_strings(c), "g": g.describe()})
    return report


@dataclass
class SeparationReport:
    seed: int
    n: int
    degree: int
    variant: str
    trials: int = 0
    off_orbit: int = 0
    same_orbit: int = 0
    mismatched: int = 0
    flagged_collisions: int = 0
    failures: list = field(default_factory=list)
    flagged_points: int = 0
    singular_blocks: list = field(default_factory=list)
    reconstruction_refused: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return asdict(self)


def separation_experiment(n: int, degree: int, trials: int, seed: int,
                          variant: InvariantVariant = DEFAULT) -> SeparationReport:
    """Random pairs of points: off-orbit pairs must get different fingerprints.

    A collision on certified different orbits counts as a failure unless
    either fingerprint carries a genericity flag.
    """
    d = check_domain(n, degree)
    if n > MAX_SWEEP_N:
        raise GuardError("separation experiments limited to n <= %d" % MAX_SWEEP_N)
    report = SeparationReport(seed, n, degree, variant.name)
    pts = random_points(n, d, 2 * trials, seed)
    for t in range(trials):
        c, c2 = pts[2 * t], pts[2 * t + 1]
        report.trials += 1
        fa, fb = fingerprint(c, variant), fingerprint(c2, variant)
        for k, (pt, fp) in enumerate(((c, fa), (c2, fb))):
            if fp.flags:
                report.flagged_points += 1
                report.singular_blocks.extend(
                    {"trial": t, "point": k, "flag": fl} for fl in fp.flags if "node collision" in fl)
                try:
                    reconstruct(fp, pt.pair, variant)
                except SingularBlockError:
                    report.reconstruction_refused += 1
        if same_orbit_bruteforce(c, c2) is not None:
            report.same_orbit += 1
            continue
        report.off_orbit += 1
        if fa != fb:
            report.mismatched += 1
        elif fa.flags or fb.flags:
            report.flagged_collisions += 1
        else:
            report.failures.append({"seed": seed, "trial": t, "a": _coord_strings(c),
                                    "b": _coord_strings(c2)})
    return report


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class GraphSpec:
    n: int
    edges: frozenset

    def __post_init__(self):
        clean = set()
        for e in self.edges:
            i, j = sorted(e)
            if i == j:
                raise ValueError("loop at vertex %d" % (i + 1))
            if not 0 <= i < j < self.n:
                raise ValueError("edge %r out of range" % (e,))
            clean.add((i, j))
        if len(clean) != len(self.edges):
            raise ValueError("duplicate edges")
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "GraphSpec":
        """Build from 1-based edge pairs."""
        edges = [(i - 1, j - 1) for i, j in edges]
        if len({tuple(sorted(e)) for e in edges}) != len(edges):
            raise ValueError("duplicate edges")
        return cls(n, frozenset(edges))

    @classmethod
    def parse(cls, text: str) -> "GraphSpec":
        """``vertices: n`` header, then one 1-based ``i j`` pair per line."""
        n = None
        edges = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("vertices:"):
                n = int(line.split(":", 1)[1])
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError("line %d: expected 'i j'" % lineno)
            edges.append((int(parts[0]), int(parts[1])))
        if n is None:
            raise ValueError("missing 'vertices:' header")
        return cls.from_edges(n, edges)

    def relabel(self, perm: Sequence[int]) -> frozenset:
        return frozenset(tuple(sorted((perm[i], perm[j]))) for i, j in self.edges)


def graph_point(graph: GraphSpec, d: int = 2) -> SliceCoordinates:
    """Slice point with ``c_ij = 1`` on edges and every other coordinate zero."""
    n = graph.n
    zero = Fraction(0)
    pair = tuple(Fraction(1) if p in graph.edges else zero for p in pair_indices(n))
    return SliceCoordinates(n, d, (zero,) * n, pair, (zero,) * len(w2_indices(n, d)))


def isomorphism_bruteforce(a: GraphSpec, b: GraphSpec) -> tuple[tuple[int, ...] | None, int]:
    """Search all vertex relabellings; returns ``(witness or None, permutations tried)``."""
    if a.n != b.n or len(a.edges) != len(b.edges):
        return None, 0
    tried = 0
    for perm in itertools.permutations(range(a.n)):
        tried += 1
        if a.relabel(perm) == b.edges:
            return perm, tried
    return None, tried


def complete_bipartite_33() -> GraphSpec:
    return GraphSpec.from_edges(6, [(i, j) for i in (1, 2, 3) for j in (4, 5, 6)])


def triangular_prism() -> GraphSpec:
    return GraphSpec.from_edges(6, [(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6),
                                    (1, 4), (2, 5), (3, 6)])


def w1_values(c: SliceCoordinates) -> dict:
    u = [u_point(i, c) for i in range(c.n)]
    return {
        "p": [p_w1(l, c) for l in range(1, math.comb(c.n, 2) + 1)],
        "q": [q_w1(l, c, u) for l in range(2, c.n + 1)],
        "z": z_w1(c, u),
    }


def graph_demo() -> dict:
    """K_{3,3} versus the triangular prism: equal W1 invariants, not isomorphic."""
    k33, prism = complete_bipartite_33(), triangular_prism()
    va, vb = w1_values(graph_point(k33)), w1_values(graph_point(prism))
    witness, tried = isomorphism_bruteforce(k33, prism)
    equal = va == vb

    def enc(vals):
        return {"p": [str(v) for v in vals["p"]], "q": [str(v) for v in vals["q"]],
                "z": str(vals["z"])}
    return {
        "graphs": ["K3,3", "triangular prism"],
        "w1_values": {"K3,3": enc(va), "triangular prism": enc(vb)},
        "w1_values_equal": equal,
        "permutations_tried": tried,
        "isomorphic": witness is not None,
        "separation_failure_demonstrated": equal and witness is None,
    }


def dumps(report) -> str:
    data = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(data, indent=2)
