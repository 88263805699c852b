"""Generating invariants of the signed permutation group on slice coordinates.

Evaluation is written against plain ``+ - * **`` so the same code runs on
Fractions, floats, or linear :class:`~orthoinv.forms.Form` objects (the
latter produces the generators symbolically, see :func:`emit_generators`).

Two choices fill gaps in the construction and are selectable per
:class:`InvariantVariant`:

* ``u_mode``: ``"weighted"`` uses ``sum_i mu_i u_i`` as the Vandermonde
  node; ``"paper-literal"`` uses the product of ``u_I`` over classes of
  equal exponents, which collides for distinct multi-indices sharing a
  value pattern (e.g. ``(4,2,0)`` and ``(2,4,0)``).
* ``d_mode``: ``"all-odd-matching"`` sums over perfect matchings of all odd
  positions at once; ``"paper-literal"`` multiplies per equal-value odd
  class and vanishes when such a class has odd size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg
from .forms import Form, MultiIndex, Partition
from .slice import (SliceCoordinates, check_domain, coordinate_names, pair_indices,
                    partition_blocks, slice_dimension, w2_indices)

NODE_TOL = 1e-9
DEFAULT_ATOL = 1e-9
DEFAULT_RTOL = 1e-6


@dataclass(frozen=True)
class InvariantVariant:
    u_mode: str = "weighted"
    d_mode: str = "all-odd-matching"

    def __post_init__(self):
        if self.u_mode not in ("weighted", "paper-literal"):
            raise ValueError("unknown u_mode %r" % self.u_mode)
        if self.d_mode not in ("all-odd-matching", "paper-literal"):
            raise ValueError("unknown d_mode %r" % self.d_mode)

    @property
    def name(self) -> str:
        if self == DEFAULT:
            return "default"
        if self == PAPER_LITERAL:
            return "paper-literal"
        return "paper-literal-u" if self.u_mode == "paper-literal" else "paper-literal-d"

    @classmethod
    def from_name(cls, name: str) -> "InvariantVariant":
        if name in ("default", "repaired"):
            return DEFAULT
        if name == "paper-literal":
            return PAPER_LITERAL
        if name == "paper-literal-u":
            return cls("paper-literal", "all-odd-matching")
        if name == "paper-literal-d":
            return cls("weighted", "paper-literal")
        raise ValueError("unknown variant %r" % name)


DEFAULT = InvariantVariant()
PAPER_LITERAL = InvariantVariant("paper-literal", "paper-literal")


def _is_zero(x) -> bool:
    if isinstance(x, Form):
        return x.is_zero()
    if isinstance(x, float):
        return abs(x) < NODE_TOL
    return x == 0


# ---------------------------------------------------------------------------
# u and d


def u_point(i: int, c: SliceCoordinates):
    return sum((c.pair_value(i, j) ** 2 for j in range(c.n) if j != i), 0)


def u_set(indices, c: SliceCoordinates):
    idx = sorted(indices)
    if not idx:
        raise ValueError("index set must be nonempty")
    if len(idx) == 1:
        return u_point(idx[0], c)
    return sum((c.pair_value(i, j) ** 2 for a, i in enumerate(idx) for j in idx[a + 1:]), 0)


def _value_classes(mu: MultiIndex) -> list[tuple[int, ...]]:
    groups: dict[int, list[int]] = {}
    for i, e in enumerate(mu):
        groups.setdefault(e, []).append(i)
    return [tuple(groups[v]) for v in sorted(groups, reverse=True)]


def u_mu(mu: MultiIndex, c: SliceCoordinates, variant: InvariantVariant = DEFAULT, u=None):
    """Vandermonde node for ``mu``.  ``u`` may carry precomputed ``u_point`` values."""
    if variant.u_mode == "weighted":
        if u is None:
            u = [u_point(i, c) for i in range(c.n)]
        return sum((e * u[i] for i, e in enumerate(mu) if e), 0)
    out = 1
    for cls in _value_classes(mu):
        out = out * u_set(cls, c)
    return out


@lru_cache(maxsize=None)
def perfect_matchings(indices: tuple[int, ...]) -> tuple[tuple[tuple[int, int], ...], ...]:
    """All partitions of ``indices`` into pairs; empty for odd size, ``((),)`` for none."""
    if not indices:
        return ((),)
    if len(indices) % 2:
        return ()
    first, rest = indices[0], indices[1:]
    out = []
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1:]
        for m in perfect_matchings(remaining):
            out.append(((first, partner),) + m)
    return tuple(out)


def _matching_sum(indices: tuple[int, ...], c: SliceCoordinates, u):
    total = 0
    for m in perfect_matchings(indices):
        term = 1
        for i, j in m:
            term = term * (c.pair_value(i, j) * (u[i] - u[j]))
        total = total + term
    return total


def d_mu(mu: MultiIndex, c: SliceCoordinates, variant: InvariantVariant = DEFAULT, u=None):
    """Sign-balancing factor for ``mu``; 1 when ``mu`` has no odd entries."""
    if u is None:
        u = [u_point(i, c) for i in range(c.n)]
    odd = tuple(i for i, e in enumerate(mu) if e % 2)
    if variant.d_mode == "all-odd-matching":
        return _matching_sum(odd, c, u)
    out = 1
    for cls in _value_classes(mu):
        if mu[cls[0]] % 2:
            out = out * _matching_sum(cls, c, u)
    return out


# ---------------------------------------------------------------------------
# W1 generators


def p_w1(l: int, c: SliceCoordinates):
    if not 1 <= l <= math.comb(c.n, 2):
        raise ValueError("p_l needs 1 <= l <= C(n,2)")
    return sum((v ** (2 * l) for v in c.pair), 0)


def q_w1(l: int, c: SliceCoordinates, u=None):
    if not 2 <= l <= c.n:
        raise ValueError("q_l needs 2 <= l <= n")
    if u is None:
        u = [u_point(i, c) for i in range(c.n)]
    return sum((x ** l for x in u), 0)


def z_w1(c: SliceCoordinates, u=None):
    if u is None:
        u = [u_point(i, c) for i in range(c.n)]
    n = c.n
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                total = total + ((u[i] - u[j]) * (u[j] - u[k]) * (u[k] - u[i])
                                 * c.pair_value(i, j) * c.pair_value(j, k) * c.pair_value(k, i))
    return total


def q_block(c: SliceCoordinates, u=None) -> tuple:
    """``p_1..p_C(n,2)``, ``q_2..q_n``, ``z``."""
    if u is None:
        u = [u_point(i, c) for i in range(c.n)]
    ps = [p_w1(l, c) for l in range(1, math.comb(c.n, 2) + 1)]
    qs = [q_w1(l, c, u) for l in range(2, c.n + 1)]
    return tuple(ps + qs + [z_w1(c, u)])


# ---------------------------------------------------------------------------
# Vandermonde blocks


def _vandermonde_rows(nodes: Sequence, weights: Sequence) -> list:
    """``sum_k nodes[k]^t * weights[k]`` for ``t = 0..len(nodes)-1``."""
    size = len(nodes)
    rows = [0] * size
    for x, w in zip(nodes, weights):
        for t in range(size):
            rows[t] = rows[t] + w
            if t + 1 < size:
                w = w * x
    return rows


def r0_block(c: SliceCoordinates, u=None) -> tuple:
    if u is None:
        u = [u_point(i, c) for i in range(c.n)]
    return tuple(_vandermonde_rows(u, c.point))


def r_lambda_block(lam: Partition, c: SliceCoordinates, variant: InvariantVariant = DEFAULT,
                   u=None) -> tuple:
    if u is None:
        u = [u_point(i, c) for i in range(c.n)]
    lam = tuple(lam)
    blocks = partition_blocks(c.n, c.d)
    if lam not in blocks:
        raise ValueError("partition %r is not admissible for n=%d, degree=%d" % (lam, c.n, 2 * c.d))
    mus = w2_indices(c.n, c.d)
    pos = blocks[lam]
    nodes = [u_mu(mus[k], c, variant, u) for k in pos]
    weights = [d_mu(mus[k], c, variant, u) * c.mu[k] for k in pos]
    return tuple(_vandermonde_rows(nodes, weights))


def partition_label(lam: Partition) -> str:
    return "+".join(map(str, lam))


def parse_partition_label(text: str) -> Partition:
    return tuple(int(p) for p in text.split("+"))


# ---------------------------------------------------------------------------
# fingerprints


@dataclass(frozen=True)
class Fingerprint:
    """All generating invariant values at a slice point, in canonical order."""

    n: int
    degree: int
    exact: bool
    variant: InvariantVariant
    q: tuple
    r0: tuple
    r: tuple[tuple[Partition, tuple], ...]
    flags: tuple[str, ...] = field(default=(), compare=False)

    @property
    def generic(self) -> bool:
        return not self.flags

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    def r_dict(self) -> dict[Partition, tuple]:
        return dict(self.r)

    def values(self) -> list:
        out = list(self.q) + list(self.r0)
        for _, vals in self.r:
            out.extend(vals)
        return out

    def __len__(self):
        return len(self.values())

    def to_float(self) -> "Fingerprint":
        return Fingerprint(self.n, self.degree, False, self.variant,
                           tuple(float(v) for v in self.q), tuple(float(v) for v in self.r0),
                           tuple((lam, tuple(float(v) for v in vals)) for lam, vals in self.r),
                           self.flags)

    def to_dict(self) -> dict:
        def enc(v):
            if self.exact:
                v = Fraction(v)
                return "%d/%d" % (v.numerator, v.denominator)
            return float(v)
        return {
            "n": self.n,
            "degree": self.degree,
            "mode": self.mode,
            "variant": self.variant.name,
            "q": [enc(v) for v in self.q],
            "r0": [enc(v) for v in self.r0],
            "r": {partition_label(lam): [enc(v) for v in vals] for lam, vals in self.r},
            "flags": list(self.flags),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "Fingerprint":
        exact = data["mode"] == "exact"

        def dec(v):
            return Fraction(v) if exact else float(v)
        return cls(data["n"], data["degree"], exact, InvariantVariant.from_name(data["variant"]),
                   tuple(dec(v) for v in data["q"]), tuple(dec(v) for v in data["r0"]),
                   tuple((parse_partition_label(k), tuple(dec(v) for v in vals))
                         for k, vals in data["r"].items()),
                   tuple(data.get("flags", ())))


def _collisions(nodes: Sequence, exact: bool) -> list[tuple[int, int]]:
    out = []
    for a in range(len(nodes)):
        for b in range(a + 1, len(nodes)):
            diff = nodes[a] - nodes[b]
            if (diff == 0) if exact else abs(diff) < NODE_TOL:
                out.append((a, b))
    return out


def genericity_flags(c: SliceCoordinates, variant: InvariantVariant = DEFAULT, u=None) -> list[str]:
    """Reasons the invariants may fail to separate or invert at ``c``.

    Covers colliding Vandermonde nodes, vanishing ``d_mu`` and the W1
    locus of zero or equal-magnitude pair coordinates.
    """
    if u is None:
        u = [u_point(i, c) for i in range(c.n)]
    flags = []
    pairs = pair_indices(c.n)
    for a, b in _collisions(u, c.exact):
        flags.append("r0: node collision u[%d] = u[%d]" % (a + 1, b + 1))
    sq = [v * v for v in c.pair]
    for k, v in enumerate(sq):
        if _is_zero(v):
            flags.append("w1: c[%d,%d] = 0" % (pairs[k][0] + 1, pairs[k][1] + 1))
    for a, b in _collisions(sq, c.exact):
        flags.append("w1: |c[%d,%d]| = |c[%d,%d]|" % (pairs[a][0] + 1, pairs[a][1] + 1,
                                                      pairs[b][0] + 1, pairs[b][1] + 1))
    mus = w2_indices(c.n, c.d)
    for lam, pos in partition_blocks(c.n, c.d).items():
        nodes = [u_mu(mus[k], c, variant, u) for k in pos]
        for a, b in _collisions(nodes, c.exact):
            flags.append("r[%s]: node collision at %s and %s"
                         % (partition_label(lam), mus[pos[a]], mus[pos[b]]))
        for k in pos:
            if _is_zero(d_mu(mus[k], c, variant, u)):
                flags.append("r[%s]: degenerate d at %s" % (partition_label(lam), mus[k]))
    return flags


def fingerprint(c: SliceCoordinates, variant: InvariantVariant = DEFAULT) -> Fingerprint:
    """Evaluate every generating invariant at ``c``."""
    check_domain(c.n, 2 * c.d)
    u = [u_point(i, c) for i in range(c.n)]
    r = tuple((lam, r_lambda_block(lam, c, variant, u)) for lam in partition_blocks(c.n, c.d))
    return Fingerprint(c.n, 2 * c.d, c.exact, variant, q_block(c, u), r0_block(c, u), r,
                       tuple(genericity_flags(c, variant, u)))


def generator_count(n: int, degree: int) -> int:
    return slice_dimension(n, degree) + n


def closed_form_count(n: int, degree: int) -> int:
    """``C(n+2d-1, 2d) - C(n-1, 2)``: one fewer than :func:`generator_count`."""
    return math.comb(n + degree - 1, degree) - math.comb(n - 1, 2)


def compare(a: Fingerprint, b: Fingerprint, atol: float = DEFAULT_ATOL,
            rtol: float = DEFAULT_RTOL) -> tuple[bool, float]:
    """Entry-wise ``|x - y| <= atol + rtol * max(|x|, |y|)``.

    Returns ``(equal, max_relative_discrepancy)``.  Two exact fingerprints
    are compared bit-exactly.
    """
    if (a.n, a.degree) != (b.n, b.degree):
        raise ValueError("fingerprints of different shape")
    if [lam for lam, _ in a.r] != [lam for lam, _ in b.r] or len(a) != len(b):
        raise ValueError("fingerprints have different block structure")
    va, vb = a.values(), b.values()
    if a.exact and b.exact:
        worst = 0.0
        for x, y in zip(va, vb):
            if x != y:
                worst = max(worst, float(abs(x - y) / max(abs(x), abs(y))))
        return va == vb, worst
    ok = True
    worst = 0.0
    for x, y in zip(va, vb):
        x, y = float(x), float(y)
        scale = max(abs(x), abs(y))
        diff = abs(x - y)
        if diff > atol + rtol * scale:
            ok = False
        if diff:
            worst = max(worst, diff / scale)
    return ok, worst


# ---------------------------------------------------------------------------
# reconstruction


class SingularBlockError(ValueError):
    pass


def _solve_block(nodes: Sequence, scales: Sequence, rhs: Sequence, exact: bool, label: str,
                 names: Sequence[str]):
    for a, b in _collisions(nodes, exact):
        raise SingularBlockError("block %s is singular: nodes for %s and %s coincide (%s)"
                                 % (label, names[a], names[b], nodes[a]))
    for k, s in enumerate(scales):
        if (s == 0) if exact else abs(s) < NODE_TOL:
            raise SingularBlockError("block %s is singular: zero diagonal factor at %s"
                                     % (label, names[k]))
    size = len(nodes)
    if exact:
        mat = [[nodes[k] ** t * scales[k] for k in range(size)] for t in range(size)]
        return linalg.solve(mat, list(rhs))
    mat = np.array([[float(nodes[k]) ** t * float(scales[k]) for k in range(size)]
                    for t in range(size)])
    return [float(v) for v in np.linalg.solve(mat, np.array(rhs, dtype=float))]


def reconstruct(fp: Fingerprint, pair: Sequence, variant: InvariantVariant | None = None,
                ) -> SliceCoordinates:
    """Recover point and W2 coordinates from the r-values and the pair coordinates."""
    variant = variant or fp.variant
    n, d = fp.n, fp.degree // 2
    exact = fp.exact
    zero = Fraction(0) if exact else 0.0
    partial = SliceCoordinates(n, d, (zero,) * n, tuple(pair),
                               (zero,) * len(w2_indices(n, d)), exact)
    u = [u_point(i, partial) for i in range(n)]
    point = _solve_block(u, [1] * n, fp.r0, exact, "r0", ["u[%d]" % (i + 1) for i in range(n)])
    mus = w2_indices(n, d)
    mu_vals = [zero] * len(mus)
    rd = fp.r_dict()
    for lam, pos in partition_blocks(n, d).items():
        nodes = [u_mu(mus[k], partial, variant, u) for k in pos]
        scales = [d_mu(mus[k], partial, variant, u) for k in pos]
        sol = _solve_block(nodes, scales, rd[lam], exact, partition_label(lam),
                           [str(mus[k]) for k in pos])
        for k, v in zip(pos, sol):
            mu_vals[k] = v
    return SliceCoordinates(n, d, tuple(point), tuple(pair), tuple(mu_vals), exact)


# ---------------------------------------------------------------------------
# symbolic generators


def symbolic_coordinates(n: int, d: int) -> SliceCoordinates:
    """Coordinates whose entries are the coordinate variables themselves."""
    dim = slice_dimension(n, 2 * d)
    return SliceCoordinates.from_vector(n, d, [Form.variable(dim, k) for k in range(dim)])


def emit_generators(n: int, degree: int, variant: InvariantVariant = DEFAULT
                    ) -> list[tuple[str, Form]]:
    """Each generator as an exact polynomial in the coordinate variables.

    Variable ``k`` of every returned form is ``coordinate_names(n, d)[k]``.
    """
    d = check_domain(n, degree)
    c = symbolic_coordinates(n, d)
    u = [u_point(i, c) for i in range(n)]
    out = []
    for l in range(1, math.comb(n, 2) + 1):
        out.append(("p%d" % l, p_w1(l, c)))
    for l in range(2, n + 1):
        out.append(("q%d" % l, q_w1(l, c, u)))
    out.append(("z", z_w1(c, u)))
    for t, f in enumerate(r0_block(c, u)):
        out.append(("r0[%d]" % t, f))
    for lam in partition_blocks(n, d):
        for t, f in enumerate(r_lambda_block(lam, c, variant, u)):
            out.append(("r[%s][%d]" % (partition_label(lam), t), f))
    dim = slice_dimension(n, degree)
    return [(name, f if isinstance(f, Form) else Form.constant(dim, f)) for name, f in out]


def generators_header(n: int, degree: int, variant: InvariantVariant) -> str:
    d = degree // 2
    names = coordinate_names(n, d)
    lines = ["generators n=%d degree=%d variant=%s count=%d"
             % (n, degree, variant.name, generator_count(n, degree)),
             "count = slice dimension %d + n = %d; closed form C(n+2d-1,2d) - C(n-1,2) gives %d"
             " (off by one from the enumerated set)"
             % (slice_dimension(n, degree), generator_count(n, degree), closed_form_count(n, degree)),
             "variables:"]
    lines += ["  x%d = %s" % (k + 1, name) for k, name in enumerate(names)]
    return "\n".join(lines)
