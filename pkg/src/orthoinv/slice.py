"""Moving forms into the diagonal slice and reading off slice coordinates.

A degree ``2d`` form splits as ``|x|^(2d-2) q + w`` with ``q`` quadratic and
``Delta^(d-1) w = 0``.  Diagonalizing ``q`` by an orthogonal change of
variables lands the form in the slice, whose residual symmetry is the
signed permutation group.  The slice has an equivariant basis made of

* point elements ``m_i = |x|^(2d-2) x_i^2``,
* pair elements ``m_ij`` (``i < j``), spanning the part the ``u``-values
  and the W1 invariants are built from,
* the remaining ``m_mu`` indexed by multi-indices (the W2 block).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from . import linalg
from .forms import (Form, MultiIndex, OrthogonalMatrix, Partition, apply_orthogonal,
                    enumerate_multi_indices, enumerate_partitions, laplacian_power, mi_halve,
                    mi_sub, mul_norm_power, multinomial, shape_of, unit)

log = logging.getLogger(__name__)

SLICE_TOL = 1e-8
GAP_TOL = 1e-6


class DomainError(ValueError):
    """Raised for (n, degree) outside the supported range n >= 3, even degree >= 4."""


class SliceError(ValueError):
    """Raised when a form is not an element of the slice."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


def check_domain(n: int, degree: int) -> int:
    """Validate ``(n, degree)`` and return ``d = degree // 2``."""
    if degree % 2:
        raise DomainError("even degree required (got %d)" % degree)
    if degree < 4:
        raise DomainError("degree must be at least 4 (got %d)" % degree)
    if n < 3:
        raise DomainError("need at least 3 variables (got %d)" % n)
    return degree // 2


# ---------------------------------------------------------------------------
# index tables


@lru_cache(maxsize=None)
def pair_indices(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def w2_indices(n: int, d: int) -> tuple[MultiIndex, ...]:
    """Multi-indices of the W2 block in graded-lex order."""
    top = 2 * d
    return tuple(mu for mu in enumerate_multi_indices(n, top)
                 if sum(1 for e in mu if e) >= 2 and shape_of(mu) != (top - 1, 1))


@lru_cache(maxsize=None)
def admissible_partitions(n: int, d: int) -> tuple[Partition, ...]:
    top = 2 * d
    return tuple(enumerate_partitions(top, 2, n, exclusions=[(top - 1, 1)]))


@lru_cache(maxsize=None)
def partition_blocks(n: int, d: int) -> dict[Partition, tuple[int, ...]]:
    """Map each admissible partition to the positions of its multi-indices in ``w2_indices``."""
    mus = w2_indices(n, d)
    return {lam: tuple(k for k, mu in enumerate(mus) if shape_of(mu) == lam)
            for lam in admissible_partitions(n, d)}


@lru_cache(maxsize=None)
def _w2_position(n: int, d: int) -> dict[MultiIndex, int]:
    return {mu: k for k, mu in enumerate(w2_indices(n, d))}


@lru_cache(maxsize=None)
def _pair_position(n: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(pair_indices(n))}


def slice_dimension(n: int, degree: int) -> int:
    return math.comb(n + degree - 1, degree) - math.comb(n, 2)


# ---------------------------------------------------------------------------
# coordinates


@dataclass(frozen=True)
class SliceCoordinates:
    """Coefficients of a slice element in the equivariant basis.

    ``pair`` is stored for ``i < j`` in :func:`pair_indices` order and
    ``mu`` in :func:`w2_indices` order.  Indices are 0-based.
    """

    n: int
    d: int
    point: tuple
    pair: tuple
    mu: tuple
    exact: bool = True

    def __post_init__(self):
        if len(self.point) != self.n or len(self.pair) != math.comb(self.n, 2) \
                or len(self.mu) != len(w2_indices(self.n, self.d)):
            raise ValueError("coordinate block sizes do not match n=%d, d=%d" % (self.n, self.d))

    @property
    def degree(self) -> int:
        return 2 * self.d

    def pair_value(self, i: int, j: int):
        """``c_ij`` with the skew convention ``c_ji = -c_ij``; ``c_ii`` is an error."""
        if i < j:
            return self.pair[_pair_position(self.n)[(i, j)]]
        if i > j:
            return -self.pair[_pair_position(self.n)[(j, i)]]
        raise KeyError("c_ii is undefined")

    def mu_value(self, mu: MultiIndex):
        return self.mu[_w2_position(self.n, self.d)[tuple(mu)]]

    def mu_dict(self) -> dict:
        return dict(zip(w2_indices(self.n, self.d), self.mu))

    def pair_dict(self) -> dict:
        return dict(zip(pair_indices(self.n), self.pair))

    def vector(self) -> list:
        return list(self.point) + list(self.pair) + list(self.mu)

    @classmethod
    def from_vector(cls, n: int, d: int, values: Sequence, exact: bool = True) -> "SliceCoordinates":
        values = list(values)
        npair = math.comb(n, 2)
        return cls(n, d, tuple(values[:n]), tuple(values[n:n + npair]),
                   tuple(values[n + npair:]), exact)

    @classmethod
    def zeros(cls, n: int, d: int, exact: bool = True) -> "SliceCoordinates":
        z = Fraction(0) if exact else 0.0
        return cls.from_vector(n, d, [z] * slice_dimension(n, 2 * d), exact)

    def to_float(self) -> "SliceCoordinates":
        return SliceCoordinates.from_vector(self.n, self.d, [float(v) for v in self.vector()], False)

    def labels(self) -> list[str]:
        return coordinate_names(self.n, self.d)


def coordinate_names(n: int, d: int) -> list[str]:
    """Human-readable names ``c[i]``, ``c[i,j]``, ``c[mu]`` (1-based indices)."""
    names = ["c[%d]" % (i + 1) for i in range(n)]
    names += ["c[%d,%d]" % (i + 1, j + 1) for i, j in pair_indices(n)]
    names += ["c[%s]" % ",".join(map(str, mu)) for mu in w2_indices(n, d)]
    return names


# ---------------------------------------------------------------------------
# basis


def basis_element(mu: MultiIndex) -> Form:
    """The equivariant element attached to ``mu`` (zero for a pure power).

    All-even ``mu`` subtract pure powers, two-odd ``mu`` subtract the
    symmetric ``x_i^(2d-1) x_j + x_i x_j^(2d-1)`` correction, anything with
    more odd entries is the bare monomial.
    """
    mu = tuple(mu)
    n, top = len(mu), sum(mu)
    d = top // 2
    if top % 2:
        raise ValueError("multi-index must have even degree")
    if max(mu) == top:
        return Form.zero(n, top)
    odd = [i for i, e in enumerate(mu) if e % 2]
    lead = Form.monomial(mu, multinomial(top, mu))
    if not odd:
        half = mi_halve(mu)
        coeffs = {unit(n, i, top): multinomial(d - 1, mi_sub(half, unit(n, i)))
                  for i, e in enumerate(mu) if e}
        return lead - Form(n, top, coeffs)
    if len(odd) == 2:
        i, j = odd
        rest = mi_halve(mi_sub(mi_sub(mu, unit(n, i)), unit(n, j)))
        k = d * multinomial(d - 1, rest)
        corr = Form(n, top, {tuple(top - 1 if t == i else 1 if t == j else 0 for t in range(n)): k,
                             tuple(1 if t == i else top - 1 if t == j else 0 for t in range(n)): k})
        return lead - corr
    return Form.monomial(mu)


@dataclass(frozen=True)
class SliceBasis:
    n: int
    d: int
    point: tuple[Form, ...]
    pair: tuple[Form, ...]
    mu: tuple[Form, ...]

    @property
    def pair_index(self):
        return pair_indices(self.n)

    @property
    def mu_index(self):
        return w2_indices(self.n, self.d)

    def elements(self) -> list[Form]:
        return list(self.point) + list(self.pair) + list(self.mu)

    def labelled(self) -> Iterator[tuple[str, Form]]:
        for i, f in enumerate(self.point):
            yield "m[%d]" % (i + 1), f
        for (i, j), f in zip(self.pair_index, self.pair):
            yield "m[%d,%d]" % (i + 1, j + 1), f
        for mu, f in zip(self.mu_index, self.mu):
            yield "m[%s]" % ",".join(map(str, mu)), f

    def __len__(self):
        return self.n + len(self.pair) + len(self.mu)

    def combine(self, c: SliceCoordinates) -> Form:
        """The form with coordinates ``c``."""
        elems = self.elements() if c.exact else [f.to_float() for f in self.elements()]
        out = Form.zero(self.n, 2 * self.d, c.exact)
        for coef, f in zip(c.vector(), elems):
            if coef:
                out = out + f.scale(coef)
        return out


@lru_cache(maxsize=None)
def build_basis(n: int, d: int) -> SliceBasis:
    """Exact equivariant basis of the slice in degree ``2d``."""
    check_domain(n, 2 * d)
    point = tuple(mul_norm_power(Form.monomial(unit(n, i, 2)), d - 1) for i in range(n))
    top = 2 * d
    pair = tuple(basis_element(tuple(top - 1 if t == i else 1 if t == j else 0 for t in range(n)))
                 for i, j in pair_indices(n))
    mu = tuple(basis_element(m) for m in w2_indices(n, d))
    return SliceBasis(n, d, point, pair, mu)


# ---------------------------------------------------------------------------
# harmonic projection onto the quadratic part


@lru_cache(maxsize=None)
def l_map(n: int, d: int) -> tuple[tuple[Fraction, ...], ...]:
    """Matrix of ``q -> Delta^(d-1)(|x|^(2d-2) q)`` on quadratics.

    Columns are indexed by the degree-2 monomials (graded-lex), rows likewise.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1, d >= 1")
    mons = enumerate_multi_indices(n, 2)
    cols = []
    for mu in mons:
        img = laplacian_power(mul_norm_power(Form.monomial(mu), d - 1), d - 1)
        cols.append([img[nu] for nu in mons])
    return tuple(tuple(cols[c][r] for c in range(len(mons))) for r in range(len(mons)))


@lru_cache(maxsize=None)
def _l_inverse(n: int, d: int):
    exact = linalg.inverse(l_map(n, d))
    return tuple(map(tuple, exact)), np.array([[float(v) for v in row] for row in exact])


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric matrix ``M`` with form ``x^T M x``."""

    n: int
    matrix: tuple
    exact: bool = True

    def __post_init__(self):
        m = self.matrix
        for i in range(self.n):
            for j in range(i):
                if self.exact:
                    if m[i][j] != m[j][i]:
                        raise ValueError("matrix not symmetric")
                elif abs(m[i][j] - m[j][i]) > 1e-12:
                    raise ValueError("matrix not symmetric")

    @classmethod
    def from_form(cls, q: Form) -> "QuadraticForm":
        if q.degree != 2:
            raise ValueError("quadratic form needs degree 2")
        n = q.n
        half = Fraction(1, 2) if q.exact else 0.5
        rows = [[q[unit(n, i, 2)] if i == j else q[tuple(int(t in (i, j)) for t in range(n))] * half
                 for j in range(n)] for i in range(n)]
        return cls(n, tuple(map(tuple, rows)), q.exact)

    def to_form(self) -> Form:
        n, m = self.n, self.matrix
        coeffs = {}
        for i in range(n):
            coeffs[unit(n, i, 2)] = m[i][i]
            for j in range(i + 1, n):
                coeffs[tuple(int(t in (i, j)) for t in range(n))] = 2 * m[i][j]
        return Form(n, 2, coeffs, self.exact)

    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix])

    def mixed_residual(self) -> float:
        """Largest absolute off-diagonal entry of ``x^T M x`` (as polynomial coefficient)."""
        return max((abs(float(2 * self.matrix[i][j])) for i in range(self.n)
                    for j in range(i + 1, self.n)), default=0.0)


def quadratic_part(f: Form) -> QuadraticForm:
    """The unique ``q`` with ``f - |x|^(2d-2) q`` killed by ``Delta^(d-1)``.

    Exact for exact input.
    """
    if f.degree % 2 or f.degree < 2:
        raise DomainError("even degree >= 2 required (got %d)" % f.degree)
    n, d = f.n, f.degree // 2
    image = laplacian_power(f, d - 1)
    mons = enumerate_multi_indices(n, 2)
    inv_exact, inv_float = _l_inverse(n, d)
    if f.exact:
        vec = linalg.mat_vec(inv_exact, [image[m] for m in mons])
    else:
        vec = [float(v) for v in inv_float @ np.array([image[m] for m in mons], dtype=float)]
    return QuadraticForm.from_form(Form(n, 2, dict(zip(mons, vec)), f.exact))


# ---------------------------------------------------------------------------
# diagonalization


@dataclass(frozen=True)
class Diagonalization:
    g: OrthogonalMatrix
    eigenvalues: tuple[float, ...]
    gap: float

    @property
    def degenerate(self) -> bool:
        return self.gap < GAP_TOL


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        big = int(np.argmax(np.abs(col)))
        if col[big] < 0:
            out[:, k] = -col
    return out


def diagonalize(q: QuadraticForm) -> Diagonalization:
    """Orthogonal ``g`` with ``g^T M g`` diagonal, eigenvalues descending.

    Each eigenvector column is signed so its largest-magnitude entry is positive.
    """
    vals, vecs = np.linalg.eigh(q.array())
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], _canonical_signs(vecs[:, order])
    gap = float(np.min(vals[:-1] - vals[1:])) if len(vals) > 1 else math.inf
    return Diagonalization(OrthogonalMatrix(vecs), tuple(float(v) for v in vals), gap)


@dataclass(frozen=True)
class GenericityReport:
    eigenvalues: tuple[float, ...]
    gap: float
    warnings: tuple[str, ...] = field(default=())

    @property
    def generic(self) -> bool:
        return not self.warnings


@dataclass(frozen=True)
class SliceMove:
    form: Form
    g: OrthogonalMatrix
    report: GenericityReport


def move_to_slice(f: Form) -> SliceMove:
    """Rotate ``f`` into the slice.

    Returns ``(s, g, report)`` with ``s = apply_orthogonal(f, g)``.  The
    quadratic part is computed exactly when ``f`` is exact; only the
    eigendecomposition and the rotation are floating.
    """
    check_domain(f.n, f.degree)
    q = quadratic_part(f)
    diag = diagonalize(q)
    g = diag.g.T
    s = apply_orthogonal(f.to_float(), g)
    warns = []
    if diag.degenerate:
        msg = ("non-generic: repeated eigenvalues (gap %.3g); invariants may not separate"
               % diag.gap)
        log.warning(msg)
        warns.append(msg)
    return SliceMove(s, g, GenericityReport(diag.eigenvalues, diag.gap, tuple(warns)))


def is_in_slice(f: Form, tol: float | None = None) -> tuple[bool, float]:
    """Whether the quadratic part of ``f`` has no mixed terms; returns ``(ok, residual)``."""
    q = quadratic_part(f)
    res = q.mixed_residual()
    if tol is None:
        tol = 0.0 if f.exact else SLICE_TOL
    return res <= tol, res


# ---------------------------------------------------------------------------
# coordinate extraction


@dataclass(frozen=True)
class _Extractor:
    pivot_monomials: tuple[MultiIndex, ...]
    inverse: tuple[tuple[tuple[int, Fraction], ...], ...]  # sparse rows
    inverse_float: np.ndarray
    check_monomials: tuple[MultiIndex, ...]
    check_rows: tuple[tuple[tuple[int, Fraction], ...], ...]
    check_float: np.ndarray


@lru_cache(maxsize=None)
def _extractor(n: int, d: int) -> _Extractor:
    basis = build_basis(n, d)
    top = 2 * d
    pivots = [unit(n, i, top) for i in range(n)]
    pivots += [tuple(top - 1 if t == i else 1 if t == j else 0 for t in range(n))
               for i, j in pair_indices(n)]
    pivots += list(w2_indices(n, d))
    checks = [tuple(1 if t == i else top - 1 if t == j else 0 for t in range(n))
              for i, j in pair_indices(n)]
    elems = basis.elements()
    a = [[e[m] for e in elems] for m in pivots]
    inv = linalg.inverse(a)
    sparse = tuple(tuple((k, v) for k, v in enumerate(row) if v) for row in inv)
    chk = [[e[m] for e in elems] for m in checks]
    chk_sparse = tuple(tuple((k, v) for k, v in enumerate(row) if v) for row in chk)
    return _Extractor(tuple(pivots), sparse,
                      np.array([[float(v) for v in row] for row in inv]),
                      tuple(checks), chk_sparse,
                      np.array([[float(v) for v in row] for row in chk]))


def coordinates(s: Form, tol: float = SLICE_TOL) -> SliceCoordinates:
    """Coordinates of a slice element in the equivariant basis.

    Exact input must lie in the slice exactly; float input within ``tol``
    relative to its largest coefficient.  Raises :class:`SliceError`
    naming the offending monomials otherwise.
    """
    d = check_domain(s.n, s.degree)
    ex = _extractor(s.n, d)
    if s.exact:
        rhs = [s[m] for m in ex.pivot_monomials]
        vals = [sum((v * rhs[k] for k, v in row), Fraction(0)) for row in ex.inverse]
        bad = []
        for mono, row in zip(ex.check_monomials, ex.check_rows):
            pred = sum((v * vals[k] for k, v in row), Fraction(0))
            if pred != s[mono]:
                bad.append((mono, s[mono] - pred))
    else:
        rhs = np.array([s[m] for m in ex.pivot_monomials], dtype=float)
        arr = ex.inverse_float @ rhs
        vals = [float(v) for v in arr]
        pred = ex.check_float @ arr
        scale = max(1.0, s.max_abs())
        bad = [(mono, float(s[mono] - p)) for mono, p in zip(ex.check_monomials, pred)
               if abs(s[mono] - p) > tol * scale]
    if bad:
        raise SliceError("not a slice element: residual at monomials %s"
                         % ", ".join("%s (%s)" % (m, r) for m, r in bad), [m for m, _ in bad])
    return SliceCoordinates.from_vector(s.n, d, vals, s.exact)
