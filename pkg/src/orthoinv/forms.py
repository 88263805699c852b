"""Sparse homogeneous polynomials over exact rationals or doubles.

A :class:`Form` maps exponent tuples to coefficients.  Exact forms hold
:class:`fractions.Fraction` coefficients, float forms hold ``float``; the two
never mix silently (use :meth:`Form.to_float`).  Monomials are kept in graded
lexicographic order with ``x1 > x2 > ... > xn``.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MultiIndex = tuple[int, ...]
Partition = tuple[int, ...]


class ScalarModeError(TypeError):
    """Raised when exact and floating values meet in one operation."""


class FormatError(ValueError):
    """Raised for malformed form text."""


# ---------------------------------------------------------------------------
# multi-index combinatorics


def multinomial(m: int, mu: Sequence[int]) -> int:
    """Return ``m! / prod(mu_i!)``."""
    if any(e < 0 for e in mu) or sum(mu) != m:
        raise ValueError("multinomial arity: entries of %r do not sum to %d" % (tuple(mu), m))
    out = math.factorial(m)
    for e in mu:
        out //= math.factorial(e)
    return out


@lru_cache(maxsize=None)
def enumerate_multi_indices(n: int, degree: int) -> tuple[MultiIndex, ...]:
    """All exponent vectors of length ``n`` summing to ``degree``, graded-lex descending."""
    if n < 1 or degree < 0:
        raise ValueError("need n >= 1 and degree >= 0")
    if n == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in enumerate_multi_indices(n - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


def unit(n: int, i: int, power: int = 1) -> MultiIndex:
    return tuple(power if k == i else 0 for k in range(n))


def mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    out = tuple(x - y for x, y in zip(a, b))
    if any(e < 0 for e in out):
        raise ValueError("multi-index difference %r - %r is negative" % (a, b))
    return out


def mi_halve(a: MultiIndex) -> MultiIndex:
    if any(e % 2 for e in a):
        raise ValueError("multi-index %r is not divisible by 2" % (a,))
    return tuple(e // 2 for e in a)


def shape_of(mu: MultiIndex) -> Partition:
    """The integer partition formed by the nonzero entries of ``mu``."""
    return tuple(sorted((e for e in mu if e), reverse=True))


def enumerate_partitions(weight: int, min_len: int = 1, max_len: int | None = None,
                         exclusions: Iterable[Sequence[int]] = ()) -> list[Partition]:
    """Partitions of ``weight`` with ``min_len <= length <= max_len``.

    Ordered reverse-lexicographically, so ``(2, 2)`` precedes ``(2, 1, 1)``.
    """
    if max_len is None:
        max_len = weight
    banned = {tuple(p) for p in exclusions}

    def rec(rest: int, cap: int) -> Iterator[Partition]:
        if rest == 0:
            yield ()
            return
        for part in range(min(rest, cap), 0, -1):
            for tail in rec(rest - part, part):
                yield (part,) + tail

    return [p for p in rec(weight, weight)
            if min_len <= len(p) <= max_len and p not in banned]


# ---------------------------------------------------------------------------
# scalars


def _coerce(value, exact: bool):
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        raise ScalarModeError("exact form cannot take %s coefficient %r" % (type(value).__name__, value))
    if isinstance(value, float):
        return value
    if isinstance(value, int):
        return float(value)
    raise ScalarModeError("float form cannot take %s coefficient %r" % (type(value).__name__, value))


def _is_exact_scalar(value) -> bool | None:
    """True for Fraction, False for float, None for plain ints (valid in both modes)."""
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, Fraction):
        return True
    if isinstance(value, float):
        return False
    if isinstance(value, int):
        return None
    raise TypeError("not a scalar: %r" % (value,))


# ---------------------------------------------------------------------------
# forms


class Form:
    """Homogeneous polynomial in ``n`` variables.

    Immutable; zero coefficients are never stored.  Arithmetic with a plain
    ``int`` is allowed in both modes, ``Fraction`` only for exact forms and
    ``float`` only for float forms.
    """

    __slots__ = ("n", "degree", "exact", "_coeffs", "_hash")

    def __init__(self, n: int, degree: int, coeffs: Mapping[MultiIndex, object] | None = None,
                 exact: bool = True):
        if n < 1 or degree < 0:
            raise ValueError("need n >= 1 and degree >= 0")
        clean = {}
        for mu, c in (coeffs or {}).items():
            mu = tuple(mu)
            if len(mu) != n or any(e < 0 for e in mu) or sum(mu) != degree:
                raise ValueError("monomial %r does not fit n=%d, degree=%d" % (mu, n, degree))
            c = _coerce(c, exact)
            if c:
                clean[mu] = clean.get(mu, 0) + c
        self.n = n
        self.degree = degree
        self.exact = exact
        self._coeffs = {mu: clean[mu] for mu in sorted(clean, reverse=True) if clean[mu]}
        self._hash = None

    @classmethod
    def _raw(cls, n, degree, coeffs, exact):
        # trusted constructor: coeffs already clean, zero-free and typed
        f = cls.__new__(cls)
        f.n, f.degree, f.exact = n, degree, exact
        f._coeffs = {mu: coeffs[mu] for mu in sorted(coeffs, reverse=True)}
        f._hash = None
        return f

    # -- constructors

    @classmethod
    def zero(cls, n: int, degree: int, exact: bool = True) -> "Form":
        return cls(n, degree, {}, exact)

    @classmethod
    def constant(cls, n: int, value=1, exact: bool = True) -> "Form":
        return cls(n, 0, {(0,) * n: value}, exact)

    @classmethod
    def monomial(cls, mu: Sequence[int], coeff=1, exact: bool = True) -> "Form":
        mu = tuple(mu)
        return cls(len(mu), sum(mu), {mu: coeff}, exact)

    @classmethod
    def variable(cls, n: int, i: int, exact: bool = True) -> "Form":
        return cls.monomial(unit(n, i), 1, exact)

    @classmethod
    def norm_squared(cls, n: int, exact: bool = True) -> "Form":
        """``|x|^2 = x1^2 + ... + xn^2``."""
        return cls(n, 2, {unit(n, i, 2): 1 for i in range(n)}, exact)

    # -- mapping protocol

    def __getitem__(self, mu) -> object:
        return self._coeffs.get(tuple(mu), Fraction(0) if self.exact else 0.0)

    def __iter__(self):
        return iter(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def monomials(self) -> list[MultiIndex]:
        return list(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    # -- comparison

    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool) and other == 0:
            return self.is_zero()
        if not isinstance(other, Form):
            return NotImplemented
        return (self.n, self.degree, self.exact) == (other.n, other.degree, other.exact) \
            and self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.degree, self.exact, tuple(self._coeffs.items())))
        return self._hash

    def allclose(self, other: "Form", atol: float = 1e-8) -> bool:
        """Coefficient-wise comparison within ``atol``, ignoring scalar mode."""
        if (self.n, self.degree) != (other.n, other.degree):
            return False
        keys = set(self._coeffs) | set(other._coeffs)
        return all(abs(float(self[k]) - float(other[k])) <= atol for k in keys)

    def max_abs(self) -> float:
        return max((abs(float(c)) for c in self._coeffs.values()), default=0.0)

    # -- arithmetic

    def _check_scalar(self, s):
        kind = _is_exact_scalar(s)
        if kind is not None and kind != self.exact:
            raise ScalarModeError("cannot mix %s scalar with %s form"
                                  % (type(s).__name__, "exact" if self.exact else "float"))
        return _coerce(s, self.exact)

    def _check_form(self, other: "Form"):
        if other.exact != self.exact:
            raise ScalarModeError("cannot mix exact and float forms")
        if other.n != self.n:
            raise ValueError("variable count mismatch: %d vs %d" % (self.n, other.n))

    def __add__(self, other):
        if isinstance(other, int) and not isinstance(other, bool) and other == 0:
            return self
        if not isinstance(other, Form):
            return NotImplemented
        self._check_form(other)
        if self.degree != other.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other
            raise ValueError("degree mismatch: %d vs %d" % (self.degree, other.degree))
        out = dict(self._coeffs)
        for mu, c in other._coeffs.items():
            v = out.get(mu, 0) + c
            if v:
                out[mu] = v
            else:
                out.pop(mu, None)
        return Form._raw(self.n, self.degree, out, self.exact)

    __radd__ = __add__

    def __neg__(self):
        return Form._raw(self.n, self.degree, {mu: -c for mu, c in self._coeffs.items()}, self.exact)

    def __sub__(self, other):
        if isinstance(other, int) and not isinstance(other, bool) and other == 0:
            return self
        if not isinstance(other, Form):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def scale(self, s) -> "Form":
        s = self._check_scalar(s)
        if not s:
            return Form._raw(self.n, self.degree, {}, self.exact)
        return Form._raw(self.n, self.degree, {mu: s * c for mu, c in self._coeffs.items()}, self.exact)

    def __mul__(self, other):
        if isinstance(other, Form):
            self._check_form(other)
            out: dict = {}
            for mu, a in self._coeffs.items():
                for nu, b in other._coeffs.items():
                    k = tuple(x + y for x, y in zip(mu, nu))
                    out[k] = out.get(k, 0) + a * b
            return Form._raw(self.n, self.degree + other.degree,
                             {k: v for k, v in out.items() if v}, self.exact)
        if isinstance(other, (int, Fraction, float)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("power must be a non-negative integer")
        result = Form.constant(self.n, 1, self.exact)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def to_float(self) -> "Form":
        """Lossy conversion to float mode."""
        if not self.exact:
            return self
        return Form(self.n, self.degree, {mu: float(c) for mu, c in self._coeffs.items()}, exact=False)

    def evaluate(self, point: Sequence) -> object:
        total = 0
        for mu, c in self._coeffs.items():
            term = c
            for x, e in zip(point, mu):
                if e:
                    term = term * x ** e
            total = total + term
        return total

    def __repr__(self):
        return "Form(n=%d, degree=%d, %s, %s)" % (
            self.n, self.degree, "exact" if self.exact else "float", self.pretty())

    def pretty(self) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for mu, c in self._coeffs.items():
            mono = "*".join("x%d^%d" % (i + 1, e) if e > 1 else "x%d" % (i + 1)
                            for i, e in enumerate(mu) if e)
            parts.append("%s*%s" % (c, mono) if mono else str(c))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# differential operators


def laplacian(f: Form) -> Form:
    """Sum of second partial derivatives; degree drops by two (zero form below degree 2)."""
    if f.degree < 2:
        return Form.zero(f.n, 0, f.exact)
    out: dict = {}
    for mu, c in f.items():
        for i, e in enumerate(mu):
            if e >= 2:
                nu = mu[:i] + (e - 2,) + mu[i + 1:]
                out[nu] = out.get(nu, 0) + c * (e * (e - 1))
    return Form._raw(f.n, f.degree - 2, {k: v for k, v in out.items() if v}, f.exact)


def laplacian_power(f: Form, k: int) -> Form:
    if k < 0:
        raise ValueError("k must be non-negative")
    for _ in range(k):
        f = laplacian(f)
    return f


def mul_norm_power(f: Form, k: int) -> Form:
    """Multiply by ``|x|^(2k)``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = f
    r2 = Form.norm_squared(f.n, f.exact)
    for _ in range(k):
        out = out * r2
    return out


def act_substitution(f: Form, images: Sequence[Form]) -> Form:
    """Substitute ``x_i -> images[i]`` (linear forms) and re-expand."""
    if len(images) != f.n:
        raise ValueError("need one image per variable")
    powers = [[Form.constant(img.n, 1, img.exact)] for img in images]
    out = Form.zero(images[0].n, f.degree, f.exact)
    for mu, c in f.items():
        term = None
        for i, e in enumerate(mu):
            if not e:
                continue
            pw = powers[i]
            while len(pw) <= e:
                pw.append(pw[-1] * images[i])
            term = pw[e] if term is None else term * pw[e]
        if term is None:
            term = Form.constant(f.n, 1, f.exact)
        out = out + term.scale(c)
    return out


# ---------------------------------------------------------------------------
# orthogonal action

ORTHOGONALITY_TOL = 1e-10


class OrthogonalMatrix:
    """A real orthogonal ``n x n`` matrix, checked on construction."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("not orthogonal: matrix must be square")
        err = np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) if m.size else 0.0
        if err >= ORTHOGONALITY_TOL:
            raise ValueError("not orthogonal: |g^T g - I| = %.3g" % err)
        m.setflags(write=False)
        self.matrix = m

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def T(self) -> "OrthogonalMatrix":
        return OrthogonalMatrix(self.matrix.T)

    def __matmul__(self, other: "OrthogonalMatrix") -> "OrthogonalMatrix":
        return OrthogonalMatrix(self.matrix @ other.matrix)

    def __repr__(self):
        return "OrthogonalMatrix(%s)" % np.array2string(self.matrix, precision=6)


def apply_orthogonal(f: Form, g) -> Form:
    """Return ``f o g^{-1}``, i.e. substitute ``x -> g^T x``.

    ``g`` is an :class:`OrthogonalMatrix` or anything convertible to one.
    Only float forms are accepted; convert exact input with ``to_float``.
    """
    if not isinstance(g, OrthogonalMatrix):
        g = OrthogonalMatrix(g)
    if f.exact:
        raise ScalarModeError("apply_orthogonal needs a float form; call to_float() first")
    if g.n != f.n:
        raise ValueError("matrix size %d does not match n=%d" % (g.n, f.n))
    m = g.matrix
    images = [Form(f.n, 1, {unit(f.n, k): float(m[k, i]) for k in range(f.n)}, exact=False)
              for i in range(f.n)]
    return act_substitution(f, images)


# ---------------------------------------------------------------------------
# text format

_FRACTION_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def format_scalar(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, float):
        if not math.isfinite(c):
            raise FormatError("non-finite coefficient %r" % c)
        return repr(c)
    return str(c)


def format_form(f: Form, comment: str | None = None) -> str:
    """Render a form in the line-oriented text format."""
    lines = []
    if comment:
        lines.extend("# " + line for line in comment.splitlines())
    lines.append("vars: %d" % f.n)
    lines.append("degree: %d" % f.degree)
    for mu, c in f.items():
        lines.append(" ".join([format_scalar(c)] + [str(e) for e in mu]))
    return "\n".join(lines) + "\n"


def _parse_block(lines: list[tuple[int, str]]) -> Form:
    n = degree = None
    rows = []
    for lineno, line in lines:
        key, sep, value = line.partition(":")
        if sep and key.strip() in ("vars", "degree"):
            try:
                v = int(value.strip())
            except ValueError:
                raise FormatError("line %d: bad header %r" % (lineno, line)) from None
            if key.strip() == "vars":
                n = v
            else:
                degree = v
            continue
        rows.append((lineno, line.split()))
    if n is None or degree is None:
        raise FormatError("missing 'vars:' or 'degree:' header")
    if n < 1 or degree < 0:
        raise FormatError("invalid header values vars=%d degree=%d" % (n, degree))
    tokens = [r[1][0] for r in rows]
    exact = all(_FRACTION_RE.match(t) for t in tokens)
    coeffs: dict = {}
    for lineno, parts in rows:
        if len(parts) != n + 1:
            raise FormatError("line %d: expected coefficient and %d exponents" % (lineno, n))
        tok = parts[0]
        try:
            if exact:
                c = Fraction(tok)
            else:
                if "/" in tok:
                    raise FormatError("line %d: rational %r in a float form (mixed scalar modes)"
                                      % (lineno, tok))
                c = float(tok)
                if not math.isfinite(c):
                    raise FormatError("line %d: non-finite coefficient" % lineno)
            mu = tuple(int(e) for e in parts[1:])
        except (ValueError, ZeroDivisionError):
            raise FormatError("line %d: cannot parse %r" % (lineno, " ".join(parts))) from None
        if any(e < 0 for e in mu):
            raise FormatError("line %d: negative exponent" % lineno)
        if sum(mu) != degree:
            raise FormatError("line %d: monomial degree %d does not match degree %d"
                              % (lineno, sum(mu), degree))
        coeffs[mu] = coeffs.get(mu, 0) + c
    return Form(n, degree, coeffs, exact)


def _strip(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def parse_form(text: str) -> Form:
    """Parse a single form.  Integer and ``p/q`` coefficients give an exact form."""
    return _parse_block(_strip(text))


def format_forms(named: Iterable[tuple[str, Form]], header: str | None = None) -> str:
    chunks = []
    if header:
        chunks.append("".join("# " + line + "\n" for line in header.splitlines()))
    for name, f in named:
        chunks.append(format_form(f, comment="form " + name))
    return "\n".join(chunks)


def parse_forms(text: str) -> list[tuple[str, Form]]:
    """Parse a multi-form document written by :func:`format_forms`."""
    blocks: list[tuple[str, list]] = []
    pending_name = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("form "):
                pending_name = body[5:].strip()
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            blocks.append((pending_name or "form%d" % (len(blocks) + 1), []))
            pending_name = None
        if not blocks:
            raise FormatError("line %d: data before first 'vars:' header" % lineno)
        blocks[-1][1].append((lineno, line))
    return [(name, _parse_block(lines)) for name, lines in blocks]
