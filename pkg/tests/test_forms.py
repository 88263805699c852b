import math
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from orthoinv.forms import (Form, FormatError, OrthogonalMatrix, ScalarModeError,
                            apply_orthogonal, enumerate_multi_indices, enumerate_partitions,
                            format_form, format_forms, laplacian, laplacian_power,
                            mul_norm_power, multinomial, parse_form, parse_forms)

from conftest import random_orthogonal


def to_sympy(f):
    xs = sp.symbols("x1:%d" % (f.n + 1))
    expr = sum((sp.Rational(c.numerator, c.denominator) if isinstance(c, F) else c)
               * sp.Mul(*[x ** e for x, e in zip(xs, mu)]) for mu, c in f.items())
    return sp.expand(expr), xs


def from_sympy(expr, xs, degree):
    poly = sp.Poly(expr, *xs)
    coeffs = {mu: F(int(c.p), int(c.q)) for mu, c in poly.terms()}
    return Form(len(xs), degree, coeffs)


def rational_forms(n=3, degree=None):
    degrees = st.integers(0, 4) if degree is None else st.just(degree)

    @st.composite
    def build(draw):
        deg = draw(degrees)
        mons = enumerate_multi_indices(n, deg)
        coeffs = draw(st.dictionaries(st.sampled_from(mons),
                                      st.fractions(min_value=-20, max_value=20, max_denominator=7),
                                      max_size=6))
        return Form(n, deg, coeffs)
    return build()


# -- multinomials and multi-indices

@pytest.mark.parametrize("m, mu, expected", [
    (4, (2, 2, 0), 6),
    (4, (4, 0, 0), 1),
    (6, (6, 0, 0, 0), 1),
    (6, (3, 2, 1), math.factorial(6) // (math.factorial(3) * math.factorial(2))),
])
def test_multinomial(m, mu, expected):
    assert multinomial(m, mu) == expected


def test_multinomial_value_60():
    assert multinomial(6, (3, 2, 1)) == 60


def test_multinomial_arity():
    with pytest.raises(ValueError, match="multinomial arity"):
        multinomial(5, (2, 2))


def test_enumerate_small():
    assert list(enumerate_multi_indices(2, 2)) == [(2, 0), (1, 1), (0, 2)]
    assert list(enumerate_multi_indices(1, 5)) == [(5,)]


@pytest.mark.parametrize("n, degree", [(n, dd) for n in range(1, 6) for dd in range(0, 9)])
def test_enumerate_count_and_order(n, degree):
    mis = enumerate_multi_indices(n, degree)
    assert len(mis) == math.comb(n + degree - 1, degree)
    assert len(set(mis)) == len(mis)
    assert list(mis) == sorted(mis, reverse=True)
    assert all(sum(mu) == degree for mu in mis)


def test_enumerate_3_4_has_15():
    assert len(enumerate_multi_indices(3, 4)) == 15


# -- partitions

def test_partitions_examples():
    assert enumerate_partitions(4, 2, 3, [(3, 1)]) == [(2, 2), (2, 1, 1)]
    assert enumerate_partitions(4, 2, 2, [(3, 1)]) == [(2, 2)]
    assert enumerate_partitions(2, 2, 3, []) == [(1, 1)]


def test_partition_counts_match_sympy():
    from sympy.utilities.iterables import partitions
    for w in range(1, 11):
        assert len(enumerate_partitions(w)) == sum(1 for _ in partitions(w))


# -- Laplacian and |x|^2

def test_laplacian_examples():
    assert laplacian(Form.monomial((2, 0))) == Form.constant(2, 2)
    assert laplacian(Form.monomial((1, 1, 1, 1))).is_zero()
    r4 = mul_norm_power(Form.constant(3, 1), 2)
    assert laplacian(r4) == Form.norm_squared(3).scale(20)


def test_laplacian_power_examples():
    f = Form.monomial((4, 0, 0))
    assert laplacian_power(f, 0) == f
    assert laplacian_power(f, 2) == Form.constant(3, 24)
    m = Form(3, 4, {(2, 2, 0): 6, (4, 0, 0): -1, (0, 4, 0): -1})
    assert laplacian_power(m, 1).is_zero()


def test_mul_norm_power_examples():
    assert mul_norm_power(Form.constant(2, 1), 1) == Form(2, 2, {(2, 0): 1, (0, 2): 1})
    assert mul_norm_power(Form.monomial((2, 0, 0)), 1) == \
        Form(3, 4, {(4, 0, 0): 1, (2, 2, 0): 1, (2, 0, 2): 1})
    f = Form(3, 2, {(1, 1, 0): F(3, 2)})
    assert mul_norm_power(f, 0) == f


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_laplacian_of_norm_powers(n, k):
    lhs = laplacian(mul_norm_power(Form.constant(n, 1), k))
    rhs = mul_norm_power(Form.constant(n, 1), k - 1).scale(2 * k * (2 * k + n - 2))
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(rational_forms(3))
def test_laplacian_matches_sympy(f):
    expr, xs = to_sympy(f)
    lap = sum(sp.diff(expr, x, 2) for x in xs)
    expected = from_sympy(sp.expand(lap), xs, max(f.degree - 2, 0)) if lap != 0 \
        else Form.zero(3, max(f.degree - 2, 0))
    assert laplacian(f) == expected


# -- exact arithmetic

@settings(max_examples=60, deadline=None)
@given(rational_forms(3), rational_forms(3), rational_forms(3))
def test_ring_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    if a.degree == b.degree:
        assert (a + b) * c == a * c + b * c
        assert (a + b) + (-b) == a


@settings(max_examples=30, deadline=None)
@given(rational_forms(3), rational_forms(3))
def test_product_matches_sympy(a, b):
    ea, xs = to_sympy(a)
    eb, _ = to_sympy(b)
    prod = sp.expand(ea * eb)
    expected = from_sympy(prod, xs, a.degree + b.degree) if prod != 0 \
        else Form.zero(3, a.degree + b.degree)
    assert a * b == expected


def test_canonical_storage():
    f = Form(2, 2, {(1, 1): F(1, 2), (2, 0): 0, (0, 2): F(2, 4)})
    assert f.monomials() == [(1, 1), (0, 2)]
    assert f[(0, 2)] == F(1, 2) and f[(0, 2)].denominator == 2
    assert (f - f).is_zero()


def test_degree_and_arity_checks():
    with pytest.raises(ValueError):
        Form(2, 2, {(1, 0): 1})
    with pytest.raises(ValueError):
        Form.monomial((2, 0)) + Form.monomial((3, 0))


def test_modes_do_not_mix():
    e = Form.monomial((2, 0))
    with pytest.raises(ScalarModeError):
        e + e.to_float()
    with pytest.raises(ScalarModeError):
        e.scale(0.5)
    with pytest.raises(ScalarModeError):
        e.to_float().scale(F(1, 2))
    with pytest.raises(ScalarModeError):
        Form(1, 1, {(1,): 0.5}, exact=True)
    assert e.to_float()[(2, 0)] == 1.0


# -- orthogonal action

def rotation(n, i, j, angle):
    g = np.eye(n)
    c, s = math.cos(angle), math.sin(angle)
    g[i, i], g[i, j], g[j, i], g[j, j] = c, -s, s, c
    return g


def test_apply_identity():
    f = Form(3, 4, {(2, 1, 1): 1.5, (0, 0, 4): -2.0}, exact=False)
    assert apply_orthogonal(f, np.eye(3)).allclose(f, 1e-14)


def test_apply_quarter_turn():
    f = Form.monomial((2, 0), exact=False)
    out = apply_orthogonal(f, rotation(2, 0, 1, math.pi / 2))
    assert out.allclose(Form.monomial((0, 2), exact=False), 1e-14)


def test_apply_45_degrees():
    # substitute x -> g^T x with g the +45 degree rotation:
    # x1 -> (x1 + x2)/sqrt2, x2 -> (-x1 + x2)/sqrt2, so x1 x2 -> (x2^2 - x1^2)/2
    f = Form.monomial((1, 1), exact=False)
    out = apply_orthogonal(f, rotation(2, 0, 1, math.pi / 4))
    assert out.allclose(Form(2, 2, {(0, 2): 0.5, (2, 0): -0.5}, exact=False), 1e-14)


def test_apply_rejects_non_orthogonal_and_exact():
    with pytest.raises(ValueError, match="not orthogonal"):
        apply_orthogonal(Form.monomial((2, 0), exact=False), [[1, 1], [0, 1]])
    with pytest.raises(ScalarModeError):
        apply_orthogonal(Form.monomial((2, 0)), np.eye(2))
    with pytest.raises(ValueError, match="not orthogonal"):
        OrthogonalMatrix(np.eye(2) * 1.001)


def test_action_property(rng):
    mons = enumerate_multi_indices(3, 4)
    for _ in range(10):
        f = Form(3, 4, {mu: float(rng.normal()) for mu in mons}, exact=False)
        g, h = random_orthogonal(3, rng), random_orthogonal(3, rng)
        lhs = apply_orthogonal(apply_orthogonal(f, g), h)
        rhs = apply_orthogonal(f, h @ g)
        assert lhs.allclose(rhs, 1e-8)


def test_apply_preserves_norm_power(rng):
    r4 = mul_norm_power(Form.constant(4, 1), 2).to_float()
    assert apply_orthogonal(r4, random_orthogonal(4, rng)).allclose(r4, 1e-12)


# -- text format

def test_roundtrip_exact_text():
    f = Form(3, 4, {(2, 1, 1): F(-3, 7), (0, 0, 4): 5})
    text = format_form(f)
    assert text.startswith("vars: 3\ndegree: 4\n")
    assert parse_form(text) == f


def test_roundtrip_float_text():
    f = Form(2, 2, {(2, 0): 0.1, (1, 1): -1e-20, (0, 2): 3.0}, exact=False)
    g = parse_form(format_form(f))
    assert not g.exact and g == f


def test_parse_comments_and_mode():
    text = "# a comment\nvars: 2\ndegree: 2\n1/2 2 0  # trailing\n3 0 2\n"
    f = parse_form(text)
    assert f.exact and f[(2, 0)] == F(1, 2)
    g = parse_form("vars: 2\ndegree: 2\n0.5 2 0\n3 0 2\n")
    assert not g.exact and g[(0, 2)] == 3.0


@pytest.mark.parametrize("text", [
    "vars: 2\ndegree: 2\n1 3 0\n",          # degree mismatch
    "vars: 2\n1 2 0\n",                     # missing header
    "vars: 2\ndegree: 2\n1 2\n",            # wrong arity
    "vars: 2\ndegree: 2\n1/2 2 0\n0.5 0 2\n",  # mixed modes
    "vars: 2\ndegree: 2\nabc 2 0\n",
])
def test_parse_rejects(text):
    with pytest.raises(FormatError):
        parse_form(text)


def test_multi_form_document():
    forms = [("a", Form.monomial((1, 1))), ("b", Form.monomial((0, 2), F(2, 3)))]
    text = format_forms(forms, header="two forms")
    assert parse_forms(text) == forms
