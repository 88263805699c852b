import json
import math
from fractions import Fraction as F

import pytest

from orthoinv.forms import Form
from orthoinv.invariants import (DEFAULT, PAPER_LITERAL, Fingerprint, InvariantVariant,
                                 SingularBlockError, closed_form_count, compare, d_mu,
                                 emit_generators, fingerprint, generator_count,
                                 genericity_flags, p_w1, perfect_matchings, q_w1,
                                 r0_block, r_lambda_block, reconstruct, u_mu, u_point, u_set,
                                 z_w1)
from orthoinv.oracle import act_coords, enumerate_group, random_points
from orthoinv.slice import SliceCoordinates, coordinate_names, slice_dimension, w2_indices

from conftest import generic_points


def standing(point=(1, 1, 2), mu=None, d=2):
    """n = 3 with c12 = 1, c13 = 2, c23 = 3."""
    nmu = len(w2_indices(3, d))
    mu = tuple(mu) if mu is not None else (0,) * nmu
    return SliceCoordinates(3, d, tuple(map(F, point)), (F(1), F(2), F(3)), tuple(map(F, mu)))


# -- u and d

def test_u_examples():
    c = standing()
    assert [u_point(i, c) for i in range(3)] == [5, 10, 13]
    assert u_point(0, SliceCoordinates.zeros(3, 2)) == 0
    assert u_set([0, 1], c) == 1
    assert u_set([0, 1, 2], c) == 14
    assert u_set([1], c) == 10
    with pytest.raises(ValueError):
        u_set([], c)


def test_u_mu_examples():
    c = standing()
    assert u_mu((2, 2, 0), c, PAPER_LITERAL) == 13
    assert u_mu((2, 2, 0), c) == 30
    assert (u_mu((2, 0, 2), c), u_mu((0, 2, 2), c)) == (36, 46)


def test_perfect_matchings():
    assert perfect_matchings(()) == ((),)
    assert perfect_matchings((0, 1, 2)) == ()
    assert perfect_matchings((0, 1)) == (((0, 1),),)
    for k in range(0, 9, 2):
        assert len(perfect_matchings(tuple(range(k)))) == math.prod(range(1, k, 2))


def test_d_mu_examples():
    c = standing()
    for v in (DEFAULT, PAPER_LITERAL):
        assert d_mu((2, 2, 0), c, v) == 1
        assert d_mu((2, 1, 1), c, v) == -9
    c6 = standing(d=3)
    assert d_mu((3, 1, 2), c6, PAPER_LITERAL) == 0
    assert d_mu((3, 1, 2), c6) == 1 * (5 - 10)


def test_d_mu_four_odd_entries():
    c = SliceCoordinates.from_vector(4, 2, [F(k + 1) for k in range(slice_dimension(4, 4))])
    u = [u_point(i, c) for i in range(4)]
    expected = sum(c.pair_value(a, b) * (u[a] - u[b]) * c.pair_value(e, f) * (u[e] - u[f])
                   for (a, b), (e, f) in [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))])
    assert d_mu((1, 1, 1, 1), c) == d_mu((1, 1, 1, 1), c, PAPER_LITERAL) == expected


# -- W1 generators

def test_w1_examples():
    c = standing()
    assert (p_w1(1, c), p_w1(2, c)) == (14, 98)
    assert (q_w1(2, c), q_w1(3, c)) == (294, 3322)
    assert z_w1(c) == -720
    zero = SliceCoordinates.zeros(3, 2)
    assert p_w1(1, zero) == q_w1(2, zero) == z_w1(zero) == 0
    with pytest.raises(ValueError):
        p_w1(4, c)
    with pytest.raises(ValueError):
        q_w1(1, c)
    with pytest.raises(ValueError):
        q_w1(4, c)


def test_z_sign_flip():
    from orthoinv.oracle import SignedPermutation
    c = standing()
    g = SignedPermutation((-1, 1, 1), (0, 1, 2))
    flipped = act_coords(g, c)
    assert flipped.pair == (-1, -2, 3)
    assert z_w1(flipped) == -720


# -- Vandermonde blocks

def test_r0_examples():
    assert r0_block(standing()) == (4, 41, 463)


def test_r_lambda_examples():
    mus = w2_indices(3, 2)
    vals = [F(k + 2, 3) for k in range(len(mus))]
    c = standing(mu=vals)
    cm = dict(zip(mus, vals))
    assert r_lambda_block((2, 2), c)[0] == cm[(2, 2, 0)] + cm[(2, 0, 2)] + cm[(0, 2, 2)]
    expected = sum(d_mu(mu, c) * cm[mu] for mu in mus if sorted(mu) == [1, 1, 2])
    assert r_lambda_block((2, 1, 1), c)[0] == expected
    # explicit t = 1 row for the even block: sum of u_mu * c_mu
    assert r_lambda_block((2, 2), c)[1] == 30 * cm[(2, 2, 0)] + 36 * cm[(2, 0, 2)] + 46 * cm[(0, 2, 2)]
    with pytest.raises(ValueError):
        r_lambda_block((3, 1), c)


def test_single_element_block():
    c = random_points(4, 2, 1, 2)[0]
    (val,) = r_lambda_block((1, 1, 1, 1), c)
    assert val == d_mu((1, 1, 1, 1), c) * c.mu_value((1, 1, 1, 1))


# -- fingerprints

def test_fingerprint_shape_and_zero():
    fp = fingerprint(standing())
    assert len(fp) == 15 and len(fp.q) == 6 and len(fp.r0) == 3
    assert [lam for lam, _ in fp.r] == [(2, 2), (2, 1, 1)]
    assert fp.q == (14, 98, 794, 294, 3322, -720)
    zero = fingerprint(SliceCoordinates.zeros(3, 2))
    assert all(v == 0 for v in zero.values())
    assert zero.flags


def test_fingerprint_count_matches_generator_count():
    for n, degree in [(3, 4), (3, 6), (4, 4), (4, 6), (5, 4)]:
        c = SliceCoordinates.zeros(n, degree // 2)
        assert len(fingerprint(c)) == generator_count(n, degree) == slice_dimension(n, degree) + n


def test_fingerprint_standing_orbit_exact():
    c = standing(mu=[F(k - 2, 5) for k in range(6)])
    base = fingerprint(c)
    for g in enumerate_group(3):
        assert fingerprint(act_coords(g, c)) == base


@pytest.mark.parametrize("n, degree", [(3, 4), (3, 6), (4, 4)])
def test_invariance_sweep(sweep_reports, n, degree):
    rep = sweep_reports(n, degree)
    assert rep.points == 50
    assert rep.pairs_checked == 50 * 2 ** n * math.factorial(n)
    assert rep.violations == []


@pytest.mark.parametrize("variant", [DEFAULT, PAPER_LITERAL])
def test_node_and_d_equivariance(variant):
    """u_mu(mu, g.c) = u_mu(sigma(mu), c) and d_mu(mu, g.c) = tau^mu d_mu(sigma(mu), c)."""
    for n, d in [(3, 2), (3, 3), (4, 2)]:
        c = random_points(n, d, 1, 31)[0]
        for g in enumerate_group(n)[::7]:
            gc = act_coords(g, c)
            for mu in w2_indices(n, d):
                nu = g.permute_index(mu)
                assert u_mu(mu, gc, variant) == u_mu(nu, c, variant)
                assert d_mu(mu, gc, variant) == g.sign(mu) * d_mu(nu, c, variant)


def test_flags():
    c = standing()
    flags = genericity_flags(c)
    # mu block is zero but d and nodes are fine; standing point u are distinct
    assert not any(f.startswith("r0") for f in flags)
    same_u = SliceCoordinates(3, 2, (F(1),) * 3, (F(1),) * 3, (F(1),) * 6)
    flags = genericity_flags(same_u)
    assert any("r0: node collision" in f for f in flags)
    assert any("|c[1,2]| = |c[1,3]|" in f for f in flags)
    assert any("degenerate d" in f for f in flags)
    assert genericity_flags(same_u.to_float())


def test_literal_variant_flags_structural():
    c = random_points(3, 3, 1, 0)[0]
    assert not fingerprint(c).flags
    flags = fingerprint(c, PAPER_LITERAL).flags
    assert any(f.startswith("r[4+2]: node collision") for f in flags)


def test_json_roundtrip():
    c = random_points(3, 2, 1, 8)[0]
    fp = fingerprint(c)
    data = json.loads(fp.to_json())
    assert data["mode"] == "exact" and isinstance(data["q"][0], str)
    assert Fingerprint.from_dict(data) == fp
    ff = fp.to_float()
    assert Fingerprint.from_dict(json.loads(ff.to_json())) == ff


def test_compare():
    c, c2 = generic_points(3, 2, 2, 3)
    fa, fb = fingerprint(c), fingerprint(c2)
    assert compare(fa, fa) == (True, 0.0)
    ok, worst = compare(fa, fb)
    assert not ok and worst > 0
    ok, worst = compare(fa, fa.to_float())
    assert ok and worst < 1e-12
    vals = list(fa.to_float().q)
    vals[0] *= 1 + 1e-5
    bumped = Fingerprint(3, 4, False, DEFAULT, tuple(vals), fa.to_float().r0, fa.to_float().r)
    ok, worst = compare(fa.to_float(), bumped)
    assert not ok and worst == pytest.approx(1e-5, rel=1e-3)
    with pytest.raises(ValueError):
        compare(fa, fingerprint(SliceCoordinates.zeros(3, 3)))


# -- reconstruction

@pytest.mark.parametrize("n, degree", [(3, 4), (3, 6), (4, 4)])
def test_reconstruct_roundtrip(n, degree):
    for c in generic_points(n, degree // 2, 20, 44):
        assert reconstruct(fingerprint(c), c.pair) == c


def test_reconstruct_standing_and_tamper():
    c = standing(mu=[F(k + 1, 7) for k in range(6)])
    fp = fingerprint(c)
    assert not fp.flags
    assert reconstruct(fp, c.pair) == c
    tampered = Fingerprint(3, 4, True, DEFAULT, fp.q, (fp.r0[0] + 1,) + fp.r0[1:], fp.r)
    assert reconstruct(tampered, c.pair) != c


def test_reconstruct_float():
    c = generic_points(3, 3, 1, 12)[0]
    rec = reconstruct(fingerprint(c.to_float()), c.to_float().pair)
    for a, b in zip(rec.vector(), c.vector()):
        assert a == pytest.approx(float(b), rel=1e-6, abs=1e-9)


def test_reconstruct_refuses_singular():
    c = random_points(3, 3, 1, 0)[0]
    fp = fingerprint(c, PAPER_LITERAL)
    with pytest.raises(SingularBlockError, match=r"block 4\+2 is singular"):
        reconstruct(fp, c.pair)
    same_u = SliceCoordinates(3, 2, (F(1),) * 3, (F(1),) * 3, (F(1),) * 6)
    with pytest.raises(SingularBlockError, match="r0"):
        reconstruct(fingerprint(same_u), same_u.pair)


# -- symbolic generators

def test_generator_counts():
    gens = emit_generators(3, 4)
    assert len(gens) == 15 == generator_count(3, 4)
    assert closed_form_count(3, 4) == 14
    names = [name for name, _ in gens]
    assert names[:6] == ["p1", "p2", "p3", "q2", "q3", "z"]
    assert names[6:9] == ["r0[0]", "r0[1]", "r0[2]"]


def test_generator_examples():
    gens = dict(emit_generators(3, 4))
    dim = slice_dimension(3, 4)
    names = coordinate_names(3, 2)
    k = {name: i for i, name in enumerate(names)}
    p1 = sum((Form.variable(dim, k[v]) ** 2 for v in ("c[1,2]", "c[1,3]", "c[2,3]")),
             Form.zero(dim, 2))
    assert gens["p1"] == p1
    assert gens["z"].degree == 9
    assert gens["r0[0]"] == sum((Form.variable(dim, k["c[%d]" % i]) for i in (1, 2, 3)),
                                Form.zero(dim, 1))


@pytest.mark.parametrize("n, degree, variant", [(3, 4, DEFAULT), (3, 4, PAPER_LITERAL),
                                                (3, 6, DEFAULT), (4, 4, DEFAULT)])
def test_generators_evaluate_to_fingerprint(n, degree, variant):
    """The symbolic polynomials and the numeric evaluator are independent code paths."""
    gens = emit_generators(n, degree, variant)
    for c in random_points(n, degree // 2, 2, 77):
        vals = [f.evaluate(c.vector()) for _, f in gens]
        assert vals == fingerprint(c, variant).values()


def test_variant_names():
    assert DEFAULT.name == "default"
    assert PAPER_LITERAL.name == "paper-literal"
    for name in ("default", "paper-literal", "paper-literal-u", "paper-literal-d"):
        assert InvariantVariant.from_name(name).name == name
    with pytest.raises(ValueError):
        InvariantVariant.from_name("nope")
