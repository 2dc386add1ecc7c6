import random

import pytest

from flbreuil.errors import DegreeOverflow, NotInFil
from flbreuil.pd import (
    PDElement,
    embed_sigma,
    eval_f0,
    eval_fpi,
    fil_valuation,
    in_u_power_ideal,
    n_S,
    pd_from_scalar,
    pd_gamma,
    pd_inverse,
    pd_one,
    pd_random,
    pd_random_calibrated,
    phi_S,
    to_u_divided,
)
from flbreuil.campaign import easylemma_holds


def ints(x, n=6):
    return [c.coeffs[0] for c in x.coeffs[:n]]


def as_signed(x, n=6):
    out = []
    for c in x.coeffs[:n]:
        v = c.coeffs[0]
        mod = c.ring.pk[c.prec]
        out.append(v - mod if v > mod // 2 else v)
    return out


# --- multiplication ---

def test_gamma_product_binomials(amb3):
    g1, g2, g3 = (pd_gamma(amb3, i) for i in (1, 2, 3))
    assert ints(g1 * g1) == [0, 0, 2, 0, 0, 0]
    assert ints(g2 * g3)[5] == 10
    x = pd_random(amb3, random.Random(0), 6)
    assert (pd_one(amb3) * x).eq_at(x, x.prec)


def test_gamma_truncation_flags_dirty(amb3):
    top = pd_gamma(amb3, amb3.N_gamma - 1)
    prod = top * pd_gamma(amb3, 2)
    assert prod.tail_dirty
    assert prod.is_zero_at(prod.prec)
    clean = pd_gamma(amb3, 1) * pd_gamma(amb3, 2)
    assert not clean.tail_dirty


# --- the embedding of the series ring ---

def test_embed_examples(amb3):
    # p = 3, a = -1, E = u - 3
    assert ints(embed_sigma(amb3.useries([0, 1]))) == [3, 1, 0, 0, 0, 0]
    assert ints(embed_sigma(amb3.useries([0, 0, 1]))) == [9, 6, 2, 0, 0, 0]
    assert ints(embed_sigma(amb3.useries([1]))) == [1, 0, 0, 0, 0, 0]


def test_embed_is_ring_map(amb3):
    rng = random.Random(3)
    for _ in range(20):
        f = amb3.useries([rng.randrange(81) for _ in range(5)])
        g = amb3.useries([rng.randrange(81) for _ in range(5)])
        lhs = embed_sigma(f * g)
        rhs = embed_sigma(f) * embed_sigma(g)
        assert lhs.eq_at(rhs, lhs.prec)


def test_embed_degree_overflow(amb3):
    from flbreuil.series import series_monomial

    with pytest.raises(DegreeOverflow):
        embed_sigma(series_monomial(amb3, amb3.N_gamma))


# --- Frobenius ---

def test_phi_examples(amb3):
    assert ints(phi_S(pd_gamma(amb3, 0))) == [1, 0, 0, 0, 0, 0]
    assert ints(phi_S(pd_gamma(amb3, 1))) == [24, 27, 18, 6, 0, 0]
    assert ints(phi_S(pd_gamma(amb3, 1), 1)) == [8, 9, 6, 2, 0, 0]


def test_phi_c_consistency(amb3):
    # phi(E) = p*c and phi_1(E) = c
    assert phi_S(pd_gamma(amb3, 1), 1).eq_at(amb3.c, amb3.cap)


def test_phi_needs_filtration(amb3):
    with pytest.raises(NotInFil):
        phi_S(pd_one(amb3), 1)
    with pytest.raises(NotInFil):
        phi_S(pd_gamma(amb3, 2), amb3.r + 1)


def test_phi_multiplicative(amb3):
    rng = random.Random(4)
    for _ in range(60):
        x = pd_random_calibrated(amb3, rng, 5, 2)
        y = pd_random_calibrated(amb3, rng, 5, 2)
        assert phi_S(x * y).eq_at(phi_S(x) * phi_S(y), amb3.N_p, skip_dirty_top=True)


# --- the derivation ---

def test_n_examples(amb3):
    assert ints(n_S(pd_gamma(amb3, 0))) == [0, 0, 0, 0, 0, 0]
    assert as_signed(n_S(pd_gamma(amb3, 2)), 4) == [0, -3, -2, 0]
    u = embed_sigma(amb3.useries([0, 1]))
    assert (n_S(u) + u).is_zero_at(amb3.cap)


def test_n_leibniz(amb3):
    rng = random.Random(5)
    for _ in range(60):
        x = pd_random_calibrated(amb3, rng, 6, 2)
        y = pd_random_calibrated(amb3, rng, 6, 2)
        lhs = n_S(x * y)
        rhs = n_S(x) * y + x * n_S(y)
        assert lhs.eq_at(rhs, amb3.N_p, skip_dirty_top=True)


def test_n_phi_commutation(amb3):
    # N phi = p phi N, valid termwise on positive gamma indices
    for i in range(1, 6):
        g = pd_gamma(amb3, i)
        assert n_S(phi_S(g)).eq_at(phi_S(n_S(g)).mul_p_pow(1), amb3.N_p,
                                   skip_dirty_top=True)


# --- filtration ---

def test_fil_valuation_examples(amb3):
    assert fil_valuation(pd_gamma(amb3, 2, amb3.w(2))) == 2
    x = pd_gamma(amb3, 2) + pd_from_scalar(amb3, amb3.w(3))
    assert fil_valuation(x) == 0
    assert fil_valuation(PDElement(amb3, [])) == amb3.N_gamma


def test_fil_multiplicative(amb3):
    rng = random.Random(6)
    for _ in range(60):
        x = pd_random_calibrated(amb3, rng, 6, 2)
        y = pd_random_calibrated(amb3, rng, 6, 2)
        vx, vy = fil_valuation(x, amb3.N_p), fil_valuation(y, amb3.N_p)
        v = fil_valuation(x * y, amb3.N_p)
        assert v >= min(vx + vy, amb3.N_gamma)
    # equality with unit leading coefficients
    x = pd_gamma(amb3, 2, amb3.w(2)) + pd_gamma(amb3, 4)
    y = pd_gamma(amb3, 1, amb3.w(4))
    assert fil_valuation(x * y, amb3.N_p) == 3


# --- evaluations ---

def test_f0_examples(amb3):
    assert eval_f0(pd_gamma(amb3, 0)).coeffs[0] == 1
    assert as_signed(pd_from_scalar(amb3, eval_f0(pd_gamma(amb3, 1))), 1) == [-3]
    assert eval_f0(embed_sigma(amb3.useries([0, 1]))).is_zero_at(amb3.cap)


def test_fpi_examples(amb3):
    assert eval_fpi(pd_gamma(amb3, 0)).coeffs[0] == 1
    for i in range(1, 4):
        assert eval_fpi(pd_gamma(amb3, i)).is_zero_at(amb3.cap)
    assert eval_fpi(embed_sigma(amb3.useries([0, 1]))).coeffs[0] == 3  # pi = 3


def test_f0_intertwines_phi(amb3, amb9):
    for amb in (amb3, amb9):
        rng = random.Random(7)
        for _ in range(40):
            x = pd_random(amb, rng, 7)
            assert eval_f0(phi_S(x)).eq_at(eval_f0(x).frobenius(), amb.N_p)


def test_fpi_of_embedding_evaluates_at_pi(amb3):
    rng = random.Random(8)
    for _ in range(30):
        s = amb3.useries([rng.randrange(3**8) for _ in range(5)])
        acc = amb3.ring.zero()
        power = amb3.ring.one()
        for i in range(5):
            acc = acc + s.coeff(i) * power
            power = power * amb3.neg_pa
        assert eval_fpi(embed_sigma(s)).eq_at(acc, amb3.N_p)


# --- the one-step filtration descent ---

def test_easylemma_positive_and_witness(amb3):
    rng = random.Random(9)
    for i in range(1, amb3.r):
        for _ in range(30):
            body = pd_random_calibrated(amb3, rng, 8, 2)
            s = PDElement(amb3, [amb3.ring.zero()] * (i + 1) + list(body.coeffs[:8]))
            assert easylemma_holds(amb3, s, i)
        g = pd_gamma(amb3, i)
        assert fil_valuation(n_S(g), amb3.N_p) == i - 1  # hypothesis visibly fails


def test_easylemma_precision_boundary(amb3):
    # s = p^(N_p - 1) gamma_1: the hypothesis holds at N_p, the conclusion
    # only one digit lower; the at-precision form of the statement loses
    # exactly one digit at the boundary.
    s = pd_gamma(amb3, 1, amb3.w(3 ** (amb3.N_p - 1)))
    assert fil_valuation(s, amb3.N_p) >= 1
    assert fil_valuation(n_S(s), amb3.N_p) >= 1
    assert fil_valuation(s, amb3.N_p) == 1
    assert fil_valuation(s, amb3.N_p - 1) >= 2


# --- u-divided coordinates and ideal membership ---

def test_u_divided_of_embedding(amb3):
    import math

    rng = random.Random(10)
    s = amb3.useries([rng.randrange(3**8) for _ in range(5)])
    coords = to_u_divided(embed_sigma(s))
    for i in range(5):
        assert coords[i].eq_at(s.coeff(i) * amb3.w(math.factorial(i)), amb3.N_p)
    for i in range(5, 9):
        assert coords[i].is_zero_at(amb3.N_p)


def test_u_power_ideal_membership(amb3):
    p = amb3.p
    up = embed_sigma(amb3.useries([0] * p + [1]))
    assert in_u_power_ideal(up, p)
    assert not in_u_power_ideal(pd_one(amb3), p)
    assert not in_u_power_ideal(embed_sigma(amb3.useries([0] * (p - 1) + [1])), p)
    rng = random.Random(11)
    for _ in range(20):
        x = pd_random_calibrated(amb3, rng, 6, 1)
        assert in_u_power_ideal(up * x, p)
    # u^p = p*(c - sigma(a)) lies in the ideal by construction
    diff = (amb3.c - pd_from_scalar(amb3, amb3.sigma_a)).mul_p_pow(1)
    assert in_u_power_ideal(diff, p)


def test_pd_inverse(amb3):
    rng = random.Random(12)
    one = pd_one(amb3)
    for _ in range(20):
        x = pd_random_calibrated(amb3, rng, 5, 1) + one
        if not x.is_unit():
            continue
        assert (x * pd_inverse(x)).eq_at(one, x.prec, skip_dirty_top=True)
