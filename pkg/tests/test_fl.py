import random

import pytest

from flbreuil.errors import MalformedJumps, NotStrong
from flbreuil.fl import (
    FLModule,
    fl_classify,
    fl_transport,
    fl_v_matrix,
    fl_validate,
    random_fl,
    random_flag_preserving,
    random_unipotent_fl,
)
from flbreuil.matrix import RingMatrix, WittOps


def wmat(amb, rows):
    return RingMatrix(WittOps(amb), [[amb.w(v) for v in row] for row in rows])


def test_validate_examples(amb3):
    assert fl_validate(FLModule(amb3, 1, (1,), wmat(amb3, [[1]])))
    assert not fl_validate(FLModule(amb3, 1, (0,), wmat(amb3, [[3]])))
    assert fl_validate(FLModule(amb3, 2, (0, 2), wmat(amb3, [[0, 1], [1, 0]])))


def test_malformed_jumps(amb3):
    with pytest.raises(MalformedJumps):
        FLModule(amb3, 2, (2, 0), wmat(amb3, [[1, 0], [0, 1]]))
    with pytest.raises(MalformedJumps):
        FLModule(amb3, 1, (3,), wmat(amb3, [[1]]))


def test_v_matrix_examples(amb3):
    # rank 1, jump 1, r = 2: F = V = (p)
    F, V = fl_v_matrix(FLModule(amb3, 1, (1,), wmat(amb3, [[1]])))
    assert F.eq_at(wmat(amb3, [[3]]), amb3.cap) and V.eq_at(wmat(amb3, [[3]]), amb3.cap)
    F, V = fl_v_matrix(FLModule(amb3, 2, (0, 2), wmat(amb3, [[1, 0], [0, 1]])))
    assert F.eq_at(wmat(amb3, [[1, 0], [0, 9]]), amb3.cap)
    assert V.eq_at(wmat(amb3, [[9, 0], [0, 1]]), amb3.cap)
    F, V = fl_v_matrix(FLModule(amb3, 2, (0, 2), wmat(amb3, [[0, 1], [1, 0]])))
    assert V.eq_at(wmat(amb3, [[0, 9], [1, 0]]), amb3.cap)


def test_fv_is_p_to_r(amb3, amb5):
    for amb in (amb3, amb5):
        rng = random.Random(0)
        for _ in range(25):
            M = random_fl(amb, rng, rng.randrange(1, 4))
            F, V = fl_v_matrix(M)
            expect = RingMatrix.identity(F.ops, M.d).mul_p_pow(amb.r)
            assert (F @ V).eq_at(expect, amb.cap - amb.r)
            assert (V @ F).eq_at(expect, amb.cap - amb.r)


def test_v_matrix_needs_strong(amb3):
    with pytest.raises(NotStrong):
        fl_v_matrix(FLModule(amb3, 1, (0,), wmat(amb3, [[3]])))


def test_classify_examples(amb3):
    c = fl_classify(FLModule(amb3, 1, (amb3.r,), wmat(amb3, [[1]])))
    assert c.etale and not c.unipotent.zero
    c = fl_classify(FLModule(amb3, 1, (1,), wmat(amb3, [[1]])))
    assert not c.etale and c.unipotent.zero
    c = fl_classify(FLModule(amb3, 2, (0, amb3.r), wmat(amb3, [[0, 1], [1, 0]])))
    assert c.unipotent.zero and c.nilpotent.zero and not c.etale


def test_positional_exclusions(amb3):
    rng = random.Random(1)
    for _ in range(30):
        M = random_fl(amb3, rng, rng.randrange(1, 4))
        c = fl_classify(M)
        if c.etale:
            assert not c.unipotent.zero
        if c.multiplicative:
            assert not c.nilpotent.zero


def test_random_fl_is_strong(amb3):
    rng = random.Random(2)
    for _ in range(50):
        assert fl_validate(random_fl(amb3, rng, rng.randrange(1, 4)))


def test_random_unipotent_screen(amb3):
    rng = random.Random(3)
    for _ in range(10):
        M = random_unipotent_fl(amb3, rng, 2)
        assert fl_classify(M).unipotent.zero


def test_classification_invariant_under_flag_base_change(amb3):
    rng = random.Random(4)
    for _ in range(15):
        jumps = tuple(sorted(rng.randrange(amb3.r + 1) for _ in range(2)))
        M = random_fl(amb3, rng, 2, jumps)
        g = random_flag_preserving(amb3, rng, jumps)
        M2 = fl_transport(M, g)
        assert fl_validate(M2)
        c1, c2 = fl_classify(M), fl_classify(M2)
        assert c1.etale == c2.etale
        assert c1.multiplicative == c2.multiplicative
        assert c1.unipotent.zero == c2.unipotent.zero
        assert c1.nilpotent.zero == c2.nilpotent.zero
