from __future__ import absolute_import, print_function

import math

import numpy as np
import pytest

from affdim.errors import DomainError, InputError, ResourceError
from affdim.fixtures import get_fixture
from affdim.ifs import (
    HALF_PI, AffineMap, Angle, IfsSystem, canonical_angle, check_budget,
    compose, contraction_at_angle, cylinder_point, index_of_word,
    invariant_ball, iter_tables, level_table, singular_values, svf,
    word_from_index)


def system(name):
    return get_fixture(name).system()


def random_word(rng, n_symbols, length):
    return tuple(int(x) for x in rng.integers(0, n_symbols, length))


def test_singular_values_match_svd():
    rng = np.random.default_rng(1)
    for _ in range(200):
        m = rng.uniform(-1.0, 1.0, (2, 2))
        if abs(np.linalg.det(m)) < 1e-3:
            continue
        pair = singular_values(m)
        expected = np.linalg.svd(m, compute_uv=False)
        assert pair.alpha1 == pytest.approx(expected[0], rel=1e-12)
        assert pair.alpha2 == pytest.approx(expected[1], rel=1e-9)
        assert pair.alpha1 * pair.alpha2 == pytest.approx(
            abs(np.linalg.det(m)), rel=1e-12)
        assert -HALF_PI < pair.major_axis_angle <= HALF_PI


def test_singular_values_reject_singular():
    with pytest.raises(DomainError):
        singular_values([[1.0, 2.0], [0.5, 1.0]])


@pytest.mark.parametrize("theta, expected", [
    (0.0, 0.0),
    (HALF_PI, HALF_PI),
    (-HALF_PI, HALF_PI),
    (math.pi, 0.0),
    (0.75 * math.pi, -0.25 * math.pi),
])
def test_canonical_angle(theta, expected):
    assert canonical_angle(theta) == pytest.approx(expected, abs=1e-15)
    assert Angle(theta).theta == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("linear", [
    [[0.5, 1.0], [0.25, 0.5]],     # singular
    [[1.2, 0.0], [0.0, 0.1]],      # expanding
])
def test_affine_map_rejects(linear):
    with pytest.raises(DomainError):
        AffineMap(linear, [0.0, 0.0])


def test_empty_system():
    with pytest.raises(InputError):
        IfsSystem([])


def test_compose_order():
    ifs = system('positive-pair')
    x = np.array([0.3, -0.2])
    composed = compose(ifs, [0, 1, 1])
    expected = ifs[0](ifs[1](ifs[1](x)))
    assert np.allclose(composed(x), expected, rtol=0, atol=1e-15)


def test_compose_renormalizes_long_words():
    ifs = system('cantor-corners')
    composed = compose(ifs, [0] * 400)
    log_alpha1, log_alpha2 = composed.log_singular_values()
    assert log_alpha1 == pytest.approx(400 * math.log(1.0 / 3), rel=1e-12)
    assert log_alpha2 == pytest.approx(400 * math.log(1.0 / 3), rel=1e-12)


def test_check_word():
    ifs = system('positive-pair')
    assert ifs.check_word([1, 0]) == (1, 0)
    with pytest.raises(InputError):
        ifs.check_word([0, 2])


def test_svf():
    ifs = system('diagonal-pair')
    assert svf(ifs, [0, 1], 0.5) == pytest.approx(0.25 ** 0.5)
    assert svf(ifs, [0, 1], 1.5) == pytest.approx(0.25 * 0.0625 ** 0.5)
    with pytest.raises(InputError):
        svf(ifs, [], 1.0)
    with pytest.raises(InputError):
        svf(ifs, [0], 2.5)


def test_multiplicativity_bounds():
    ifs = system('positive-pair')
    rng = np.random.default_rng(7)
    for _ in range(300):
        u = random_word(rng, 2, int(rng.integers(1, 8)))
        v = random_word(rng, 2, int(rng.integers(1, 8)))
        a_u = compose(ifs, u).singular_values()
        a_v = compose(ifs, v).singular_values()
        a_uv = compose(ifs, u + v).singular_values()
        assert a_uv.alpha1 <= a_u.alpha1 * a_v.alpha1 * (1 + 1e-12)
        assert a_uv.alpha2 >= a_u.alpha2 * a_v.alpha2 * (1 - 1e-12)
        for s in (0.3, 1.0, 1.7):
            assert svf(ifs, u + v, s) <= \
                svf(ifs, u, s) * svf(ifs, v, s) * (1 + 1e-12)


def test_contraction_sandwich_and_cocycle():
    ifs = system('positive-pair')
    rng = np.random.default_rng(11)
    for _ in range(10 ** 4):
        u = random_word(rng, 2, int(rng.integers(1, 6)))
        v = random_word(rng, 2, int(rng.integers(1, 6)))
        theta = float(rng.uniform(-HALF_PI, HALF_PI))
        pair = compose(ifs, u + v).singular_values()
        joint = contraction_at_angle(ifs, u + v, theta)
        assert pair.alpha2 * (1 - 1e-12) <= joint <= \
            pair.alpha1 * (1 + 1e-12)

        image = compose(ifs, v).matrix.dot(Angle(theta).unit)
        turned = math.atan2(image[1], image[0])
        split = contraction_at_angle(ifs, v, theta) * \
            contraction_at_angle(ifs, u, turned)
        assert joint == pytest.approx(split, rel=1e-10)


def test_contraction_extremes_on_singular_axes():
    ifs = system('positive-pair')
    rng = np.random.default_rng(13)
    for _ in range(50):
        word = random_word(rng, 2, int(rng.integers(1, 7)))
        m = compose(ifs, word)
        _, _, vt = np.linalg.svd(m.matrix)
        major = math.atan2(vt[0, 1], vt[0, 0])
        pair = m.singular_values()
        assert contraction_at_angle(ifs, word, major) == \
            pytest.approx(pair.alpha1, rel=1e-10)
        assert contraction_at_angle(ifs, word, major + HALF_PI) == \
            pytest.approx(pair.alpha2, rel=1e-10)


def test_invariant_ball_examples():
    half = [[0.5, 0.0], [0.0, 0.5]]
    ball = invariant_ball(IfsSystem.from_entries(
        [half, half], [[0.0, 0.0], [0.5, 0.5]]))
    assert ball.radius == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert invariant_ball(
        IfsSystem.from_entries([half], [[0.0, 0.0]])).radius == 0.0


def test_invariant_ball():
    ifs = system('positive-pair')
    ball = invariant_ball(ifs)
    assert np.all(ball.center == 0.0)
    for m in ifs:
        reach = np.linalg.norm(m(ball.center) - ball.center)
        assert reach + m.singular_values().alpha1 * ball.radius <= \
            ball.radius * (1 + 1e-12)


def test_cylinder_point():
    ifs = system('cantor-corners')
    assert np.allclose(cylinder_point(ifs, [1, 0]), [2.0 / 3, 2.0 / 3])
    with pytest.raises(InputError):
        cylinder_point(ifs, [])


def test_level_table_matches_compose():
    ifs = system('positive-pair')
    table = level_table(ifs, 4)
    assert table.length == 4
    assert len(table.log_alpha1) == 16
    for index in range(16):
        word = word_from_index(index, 2, 4)
        composed = compose(ifs, word)
        log_alpha1, log_alpha2 = composed.log_singular_values()
        assert table.log_alpha1[index] == pytest.approx(log_alpha1,
                                                        rel=1e-12)
        assert table.log_alpha2[index] == pytest.approx(log_alpha2,
                                                        rel=1e-12)
        assert np.allclose(table.translation[index], composed.translation,
                           rtol=0, atol=1e-13)


def test_level_table_independent_of_workers():
    ifs = system('positive-pair')
    serial = level_table(ifs, 8, processes=1)
    pooled = level_table(ifs, 8, processes=2)
    assert np.array_equal(serial.log_alpha1, pooled.log_alpha1)
    assert np.array_equal(serial.translation, pooled.translation)


def test_iter_tables():
    ifs = system('lebesgue-square')
    lengths = [(t.length, len(t.log_alpha1)) for t in iter_tables(ifs, 3)]
    assert lengths == [(0, 1), (1, 4), (2, 16), (3, 64)]


def test_budget():
    check_budget(2, 10, limit=1024)
    with pytest.raises(ResourceError):
        check_budget(2, 11, limit=1024)
    with pytest.raises(ResourceError):
        level_table(system('positive-pair'), 5, limit=16)


@pytest.mark.parametrize("word", [(), (0,), (1, 0, 2), (2, 2, 2, 1)])
def test_word_index(word):
    index = index_of_word(word, 3)
    assert word_from_index(index, 3, len(word)) == word
