from __future__ import absolute_import, print_function

import math

import numpy as np
import pytest

from affdim.dimension import (
    DimensionEstimate, affinity_dim, bernoulli_weights, bisect,
    default_depth, kaenmaki_weights, lq_exponent, pressure, pressure_curve,
    quasi_bernoulli_constant)
from affdim.errors import InputError
from affdim.fixtures import get_fixture
from affdim.ifs import IfsSystem, level_table
from affdim.weights import BernoulliWeights, KaenmakiApprox

CANTOR = math.log(2) / math.log(3)


def system(name):
    return get_fixture(name).system()


@pytest.mark.parametrize("n_symbols, expected", [
    (2, 12), (3, 12), (4, 8), (6, 8), (7, 7), (10, 6),
])
def test_default_depth(n_symbols, expected):
    assert default_depth(n_symbols) == expected


def test_bisect():
    root = bisect(lambda x: x * x - 2.0, 0.0, 2.0, 1e-12, increasing=True)
    assert root == pytest.approx(math.sqrt(2.0), abs=1e-12)
    with pytest.raises(InputError):
        bisect(lambda x: x, -1.0, 1.0, 0.0, increasing=True)


@pytest.mark.parametrize("name, expected", [
    ('similarity-thirds', CANTOR),
    ('cantor-corners', CANTOR),
    ('diagonal-pair', 1.0),
    ('lebesgue-square', 2.0),
])
def test_affinity_dim_closed_forms(name, expected):
    estimate = affinity_dim(system(name), k=12 if name != 'lebesgue-square'
                            else 8)
    assert estimate.value == pytest.approx(expected, abs=1e-6)
    assert estimate.lower <= estimate.upper == estimate.value


def test_affinity_dim_positive_pair():
    estimate = affinity_dim(system('positive-pair'), k=14)
    # the first-level root of sum alpha1^s = 1 bounds it from above
    assert 0.3 < estimate.value < 0.4975
    assert estimate.lower <= estimate.value


def test_affinity_dim_rejects():
    with pytest.raises(InputError):
        affinity_dim(system('positive-pair'), k=0)
    with pytest.raises(InputError):
        affinity_dim(system('positive-pair'), tol=0.0)


def test_pressure():
    ifs = system('positive-pair')
    curve = pressure_curve(ifs, [0.0, 0.25, 0.5, 1.0, 1.5, 2.0], 8)
    values = [p for _, p in curve]
    assert values[0] == pytest.approx(math.log(2))
    assert all(a > b for a, b in zip(values, values[1:]))
    assert pressure(ifs, 0.5, 8) == values[2]
    with pytest.raises(InputError):
        pressure(ifs, 2.5, 8)


@pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
def test_lq_exponent_uniform_similarities(q):
    ifs = system('similarity-thirds')
    estimate = lq_exponent(ifs, bernoulli_weights([0.5, 0.5]), q, k=12)
    assert estimate.value == pytest.approx(CANTOR, abs=1e-3)
    assert estimate.lower <= estimate.value <= estimate.upper


def test_lq_exponent_biased_similarities():
    ifs = system('similarity-thirds')
    estimate = lq_exponent(ifs, bernoulli_weights([0.7, 0.3]), 2.0, k=12)
    assert estimate.value == pytest.approx(
        math.log(0.58) / math.log(1.0 / 3), abs=1e-4)


@pytest.mark.parametrize("name", ['positive-pair', 'similarity-thirds',
                                  'diagonal-pair'])
@pytest.mark.parametrize("q", [2.0, 4.0, 6.0])
def test_kaenmaki_moment_exponent_equals_affinity_dim(name, q):
    ifs = system(name)
    d = affinity_dim(ifs, k=12)
    weights = kaenmaki_weights(ifs, d.value, d.depth)
    assert isinstance(weights, KaenmakiApprox)
    estimate = lq_exponent(ifs, weights, q, k=12)
    assert estimate.value == pytest.approx(d.value, abs=2e-6)


def test_moment_exponent_below_affinity_dim():
    ifs = system('positive-pair')
    d = affinity_dim(ifs, k=12).value
    d2 = lq_exponent(ifs, bernoulli_weights([0.52, 0.48]), 2.0, k=12).value
    assert 0.0 < d2 <= d + 1e-6


def test_lq_exponent_rejects():
    ifs = system('positive-pair')
    with pytest.raises(InputError):
        lq_exponent(ifs, bernoulli_weights([0.5, 0.5]), 1.0)


@pytest.mark.parametrize("p", [[0.5, 0.6], [1.0, 0.0], [], [-0.5, 1.5]])
def test_bernoulli_weights_reject(p):
    with pytest.raises(InputError):
        BernoulliWeights(p)


def test_level_masses_sum_to_one():
    ifs = system('positive-pair')
    table = level_table(ifs, 9)
    for weights in (bernoulli_weights([0.52, 0.48]),
                    kaenmaki_weights(ifs, 0.45, 9)):
        masses = weights.level_masses(table)
        assert math.fsum(masses) == pytest.approx(1.0, abs=1e-12)
        assert masses[5] == pytest.approx(weights.mass(
            [int(c) for c in np.binary_repr(5, 9)]), rel=1e-10)


def test_quasi_bernoulli_constant():
    ifs = system('positive-pair')
    assert quasi_bernoulli_constant(bernoulli_weights([0.52, 0.48]), 8) == 1.0
    constant = quasi_bernoulli_constant(kaenmaki_weights(ifs, 0.45, 8), 8,
                                        samples=300)
    assert 1.0 <= constant < 10.0


def test_quasi_bernoulli_constant_settles():
    ifs = system('positive-pair')
    shallow = quasi_bernoulli_constant(kaenmaki_weights(ifs, 0.45, 8), 8)
    deep = quasi_bernoulli_constant(kaenmaki_weights(ifs, 0.45, 12), 12)
    assert abs(math.log(deep) - math.log(shallow)) < math.log(1.5)


def test_bernoulli_weights_must_match_system():
    ifs = system('positive-pair')
    weights = bernoulli_weights([0.2, 0.3, 0.5])
    with pytest.raises(InputError):
        weights.check_system(ifs)
    with pytest.raises(InputError):
        weights.log_level_masses(level_table(ifs, 3))
    with pytest.raises(InputError):
        lq_exponent(ifs, weights, 2.0, k=6)
    bernoulli_weights([0.52, 0.48]).check_system(ifs)


def test_kaenmaki_weights_must_match_system():
    ifs = system('positive-pair')
    weights = kaenmaki_weights(ifs, 0.45, 6)
    weights.check_system(ifs)
    weights.check_system(get_fixture('positive-pair').system())
    # same linear parts, other translations
    weights.check_system(IfsSystem.from_entries(
        [m.matrix for m in ifs], [[0.0, 0.0], [0.5, 0.5]]))
    for other in (system('cantor-corners'), system('positive-triple')):
        with pytest.raises(InputError):
            weights.check_system(other)
        with pytest.raises(InputError):
            lq_exponent(other, weights, 2.0, k=6)
    with pytest.raises(InputError):
        weights.log_level_masses(level_table(system('positive-triple'), 2))


def test_dimension_estimate_record():
    estimate = DimensionEstimate(0.5, 10, (0.4, 0.5), 1e-6, True)
    assert (estimate.lower, estimate.upper) == (0.4, 0.5)
