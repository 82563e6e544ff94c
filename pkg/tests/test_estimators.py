from __future__ import absolute_import, print_function

import math

import numpy as np
import pytest

from affdim.dimension import affinity_dim, kaenmaki_weights, lq_exponent
from affdim.errors import InputError, ResourceError
from affdim.estimators import DIVERGING, INCONCLUSIVE, STABLE
from affdim.estimators.diagnostic import angle_grid, r_diagnostic
from affdim.estimators.energy import (
    classify, energy_mc, sample_paths, sample_points)
from affdim.estimators.grid import (
    check_deltas, geometric_deltas, lq_spectrum, moment_sum, rasterize)
from affdim.fixtures import get_fixture
from affdim.weights import BernoulliWeights

CANTOR = math.log(2) / math.log(3)
# E|x - y|^-1 for x, y uniform on the unit square
SQUARE_ENERGY = 4 * math.log(1 + math.sqrt(2)) + \
    4.0 / 3 * (1 - math.sqrt(2))


def system(name):
    return get_fixture(name).system()


def uniform(n):
    return BernoulliWeights([1.0 / n] * n)


def positive_pair_kaenmaki(k=18):
    ifs = system('positive-pair')
    d = affinity_dim(ifs, k=k).value
    return ifs, d, kaenmaki_weights(ifs, d, 1)


# --- box counting


def test_rasterize_lebesgue():
    grid = rasterize(system('lebesgue-square'), uniform(4), 0.25)
    assert grid.occupied == 16
    assert not grid.capped
    assert grid.depth == 2
    assert np.allclose(grid.masses, 1.0 / 16, rtol=0, atol=1e-15)
    # one square per cylinder, laid out as a 4x4 block
    cells = grid.cells - grid.cells.min(axis=0)
    assert sorted(map(tuple, cells.tolist())) == \
        [(i, j) for i in range(4) for j in range(4)]


def test_rasterize_cantor():
    grid = rasterize(system('cantor-corners'), uniform(2), 1.0 / 9)
    assert grid.occupied == 4
    assert np.allclose(grid.masses, 0.25, rtol=0, atol=1e-15)
    assert grid.total() == pytest.approx(1.0, abs=1e-12)


def test_rasterize_conserves_mass():
    ifs, _, weights = positive_pair_kaenmaki(k=10)
    for delta in (1e-2, 1e-3):
        grid = rasterize(ifs, weights, delta)
        assert grid.total() == pytest.approx(1.0, abs=1e-12)
        assert np.all(grid.masses > 0.0)
        assert sum(grid.as_dict().values()) == pytest.approx(1.0)


def test_rasterize_independent_of_workers():
    ifs = system('positive-pair')
    weights = BernoulliWeights([0.52, 0.48])
    serial = rasterize(ifs, weights, 1e-3, processes=1)
    pooled = rasterize(ifs, weights, 1e-3, processes=2)
    assert np.array_equal(serial.cells, pooled.cells)
    assert np.array_equal(serial.masses, pooled.masses)


def test_rasterize_rejects():
    with pytest.raises(InputError):
        rasterize(system('cantor-corners'), uniform(2), 0.0)
    with pytest.raises(ResourceError):
        rasterize(system('lebesgue-square'), uniform(4), 1.0 / 64, limit=64)
    with pytest.raises(InputError):
        rasterize(system('cantor-corners'), uniform(3), 0.1)


def test_lebesgue_spectrum_is_flat():
    spectrum = lq_spectrum(system('lebesgue-square'), uniform(4),
                           [0.0, 1.0, 2.0, 3.0],
                           geometric_deltas(0.25, 0.5, 6))
    assert spectrum.used == [False] + [True] * 5
    for q in spectrum.qs:
        assert spectrum.slope(q) == pytest.approx(2.0, abs=1e-9)
    assert min(spectrum.r_squared) == pytest.approx(1.0, abs=1e-9)


def test_cantor_spectrum_is_flat():
    spectrum = lq_spectrum(system('cantor-corners'), uniform(2),
                           [0.0, 1.0, 2.0, 5.0],
                           geometric_deltas(1.0 / 3, 1.0 / 3, 6))
    for slope in spectrum.slopes:
        assert slope == pytest.approx(CANTOR, abs=1e-9)
    # q = 0 counts occupied squares
    assert spectrum.moments[0] == [2.0 ** n for n in range(1, 7)]


def test_moment_sums_log_convex_in_q():
    grid = rasterize(system('positive-pair'), BernoulliWeights([0.52, 0.48]),
                     1e-3)
    qs = np.linspace(0.0, 4.0, 17)
    logs = np.log([moment_sum(grid, q) for q in qs])
    assert np.all(np.diff(logs, 2) >= -1e-12)
    with pytest.raises(InputError):
        moment_sum(grid, -1.0)


@pytest.mark.parametrize("deltas", [
    [0.5, 0.25, 0.125],
    [0.5, 0.25, 0.125, 0.125],
    [0.5, 0.25, 0.125, 0.0],
    [0.5, 0.25, 0.1, 0.05],
])
def test_check_deltas_rejects(deltas):
    with pytest.raises(InputError):
        check_deltas(deltas)


def test_lq_spectrum_rejects():
    ifs = system('cantor-corners')
    deltas = geometric_deltas(1.0 / 3, 1.0 / 3, 5)
    with pytest.raises(InputError):
        lq_spectrum(ifs, uniform(2), [9.0], deltas)
    with pytest.raises(InputError):
        lq_spectrum(ifs, uniform(2), [], deltas)


def positive_triple_kaenmaki():
    ifs = system('positive-triple')
    d = affinity_dim(ifs, k=12).value
    return ifs, d, kaenmaki_weights(ifs, d, 1)


@pytest.mark.parametrize("q", [0.0, 1.0, 2.0])
def test_box_counting_recovers_affinity_dim(q):
    ifs, d, weights = positive_triple_kaenmaki()
    deltas = geometric_deltas(2.0 ** -5, 0.5, 7)
    assert deltas[-1] == 2.0 ** -11
    spectrum = lq_spectrum(ifs, weights, [q], deltas)
    assert abs(spectrum.slopes[0] - d) <= 0.05
    assert spectrum.r_squared[0] >= 0.995


def test_box_counting_recovers_bernoulli_exponent():
    ifs = system('positive-triple')
    weights = BernoulliWeights([0.4, 0.3, 0.3])
    dq = lq_exponent(ifs, weights, 2.0, k=12).value
    spectrum = lq_spectrum(ifs, weights, [2.0],
                           geometric_deltas(2.0 ** -5, 0.5, 7))
    assert abs(spectrum.slope(2.0) - dq) <= 0.05
    assert spectrum.r_squared[0] >= 0.995


# --- energies


def test_energy_of_the_square():
    report = energy_mc(system('lebesgue-square'), uniform(4), 1.0, 2.0,
                       256, 256, seed=1)
    assert [step.n_outer for step in report.schedule] == \
        [256, 512, 1024, 2048, 4096]
    assert report.estimate == pytest.approx(SQUARE_ENERGY, rel=0.05)
    assert report.stability == STABLE
    assert report.rejection_rate < 0.01


def test_energy_diverges_above_dimension():
    report = energy_mc(system('cantor-corners'), uniform(2), CANTOR + 0.5,
                       2.0, 256, 256, seed=2)
    estimates = [step.estimate for step in report.schedule]
    assert estimates[-1] > estimates[0]
    assert report.stability == DIVERGING


def test_energy_diverges_just_above_dimension():
    report = energy_mc(system('cantor-corners'), uniform(2), CANTOR + 0.2,
                       2.0, 128, 128, seed=3)
    assert report.stability == DIVERGING


@pytest.mark.parametrize("offset, n, expected", [
    (-0.1, 256, STABLE),
    (0.2, 128, DIVERGING),
])
def test_energy_around_affinity_dim(offset, n, expected):
    ifs, d, weights = positive_pair_kaenmaki()
    report = energy_mc(ifs, weights, d + offset, 2.0, n, n, seed=5)
    assert report.stability == expected


def test_coincident_samples_are_redrawn():
    # a floor of 1/4 stops every path at the first level, so the samples
    # take only four values
    report = energy_mc(system('lebesgue-square'), uniform(4), 1.0, 2.0,
                       16, 16, doublings=0, truncation=64.0)
    assert report.rejected > 0
    assert 0 <= report.excluded <= report.rejected
    assert report.rejection_rate == report.rejected / 256.0
    # distinct first-level points are 1/2 or sqrt(2)/2 apart
    assert math.sqrt(2.0) - 1e-12 <= report.estimate <= 2.0 + 1e-12

def test_energy_of_a_flat_kernel():
    report = energy_mc(system('positive-pair'), BernoulliWeights([0.52, 0.48]),
                       0.001, 2.0, 128, 128, doublings=2)
    assert report.estimate == pytest.approx(1.0, abs=0.05)
    assert report.stability == STABLE


def test_sampling_is_reproducible():
    ifs = system('positive-pair')
    weights = BernoulliWeights([0.52, 0.48])
    first = sample_points(ifs, weights, 3000, seed=9)
    assert first.shape == (3000, 2)
    assert np.array_equal(first, sample_points(ifs, weights, 3000, seed=9))
    assert np.array_equal(first, sample_points(ifs, weights, 3000, seed=9,
                                               processes=2))
    assert not np.array_equal(first, sample_points(ifs, weights, 3000,
                                                   seed=10))
    # a longer draw extends a shorter one
    assert np.array_equal(first[:1024],
                          sample_points(ifs, weights, 1024, seed=9))


def test_sample_paths_share_their_walks():
    ifs = system('positive-pair')
    weights = BernoulliWeights([0.52, 0.48])
    paths = sample_paths(ifs, weights, 500, [1e-3, 1e-6], seed=3)
    assert paths.shape == (2, 500, 2)
    # the walks run until the lowest floor whichever floors are asked for
    assert np.array_equal(paths[1],
                          sample_points(ifs, weights, 500, floor=1e-6, seed=3))
    with pytest.raises(InputError):
        sample_paths(ifs, weights, 10, [0.0])
    with pytest.raises(InputError):
        sample_paths(ifs, weights, 10, [])


def test_energy_independent_of_workers():
    ifs = system('cantor-corners')
    serial = energy_mc(ifs, uniform(2), 0.5, 2.0, 64, 64, seed=4,
                       doublings=2, processes=1)
    pooled = energy_mc(ifs, uniform(2), 0.5, 2.0, 64, 64, seed=4,
                       doublings=2, processes=2)
    assert serial == pooled


@pytest.mark.parametrize("estimates, expected", [
    ([1.0], INCONCLUSIVE),
    ([1.0, 1.02], STABLE),
    ([1.0, 2.0, 4.0, 8.0], DIVERGING),
    ([2.0, 1.0, 1.5], INCONCLUSIVE),
    ([1.0, 1.1, 1.21], INCONCLUSIVE),
])
def test_classify(estimates, expected):
    assert classify(estimates) == expected


@pytest.mark.parametrize("s, q, n_outer", [
    (0.0, 2.0, 16), (2.0, 2.0, 16), (1.0, 1.5, 16), (1.0, 2.0, 0),
])
def test_energy_rejects(s, q, n_outer):
    with pytest.raises(InputError):
        energy_mc(system('cantor-corners'), uniform(2), s, q, n_outer, 16)


def test_energy_rejects_truncation_and_weights():
    with pytest.raises(InputError):
        energy_mc(system('cantor-corners'), uniform(2), 0.5, 2.0, 16, 16,
                  truncation=0.0)
    with pytest.raises(InputError):
        energy_mc(system('cantor-corners'), uniform(4), 0.5, 2.0, 16, 16)


# --- angular series


def test_r_curve_of_similarities():
    curve = r_diagnostic(system('similarity-thirds'), uniform(2), 0.5, 2.0,
                         8, n_angles=32)
    assert curve.depth == 8
    assert len(curve.angles) == 32
    # every level adds (sqrt(3)/2)^n whatever the direction
    expected = np.cumsum((math.sqrt(3) / 2) ** np.arange(9))
    for j in range(32):
        assert np.allclose(curve.partial[:, j], expected, rtol=1e-12, atol=0)


def dust_pair_kaenmaki():
    ifs = system('dust-pair')
    d = affinity_dim(ifs, k=12).value
    return ifs, d, kaenmaki_weights(ifs, d, 1)


def test_r_curve_saturates_below_dimension():
    ifs, d, weights = dust_pair_kaenmaki()
    curve = r_diagnostic(ifs, weights, d - 0.05, 2.0, 12)
    assert curve.saturated()
    assert np.all(np.diff(curve.max_curve()) > 0.0)


def test_r_partial_sums_never_decrease():
    ifs, d, weights = positive_pair_kaenmaki(k=14)
    for s in (0.1, d, d + 0.2):
        curve = r_diagnostic(ifs, weights, s, 2.0, 8)
        assert np.all(np.diff(curve.partial, axis=0) >= 0.0)


def test_r_curve_grows_above_dimension():
    ifs, d, weights = dust_pair_kaenmaki()
    curve = r_diagnostic(ifs, weights, d + 0.2, 2.0, 12)
    assert not curve.saturated()
    assert curve.increments()[-1] > 0.05


def test_r_diagnostic_rejects():
    with pytest.raises(InputError):
        r_diagnostic(system('cantor-corners'), uniform(2), 0.5, 2.0, 4,
                     n_angles=8)
    with pytest.raises(InputError):
        r_diagnostic(system('cantor-corners'), uniform(2), 0.5, 2.0, -1)


def test_angle_grid():
    angles = angle_grid(16)
    assert angles[-1] == pytest.approx(math.pi / 2)
    assert angles[0] > -math.pi / 2
    assert np.allclose(np.diff(angles), math.pi / 16)
