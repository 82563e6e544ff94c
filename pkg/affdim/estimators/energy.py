"""
Monte Carlo estimates of the energy integrals

    I_s^q = E_y[ (E_x |x - y|^-s)^(q-1) ],   x, y ~ mu.

Points are drawn by walking down the word tree one symbol at a time, with the
children of each word weighted by the model, and a walk reports its cylinder
point once the mass of the cylinder drops to a floor.  Each step of the
doubling schedule has its own floor, ``truncation / (n_outer * n_inner)``,
so about `truncation` pairs per step share a cylinder and the kernel is cut
off at the scale of the cylinders that the samples can still tell apart.
That truncated energy settles as the floor sinks when s is below the
correlation dimension and keeps growing when it is above.  Finite energy for
some s bounds the lower moment dimension below by s, so the interesting
output is whether the estimates settle or keep growing as the samples double.
"""
from __future__ import absolute_import, print_function

import logging
import math

import numpy as np

from affdim.errors import InputError
from affdim.estimators import (
    DIVERGING, INCONCLUSIVE, STABLE, EnergyReport, EnergyStep)
from affdim.ifs import extend_arrays, invariant_ball, log_alphas
from affdim.parallel import ordered_map

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.ifs import IfsSystem
    from affdim.weights import WeightModel

_logger = logging.getLogger(__name__)

# expected number of sample pairs per step that share a cylinder
DEFAULT_TRUNCATION = 16.0
DEFAULT_FLOOR = 1e-12
SAMPLE_DEPTH_CAP = 64
# log-space allowance for path masses that equal a floor up to rounding
STOP_TOLERANCE = 1e-9
# points drawn per random stream
CHUNK = 1024
# distance entries per block of outer points
PAIR_BLOCK = 1 << 20
# replacement inner points available to every outer point
SPARES = 8
STABLE_CHANGE = 0.05
DIVERGING_GROWTH = 1.25
REJECTION_WARNING = 0.01

OUTER_POOL = 0
INNER_POOL = 1
REDRAW_POOL = 2


def _rng(seed, pool, chunk):
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(pool, chunk)))


def _sample_chunk(task):
    """Draw `count` paths for one (pool, chunk) random stream."""
    ifs, weights, log_floors, center, count, seed, pool, chunk = task
    rng = _rng(seed, pool, chunk)
    n = ifs.n_symbols
    linear = np.broadcast_to(np.eye(2), (count, 2, 2)).copy()
    log_scale = np.zeros(count)
    translation = np.zeros((count, 2))
    log_det = np.zeros(count)
    log_weight = np.zeros(count)
    points = np.empty((len(log_floors), count, 2))
    pending = np.ones((count, len(log_floors)), dtype=bool)
    active = np.arange(count)
    capped = 0
    for depth in range(1, SAMPLE_DEPTH_CAP + 1):
        m = len(active)
        c_linear, c_scale, c_translation, c_det = extend_arrays(
            ifs, linear[active], log_scale[active], translation[active],
            log_det[active])
        c_alpha1, c_alpha2 = log_alphas(c_linear, c_scale, c_det)
        c_weight = weights.child_log_weights(
            np.repeat(log_weight[active], n), np.tile(np.arange(n), m),
            c_alpha1, c_alpha2).reshape(m, n)
        c_weight = np.exp(c_weight - c_weight.max(axis=1)[:, None])
        cdf = np.cumsum(c_weight, axis=1)
        draws = rng.random(m) * cdf[:, -1]
        symbols = np.minimum((cdf <= draws[:, None]).sum(axis=1), n - 1)
        chosen = np.arange(m) * n + symbols

        linear[active] = c_linear[chosen]
        log_scale[active] = c_scale[chosen]
        translation[active] = c_translation[chosen]
        log_det[active] = c_det[chosen]
        log_weight[active] = np.log(c_weight[np.arange(m), symbols] /
                                    cdf[:, -1]) + log_weight[active]

        reached = pending[active] & (
            log_weight[active][:, None] <= log_floors[None, :] +
            STOP_TOLERANCE)
        if depth == SAMPLE_DEPTH_CAP:
            capped = int(pending[active].any(axis=1).sum())
            reached = pending[active]
        if reached.any():
            here = translation[active] + np.einsum(
                'wij,j->wi', linear[active], center) * \
                np.exp(log_scale[active])[:, None]
            rows, floors = np.nonzero(reached)
            points[floors, active[rows]] = here[rows]
            pending[active[rows], floors] = False
        active = active[pending[active].any(axis=1)]
        if not len(active):
            break
    return points, capped


def sample_paths(ifs, weights, count, floors, seed=0, pool=OUTER_POOL,
                 processes=None):
    # type: (IfsSystem, WeightModel, int, Sequence[float], int, int, Optional[int]) -> np.ndarray
    """
    Draw `count` paths down the word tree and record, for every mass floor,
    the cylinder point at which the path mass first drops to that floor.

    Each block of `CHUNK` paths comes from its own random stream keyed by
    ``(seed, pool, chunk)``, so the result does not depend on `processes`.

    Returns
    -------
    np.ndarray
        shape ``(len(floors), count, 2)``
    """
    if count < 1:
        raise InputError("sample size must be positive")
    floors = [float(x) for x in floors]
    if not floors or any(not 0.0 < x <= 1.0 for x in floors):
        raise InputError("mass floors must lie in (0, 1] (got %r)"
                         % (floors,))
    weights.check_system(ifs)
    log_floors = np.log(np.array(floors))
    center = invariant_ball(ifs).center
    tasks = []
    for chunk, start in enumerate(range(0, count, CHUNK)):
        tasks.append((ifs, weights, log_floors, center,
                      min(CHUNK, count - start), seed, pool, chunk))
    parts = ordered_map(_sample_chunk, tasks, processes=processes)
    capped = sum(part[1] for part in parts)
    if capped:
        _logger.warning("%d sample paths reached depth %d before the mass "
                        "floor %g", capped, SAMPLE_DEPTH_CAP, min(floors))
    return np.concatenate([part[0] for part in parts], axis=1)


def sample_points(ifs, weights, count, floor=DEFAULT_FLOOR, seed=0,
                  pool=OUTER_POOL, processes=None):
    # type: (IfsSystem, WeightModel, int, float, int, int, Optional[int]) -> np.ndarray
    """
    Draw `count` points distributed like the measure, each the point of a
    cylinder of mass at most `floor`.

    Returns
    -------
    np.ndarray
        shape ``(count, 2)``
    """
    return sample_paths(ifs, weights, count, [floor], seed, pool,
                        processes)[0]


def _row_terms(task):
    """
    Per outer point: the inner mean raised to q - 1, the number of inner
    points that coincided with it, and how many of those found no spare.

    Coincident inner points are swapped for the first spares that do not
    coincide with the outer point.
    """
    rows, inner, spares, s, q = task
    diff = rows[:, None, :] - inner[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    zero = dist == 0.0
    with np.errstate(divide='ignore'):
        kernel = np.where(zero, 0.0, dist ** -s)
    sums = kernel.sum(axis=1)
    rejected = zero.sum(axis=1)
    redrawn = np.zeros(len(rows), dtype=np.int64)
    if rejected.any():
        diff = rows[:, None, :] - spares[None, :, :]
        gap = np.hypot(diff[..., 0], diff[..., 1])
        usable = gap > 0.0
        take = usable & (np.cumsum(usable, axis=1) <= rejected[:, None])
        with np.errstate(divide='ignore'):
            sums += np.where(take, gap ** -s, 0.0).sum(axis=1)
        redrawn = take.sum(axis=1)
    excluded = rejected - redrawn
    kept = np.maximum(len(inner) - excluded, 1)
    return (sums / kept) ** (q - 1.0), rejected, excluded


def classify(estimates):
    # type: (Sequence[float]) -> str
    """
    `STABLE` when the last doubling changed the estimate by less than 5%;
    `DIVERGING` when the estimates end higher than they start and their
    fitted growth exceeds 25% per doubling; `INCONCLUSIVE` otherwise.
    """
    if len(estimates) < 2:
        return INCONCLUSIVE
    last, previous = estimates[-1], estimates[-2]
    if abs(last - previous) < STABLE_CHANGE * previous:
        return STABLE
    logs = np.log(np.array(estimates))
    steps = np.arange(len(estimates))
    growth = float(np.polyfit(steps, logs, 1)[0])
    if last > estimates[0] and growth > math.log(DIVERGING_GROWTH):
        return DIVERGING
    return INCONCLUSIVE


def energy_mc(ifs, weights, s, q, n_outer, n_inner, seed=0, doublings=4,
              truncation=DEFAULT_TRUNCATION, processes=None):
    # type: (IfsSystem, WeightModel, float, float, int, int, int, int, float, Optional[int]) -> EnergyReport
    """
    Nested Monte Carlo estimate of the energy integral on a doubling
    schedule.

    Step j uses the first ``n_outer * 2**j`` outer and ``n_inner * 2**j``
    inner paths of two fixed pools, read at the mass floor
    ``truncation / (n_outer * n_inner * 4**j)``.  An inner point that
    coincides with the outer point is rejected and replaced by a point from
    a third pool; rejections left without a replacement shrink that outer
    point's inner sample and are reported as excluded.

    Parameters
    ----------
    ifs : IfsSystem
    weights : WeightModel
    s : float
        in ``(0, 2)``
    q : float
        at least 2
    n_outer : int
    n_inner : int
    seed : int
    doublings : int
        the schedule has ``doublings + 1`` steps
    truncation : float
        expected number of coincident pairs per step
    processes : Optional[int]

    Returns
    -------
    EnergyReport
        the rejection counts are those of the last step
    """
    if not 0.0 < s < 2.0:
        raise InputError("energy exponent s = %r outside (0, 2)" % (s,))
    if not q >= 2.0:
        raise InputError("energy order q = %r below 2" % (q,))
    if n_outer < 1 or n_inner < 1 or doublings < 0:
        raise InputError("sample sizes must be positive")
    if not truncation > 0.0:
        raise InputError("truncation must be positive (got %r)"
                         % (truncation,))
    factor = 2 ** doublings
    inner_sizes = [n_inner * 2 ** j for j in range(doublings + 1)]
    outer_sizes = [n_outer * 2 ** j for j in range(doublings + 1)]
    floors = [min(1.0, truncation / (float(n_out) * n_in))
              for n_out, n_in in zip(outer_sizes, inner_sizes)]
    outer = sample_paths(ifs, weights, n_outer * factor, floors, seed,
                         OUTER_POOL, processes)
    inner = sample_paths(ifs, weights, n_inner * factor, floors, seed,
                         INNER_POOL, processes)
    spares = sample_paths(ifs, weights, SPARES, floors, seed, REDRAW_POOL,
                          processes)

    schedule = []
    for j, (n_out, n_in) in enumerate(zip(outer_sizes, inner_sizes)):
        block = max(1, PAIR_BLOCK // n_in)
        tasks = [(outer[j, start:min(start + block, n_out)],
                  inner[j, :n_in], spares[j], s, q)
                 for start in range(0, n_out, block)]
        parts = ordered_map(_row_terms, tasks, processes=processes)
        column = np.concatenate([part[0] for part in parts])
        rejected = int(sum(part[1].sum() for part in parts))
        excluded = int(sum(part[2].sum() for part in parts))
        mean = math.fsum(column) / n_out
        spread = math.sqrt(math.fsum((column - mean) ** 2) /
                           max(n_out - 1, 1))
        schedule.append(EnergyStep(n_out, n_in, mean,
                                   spread / math.sqrt(n_out)))
        _logger.debug("energy step %d: floor %g, %d coincident pairs, %d "
                      "without a spare", j, floors[j], rejected, excluded)

    rate = rejected / float(outer_sizes[-1] * inner_sizes[-1])
    if rate > REJECTION_WARNING:
        _logger.warning("%.1f%% of sample pairs coincided; the samples may "
                        "be too few for the truncation or the pieces may "
                        "overlap", 100.0 * rate)
    stability = classify([step.estimate for step in schedule])
    _logger.debug("energy s = %g, q = %g: %s (%s)", s, q,
                  ', '.join('%.6g' % step.estimate for step in schedule),
                  stability)
    return EnergyReport(float(s), float(q), schedule, stability, rejected,
                        rate, excluded)
