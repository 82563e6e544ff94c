"""
Box-counting estimates of the moment dimensions.

The word tree is cut where cylinders first get smaller than the mesh
(``alpha1(w) <= delta``), and each cut cylinder drops its whole mass into the
mesh square holding its representative point.  The point can sit up to
``2 R delta`` away from the rest of the cylinder; that moves mass by at most a
neighbouring square and leaves the log-log slopes alone.
"""
from __future__ import absolute_import, print_function

import logging
import math

import numpy as np
from scipy import stats

from affdim.errors import BUDGET_ERROR, EstimationError, InputError, \
    ResourceError
from affdim.estimators import GridMeasure, LqSpectrum
from affdim.ifs import extend_arrays, invariant_ball, log_alphas
from affdim.parallel import ordered_map
import affdim.ifs

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.ifs import IfsSystem
    from affdim.weights import WeightModel

_logger = logging.getLogger(__name__)

# word length at which every remaining branch is cut
DEPTH_CAP = 64
# log-space allowance for cylinders whose size equals the mesh up to rounding
STOP_TOLERANCE = 1e-9


def _subtree(task):
    """Cut the words starting with `first`; return points and log weights."""
    ifs, weights, log_delta, first, center, limit = task
    linear = ifs.linear[first:first + 1].copy()
    peak = np.abs(linear).max(axis=(1, 2))
    linear = linear / peak[:, None, None]
    log_scale = np.log(peak)
    translation = ifs.translations[first:first + 1].copy()
    log_det = ifs.log_dets[first:first + 1].copy()
    log_alpha1, log_alpha2 = log_alphas(linear, log_scale, log_det)
    log_weight = weights.child_log_weights(
        np.zeros(1), np.array([first]), log_alpha1, log_alpha2)

    points = []
    log_weights = []
    capped = False
    depth = 1
    while True:
        stop = log_alpha1 <= log_delta + STOP_TOLERANCE
        if depth >= DEPTH_CAP and not stop.all():
            capped = True
            stop[:] = True
        if stop.any():
            points.append(translation[stop] + np.einsum(
                'wij,j->wi', linear[stop], center) *
                np.exp(log_scale[stop])[:, None])
            log_weights.append(log_weight[stop])
        keep = ~stop
        if not keep.any():
            break
        count = int(keep.sum()) * ifs.n_symbols
        if count > limit:
            raise ResourceError(BUDGET_ERROR
                                % (count, depth + 1, limit))
        n = ifs.n_symbols
        parent_weight = np.repeat(log_weight[keep], n)
        linear, log_scale, translation, log_det = extend_arrays(
            ifs, linear[keep], log_scale[keep], translation[keep],
            log_det[keep])
        log_alpha1, log_alpha2 = log_alphas(linear, log_scale, log_det)
        symbols = np.tile(np.arange(n), len(parent_weight) // n)
        log_weight = weights.child_log_weights(parent_weight, symbols,
                                               log_alpha1, log_alpha2)
        depth += 1
    return np.concatenate(points), np.concatenate(log_weights), capped, depth


def rasterize(ifs, weights, delta, processes=None, limit=None):
    # type: (IfsSystem, WeightModel, float, Optional[int], Optional[int]) -> GridMeasure
    """
    Bin the measure on the ``delta``-mesh.

    Parameters
    ----------
    ifs : IfsSystem
    weights : WeightModel
    delta : float
        mesh side, positive
    processes : Optional[int]
    limit : Optional[int]
        largest frontier allowed, defaults to `affdim.ifs.max_words`

    Returns
    -------
    GridMeasure
        the mesh origin is the lower left corner of the invariant ball's
        bounding square
    """
    if not delta > 0.0:
        raise InputError("mesh size must be positive (got %r)" % (delta,))
    weights.check_system(ifs)
    limit = affdim.ifs.max_words if limit is None else limit
    ball = invariant_ball(ifs)
    tasks = [(ifs, weights, math.log(delta), first, ball.center, limit)
             for first in range(ifs.n_symbols)]
    parts = ordered_map(_subtree, tasks, processes=processes)
    points = np.concatenate([part[0] for part in parts])
    log_weights = np.concatenate([part[1] for part in parts])
    capped = any(part[2] for part in parts)
    depth = max(part[3] for part in parts)
    if capped:
        _logger.warning("delta = %g: some branches reached the depth cap of "
                        "%d before their cylinders shrank below the mesh",
                        delta, DEPTH_CAP)

    top = float(log_weights.max())
    masses = np.exp(log_weights - top)
    masses /= math.fsum(masses)

    origin = ball.center - ball.radius
    cells = np.floor((points - origin) / delta).astype(np.int64)
    cells, inverse = np.unique(cells, axis=0, return_inverse=True)
    binned = np.bincount(inverse.reshape(-1), weights=masses,
                         minlength=len(cells))
    _logger.debug("delta = %g: %d cylinders in %d cells (depth %d)",
                  delta, len(masses), len(cells), depth)
    return GridMeasure(float(delta), origin, cells, binned, capped, depth)


def moment_sum(grid, q):
    # type: (GridMeasure, float) -> float
    """
    ``sum_Q mu(Q)^q`` over the occupied squares.

    Empty squares never count, so q = 0 gives the number of occupied
    squares.
    """
    if not q >= 0.0:
        raise InputError("moment order must be non-negative (got %r)" % (q,))
    if q == 0.0:
        return float(grid.occupied)
    return math.fsum(grid.masses ** q)


def entropy_sum(grid):
    # type: (GridMeasure) -> float
    """``sum_Q mu(Q) log mu(Q)``."""
    return math.fsum(grid.masses * np.log(grid.masses))


def check_deltas(deltas):
    # type: (Sequence[float]) -> List[float]
    """
    Validate a decreasing geometric mesh schedule of at least four sizes.
    """
    deltas = [float(x) for x in deltas]
    if len(deltas) < 4:
        raise InputError("at least 4 mesh sizes are needed (got %d)"
                         % len(deltas))
    if any(not x > 0.0 for x in deltas):
        raise InputError("mesh sizes must be positive")
    ratios = [b / a for a, b in zip(deltas, deltas[1:])]
    if any(not r < 1.0 for r in ratios):
        raise InputError("mesh sizes must decrease")
    if max(ratios) - min(ratios) > 1e-6 * max(ratios):
        raise InputError("mesh sizes must form a geometric sequence")
    return deltas


def geometric_deltas(first, ratio, count):
    # type: (float, float, int) -> List[float]
    return [first * ratio ** i for i in range(count)]


def _fit(x, y):
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.rvalue ** 2)


def lq_spectrum(ifs, weights, qs, deltas, drop_largest=True, processes=None):
    # type: (IfsSystem, WeightModel, Sequence[float], Sequence[float], bool, Optional[int]) -> LqSpectrum
    """
    Fit the scaling of the moment sums across mesh sizes.

    For q != 1 the slope is that of ``log M^q_delta`` against
    ``(q - 1) log delta``; for q = 1 it is that of ``sum mu(Q) log mu(Q)``
    against ``log delta``.

    Parameters
    ----------
    ifs : IfsSystem
    weights : WeightModel
    qs : Sequence[float]
        moment orders in ``[0, 8]``
    deltas : Sequence[float]
        decreasing geometric sequence, at least 4 sizes
    drop_largest : bool
        leave the coarsest mesh out of the fits
    processes : Optional[int]

    Returns
    -------
    LqSpectrum

    Raises
    ------
    EstimationError
        when fewer than two mesh sizes are left to fit
    """
    qs = [float(q) for q in qs]
    if not qs:
        raise InputError("no moment orders given")
    for q in qs:
        if not 0.0 <= q <= 8.0:
            raise InputError("moment order %r outside [0, 8]" % (q,))
    deltas = check_deltas(deltas)

    grids = [rasterize(ifs, weights, delta, processes) for delta in deltas]
    used = [not grid.capped for grid in grids]
    if drop_largest:
        used[0] = False
    n_used = sum(used)
    if n_used < 2:
        raise EstimationError("only %d usable mesh sizes; need at least 2"
                              % n_used)
    for grid in grids:
        if grid.capped:
            _logger.info("delta = %g left out of the fits (depth cap)",
                         grid.delta)

    moments = [[moment_sum(grid, q) for grid in grids] for q in qs]
    entropies = [entropy_sum(grid) for grid in grids]
    log_deltas = np.log(np.array(deltas))[used]
    slopes = []
    r_squared = []
    for q, row in zip(qs, moments):
        if q == 1.0:
            slope, r2 = _fit(log_deltas, np.array(entropies)[used])
        else:
            slope, r2 = _fit((q - 1.0) * log_deltas,
                             np.log(np.array(row))[used])
        if not math.isfinite(slope):
            raise EstimationError("slope for q = %g is not finite" % q)
        slopes.append(slope)
        r_squared.append(r2)
        _logger.debug("q = %g: slope %.6f (R^2 = %.6f)", q, slope, r2)
    return LqSpectrum(qs, deltas, used, moments, entropies, slopes,
                      r_squared)
