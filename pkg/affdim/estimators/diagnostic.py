"""
The angular series behind the energy bounds,

    r(theta) = sum_n sum_{|w|=n} mu[w]^q lambda_w(theta)^(-s (q-1)),

where ``lambda_w(theta)`` is the factor by which the composition of w shrinks
segments pointing along theta.  Its partial sums are tabulated level by level
on a uniform grid of directions; a max-over-angles curve that flattens out is
the sign that the series converges uniformly.
"""
from __future__ import absolute_import, print_function

import logging
import math

import numpy as np

from affdim.errors import InputError
from affdim.estimators import RCurve
from affdim.ifs import HALF_PI, iter_tables

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.ifs import IfsSystem, LevelTable
    from affdim.weights import WeightModel

_logger = logging.getLogger(__name__)

MIN_ANGLES = 16


def angle_grid(n_angles):
    # type: (int) -> np.ndarray
    """``n_angles`` equally spaced directions in ``(-pi/2, pi/2]``."""
    return -HALF_PI + math.pi * np.arange(1, n_angles + 1) / n_angles


def log_contraction(table, angles):
    # type: (LevelTable, np.ndarray) -> np.ndarray
    """
    ``log lambda_w(theta)`` for every word of `table` (rows) and every angle
    (columns).
    """
    units = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    images = np.einsum('wij,tj->wti', table.linear, units)
    return np.log(np.hypot(images[..., 0], images[..., 1])) + \
        table.log_scale[:, None]


def r_diagnostic(ifs, weights, s, q, depth, n_angles=64):
    # type: (IfsSystem, WeightModel, float, float, int, int) -> RCurve
    """
    Partial sums of the angular series up to words of length `depth`.

    Parameters
    ----------
    ifs : IfsSystem
    weights : WeightModel
    s : float
    q : float
    depth : int
        longest word length; bounded by the enumeration budget
    n_angles : int
        at least 16

    Returns
    -------
    RCurve
    """
    if depth < 0:
        raise InputError("depth must be non-negative")
    if n_angles < MIN_ANGLES:
        raise InputError("at least %d angles are needed (got %d)"
                         % (MIN_ANGLES, n_angles))
    weights.check_system(ifs)
    angles = angle_grid(n_angles)
    exponent = s * (q - 1.0)
    partial = np.empty((depth + 1, n_angles))
    running = [[] for _ in range(n_angles)]  # type: List[List[float]]
    for table in iter_tables(ifs, depth):
        log_terms = q * weights.log_level_masses(table)[:, None] - \
            exponent * log_contraction(table, angles)
        top = log_terms.max(axis=0)
        level = np.exp(top) * np.exp(log_terms - top).sum(axis=0)
        for j in range(n_angles):
            running[j].append(float(level[j]))
            partial[table.length, j] = math.fsum(running[j])
    _logger.debug("r-curve s = %g, q = %g: max %.6g at depth %d", s, q,
                  partial[-1].max(), depth)
    return RCurve(float(s), float(q), angles, partial)
