"""
The induced action of the maps on the projective line.

Each map ``A_i`` acts on directions through ``A_i^-1``.  Arcs are stored in a
lifted coordinate: ``lo`` in ``[-pi/2, pi/2)`` and ``hi = lo + length`` with
``0 <= length < pi``, so arcs derived from the negative quadrant never need
wraparound bookkeeping.  The negative quadrant is the arc ``[-pi/2, 0]`` and
the positive quadrant ``[0, pi/2]``.
"""
from __future__ import absolute_import, print_function

import logging
import math
from collections import namedtuple

import numpy as np

from affdim.errors import DomainError, InputError, ResourceError, \
    SINGULAR_ERROR
from affdim.ifs import HALF_PI, Angle, as_angle, canonical_angle, \
    level_table
from affdim.parallel import ordered_map
import affdim.ifs

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.ifs import IfsSystem

_logger = logging.getLogger(__name__)

SIGN_PATTERN_ERROR = "projective arcs are only tracked for systems whose " \
                     "linear parts are all strictly positive or all diagonal"


def _lift(theta):
    """Representative of `theta` modulo pi in ``[-pi/2, pi/2)``."""
    t = canonical_angle(theta)
    return -HALF_PI if t == HALF_PI else t


def _lift_array(theta):
    t = np.mod(theta + HALF_PI, math.pi) - HALF_PI
    return np.where(t >= HALF_PI, t - math.pi, t)


class Arc(namedtuple('Arc', ['lo', 'hi'])):
    """
    A closed arc of the projective line, running counterclockwise from
    `lo` to `hi` in the lifted coordinate.
    """
    __slots__ = ()

    def __new__(cls, lo, hi):
        # type: (float, float) -> Arc
        length = float(hi) - float(lo)
        if not 0.0 <= length < math.pi:
            raise InputError("arc length %r outside [0, pi)" % (length,))
        lo = _lift(float(lo))
        return super(Arc, cls).__new__(cls, lo, lo + length)

    @property
    def length(self):
        # type: () -> float
        return self.hi - self.lo

    @property
    def start(self):
        # type: () -> Angle
        return Angle(self.lo)

    @property
    def end(self):
        # type: () -> Angle
        return Angle(self.hi)

    def contains(self, other, tol=0.0):
        # type: (Arc, float) -> bool
        """
        Whether `other` lies inside this arc, up to `tol` at either end.
        """
        offset = math.fmod(other.lo - self.lo + tol, math.pi)
        if offset < 0.0:
            offset += math.pi
        return offset + other.length <= self.length + 2.0 * tol


NEGATIVE_QUADRANT = Arc(-HALF_PI, 0.0)
POSITIVE_QUADRANT = Arc(0.0, HALF_PI)


def _adjugate(m):
    m = np.asarray(m, dtype=float).reshape(2, 2)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0.0 or not np.isfinite(det):
        raise DomainError(SINGULAR_ERROR)
    # det * m^-1; the positive factor does not change directions
    adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    return adj, det


def proj_map(m, theta):
    # type: (Any, Union[Angle, float]) -> Angle
    """
    Direction of ``m^-1 u(theta)``.

    Parameters
    ----------
    m : array_like
        nonsingular 2x2 matrix
    theta : Union[Angle, float]

    Returns
    -------
    Angle
    """
    adj, _ = _adjugate(m)
    v = adj.dot(as_angle(theta).unit)
    return Angle(math.atan2(v[1], v[0]))


def _arc_between(start, end):
    lo = math.atan2(start[1], start[0])
    length = math.atan2(start[0] * end[1] - start[1] * end[0],
                        start[0] * end[0] + start[1] * end[1])
    length = math.fmod(length, math.pi)
    if length < 0.0:
        length += math.pi
    lo = _lift(lo)
    return Arc(lo, lo + length)


def proj_image(m, arc):
    # type: (Any, Arc) -> Arc
    """
    Image of `arc` under the action of ``m^-1``.

    An orientation-reversing matrix swaps the roles of the endpoints.
    Composition reverses order: the image under ``a.dot(b)`` is the image
    under `b` of the image under `a`.

    Parameters
    ----------
    m : array_like
    arc : Arc

    Returns
    -------
    Arc
    """
    adj, det = _adjugate(m)
    start = adj.dot(arc.start.unit)
    end = adj.dot(arc.end.unit)
    if det < 0.0:
        start, end = end, start
    return _arc_between(start, end)


def _sweep(lo, length):
    """Maximum number of closed arcs through one point."""
    if len(lo) == 0:
        return 0
    lo = _lift_array(np.asarray(lo, dtype=float))
    hi = lo + np.asarray(length, dtype=float)
    wrap = hi >= HALF_PI
    n_wrap = int(wrap.sum())
    # a wrapping arc becomes [lo, pi/2) plus [-pi/2, hi - pi]
    starts = np.concatenate([lo, np.full(n_wrap, -HALF_PI)])
    ends = np.concatenate([np.where(wrap, HALF_PI, hi), hi[wrap] - math.pi])
    coords = np.concatenate([starts, ends])
    kinds = np.concatenate([np.zeros(len(starts), dtype=int),
                            np.ones(len(ends), dtype=int)])
    # starts sort before ends at equal coordinates: touching arcs overlap
    order = np.lexsort((kinds, coords))
    steps = np.where(kinds[order] == 0, 1, -1)
    return int(np.cumsum(steps).max())


def max_overlap(arcs):
    # type: (Sequence[Arc]) -> int
    """
    Largest number of the closed arcs sharing a single direction.

    Parameters
    ----------
    arcs : Sequence[Arc]

    Returns
    -------
    int
        0 for an empty list
    """
    arcs = list(arcs)
    return _sweep([a.lo for a in arcs], [a.length for a in arcs])


LevelOverlap = namedtuple('LevelOverlap', ['n', 'n_max', 'gamma_hat'])


class GammaReport(namedtuple('GammaReport',
                             ['per_level', 'certified_upper', 'separated',
                              'gap'])):
    """
    Overlap counts of the projective images of the negative quadrant.

    Attributes
    ----------
    per_level : List[LevelOverlap]
    certified_upper : float
        smallest ``N_n ** (1/n)`` over the computed levels
    separated : bool
        whether the first-level arcs are pairwise disjoint
    gap : float
        smallest gap between first-level arcs (negative when they overlap)
    """
    __slots__ = ()

    def is_submultiplicative(self):
        # type: () -> bool
        counts = {level.n: level.n_max for level in self.per_level}
        for m in counts:
            for n in counts:
                if m + n in counts and counts[m + n] > counts[m] * counts[n]:
                    return False
        return True


def check_sign_pattern(ifs):
    # type: (IfsSystem) -> str
    """
    Returns
    -------
    str
        'positive' or 'diagonal'
    """
    linear = ifs.linear
    if np.all(linear > 0.0):
        return 'positive'
    if np.all(linear[:, 0, 1] == 0.0) and np.all(linear[:, 1, 0] == 0.0):
        return 'diagonal'
    raise DomainError(SIGN_PATTERN_ERROR)


def _system_adjugates(ifs):
    adjs = np.stack([_adjugate(m)[0] for m in ifs.linear])
    flips = np.array([_adjugate(m)[1] < 0.0 for m in ifs.linear])
    return adjs, flips


def _arrays_to_arcs(start, end):
    lo = _lift_array(np.arctan2(start[:, 1], start[:, 0]))
    cross = start[:, 0] * end[:, 1] - start[:, 1] * end[:, 0]
    dot = np.einsum('ij,ij->i', start, end)
    length = np.mod(np.arctan2(cross, dot), math.pi)
    return lo, length


def _extend_endpoints(adjs, flips, start, end):
    """Apply every map (outermost) to every arc, new letter last."""
    n = len(adjs)
    m = start.shape[0]
    new_start = np.einsum('sij,wj->wsi', adjs, start)
    new_end = np.einsum('sij,wj->wsi', adjs, end)
    swap = np.broadcast_to(flips[None, :, None], new_start.shape)
    new_start, new_end = (np.where(swap, new_end, new_start),
                          np.where(swap, new_start, new_end))
    new_start = new_start.reshape(m * n, 2)
    new_end = new_end.reshape(m * n, 2)
    new_start /= np.linalg.norm(new_start, axis=1)[:, None]
    new_end /= np.linalg.norm(new_end, axis=1)[:, None]
    return new_start, new_end


def _quadrant_arrays(arc):
    return arc.start.unit[None, :], arc.end.unit[None, :]


def _arc_subtree(task):
    ifs, depth, first = task
    adjs, flips = _system_adjugates(ifs)
    start, end = _quadrant_arrays(NEGATIVE_QUADRANT)
    start, end = _extend_endpoints(adjs[first:first + 1],
                                   flips[first:first + 1], start, end)
    levels = [_arrays_to_arcs(start, end)]
    for _ in range(depth - 1):
        start, end = _extend_endpoints(adjs, flips, start, end)
        levels.append(_arrays_to_arcs(start, end))
    return levels


def _level_arrays(ifs, depth, processes=None):
    parts = ordered_map(_arc_subtree, [(ifs, depth, first)
                                       for first in range(ifs.n_symbols)],
                        processes=processes)
    levels = []
    for n in range(depth):
        lo = np.concatenate([part[n][0] for part in parts])
        length = np.concatenate([part[n][1] for part in parts])
        levels.append((lo, length))
    return levels


def level_arcs(ifs, n, processes=None):
    # type: (IfsSystem, int, Optional[int]) -> List[Arc]
    """
    Arcs ``phi_{c_n} o ... o phi_{c_1}(Q2)`` for every word ``c_1 ... c_n``.

    The list is in lexicographic order of ``c_1 ... c_n``; the letter applied
    last (outermost) is the last letter of the word.  Every map sends the
    negative quadrant into itself, so the arc of ``c_1 ... c_n`` lies in the
    arc of its suffix ``c_2 ... c_n``: entry ``i`` of level n sits inside
    entry ``i % N**(n-1)`` of level n - 1, N being the number of maps.

    Returns
    -------
    List[Arc]
    """
    check_sign_pattern(ifs)
    if n == 0:
        return [NEGATIVE_QUADRANT]
    affdim.ifs.check_budget(ifs.n_symbols, n)
    lo, length = _level_arrays(ifs, n, processes)[-1]
    return [Arc(a, a + b) for a, b in zip(lo, length)]


ProjectiveSeparationBase = namedtuple('ProjectiveSeparation',
                                      ['separated', 'gap'])


class ProjectiveSeparation(ProjectiveSeparationBase):
    """Truthy exactly when the first-level arcs are pairwise disjoint."""
    __slots__ = ()

    def __bool__(self):
        return bool(self.separated)

    __nonzero__ = __bool__


def _circular_gap(lo, length):
    if len(lo) < 2:
        return float('inf')
    lo = _lift_array(np.asarray(lo, dtype=float))
    order = np.argsort(lo, kind='mergesort')
    lo = lo[order]
    hi = lo + np.asarray(length, dtype=float)[order]
    gaps = np.append(lo[1:] - hi[:-1], lo[0] + math.pi - hi[-1])
    return float(gaps.min())


def projective_separation(ifs):
    # type: (IfsSystem) -> ProjectiveSeparation
    """
    Whether the arcs ``phi_i(Q2)`` are pairwise disjoint.

    Separation makes the overlap growth rate equal to 1.

    Returns
    -------
    ProjectiveSeparation
    """
    check_sign_pattern(ifs)
    lo, length = _level_arrays(ifs, 1, processes=1)[0]
    gap = _circular_gap(lo, length)
    return ProjectiveSeparation(gap > 0.0, gap)


def gamma_bound(ifs, max_depth, processes=None, limit=None):
    # type: (IfsSystem, int, Optional[int], Optional[int]) -> GammaReport
    """
    Certified upper bound for the overlap growth rate.

    Overlap counts are submultiplicative in the level, so every
    ``N_n ** (1/n)`` bounds the growth rate from above.

    Parameters
    ----------
    ifs : IfsSystem
        linear parts all strictly positive, or all diagonal
    max_depth : int
    processes : Optional[int]
    limit : Optional[int]
        word budget

    Returns
    -------
    GammaReport

    Raises
    ------
    ResourceError
        when ``N ** max_depth`` exceeds the budget; ``partial`` holds the
        report for the levels that fit
    """
    if max_depth < 1:
        raise InputError("max_depth must be at least 1")
    check_sign_pattern(ifs)
    limit = affdim.ifs.max_words if limit is None else limit
    feasible = 0
    while feasible < max_depth and ifs.n_symbols ** (feasible + 1) <= limit:
        feasible += 1

    separation = projective_separation(ifs)
    per_level = []
    if feasible:
        for n, (lo, length) in enumerate(
                _level_arrays(ifs, feasible, processes), 1):
            count = _sweep(lo, length)
            per_level.append(LevelOverlap(n, count, count ** (1.0 / n)))
            _logger.debug("level %d: %d overlapping arcs", n, count)
    upper = min([level.gamma_hat for level in per_level] or [float('inf')])
    report = GammaReport(per_level, upper, separation.separated,
                         separation.gap)
    if not report.is_submultiplicative():
        _logger.warning("overlap counts are not submultiplicative; arc "
                        "endpoints are probably numerically degenerate")
    if feasible < max_depth:
        raise ResourceError(
            "overlap counting stopped at depth %d of %d (budget %d words)"
            % (feasible, max_depth, limit), partial=report)
    return report


def pigeonhole_gamma(ifs, k, processes=None):
    # type: (IfsSystem, int, Optional[int]) -> float
    """
    Heuristic lower estimate ``(sum alpha2(w)/alpha1(w)) ** (1/k)``.

    Each arc at level k has length roughly ``alpha2/alpha1``, so if they
    cover the quadrant this many of them must pile up somewhere.  Only a
    diagnostic; conditions are always checked with `gamma_bound`.
    """
    if k < 1:
        raise InputError("k must be at least 1")
    table = level_table(ifs, k, processes=processes)
    ratios = table.log_alpha2 - table.log_alpha1
    top = float(ratios.max())
    total = top + math.log(math.fsum(np.exp(ratios - top)))
    return math.exp(total / k)
