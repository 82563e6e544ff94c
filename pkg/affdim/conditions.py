"""
Checks for the hypotheses under which the moment dimensions are known.

Positivity, separation, the bunching family and the existence of a suitable
Bernoulli vector are all tested here.  Every inequality is strict and is
evaluated in log space; a margin has to exceed `SLACK` to count.
"""
from __future__ import absolute_import, print_function

import logging
import math
from collections import namedtuple

import numpy as np

from affdim.dimension import (
    DEFAULT_TOLERANCE, affinity_dim, bisect, default_depth, moment_root)
from affdim.errors import DomainError, InputError, ResourceError
from affdim.ifs import invariant_ball, level_table
from affdim.parallel import ordered_map
from affdim.projective import gamma_bound, pigeonhole_gamma
from affdim.weights import BernoulliWeights

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.dimension import DimensionEstimate
    from affdim.ifs import IfsSystem
    from affdim.projective import GammaReport

_logger = logging.getLogger(__name__)

SLACK = 1e-12
# q scans stop here and report an unbounded threshold
Q_CAP = 64.0
Q_GRID = (2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0)
# pairwise distance blocks are kept below this many entries
PAIR_BLOCK = 1 << 20

CERTIFIED = 'Certified'
UNDETERMINED = 'Undetermined'

HOLDS = 'Holds'
FAILS = 'Fails'
INCONCLUSIVE = 'Inconclusive'

GAMMA_ERROR = "gamma must be at least 1 (got %r)"
EXPONENT_ERROR = "dimension d = %r outside (0, 2]"
Q_ERROR = "bunching needs q >= 2 (got %r)"


class SeparationCertificate(namedtuple('SeparationCertificate',
                                       ['status', 'gap', 'depth'])):
    """
    Attributes
    ----------
    status : str
        `CERTIFIED` or `UNDETERMINED`; disjointness is never refuted
    gap : float
        smallest distance between cover balls of different first-level
        images; a lower bound for the distance between the images when
        certified, ``inf`` for a single map
    depth : int
    """
    __slots__ = ()

    @property
    def certified(self):
        # type: () -> bool
        return self.status == CERTIFIED


class ConditionCheck(namedtuple('ConditionCheck', ['holds', 'margins'])):
    """
    A per-map strict inequality.  Truthy exactly when every margin exceeds
    `SLACK`.
    """
    __slots__ = ()

    def __bool__(self):
        return bool(self.holds)

    __nonzero__ = __bool__


class QThreshold(namedtuple('QThreshold', ['value', 'admissible'])):
    """
    Supremum of the admissible q.

    Attributes
    ----------
    value : float
        the threshold, ``inf`` if the condition never fails; when not
        admissible the threshold is at most 2
    admissible : bool
        whether the condition holds at q = 2
    """
    __slots__ = ()

    def __str__(self):
        if not self.admissible:
            return 'none below 2'
        if math.isinf(self.value):
            return 'inf'
        return '%.6f' % self.value


ExistenceCheck = namedtuple('ExistenceCheck', [
    'exists',          # sum_gamma > 1
    'sum_gamma',       # sum (alpha2^d2 / gamma)^(1/2)
    'sum_alpha2',      # sum alpha2^(d2/2)
    'sum_alpha1_d2',   # sum alpha1^d2
    'sum_alpha1_d',    # sum alpha1^d
])

SeriesBound = namedtuple('SeriesBound', ['ratio', 'bound'])


def _check_gamma(gamma):
    if not gamma >= 1.0:
        raise InputError(GAMMA_ERROR % (gamma,))


def _check_d(d):
    if not 0.0 < d <= 2.0:
        raise InputError(EXPONENT_ERROR % (d,))


def _check_q(q):
    if not q >= 2.0:
        raise InputError(Q_ERROR % (q,))


def _log_alphas(ifs):
    pairs = [m.log_singular_values() for m in ifs]
    return (np.array([a for a, _ in pairs]), np.array([b for _, b in pairs]))


def _log_probabilities(ifs, p):
    weights = p if isinstance(p, BernoulliWeights) else BernoulliWeights(p)
    weights.check_system(ifs)
    return np.log(np.array(weights.p))


def check_positivity(ifs):
    # type: (IfsSystem) -> bool
    return bool(np.all(ifs.linear > 0.0))


def _pair_gap(task):
    left_centers, left_radii, right_centers, right_radii = task
    block = max(1, PAIR_BLOCK // max(1, len(right_radii)))
    best = float('inf')
    for start in range(0, len(left_radii), block):
        centers = left_centers[start:start + block]
        radii = left_radii[start:start + block]
        diff = centers[:, None, :] - right_centers[None, :, :]
        slack = np.hypot(diff[..., 0], diff[..., 1]) - \
            radii[:, None] - right_radii[None, :]
        best = min(best, float(slack.min()))
    return best


def check_separation(ifs, depth, processes=None):
    # type: (IfsSystem, int, Optional[int]) -> SeparationCertificate
    """
    Try to certify that the first-level images of the attractor are
    pairwise disjoint.

    The attractor is covered by the images of the invariant ball under all
    words of length `depth`; each image lies in a ball of radius
    ``alpha1(w) * R`` around the image of the centre.  Covers of different
    first-level images that keep apart certify disjointness.

    Parameters
    ----------
    ifs : IfsSystem
    depth : int
        at least 1
    processes : Optional[int]

    Returns
    -------
    SeparationCertificate
    """
    if depth < 1:
        raise InputError("separation depth must be at least 1")
    n = ifs.n_symbols
    if n == 1:
        return SeparationCertificate(CERTIFIED, float('inf'), depth)
    ball = invariant_ball(ifs)
    table = level_table(ifs, depth, processes=processes)
    centers = table.translation + \
        np.einsum('wij,j->wi', table.linear, ball.center) * \
        np.exp(table.log_scale)[:, None]
    radii = np.exp(table.log_alpha1) * ball.radius
    size = len(radii) // n
    groups = [(centers[i * size:(i + 1) * size], radii[i * size:(i + 1) * size])
              for i in range(n)]
    tasks = [groups[i] + groups[j] for i in range(n) for j in range(i + 1, n)]
    gap = min(ordered_map(_pair_gap, tasks, processes=processes))
    _logger.debug("separation gap at depth %d: %.6g", depth, gap)
    if gap > 0.0:
        return SeparationCertificate(CERTIFIED, gap, depth)
    return SeparationCertificate(UNDETERMINED, gap, depth)


def _bunching_margins(log_alpha1, log_alpha2, gamma, d, q):
    return (q - 1.0) * d * log_alpha2 - q * d * log_alpha1 - math.log(gamma)


def check_bunching(ifs, gamma, d, q):
    # type: (IfsSystem, float, float, float) -> ConditionCheck
    """
    ``gamma * alpha1(i)^(q d) < alpha2(i)^((q-1) d)`` for every map.

    Parameters
    ----------
    ifs : IfsSystem
    gamma : float
        at least 1
    d : float
        in ``(0, 2]``
    q : float
        at least 2

    Returns
    -------
    ConditionCheck
        margins are ``(q-1) d log alpha2(i) - q d log alpha1(i) - log gamma``
    """
    _check_gamma(gamma)
    _check_d(d)
    _check_q(q)
    log_alpha1, log_alpha2 = _log_alphas(ifs)
    margins = _bunching_margins(log_alpha1, log_alpha2, gamma, d, q)
    return ConditionCheck(bool(np.all(margins > SLACK)), margins.tolist())


def check_metric_bunching(ifs, gamma, dq, p, q):
    # type: (IfsSystem, float, float, Any, float) -> ConditionCheck
    """
    ``gamma * p(i)^q < alpha2(i)^((q-1) d(q))`` for every map.

    Parameters
    ----------
    ifs : IfsSystem
    gamma : float
    dq : float
        the moment exponent ``d(q)`` of the Bernoulli measure
    p : Union[Sequence[float], BernoulliWeights]
    q : float

    Returns
    -------
    ConditionCheck
    """
    _check_gamma(gamma)
    _check_q(q)
    if not 0.0 <= dq <= 2.0:
        raise InputError("moment exponent d(q) = %r outside [0, 2]" % (dq,))
    log_p = _log_probabilities(ifs, p)
    _, log_alpha2 = _log_alphas(ifs)
    margins = (q - 1.0) * dq * log_alpha2 - q * log_p - math.log(gamma)
    return ConditionCheck(bool(np.all(margins > SLACK)), margins.tolist())


def q0_bunching(ifs, gamma, d):
    # type: (IfsSystem, float, float) -> QThreshold
    """
    Largest q for which the bunching condition holds, in closed form.

    Each margin is affine in q with slope ``-d log(alpha1/alpha2)``, so the
    per-map threshold is where it crosses zero.  Conformal maps have a flat
    margin and contribute ``inf`` when it is positive.
    """
    _check_gamma(gamma)
    _check_d(d)
    log_alpha1, log_alpha2 = _log_alphas(ifs)
    q0 = float('inf')
    for a1, a2 in zip(log_alpha1, log_alpha2):
        numerator = -d * a2 - math.log(gamma)
        denominator = d * (a1 - a2)
        if denominator <= SLACK:
            if numerator <= SLACK:
                q0 = -float('inf')
            continue
        q0 = min(q0, numerator / denominator)
    admissible = check_bunching(ifs, gamma, d, 2.0).holds
    return QThreshold(q0, admissible)


def scan_threshold(holds_at, tol=DEFAULT_TOLERANCE, cap=Q_CAP):
    # type: (Callable[[float], bool], float, float) -> QThreshold
    """
    First q in ``[2, cap]`` where `holds_at` turns false.

    Walks a coarse grid upward and bisects between the last passing and the
    first failing grid point.

    Returns
    -------
    QThreshold
        ``inf`` if nothing fails up to `cap`
    """
    if not holds_at(2.0):
        return QThreshold(2.0, False)
    grid = [q for q in Q_GRID if q <= cap]
    if grid[-1] < cap:
        grid.append(cap)
    last = 2.0
    for q in grid[1:]:
        if not holds_at(q):
            value = bisect(lambda x: 1.0 if holds_at(x) else -1.0,
                           last, q, tol, increasing=False)
            return QThreshold(value, True)
        last = q
    return QThreshold(float('inf'), True)


def q0_metric_bunching(ifs, gamma, p, k=None, tol=DEFAULT_TOLERANCE,
                       processes=None):
    # type: (IfsSystem, float, Any, Optional[int], float, Optional[int]) -> QThreshold
    """
    Largest q for which the metric bunching condition holds.

    ``d(q)`` is solved at every candidate q on one shared level table.

    Parameters
    ----------
    ifs : IfsSystem
    gamma : float
    p : Union[Sequence[float], BernoulliWeights]
    k : Optional[int]
        depth of the moment sums
    tol : float
        accuracy of both the threshold and each ``d(q)``
    processes : Optional[int]

    Returns
    -------
    QThreshold
    """
    _check_gamma(gamma)
    weights = p if isinstance(p, BernoulliWeights) else BernoulliWeights(p)
    _log_probabilities(ifs, weights)
    if k is None:
        k = default_depth(ifs.n_symbols)
    table = level_table(ifs, k, processes=processes)

    def holds_at(q):
        dq, _ = moment_root(table, weights, q, tol)
        return check_metric_bunching(ifs, gamma, dq, weights, q).holds

    threshold = scan_threshold(holds_at, tol)
    _logger.debug("metric bunching threshold: %s", threshold)
    return threshold


def prop3_check(ifs, gamma, d2, d):
    # type: (IfsSystem, float, float, float) -> ExistenceCheck
    """
    Whether some Bernoulli vector satisfies metric bunching at q = 2.

    Parameters
    ----------
    ifs : IfsSystem
    gamma : float
    d2 : float
        ``d(2)``
    d : float
        the affinity dimension

    Returns
    -------
    ExistenceCheck
        the deciding sum plus the chain of sums used to bound it below
    """
    _check_gamma(gamma)
    log_alpha1, log_alpha2 = _log_alphas(ifs)
    sum_gamma = math.fsum(np.exp(0.5 * (d2 * log_alpha2 - math.log(gamma))))
    return ExistenceCheck(
        sum_gamma > 1.0 + SLACK,
        sum_gamma,
        math.fsum(np.exp(0.5 * d2 * log_alpha2)),
        math.fsum(np.exp(d2 * log_alpha1)),
        math.fsum(np.exp(d * log_alpha1)))


def _series(gamma, log_terms):
    ratio = gamma * math.exp(float(np.max(log_terms)))
    bound = 1.0 / (1.0 - ratio) if ratio < 1.0 else float('inf')
    return SeriesBound(ratio, bound)


def bunching_series(ifs, gamma, d, s, q):
    # type: (IfsSystem, float, float, float, float) -> SeriesBound
    """
    Ratio ``gamma * max_i alpha1(i)^(d q) / alpha2(i)^((q-1) s)`` of the
    geometric series that bounds the angular sums, with its total.
    """
    _check_gamma(gamma)
    log_alpha1, log_alpha2 = _log_alphas(ifs)
    return _series(gamma, d * q * log_alpha1 - (q - 1.0) * s * log_alpha2)


def metric_bunching_series(ifs, gamma, p, s, q):
    # type: (IfsSystem, float, Any, float, float) -> SeriesBound
    _check_gamma(gamma)
    log_p = _log_probabilities(ifs, p)
    _, log_alpha2 = _log_alphas(ifs)
    return _series(gamma, q * log_p - (q - 1.0) * s * log_alpha2)


def affinity_at_most_one(estimate):
    # type: (DimensionEstimate) -> str
    """
    `HOLDS` when the certified upper bound is at most 1, `FAILS` when the
    lower estimate exceeds 1, `INCONCLUSIVE` otherwise.
    """
    if estimate.converged and estimate.upper <= 1.0:
        return HOLDS
    if estimate.lower > 1.0:
        return FAILS
    return INCONCLUSIVE


class ConditionReport(namedtuple('ConditionReport', [
        'positivity', 'separation', 'gamma_used', 'gamma',
        'pigeonhole_gamma', 'dimension', 'd_at_most_one', 'q0_bunching',
        'per_map_margins', 'dq2', 'q0_metric', 'metric_margins',
        'existence'])):
    """
    Everything `check_conditions` found out.

    Attributes
    ----------
    positivity : bool
    separation : SeparationCertificate
    gamma_used : float
        the certified upper bound fed into the bunching checks
    gamma : Optional[GammaReport]
        None when the sign pattern rules out arc tracking
    pigeonhole_gamma : float
    dimension : DimensionEstimate
    d_at_most_one : str
    q0_bunching : QThreshold
    per_map_margins : List[float]
        bunching margins at q = 2
    dq2 : Optional[float]
        ``d(2)`` of the Bernoulli vector, if one was given
    q0_metric : Optional[QThreshold]
    metric_margins : Optional[List[float]]
        metric bunching margins at q = 2
    existence : ExistenceCheck
    """
    __slots__ = ()

    def outcome(self):
        # type: () -> str
        """
        `FAILS` if any hypothesis is violated, `INCONCLUSIVE` if none is but
        some could not be certified, `HOLDS` otherwise.
        """
        failed = (not self.positivity or self.d_at_most_one == FAILS or
                  not self.q0_bunching.admissible or
                  (self.q0_metric is not None and
                   not self.q0_metric.admissible))
        if failed:
            return FAILS
        if not self.separation.certified or \
                self.d_at_most_one == INCONCLUSIVE:
            return INCONCLUSIVE
        return HOLDS


def certified_gamma(ifs, max_depth, processes=None):
    # type: (IfsSystem, int, Optional[int]) -> Tuple[float, Optional[GammaReport]]
    """
    Best certified upper bound for the overlap growth rate.

    Falls back on the partial report when the budget runs out, and on the
    trivial bound (the number of maps) when arcs cannot be tracked.
    """
    try:
        report = gamma_bound(ifs, max_depth, processes=processes)
    except DomainError as err:
        _logger.warning("%s; using gamma <= %d", err, ifs.n_symbols)
        return float(ifs.n_symbols), None
    except ResourceError as err:
        _logger.warning(str(err))
        report = err.partial
    if report is None or math.isinf(report.certified_upper):
        return float(ifs.n_symbols), report
    return max(1.0, report.certified_upper), report


def check_conditions(ifs, probabilities=None, separation_depth=6,
                     gamma_depth=10, k=None, tol=DEFAULT_TOLERANCE,
                     processes=None):
    # type: (IfsSystem, Optional[Sequence[float]], int, int, Optional[int], float, Optional[int]) -> ConditionReport
    """
    Run every hypothesis check on one system.

    Parameters
    ----------
    ifs : IfsSystem
    probabilities : Optional[Sequence[float]]
        Bernoulli vector for the metric bunching checks
    separation_depth : int
    gamma_depth : int
    k : Optional[int]
        depth of the pressure and moment sums
    tol : float
    processes : Optional[int]

    Returns
    -------
    ConditionReport
    """
    positivity = check_positivity(ifs)
    separation = check_separation(ifs, separation_depth, processes)
    gamma, report = certified_gamma(ifs, gamma_depth, processes)
    estimate = affinity_dim(ifs, k, tol, processes)
    d = estimate.upper
    if not d > 0.0:
        raise DomainError("affinity dimension is 0; the bunching conditions "
                          "are undefined")
    q0 = q0_bunching(ifs, gamma, d)
    margins = check_bunching(ifs, gamma, d, 2.0).margins

    dq2 = q0_metric = metric_margins = None
    d2 = d
    if probabilities is not None:
        weights = BernoulliWeights(probabilities)
        table = level_table(ifs, estimate.depth, processes=processes)
        dq2, _ = moment_root(table, weights, 2.0, tol)
        d2 = dq2
        q0_metric = q0_metric_bunching(ifs, gamma, weights, estimate.depth,
                                       tol, processes)
        metric_margins = check_metric_bunching(ifs, gamma, dq2, weights,
                                               2.0).margins
    existence = prop3_check(ifs, gamma, d2, d)
    return ConditionReport(
        positivity, separation, gamma, report,
        pigeonhole_gamma(ifs, min(estimate.depth, 8), processes), estimate,
        affinity_at_most_one(estimate), q0, margins, dq2, q0_metric,
        metric_margins, existence)
