"""
Affinity dimension and moment exponents from truncated pressure sums.

Both exponents are roots of level-k log sums that are monotone in s, so they
are found by bisection.  Every finite-depth root of the pressure bounds the
affinity dimension from above (the log sums are subadditive in k).
"""
from __future__ import absolute_import, print_function

import logging
import math
from collections import namedtuple

import numpy as np

from affdim.errors import InputError
from affdim.ifs import check_exponent, closed_form, level_table, log_svf
from affdim.parallel import log_sum
from affdim.weights import BernoulliWeights, KaenmakiApprox

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.ifs import IfsSystem, LevelTable
    from affdim.weights import WeightModel

_logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-6
# pairs drawn when estimating quasi-multiplicativity constants
PAIR_SAMPLE = 4096


class DimensionEstimate(namedtuple('DimensionEstimate', [
        'value', 'depth', 'bracket', 'tolerance', 'converged'])):
    """
    A solved exponent.

    Attributes
    ----------
    value : float
    depth : int
        word length k of the truncated sums
    bracket : Tuple[float, float]
        ``(lower_heuristic, upper_certified)`` for the affinity dimension;
        the spread of the roots at depths k-1 and k for moment exponents
    tolerance : float
    converged : bool
        False when the root was clamped to the upper end of ``[0, 2]``
    """
    __slots__ = ()

    @property
    def lower(self):
        # type: () -> float
        return self.bracket[0]

    @property
    def upper(self):
        # type: () -> float
        return self.bracket[1]


def default_depth(n_symbols):
    # type: (int) -> int
    """
    Word length used when none is given: 12 up to three maps, 8 up to six,
    otherwise the deepest level with at most ~1.7 million words.
    """
    if n_symbols <= 3:
        return 12
    if n_symbols <= 6:
        return 8
    depth = 1
    while n_symbols ** (depth + 1) <= 1700000:
        depth += 1
    return depth


def bisect(func, lo, hi, tol, increasing):
    # type: (Callable[[float], float], float, float, float, bool) -> float
    """
    Bisection on a bracket known to contain a sign change.

    Parameters
    ----------
    func : Callable[[float], float]
    lo : float
    hi : float
    tol : float
        stop once the bracket is narrower than this
    increasing : bool
        whether `func` goes from negative to positive

    Returns
    -------
    float
        midpoint of the final bracket
    """
    if not tol > 0.0:
        raise InputError("tolerance must be positive")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (func(mid) < 0.0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _block_log_sum(x, n_blocks):
    """log sum exp(x), summed per first-letter block and merged in order."""
    parts = []
    for block in np.array_split(x, n_blocks):
        if len(block) == 0:
            continue
        top = float(block.max())
        if top == float('-inf'):
            continue
        parts.append((top, math.fsum(np.exp(block - top))))
    return log_sum(parts)


def _pressure(table, s):
    # type: (LevelTable, float) -> float
    x = log_svf(table.log_alpha1, table.log_alpha2, s)
    return _block_log_sum(x, table.n_symbols) / table.length


def pressure(ifs, s, k, processes=None):
    # type: (IfsSystem, float, int, Optional[int]) -> float
    """
    Truncated pressure ``(1/k) log sum_{|w|=k} phi^s(w)``.

    Parameters
    ----------
    ifs : IfsSystem
    s : float
        in ``[0, 2]``
    k : int
        at least 1
    processes : Optional[int]

    Returns
    -------
    float
    """
    check_exponent(s)
    if k < 1:
        raise InputError("depth k must be at least 1")
    return _pressure(level_table(ifs, k, processes=processes), s)


def pressure_curve(ifs, ss, k, processes=None):
    # type: (IfsSystem, Iterable[float], int, Optional[int]) -> List[Tuple[float, float]]
    """
    Truncated pressure at each exponent in `ss`, sharing one level table.

    Returns
    -------
    List[Tuple[float, float]]
        ``(s, P_k(s))`` pairs
    """
    ss = list(ss)
    for s in ss:
        check_exponent(s)
    table = level_table(ifs, k, processes=processes)
    return [(s, _pressure(table, s)) for s in ss]


def _sample_pairs(count, rng_seed=0):
    total = count * count
    if total <= PAIR_SAMPLE:
        left, right = np.divmod(np.arange(total), count)
        return left, right
    rng = np.random.default_rng(rng_seed)
    return (rng.integers(0, count, PAIR_SAMPLE),
            rng.integers(0, count, PAIR_SAMPLE))


def _pair_log_alphas(table, left, right):
    linear = np.einsum('wij,wjk->wik', table.linear[left],
                       table.linear[right])
    peak = np.abs(linear).max(axis=(1, 2))
    linear = linear / peak[:, None, None]
    log_scale = table.log_scale[left] + table.log_scale[right] + np.log(peak)
    alpha1, _ = closed_form(linear[:, 0, 0], linear[:, 0, 1],
                             linear[:, 1, 0], linear[:, 1, 1])
    log_alpha1 = np.log(alpha1) + log_scale
    log_det = table.log_det[left] + table.log_det[right]
    return log_alpha1, log_det - log_alpha1


def _heuristic_lower(ifs, table, value, tol, processes=None):
    """
    Root of ``P_k(s) + log kappa(s)`` where ``kappa(s)`` is the smallest
    observed ratio ``phi^s(vw) / (phi^s(v) phi^s(w))``.
    """
    if table.length < 2 or value <= 0.0:
        return value
    half = level_table(ifs, table.length // 2, processes=processes)
    left, right = _sample_pairs(len(half.log_alpha1))
    pair_a1, pair_a2 = _pair_log_alphas(half, left, right)

    def log_kappa(s):
        joint = log_svf(pair_a1, pair_a2, s)
        split = log_svf(half.log_alpha1[left], half.log_alpha2[left], s) + \
            log_svf(half.log_alpha1[right], half.log_alpha2[right], s)
        return min(0.0, float((joint - split).min()))

    def shifted(s):
        return _pressure(table, s) + log_kappa(s)

    if shifted(value) >= 0.0:
        return value
    return min(value, bisect(shifted, 0.0, value, tol, increasing=False))


def affinity_dim(ifs, k=None, tol=DEFAULT_TOLERANCE, processes=None):
    # type: (IfsSystem, Optional[int], float, Optional[int]) -> DimensionEstimate
    """
    Affinity dimension as the root of the depth-k pressure.

    Parameters
    ----------
    ifs : IfsSystem
    k : Optional[int]
        defaults to `default_depth`
    tol : float
    processes : Optional[int]

    Returns
    -------
    DimensionEstimate
        ``bracket[1]`` is the certified upper bound (the root itself);
        ``bracket[0]`` is a heuristic lower bound
    """
    if k is None:
        k = default_depth(ifs.n_symbols)
    if k < 1:
        raise InputError("depth k must be at least 1")
    if not tol > 0.0:
        raise InputError("tolerance must be positive")
    table = level_table(ifs, k, processes=processes)

    def func(s):
        return _pressure(table, s)

    if func(0.0) <= 0.0:
        return DimensionEstimate(0.0, k, (0.0, 0.0), tol, True)
    if func(2.0) > 0.0:
        _logger.warning("pressure is still positive at s = 2; reporting 2")
        return DimensionEstimate(2.0, k, (2.0, 2.0), tol, False)
    value = bisect(func, 0.0, 2.0, tol, increasing=False)
    lower = _heuristic_lower(ifs, table, value, tol, processes)
    _logger.debug("affinity dimension at depth %d: %.9f (heuristic lower "
                  "%.9f)", k, value, lower)
    return DimensionEstimate(value, k, (lower, value), tol, True)


def moment_root(table, weights, q, tol):
    # type: (LevelTable, WeightModel, float, float) -> Tuple[float, bool]
    """
    Root in ``[0, 2]`` of the depth-k moment sum on a prepared level table.

    Returns
    -------
    value : float
    converged : bool
        False when the sum is still negative at s = 2
    """
    log_mass = weights.log_level_masses(table)

    def func(s):
        x = (1.0 - q) * log_svf(table.log_alpha1, table.log_alpha2, s) + \
            q * log_mass
        return _block_log_sum(x, table.n_symbols) / table.length

    if func(0.0) >= 0.0:
        return 0.0, True
    if func(2.0) < 0.0:
        return 2.0, False
    return bisect(func, 0.0, 2.0, tol, increasing=True), True


def lq_exponent(ifs, weights, q, k=None, tol=DEFAULT_TOLERANCE,
                processes=None):
    # type: (IfsSystem, WeightModel, float, Optional[int], float, Optional[int]) -> DimensionEstimate
    """
    Moment exponent ``d(q)``: root in s of
    ``(1/k) log sum_{|w|=k} phi^s(w)^(1-q) mu[w]^q``.

    Parameters
    ----------
    ifs : IfsSystem
    weights : WeightModel
    q : float
        greater than 1
    k : Optional[int]
    tol : float
    processes : Optional[int]

    Returns
    -------
    DimensionEstimate
        the bracket spans the roots at depths k-1 and k
    """
    if not q > 1.0:
        raise InputError("moment exponent needs q > 1 (got %r)" % (q,))
    if k is None:
        k = default_depth(ifs.n_symbols)
    if k < 1:
        raise InputError("depth k must be at least 1")
    weights.check_system(ifs)
    table = level_table(ifs, k, processes=processes)
    value, converged = moment_root(table, weights, q, tol)
    if k >= 2:
        previous, _ = moment_root(
            level_table(ifs, k - 1, processes=processes), weights, q, tol)
    else:
        previous = value
    bracket = (min(value, previous), max(value, previous))
    if not converged:
        _logger.warning("moment sum still decays at s = 2 for q = %g; "
                        "reporting 2", q)
    return DimensionEstimate(value, k, bracket, tol, converged)


def bernoulli_weights(p):
    # type: (Sequence[float]) -> BernoulliWeights
    return BernoulliWeights(p)


def kaenmaki_weights(ifs, d, depth):
    # type: (IfsSystem, float, int) -> KaenmakiApprox
    """
    Depth-normalized Kaenmaki stand-in ``phi^d(w) / sum_{|v|=|w|} phi^d(v)``.

    Parameters
    ----------
    ifs : IfsSystem
    d : float
        in ``(0, 2]``
    depth : int

    Returns
    -------
    KaenmakiApprox
    """
    return KaenmakiApprox(ifs, d, depth)


def quasi_bernoulli_constant(weights, depth, samples=2000, seed=0):
    # type: (WeightModel, int, int, int) -> float
    """
    Empirical quasi-Bernoulli constant.

    Largest observed ``max(r, 1/r)`` with ``r = mu[vw] / (mu[v] mu[w])`` over
    sampled splits ``|v| + |w| <= depth``; a lower estimate of the true
    constant.

    Parameters
    ----------
    weights : WeightModel
    depth : int
        at least 2
    samples : int
    seed : int

    Returns
    -------
    float
        at least 1
    """
    if weights.exactly_multiplicative:
        return 1.0
    if depth < 2:
        raise InputError("splits need depth of at least 2")
    n_symbols = weights.ifs.n_symbols
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        total = int(rng.integers(2, depth + 1))
        cut = int(rng.integers(1, total))
        word = tuple(int(x) for x in rng.integers(0, n_symbols, total))
        v, w = word[:cut], word[cut:]
        ratio = math.log(weights.mass(word)) - \
            math.log(weights.mass(v)) - math.log(weights.mass(w))
        worst = max(worst, abs(ratio))
    return math.exp(worst)
