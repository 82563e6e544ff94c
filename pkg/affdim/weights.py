"""
Cylinder masses ``mu[w]`` for the measures the estimators work with.

Two families are provided: Bernoulli (self-affine) measures, whose masses
multiply exactly along concatenation, and a depth-normalized stand-in for the
Kaenmaki measure, ``mu[w] = phi^d(w) / sum_{|v|=|w|} phi^d(v)``.  The latter is
only normalized per word length; children of a word need not add up to their
parent, so anything that walks down the word tree renormalizes the children
(see `WeightModel.child_log_weights`).
"""
from __future__ import absolute_import, print_function

import logging
import math

import numpy as np

from affdim.errors import InputError
from affdim.ifs import compose, iter_tables, log_svf

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.ifs import IfsSystem, LevelTable

_logger = logging.getLogger(__name__)

PROBABILITY_ERROR = "probabilities must be positive and sum to 1 (got %r)"
SYSTEM_ERROR = "Kaenmaki weights built for a different system"


def _log_normalize(log_weights):
    top = float(np.max(log_weights))
    return log_weights - (top + math.log(math.fsum(
        np.exp(log_weights - top))))


class WeightModel(object):
    """
    Base class for cylinder-mass assignments.
    """
    kind = None  # type: str
    # masses multiply exactly along concatenation
    exactly_multiplicative = False

    def mass(self, word):
        # type: (Sequence[int]) -> float
        raise NotImplementedError

    def log_level_masses(self, table):
        # type: (LevelTable) -> np.ndarray
        """
        Log masses of every word in `table`, in the table's order.
        """
        raise NotImplementedError

    def level_masses(self, table):
        # type: (LevelTable) -> np.ndarray
        return np.exp(self.log_level_masses(table))

    def child_log_weights(self, parent_log_weight, symbol, log_alpha1,
                          log_alpha2):
        """
        Unnormalized log weight of the child ``w i`` of a word ``w``.

        Weights of sibling children, renormalized, give the probabilities of
        stepping from a word to each child; weights of a prefix-free set of
        words, renormalized, give their masses.

        Parameters
        ----------
        parent_log_weight : np.ndarray
            weight of the parent word as returned by an earlier call (0 for
            the empty word)
        symbol : np.ndarray
            the appended symbol
        log_alpha1 : np.ndarray
            log singular values of the child word
        log_alpha2 : np.ndarray

        Returns
        -------
        np.ndarray
        """
        raise NotImplementedError

    def probabilities(self):
        # type: () -> Optional[List[float]]
        """The Bernoulli probability vector, or None for other models."""
        return None

    def check_system(self, ifs):
        # type: (IfsSystem) -> None
        """Raise `InputError` unless the masses are defined for `ifs`."""


class BernoulliWeights(WeightModel):
    """
    Product measure ``mu[w] = p(w_1) ... p(w_k)``.

    Parameters
    ----------
    p : Sequence[float]
        one positive probability per symbol, summing to 1
    """
    kind = 'bernoulli'
    exactly_multiplicative = True

    def __init__(self, p):
        # type: (Sequence[float]) -> None
        p = [float(x) for x in p]
        if not p or any(not x > 0.0 for x in p) or \
                abs(math.fsum(p) - 1.0) > 1e-12:
            raise InputError(PROBABILITY_ERROR % (p,))
        self.p = tuple(p)
        self._p = np.array(p)
        self._log_p = np.log(self._p)

    def _check_symbols(self, n_symbols):
        if len(self.p) != n_symbols:
            raise InputError("%d probabilities for a system of %d maps"
                             % (len(self.p), n_symbols))

    def check_system(self, ifs):
        self._check_symbols(ifs.n_symbols)

    def mass(self, word):
        # type: (Sequence[int]) -> float
        result = 1.0
        for symbol in word:
            if not 0 <= symbol < len(self.p):
                raise InputError("symbol %r has no probability" % (symbol,))
            result *= self.p[symbol]
        return result

    def log_level_masses(self, table):
        # type: (LevelTable) -> np.ndarray
        self._check_symbols(table.n_symbols)
        log_masses = np.zeros(1)
        for _ in range(table.length):
            log_masses = (log_masses[:, None] + self._log_p[None, :]).ravel()
        return log_masses

    def child_log_weights(self, parent_log_weight, symbol, log_alpha1,
                          log_alpha2):
        return parent_log_weight + self._log_p[symbol]

    def probabilities(self):
        return list(self.p)

    def __repr__(self):
        return 'BernoulliWeights(%r)' % (list(self.p),)


class KaenmakiApprox(WeightModel):
    """
    Per-length normalized singular value function masses.

    Parameters
    ----------
    ifs : IfsSystem
    d : float
        exponent, normally the affinity dimension at the same depth
    depth : int
        longest word length for which `mass` is available
    """
    kind = 'kaenmaki'

    def __init__(self, ifs, d, depth):
        # type: (IfsSystem, float, int) -> None
        if not 0.0 < d <= 2.0:
            raise InputError("Kaenmaki exponent d = %r outside (0, 2]" % (d,))
        self.ifs = ifs
        self.d = float(d)
        self.depth = int(depth)
        # log of sum_{|w|=k} phi^d(w) for k = 0..depth
        self.log_norms = []  # type: List[float]
        for table in iter_tables(ifs, self.depth):
            x = log_svf(table.log_alpha1, table.log_alpha2, self.d)
            top = float(np.max(x))
            self.log_norms.append(top + math.log(math.fsum(np.exp(x - top))))

    def mass(self, word):
        # type: (Sequence[int]) -> float
        word = self.ifs.check_word(word)
        if len(word) > self.depth:
            raise InputError("word of length %d is deeper than the "
                             "normalization table (%d)"
                             % (len(word), self.depth))
        if not word:
            return 1.0
        log_alpha1, log_alpha2 = compose(self.ifs, word).log_singular_values()
        return math.exp(log_svf(log_alpha1, log_alpha2, self.d) -
                        self.log_norms[len(word)])

    def log_level_masses(self, table):
        # type: (LevelTable) -> np.ndarray
        if table.n_symbols != self.ifs.n_symbols:
            raise InputError(SYSTEM_ERROR)
        return _log_normalize(log_svf(table.log_alpha1, table.log_alpha2,
                                      self.d))

    def child_log_weights(self, parent_log_weight, symbol, log_alpha1,
                          log_alpha2):
        return log_svf(log_alpha1, log_alpha2, self.d)

    def check_system(self, ifs):
        # the masses only depend on the linear parts
        if ifs is not self.ifs and (
                ifs.n_symbols != self.ifs.n_symbols or
                not np.array_equal(ifs.linear, self.ifs.linear)):
            raise InputError(SYSTEM_ERROR)

    def __repr__(self):
        return 'KaenmakiApprox(d=%r, depth=%r)' % (self.d, self.depth)
