from __future__ import absolute_import, print_function

import math
from collections import namedtuple

import numpy as np

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *

    GridMeasureBase = NamedTuple('GridMeasure', [
        ('delta', float),
        ('origin', np.ndarray),
        ('cells', np.ndarray),
        ('masses', np.ndarray),
        ('capped', bool),
        ('depth', int),
    ])
    LqSpectrumBase = NamedTuple('LqSpectrum', [
        ('qs', List[float]),
        ('deltas', List[float]),
        ('used', List[bool]),
        ('moments', List[List[float]]),
        ('entropies', List[float]),
        ('slopes', List[float]),
        ('r_squared', List[float]),
    ])
    EnergyStep = NamedTuple('EnergyStep', [
        ('n_outer', int),
        ('n_inner', int),
        ('estimate', float),
        ('stderr', float),
    ])
    EnergyReportBase = NamedTuple('EnergyReport', [
        ('s', float),
        ('q', float),
        ('schedule', List[EnergyStep]),
        ('stability', str),
        ('rejected', int),
        ('rejection_rate', float),
        ('excluded', int),
    ])
    RCurveBase = NamedTuple('RCurve', [
        ('s', float),
        ('q', float),
        ('angles', np.ndarray),
        ('partial', np.ndarray),
    ])
else:
    GridMeasureBase = namedtuple('GridMeasure', [
        'delta', 'origin', 'cells', 'masses', 'capped', 'depth'])
    LqSpectrumBase = namedtuple('LqSpectrum', [
        'qs', 'deltas', 'used', 'moments', 'entropies', 'slopes',
        'r_squared'])
    EnergyStep = namedtuple('EnergyStep', [
        'n_outer', 'n_inner', 'estimate', 'stderr'])
    EnergyReportBase = namedtuple('EnergyReport', [
        's', 'q', 'schedule', 'stability', 'rejected', 'rejection_rate',
        'excluded'])
    RCurveBase = namedtuple('RCurve', ['s', 'q', 'angles', 'partial'])

STABLE = 'Stable'
DIVERGING = 'Diverging'
INCONCLUSIVE = 'Inconclusive'


class GridMeasure(GridMeasureBase):
    """
    A measure binned on the mesh of ``delta``-squares anchored at `origin`.

    `cells` holds the integer coordinates of the occupied squares (square
    ``(i, j)`` covers ``origin + delta * [i, i+1) x [j, j+1)``), sorted, and
    `masses` their positive masses.  `capped` is set when some branch hit
    the depth cap before its cylinders got small enough.
    """
    __slots__ = ()

    @property
    def occupied(self):
        # type: () -> int
        return len(self.masses)

    def total(self):
        # type: () -> float
        return math.fsum(self.masses)

    def as_dict(self):
        # type: () -> Dict[Tuple[int, int], float]
        return {(int(i), int(j)): float(m)
                for (i, j), m in zip(self.cells, self.masses)}


class LqSpectrum(LqSpectrumBase):
    """
    Moment sums per ``(q, delta)`` and the fitted scaling exponent per q.

    ``moments[i][j]`` belongs to ``qs[i]`` and ``deltas[j]``; `entropies`
    holds ``sum mu(Q) log mu(Q)`` per delta, which is what the q = 1 slope
    is fitted to.  Only deltas flagged in `used` enter the fits.
    """
    __slots__ = ()

    def slope(self, q):
        # type: (float) -> float
        return self.slopes[self.qs.index(q)]


class EnergyReport(EnergyReportBase):
    """
    Estimates along the doubling schedule.

    `rejected` counts the coincident sample pairs of the last step and
    `excluded` those among them that no spare point could replace.
    """
    __slots__ = ()

    @property
    def estimate(self):
        # type: () -> float
        """The estimate with the most samples."""
        return self.schedule[-1].estimate


class RCurve(RCurveBase):
    """
    Partial sums of the angular series.

    ``partial[n, j]`` is the sum over words of length at most n at
    ``angles[j]``.
    """
    __slots__ = ()

    @property
    def depth(self):
        # type: () -> int
        return self.partial.shape[0] - 1

    def max_curve(self):
        # type: () -> np.ndarray
        return self.partial.max(axis=1)

    def increments(self):
        # type: () -> np.ndarray
        """Relative growth of the max curve from each level to the next."""
        curve = self.max_curve()
        return np.diff(curve) / curve[:-1]

    def saturated(self, threshold=0.01):
        # type: (float) -> bool
        increments = self.increments()
        return bool(len(increments)) and bool(increments[-1] < threshold)
