"""
Canonical systems with known dimensions, as run configurations.
"""
from __future__ import absolute_import, print_function

from collections import OrderedDict

from affdim.config import RunConfig

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *


def _diag(a, b):
    return ((a, 0.0), (0.0, b))


def _config(maps, probabilities=None, params=None):
    return RunConfig(tuple((tuple(tuple(row) for row in linear),
                            tuple(translation))
                           for linear, translation in maps),
                     None if probabilities is None else tuple(probabilities),
                     params or {})


def lebesgue_square():
    # type: () -> RunConfig
    """Four half-size copies of the unit square; uniform weights."""
    half = _diag(0.5, 0.5)
    return _config([(half, (0.0, 0.0)), (half, (0.5, 0.0)),
                    (half, (0.0, 0.5)), (half, (0.5, 0.5))],
                   [0.25] * 4)


def cantor_corners():
    # type: () -> RunConfig
    """Two third-size copies on the diagonal; dimension log 2 / log 3."""
    third = _diag(1.0 / 3, 1.0 / 3)
    return _config([(third, (0.0, 0.0)), (third, (2.0 / 3, 2.0 / 3))],
                   [0.5, 0.5])


def similarity_thirds():
    # type: () -> RunConfig
    """The middle-thirds Cantor set on the x axis."""
    third = _diag(1.0 / 3, 1.0 / 3)
    return _config([(third, (0.0, 0.0)), (third, (2.0 / 3, 0.0))],
                   [0.5, 0.5])


def diagonal_pair():
    # type: () -> RunConfig
    """Two copies of ``diag(1/2, 1/4)``; affinity dimension exactly 1."""
    squash = _diag(0.5, 0.25)
    return _config([(squash, (0.0, 0.0)), (squash, (0.5, 0.75))],
                   [0.5, 0.5])


def positive_pair():
    # type: () -> RunConfig
    """
    Two strictly positive maps whose projective images of the negative
    quadrant are disjoint, 1-bunched, with affinity dimension below 1/2 and
    well separated pieces.  The Bernoulli vector passes metric bunching at
    q = 2.
    """
    first = ((0.136, 0.17), (0.0085, 0.17))
    second = ((0.15, 0.0075), (0.15, 0.12))
    return _config([(first, (0.0, 0.0)), (second, (0.7, 0.3))],
                   [0.52, 0.48])


def positive_triple():
    # type: () -> RunConfig
    """
    Three strictly positive maps strung along the diagonal, with disjoint
    projective arcs and mixed contraction rates (alpha1 about 0.25, 0.12 and
    0.09).  Affinity dimension about 0.56; the bunching threshold is above
    2.2 for every map.  Sibling pieces sit far enough apart that each cut
    cylinder of a mesh of size 2^-5 or finer lands in a square of its own.
    The Bernoulli vector passes metric bunching at q = 2.
    """
    first = ((0.1189, 0.1468), (0.00567, 0.1888))
    second = ((0.0789, 0.041), (0.06, 0.0656))
    third = ((0.0652, 0.0064), (0.0599, 0.0267))
    return _config([(first, (-9.0, -9.0)), (second, (0.0, 0.0)),
                    (third, (9.0, 9.0))],
                   [0.4, 0.3, 0.3])


def dust_pair():
    # type: () -> RunConfig
    """
    The maps of `positive_pair` shrunk by 2.5e-4: the same projective arcs,
    affinity dimension about 0.07.
    """
    first = ((3.4e-5, 4.25e-5), (2.125e-6, 4.25e-5))
    second = ((3.75e-5, 1.875e-6), (3.75e-5, 3e-5))
    return _config([(first, (0.0, 0.0)), (second, (0.7, 0.3))],
                   [0.52, 0.48])


FIXTURES = OrderedDict([
    ('lebesgue-square', lebesgue_square),
    ('cantor-corners', cantor_corners),
    ('similarity-thirds', similarity_thirds),
    ('diagonal-pair', diagonal_pair),
    ('positive-pair', positive_pair),
    ('positive-triple', positive_triple),
    ('dust-pair', dust_pair),
])  # type: Dict[str, Callable[[], RunConfig]]


def get_fixture(name):
    # type: (str) -> RunConfig
    try:
        factory = FIXTURES[name]
    except KeyError:
        raise KeyError("unknown fixture %r (choose from %s)"
                       % (name, ', '.join(FIXTURES)))
    return factory()
