"""
Affine maps of the plane, their compositions and singular values.

Words are tuples of symbols ``0..N-1``; the word ``(w1, ..., wk)`` stands for
the composition ``T_w1 o ... o T_wk``.  Level tables hold every word of a
fixed length in lexicographic order, so the word with base-N digits
``w1 ... wk`` sits at row ``w1*N**(k-1) + ... + wk``.
"""
from __future__ import absolute_import, print_function

import logging
import math
from collections import namedtuple

import numpy as np

from affdim.errors import (
    BUDGET_ERROR, CONTRACTION_ERROR, EMPTY_WORD_ERROR, SINGULAR_ERROR,
    SYMBOL_ERROR, DomainError, InputError, ResourceError)
from affdim.parallel import ordered_map

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    Word = Tuple[int, ...]

_logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
# compositions longer than this are renormalized at every step
LONG_WORD = 200

# upper bound on the number of words any single enumeration may produce.
# the command line front end overrides it with --max-words
max_words = 2 ** 22


def set_max_words(limit):
    # type: (int) -> int
    global max_words
    max_words = int(limit)
    return max_words


def check_budget(n_symbols, depth, limit=None):
    # type: (int, int, Optional[int]) -> None
    """
    Raise `ResourceError` if ``n_symbols ** depth`` words are too many.

    Parameters
    ----------
    n_symbols : int
    depth : int
    limit : Optional[int]
        defaults to the module-level `max_words`
    """
    limit = max_words if limit is None else limit
    count = n_symbols ** depth
    if count > limit:
        raise ResourceError(BUDGET_ERROR % (count, depth, limit))


def canonical_angle(theta):
    # type: (float) -> float
    """
    Representative of `theta` modulo pi in ``(-pi/2, pi/2]``.
    """
    t = math.fmod(theta + HALF_PI, math.pi)
    if t <= 0.0:
        t += math.pi
    return t - HALF_PI


class Angle(namedtuple('Angle', ['theta'])):
    """A point of the projective line, i.e. a direction modulo pi."""
    __slots__ = ()

    def __new__(cls, theta):
        # type: (float) -> Angle
        return super(Angle, cls).__new__(cls, canonical_angle(float(theta)))

    @property
    def unit(self):
        # type: () -> np.ndarray
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    def __float__(self):
        return self.theta


def as_angle(theta):
    # type: (Union[Angle, float]) -> Angle
    return theta if isinstance(theta, Angle) else Angle(theta)


SingularPair = namedtuple('SingularPair',
                          ['alpha1', 'alpha2', 'major_axis_angle'])

Ball = namedtuple('Ball', ['center', 'radius'])


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def closed_form(a, b, c, d):
    """
    Larger singular value and major axis angle of ``[[a, b], [c, d]]``.

    Works elementwise on arrays.  The matrix is written as a rotation times a
    diagonal times a rotation; both singular values come out as sums and
    differences of two hypotenuses, so the larger one never cancels.
    """
    e = 0.5 * (a + d)
    f = 0.5 * (a - d)
    g = 0.5 * (c + b)
    h = 0.5 * (c - b)
    alpha1 = np.hypot(e, h) + np.hypot(f, g)
    axis = 0.5 * (np.arctan2(h, e) + np.arctan2(g, f))
    return alpha1, axis


def singular_values(matrix):
    # type: (Any) -> SingularPair
    """
    Closed-form singular values of a nonsingular 2x2 matrix.

    The smaller value is recovered as ``|det| / alpha1``.

    Parameters
    ----------
    matrix : array_like
        2x2 real matrix

    Returns
    -------
    SingularPair
    """
    m = np.asarray(matrix, dtype=float).reshape(2, 2)
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    det = a * d - b * c
    if det == 0.0 or not np.isfinite(det):
        raise DomainError(SINGULAR_ERROR)
    alpha1, axis = closed_form(a, b, c, d)
    alpha1 = float(alpha1)
    return SingularPair(alpha1, abs(det) / alpha1,
                        canonical_angle(float(axis)))


class AffineMap(object):
    """
    The affine map ``x -> A x + t`` of the plane.

    The linear part is stored as ``exp(log_scale) * linear`` so that long
    compositions can keep a unit-sized matrix and move the shrinking scale
    into log space.

    Parameters
    ----------
    linear : array_like
        2x2 matrix
    translation : array_like
        2-vector
    """
    __slots__ = ('linear', 'translation', 'log_scale', 'log_det', 'empty')

    def __init__(self, linear, translation):
        # type: (Any, Any) -> None
        self.linear = _frozen(np.reshape(linear, (2, 2)))
        self.translation = _frozen(np.reshape(translation, (2,)))
        self.log_scale = 0.0
        self.empty = False
        det = float(np.linalg.det(self.linear))
        if det == 0.0 or not np.isfinite(det):
            raise DomainError(SINGULAR_ERROR)
        self.log_det = math.log(abs(det))
        alpha1 = self.singular_values().alpha1
        if alpha1 >= 1.0:
            raise DomainError(CONTRACTION_ERROR % alpha1)

    @classmethod
    def _trusted(cls, linear, translation, log_scale=0.0, log_det=0.0,
                 empty=False):
        # type: (Any, Any, float, float, bool) -> AffineMap
        self = cls.__new__(cls)
        self.linear = _frozen(linear)
        self.translation = _frozen(translation)
        self.log_scale = float(log_scale)
        self.log_det = float(log_det)
        self.empty = empty
        return self

    @classmethod
    def identity(cls):
        # type: () -> AffineMap
        """The empty composition, flagged so it is never fed to `svf`."""
        return cls._trusted(np.eye(2), np.zeros(2), empty=True)

    @property
    def matrix(self):
        # type: () -> np.ndarray
        return self.linear * math.exp(self.log_scale)

    def log_singular_values(self):
        # type: () -> Tuple[float, float]
        """
        Returns
        -------
        log_alpha1 : float
        log_alpha2 : float
        """
        m = self.linear
        alpha1, _ = closed_form(m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        log_alpha1 = math.log(float(alpha1)) + self.log_scale
        return log_alpha1, self.log_det - log_alpha1

    def singular_values(self):
        # type: () -> SingularPair
        m = self.linear
        _, axis = closed_form(m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        log_alpha1, log_alpha2 = self.log_singular_values()
        return SingularPair(math.exp(log_alpha1), math.exp(log_alpha2),
                            canonical_angle(float(axis)))

    def compose(self, other):
        # type: (AffineMap) -> AffineMap
        """
        Returns
        -------
        AffineMap
            ``self o other``
        """
        linear = self.linear.dot(other.linear)
        translation = self.translation + self.matrix.dot(other.translation)
        return AffineMap._trusted(
            linear, translation, self.log_scale + other.log_scale,
            self.log_det + other.log_det, empty=self.empty and other.empty)

    def __call__(self, point):
        # type: (Any) -> np.ndarray
        return self.matrix.dot(np.asarray(point, dtype=float)) + \
            self.translation

    def __repr__(self):
        return 'AffineMap(linear=%r, translation=%r)' % (
            self.matrix.tolist(), self.translation.tolist())


class IfsSystem(object):
    """
    An ordered family of contracting affine maps, indexed by ``0..N-1``.

    Parameters
    ----------
    maps : Iterable[AffineMap]
    """

    def __init__(self, maps):
        # type: (Iterable[AffineMap]) -> None
        maps = tuple(maps)
        if not maps:
            raise InputError("an iterated function system needs at least "
                             "one map")
        for m in maps:
            if m.empty:
                raise InputError("the empty composition is not a map of "
                                 "the system")
        self.maps = maps
        self.linear = _frozen([m.matrix for m in maps])
        self.translations = _frozen([m.translation for m in maps])
        self.log_dets = _frozen([m.log_det for m in maps])

    @classmethod
    def from_entries(cls, linears, translations):
        # type: (Sequence[Any], Sequence[Any]) -> IfsSystem
        """
        Parameters
        ----------
        linears : Sequence[array_like]
            one 2x2 matrix per map
        translations : Sequence[array_like]
            one 2-vector per map

        Returns
        -------
        IfsSystem
        """
        return cls(AffineMap(a, t) for a, t in zip(linears, translations))

    @property
    def n_symbols(self):
        # type: () -> int
        return len(self.maps)

    def __len__(self):
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    def __getitem__(self, symbol):
        # type: (int) -> AffineMap
        return self.maps[symbol]

    def check_word(self, word):
        # type: (Iterable[int]) -> Word
        """
        Parameters
        ----------
        word : Iterable[int]

        Returns
        -------
        Word
            the word as a tuple of ints
        """
        word = tuple(int(symbol) for symbol in word)
        for symbol in word:
            if not 0 <= symbol < len(self.maps):
                raise InputError(SYMBOL_ERROR % (symbol, len(self.maps)))
        return word

    def singular_values(self):
        # type: () -> List[SingularPair]
        return [m.singular_values() for m in self.maps]

    def __repr__(self):
        return 'IfsSystem(%r)' % (list(self.maps),)


def compose(ifs, word):
    # type: (IfsSystem, Iterable[int]) -> AffineMap
    """
    Compose the maps named by `word`, leftmost outermost.

    Parameters
    ----------
    ifs : IfsSystem
    word : Iterable[int]

    Returns
    -------
    AffineMap
        the identity, flagged as empty, for the empty word
    """
    word = ifs.check_word(word)
    if not word:
        return AffineMap.identity()
    renormalize = len(word) > LONG_WORD
    linear = np.eye(2)
    translation = np.zeros(2)
    log_scale = 0.0
    log_det = 0.0
    for symbol in word:
        translation = translation + \
            math.exp(log_scale) * linear.dot(ifs.translations[symbol])
        linear = linear.dot(ifs.linear[symbol])
        log_det += ifs.log_dets[symbol]
        if renormalize:
            peak = float(np.abs(linear).max())
            linear = linear / peak
            log_scale += math.log(peak)
    return AffineMap._trusted(linear, translation, log_scale, log_det)


def log_svf(log_alpha1, log_alpha2, s):
    """
    Logarithm of the singular value function, elementwise.

    Parameters
    ----------
    log_alpha1 : Union[float, np.ndarray]
    log_alpha2 : Union[float, np.ndarray]
    s : float

    Returns
    -------
    Union[float, np.ndarray]
    """
    if s <= 1.0:
        return s * log_alpha1
    return log_alpha1 + (s - 1.0) * log_alpha2


def check_exponent(s):
    if not 0.0 <= s <= 2.0:
        raise InputError("exponent s = %r outside [0, 2]" % (s,))


def svf(ifs, word, s):
    # type: (IfsSystem, Iterable[int], float) -> float
    """
    Singular value function of the composition named by `word`.

    Parameters
    ----------
    ifs : IfsSystem
    word : Iterable[int]
        nonempty
    s : float
        in ``[0, 2]``

    Returns
    -------
    float
    """
    check_exponent(s)
    composed = compose(ifs, word)
    if composed.empty:
        raise InputError(EMPTY_WORD_ERROR)
    log_alpha1, log_alpha2 = composed.log_singular_values()
    return math.exp(log_svf(log_alpha1, log_alpha2, s))


def contraction_at_angle(ifs, word, theta):
    # type: (IfsSystem, Iterable[int], Union[Angle, float]) -> float
    """
    Factor by which the composition shrinks segments pointing along `theta`.

    Parameters
    ----------
    ifs : IfsSystem
    word : Iterable[int]
    theta : Union[Angle, float]

    Returns
    -------
    float
    """
    composed = compose(ifs, word)
    image = composed.linear.dot(as_angle(theta).unit)
    return math.exp(composed.log_scale) * math.hypot(image[0], image[1])


def invariant_ball(ifs):
    # type: (IfsSystem) -> Ball
    """
    A closed ball centred at the origin mapped into itself by every map.

    Returns
    -------
    Ball
        ``radius = max |t_i| / (1 - max alpha1(i))``
    """
    top = max(pair.alpha1 for pair in ifs.singular_values())
    if top >= 1.0:
        raise DomainError(CONTRACTION_ERROR % top)
    reach = float(np.hypot(ifs.translations[:, 0],
                           ifs.translations[:, 1]).max())
    return Ball(np.zeros(2), reach / (1.0 - top))


def cylinder_point(ifs, word):
    # type: (IfsSystem, Iterable[int]) -> np.ndarray
    """
    Image of the invariant-ball centre under the composition of `word`.

    Every point of the cylinder set lies within ``alpha1(word) * R`` of it.
    """
    composed = compose(ifs, word)
    if composed.empty:
        raise InputError("cylinder points need a nonempty word")
    return composed(invariant_ball(ifs).center)


LevelTable = namedtuple('LevelTable', [
    'length',       # word length k
    'n_symbols',
    'linear',       # (M, 2, 2) unit-sized linear parts
    'log_scale',    # (M,) log of the factor removed from each linear part
    'translation',  # (M, 2)
    'log_det',      # (M,)
    'log_alpha1',   # (M,)
    'log_alpha2',   # (M,)
])


def _renormalize(linear, log_scale):
    peak = np.abs(linear).max(axis=(1, 2))
    return linear / peak[:, None, None], log_scale + np.log(peak)


def extend_arrays(ifs, linear, log_scale, translation, log_det):
    """
    Append every symbol to every word given as parallel arrays.

    Children of one word come out consecutively, in symbol order.
    """
    n = ifs.n_symbols
    m = linear.shape[0]
    scale = np.exp(log_scale)
    new_translation = translation[:, None, :] + \
        np.einsum('wij,sj->wsi', linear, ifs.translations) * \
        scale[:, None, None]
    new_linear = np.einsum('wij,sjk->wsik', linear, ifs.linear)
    new_linear, new_log_scale = _renormalize(
        new_linear.reshape(m * n, 2, 2), np.repeat(log_scale, n))
    new_log_det = (log_det[:, None] + ifs.log_dets[None, :]).reshape(m * n)
    return (new_linear, new_log_scale, new_translation.reshape(m * n, 2),
            new_log_det)


def log_alphas(linear, log_scale, log_det):
    """Log singular values of stacked, renormalized linear parts."""
    alpha1, _ = closed_form(linear[:, 0, 0], linear[:, 0, 1],
                             linear[:, 1, 0], linear[:, 1, 1])
    log_alpha1 = np.log(alpha1) + log_scale
    return log_alpha1, log_det - log_alpha1


def _finish(ifs, length, linear, log_scale, translation, log_det):
    log_alpha1, log_alpha2 = log_alphas(linear, log_scale, log_det)
    return LevelTable(length, ifs.n_symbols, linear, log_scale, translation,
                      log_det, log_alpha1, log_alpha2)


def root_table(ifs):
    # type: (IfsSystem) -> LevelTable
    """The level table holding only the empty word."""
    return LevelTable(0, ifs.n_symbols, np.eye(2)[None], np.zeros(1),
                      np.zeros((1, 2)), np.zeros(1), np.zeros(1), np.zeros(1))


def extend_table(ifs, table):
    # type: (IfsSystem, LevelTable) -> LevelTable
    """
    Append every symbol to every word of `table`.

    Returns
    -------
    LevelTable
        the table one level deeper, still in lexicographic order
    """
    arrays = extend_arrays(ifs, table.linear, table.log_scale,
                            table.translation, table.log_det)
    return _finish(ifs, table.length + 1, *arrays)


def _subtree(task):
    ifs, length, first = task
    linear, log_scale = _renormalize(ifs.linear[first:first + 1].copy(),
                                     np.zeros(1))
    translation = ifs.translations[first:first + 1].copy()
    log_det = ifs.log_dets[first:first + 1].copy()
    for _ in range(length - 1):
        linear, log_scale, translation, log_det = extend_arrays(
            ifs, linear, log_scale, translation, log_det)
    return linear, log_scale, translation, log_det


def level_table(ifs, length, processes=None, limit=None):
    # type: (IfsSystem, int, Optional[int], Optional[int]) -> LevelTable
    """
    Enumerate every word of the given length.

    The work is split into one subtree per first letter.

    Parameters
    ----------
    ifs : IfsSystem
    length : int
    processes : Optional[int]
    limit : Optional[int]
        word budget, defaults to `max_words`

    Returns
    -------
    LevelTable
    """
    if length < 0:
        raise InputError("word length must be non-negative")
    if length == 0:
        return root_table(ifs)
    check_budget(ifs.n_symbols, length, limit)
    parts = ordered_map(_subtree, [(ifs, length, first)
                                   for first in range(ifs.n_symbols)],
                        processes=processes)
    arrays = [np.concatenate(column) for column in zip(*parts)]
    return _finish(ifs, length, *arrays)


def iter_tables(ifs, depth, limit=None):
    # type: (IfsSystem, int, Optional[int]) -> Iterator[LevelTable]
    """
    Yield the level tables for lengths ``0..depth`` in turn.
    """
    check_budget(ifs.n_symbols, depth, limit)
    table = root_table(ifs)
    yield table
    for _ in range(depth):
        table = extend_table(ifs, table)
        yield table


def word_from_index(index, n_symbols, length):
    # type: (int, int, int) -> Word
    digits = []
    for _ in range(length):
        index, digit = divmod(index, n_symbols)
        digits.append(digit)
    return tuple(reversed(digits))


def index_of_word(word, n_symbols):
    # type: (Iterable[int], int) -> int
    index = 0
    for symbol in word:
        index = index * n_symbols + symbol
    return index
