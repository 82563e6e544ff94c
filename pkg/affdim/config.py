"""
Run configurations: the system, an optional Bernoulli vector and per-command
parameters, stored as JSON::

    {
      "maps": [{"linear": [[a, b], [c, d]], "translation": [tx, ty]}, ...],
      "probabilities": [p1, ...],
      "params": {"depth": 12, "lq": {"qs": [0, 1, 2]}}
    }

Top-level ``params`` apply to every command; a nested object named after a
command overrides them for that command only.
"""
from __future__ import absolute_import, print_function

import io
import json
import logging
import math
from collections import namedtuple

from affdim.errors import AffdimError, ConfigError
from affdim.ifs import AffineMap, IfsSystem
from affdim.weights import BernoulliWeights

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *

_logger = logging.getLogger(__name__)

COMMANDS = ('check', 'dim', 'lq', 'diag', 'render', 'fixtures')

# parameter name -> kind
PARAM_KINDS = {
    'depth': 'int',
    'tol': 'float',
    'seed': 'int',
    'workers': 'int',
    'max_words': 'int',
    'weights': 'string',
    'format': 'string',
    'separation_depth': 'int',
    'gamma_depth': 'int',
    'qs': 'floats',
    'delta_schedule': 'floats',
    's_values': 'strings',
    'r_depth': 'int',
    'angles': 'int',
    'n_outer': 'int',
    'n_inner': 'int',
    'doublings': 'int',
    'truncation': 'float',
    'delta': 'float',
}


class ConfigLoggingAdapter(logging.LoggerAdapter):
    """Prefixes messages with the config file and the offending field."""
    def process(self, msg, kwargs):
        field = kwargs.get('extra', {}).get('field', '')
        if field:
            return u'%s: %s: %s' % (self.extra['file'], field, msg), kwargs
        return u'%s: %s' % (self.extra['file'], msg), kwargs


def _number(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number, got %r" % (value,), field)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("expected a finite number, got %r" % (value,),
                          field)
    return value


def _vector(value, length, field):
    if not isinstance(value, list) or len(value) != length:
        raise ConfigError("expected a list of %d numbers" % length, field)
    return tuple(_number(x, '%s[%d]' % (field, i))
                 for i, x in enumerate(value))


def _coerce(value, kind, field):
    if kind == 'int':
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("expected an integer, got %r" % (value,), field)
        return value
    if kind == 'float':
        return _number(value, field)
    if kind == 'string':
        if not isinstance(value, str):
            raise ConfigError("expected a string, got %r" % (value,), field)
        return value
    if not isinstance(value, list):
        raise ConfigError("expected a list, got %r" % (value,), field)
    if kind == 'floats':
        return [_number(x, '%s[%d]' % (field, i))
                for i, x in enumerate(value)]
    return [str(x) for x in value]


def _params(data, field, logger, nested=True):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", field)
    params = {}
    for key in sorted(data):
        path = '%s.%s' % (field, key)
        if nested and key in COMMANDS:
            params[key] = _params(data[key], path, logger, nested=False)
        elif key in PARAM_KINDS:
            params[key] = _coerce(data[key], PARAM_KINDS[key], path)
        else:
            logger.warning("unknown parameter ignored", extra={'field': path})
    return params


class RunConfig(namedtuple('RunConfig', ['maps', 'probabilities', 'params'])):
    """
    Attributes
    ----------
    maps : Tuple[Tuple[Tuple[Tuple[float, float], Tuple[float, float]], Tuple[float, float]], ...]
        ``((linear, translation), ...)`` with rows of the linear part as
        tuples
    probabilities : Optional[Tuple[float, ...]]
    params : Dict[str, Any]
    """
    __slots__ = ()

    @classmethod
    def from_dict(cls, data, source='<config>'):
        # type: (Any, str) -> RunConfig
        """
        Validate a decoded JSON document.

        Raises
        ------
        ConfigError
            naming the offending field
        """
        logger = ConfigLoggingAdapter(_logger, {'file': source})
        if not isinstance(data, dict):
            raise ConfigError("expected a JSON object at the top level")
        for key in sorted(data):
            if key not in ('maps', 'probabilities', 'params'):
                logger.warning("unknown key ignored", extra={'field': key})
        raw_maps = data.get('maps')
        if not isinstance(raw_maps, list) or not raw_maps:
            raise ConfigError("expected a non-empty list of maps", 'maps')
        maps = []
        for i, raw in enumerate(raw_maps):
            field = 'maps[%d]' % i
            if not isinstance(raw, dict):
                raise ConfigError("expected an object with 'linear' and "
                                  "'translation'", field)
            rows = raw.get('linear')
            if not isinstance(rows, list) or len(rows) != 2:
                raise ConfigError("expected a 2x2 matrix", field + '.linear')
            linear = tuple(_vector(row, 2, '%s.linear[%d]' % (field, j))
                           for j, row in enumerate(rows))
            translation = _vector(raw.get('translation'), 2,
                                  field + '.translation')
            try:
                AffineMap(linear, translation)
            except AffdimError as err:
                raise ConfigError(str(err), field + '.linear')
            maps.append((linear, translation))

        probabilities = data.get('probabilities')
        if probabilities is not None:
            probabilities = _vector(probabilities, len(maps), 'probabilities')
            try:
                BernoulliWeights(probabilities)
            except AffdimError as err:
                raise ConfigError(str(err), 'probabilities')

        params = _params(data.get('params', {}), 'params', logger)
        return cls(tuple(maps), probabilities, params)

    @classmethod
    def loads(cls, text, source='<config>'):
        # type: (str, str) -> RunConfig
        try:
            data = json.loads(text)
        except ValueError as err:
            raise ConfigError("invalid JSON (%s)" % err,
                              'line %d' % getattr(err, 'lineno', 0))
        return cls.from_dict(data, source)

    @classmethod
    def load(cls, path):
        # type: (str) -> RunConfig
        with io.open(path, encoding='utf-8') as f:
            return cls.loads(f.read(), path)

    def to_dict(self):
        # type: () -> Dict[str, Any]
        data = {
            'maps': [{'linear': [list(row) for row in linear],
                      'translation': list(translation)}
                     for linear, translation in self.maps],
        }  # type: Dict[str, Any]
        if self.probabilities is not None:
            data['probabilities'] = list(self.probabilities)
        if self.params:
            data['params'] = self.params
        return data

    def dumps(self):
        # type: () -> str
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n'

    def dump(self, path):
        # type: (str) -> None
        with io.open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(self.dumps())

    def system(self):
        # type: () -> IfsSystem
        return IfsSystem.from_entries([linear for linear, _ in self.maps],
                                      [t for _, t in self.maps])

    def params_for(self, command):
        # type: (str) -> Dict[str, Any]
        """Flat parameters with the command's own block laid over them."""
        params = dict((key, value) for key, value in self.params.items()
                      if key not in COMMANDS)
        params.update(self.params.get(command, {}))
        return params
