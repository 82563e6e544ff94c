"""Dimension theory and box-counting estimates for planar self-affine sets."""

from __future__ import absolute_import, print_function

import logging
import optparse
import os
import sys
from collections import OrderedDict
from configparser import ConfigParser, NoOptionError, NoSectionError
from fractions import Fraction

import affdim.ifs
import affdim.parallel
from affdim import __version__
from affdim.conditions import FAILS, HOLDS, check_conditions
from affdim.config import COMMANDS, RunConfig
from affdim.dimension import (
    affinity_dim, kaenmaki_weights, lq_exponent, pressure_curve)
from affdim.errors import (
    EXIT_FAILED, EXIT_IO, EXIT_OK, EXIT_RESOURCE, EXIT_UNDETERMINED,
    EXIT_USAGE, DomainError, EstimationError, InputError, ResourceError)
from affdim.estimators.diagnostic import r_diagnostic
from affdim.estimators.energy import DEFAULT_TRUNCATION, energy_mc
from affdim.estimators.grid import geometric_deltas, lq_spectrum, rasterize
from affdim.fixtures import FIXTURES, get_fixture
from affdim.output import (
    ENERGY_HEADER, FORMATS, GRID_HEADER, MOMENT_HEADER, RCURVE_HEADER,
    SPECTRUM_HEADER, condition_rows, energy_rows, grid_rows, moment_rows,
    open_output, rcurve_rows, spectrum_rows, write_csv, write_grid_png,
    write_json, write_rows)
from affdim.weights import BernoulliWeights

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.ifs import IfsSystem
    from affdim.weights import WeightModel

_logger = logging.getLogger('affdim.main')

SETTINGS_SECTION = 'affdim'
WEIGHT_MODELS = ('auto', 'bernoulli', 'kaenmaki')

DIM_HEADER = ('q', 'dq_value', 'depth', 'bracket_lo', 'bracket_hi')
PRESSURE_HEADER = ('s', 'pressure')
DIAG_HEADER = ('s', 'q', 'r_depth', 'r_max', 'r_increment', 'r_saturated',
               'energy', 'energy_stderr', 'stability', 'rejection_rate',
               'excluded')
KEY_VALUE_HEADER = ('key', 'value')

OUTCOME_CODES = {
    HOLDS: EXIT_OK,
    FAILS: EXIT_FAILED,
}

USAGE = """affdim COMMAND [options]

commands:
  check     verify the hypotheses of the dimension formulas
  dim       affinity dimension and moment exponents d(q)
  lq        box-counting L^q spectrum against the predicted exponents
  diag      angular series and energy integral diagnostics
  render    rasterized measure as an image and a cell table
  fixtures  write the canonical example systems as JSON

Use "affdim COMMAND --help" for the options of one command."""


class _OptionParser(optparse.OptionParser):
    def error(self, msg):
        raise InputError(msg)


def apply_config(keys, options, path=None, command=None):
    # type: (Any, optparse.Values, Optional[str], Optional[str]) -> None
    """
    Read setup.cfg from path or current working directory and apply it to the
    parsed options

    Options already present on `options` are left alone.  A section named
    ``[affdim:COMMAND]`` takes precedence over ``[affdim]``.

    Parameters
    ----------
    keys
    options : optparse.Values
        parsed options
    path : Optional[str]
        an ini file, or a directory holding setup.cfg
    command : Optional[str]
    """
    if not path:
        path = os.getcwd()
    if os.path.isdir(path):
        config_file = os.path.join(path, 'setup.cfg')
    else:
        config_file = path

    parser = ConfigParser()
    parser.read(config_file)
    sections = [SETTINGS_SECTION]
    if command:
        sections.insert(0, '%s:%s' % (SETTINGS_SECTION, command))

    def addopt(key, typ, default):
        if hasattr(options, key):
            return

        methname = 'get'
        if typ not in ('string', 'choice'):
            methname += typ

        method = getattr(parser, methname)

        val = default
        for section in sections:
            try:
                val = method(section, key)
            except (NoSectionError, NoOptionError):
                continue
            except ValueError as err:
                raise InputError("%s: [%s] %s: %s"
                                 % (config_file, section, key, err))
            break
        setattr(options, key, val)

    for key, typ, default in keys:
        addopt(key, typ, default)


def apply_params(options, params):
    # type: (optparse.Values, Dict[str, Any]) -> None
    """Fill options not given on the command line from the JSON params."""
    for key, value in params.items():
        if not hasattr(options, key):
            setattr(options, key, value)


def _get_options_data(parser):
    defaults = parser.get_default_values().__dict__
    keys = []
    for opt in parser.option_list:
        if opt.dest in ('config', 'settings') or opt.action == 'version':
            continue
        opttype = opt.type
        if opttype is None:
            if opt.action in ['store_true', 'store_false']:
                opttype = 'boolean'
            elif opt.action in ['help', 'append']:
                continue
            else:
                raise TypeError(opt.action)
        keys.append((opt.dest, opttype, defaults[opt.dest]))
    return keys


def _make_parser(command):
    # type: (str) -> optparse.OptionParser
    parser = _OptionParser(usage="affdim %s [options]%s"
                           % (command, ' [NAME ...]'
                              if command == 'fixtures' else ''),
                           description=__doc__,
                           version="affdim {}".format(__version__))
    parser.add_option("-c", "--config", action="store", type="str",
                      default=None, help="JSON file describing the system")
    parser.add_option("--settings", action="store", type="str",
                      default=None, help="Read settings from the specified "
                      "ini-style configuration file or directory (defaults "
                      "to `./setup.cfg')")
    parser.add_option("-o", "--out", action="store", type="str",
                      default=None, help="Directory for output files")
    parser.add_option("-v", "--verbose", action="store_true", default=False,
                      help="More verbose logging")
    if command == 'fixtures':
        return parser

    parser.add_option("--depth", action="store", type="int", default=None,
                      help="Word length of the truncated sums (defaults to "
                      "12 for up to three maps, fewer for more)")
    parser.add_option("--tol", action="store", type="float", default=1e-6,
                      help="Root-finding tolerance")
    parser.add_option("--seed", action="store", type="int", default=0,
                      help="Seed for the randomized estimators")
    parser.add_option("-j", "--workers", action="store", type="int",
                      default=1, help="Number of concurrent processes to use")
    parser.add_option("--max-words", action="store", type="int",
                      default=2 ** 22, help="Largest number of words any "
                      "single enumeration may produce")
    parser.add_option("-f", "--format", action="store", type="choice",
                      choices=list(FORMATS), default='csv',
                      help="Format of the report written to stdout")

    if command == 'check':
        parser.add_option("--separation-depth", action="store", type="int",
                          default=6, help="Word length of the cylinder "
                          "separation check")
        parser.add_option("--gamma-depth", action="store", type="int",
                          default=10, help="Deepest level of the projective "
                          "overlap count")
        return parser

    parser.add_option("--weights", action="store", type="choice",
                      choices=list(WEIGHT_MODELS), default='auto',
                      help="Measure to use: the Bernoulli vector of the "
                      "config, the Kaenmaki stand-in, or `auto' (Bernoulli "
                      "when the config has probabilities)")
    if command == 'dim':
        parser.add_option("--qs", action="store", type="str",
                          default="2,3,4", help="Moment orders, all above 1")
        parser.add_option("--s-values", action="store", type="str",
                          default="", help="Exponents at which to tabulate "
                          "the pressure (written to pressure.csv)")
    elif command == 'lq':
        parser.add_option("--qs", action="store", type="str",
                          default="0,1,2", help="Moment orders in [0, 8]")
        parser.add_option("--delta-schedule", action="store", type="str",
                          default="0.0625,0.5,7", help="Mesh sizes as "
                          "FIRST,RATIO,COUNT")
    elif command == 'diag':
        parser.add_option("--s-values", action="store", type="str",
                          default="d-0.1,d+0.2", help="Exponents; `d' stands "
                          "for the affinity dimension, as in `d-0.1'")
        parser.add_option("--qs", action="store", type="str", default="2",
                          help="Moment orders, at least 2")
        parser.add_option("--r-depth", action="store", type="int",
                          default=10, help="Longest word in the angular "
                          "series")
        parser.add_option("--angles", action="store", type="int", default=64,
                          help="Number of directions in the angular series")
        parser.add_option("--n-outer", action="store", type="int",
                          default=256, help="Initial outer sample size")
        parser.add_option("--n-inner", action="store", type="int",
                          default=256, help="Initial inner sample size")
        parser.add_option("--doublings", action="store", type="int",
                          default=4, help="Number of sample size doublings")
        parser.add_option("--truncation", action="store", type="float",
                          default=DEFAULT_TRUNCATION, help="Expected number "
                          "of coincident sample pairs per step; sets the "
                          "mass of the cylinders the samples stop at")
    elif command == 'render':
        parser.add_option("--delta", action="store", type="str",
                          default="1/256", help="Mesh size, e.g. 1/256")
    return parser


def _floats(value, name):
    # type: (Any, str) -> List[float]
    if isinstance(value, (list, tuple)):
        return [float(x) for x in value]
    try:
        return [float(Fraction(x.strip())) for x in str(value).split(',')
                if x.strip()]
    except ValueError:
        raise InputError("%s: expected comma separated numbers, got %r"
                         % (name, value))


def _number(value, name):
    # type: (Any, str) -> float
    values = _floats([value] if isinstance(value, (int, float)) else value,
                     name)
    if len(values) != 1:
        raise InputError("%s: expected one number, got %r" % (name, value))
    return values[0]


def parse_s_values(value, d):
    # type: (Any, float) -> List[float]
    """
    Exponents given as numbers or relative to the affinity dimension:
    ``d``, ``d-0.1``, ``d+0.2``.
    """
    if isinstance(value, (list, tuple)):
        tokens = [str(x) for x in value]
    else:
        tokens = [x.strip() for x in str(value).split(',') if x.strip()]
    result = []
    for token in tokens:
        try:
            if token.startswith('d'):
                offset = token[1:].replace(' ', '')
                result.append(d + (float(offset) if offset else 0.0))
            else:
                result.append(float(token))
        except ValueError:
            raise InputError("s-values: cannot read %r" % (token,))
    return result


class _Report(object):
    """Rows for stdout, written even when a command stops early."""
    def __init__(self, header, flat=False):
        self.header = header
        self.flat = flat
        self.rows = []  # type: List[Sequence[Any]]
        self.partial = False

    def write(self, stream, fmt):
        if self.flat and fmt == 'json':
            data = OrderedDict(self.rows)
            if self.partial:
                data['partial'] = True
            write_json(stream, data)
        else:
            write_rows(stream, fmt, self.header, self.rows, self.partial)


def _write_file(out, name, header, rows):
    with open_output(os.path.join(out, name)) as f:
        write_csv(f, header, rows)


def _make_out(out):
    if out and not os.path.isdir(out):
        os.makedirs(out)


def _weights(options, config, ifs):
    # type: (optparse.Values, RunConfig, IfsSystem) -> Tuple[WeightModel, Any]
    """The requested measure and the affinity dimension estimate."""
    estimate = affinity_dim(ifs, options.depth, options.tol)
    model = options.weights
    if model == 'auto':
        model = 'kaenmaki' if config.probabilities is None else 'bernoulli'
    if model == 'kaenmaki':
        if not estimate.upper > 0.0:
            raise DomainError("affinity dimension is 0; the Kaenmaki measure "
                              "is undefined")
        return kaenmaki_weights(ifs, estimate.upper, estimate.depth), estimate
    if config.probabilities is None:
        _logger.info("no probabilities given; using uniform weights")
        return BernoulliWeights([1.0 / ifs.n_symbols] * ifs.n_symbols), \
            estimate
    return BernoulliWeights(config.probabilities), estimate


def cmd_check(options, config, report):
    # type: (optparse.Values, RunConfig, _Report) -> int
    result = check_conditions(config.system(), config.probabilities,
                              separation_depth=options.separation_depth,
                              gamma_depth=options.gamma_depth,
                              k=options.depth, tol=options.tol)
    report.rows.extend(condition_rows(result))
    outcome = result.outcome()
    _logger.info("hypotheses: %s", outcome)
    return OUTCOME_CODES.get(outcome, EXIT_UNDETERMINED)


def cmd_dim(options, config, report):
    # type: (optparse.Values, RunConfig, _Report) -> int
    ifs = config.system()
    weights, estimate = _weights(options, config, ifs)
    report.rows.append(('d', estimate.value, estimate.depth, estimate.lower,
                        estimate.upper))
    for q in _floats(options.qs, 'qs'):
        dq = lq_exponent(ifs, weights, q, options.depth, options.tol)
        report.rows.append((q, dq.value, dq.depth, dq.lower, dq.upper))

    ss = _floats(options.s_values, 's-values')
    if ss:
        curve = pressure_curve(ifs, ss, estimate.depth)
        if options.out:
            _make_out(options.out)
            _write_file(options.out, 'pressure.csv', PRESSURE_HEADER, curve)
        else:
            for s, value in curve:
                _logger.info("P(%g) = %.9f", s, value)
    return EXIT_OK


def cmd_lq(options, config, report):
    # type: (optparse.Values, RunConfig, _Report) -> int
    ifs = config.system()
    weights, estimate = _weights(options, config, ifs)
    qs = _floats(options.qs, 'qs')
    schedule = _floats(options.delta_schedule, 'delta-schedule')
    if len(schedule) != 3 or schedule[2] != int(schedule[2]):
        raise InputError("delta-schedule: expected FIRST,RATIO,COUNT")
    deltas = geometric_deltas(schedule[0], schedule[1], int(schedule[2]))
    spectrum = lq_spectrum(ifs, weights, qs, deltas)

    theory = {}  # type: Dict[float, Optional[float]]
    for q in qs:
        if weights.probabilities() is None:
            theory[q] = estimate.upper
        elif q > 1.0:
            theory[q] = lq_exponent(ifs, weights, q, options.depth,
                                    options.tol).value
        else:
            theory[q] = None
    report.rows.extend(spectrum_rows(spectrum, theory))
    if options.out:
        _make_out(options.out)
        _write_file(options.out, 'moments.csv', MOMENT_HEADER,
                    moment_rows(spectrum))
    return EXIT_OK


def cmd_diag(options, config, report):
    # type: (optparse.Values, RunConfig, _Report) -> int
    ifs = config.system()
    weights, estimate = _weights(options, config, ifs)
    ss = parse_s_values(options.s_values, estimate.upper)
    qs = _floats(options.qs, 'qs')
    curves = []
    energies = []
    for s in ss:
        for q in qs:
            curve = r_diagnostic(ifs, weights, s, q, options.r_depth,
                                 options.angles)
            energy = energy_mc(ifs, weights, s, q, options.n_outer,
                               options.n_inner, seed=options.seed,
                               doublings=options.doublings,
                               truncation=options.truncation)
            curves.append(curve)
            energies.append(energy)
            increments = curve.increments()
            report.rows.append((
                s, q, curve.depth, float(curve.max_curve()[-1]),
                float(increments[-1]) if len(increments) else None,
                curve.saturated(), energy.estimate,
                energy.schedule[-1].stderr, energy.stability,
                energy.rejection_rate, energy.excluded))
    if options.out:
        _make_out(options.out)
        _write_file(options.out, 'r_curve.csv', RCURVE_HEADER,
                    [row for curve in curves for row in rcurve_rows(curve)])
        _write_file(options.out, 'energy.csv', ENERGY_HEADER,
                    [row for energy in energies
                     for row in energy_rows(energy)])
    return EXIT_OK


def cmd_render(options, config, report):
    # type: (optparse.Values, RunConfig, _Report) -> int
    ifs = config.system()
    weights, _ = _weights(options, config, ifs)
    delta = _number(options.delta, 'delta')
    grid = rasterize(ifs, weights, delta)
    out = options.out or '.'
    _make_out(out)
    write_grid_png(os.path.join(out, 'measure.png'), grid)
    _write_file(out, 'cells.csv', GRID_HEADER, grid_rows(grid))
    report.rows.extend([
        ('delta', grid.delta),
        ('occupied', grid.occupied),
        ('total_mass', grid.total()),
        ('depth', grid.depth),
        ('capped', grid.capped),
    ])
    return EXIT_OK


def cmd_fixtures(options, names):
    # type: (optparse.Values, List[str]) -> int
    names = names or list(FIXTURES)
    configs = []
    for name in names:
        try:
            configs.append((name, get_fixture(name)))
        except KeyError as err:
            raise InputError(err.args[0])
    if len(configs) == 1 and not options.out:
        sys.stdout.write(configs[0][1].dumps())
        return EXIT_OK
    out = options.out or '.'
    _make_out(out)
    for name, config in configs:
        path = os.path.join(out, name + '.json')
        config.dump(path)
        _logger.info("wrote %s", path)
    return EXIT_OK


COMMAND_MAP = {
    'check': (cmd_check, KEY_VALUE_HEADER, True),
    'dim': (cmd_dim, DIM_HEADER, False),
    'lq': (cmd_lq, SPECTRUM_HEADER, False),
    'diag': (cmd_diag, DIAG_HEADER, False),
    'render': (cmd_render, KEY_VALUE_HEADER, True),
}


def _parse(command, args):
    # type: (str, List[str]) -> Tuple[optparse.Values, List[str], Optional[RunConfig]]
    parser = _make_parser(command)

    # pass in `values` to prevent defaults from being populated, so that
    # values read from the config files can take precedence over defaults.
    # order of precedence:
    #   specified options > JSON params > ini options > parser defaults
    options, args = parser.parse_args(args, values=optparse.Values({}))

    config = None
    if command != 'fixtures':
        if args:
            raise InputError("unexpected arguments: %s" % ' '.join(args))
        path = getattr(options, 'config', None)
        if not path:
            raise InputError("--config is required")
        config = RunConfig.load(path)
        apply_params(options, config.params_for(command))

    apply_config(_get_options_data(parser), options,
                 path=getattr(options, 'settings', None), command=command)
    if getattr(options, 'format', 'csv') not in FORMATS:
        raise InputError("format must be one of %s" % ', '.join(FORMATS))
    return options, args, config


def _main(args=None):
    # type: (Optional[List[str]]) -> int
    if args is None:
        args = sys.argv[1:]
    args = list(args)
    if not args or args[0] in ('-h', '--help'):
        print(USAGE, file=sys.stdout if args else sys.stderr)
        return EXIT_OK if args else EXIT_USAGE
    if args[0] == '--version':
        print("affdim {}".format(__version__))
        return EXIT_OK
    command = args.pop(0)
    if command not in COMMANDS:
        print("affdim: unknown command %r" % command, file=sys.stderr)
        print("Use --help to show usage.", file=sys.stderr)
        return EXIT_USAGE

    try:
        options, names, config = _parse(command, args)
    except InputError as err:
        print("affdim %s: %s" % (command, err), file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print("affdim %s: %s" % (command, err), file=sys.stderr)
        return EXIT_IO

    # Set up logging handler
    level = logging.DEBUG if options.verbose else logging.INFO
    logging.basicConfig(format='%(message)s', level=level)

    if command == 'fixtures':
        try:
            return cmd_fixtures(options, names)
        except InputError as err:
            _logger.error(str(err))
            return EXIT_USAGE
        except OSError as err:
            _logger.error(str(err))
            return EXIT_IO

    affdim.parallel.set_default_processes(options.workers)
    affdim.ifs.set_max_words(options.max_words)

    func, header, flat = COMMAND_MAP[command]
    report = _Report(header, flat)
    try:
        code = func(options, config, report)
    except ResourceError as err:
        _logger.error("%s; output is partial", err)
        report.partial = True
        code = EXIT_RESOURCE
    except InputError as err:
        _logger.error(str(err))
        return EXIT_USAGE
    except DomainError as err:
        _logger.error(str(err))
        return EXIT_FAILED
    except EstimationError as err:
        _logger.error(str(err))
        return EXIT_FAILED
    except OSError as err:
        _logger.error(str(err))
        return EXIT_IO
    report.write(sys.stdout, options.format)
    return code


def main(args=None):
    # type: (Optional[List[str]]) -> int
    processes = affdim.parallel.default_processes
    max_words = affdim.ifs.max_words
    try:
        return _main(args)
    finally:
        affdim.parallel.set_default_processes(processes)
        affdim.ifs.set_max_words(max_words)


if __name__ == '__main__':
    sys.exit(main())
