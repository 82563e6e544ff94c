"""
Writers for the reports: comma separated values, JSON, aligned text tables
and grayscale images.
"""
from __future__ import absolute_import, print_function

import csv
import io
import json
import math

import numpy as np
from PIL import Image

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    from affdim.conditions import ConditionReport
    from affdim.estimators import EnergyReport, GridMeasure, LqSpectrum, \
        RCurve

FORMATS = ('csv', 'json', 'table')


def _cell(value):
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return ''
        return repr(value)
    if value is None:
        return ''
    return str(value)


def jsonable(value):
    """Recursively turn records and arrays into plain JSON values."""
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return None
        return value
    if isinstance(value, (np.floating, np.integer)):
        return jsonable(value.item())
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, dict):
        return dict((str(k), jsonable(v)) for k, v in value.items())
    if hasattr(value, '_asdict'):
        return jsonable(dict(value._asdict()))
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def write_csv(stream, header, rows, partial=False):
    # type: (IO[str], Sequence[str], Iterable[Sequence[Any]], bool) -> None
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    if partial:
        stream.write('# partial\n')


def write_json(stream, data):
    # type: (IO[str], Any) -> None
    json.dump(jsonable(data), stream, indent=2, sort_keys=True)
    stream.write('\n')


def write_table(stream, header, rows):
    # type: (IO[str], Sequence[str], Iterable[Sequence[Any]]) -> None
    cells = [list(header)] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    for row in cells:
        stream.write('  '.join(c.ljust(w) for c, w in zip(row, widths))
                     .rstrip() + '\n')


def write_rows(stream, fmt, header, rows, partial=False):
    # type: (IO[str], str, Sequence[str], Iterable[Sequence[Any]], bool) -> None
    """Write one table in the requested format."""
    rows = list(rows)
    if fmt == 'json':
        data = {'rows': [dict(zip(header, row)) for row in rows]}
        if partial:
            data['partial'] = True
        write_json(stream, data)
    elif fmt == 'table':
        write_table(stream, header, rows)
        if partial:
            stream.write('(partial)\n')
    else:
        write_csv(stream, header, rows, partial)


def open_output(path):
    # type: (str) -> IO[str]
    return io.open(path, 'w', encoding='utf-8', newline='\n')


GRID_HEADER = ('cell_x', 'cell_y', 'mass')


def grid_rows(grid):
    # type: (GridMeasure) -> Iterator[Tuple[int, int, float]]
    for (i, j), mass in zip(grid.cells, grid.masses):
        yield int(i), int(j), float(mass)


def grid_image(grid):
    # type: (GridMeasure) -> Image.Image
    """
    8-bit grayscale picture of the occupied squares, log-scaled so the
    lightest square is 255 and the faintest is 1; empty squares are 0.
    The y axis points up.
    """
    lo = grid.cells.min(axis=0)
    hi = grid.cells.max(axis=0)
    shape = (int(hi[1] - lo[1]) + 1, int(hi[0] - lo[0]) + 1)
    pixels = np.zeros(shape, dtype=np.uint8)
    logs = np.log(grid.masses)
    span = float(logs.max() - logs.min())
    if span > 0.0:
        levels = 1.0 + 254.0 * (logs - logs.min()) / span
    else:
        levels = np.full(len(logs), 255.0)
    rows = shape[0] - 1 - (grid.cells[:, 1] - lo[1])
    cols = grid.cells[:, 0] - lo[0]
    pixels[rows, cols] = np.round(levels).astype(np.uint8)
    return Image.fromarray(pixels)


def write_grid_png(path, grid):
    # type: (str, GridMeasure) -> None
    grid_image(grid).save(path, format='PNG')


SPECTRUM_HEADER = ('q', 'slope', 'r_squared', 'n_deltas', 'theory',
                   'deviation')
MOMENT_HEADER = ('q', 'delta', 'moment')


def spectrum_rows(spectrum, theory=None):
    # type: (LqSpectrum, Optional[Dict[float, Optional[float]]]) -> Iterator[Tuple[Any, ...]]
    """
    One row per moment order, with the predicted exponent and the absolute
    deviation when a prediction is given.
    """
    theory = theory or {}
    n_used = sum(spectrum.used)
    for q, slope, r2 in zip(spectrum.qs, spectrum.slopes,
                            spectrum.r_squared):
        expected = theory.get(q)
        deviation = None if expected is None else abs(slope - expected)
        yield q, slope, r2, n_used, expected, deviation


def moment_rows(spectrum):
    # type: (LqSpectrum) -> Iterator[Tuple[float, float, float]]
    for q, row in zip(spectrum.qs, spectrum.moments):
        for delta, used, moment in zip(spectrum.deltas, spectrum.used, row):
            if used:
                yield q, delta, moment


ENERGY_HEADER = ('s', 'q', 'n_outer', 'n_inner', 'estimate', 'stderr',
                 'stability')
RCURVE_HEADER = ('s', 'q', 'level', 'max_partial_sum')


def energy_rows(report):
    # type: (EnergyReport) -> Iterator[Tuple[Any, ...]]
    for step in report.schedule:
        yield (report.s, report.q, step.n_outer, step.n_inner, step.estimate,
               step.stderr, report.stability)


def rcurve_rows(curve):
    # type: (RCurve) -> Iterator[Tuple[float, float, int, float]]
    for level, value in enumerate(curve.max_curve()):
        yield curve.s, curve.q, level, float(value)


def condition_rows(report):
    # type: (ConditionReport) -> List[Tuple[str, Any]]
    """The report flattened to ``(key, value)`` pairs with stable keys."""
    estimate = report.dimension
    rows = [
        ('positivity', report.positivity),
        ('separation', report.separation.status),
        ('separation_gap', report.separation.gap),
        ('separation_depth', report.separation.depth),
        ('gamma_used', report.gamma_used),
        ('gamma_separated', None if report.gamma is None
         else report.gamma.separated),
        ('pigeonhole_gamma', report.pigeonhole_gamma),
        ('d', estimate.value),
        ('d_lower', estimate.lower),
        ('d_upper', estimate.upper),
        ('d_depth', estimate.depth),
        ('d_at_most_one', report.d_at_most_one),
        ('q0_bunching', str(report.q0_bunching)),
    ]  # type: List[Tuple[str, Any]]
    rows.extend(('bunching_margin_%d' % i, m)
                for i, m in enumerate(report.per_map_margins))
    if report.q0_metric is not None:
        rows.append(('dq2', report.dq2))
        rows.append(('q0_metric', str(report.q0_metric)))
        rows.extend(('metric_margin_%d' % i, m)
                    for i, m in enumerate(report.metric_margins or []))
    existence = report.existence
    rows.extend([
        ('bernoulli_exists', existence.exists),
        ('existence_sum', existence.sum_gamma),
        ('existence_sum_alpha2', existence.sum_alpha2),
        ('existence_sum_alpha1_d2', existence.sum_alpha1_d2),
        ('existence_sum_alpha1_d', existence.sum_alpha1_d),
        ('outcome', report.outcome()),
    ])
    return rows
