# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Annotation file schema, loading, validation and attribute slicing
"""

from __future__ import absolute_import, division, print_function

import io
import json
import logging
from collections import OrderedDict, namedtuple

import numpy as np

from vuemetrics.core import IntervalSet, Tube, normalize_intervals
from vuemetrics.enums import Benchmark, MODALITY_TAGS, QueryFormat, Task
from vuemetrics.enums import TASK_BENCHMARK, parse_task, task_name
from vuemetrics.errors import AnnotationError
from vuemetrics.misc import Diagnostics
from vuemetrics.plotqa import McItem, TranscriptSegment
from vuemetrics.records import OVERALL, SliceKey

log = logging.getLogger(__name__)


SCHEMA_VERSION = 1


QueryAnnotation = namedtuple(
    'QueryAnnotation',
    'query_id video_id duration_s task query modality format gt'
)
"""One benchmark query.

gt is a Tube (stg), IntervalSet (tr), list of TranscriptSegment (char) or
McItem (mc). modality and format are None when not annotated.
"""


VIDEO_LENGTH = 'video_length'
TUBE_DURATION = 'tube_duration'
OBJECT_SIZE = 'object_size'
QUERY_FORMAT = 'format'
MODALITY = 'modality'
TASK_TYPE = 'task_type'


VIDEO_BUCKETS = {
    Benchmark.STG: (
        (60., 'ultra-short'), (600., 'short'), (float('inf'), 'medium'),
    ),
    Benchmark.TR: (
        (60., 'ultra-short'), (600., 'short'), (1800., 'medium'),
        (3600., 'long'), (float('inf'), 'ultra-long'),
    ),
    Benchmark.PLOT: (
        (90., '<90s'), (150., '90-150s'), (210., '150-210s'),
        (float('inf'), '>210s'),
    ),
}
"""Upper (exclusive) bound in seconds and label of each video length bucket."""


STG_MAX_DURATION = 1800.


TUBE_BUCKETS = ((3, 'micro-short'), (10, 'ultra-short'), (float('inf'), 'short'))


TUBE_MAX_SECONDS = 60


SIZE_BUCKETS = {
    Benchmark.STG: ((0.10, 'small'), (0.30, 'medium'), (float('inf'), 'large')),
    Benchmark.TR: ((0.10, 'small'), (0.30, 'medium'), (float('inf'), 'large')),
    Benchmark.PLOT: ((0.05, 'small'), (0.20, 'medium'), (float('inf'), 'large')),
}
"""Upper (exclusive) bound on mean box area and label of each size bucket."""


FORMAT_TAGS = tuple(m.name.lower() for m in QueryFormat)


def _bucket(value, edges):
    for hi, label in edges:
        if value < hi:
            return label
    return edges[-1][1]


def _labels(edges):
    return [label for _, label in edges]


def _warn(diagnostics, query_id, message):
    if diagnostics is not None:
        diagnostics.record('out_of_range_bucket', query_id, message)
    else:
        log.warning('[%s] %s', query_id, message)


def bucket_video_duration(duration_s, benchmark=Benchmark.TR,
                          diagnostics=None, query_id=None):
    """Video length bucket, half-open intervals closed on the left.

    STG videos of 30 minutes or more fall in the last STG bucket with a
    warning.

    Examples
    ----------
    >>> bucket_video_duration(387), bucket_video_duration(60)
    ('short', 'short')
    >>> bucket_video_duration(120, Benchmark.PLOT)
    '90-150s'

    """
    if not duration_s > 0:
        raise ValueError('Video duration must be positive, got {0}'.format(
            duration_s
        ))
    if benchmark is Benchmark.STG and duration_s >= STG_MAX_DURATION:
        _warn(diagnostics, query_id,
              '{0}s video is longer than the STG length buckets'.format(
                  duration_s
              ))
    return _bucket(duration_s, VIDEO_BUCKETS[benchmark])


def bucket_tube_duration(n_seconds, diagnostics=None, query_id=None):
    """Tube duration bucket from the number of annotated seconds."""
    if n_seconds < 1:
        raise ValueError('Tube must span at least one second')
    if n_seconds > TUBE_MAX_SECONDS:
        _warn(diagnostics, query_id,
              '{0}s tube is longer than the tube duration buckets'.format(
                  n_seconds
              ))
    return _bucket(n_seconds, TUBE_BUCKETS)


def bucket_object_area(area, benchmark=Benchmark.STG):
    """Object size bucket of a mean normalized box area."""
    return _bucket(area, SIZE_BUCKETS[benchmark])


def bucket_object_size(tube, benchmark=Benchmark.STG):
    """Object size bucket of a tube by its mean box area.

    Examples
    ----------
    >>> bucket_object_size(Tube([0, 1], [[0, 0, .5, .5]] * 2))
    'medium'

    """
    if tube.is_empty():
        raise ValueError('Object size of an empty tube is undefined')
    return bucket_object_area(tube.mean_area(), benchmark)


def segments_mean_area(segments):
    """Mean box area over every box of a list of segments, None without boxes."""
    areas = [b.area for s in segments for _, b in s.boxes]
    if not areas:
        return None
    return float(np.mean(areas))


def slice_layout(task, annotations=()):
    """Report slices of a task in table order, without the overall slice.

    Task types of multiple-choice items are free-form and taken from
    `annotations`.
    """
    task = parse_task(task) if isinstance(task, str) else task
    bench = TASK_BENCHMARK[task]
    layout = [SliceKey(VIDEO_LENGTH, l) for l in _labels(VIDEO_BUCKETS[bench])]
    if task is Task.STG:
        layout += [SliceKey(TUBE_DURATION, l) for l in _labels(TUBE_BUCKETS)]
        layout += [SliceKey(OBJECT_SIZE, l)
                   for l in _labels(SIZE_BUCKETS[bench])]
    elif task is Task.TR:
        layout += [SliceKey(QUERY_FORMAT, l) for l in FORMAT_TAGS]
        layout += [SliceKey(MODALITY, l) for l in MODALITY_TAGS]
    elif task is Task.CHAR:
        layout += [SliceKey(OBJECT_SIZE, l)
                   for l in _labels(SIZE_BUCKETS[bench])]
    else:
        types = sorted(set(a.gt.task_type for a in annotations
                           if a.task is Task.MC and a.gt.task_type is not None))
        layout += [SliceKey(TASK_TYPE, t) for t in types]
    return layout


def slices_for(annotation, diagnostics=None):
    """SliceKeys an annotation falls in, without the overall slice."""
    a = annotation
    bench = TASK_BENCHMARK[a.task]
    keys = [SliceKey(VIDEO_LENGTH, bucket_video_duration(
        a.duration_s, bench, diagnostics, a.query_id
    ))]
    if a.task is Task.STG:
        keys.append(SliceKey(TUBE_DURATION, bucket_tube_duration(
            len(a.gt), diagnostics, a.query_id
        )))
        keys.append(SliceKey(OBJECT_SIZE, bucket_object_size(a.gt, bench)))
    elif a.task is Task.TR:
        if a.format is not None:
            keys.append(SliceKey(QUERY_FORMAT, a.format))
        if a.modality is not None:
            keys.append(SliceKey(MODALITY, a.modality))
    elif a.task is Task.CHAR:
        area = segments_mean_area(a.gt)
        if area is not None:
            keys.append(SliceKey(OBJECT_SIZE, bucket_object_area(area, bench)))
    elif a.gt.task_type is not None:
        keys.append(SliceKey(TASK_TYPE, a.gt.task_type))
    return tuple(keys)


def is_sparse_tube(tube):
    """True for tubes sampled below 1 Hz: 3+ samples on one stride of 2s+.

    Irregular gaps are a fragmented tube, which is legal.
    """
    ts = tube.support.timestamps
    if len(ts) < 3:
        return False
    gaps = set(b - a for a, b in zip(ts, ts[1:]))
    return len(gaps) == 1 and gaps.pop() > 1


def _require(d, key, types, what='field'):
    if key not in d:
        raise ValueError('missing {0} "{1}"'.format(what, key))
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise ValueError('{0} "{1}" has the wrong type'.format(what, key))
    return value


def _parse_gt(task, gt, query_id):
    if not isinstance(gt, dict):
        raise ValueError('"gt" must be an object')
    variants = {'tube', 'intervals', 'segments', 'options'} & set(gt)
    expected = {
        Task.STG: 'tube', Task.TR: 'intervals',
        Task.CHAR: 'segments', Task.MC: 'options'
    }[task]
    if variants != {expected}:
        raise ValueError('gt variant {0} does not match task {1}'.format(
            sorted(variants), task_name(task)
        ))
    if task is Task.STG:
        entries = _require(gt, 'tube', list)
        for e in entries:
            t = e['t']
            if isinstance(t, bool) or not isinstance(t, (int, float)) \
               or int(t) != t:
                raise ValueError('non-integer tube timestamp {0!r}'.format(t))
        tube = Tube.from_samples([(e['t'], e['box']) for e in entries])
        if tube.is_empty():
            raise ValueError('empty ground truth tube')
        if len(tube) != len(entries):
            raise ValueError('duplicate tube timestamps')
        if is_sparse_tube(tube):
            raise ValueError('non-1Hz tube')
        return tube
    if task is Task.TR:
        ivs = normalize_intervals(IntervalSet(_require(gt, 'intervals', list)))
        if ivs.measure() <= 0.:
            raise ValueError('ground truth time ranges have no length')
        return ivs
    if task is Task.CHAR:
        segments = [TranscriptSegment.from_dict(s)
                    for s in _require(gt, 'segments', list)]
        if not segments:
            raise ValueError('no ground truth segments')
        return sorted(segments, key=lambda s: (s.start, s.end))
    options = _require(gt, 'options', list)
    if not options or not all(isinstance(o, str) for o in options):
        raise ValueError('"options" must be a non-empty list of strings')
    answer = _require(gt, 'answer', int)
    if not 0 <= answer < len(options):
        raise ValueError('answer {0} out of range for {1} options'.format(
            answer, len(options)
        ))
    task_type = gt.get('task_type')
    if task_type is not None and not isinstance(task_type, str):
        raise ValueError('"task_type" must be a string')
    return McItem(query_id, tuple(options), answer, None, task_type)


def annotation_from_dict(d):
    """QueryAnnotation from one decoded annotation line.

    Raises
    ----------
    ValueError on any schema violation

    """
    if not isinstance(d, dict):
        raise ValueError('annotation must be a JSON object')
    if d.get('v') != SCHEMA_VERSION:
        raise ValueError('unsupported schema version {0!r}'.format(d.get('v')))
    query_id = _require(d, 'query_id', str)
    video_id = _require(d, 'video_id', str)
    duration = float(_require(d, 'duration_s', (int, float)))
    if not duration > 0:
        raise ValueError('duration_s must be positive')
    task = parse_task(_require(d, 'task', str))
    query = d.get('query', '')
    modality = d.get('modality')
    if modality is not None and modality not in MODALITY_TAGS:
        raise ValueError('unknown modality {0!r}'.format(modality))
    fmt = d.get('format')
    if fmt is not None and fmt not in FORMAT_TAGS:
        raise ValueError('unknown format {0!r}'.format(fmt))
    gt = _parse_gt(task, _require(d, 'gt', dict), query_id)
    return QueryAnnotation(query_id, video_id, duration, task, query,
                           modality, fmt, gt)


def annotation_to_dict(a):
    """Annotation line of a QueryAnnotation."""
    if a.task is Task.STG:
        gt = {'tube': a.gt.to_list()}
    elif a.task is Task.TR:
        gt = {'intervals': a.gt.to_list()}
    elif a.task is Task.CHAR:
        gt = {'segments': [s.to_dict() for s in a.gt]}
    else:
        gt = {'options': list(a.gt.options), 'answer': a.gt.gt_answer}
        if a.gt.task_type is not None:
            gt['task_type'] = a.gt.task_type
    d = OrderedDict([
        ('v', SCHEMA_VERSION), ('query_id', a.query_id),
        ('video_id', a.video_id), ('duration_s', a.duration_s),
        ('task', task_name(a.task)), ('query', a.query),
    ])
    if a.modality is not None:
        d['modality'] = a.modality
    if a.format is not None:
        d['format'] = a.format
    d['gt'] = gt
    return d


def read_jsonl(path, error=AnnotationError):
    """Yield (line number, decoded object) for each non-blank line."""
    try:
        f = io.open(path, 'r', encoding='utf-8')
    except (IOError, OSError) as exc:
        raise error('cannot read {0}: {1}'.format(path, exc.strerror))
    with f:
        for n, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield n, json.loads(line)
            except ValueError as exc:
                raise error('invalid JSON: {0}'.format(exc), n)


def load_annotations(path):
    """Load and check an annotation JSON-lines file.

    Raises
    ----------
    AnnotationError
        With the offending line number, on a schema violation or a
        duplicate query_id

    """
    annotations = []
    seen = {}
    for n, d in read_jsonl(path):
        try:
            a = annotation_from_dict(d)
        except KeyError as exc:
            raise AnnotationError('missing key {0}'.format(exc), n)
        except (ValueError, TypeError) as exc:
            raise AnnotationError(str(exc), n)
        if a.query_id in seen:
            raise AnnotationError(
                'duplicate query_id {0!r} (first on line {1})'.format(
                    a.query_id, seen[a.query_id]
                ), n
            )
        seen[a.query_id] = n
        annotations.append(a)
    log.info('Loaded %d annotations from %s', len(annotations), path)
    return annotations


ValidationReport = namedtuple(
    'ValidationReport', 'n_total per_task histograms errors diagnostics'
)
"""Per-task counts, per-task bucket histograms (list of (SliceKey, count))
and the messages of every failed check."""


def _check(a):
    if not a.duration_s > 0:
        raise ValueError('duration must be positive')
    kind = {Task.STG: Tube, Task.TR: IntervalSet, Task.CHAR: list,
            Task.MC: McItem}[a.task]
    if not isinstance(a.gt, kind):
        raise ValueError('gt variant does not match task {0}'.format(
            task_name(a.task)
        ))
    if a.task is Task.STG:
        if a.gt.is_empty():
            raise ValueError('empty ground truth tube')
        if is_sparse_tube(a.gt):
            raise ValueError('non-1Hz tube')
    elif a.task is Task.TR and normalize_intervals(a.gt).measure() <= 0.:
        raise ValueError('ground truth time ranges have no length')
    elif a.task is Task.MC and not 0 <= a.gt.gt_answer < len(a.gt.options):
        raise ValueError('answer out of range')


def validate(annotations):
    """Check annotations and histogram them over the report slices.

    Returns
    ----------
    ValidationReport

    """
    diagnostics = Diagnostics()
    errors = []
    per_task = OrderedDict()
    groups = OrderedDict()
    seen = set()
    for a in sorted(annotations, key=lambda x: x.query_id):
        if a.query_id in seen:
            errors.append('[{0}] duplicate query_id'.format(a.query_id))
            continue
        seen.add(a.query_id)
        try:
            _check(a)
            keys = slices_for(a, diagnostics)
        except ValueError as exc:
            errors.append('[{0}] {1}'.format(a.query_id, exc))
            continue
        name = task_name(a.task)
        per_task[name] = per_task.get(name, 0) + 1
        groups.setdefault(a.task, []).append(keys)

    histograms = OrderedDict()
    for task in Task:
        if task not in groups:
            continue
        counts = OrderedDict((k, 0) for k in slice_layout(task, annotations))
        for keys in groups[task]:
            for k in keys:
                counts[k] = counts.get(k, 0) + 1
        hist = [(OVERALL, len(groups[task]))] + list(counts.items())
        histograms[task_name(task)] = hist
    return ValidationReport(
        n_total=len(annotations), per_task=per_task, histograms=histograms,
        errors=errors, diagnostics=diagnostics
    )


def render_validation(report, fmt='md'):
    """Render a ValidationReport as Markdown or JSON text."""
    if fmt == 'json':
        d = {
            'n_total': report.n_total,
            'per_task': dict(report.per_task),
            'histograms': {
                task: [{'dimension': k.dimension, 'bucket': k.bucket, 'n': n}
                       for k, n in hist]
                for task, hist in report.histograms.items()
            },
            'errors': list(report.errors),
            'diagnostics': report.diagnostics.to_dict(),
        }
        return json.dumps(d, indent=2, sort_keys=True) + '\n'
    lines = ['# Annotation summary', '',
             'Total queries: {0}'.format(report.n_total), '']
    for task, hist in report.histograms.items():
        lines += ['## {0}'.format(task), '',
                  '| Dimension | Bucket | N |', '|---|---|---:|']
        lines += ['| {0} | {1} | {2} |'.format(k.dimension, k.bucket, n)
                  for k, n in hist]
        lines.append('')
    if report.errors:
        lines += ['## Errors', '']
        lines += ['- {0}'.format(e) for e in report.errors]
        lines.append('')
    return '\n'.join(lines)
