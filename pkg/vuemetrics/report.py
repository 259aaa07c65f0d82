# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Evaluate a prediction run against its annotations and render the result
"""

from __future__ import absolute_import, division, print_function

import io
import os
import csv
import json
import logging
import multiprocessing
from collections import OrderedDict, namedtuple

try:
    get_ipython
    from tqdm import tqdm_notebook as tqdm
except NameError:
    from tqdm import tqdm

from vuemetrics.__version__ import __version__
from vuemetrics.adapters import FRAME_CAP, CanonicalPrediction, empty_value
from vuemetrics.adapters import FrameSamplingPolicy
from vuemetrics.adapters import normalize_prediction, prediction_from_dict
from vuemetrics.adapters import prediction_to_dict, raw_from_dict
from vuemetrics.dataset import load_annotations, read_jsonl, slice_layout
from vuemetrics.dataset import slices_for
from vuemetrics.enums import Dialect, MetricKind, OutputFormat, Task
from vuemetrics.enums import parse_dialect, parse_task, str_enum
from vuemetrics.enums import task_name
from vuemetrics.errors import ConfigurationError, DialectParseError
from vuemetrics.errors import MalformedPredictionError
from vuemetrics.errors import PredictionFileError, TaskMismatchError
from vuemetrics.errors import UnknownQueryError
from vuemetrics.misc import Diagnostics, file_hash, make_dir
from vuemetrics.plotqa import BOX_TOLERANCE, CHAR_METRICS, MC_METRICS
from vuemetrics.plotqa import aggregate_char, aggregate_mc, score_char
from vuemetrics.plotqa import score_mc
from vuemetrics.stg import STG_METRICS, aggregate_stg, merge_tubes, score_tube
from vuemetrics.tr import TR_METRICS, aggregate_tr, auc, curves_to_csv
from vuemetrics.tr import THRESHOLDS, ThresholdCurve, kind_name
from vuemetrics.tr import score_intervals, tr_curves
from vuemetrics.plot import plot_curves

log = logging.getLogger(__name__)


TASK_METRICS = {
    Task.STG: STG_METRICS,
    Task.TR: TR_METRICS,
    Task.CHAR: CHAR_METRICS,
    Task.MC: MC_METRICS,
}


TASK_AGGREGATE = {
    Task.STG: aggregate_stg,
    Task.TR: aggregate_tr,
    Task.CHAR: aggregate_char,
    Task.MC: aggregate_mc,
}


METRIC_LABELS = {
    't_p': 'tP', 't_r': 'tR', 't_iou': 'tIoU', 'v_p': 'vP', 'v_r': 'vR',
    'v_iou': 'vIoU', 'v_iou_int': 'vIoU-Int',
    'p_bar': 'AUC-P', 'r_bar': 'AUC-R', 'iou_bar': 'AUC-IoU',
    'wer': 'WER', 's_iou': 'sIoU', 'seg_coverage': 'Seg. coverage',
    'box_coverage': 'Box coverage',
    'accuracy': 'Accuracy', 'macro_accuracy': 'Macro accuracy',
}


DIMENSION_LABELS = OrderedDict([
    ('overall', 'Overall'),
    ('video_length', 'Video Length'),
    ('tube_duration', 'Tube Duration'),
    ('object_size', 'Object Size'),
    ('format', 'Query Format'),
    ('modality', 'Modality'),
    ('task_type', 'Task Type'),
])


NA = 'N/A'


EvalConfig = namedtuple(
    'EvalConfig', 'task dialect box_tolerance frame_cap fps'
)
"""Every setting that can change a number in the report."""
EvalConfig.__new__.__defaults__ = (None, BOX_TOLERANCE, FRAME_CAP, 1.)


class RunReport(object):
    """Per-slice metric table of one evaluation run.

    Parameters
    ----------
    task : str
    metrics : list of str
        Metric names, in column order
    rows : list of dict
        ``{'dimension', 'bucket', 'n', 'values'}``, values are fractions
        or None (N/A)
    curves : dict
        Metric kind name -> accuracy on the threshold grid (TR only)
    diagnostics : Diagnostics
    provenance : dict
        File hashes and configuration

    """
    def __init__(self, task, metrics, rows, curves=None, diagnostics=None,
                 provenance=None):
        self.task = task
        self.metrics = list(metrics)
        self.rows = rows
        self.curves = curves or OrderedDict()
        self.diagnostics = diagnostics if diagnostics is not None \
            else Diagnostics()
        self.provenance = provenance or {}

    @property
    def partial(self):
        return self.diagnostics['parse_failure'] > 0

    def row(self, dimension, bucket):
        for r in self.rows:
            if r['dimension'] == dimension and r['bucket'] == bucket:
                return r
        raise KeyError((dimension, bucket))

    def overall(self):
        return self.row('overall', 'all')

    def to_dict(self):
        return {
            'task': self.task,
            'metrics': list(self.metrics),
            'rows': [
                {'dimension': r['dimension'], 'bucket': r['bucket'],
                 'n': int(r['n']),
                 'values': {m: r['values'].get(m) for m in self.metrics}}
                for r in self.rows
            ],
            'curves': {k: [float(a) for a in v]
                       for k, v in self.curves.items()},
            'diagnostics': self.diagnostics.to_dict(),
            'provenance': self.provenance,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            task=d['task'], metrics=d['metrics'],
            rows=[dict(r) for r in d['rows']],
            curves=OrderedDict(sorted(d.get('curves', {}).items())),
            diagnostics=Diagnostics.from_dict(d.get('diagnostics', {})),
            provenance=d.get('provenance', {})
        )

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'RunReport(task={0}, {1} rows)'.format(self.task, len(self.rows))


def policy_for(config, annotation, context):
    """Frame sampling of one gpt prediction.

    Context keys of the prediction line win. Time ranges are read on the
    uncapped frame grid unless the line sets a frame cap.
    """
    context = dict(context or {})
    context.setdefault('duration_s', annotation.duration_s)
    cap = config.frame_cap if config.task is Task.STG else None
    return FrameSamplingPolicy.from_context(context, frame_cap=cap,
                                            fps=config.fps)


def _prediction(line, annotation, config, diagnostics):
    """Canonical value of a prediction line, or None without a line."""
    if line is None:
        return None, ()
    qid = annotation.query_id
    options = annotation.gt.options if config.task is Task.MC else None
    if 'payload' in line:
        raw = raw_from_dict(line, dialect=config.dialect)
        policy = None
        if raw.dialect is Dialect.GPT and config.task in (Task.STG, Task.TR):
            policy = policy_for(config, annotation, raw.context)
        pred = normalize_prediction(raw, config.task, options=options,
                                    policy=policy, diagnostics=diagnostics)
    else:
        try:
            pred = prediction_from_dict(line, options=options,
                                        diagnostics=diagnostics)
        except MalformedPredictionError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedPredictionError(
                'bad prediction line: {0!r}'.format(exc), query_id=qid
            )
        if 'parse_failure' in pred.flags:
            diagnostics.record('parse_failure', qid)
    return pred.value, pred.flags


def score_query(item):
    """Worker: score one annotation against its prediction line.

    Parameters
    ----------
    item : (QueryAnnotation, dict or None, EvalConfig)

    Returns
    ----------
    (ScoreRecord, Diagnostics)

    """
    annotation, line, config = item
    diagnostics = Diagnostics()
    qid = annotation.query_id
    try:
        value, flags = _prediction(line, annotation, config, diagnostics)
    except (DialectParseError, MalformedPredictionError) as exc:
        diagnostics.record('parse_failure', qid, str(exc))
        value, flags = None, ('parse_failure',)
    if line is None:
        diagnostics.record('missing_prediction', qid)
        flags = ('missing_prediction',)
    slices = slices_for(annotation, diagnostics)
    task = config.task
    if task is Task.STG:
        record = score_tube(qid, value, annotation.gt, slices, flags)
    elif task is Task.TR:
        record = score_intervals(qid, value, annotation.gt, slices, flags)
    elif task is Task.CHAR:
        record = score_char(qid, value, annotation.gt, slices, flags,
                            tolerance=config.box_tolerance,
                            diagnostics=diagnostics)
    else:
        item = annotation.gt._replace(pred_answer=value)
        record = score_mc(item, slices, flags)
    return record, diagnostics


def _merge_lines(lines, task, diagnostics):
    """Fold several canonical stg lines of one query into a single line."""
    qid = str(lines[0]['query_id'])
    if task is not Task.STG or any('payload' in l for l in lines):
        raise MalformedPredictionError(
            '{0} prediction lines for one query'.format(len(lines)),
            query_id=qid
        )
    tubes = [prediction_from_dict(l, diagnostics=diagnostics).value
             for l in lines]
    merged = merge_tubes(tubes, diagnostics=diagnostics, query_id=qid)
    return {'query_id': qid, 'task': task_name(task),
            'tube': merged.to_list()}


def load_prediction_lines(path, annotations, task):
    """Prediction lines keyed by query_id, checked against the annotations.

    Raises
    ----------
    UnknownQueryError
        For query ids absent from the annotations
    TaskMismatchError
        For lines of another task

    """
    by_id = {a.query_id: a for a in annotations}
    lines = OrderedDict()
    unknown = set()
    for n, d in read_jsonl(path, error=PredictionFileError):
        if not isinstance(d, dict) or 'query_id' not in d:
            raise PredictionFileError('missing query_id', n)
        qid = str(d['query_id'])
        if qid not in by_id:
            unknown.add(qid)
            continue
        line_task = d.get('task')
        if line_task is not None and parse_task(line_task) is not task:
            raise TaskMismatchError(
                'line {0}: prediction task {1} != {2}'.format(
                    n, line_task, task_name(task)
                )
            )
        if by_id[qid].task is not task:
            raise TaskMismatchError(
                'line {0}: query {1} is a {2} query'.format(
                    n, qid, task_name(by_id[qid].task)
                )
            )
        lines.setdefault(qid, []).append(d)
    if unknown:
        raise UnknownQueryError(unknown)
    return lines


def evaluate_run(annotations_path, predictions_path, task, dialect=None,
                 threads=1, box_tolerance=BOX_TOLERANCE, frame_cap=FRAME_CAP,
                 fps=1., progress=False):
    """Score every annotated query of `task` and aggregate per slice.

    Queries without a prediction are scored as empty predictions. A query
    whose prediction cannot be parsed is scored the same way and listed
    under the ``parse_failure`` diagnostic.

    Parameters
    ----------
    annotations_path : str
    predictions_path : str
    task : Task
    dialect : Dialect, optional
        Dialect of raw prediction lines that do not name their own
    threads : int
        Worker processes
    box_tolerance : float
        Box alignment window in seconds (char)
    frame_cap : int
        Frame cap of the gpt sampling policy
    fps : float
        Frame rate of the gpt sampling policy
    progress : bool
        Show a progress bar

    Returns
    ----------
    RunReport

    """
    task = parse_task(task) if isinstance(task, str) else task
    if isinstance(dialect, str): dialect = parse_dialect(dialect)
    every = load_annotations(annotations_path)
    annotations = [a for a in every if a.task is task]
    if not annotations:
        raise TaskMismatchError(
            'No {0} queries in {1}'.format(task_name(task), annotations_path)
        )
    annotations.sort(key=lambda a: a.query_id)

    diagnostics = Diagnostics()
    lines = load_prediction_lines(predictions_path, every, task)
    for qid, group in lines.items():
        if len(group) > 1:
            lines[qid] = [_merge_lines(group, task, diagnostics)]

    config = EvalConfig(task, dialect, box_tolerance, frame_cap, float(fps))
    items = [(a, lines[a.query_id][0] if a.query_id in lines else None, config)
             for a in annotations]

    results = []
    bar = dict(total=len(items), disable=not progress, unit='query')
    if threads > 1:
        pool = multiprocessing.Pool(processes=threads)
        try:
            chunksize = max(1, len(items) // (threads * 8))
            for res in tqdm(pool.imap(score_query, items, chunksize), **bar):
                results.append(res)
        finally:
            pool.close()
            pool.join()
    else:
        for item in tqdm(items, **bar):
            results.append(score_query(item))

    records = []
    for record, diag in results:
        records.append(record)
        diagnostics.merge(diag)

    layout = slice_layout(task, annotations)
    rows = [
        {'dimension': key.dimension, 'bucket': key.bucket, 'n': n,
         'values': values}
        for key, n, values in TASK_AGGREGATE[task](records, layout=layout)
    ]
    curves = OrderedDict()
    if task is Task.TR:
        for kind, curve in tr_curves(records).items():
            curves[kind_name(kind)] = curve.accuracy.tolist()

    provenance = {
        'version': __version__,
        'annotations': {'path': annotations_path,
                        'sha256': file_hash(annotations_path, ordered=False)},
        'predictions': {'path': predictions_path,
                        'sha256': file_hash(predictions_path, ordered=False)},
        'config': {
            'task': task_name(task),
            'dialect': None if dialect is None else str_enum(dialect).lower(),
            'box_tolerance': box_tolerance,
            'frame_cap': frame_cap,
            'fps': float(fps),
        },
    }
    report = RunReport(task_name(task), TASK_METRICS[task], rows, curves,
                       diagnostics, provenance)
    if report.partial:
        log.warning('%d queries failed to parse',
                    diagnostics['parse_failure'])
    return report


def _fmt(value):
    if value is None:
        return NA
    return '{0:.2f}'.format(100. * value)


def _grouped_rows(report):
    groups = OrderedDict()
    for r in report.rows:
        groups.setdefault(r['dimension'], []).append(r)
    order = list(DIMENSION_LABELS)
    return sorted(groups.items(),
                  key=lambda kv: (order.index(kv[0]) if kv[0] in order
                                  else len(order), kv[0]))


def render_markdown(report):
    labels = [METRIC_LABELS.get(m, m) for m in report.metrics]
    lines = ['# {0} results'.format(report.task.upper()), '',
             'Metric values in %.', '']
    for dim, rows in _grouped_rows(report):
        lines.append('## {0}'.format(DIMENSION_LABELS.get(dim, dim)))
        lines.append('')
        lines.append('| Bucket | N | ' + ' | '.join(labels) + ' |')
        lines.append('|---|---:|' + '---:|' * len(labels))
        for r in rows:
            vals = [_fmt(r['values'].get(m)) for m in report.metrics]
            lines.append('| {0} | {1} | {2} |'.format(
                r['bucket'], r['n'], ' | '.join(vals)
            ))
        lines.append('')
    counts = report.diagnostics.to_dict()['counts']
    if counts:
        lines += ['## Diagnostics', '', '| Event | Count |', '|---|---:|']
        lines += ['| {0} | {1} |'.format(k, v) for k, v in counts.items()]
        lines.append('')
    failed = report.diagnostics.queries('parse_failure')
    if failed:
        lines.append('Parse failures: ' + ', '.join(failed))
        lines.append('')
    return '\n'.join(lines)


def render_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['dimension', 'bucket', 'n'] + list(report.metrics))
    for r in report.rows:
        writer.writerow([r['dimension'], r['bucket'], r['n']] +
                        [_fmt(r['values'].get(m)) for m in report.metrics])
    return buf.getvalue()


def render_json(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + '\n'


def render(report, fmt=OutputFormat.MD):
    """Render a report as UTF-8 bytes.

    Tables give percentages with 2 decimals, JSON keeps full precision.
    """
    if isinstance(fmt, str):
        fmt = OutputFormat[fmt.upper()]
    text = {
        OutputFormat.MD: render_markdown,
        OutputFormat.CSV: render_csv,
        OutputFormat.JSON: render_json,
    }[fmt](report)
    return text.encode('utf-8')


def report_curves(report):
    """ThresholdCurves of a report, in plotting order."""
    curves = []
    for kind in (MetricKind.IOU, MetricKind.PRECISION, MetricKind.RECALL):
        acc = report.curves.get(kind_name(kind))
        if acc is not None:
            curves.append(ThresholdCurve(THRESHOLDS, acc, kind))
    return curves


def emit_curves(report, outdir, basename='curves'):
    """Write the threshold curves of a TR report as CSV and SVG.

    Returns
    ----------
    list of written paths, empty when the report has no curves

    """
    curves = report_curves(report)
    if not curves:
        log.info('No threshold curves for a %s report', report.task)
        return []
    csv_path = os.path.join(outdir, basename + '.csv')
    svg_path = os.path.join(outdir, basename + '.svg')
    make_dir(csv_path)
    with io.open(csv_path, 'w', encoding='utf-8', newline='') as f:
        f.write(curves_to_csv(curves))
    fig_text = '\n'.join(
        'AUC {0} = {1:.2f}'.format(kind_name(c.metric_kind), 100. * auc(c))
        for c in curves
    )
    plot_curves(curves, svg_path, fig_text=fig_text)
    return [csv_path, svg_path]


def normalize_file(in_path, out_path, dialect=None, task=None,
                   annotations=None, frame_cap=FRAME_CAP, fps=1.):
    """Rewrite a raw prediction file as canonical prediction lines.

    Lines that fail to parse are written with an empty value and the
    ``parse_failure`` flag.

    Parameters
    ----------
    in_path, out_path : str
    dialect : Dialect, optional
        For lines that do not name their own
    task : Task, optional
        For lines that do not name their own; otherwise taken from the
        annotations
    annotations : list of QueryAnnotation, optional
        Supply durations (gpt) and options (mc)

    Returns
    ----------
    Diagnostics

    """
    if isinstance(dialect, str): dialect = parse_dialect(dialect)
    if isinstance(task, str): task = parse_task(task)
    diagnostics = Diagnostics()
    by_id = {a.query_id: a for a in annotations or ()}
    out = []
    for n, d in read_jsonl(in_path, error=PredictionFileError):
        if not isinstance(d, dict) or 'query_id' not in d:
            raise PredictionFileError('missing query_id', n)
        if 'payload' not in d:
            out.append(d)
            continue
        raw = raw_from_dict(d, dialect=dialect)
        ann = by_id.get(raw.query_id)
        line_task = raw.task or task or (ann.task if ann else None)
        if line_task is None:
            raise ConfigurationError(
                'line {0}: no task for query {1}'.format(n, raw.query_id)
            )
        options = None
        if line_task is Task.MC:
            if ann is None:
                raise ConfigurationError(
                    'line {0}: mc answers need the annotations'.format(n)
                )
            options = ann.gt.options
        policy = None
        if raw.dialect is Dialect.GPT and line_task in (Task.STG, Task.TR):
            context = dict(raw.context or {})
            if ann is not None:
                context.setdefault('duration_s', ann.duration_s)
            cap = frame_cap if line_task is Task.STG else None
            policy = FrameSamplingPolicy.from_context(context, frame_cap=cap,
                                                      fps=fps)
        try:
            pred = normalize_prediction(raw, line_task, options=options,
                                        policy=policy, diagnostics=diagnostics)
            out.append(prediction_to_dict(pred))
        except DialectParseError as exc:
            diagnostics.record('parse_failure', raw.query_id, str(exc))
            out.append(_failed_line(raw.query_id, line_task))
    make_dir(out_path)
    with io.open(out_path, 'w', encoding='utf-8') as f:
        for d in out:
            f.write(json.dumps(d, sort_keys=True) + '\n')
    return diagnostics


def _failed_line(query_id, task):
    d = prediction_to_dict(
        CanonicalPrediction(query_id, task, empty_value(task))
    )
    d['flags'] = ['parse_failure']
    return d
