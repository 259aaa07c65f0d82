# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Temporal retrieval scores on continuous time ranges and the area under
their accuracy-vs-threshold curves
"""

from __future__ import absolute_import, division, print_function

import csv
import io
from collections import OrderedDict, namedtuple

import numpy as np
from scipy.integrate import trapezoid

from vuemetrics.core import IntervalSet, intersection_measure
from vuemetrics.core import normalize_intervals
from vuemetrics.enums import MetricKind, str_enum
from vuemetrics.errors import InvalidAnnotationError
from vuemetrics.records import ScoreRecord, group_by_slice, record_slices
from vuemetrics.stg import TemporalScores


THRESHOLDS = np.arange(101) / 100.
"""Threshold grid 0.00, 0.01, ..., 1.00."""


ThresholdCurve = namedtuple('ThresholdCurve', 'thresholds accuracy metric_kind')
"""Fraction of queries whose metric reaches each threshold."""


AucScores = namedtuple('AucScores', 'p_bar r_bar iou_bar')


TR_METRICS = ('p_bar', 'r_bar', 'iou_bar')


KIND_METRIC = OrderedDict([
    (MetricKind.IOU, 'iou'),
    (MetricKind.PRECISION, 'precision'),
    (MetricKind.RECALL, 'recall'),
])
"""Per-query metric behind each curve, in plotting order."""


def kind_name(kind):
    return str_enum(kind).lower()


def interval_scores(pred, gt):
    """Precision, recall and IoU of two sets of time ranges.

    Measures are exact on the real line, no per-second discretization.

    Parameters
    ----------
    pred : IntervalSet or list of (start, end)
    gt : IntervalSet or list of (start, end)

    Returns
    ----------
    TemporalScores

    Examples
    ----------
    >>> interval_scores([(0, 5), (30, 35)], [(30, 35)])
    TemporalScores(t_p=0.5, t_r=1.0, t_iou=0.5)

    """
    pred = normalize_intervals(pred)
    gt = normalize_intervals(gt)
    m_gt = gt.measure()
    if m_gt <= 0.:
        raise InvalidAnnotationError(
            'Ground truth time ranges are empty: {0}'.format(gt)
        )
    m_pred = pred.measure()
    if m_pred <= 0.:
        return TemporalScores(0., 0., 0.)
    inter = intersection_measure(pred, gt)
    union = m_pred + m_gt - inter
    return TemporalScores(
        t_p=inter / m_pred, t_r=inter / m_gt, t_iou=inter / union
    )


def threshold_curve(values, kind=MetricKind.IOU, grid=THRESHOLDS):
    """Accuracy at each threshold: share of queries with value >= threshold.

    At threshold 0 only values above 0 count, so an all-zero run has a flat
    zero curve.

    Parameters
    ----------
    values : list of float
        One metric value per query
    kind : MetricKind
    grid : array
        Thresholds in ascending order

    Returns
    ----------
    ThresholdCurve

    Examples
    ----------
    >>> c = threshold_curve([0.2, 0.8])
    >>> float(c.accuracy[50])
    0.5

    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError('Cannot build a threshold curve from no queries')
    grid = np.asarray(grid, dtype=np.float64)
    hits = np.where(grid[:, np.newaxis] > 0.,
                    values[np.newaxis, :] >= grid[:, np.newaxis],
                    values[np.newaxis, :] > 0.)
    accuracy = np.count_nonzero(hits, axis=1) / values.size
    return ThresholdCurve(grid, accuracy, kind)


def auc(curve):
    """Trapezoidal area under a threshold curve."""
    return float(trapezoid(curve.accuracy, curve.thresholds))


def score_intervals(query_id, pred, gt, slices=(), flags=()):
    """Score one TR query. A missing or empty prediction scores 0."""
    if pred is None:
        pred = IntervalSet()
    pred = normalize_intervals(pred, query_id=query_id)
    scores = interval_scores(pred, gt)
    metrics = {
        'precision': scores.t_p,
        'recall': scores.t_r,
        'iou': scores.t_iou,
    }
    flags = tuple(flags)
    if pred.measure() <= 0.:
        flags += ('empty_prediction',)
    return ScoreRecord(query_id, 'tr', tuple(slices), metrics,
                       {'measure': pred.measure()}, tuple(sorted(set(flags))))


def tr_curves(records):
    """One ThresholdCurve per metric kind, None when there are no records."""
    curves = OrderedDict()
    for kind, metric in KIND_METRIC.items():
        values = [r.metrics[metric] for r in records]
        curves[kind] = threshold_curve(values, kind) if values else None
    return curves


def auc_scores(records):
    """AucScores over a set of records, None for an empty set."""
    if not records:
        return None
    curves = tr_curves(records)
    return AucScores(
        p_bar=auc(curves[MetricKind.PRECISION]),
        r_bar=auc(curves[MetricKind.RECALL]),
        iou_bar=auc(curves[MetricKind.IOU])
    )


def aggregate_tr(records, slicer=record_slices, layout=None):
    """AUC of precision, recall and IoU per slice.

    Returns
    ----------
    list of (SliceKey, n, dict metric -> float or None)

    """
    rows = []
    for key, recs in group_by_slice(records, slicer, layout):
        scores = auc_scores(recs)
        if scores is None:
            values = dict.fromkeys(TR_METRICS)
        else:
            values = dict(scores._asdict())
        rows.append((key, len(recs), values))
    return rows


def curves_to_csv(curves):
    """CSV text with header ``threshold,accuracy,metric_kind``.

    Parameters
    ----------
    curves : iterable of ThresholdCurve

    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['threshold', 'accuracy', 'metric_kind'])
    for curve in curves:
        name = kind_name(curve.metric_kind)
        for t, a in zip(curve.thresholds, curve.accuracy):
            writer.writerow(['{0:.2f}'.format(t), '{0:.6f}'.format(a), name])
    return buf.getvalue()
