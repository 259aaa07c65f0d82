# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Spatio-temporal grounding scores for a predicted tube against a ground
truth tube, and their benchmark-level aggregation
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple

import numpy as np

from vuemetrics.core import Tube, box_iou, box_iou_array, check_rates
from vuemetrics.errors import InvalidAnnotationError
from vuemetrics.records import ScoreRecord, group_by_slice, mean_metrics
from vuemetrics.records import record_slices


TubeOverlapStats = namedtuple(
    'TubeOverlapStats', 's_sum n_inter n_union n_pred n_gt'
)
"""Accumulated frame IoU over T_inter and the four support sizes."""


TemporalScores = namedtuple('TemporalScores', 't_p t_r t_iou')


SpatioTemporalScores = namedtuple(
    'SpatioTemporalScores', 'v_p v_r v_iou v_iou_int'
)
"""vIoU-Int is None when the supports do not intersect."""


STG_METRICS = ('t_p', 't_r', 't_iou', 'v_p', 'v_r', 'v_iou', 'v_iou_int')
"""Reported metrics, in table order."""


def frame_iou(pred, gt, t):
    """Box IoU at second `t` if both tubes are defined there, else 0."""
    bp = pred.box_at(t)
    bg = gt.box_at(t)
    if bp is None or bg is None:
        return 0.
    return box_iou(bp, bg)


def overlap_stats(pred, gt):
    """Accumulate frame IoU over the temporal intersection of two tubes.

    Parameters
    ----------
    pred : Tube
    gt : Tube

    Returns
    ----------
    TubeOverlapStats

    """
    check_rates(pred.support, gt.support)
    ts_p, bx_p = pred.as_arrays()
    ts_g, bx_g = gt.as_arrays()
    _, ip, ig = np.intersect1d(
        ts_p, ts_g, assume_unique=True, return_indices=True
    )
    n_inter = len(ip)
    # numpy sums float64 pairwise
    s_sum = float(np.sum(box_iou_array(bx_p[ip], bx_g[ig]))) if n_inter else 0.
    n_pred, n_gt = len(ts_p), len(ts_g)
    return TubeOverlapStats(
        s_sum=s_sum, n_inter=n_inter, n_union=n_pred + n_gt - n_inter,
        n_pred=n_pred, n_gt=n_gt
    )


def _check_gt(stats):
    if stats.n_gt < 1:
        raise InvalidAnnotationError('Ground truth tube has no timestamps')


def temporal_scores(stats):
    """tP, tR and tIoU from overlap counts.

    An empty prediction scores (0, 0, 0).
    """
    _check_gt(stats)
    if stats.n_pred == 0:
        return TemporalScores(0., 0., 0.)
    return TemporalScores(
        t_p=stats.n_inter / stats.n_pred,
        t_r=stats.n_inter / stats.n_gt,
        t_iou=stats.n_inter / stats.n_union
    )


def spatiotemporal_scores(stats):
    """vP, vR, vIoU and vIoU-Int from overlap counts."""
    _check_gt(stats)
    v_p = stats.s_sum / stats.n_pred if stats.n_pred else 0.
    v_iou_int = stats.s_sum / stats.n_inter if stats.n_inter else None
    return SpatioTemporalScores(
        v_p=v_p,
        v_r=stats.s_sum / stats.n_gt,
        v_iou=stats.s_sum / stats.n_union,
        v_iou_int=v_iou_int
    )


def merge_tubes(tubes, diagnostics=None, query_id=None):
    """Merge several predicted tubes for one query into a single tube.

    Colliding timestamps keep the box with the larger area.
    """
    samples = []
    for tube in tubes:
        samples.extend(tube.samples())
    return Tube.from_samples(samples, diagnostics=diagnostics,
                             query_id=query_id)


def score_tube(query_id, pred, gt, slices=(), flags=()):
    """Score one query and build its ScoreRecord.

    `pred` is None when the query has no prediction at all. Precision-type
    metrics of an empty prediction are excluded from averaging, as is
    vIoU-Int when the supports do not intersect.
    """
    if pred is None:
        pred = Tube.empty()
    stats = overlap_stats(pred, gt)
    ts = temporal_scores(stats)
    vs = spatiotemporal_scores(stats)
    empty = stats.n_pred == 0
    metrics = {
        't_p': None if empty else ts.t_p,
        't_r': ts.t_r,
        't_iou': ts.t_iou,
        'v_p': None if empty else vs.v_p,
        'v_r': vs.v_r,
        'v_iou': vs.v_iou,
        'v_iou_int': vs.v_iou_int,
    }
    counts = dict(stats._asdict())
    flags = tuple(flags) + (('empty_prediction',) if empty else ())
    return ScoreRecord(query_id, 'stg', tuple(slices), metrics, counts,
                       tuple(sorted(set(flags))))


def aggregate_stg(records, slicer=record_slices, layout=None):
    """Mean STG scores per slice.

    tR, tIoU, vR and vIoU average over ground-truth tubes (every record);
    tP and vP over predicted tubes; vIoU-Int over records whose supports
    intersect. A slice with nothing to average reports None (N/A).

    Parameters
    ----------
    records : list of ScoreRecord
    slicer : callable
        Maps a record to the SliceKeys it belongs to
    layout : list of SliceKey, optional
        Slices to report, in order, including empty ones

    Returns
    ----------
    list of (SliceKey, n, dict metric -> float or None)

    """
    return [
        (key, len(recs), mean_metrics(recs, STG_METRICS))
        for key, recs in group_by_slice(records, slicer, layout)
    ]
