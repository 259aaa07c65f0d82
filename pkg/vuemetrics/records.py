# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Per-query score records and their grouping into report slices
"""

from __future__ import absolute_import, division, print_function

from collections import OrderedDict, namedtuple

from vuemetrics.misc import mean_or_none


SliceKey = namedtuple('SliceKey', 'dimension bucket')
"""A report row: the slicing dimension and one bucket label of it."""


OVERALL = SliceKey('overall', 'all')


ScoreRecord = namedtuple(
    'ScoreRecord', 'query_id task slices metrics counts flags'
)
"""Per-query outcome.

query_id : str
task : str
slices : tuple of SliceKey
metrics : dict metric -> float, or None when excluded from that average
counts : dict of additive sums for pooled metrics
flags : tuple of str
"""


def record_slices(record):
    return record.slices


def group_by_slice(records, slicer=record_slices, layout=None):
    """Group records by the slices they fall in.

    Every record lands in the OVERALL slice as well. Records keep
    ascending query_id order inside each group.

    Parameters
    ----------
    records : iterable of ScoreRecord
    slicer : callable
        Maps a record to an iterable of SliceKey
    layout : list of SliceKey, optional
        Slices to emit first and in this order, even when empty

    Returns
    ----------
    list of (SliceKey, list of ScoreRecord)

    """
    groups = OrderedDict()
    groups[OVERALL] = []
    for key in layout or ():
        groups.setdefault(SliceKey(*key), [])
    extra = set()
    for rec in sorted(records, key=lambda r: r.query_id):
        groups[OVERALL].append(rec)
        for key in slicer(rec):
            key = SliceKey(*key)
            if key == OVERALL:
                continue
            if key not in groups:
                groups[key] = []
                extra.add(key)
            groups[key].append(rec)
    ordered = [(k, v) for k, v in groups.items() if k not in extra]
    ordered.extend((k, groups[k]) for k in sorted(extra))
    return ordered


def mean_metrics(records, metrics):
    """Sample-wise mean of each metric over the records where it is set."""
    return {
        m: mean_or_none(r.metrics[m] for r in records
                        if r.metrics.get(m) is not None)
        for m in metrics
    }


def sum_counts(records, keys):
    """Add up pooled counters over records."""
    totals = dict.fromkeys(keys, 0)
    for rec in records:
        for k in keys:
            totals[k] += rec.counts.get(k, 0)
    return totals
