# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Canonical tube, support and interval types with their exact algebra
"""

from __future__ import absolute_import, division, print_function

import logging
from bisect import bisect_left
from collections import namedtuple

import numpy as np

from vuemetrics.errors import ConfigurationError, InvalidBoxError
from vuemetrics.errors import MalformedPredictionError
from vuemetrics.misc import round_half_up

log = logging.getLogger(__name__)


SAMPLING_RATE = 1
"""Tubes are sampled at one box per second."""


class BoundingBox(namedtuple('BoundingBox', 'x0 y0 x1 y1')):
    """Axis aligned box in normalized frame coordinates.

    Degenerate (zero area) boxes are legal.

    Examples
    ----------
    >>> BoundingBox(0, 0, 0.5, 0.5).area
    0.25

    """
    __slots__ = ()

    def __new__(cls, x0, y0, x1, y1):
        x0, y0, x1, y1 = float(x0), float(y0), float(x1), float(y1)
        if not (0. <= x0 <= x1 <= 1. and 0. <= y0 <= y1 <= 1.):
            raise InvalidBoxError(
                'Box must satisfy 0 <= x0 <= x1 <= 1 and 0 <= y0 <= y1 <= 1, '
                'got [{0}, {1}, {2}, {3}]'.format(x0, y0, x1, y1)
            )
        return super(BoundingBox, cls).__new__(cls, x0, y0, x1, y1)

    @property
    def area(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def to_list(self):
        return [self.x0, self.y0, self.x1, self.y1]


def clamp_box(coords):
    """Clamp raw coordinates into a valid BoundingBox.

    Coordinates are clipped to [0, 1] and flipped corners are swapped.

    Returns
    ----------
    (BoundingBox, bool) where the flag tells whether anything was changed

    """
    if len(coords) != 4:
        raise InvalidBoxError(
            'Box needs 4 coordinates, got {0}'.format(len(coords))
        )
    raw = [float(c) for c in coords]
    if not all(np.isfinite(raw)):
        raise InvalidBoxError('Non-finite box coordinate in {0}'.format(raw))
    x0, y0, x1, y1 = [min(max(c, 0.), 1.) for c in raw]
    if x0 > x1: x0, x1 = x1, x0
    if y0 > y1: y0, y1 = y1, y0
    changed = [x0, y0, x1, y1] != raw
    return BoundingBox(x0, y0, x1, y1), changed


def box_iou(a, b):
    """Spatial intersection over union of two boxes.

    Parameters
    ----------
    a, b : BoundingBox

    Returns
    ----------
    float in [0, 1], 0 when the union has no area

    Examples
    ----------
    >>> box_iou(BoundingBox(0, 0, 0.5, 0.5), BoundingBox(0.25, 0.25, 0.75, 0.75))
    0.14285714285714285

    """
    iw = min(a.x1, b.x1) - max(a.x0, b.x0)
    ih = min(a.y1, b.y1) - max(a.y0, b.y0)
    inter = max(iw, 0.) * max(ih, 0.)
    union = a.area + b.area - inter
    if union <= 0.:
        return 0.
    return inter / union


def box_iou_array(a, b):
    """Row-wise IoU of two (N, 4) arrays of boxes."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    iw = np.minimum(a[:, 2], b[:, 2]) - np.maximum(a[:, 0], b[:, 0])
    ih = np.minimum(a[:, 3], b[:, 3]) - np.maximum(a[:, 1], b[:, 1])
    inter = np.clip(iw, 0., None) * np.clip(ih, 0., None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a + area_b - inter
    out = np.zeros(len(a), dtype=np.float64)
    ok = union > 0.
    out[ok] = inter[ok] / union[ok]
    return out


class TemporalSupport(object):
    """Sorted set of integer seconds on which a tube is defined.

    Gaps are allowed, fragmented tubes are legal.
    """
    __slots__ = ('_timestamps', '_rate')

    def __init__(self, timestamps=(), sampling_rate=SAMPLING_RATE):
        ts = []
        for t in timestamps:
            if isinstance(t, (bool, np.bool_)) or int(t) != t or t < 0:
                raise ValueError(
                    'Timestamps must be non-negative integers, got {0!r}'.format(t)
                )
            ts.append(int(t))
        ts.sort()
        for prev, cur in zip(ts, ts[1:]):
            if prev == cur:
                raise ValueError('Duplicate timestamp {0}'.format(cur))
        if sampling_rate != SAMPLING_RATE:
            raise ConfigurationError(
                'Only {0} Hz sampling is supported, got {1}'.format(
                    SAMPLING_RATE, sampling_rate
                )
            )
        self._timestamps = tuple(ts)
        self._rate = sampling_rate

    @property
    def timestamps(self):
        return self._timestamps

    @property
    def sampling_rate(self):
        return self._rate

    def as_array(self):
        return np.asarray(self._timestamps, dtype=np.int64)

    def __len__(self):
        return len(self._timestamps)

    def __iter__(self):
        return iter(self._timestamps)

    def __contains__(self, t):
        i = bisect_left(self._timestamps, t)
        return i < len(self._timestamps) and self._timestamps[i] == t

    def __eq__(self, other):
        if not isinstance(other, TemporalSupport):
            return NotImplemented
        return (self._timestamps == other._timestamps
                and self._rate == other._rate)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self._timestamps, self._rate))

    def __repr__(self):
        return 'TemporalSupport({0})'.format(list(self._timestamps))


def check_rates(a, b):
    if a.sampling_rate != b.sampling_rate:
        raise ConfigurationError(
            'Sampling rate mismatch: {0} vs {1}'.format(
                a.sampling_rate, b.sampling_rate
            )
        )


def support_intersection(a, b):
    """Exact set intersection of two supports.

    Examples
    ----------
    >>> support_intersection(TemporalSupport(range(1, 11)),
    ...                      TemporalSupport(range(6, 16))).timestamps
    (6, 7, 8, 9, 10)

    """
    check_rates(a, b)
    return TemporalSupport(
        np.intersect1d(a.as_array(), b.as_array(), assume_unique=True).tolist(),
        sampling_rate=a.sampling_rate
    )


def support_union(a, b):
    """Exact set union of two supports."""
    check_rates(a, b)
    return TemporalSupport(
        np.union1d(a.as_array(), b.as_array()).tolist(),
        sampling_rate=a.sampling_rate
    )


class Tube(object):
    """One bounding box per second over a (possibly fragmented) support."""
    __slots__ = ('_support', '_boxes', '_arrays')

    def __init__(self, support, boxes):
        if not isinstance(support, TemporalSupport):
            support = TemporalSupport(support)
        boxes = tuple(b if isinstance(b, BoundingBox) else BoundingBox(*b)
                      for b in boxes)
        if len(boxes) != len(support):
            raise ValueError(
                'Tube needs one box per timestamp, got {0} boxes for {1} '
                'timestamps'.format(len(boxes), len(support))
            )
        self._support = support
        self._boxes = boxes
        self._arrays = None

    @classmethod
    def empty(cls):
        return cls(TemporalSupport(), ())

    @classmethod
    def from_samples(cls, samples, diagnostics=None, query_id=None):
        """Build a tube from (second, box) pairs in any order.

        When two samples share a timestamp the box with the larger area is
        kept and a ``timestamp_collision`` event is recorded.
        """
        by_t = {}
        for t, box in samples:
            t = int(t)
            if not isinstance(box, BoundingBox):
                box = BoundingBox(*box)
            if t in by_t:
                if diagnostics is not None:
                    diagnostics.record(
                        'timestamp_collision', query_id,
                        'two boxes at t={0}s, keeping the larger'.format(t)
                    )
                else:
                    log.warning('[%s] two boxes at t=%ss, keeping the larger',
                                query_id, t)
                if box.area <= by_t[t].area:
                    continue
            by_t[t] = box
        ts = sorted(by_t)
        return cls(TemporalSupport(ts), [by_t[t] for t in ts])

    @property
    def support(self):
        return self._support

    @property
    def boxes(self):
        return self._boxes

    def samples(self):
        return list(zip(self._support.timestamps, self._boxes))

    def box_at(self, t):
        try:
            return self._boxes[self._support.timestamps.index(t)]
        except ValueError:
            return None

    def as_arrays(self):
        """Timestamps as an int array and boxes as an (N, 4) float array."""
        if self._arrays is None:
            ts = self._support.as_array()
            bx = np.asarray([b.to_list() for b in self._boxes],
                            dtype=np.float64).reshape(-1, 4)
            self._arrays = (ts, bx)
        return self._arrays

    def mean_area(self):
        if not self._boxes:
            raise ValueError('Mean area of an empty tube is undefined')
        _, bx = self.as_arrays()
        return float(np.mean((bx[:, 2] - bx[:, 0]) * (bx[:, 3] - bx[:, 1])))

    def is_empty(self):
        return len(self._support) == 0

    def __len__(self):
        return len(self._support)

    def __eq__(self, other):
        if not isinstance(other, Tube):
            return NotImplemented
        return self._support == other._support and self._boxes == other._boxes

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'Tube({0})'.format(
            {t: b.to_list() for t, b in self.samples()}
        )

    def to_list(self):
        return [{'t': t, 'box': b.to_list()} for t, b in self.samples()]

    @classmethod
    def from_list(cls, entries):
        return cls.from_samples([(e['t'], e['box']) for e in entries])


class IntervalSet(object):
    """Continuous time ranges in seconds, closed at both ends."""
    __slots__ = ('_intervals',)

    def __init__(self, intervals=(), query_id=None):
        ivs = []
        for iv in intervals:
            start, end = float(iv[0]), float(iv[1])
            if not (np.isfinite(start) and np.isfinite(end)):
                raise MalformedPredictionError(
                    'Non-finite time range ({0}, {1})'.format(start, end),
                    query_id=query_id
                )
            if start > end:
                raise MalformedPredictionError(
                    'Time range starts after it ends ({0} > {1})'.format(
                        start, end
                    ), query_id=query_id
                )
            ivs.append((start, end))
        self._intervals = tuple(ivs)

    @property
    def intervals(self):
        return self._intervals

    def is_normalized(self):
        """True when the ranges are sorted and pairwise disjoint."""
        return all(a[1] < b[0] for a, b in zip(self._intervals,
                                               self._intervals[1:]))

    def measure(self):
        return sum(e - s for s, e in self._intervals)

    def __len__(self):
        return len(self._intervals)

    def __iter__(self):
        return iter(self._intervals)

    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self._intervals == other._intervals

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'IntervalSet({0})'.format(list(self._intervals))

    def to_list(self):
        return [[s, e] for s, e in self._intervals]


def normalize_intervals(raw, query_id=None):
    """Sort a set of ranges and merge the overlapping or touching ones.

    Parameters
    ----------
    raw : IntervalSet or iterable of (start, end)
    query_id : str, optional
        Reported in the error for a malformed range

    Returns
    ----------
    IntervalSet, sorted and pairwise disjoint

    Examples
    ----------
    >>> normalize_intervals([(1, 5), (3, 7)])
    IntervalSet([(1.0, 7.0)])

    """
    if not isinstance(raw, IntervalSet):
        raw = IntervalSet(raw, query_id=query_id)
    if raw.is_normalized():
        return raw
    merged = []
    for start, end in sorted(raw.intervals):
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return IntervalSet(merged)


def intersection_measure(a, b):
    """Total length shared by two normalized interval sets."""
    ia = a.intervals
    ib = b.intervals
    i = j = 0
    total = 0.
    while i < len(ia) and j < len(ib):
        lo = max(ia[i][0], ib[j][0])
        hi = min(ia[i][1], ib[j][1])
        if hi > lo:
            total += hi - lo
        if ia[i][1] < ib[j][1]:
            i += 1
        else:
            j += 1
    return total


def discretize(iv):
    """Integer seconds covered by a normalized interval set.

    Both endpoints are rounded half up and included.

    Examples
    ----------
    >>> discretize(IntervalSet([(2.4, 4.6)])).timestamps
    (2, 3, 4, 5)

    """
    seconds = set()
    for start, end in iv.intervals:
        seconds.update(range(round_half_up(start), round_half_up(end) + 1))
    return TemporalSupport(sorted(seconds))
