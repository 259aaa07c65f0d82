# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Plot-track scoring: character speech segments (temporal IoU, word error
rate, face box IoU) and multiple-choice reasoning accuracy
"""

from __future__ import absolute_import, division, print_function

import logging
import string
from collections import defaultdict, namedtuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from vuemetrics.core import BoundingBox, box_iou
from vuemetrics.misc import mean_or_none
from vuemetrics.records import ScoreRecord, group_by_slice, record_slices
from vuemetrics.records import sum_counts

log = logging.getLogger(__name__)


BOX_TOLERANCE = 0.020
"""Maximum timestamp difference in seconds for two boxes to be paired."""


BOX_WINDOW = 0.5
"""Box timestamps may fall this far outside their segment."""


_EPS = 1e-9


class TranscriptSegment(object):
    """A timed speech segment with optional timestamped face boxes.

    Parameters
    ----------
    start, end : float
        Segment bounds in seconds
    text : str
    boxes : list of (float, BoundingBox or list)

    """
    __slots__ = ('start', 'end', 'text', 'boxes')

    def __init__(self, start, end, text='', boxes=()):
        start, end = float(start), float(end)
        if not (np.isfinite(start) and np.isfinite(end)):
            raise ValueError(
                'Non-finite segment bounds ({0}, {1})'.format(start, end)
            )
        if start > end:
            raise ValueError(
                'Segment starts after it ends ({0} > {1})'.format(start, end)
            )
        bx = []
        for t, box in boxes:
            t = float(t)
            if not start - BOX_WINDOW <= t <= end + BOX_WINDOW:
                raise ValueError(
                    'Box at {0}s outside segment [{1}, {2}]'.format(t, start, end)
                )
            if not isinstance(box, BoundingBox):
                box = BoundingBox(*box)
            bx.append((t, box))
        bx.sort(key=lambda x: x[0])
        self.start = start
        self.end = end
        self.text = '' if text is None else str(text)
        self.boxes = tuple(bx)

    def __eq__(self, other):
        if not isinstance(other, TranscriptSegment):
            return NotImplemented
        return ((self.start, self.end, self.text, self.boxes) ==
                (other.start, other.end, other.text, other.boxes))

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'TranscriptSegment({0}, {1}, {2!r}, {3} boxes)'.format(
            self.start, self.end, self.text, len(self.boxes)
        )

    def to_dict(self):
        return {
            'text': self.text, 'start': self.start, 'end': self.end,
            'boxes': [{'timestamp': t, 'box_2d': b.to_list()}
                      for t, b in self.boxes]
        }

    @classmethod
    def from_dict(cls, d):
        boxes = [(b['timestamp'], b['box_2d']) for b in d.get('boxes') or ()]
        return cls(d['start'], d['end'], d.get('text', ''), boxes)


SegmentMatching = namedtuple(
    'SegmentMatching', 'pairs unmatched_gt unmatched_pred'
)
"""pairs are (gt_index, pred_index, t_iou) ordered by ground-truth start."""


WerBreakdown = namedtuple(
    'WerBreakdown', 'substitutions deletions insertions n_ref wer'
)


BoxMatchResult = namedtuple(
    'BoxMatchResult', 'siou n_box n_gt_boxes coverage iou_sum'
)


McItem = namedtuple(
    'McItem', 'question_id options gt_answer pred_answer task_type'
)
"""pred_answer is None when no option could be read from the answer."""
McItem.__new__.__defaults__ = (None, None)


CHAR_METRICS = ('t_iou', 'wer', 's_iou', 'seg_coverage', 'box_coverage')


MC_METRICS = ('accuracy', 'macro_accuracy')


def segment_tiou(a, b):
    """Temporal IoU of two segments, 0 when neither has any length."""
    inter = max(0., min(a.end, b.end) - max(a.start, b.start))
    union = (a.end - a.start) + (b.end - b.start) - inter
    if union <= 0.:
        return 0.
    return inter / union


def tiou_matrix(gt, pred):
    m = np.zeros((len(gt), len(pred)), dtype=np.float64)
    for i, g in enumerate(gt):
        for j, p in enumerate(pred):
            m[i, j] = segment_tiou(g, p)
    return m


def _best_total(m, rows, cols):
    if not rows or not cols:
        return 0.
    sub = m[np.ix_(rows, cols)]
    r, c = linear_sum_assignment(sub, maximize=True)
    return float(sub[r, c].sum())


def _start_order(segs):
    return sorted(range(len(segs)),
                  key=lambda i: (segs[i].start, segs[i].end, i))


def match_segments(gt, pred):
    """One-to-one matching of segments maximizing the total temporal IoU.

    Among the optimal assignments the one that pairs earlier ground-truth
    segments with earlier predictions is chosen. Pairs that do not overlap
    are never formed.

    Parameters
    ----------
    gt : list of TranscriptSegment
    pred : list of TranscriptSegment

    Returns
    ----------
    SegmentMatching

    """
    m = tiou_matrix(gt, pred)
    gt_order = _start_order(gt)
    pred_order = _start_order(pred)
    target = _best_total(m, gt_order, pred_order)
    tol = _EPS * max(1., target)

    pairs = []
    fixed = 0.
    rows = list(gt_order)
    cols = list(pred_order)
    for i in gt_order:
        rows.remove(i)
        for j in cols:
            if m[i, j] <= 0.:
                continue
            rest = [c for c in cols if c != j]
            if fixed + m[i, j] + _best_total(m, rows, rest) >= target - tol:
                pairs.append((i, j, float(m[i, j])))
                fixed += m[i, j]
                cols = rest
                break
    matched_gt = set(p[0] for p in pairs)
    matched_pred = set(p[1] for p in pairs)
    return SegmentMatching(
        pairs=pairs,
        unmatched_gt=sorted(set(range(len(gt))) - matched_gt),
        unmatched_pred=sorted(set(range(len(pred))) - matched_pred)
    )


def mean_segment_tiou(matching):
    """Mean temporal IoU over matched pairs, 0 without any pair."""
    if not matching.pairs:
        return 0.
    return mean_or_none(p[2] for p in matching.pairs)


def tokenize(text):
    """Lowercase words with surrounding punctuation removed.

    Examples
    ----------
    >>> tokenize('Hello, World!  "ok"')
    ['hello', 'world', 'ok']

    """
    tokens = (w.strip(string.punctuation) for w in text.lower().split())
    return [w for w in tokens if w]


def edit_ops(ref, hyp):
    """Substitutions, deletions and insertions of a minimum edit alignment.

    Parameters
    ----------
    ref, hyp : list of str

    Returns
    ----------
    (int, int, int)

    """
    n, k = len(ref), len(hyp)
    dist = np.zeros((n + 1, k + 1), dtype=np.int64)
    dist[:, 0] = np.arange(n + 1)
    dist[0, :] = np.arange(k + 1)
    for i in range(1, n + 1):
        for j in range(1, k + 1):
            sub = dist[i-1, j-1] + (ref[i-1] != hyp[j-1])
            dist[i, j] = min(sub, dist[i-1, j] + 1, dist[i, j-1] + 1)

    s = d = ins = 0
    i, j = n, k
    while i > 0 or j > 0:
        if i > 0 and j > 0 and \
           dist[i, j] == dist[i-1, j-1] + (ref[i-1] != hyp[j-1]):
            s += ref[i-1] != hyp[j-1]
            i, j = i - 1, j - 1
        elif i > 0 and dist[i, j] == dist[i-1, j] + 1:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return int(s), d, ins


def wer_breakdown(ref, hyp):
    """Word error rate of token lists.

    With an empty reference the rate is the insertion count over 1.

    Examples
    ----------
    >>> wer_breakdown(['hello', 'world'], ['hello', 'there', 'world']).wer
    0.5

    """
    s, d, i = edit_ops(ref, hyp)
    return WerBreakdown(s, d, i, len(ref), (s + d + i) / max(len(ref), 1))


def pool_wer(breakdowns):
    """Corpus-level WER: total errors over total reference words.

    Without reference words the rate is the error count, and None when
    there is nothing on either side.
    """
    s = d = i = n = 0
    for b in breakdowns:
        s += b.substitutions
        d += b.deletions
        i += b.insertions
        n += b.n_ref
    errors = s + d + i
    if n > 0:
        wer = errors / n
    elif errors > 0:
        wer = float(errors)
    else:
        wer = None
    return WerBreakdown(s, d, i, n, wer)


def corpus_wer(matching, gt, pred):
    """WER between the concatenated texts of matched segment pairs.

    Pairs are concatenated in ground-truth start order.
    """
    ref = []
    hyp = []
    for i, j, _ in matching.pairs:
        ref.extend(tokenize(gt[i].text))
        hyp.extend(tokenize(pred[j].text))
    return wer_breakdown(ref, hyp)


def match_boxes(matching, gt, pred, tolerance=BOX_TOLERANCE):
    """Pair face boxes of matched segments by closest timestamp.

    Inside each matched pair boxes are paired greedily by ascending
    timestamp difference, each box at most once, and pairs further apart
    than `tolerance` seconds are dropped.

    Returns
    ----------
    BoxMatchResult
        siou is 0 without any box pair; coverage is None when the matched
        ground-truth segments carry no boxes

    """
    iou_sum = 0.
    n_box = 0
    n_gt_boxes = 0
    for i, j, _ in matching.pairs:
        gb = gt[i].boxes
        pb = pred[j].boxes
        n_gt_boxes += len(gb)
        cand = []
        for a, (tg, _) in enumerate(gb):
            for b, (tp, _) in enumerate(pb):
                dt = abs(tg - tp)
                if dt <= tolerance + _EPS:
                    cand.append((dt, a, b))
        cand.sort()
        used_g = set()
        used_p = set()
        for _, a, b in cand:
            if a in used_g or b in used_p:
                continue
            used_g.add(a)
            used_p.add(b)
            iou_sum += box_iou(gb[a][1], pb[b][1])
            n_box += 1
    return BoxMatchResult(
        siou=iou_sum / n_box if n_box else 0.,
        n_box=n_box,
        n_gt_boxes=n_gt_boxes,
        coverage=n_box / n_gt_boxes if n_gt_boxes else None,
        iou_sum=iou_sum
    )


def mc_accuracy(items):
    """Share of items answered with the ground-truth option.

    Examples
    ----------
    >>> items = [McItem('q1', ['a', 'b'], 0, 0), McItem('q2', ['a', 'b'], 1, None)]
    >>> mc_accuracy(items)
    0.5

    """
    items = list(items)
    if not items:
        raise ValueError('Accuracy of an empty question set is undefined')
    correct = sum(1 for x in items if x.pred_answer is not None
                  and x.pred_answer == x.gt_answer)
    return correct / len(items)


def mc_macro_accuracy(items):
    """Mean over task types of the per-type accuracy."""
    by_type = defaultdict(list)
    for x in items:
        by_type[x.task_type].append(x)
    if not by_type:
        raise ValueError('Accuracy of an empty question set is undefined')
    return mean_or_none(mc_accuracy(v) for v in by_type.values())


CHAR_COUNTS = (
    'tiou_sum', 'n_match', 'n_gt_segments', 'substitutions', 'deletions',
    'insertions', 'n_ref', 'iou_sum', 'n_box', 'n_gt_boxes'
)


def _char_values(c):
    """Char metrics from (pooled) counters."""
    wer = pool_wer([WerBreakdown(c['substitutions'], c['deletions'],
                                 c['insertions'], c['n_ref'], None)]).wer
    return {
        't_iou': c['tiou_sum'] / c['n_match'] if c['n_match'] else 0.,
        'wer': wer,
        's_iou': c['iou_sum'] / c['n_box'] if c['n_box'] else 0.,
        'seg_coverage': (c['n_match'] / c['n_gt_segments']
                         if c['n_gt_segments'] else None),
        'box_coverage': (c['n_box'] / c['n_gt_boxes']
                         if c['n_gt_boxes'] else None),
    }


def score_char(query_id, pred, gt, slices=(), flags=(),
               tolerance=BOX_TOLERANCE, diagnostics=None):
    """Score the character segments of one query.

    Parameters
    ----------
    query_id : str
    pred : list of TranscriptSegment or None
    gt : list of TranscriptSegment
    slices : tuple of SliceKey
    flags : tuple of str
    tolerance : float
        Box alignment window in seconds
    diagnostics : Diagnostics, optional

    Returns
    ----------
    ScoreRecord

    """
    pred = list(pred or ())
    matching = match_segments(gt, pred)
    wer = corpus_wer(matching, gt, pred)
    boxes = match_boxes(matching, gt, pred, tolerance)
    counts = {
        'tiou_sum': sum(p[2] for p in matching.pairs),
        'n_match': len(matching.pairs),
        'n_gt_segments': len(gt),
        'substitutions': wer.substitutions,
        'deletions': wer.deletions,
        'insertions': wer.insertions,
        'n_ref': wer.n_ref,
        'iou_sum': boxes.iou_sum,
        'n_box': boxes.n_box,
        'n_gt_boxes': boxes.n_gt_boxes,
    }
    flags = tuple(flags)
    if not pred:
        flags += ('empty_prediction',)
    if wer.n_ref == 0 and wer.insertions > 0:
        flags += ('wer_empty_reference',)
        if diagnostics is not None:
            diagnostics.record(
                'wer_empty_reference', query_id,
                'matched segments have no reference words, WER counts '
                'insertions over 1'
            )
    return ScoreRecord(query_id, 'char', tuple(slices), _char_values(counts),
                       counts, tuple(sorted(set(flags))))


def aggregate_char(records, slicer=record_slices, layout=None):
    """Pooled character metrics per slice.

    Temporal IoU averages over all matched segment pairs, WER divides all
    errors by all reference words, and sIoU averages over all paired boxes.
    """
    rows = []
    for key, recs in group_by_slice(records, slicer, layout):
        if recs:
            values = _char_values(sum_counts(recs, CHAR_COUNTS))
        else:
            values = dict.fromkeys(CHAR_METRICS)
        rows.append((key, len(recs), values))
    return rows


def score_mc(item, slices=(), flags=()):
    """Score one multiple-choice item."""
    correct = item.pred_answer is not None and item.pred_answer == item.gt_answer
    flags = tuple(flags)
    if item.pred_answer is None:
        flags += ('no_answer',)
    return ScoreRecord(
        item.question_id, 'mc', tuple(slices), {'correct': float(correct)},
        {'correct': int(correct)}, tuple(sorted(set(flags)))
    )


def record_task_type(record):
    for key in record.slices:
        if key[0] == 'task_type':
            return key[1]
    return None


def aggregate_mc(records, slicer=record_slices, layout=None,
                 task_type=record_task_type):
    """Micro and macro (over task types) accuracy per slice."""
    rows = []
    for key, recs in group_by_slice(records, slicer, layout):
        if recs:
            by_type = defaultdict(list)
            for r in recs:
                by_type[task_type(r)].append(r.metrics['correct'])
            values = {
                'accuracy': mean_or_none(r.metrics['correct'] for r in recs),
                'macro_accuracy': mean_or_none(
                    mean_or_none(v) for v in by_type.values()
                ),
            }
        else:
            values = dict.fromkeys(MC_METRICS)
        rows.append((key, len(recs), values))
    return rows
