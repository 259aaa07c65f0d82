import pytest

from vuemetrics.core import BoundingBox, Tube, box_iou
from vuemetrics.errors import InvalidAnnotationError
from vuemetrics.misc import Diagnostics
from vuemetrics.records import OVERALL, ScoreRecord, SliceKey
from vuemetrics.stg import aggregate_stg, frame_iou, merge_tubes
from vuemetrics.stg import overlap_stats, score_tube, spatiotemporal_scores
from vuemetrics.stg import temporal_scores

from conftest import random_tube


A = [0., 0., 0.5, 0.5]
B = [0.25, 0.25, 0.75, 0.75]


def const_tube(ts, box):
    ts = list(ts)
    return Tube(ts, [box] * len(ts))


@pytest.fixture
def shifted():
    return const_tube(range(1, 11), A), const_tube(range(6, 16), B)


def test_frame_iou(shifted):
    pred, gt = shifted
    assert frame_iou(pred, gt, 0) == 0.
    assert frame_iou(pred, gt, 2) == 0.
    assert frame_iou(pred, gt, 7) == pytest.approx(1. / 7.)


def test_overlap_stats(shifted):
    stats = overlap_stats(*shifted)
    assert stats.n_inter == 5
    assert stats.n_union == 15
    assert stats.s_sum == pytest.approx(5. / 7., abs=1e-15)
    same = const_tube(range(10), A)
    stats = overlap_stats(same, same)
    assert (stats.s_sum, stats.n_inter, stats.n_union) == (10., 10, 10)
    stats = overlap_stats(const_tube([1], A), const_tube([2], A))
    assert (stats.s_sum, stats.n_inter) == (0., 0)


def test_temporal_scores(shifted):
    ts = temporal_scores(overlap_stats(*shifted))
    assert ts.t_p == 0.5
    assert ts.t_r == 0.5
    assert ts.t_iou == 5. / 15.
    gt = shifted[1]
    assert tuple(temporal_scores(overlap_stats(gt, gt))) == (1., 1., 1.)
    assert tuple(temporal_scores(overlap_stats(Tube.empty(), gt))) == \
        (0., 0., 0.)


def test_spatiotemporal_scores(shifted):
    vs = spatiotemporal_scores(overlap_stats(*shifted))
    assert vs.v_p == pytest.approx(5. / 7. / 10., abs=1e-15)
    assert vs.v_r == pytest.approx(5. / 7. / 10., abs=1e-15)
    assert vs.v_iou == pytest.approx(5. / 7. / 15., abs=1e-15)
    assert vs.v_iou_int == pytest.approx(1. / 7., abs=1e-15)

    same = const_tube(range(4), B)
    assert tuple(spatiotemporal_scores(overlap_stats(same, same))) == \
        (1., 1., 1., 1.)

    vs = spatiotemporal_scores(overlap_stats(const_tube([1], A),
                                             const_tube([2], A)))
    assert (vs.v_p, vs.v_r, vs.v_iou) == (0., 0., 0.)
    assert vs.v_iou_int is None


def test_empty_ground_truth_is_rejected():
    with pytest.raises(InvalidAnnotationError):
        temporal_scores(overlap_stats(const_tube([1], A), Tube.empty()))
    with pytest.raises(InvalidAnnotationError):
        spatiotemporal_scores(overlap_stats(Tube.empty(), Tube.empty()))


def test_metric_identities(rng):
    for _ in range(10000):
        pred = random_tube(rng)
        gt = random_tube(rng, min_len=1)
        s = overlap_stats(pred, gt)
        ts = temporal_scores(s)
        vs = spatiotemporal_scores(s)
        assert vs.v_iou * s.n_union == pytest.approx(s.s_sum, abs=1e-12)
        assert vs.v_r * s.n_gt == pytest.approx(s.s_sum, abs=1e-12)
        if s.n_pred:
            assert vs.v_p * s.n_pred == pytest.approx(s.s_sum, abs=1e-12)
        assert ts.t_iou <= min(ts.t_p, ts.t_r) + 1e-12
        assert vs.v_iou <= ts.t_iou + 1e-12
        if vs.v_iou_int is not None:
            assert vs.v_iou <= vs.v_iou_int + 1e-12


def brute_force(pred, gt):
    """Per-second loop over [0, 60]."""
    s = 0.
    n_inter = n_union = n_pred = n_gt = 0
    for t in range(61):
        bp, bg = pred.box_at(t), gt.box_at(t)
        n_pred += bp is not None
        n_gt += bg is not None
        if bp is not None and bg is not None:
            n_inter += 1
            s += box_iou(bp, bg)
        if bp is not None or bg is not None:
            n_union += 1
    if n_pred == 0:
        t_p = v_p = 0.
    else:
        t_p, v_p = n_inter / n_pred, s / n_pred
    return (t_p, n_inter / n_gt, n_inter / n_union, v_p, s / n_gt,
            s / n_union)


def test_brute_force_oracle(rng):
    for _ in range(1000):
        pred = random_tube(rng, hi=60)
        gt = random_tube(rng, hi=60, min_len=1)
        s = overlap_stats(pred, gt)
        got = tuple(temporal_scores(s)) + tuple(spatiotemporal_scores(s))[:3]
        assert got == pytest.approx(brute_force(pred, gt), rel=1e-12,
                                    abs=1e-12)


def test_brute_force_oracle_fragmented():
    pred = const_tube([1, 2, 9, 10, 30], A)
    gt = Tube([2, 3, 9, 30, 31], [B, A, A, B, B])
    s = overlap_stats(pred, gt)
    got = tuple(temporal_scores(s)) + tuple(spatiotemporal_scores(s))[:3]
    assert got == pytest.approx(brute_force(pred, gt), abs=1e-12)


def test_adding_a_correct_box_never_lowers_scores(rng):
    checked = 0
    while checked < 500:
        pred = random_tube(rng, hi=60)
        gt = random_tube(rng, hi=60, min_len=1)
        missing = sorted(set(gt.support.timestamps) -
                         set(pred.support.timestamps))
        if not missing:
            continue
        t = missing[int(rng.integers(len(missing)))]
        better = Tube.from_samples(pred.samples() + [(t, gt.box_at(t))])
        before = overlap_stats(pred, gt)
        after = overlap_stats(better, gt)
        tb, ta = temporal_scores(before), temporal_scores(after)
        vb, va = spatiotemporal_scores(before), spatiotemporal_scores(after)
        assert ta.t_r >= tb.t_r - 1e-12
        assert ta.t_iou >= tb.t_iou - 1e-12
        assert va.v_r >= vb.v_r - 1e-12
        assert va.v_iou >= vb.v_iou - 1e-12
        checked += 1


def test_merge_tubes():
    diagnostics = Diagnostics()
    tubes = [const_tube([1, 2], A), const_tube([2, 3], [0, 0, 1, 1])]
    merged = merge_tubes(tubes, diagnostics=diagnostics, query_id='q')
    assert merged.support.timestamps == (1, 2, 3)
    assert merged.box_at(2) == BoundingBox(0, 0, 1, 1)
    assert diagnostics['timestamp_collision'] == 1


def test_score_tube_empty_prediction():
    gt = const_tube(range(5), A)
    rec = score_tube('q', None, gt)
    assert rec.metrics['t_p'] is None
    assert rec.metrics['v_p'] is None
    assert rec.metrics['t_iou'] == 0.
    assert rec.metrics['v_iou_int'] is None
    assert 'empty_prediction' in rec.flags


def record(qid, slices=(), **metrics):
    return ScoreRecord(qid, 'stg', tuple(slices), metrics, {}, ())


def test_aggregate_mean():
    rows = aggregate_stg([record('a', v_iou=0.2), record('b', v_iou=0.4)])
    key, n, values = rows[0]
    assert key == OVERALL and n == 2
    assert values['v_iou'] == pytest.approx(0.3)


def test_aggregate_excludes_absent_v_iou_int():
    rows = aggregate_stg([record('a', v_iou_int=0.5),
                          record('b', v_iou_int=None)])
    assert rows[0][2]['v_iou_int'] == 0.5


def test_aggregate_all_empty_predictions():
    gt = const_tube(range(3), A)
    rows = aggregate_stg([score_tube(q, None, gt) for q in 'abc'])
    values = rows[0][2]
    assert values['t_iou'] == 0.
    assert values['v_iou'] == 0.
    assert values['t_p'] is None
    assert values['v_p'] is None


def test_aggregate_empty_slice_is_na():
    layout = [SliceKey('video_length', 'medium')]
    rows = aggregate_stg([record('a', v_iou=0.2)], layout=layout)
    key, n, values = rows[1]
    assert key == SliceKey('video_length', 'medium')
    assert n == 0
    assert all(v is None for v in values.values())


def test_slicing_then_aggregating(rng):
    long_ = SliceKey('video_length', 'short')
    short = SliceKey('video_length', 'ultra-short')
    recs = []
    for i in range(50):
        key = long_ if rng.uniform() < 0.5 else short
        recs.append(record('q{0:02d}'.format(i), [key],
                           v_iou=float(rng.uniform())))
    rows = {k: v for k, _, v in aggregate_stg(recs)}
    for key in (long_, short):
        subset = [r for r in recs if key in r.slices]
        assert rows[key]['v_iou'] == aggregate_stg(subset)[0][2]['v_iou']
