import json

import pytest

from vuemetrics.core import Tube
from vuemetrics.dataset import QueryAnnotation, annotation_from_dict
from vuemetrics.dataset import annotation_to_dict, bucket_object_area
from vuemetrics.dataset import bucket_object_size, bucket_tube_duration
from vuemetrics.dataset import bucket_video_duration, is_sparse_tube
from vuemetrics.dataset import load_annotations, render_validation
from vuemetrics.dataset import slice_layout, slices_for, validate
from vuemetrics.enums import Benchmark, Task
from vuemetrics.errors import AnnotationError
from vuemetrics.misc import Diagnostics
from vuemetrics.plotqa import McItem
from vuemetrics.records import OVERALL, SliceKey

from conftest import mc_annotation, stg_annotation
from conftest import tr_annotation


@pytest.mark.parametrize('duration, label', [
    (30., 'ultra-short'), (59.999, 'ultra-short'), (60., 'short'),
    (387., 'short'), (599.9, 'short'), (600., 'medium'),
    (1799., 'medium'), (1800., 'long'), (3599., 'long'),
    (3600., 'ultra-long'), (10000., 'ultra-long'),
])
def test_tr_video_buckets(duration, label):
    assert bucket_video_duration(duration, Benchmark.TR) == label


@pytest.mark.parametrize('duration, label', [
    (30., 'ultra-short'), (60., 'short'), (600., 'medium'), (1799., 'medium'),
])
def test_stg_video_buckets(duration, label):
    assert bucket_video_duration(duration, Benchmark.STG) == label


def test_stg_video_beyond_buckets():
    diagnostics = Diagnostics()
    assert bucket_video_duration(1800., Benchmark.STG, diagnostics, 'q') == \
        'medium'
    assert diagnostics['out_of_range_bucket'] == 1


@pytest.mark.parametrize('duration, label', [
    (89.9, '<90s'), (90., '90-150s'), (149., '90-150s'), (150., '150-210s'),
    (210., '>210s'),
])
def test_plot_video_buckets(duration, label):
    assert bucket_video_duration(duration, Benchmark.PLOT) == label


def test_video_duration_must_be_positive():
    with pytest.raises(ValueError):
        bucket_video_duration(0.)


@pytest.mark.parametrize('n, label', [
    (1, 'micro-short'), (2, 'micro-short'), (3, 'ultra-short'),
    (9, 'ultra-short'), (10, 'short'), (45, 'short'), (60, 'short'),
])
def test_tube_buckets(n, label):
    assert bucket_tube_duration(n) == label


def test_tube_bucket_out_of_spec():
    diagnostics = Diagnostics()
    assert bucket_tube_duration(61, diagnostics, 'q') == 'short'
    assert diagnostics['out_of_range_bucket'] == 1
    with pytest.raises(ValueError):
        bucket_tube_duration(0)


@pytest.mark.parametrize('area, benchmark, label', [
    (0.0999, Benchmark.STG, 'small'), (0.10, Benchmark.STG, 'medium'),
    (0.2999, Benchmark.STG, 'medium'), (0.30, Benchmark.STG, 'large'),
    (0.0499, Benchmark.PLOT, 'small'), (0.05, Benchmark.PLOT, 'medium'),
    (0.1999, Benchmark.PLOT, 'medium'), (0.20, Benchmark.PLOT, 'large'),
])
def test_object_area_buckets(area, benchmark, label):
    assert bucket_object_area(area, benchmark) == label


def test_object_size_examples():
    assert bucket_object_size(Tube([0, 1], [[0, 0, .5, .5]] * 2)) == 'medium'
    assert bucket_object_size(Tube([0], [[0, 0, 1, 1]])) == 'large'
    tube = Tube([0, 1], [[0, 0, .2, .2], [0, 0, .3, .2]])
    assert tube.mean_area() == pytest.approx(0.05)
    assert bucket_object_size(tube) == 'small'
    with pytest.raises(ValueError):
        bucket_object_size(Tube.empty())


def test_sparse_tube():
    assert is_sparse_tube(Tube([0, 2, 4], [[0, 0, 1, 1]] * 3))
    assert not is_sparse_tube(Tube([0, 2], [[0, 0, 1, 1]] * 2))
    assert not is_sparse_tube(Tube([0, 1, 5, 9], [[0, 0, 1, 1]] * 4))
    assert not is_sparse_tube(Tube([3, 8, 15], [[0, 0, 1, 1]] * 3))
    assert is_sparse_tube(Tube([1, 4, 7, 10], [[0, 0, 1, 1]] * 4))


def test_fragmented_tube_loads(jsonl):
    path = jsonl('ann.jsonl', [stg_annotation('frag', [3, 8, 15])])
    annotations = load_annotations(path)
    assert annotations[0].gt.support.timestamps == (3, 8, 15)
    assert validate(annotations).errors == []


def test_load_annotations(jsonl, stg_annotations, tr_annotations,
                          mc_annotations):
    path = jsonl('ann.jsonl', stg_annotations[:1] + tr_annotations[:1] +
                 mc_annotations[:1])
    annotations = load_annotations(path)
    assert [a.query_id for a in annotations] == ['q1', 't1', 'm1']
    assert isinstance(annotations[0].gt, Tube)
    assert annotations[1].gt.intervals == ((10., 20.),)
    assert annotations[2].gt == McItem('m1', ('red', 'green', 'blue'), 0,
                                       None, 'Perception')


def test_annotation_dict_round_trip(stg_annotations, tr_annotations,
                                    char_annotations, mc_annotations):
    for d in (stg_annotations + tr_annotations + char_annotations +
              mc_annotations):
        a = annotation_from_dict(d)
        assert annotation_from_dict(
            json.loads(json.dumps(annotation_to_dict(a)))
        ) == a


def bad_line(error):
    d = stg_annotation('bad', [1, 2, 3])
    if error == 'version':
        d['v'] = 2
    elif error == 'duration':
        d['duration_s'] = 0
    elif error == 'variant':
        d['gt'] = {'intervals': [[0, 1]]}
    elif error == 'missing':
        del d['video_id']
    elif error == 'sparse':
        d = stg_annotation('bad', [0, 2, 4, 6])
    elif error == 'empty':
        d = stg_annotation('bad', [])
    elif error == 'box':
        d['gt']['tube'][0]['box'] = [0.5, 0., 0.4, 1.]
    elif error == 'modality':
        d['modality'] = 'smell'
    elif error == 'answer':
        d = mc_annotation('bad', ['a', 'b'], 2)
    elif error == 'tr_empty':
        d = tr_annotation('bad', [(5, 5)])
    return d


@pytest.mark.parametrize('error', [
    'version', 'duration', 'variant', 'missing', 'sparse', 'empty', 'box',
    'modality', 'answer', 'tr_empty',
])
def test_schema_violations_report_line(jsonl, error):
    good = stg_annotation('ok', [1, 2])
    path = jsonl('ann.jsonl', [good, bad_line(error)])
    with pytest.raises(AnnotationError) as exc:
        load_annotations(path)
    assert exc.value.line == 2
    assert 'line 2' in str(exc.value)


def test_non_1hz_message(jsonl):
    path = jsonl('ann.jsonl', [bad_line('sparse')])
    with pytest.raises(AnnotationError, match='non-1Hz tube'):
        load_annotations(path)


def test_duplicate_query_id(jsonl):
    path = jsonl('ann.jsonl', [stg_annotation('q', [1]),
                               stg_annotation('q', [2])])
    with pytest.raises(AnnotationError, match='duplicate'):
        load_annotations(path)


def test_invalid_json_line(tmp_path):
    path = tmp_path / 'ann.jsonl'
    path.write_text(json.dumps(stg_annotation('q', [1])) + '\n\n{oops\n')
    with pytest.raises(AnnotationError) as exc:
        load_annotations(str(path))
    assert exc.value.line == 3


def test_slices_for(stg_annotations, tr_annotations, char_annotations,
                    mc_annotations):
    q1 = annotation_from_dict(stg_annotations[0])
    assert slices_for(q1) == (
        SliceKey('video_length', 'ultra-short'),
        SliceKey('tube_duration', 'short'),
        SliceKey('object_size', 'medium'),
    )
    t2 = annotation_from_dict(tr_annotations[1])
    assert slices_for(t2) == (
        SliceKey('video_length', 'short'),
        SliceKey('format', 'sentence'),
        SliceKey('modality', 'vision+audio'),
    )
    c1 = annotation_from_dict(char_annotations[0])
    assert slices_for(c1) == (
        SliceKey('video_length', '90-150s'),
        SliceKey('object_size', 'small'),
    )
    c2 = annotation_from_dict(char_annotations[1])
    assert slices_for(c2) == (SliceKey('video_length', '>210s'),)
    m3 = annotation_from_dict(mc_annotations[2])
    assert slices_for(m3)[-1] == SliceKey('task_type', 'Social Cognition')


def test_slice_layout(mc_annotations):
    stg = slice_layout(Task.STG)
    assert stg[:3] == [SliceKey('video_length', 'ultra-short'),
                       SliceKey('video_length', 'short'),
                       SliceKey('video_length', 'medium')]
    assert len(stg) == 9
    tr = slice_layout('tr')
    assert SliceKey('video_length', 'ultra-long') in tr
    assert SliceKey('modality', 'audio') in tr
    assert SliceKey('format', 'keyword') in tr
    annotations = [annotation_from_dict(d) for d in mc_annotations]
    mc = slice_layout(Task.MC, annotations)
    assert mc[-2:] == [SliceKey('task_type', 'Perception'),
                       SliceKey('task_type', 'Social Cognition')]


def test_validate_histograms(stg_annotations, tr_annotations):
    annotations = [annotation_from_dict(d)
                   for d in stg_annotations + tr_annotations]
    report = validate(annotations)
    assert report.errors == []
    assert report.n_total == 6
    assert report.per_task == {'stg': 3, 'tr': 3}
    hist = dict(report.histograms['stg'])
    assert hist[OVERALL] == 3
    for dimension in ('video_length', 'tube_duration', 'object_size'):
        assert sum(n for k, n in hist.items()
                   if k.dimension == dimension) == 3
    assert hist[SliceKey('tube_duration', 'micro-short')] == 1
    assert hist[SliceKey('object_size', 'large')] == 1
    tr = dict(report.histograms['tr'])
    assert tr[SliceKey('video_length', 'ultra-long')] == 1
    assert tr[SliceKey('modality', 'audio')] == 1


def test_validate_collects_errors(stg_annotations):
    good = annotation_from_dict(stg_annotations[0])
    sparse = QueryAnnotation('s', 'v', 10., Task.STG, '', None, None,
                             Tube([0, 2, 4], [[0, 0, 1, 1]] * 3))
    report = validate([good, sparse, good])
    assert report.per_task == {'stg': 1}
    assert len(report.errors) == 2
    assert any('non-1Hz' in e for e in report.errors)
    assert any('duplicate' in e for e in report.errors)


def test_render_validation(stg_annotations):
    report = validate([annotation_from_dict(d) for d in stg_annotations])
    md = render_validation(report)
    assert '| overall | all | 3 |' in md
    assert '| tube_duration | micro-short | 1 |' in md
    d = json.loads(render_validation(report, 'json'))
    assert d['per_task'] == {'stg': 3}
    assert d['histograms']['stg'][0] == {'dimension': 'overall',
                                         'bucket': 'all', 'n': 3}
