# author : vuemetrics developers
#
# date   : October 16, 2026

import io
import json
import os
import importlib.util

import numpy as np
import pytest

from vuemetrics.core import BoundingBox, Tube


HERE = os.path.dirname(os.path.abspath(__file__))


def random_box(rng):
    x = np.sort(rng.uniform(0., 1., 2))
    y = np.sort(rng.uniform(0., 1., 2))
    return BoundingBox(x[0], y[0], x[1], y[1])


def random_tube(rng, lo=0, hi=120, min_len=0):
    """Tube on a random (usually fragmented) subset of [lo, hi]."""
    n = int(rng.integers(min_len, hi - lo + 2))
    ts = np.sort(rng.choice(np.arange(lo, hi + 1), size=n, replace=False))
    xy = np.sort(rng.uniform(0., 1., (n, 2, 2)), axis=2)
    boxes = [BoundingBox(x[0], y[0], x[1], y[1]) for x, y in xy]
    return Tube([int(t) for t in ts], boxes)


def write_jsonl(path, records):
    with io.open(str(path), 'w', encoding='utf-8') as f:
        for r in records:
            f.write(json.dumps(r) + '\n')
    return str(path)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def jsonl(tmp_path):
    """Write records to a JSON-lines file under tmp_path."""
    def _write(name, records):
        return write_jsonl(tmp_path / name, records)
    return _write


def stg_annotation(qid, ts, box=(0.1, 0.1, 0.5, 0.5), duration=300.,
                   video='v1'):
    return {
        'v': 1, 'query_id': qid, 'video_id': video, 'duration_s': duration,
        'task': 'stg', 'query': 'the red car', 'modality': 'vision',
        'format': 'phrase',
        'gt': {'tube': [{'t': t, 'box': list(box)} for t in ts]},
    }


def tr_annotation(qid, intervals, duration=300., fmt='sentence',
                  modality='vision+audio'):
    return {
        'v': 1, 'query_id': qid, 'video_id': 'v-' + qid, 'duration_s': duration,
        'task': 'tr', 'query': 'someone opens the door', 'modality': modality,
        'format': fmt, 'gt': {'intervals': [list(iv) for iv in intervals]},
    }


def char_annotation(qid, segments, duration=120.):
    return {
        'v': 1, 'query_id': qid, 'video_id': 'v-' + qid, 'duration_s': duration,
        'task': 'char', 'query': 'transcribe the speaker',
        'gt': {'segments': segments},
    }


def mc_annotation(qid, options, answer, task_type=None, duration=200.):
    gt = {'options': options, 'answer': answer}
    if task_type is not None:
        gt['task_type'] = task_type
    return {
        'v': 1, 'query_id': qid, 'video_id': 'v-' + qid, 'duration_s': duration,
        'task': 'mc', 'query': 'why does she leave?', 'gt': gt,
    }


SEGMENT = {
    'text': 'Hello everyone.',
    'start': 62.4,
    'end': 65.0,
    'boxes': [
        {'timestamp': 62.4, 'box_2d': [0.400, 0.150, 0.600, 0.350]},
        {'timestamp': 63.0, 'box_2d': [0.405, 0.155, 0.605, 0.355]},
    ],
}


@pytest.fixture
def stg_annotations():
    return [
        stg_annotation('q1', range(10, 20), duration=45.),
        stg_annotation('q2', [3, 4, 8, 9], box=(0., 0., 1., 1.),
                       duration=700.),
        stg_annotation('q3', range(100, 102), box=(0.2, 0.2, 0.3, 0.3),
                       duration=387.),
    ]


@pytest.fixture
def tr_annotations():
    return [
        tr_annotation('t1', [(10, 20)], duration=30., fmt='keyword',
                      modality='audio'),
        tr_annotation('t2', [(30, 35), (50.5, 60)], duration=400.),
        tr_annotation('t3', [(100, 160)], duration=4000., fmt='phrase',
                      modality='vision'),
    ]


@pytest.fixture
def char_annotations():
    second = {'text': 'Nice to meet you', 'start': 70., 'end': 72.,
              'boxes': [{'timestamp': 70., 'box_2d': [0.1, 0.1, 0.2, 0.2]}]}
    return [
        char_annotation('c1', [SEGMENT, second]),
        char_annotation('c2', [{'text': 'Where were you', 'start': 1.,
                                'end': 3., 'boxes': []}], duration=240.),
    ]


@pytest.fixture
def mc_annotations():
    return [
        mc_annotation('m1', ['red', 'green', 'blue'], 0, 'Perception'),
        mc_annotation('m2', ['yes', 'no'], 1, 'Perception'),
        mc_annotation('m3', ['a', 'b', 'c', 'd'], 3, 'Social Cognition'),
    ]


@pytest.fixture(scope='session')
def vueeval():
    """The command line script as a module."""
    path = os.path.join(HERE, os.pardir, 'scripts', 'vueeval.py')
    spec = importlib.util.spec_from_file_location('vueeval', path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module
