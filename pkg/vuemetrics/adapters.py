# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Parsers turning raw model responses of each dialect into canonical tubes,
time ranges, transcript segments and multiple-choice answers
"""

from __future__ import absolute_import, division, print_function

import json
import math
import re
import logging
from collections import namedtuple
from functools import wraps

from vuemetrics.core import IntervalSet, Tube, clamp_box, normalize_intervals
from vuemetrics.enums import Dialect, Task, parse_dialect, parse_task
from vuemetrics.enums import task_name
from vuemetrics.errors import ConfigurationError, DialectParseError
from vuemetrics.errors import MalformedPredictionError
from vuemetrics.misc import Diagnostics, round_half_up
from vuemetrics.plotqa import BOX_WINDOW, TranscriptSegment
from vuemetrics.stg import merge_tubes

log = logging.getLogger(__name__)


INT_SCALE = 1000.
"""Integer coordinate range used by the gemini and qwen dialects."""


FRAME_CAP = 120


RawPrediction = namedtuple(
    'RawPrediction', 'query_id dialect payload context task'
)
"""Unparsed model response.

context is a dict with the optional keys duration_s, frame_cap and fps.
"""
RawPrediction.__new__.__defaults__ = (None, None)


CanonicalPrediction = namedtuple(
    'CanonicalPrediction', 'query_id task value flags'
)
"""Normalized prediction.

value is a Tube (stg), IntervalSet (tr), list of TranscriptSegment (char)
or option index / None (mc).
"""
CanonicalPrediction.__new__.__defaults__ = ((),)


class FrameSamplingPolicy(object):
    """Map sampled frame indices back to seconds.

    Videos shorter than `frame_cap` / `fps` seconds are sampled at `fps`,
    longer ones are subsampled uniformly to `frame_cap` frames. Without a
    frame cap every video is sampled at `fps`.

    Examples
    ----------
    >>> FrameSamplingPolicy(duration_s=240).frame_time(60)
    120
    >>> FrameSamplingPolicy(duration_s=100).frame_time(3)
    3

    """
    def __init__(self, duration_s=None, frame_cap=FRAME_CAP, fps=1.):
        if fps is None or fps <= 0:
            raise ConfigurationError('fps must be positive, got {0}'.format(fps))
        if frame_cap is not None and frame_cap < 1:
            raise ConfigurationError(
                'frame cap must be >= 1, got {0}'.format(frame_cap)
            )
        if duration_s is not None and duration_s <= 0:
            raise ConfigurationError(
                'duration must be positive, got {0}'.format(duration_s)
            )
        if frame_cap is not None and duration_s is None:
            raise ConfigurationError(
                'Frame sampling needs the video duration'
            )
        self.duration_s = duration_s
        self.frame_cap = frame_cap
        self.fps = float(fps)

    @classmethod
    def from_context(cls, context, frame_cap=FRAME_CAP, fps=1.):
        """Build from a prediction context dict, its keys win."""
        context = context or {}
        return cls(
            duration_s=context.get('duration_s'),
            frame_cap=context.get('frame_cap', frame_cap),
            fps=context.get('fps', fps)
        )

    def is_subsampled(self):
        return (self.frame_cap is not None and
                self.duration_s * self.fps >= self.frame_cap)

    @property
    def n_frames(self):
        """Number of frames the model saw, None when unbounded."""
        if self.is_subsampled():
            return self.frame_cap
        if self.duration_s is None:
            return None
        n = int(math.ceil(self.duration_s * self.fps))
        if self.frame_cap is not None:
            n = min(n, self.frame_cap)
        return max(n, 1)

    def frame_time(self, i):
        """Second at which 0-based frame `i` was sampled."""
        if self.is_subsampled():
            return round_half_up(i * self.duration_s / self.frame_cap)
        return round_half_up(i / self.fps)

    def time_frame(self, t):
        """Inverse of frame_time, None when no frame maps to second `t`."""
        if self.is_subsampled():
            i = round_half_up(t * self.frame_cap / self.duration_s)
        else:
            i = round_half_up(t * self.fps)
        n = self.n_frames
        if i < 0 or (n is not None and i >= n) or self.frame_time(i) != t:
            return None
        return i


def total(func):
    """Turn any failure of a payload parser into a DialectParseError."""
    @wraps(func)
    def wrapper(payload, *args, **kwargs):
        try:
            return func(payload, *args, **kwargs)
        except DialectParseError as exc:
            if exc.query_id is None:
                exc.query_id = kwargs.get('query_id')
            raise
        except ConfigurationError:
            raise
        except Exception as exc:
            raise DialectParseError(
                '{0}: {1}'.format(type(exc).__name__, exc), payload=payload,
                query_id=kwargs.get('query_id')
            )
    return wrapper


_FENCE = re.compile(r'```[a-zA-Z]*\s*(.*?)```', re.DOTALL)


def _text(payload):
    if isinstance(payload, bytes):
        return payload.decode('utf-8', errors='replace')
    return payload


def extract_json(payload):
    """Decode the first JSON array or object in a model response.

    Markdown code fences and any prose around the JSON are skipped.

    Examples
    ----------
    >>> extract_json('Sure!\\n```json\\n[1, 2]\\n```')
    [1, 2]

    """
    if not isinstance(payload, (str, bytes)):
        return payload
    text = _text(payload)
    fenced = _FENCE.search(text)
    if fenced is not None:
        text = fenced.group(1)
    decoder = json.JSONDecoder()
    for m in re.finditer(r'[\[{]', text):
        try:
            obj, _ = decoder.raw_decode(text, m.start())
        except ValueError:
            continue
        return obj
    raise DialectParseError('No JSON array or object found', payload=payload)


_CLOCK = re.compile(
    r'^(?:(?:(?P<h>\d+):)?(?P<m>\d+):)?(?P<s>\d+(?:\.\d+)?)$'
)


def parse_clock(value):
    """Seconds from ``SS``, ``MM:SS`` or ``HH:MM:SS`` (or a number).

    Examples
    ----------
    >>> parse_clock('06:27'), parse_clock('00:06:27'), parse_clock(12.5)
    (387.0, 387.0, 12.5)

    """
    if isinstance(value, bool):
        raise ValueError('Not a timestamp: {0!r}'.format(value))
    if isinstance(value, (int, float)):
        seconds = float(value)
    else:
        m = _CLOCK.match(str(value).strip())
        if m is None:
            raise ValueError('Not a timestamp: {0!r}'.format(value))
        s = float(m.group('s'))
        minutes = int(m.group('m') or 0)
        hours = m.group('h')
        if m.group('m') is not None and s >= 60:
            raise ValueError('Seconds out of range in {0!r}'.format(value))
        if hours is not None and minutes >= 60:
            raise ValueError('Minutes out of range in {0!r}'.format(value))
        seconds = int(hours or 0) * 3600 + minutes * 60 + s
    if not math.isfinite(seconds) or seconds < 0:
        raise ValueError('Not a timestamp: {0!r}'.format(value))
    return seconds


def format_clock(seconds, hours=False):
    """``MM:SS`` (``HH:MM:SS`` with `hours` or past one hour)."""
    seconds = int(seconds)
    h, rest = divmod(seconds, 3600)
    m, s = divmod(rest, 60)
    if hours or h:
        return '{0:02d}:{1:02d}:{2:02d}'.format(h, m, s)
    return '{0:02d}:{1:02d}'.format(m, s)


def _box(coords, scale, diagnostics, query_id):
    box, changed = clamp_box([float(c) / scale for c in coords])
    if changed:
        diagnostics.record(
            'clamp', query_id,
            'box {0} clamped to {1}'.format(list(coords), box.to_list())
        )
    return box


def _entries(obj):
    if isinstance(obj, dict):
        for key in ('tube', 'boxes', 'results'):
            if isinstance(obj.get(key), list):
                return obj[key]
        return [obj]
    if not isinstance(obj, list):
        raise TypeError('Expected a JSON array, got {0}'.format(
            type(obj).__name__
        ))
    return obj


def _tube(samples, diagnostics, query_id):
    return Tube.from_samples(samples, diagnostics=diagnostics,
                             query_id=query_id)


@total
def parse_gemini_tube(payload, diagnostics=None, query_id=None):
    """Tube from ``[{"timestamp": "MM:SS", "box_2d": [0..1000]}]``.

    Examples
    ----------
    >>> parse_gemini_tube('[{"timestamp":"00:30","box_2d":[100,200,300,400]}]')
    Tube({30: [0.1, 0.2, 0.3, 0.4]})

    """
    if diagnostics is None: diagnostics = Diagnostics()
    samples = []
    for e in _entries(extract_json(payload)):
        t = round_half_up(parse_clock(e['timestamp']))
        samples.append((t, _box(e['box_2d'], INT_SCALE, diagnostics, query_id)))
    return _tube(samples, diagnostics, query_id)


@total
def parse_qwen_tube(payload, diagnostics=None, query_id=None):
    """Tube from ``[{"time": seconds, "bbox_2d": [0..1000]}]``."""
    if diagnostics is None: diagnostics = Diagnostics()
    samples = []
    for e in _entries(extract_json(payload)):
        t = round_half_up(parse_clock(e['time']))
        samples.append((t, _box(e['bbox_2d'], INT_SCALE, diagnostics, query_id)))
    return _tube(samples, diagnostics, query_id)


@total
def parse_gpt_tube(payload, policy=None, diagnostics=None, query_id=None):
    """Tube from ``[{"frame": index, "box": [0..1]}]`` on sampled frames.

    Frames past the last sampled frame are skipped with a warning.
    """
    if policy is None:
        raise ConfigurationError(
            'The gpt dialect needs a frame sampling context'
        )
    if diagnostics is None: diagnostics = Diagnostics()
    n_frames = policy.n_frames
    samples = []
    for e in _entries(extract_json(payload)):
        frame = e['frame']
        if isinstance(frame, bool) or int(frame) != frame or frame < 0:
            raise ValueError('Bad frame index {0!r}'.format(frame))
        frame = int(frame)
        if n_frames is not None and frame >= n_frames:
            diagnostics.record(
                'frame_out_of_range', query_id,
                'frame {0} beyond the {1} sampled frames, skipped'.format(
                    frame, n_frames
                )
            )
            continue
        coords = e['box'] if 'box' in e else e['box_2d']
        samples.append((policy.frame_time(frame),
                        _box(coords, 1., diagnostics, query_id)))
    return _tube(samples, diagnostics, query_id)


@total
def parse_vidi_tube(payload, diagnostics=None, query_id=None):
    """Tube from ``[{"timestamp": "MM:SS" or seconds, "box_2d": [0..1]}]``."""
    if diagnostics is None: diagnostics = Diagnostics()
    samples = []
    for e in _entries(extract_json(payload)):
        t = round_half_up(parse_clock(e['timestamp']))
        samples.append((t, _box(e['box_2d'], 1., diagnostics, query_id)))
    return _tube(samples, diagnostics, query_id)


def parse_tube(payload, dialect, policy=None, diagnostics=None, query_id=None):
    """Dispatch to the tube parser of `dialect`."""
    if dialect is Dialect.GPT:
        return parse_gpt_tube(payload, policy=policy, diagnostics=diagnostics,
                              query_id=query_id)
    parser = {
        Dialect.GEMINI: parse_gemini_tube,
        Dialect.QWEN: parse_qwen_tube,
        Dialect.VIDI: parse_vidi_tube,
    }[dialect]
    return parser(payload, diagnostics=diagnostics, query_id=query_id)


def dump_tube(tube, dialect, policy=None):
    """Serialize a tube into the raw response schema of `dialect`."""
    entries = []
    for t, box in tube.samples():
        if dialect is Dialect.GEMINI:
            entries.append({
                'timestamp': format_clock(t),
                'box_2d': [int(round(c * INT_SCALE)) for c in box]
            })
        elif dialect is Dialect.QWEN:
            entries.append({
                'time': float(t),
                'bbox_2d': [int(round(c * INT_SCALE)) for c in box]
            })
        elif dialect is Dialect.GPT:
            if policy is None:
                raise ConfigurationError(
                    'The gpt dialect needs a frame sampling context'
                )
            frame = policy.time_frame(t)
            if frame is None:
                raise ValueError('No sampled frame at t={0}s'.format(t))
            entries.append({'frame': frame, 'box': box.to_list()})
        else:
            entries.append({'timestamp': format_clock(t),
                            'box_2d': box.to_list()})
    return json.dumps(entries)


_TOKEN = r'\d+(?::\d{1,2}){0,2}(?:\.\d+)?'
_RANGE = re.compile(
    r'(?P<a>' + _TOKEN + r')\s*(?:-|\u2013|\u2014|~|to)\s*(?P<b>' + _TOKEN + r')'
)


def _json_ranges(payload):
    try:
        obj = extract_json(payload)
    except DialectParseError:
        return []
    if isinstance(obj, dict):
        obj = obj.get('intervals') or obj.get('ranges') or []
    ranges = []
    for item in obj if isinstance(obj, list) else ():
        if isinstance(item, (list, tuple)) and len(item) == 2:
            ranges.append((item[0], item[1]))
        elif isinstance(item, dict) and 'start' in item and 'end' in item:
            ranges.append((item['start'], item['end']))
    return ranges


@total
def parse_time_ranges(payload, dialect, policy=None, diagnostics=None,
                      query_id=None):
    """Time ranges such as ``2-4, 6-8`` or ``00:06:27-00:07:00``.

    The gpt dialect answers with frame index ranges, converted to seconds
    through `policy`. Ranges ending before they start are dropped. A
    payload without any readable range yields an empty set and a
    ``parse_failure`` event.

    Returns
    ----------
    IntervalSet, normalized

    """
    if diagnostics is None: diagnostics = Diagnostics()
    if dialect is Dialect.GPT and policy is None:
        raise ConfigurationError(
            'The gpt dialect needs a frame sampling context'
        )
    raw = []
    if isinstance(payload, (str, bytes)):
        raw = [(m.group('a'), m.group('b'))
               for m in _RANGE.finditer(_text(payload))]
    if not raw:
        raw = _json_ranges(payload)
    ranges = []
    for a, b in raw:
        if dialect is Dialect.GPT:
            a, b = policy.frame_time(float(a)), policy.frame_time(float(b))
        else:
            a, b = parse_clock(a), parse_clock(b)
        if a > b:
            diagnostics.record(
                'malformed_range', query_id,
                'range {0}-{1} ends before it starts, dropped'.format(a, b)
            )
            continue
        ranges.append((a, b))
    if not raw:
        diagnostics.record('parse_failure', query_id,
                           'no time range found in the response')
    return normalize_intervals(ranges, query_id=query_id)


def _segment(d, diagnostics, query_id):
    start = parse_clock(d['start'])
    end = parse_clock(d['end'])
    boxes = []
    for b in d.get('boxes') or ():
        t = parse_clock(b['timestamp'])
        if not start - BOX_WINDOW <= t <= end + BOX_WINDOW:
            diagnostics.record(
                'box_outside_segment', query_id,
                'box at {0}s outside segment [{1}, {2}], dropped'.format(
                    t, start, end
                )
            )
            continue
        boxes.append((t, _box(b['box_2d'], 1., diagnostics, query_id)))
    text = d.get('text', '')
    if not isinstance(text, str):
        raise TypeError('Segment text must be a string')
    return TranscriptSegment(start, end, text, boxes)


@total
def parse_char_segments(payload, diagnostics=None, query_id=None):
    """Transcript segments from one JSON object or an array of them.

    Returns
    ----------
    list of TranscriptSegment sorted by start

    """
    if diagnostics is None: diagnostics = Diagnostics()
    obj = extract_json(payload)
    if isinstance(obj, dict):
        obj = obj['segments'] if 'segments' in obj else [obj]
    if not isinstance(obj, list):
        raise TypeError('Expected a JSON object or array')
    segments = [_segment(d, diagnostics, query_id) for d in obj]
    return sorted(segments, key=lambda s: (s.start, s.end))


OPTION_LETTERS = 'ABCDE'


_LETTER = re.compile(
    r'^\s*(?:(?:the\s+)?answer(?:\s+is)?\s*[:\-]?\s*)?'
    r'[\(\[]?\s*([a-e])\s*(?:[\)\]\.:,]|\s|$)',
    re.IGNORECASE
)


def _fold(text):
    return ' '.join(str(text).lower().split())


def extract_mc_answer(text, options):
    """Option index named by a free-text answer, or None.

    A leading option letter wins, otherwise the answer must equal one
    option text up to case and whitespace.

    Examples
    ----------
    >>> extract_mc_answer('(c) because ...', ['w', 'x', 'y', 'z'])
    2
    >>> extract_mc_answer('the moon is red', ['The moon is red', 'no'])
    0

    """
    if not options:
        raise ValueError('Multiple-choice item without options')
    if text is None:
        return None
    text = str(_text(text))
    m = _LETTER.match(text)
    if m is not None:
        idx = OPTION_LETTERS.index(m.group(1).upper())
        if idx < len(options):
            return idx
    folded = _fold(text).rstrip('.')
    for i, opt in enumerate(options):
        if _fold(opt) == folded:
            return i
    return None


def is_refusal(payload):
    if payload is None:
        return True
    if isinstance(payload, (str, bytes)):
        return not _text(payload).strip()
    return False


def empty_value(task):
    return {
        Task.STG: Tube.empty(),
        Task.TR: IntervalSet(),
        Task.CHAR: [],
        Task.MC: None,
    }[task]


def normalize_prediction(raw, task, options=None, policy=None,
                         diagnostics=None):
    """Canonical prediction from a RawPrediction.

    Blank payloads are counted as refusals and give an empty prediction,
    as do multiple-choice answers naming no option.

    Parameters
    ----------
    raw : RawPrediction
    task : Task
    options : list of str
        Multiple-choice options, required for Task.MC
    policy : FrameSamplingPolicy
        Required for the gpt dialect on stg and tr
    diagnostics : Diagnostics, optional

    Returns
    ----------
    CanonicalPrediction

    """
    if diagnostics is None: diagnostics = Diagnostics()
    qid = raw.query_id
    if is_refusal(raw.payload):
        diagnostics.record('refusal', qid)
        return CanonicalPrediction(qid, task, empty_value(task), ('refusal',))
    kw = dict(diagnostics=diagnostics, query_id=qid)
    if task is Task.STG:
        value = parse_tube(raw.payload, raw.dialect, policy=policy, **kw)
    elif task is Task.TR:
        value = parse_time_ranges(raw.payload, raw.dialect, policy=policy, **kw)
    elif task is Task.CHAR:
        value = parse_char_segments(raw.payload, **kw)
    else:
        value = extract_mc_answer(raw.payload, options)
        if value is None:
            diagnostics.record('refusal', qid,
                               'answer names none of the options')
            return CanonicalPrediction(qid, task, None, ('refusal',))
    return CanonicalPrediction(qid, task, value)


def raw_from_dict(d, dialect=None):
    """RawPrediction from a prediction line holding a ``payload`` key.

    The line's own dialect wins over `dialect`.
    """
    line_dialect = d.get('dialect')
    if line_dialect is not None:
        dialect = parse_dialect(line_dialect)
    if dialect is None:
        raise ConfigurationError(
            'No dialect for raw prediction {0}'.format(d.get('query_id'))
        )
    task = d.get('task')
    return RawPrediction(
        query_id=str(d['query_id']), dialect=dialect, payload=d['payload'],
        context=d.get('context'),
        task=parse_task(task) if task is not None else None
    )


def prediction_to_dict(pred):
    """Canonical prediction line."""
    d = {'query_id': pred.query_id, 'task': task_name(pred.task)}
    if pred.task is Task.STG:
        d['tube'] = pred.value.to_list()
    elif pred.task is Task.TR:
        d['intervals'] = pred.value.to_list()
    elif pred.task is Task.CHAR:
        d['segments'] = [s.to_dict() for s in pred.value]
    else:
        d['answer'] = pred.value
    if pred.flags:
        d['flags'] = list(pred.flags)
    return d


def prediction_from_dict(d, options=None, diagnostics=None):
    """CanonicalPrediction from a canonical prediction line.

    A ``tubes`` list is merged into one tube. An ``answer`` may be an
    option index or free text resolved against `options`.
    """
    if diagnostics is None: diagnostics = Diagnostics()
    qid = str(d['query_id'])
    task = parse_task(d['task'])
    flags = tuple(d.get('flags') or ())
    if task is Task.STG:
        if 'tubes' in d:
            value = merge_tubes([Tube.from_list(t) for t in d['tubes']],
                                diagnostics=diagnostics, query_id=qid)
        else:
            value = Tube.from_samples(
                [(e['t'], e['box']) for e in d.get('tube') or ()],
                diagnostics=diagnostics, query_id=qid
            )
    elif task is Task.TR:
        value = IntervalSet(d.get('intervals') or (), query_id=qid)
    elif task is Task.CHAR:
        value = sorted(
            (TranscriptSegment.from_dict(s) for s in d.get('segments') or ()),
            key=lambda s: (s.start, s.end)
        )
    else:
        answer = d.get('answer')
        if isinstance(answer, bool):
            raise MalformedPredictionError('Boolean answer', query_id=qid)
        if isinstance(answer, int):
            if options is not None and not 0 <= answer < len(options):
                raise MalformedPredictionError(
                    'Answer index {0} out of range'.format(answer),
                    query_id=qid
                )
            value = answer
        elif answer is None or options is None:
            value = None
        else:
            value = extract_mc_answer(answer, options)
        if value is None and not {'refusal', 'parse_failure'} & set(flags):
            diagnostics.record('refusal', qid)
            flags += ('refusal',)
    return CanonicalPrediction(qid, task, value, flags)
