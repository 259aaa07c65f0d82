# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Exceptions raised by the evaluation toolkit
"""

from __future__ import absolute_import, division, print_function


EXCERPT_LEN = 80


class VueMetricsError(Exception):
    """Base class for every error raised by vuemetrics."""


class InputError(VueMetricsError, ValueError):
    """Input files or flags that the user needs to fix."""


class ConfigurationError(VueMetricsError, ValueError):
    """Inconsistent configuration, e.g. mismatched sampling rates."""


class InvalidBoxError(ValueError):
    """Bounding box outside the normalized frame or with flipped corners."""


class AnnotationError(InputError):
    """Schema violation in an input file, with its line number."""
    def __init__(self, message, line=None):
        if line is not None:
            message = 'line {0}: {1}'.format(line, message)
        super(AnnotationError, self).__init__(message)
        self.line = line


class PredictionFileError(AnnotationError):
    """Undecodable line in a prediction file."""


class InvalidAnnotationError(InputError):
    """Ground truth that cannot be scored against (e.g. an empty tube)."""


class MalformedPredictionError(InputError):
    """Prediction violating a structural invariant, e.g. start > end."""
    def __init__(self, message, query_id=None):
        if query_id is not None:
            message = '[{0}] {1}'.format(query_id, message)
        super(MalformedPredictionError, self).__init__(message)
        self.query_id = query_id


class DialectParseError(InputError):
    """Raw model output that the dialect parser could not decode."""
    def __init__(self, message, payload=None, query_id=None):
        self.excerpt = excerpt(payload) if payload is not None else None
        self.query_id = query_id
        if query_id is not None:
            message = '[{0}] {1}'.format(query_id, message)
        if self.excerpt is not None:
            message += ' (payload: {0!r})'.format(self.excerpt)
        super(DialectParseError, self).__init__(message)


class UnknownQueryError(InputError):
    """Predictions referencing query ids absent from the annotations."""
    def __init__(self, query_ids):
        self.query_ids = sorted(query_ids)
        shown = ', '.join(self.query_ids[:20])
        if len(self.query_ids) > 20:
            shown += ', ... ({0} total)'.format(len(self.query_ids))
        super(UnknownQueryError, self).__init__(
            'Predictions reference unknown query ids: ' + shown
        )


class TaskMismatchError(InputError):
    """Prediction or annotation task differs from the requested task."""


def excerpt(payload):
    if isinstance(payload, bytes):
        payload = payload.decode('utf-8', errors='replace')
    payload = str(payload)
    if len(payload) <= EXCERPT_LEN:
        return payload
    return payload[:EXCERPT_LEN-3] + '...'
