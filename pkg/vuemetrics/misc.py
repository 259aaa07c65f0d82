# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Misc functions for the video understanding evaluation
"""

from __future__ import absolute_import, division, print_function

import os
import math
import errno
import hashlib
import logging
import multiprocessing
from collections import Counter, defaultdict

import argparse
from operator import attrgetter

log = logging.getLogger(__name__)


THREADS_ENV = 'VUEEVAL_THREADS'
"""Environment variable holding the default worker count."""


class SortingHelpFormatter(argparse.HelpFormatter):
    """Sort argparse help options alphabetically."""
    def add_arguments(self, actions):
        actions = sorted(actions, key=attrgetter('option_strings'))
        super(SortingHelpFormatter, self).add_arguments(actions)


class Diagnostics(object):
    """Event counts collected while parsing and scoring a run.

    Every event has a `kind` (e.g. ``'clamp'``) and optionally the query it
    happened on. Instances are combined with :meth:`merge`, which is
    commutative, so the final counts do not depend on evaluation order.

    Examples
    ----------
    >>> d = Diagnostics()
    >>> d.record('clamp', 'q1')
    >>> d.record('clamp', 'q1')
    >>> d.counts['clamp'], d.queries('clamp')
    (2, ['q1'])

    """
    def __init__(self):
        self.counts = Counter()
        self._queries = defaultdict(set)

    def record(self, kind, query_id=None, message=None, n=1):
        self.counts[kind] += n
        if query_id is not None:
            self._queries[kind].add(query_id)
        if message is not None:
            log.warning('[%s] %s', query_id, message)

    def queries(self, kind):
        return sorted(self._queries.get(kind, ()))

    def merge(self, other):
        self.counts.update(other.counts)
        for kind, ids in other._queries.items():
            self._queries[kind] |= ids
        return self

    def __getitem__(self, kind):
        return self.counts.get(kind, 0)

    def __bool__(self):
        return bool(+self.counts)

    __nonzero__ = __bool__

    def to_dict(self):
        return {
            'counts': {k: int(v) for k, v in sorted(self.counts.items()) if v},
            'queries': {k: sorted(v) for k, v in sorted(self._queries.items())
                        if v},
        }

    @classmethod
    def from_dict(cls, d):
        diag = cls()
        diag.counts.update(d.get('counts', {}))
        for kind, ids in d.get('queries', {}).items():
            diag._queries[kind] = set(ids)
        return diag


def round_half_up(x):
    """Round to the nearest integer, with halves rounding up.

    Examples
    ----------
    >>> round_half_up(2.5), round_half_up(2.4), round_half_up(4.6)
    (3, 2, 5)

    """
    return int(math.floor(float(x) + 0.5))


def mean_or_none(values):
    """Arithmetic mean, or None for an empty sequence.

    Uses exactly rounded summation, so the result does not depend on the
    order of `values`.
    """
    values = list(values)
    if not values:
        return None
    return math.fsum(values) / len(values)


def parse_bool(s):
    """Parse a string to a boolean.

    Parameters
    ----------
    s : str
        String to parse

    Returns
    ----------
    bool

    Examples
    ----------
    >>> from vuemetrics.misc import parse_bool
    >>> print(parse_bool('true'))
    True

    """
    if isinstance(s, bool):
        return s
    if s.lower() == 'true':
        return True
    elif s.lower() == 'false':
        return False
    else:
        raise ValueError


def parse_enum(e):
    return '{0}'.format(e).split('.')[1].lower()


def enum_parse(s, c):
    if isinstance(s, c):
        return s
    return c[s.upper()]


def print_args(args):
    """Log the input arguments.

    Parameters
    ----------
    args : argparse
        argparse object to print

    """
    arg_vars = vars(args)
    for key in sorted(arg_vars):
        if key == 'func':
            continue
        log.info('== {0:<25} = {1}'.format(key, arg_vars[key]))


def make_dir(outfile):
    """Create the parent directory of `outfile` if it does not exist."""
    dirname = os.path.dirname(outfile)
    if not dirname:
        return
    try:
        os.makedirs(dirname)
    except OSError as exc:
        if exc.errno == errno.EEXIST and os.path.isdir(dirname):
            pass
        else:
            raise


def thread_type(t):
    if str(t).lower() == 'max':
        return multiprocessing.cpu_count()
    else:
        n = int(t)
        if n < 1:
            raise ValueError('thread count must be >= 1, got {0}'.format(t))
        return n


def default_threads():
    """Worker count from the environment, falling back to 1."""
    return thread_type(os.environ.get(THREADS_ENV, '1'))


def file_hash(path, blocksize=1 << 16, ordered=True):
    """SHA-256 hex digest of a file.

    With `ordered` False the digest covers the sorted non-blank lines, so
    it does not change when the lines of a JSON-lines file are shuffled.
    """
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        if ordered:
            for block in iter(lambda: f.read(blocksize), b''):
                h.update(block)
        else:
            for line in sorted(l.strip() for l in f if l.strip()):
                h.update(line + b'\n')
    return h.hexdigest()
