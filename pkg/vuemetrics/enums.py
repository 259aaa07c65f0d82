# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Define Enums for the video understanding evaluation
"""

from enum import Enum


def str_enum(x):
    return '{0}'.format(str(x).split('.')[-1])


class Dialect(Enum):
    VIDI   = 1
    GEMINI = 2
    GPT    = 3
    QWEN   = 4


class Task(Enum):
    STG  = 1
    TR   = 2
    CHAR = 3
    MC   = 4


class Benchmark(Enum):
    STG  = 1
    TR   = 2
    PLOT = 3


class MetricKind(Enum):
    IOU       = 1
    PRECISION = 2
    RECALL    = 3


class Modality(Enum):
    AUDIO        = 1
    VISION       = 2
    VISION_AUDIO = 3


class QueryFormat(Enum):
    KEYWORD  = 1
    PHRASE   = 2
    SENTENCE = 3


class OutputFormat(Enum):
    MD   = 1
    CSV  = 2
    JSON = 3


class ExitCode(Enum):
    SUCCESS = 0
    INPUT   = 2
    PARTIAL = 3


TASK_BENCHMARK = {
    Task.STG  : Benchmark.STG,
    Task.TR   : Benchmark.TR,
    Task.CHAR : Benchmark.PLOT,
    Task.MC   : Benchmark.PLOT,
}
"""Benchmark whose bucket vocabulary slices each task."""


MODALITY_TAGS = {
    'audio'        : Modality.AUDIO,
    'vision'       : Modality.VISION,
    'vision+audio' : Modality.VISION_AUDIO,
}
"""Annotation-file spelling of each query modality."""


def task_name(task):
    return str_enum(task).lower()


def parse_task(s):
    return Task[s.strip().upper()]


def parse_dialect(s):
    return Dialect[s.strip().upper()]
