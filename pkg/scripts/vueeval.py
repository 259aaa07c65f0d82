#! /usr/bin/env python
# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Evaluate video grounding, retrieval and plot-track predictions

Subcommands
  eval       score a prediction file against an annotation file
  validate   check an annotation file and summarise its buckets
  normalize  turn raw model responses into canonical prediction lines
"""

from __future__ import absolute_import, division, print_function

import io
import sys
import json
import logging
import argparse
from functools import partial

from vuemetrics import misc as misc_utils
from vuemetrics import report as report_utils
from vuemetrics.dataset import load_annotations, render_validation, validate
from vuemetrics.enums import Dialect, ExitCode, OutputFormat, Task
from vuemetrics.errors import ConfigurationError, InputError

log = logging.getLogger('vueeval')


def eval_argparse(parser):
    parser.add_argument(
        '--task', type=partial(misc_utils.enum_parse, c=Task),
        choices=Task, help='Task to evaluate'
    )
    parser.add_argument(
        '--annotations', type=str, help='Annotation JSON-lines file'
    )
    parser.add_argument(
        '--predictions', type=str, help='Prediction JSON-lines file'
    )
    parser.add_argument(
        '--dialect', type=partial(misc_utils.enum_parse, c=Dialect),
        choices=Dialect, default=None,
        help='Dialect of raw prediction lines that do not name their own'
    )
    parser.add_argument(
        '--report', type=str, default=None,
        help='Report output file (stdout if not given)'
    )
    parser.add_argument(
        '--curves', type=str, default=None,
        help='Directory for the threshold curves CSV and SVG (tr)'
    )
    parser.add_argument(
        '--format', type=partial(misc_utils.enum_parse, c=OutputFormat),
        choices=OutputFormat, default='md', help='Report format'
    )
    parser.add_argument(
        '--threads', type=misc_utils.thread_type, default=None,
        help='Set the number of worker processes to use (int or "max"), '
        'defaults to ${0} or 1'.format(misc_utils.THREADS_ENV)
    )
    parser.add_argument(
        '--box-tolerance', type=float, default=0.020,
        help='Box alignment window in seconds (char)'
    )
    parser.add_argument(
        '--frame-cap', type=int, default=120,
        help='Frame cap of the gpt sampling policy'
    )
    parser.add_argument(
        '--fps', type=float, default=1.,
        help='Frame rate of the gpt sampling policy'
    )
    parser.add_argument(
        '--progress', type=misc_utils.parse_bool, default='True',
        help='Show a progress bar'
    )


def validate_argparse(parser):
    parser.add_argument(
        '--annotations', type=str, help='Annotation JSON-lines file'
    )
    parser.add_argument(
        '--format', type=partial(misc_utils.enum_parse, c=OutputFormat),
        choices=[OutputFormat.MD, OutputFormat.JSON], default='md',
        help='Summary format'
    )


def normalize_argparse(parser):
    parser.add_argument(
        '--dialect', type=partial(misc_utils.enum_parse, c=Dialect),
        choices=Dialect, help='Dialect of lines that do not name their own'
    )
    parser.add_argument(
        '--in', dest='infile', type=str, help='Raw prediction file'
    )
    parser.add_argument(
        '--out', dest='outfile', type=str, help='Canonical prediction file'
    )
    parser.add_argument(
        '--task', type=partial(misc_utils.enum_parse, c=Task),
        choices=Task, default=None,
        help='Task of lines that do not name their own'
    )
    parser.add_argument(
        '--annotations', type=str, default=None,
        help='Annotation file supplying video durations and answer options'
    )
    parser.add_argument(
        '--frame-cap', type=int, default=120,
        help='Frame cap of the gpt sampling policy'
    )
    parser.add_argument(
        '--fps', type=float, default=1.,
        help='Frame rate of the gpt sampling policy'
    )


REQUIRED = {
    'eval': ('task', 'annotations', 'predictions'),
    'validate': ('annotations',),
    'normalize': ('infile', 'outfile'),
}


def load_config(path):
    """Flag defaults from a JSON object, keys are flag names with `_`."""
    try:
        with io.open(path, encoding='utf-8') as f:
            cfg = json.load(f)
    except (IOError, ValueError) as exc:
        raise ConfigurationError('Cannot read config {0}: {1}'.format(path, exc))
    if not isinstance(cfg, dict):
        raise ConfigurationError('Config {0} is not a JSON object'.format(path))
    return cfg


def parse_args(args=None):
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description=__doc__.strip().split('\n')[0],
        formatter_class=misc_utils.SortingHelpFormatter,
    )
    parser.add_argument(
        '--config', type=str, default=None,
        help='JSON file of flag defaults, command line flags win'
    )
    parser.add_argument(
        '--verbose', action='store_true', help='Debug logging'
    )
    subparsers = parser.add_subparsers(dest='command')
    commands = {}
    for name, add, helptext in (
            ('eval', eval_argparse, 'Score a prediction run'),
            ('validate', validate_argparse, 'Check an annotation file'),
            ('normalize', normalize_argparse, 'Canonicalise raw predictions')):
        sub = subparsers.add_parser(
            name, help=helptext, formatter_class=misc_utils.SortingHelpFormatter
        )
        sub.add_argument('--config', type=str, default=argparse.SUPPRESS,
                         help='JSON file of flag defaults, flags win')
        sub.add_argument('--verbose', action='store_true',
                         default=argparse.SUPPRESS, help='Debug logging')
        add(sub)
        commands[name] = sub

    if isinstance(args, str): args = args.split()
    parsed = parser.parse_args(args)
    if parsed.command is None:
        parser.error('a subcommand is required')
    if parsed.config is not None:
        sub = commands[parsed.command]
        cfg = load_config(parsed.config)
        known = set(vars(parsed))
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ConfigurationError(
                'Unknown config keys: {0}'.format(', '.join(unknown))
            )
        sub.set_defaults(**cfg)
        parsed = parser.parse_args(args)
    for key in REQUIRED[parsed.command]:
        if getattr(parsed, key, None) is None:
            commands[parsed.command].error(
                'argument --{0} is required'.format(
                    {'infile': 'in', 'outfile': 'out'}.get(key, key)
                ).replace('_', '-')
            )
    return parsed


def process_args(args):
    """Process the input args."""
    if args.command == 'eval':
        if args.threads is None:
            args.threads = misc_utils.default_threads()
        args.progress = args.progress and sys.stderr.isatty()


def run_eval(args):
    report = report_utils.evaluate_run(
        annotations_path = args.annotations,
        predictions_path = args.predictions,
        task             = args.task,
        dialect          = args.dialect,
        threads          = args.threads,
        box_tolerance    = args.box_tolerance,
        frame_cap        = args.frame_cap,
        fps              = args.fps,
        progress         = args.progress
    )
    out = report_utils.render(report, args.format)
    if args.report is None:
        sys.stdout.flush()
        getattr(sys.stdout, 'buffer', sys.stdout).write(out)
    else:
        misc_utils.make_dir(args.report)
        with io.open(args.report, 'wb') as f:
            f.write(out)
        log.info('Report written to %s', args.report)
    if args.curves is not None:
        for path in report_utils.emit_curves(report, args.curves):
            log.info('Curves written to %s', path)
    if report.partial:
        return ExitCode.PARTIAL
    return ExitCode.SUCCESS


def run_validate(args):
    rep = validate(load_annotations(args.annotations))
    fmt = misc_utils.parse_enum(args.format)
    sys.stdout.write(render_validation(rep, fmt))
    for err in rep.errors:
        log.error(err)
    return ExitCode.INPUT if rep.errors else ExitCode.SUCCESS


def run_normalize(args):
    annotations = None
    if args.annotations is not None:
        annotations = load_annotations(args.annotations)
    diagnostics = report_utils.normalize_file(
        args.infile, args.outfile, dialect=args.dialect, task=args.task,
        annotations=annotations, frame_cap=args.frame_cap, fps=args.fps
    )
    for kind, n in sorted(diagnostics.counts.items()):
        log.info('== {0:<25} = {1}'.format(kind, n))
    if diagnostics['parse_failure']:
        return ExitCode.PARTIAL
    return ExitCode.SUCCESS


COMMANDS = {
    'eval': run_eval,
    'validate': run_validate,
    'normalize': run_normalize,
}


def main(args=None):
    try:
        args = parse_args(args)
    except ConfigurationError as exc:
        logging.basicConfig(level=logging.INFO)
        log.error('%s', exc)
        return ExitCode.INPUT.value
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(levelname)s %(name)s: %(message)s'
    )
    process_args(args)
    misc_utils.print_args(args)

    try:
        code = COMMANDS[args.command](args)
    except (InputError, ConfigurationError) as exc:
        log.error('%s', exc)
        return ExitCode.INPUT.value
    return code.value


main.__doc__ = __doc__


if __name__ == '__main__':
    sys.exit(main())
