# author : vuemetrics developers
#
# date   : October 16, 2026

"""
Plotting functions for the evaluation reports
"""

from __future__ import absolute_import, division, print_function

import logging

import numpy as np

import matplotlib as mpl
mpl.use('Agg')
from matplotlib import pyplot as plt
from matplotlib.offsetbox import AnchoredText

from vuemetrics.enums import MetricKind
from vuemetrics.misc import make_dir

log = logging.getLogger(__name__)

tRed = list(np.array([226,101,95]) / 255.)
tBlue = list(np.array([96,149,201]) / 255.)
tGreen = list(np.array([170,196,109]) / 255.)

KIND_STYLE = {
    MetricKind.IOU       : (tRed,   'IoU'),
    MetricKind.PRECISION : (tBlue,  'Precision'),
    MetricKind.RECALL    : (tGreen, 'Recall'),
}

SVG_SALT = 'vuemetrics'
"""Fixed id salt, keeps the SVG output byte-stable."""


def plot_curves(curves, outfile, fig_text=None):
    """Plot accuracy against threshold, one line per metric kind.

    Parameters
    ----------
    curves : list of ThresholdCurve
    outfile : str
        Output path, the format follows the extension
    fig_text : str, optional
        Annotation placed in the corner of the plot, e.g. the AUC values

    """
    with mpl.rc_context({'svg.hashsalt': SVG_SALT, 'text.usetex': False}):
        fig = plt.figure(figsize=(7, 5))
        ax = fig.add_subplot(111)
        for curve in curves:
            color, label = KIND_STYLE[curve.metric_kind]
            ax.plot(curve.thresholds, curve.accuracy, color=color,
                    linewidth=1.5, ls='-', label=label)
        ax.set_xlim((0., 1.))
        ax.set_ylim((0., 1.02))
        ax.set_xlabel('Threshold', fontsize=14)
        ax.set_ylabel('Accuracy', fontsize=14)
        ax.grid(color='grey', linewidth=0.5, alpha=0.7, ls='--')
        ax.legend(loc='upper right', frameon=False)
        if fig_text:
            at = AnchoredText(fig_text, prop=dict(size=10), frameon=True,
                              loc=3)
            at.patch.set_boxstyle('round,pad=0.1,rounding_size=0.5')
            ax.add_artist(at)
        make_dir(outfile)
        log.info('Saving as %s', outfile)
        meta = {'Date': None} if outfile.endswith(('.svg', '.pdf')) else None
        fig.savefig(outfile, bbox_inches='tight', metadata=meta)
        plt.close(fig)
