# -*- coding: utf-8 -*-
#
# Sphinx configuration for the vuemetrics documentation.

import os
import sys
sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

import vuemetrics


# -- Project information -----------------------------------------------------

project = u'vuemetrics'
copyright = u'2026, vuemetrics developers'
author = u'vuemetrics developers'
release = vuemetrics.__version__


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.autosummary',
    'numpydoc',
    'sphinx.ext.mathjax'
]

numpydoc_show_inherited_class_members = False
# https://github.com/numpy/numpydoc/issues/69
numpydoc_class_members_toctree = False

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = [u'_build']
pygments_style = 'default'


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_show_sourcelink = False
html_show_sphinx = False
html_static_path = []
htmlhelp_basename = 'vuemetricsdoc'
