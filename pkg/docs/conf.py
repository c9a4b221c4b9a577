# Configuration file for the Sphinx documentation builder.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

from dta_prevalence_bias import __version__  # noqa: E402

# Project information
project = 'dta-prevalence-bias'
copyright = '2024, dta-prevalence-bias developers'
author = 'dta-prevalence-bias developers'
version = release = __version__

# General configuration
extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
    'sphinx.ext.intersphinx',
]

autodoc_member_order = 'bysource'
napoleon_google_docstring = True
napoleon_numpy_docstring = False

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'pandas': ('https://pandas.pydata.org/docs', None),
}

templates_path = ['_templates']
exclude_patterns = ['_build']

# HTML output options
html_theme = 'sphinx_rtd_theme'
