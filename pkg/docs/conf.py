# Sphinx configuration for the menroll documentation.
# Build with:  sphinx-build -b html . _build/html

import os
import sys

sys.path.insert(0, os.path.abspath('../src'))

# -- Project information -----------------------------------------------------

project = 'menroll'
copyright = '2026, menroll developers'
author = 'menroll developers'
release = '0.3.0'
version = '0.3'

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx_autodoc_typehints',
    'sphinx_rtd_theme',
    'm2r2',
]

master_doc = 'index'
templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

# CONFIGURATION.md is pulled in through m2r2
source_suffix = {
    '.rst': 'restructuredtext',
    '.md': 'markdown',
}

pygments_style = 'sphinx'

# -- HTML output -------------------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = []
html_theme_options = {
    'prev_next_buttons_location': 'bottom',
    'collapse_navigation': False,
    'sticky_navigation': True,
    'navigation_depth': 3,
}

# -- Extensions --------------------------------------------------------------

# Docstrings are Google style
napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_use_rtype = False
napoleon_attr_annotations = True

autodoc_default_options = {
    'member-order': 'bysource',
    'exclude-members': '__weakref__, __dict__, __slots__',
}
autodoc_typehints = 'description'
typehints_fully_qualified = False

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
}
