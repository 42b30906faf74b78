# -*- coding: utf-8 -*-
#
# fockbath documentation build configuration file.

import sys
import os

# Make the fockbath package importable without installing it
sys.path.insert(0, os.path.abspath('../..'))

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.coverage',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = 'fockbath'
copyright = '2026, the fockbath developers'

from fockbath import __version__ as version
release = version

exclude_patterns = []

pygments_style = 'sphinx'

html_theme = 'nature'

htmlhelp_basename = 'fockbathdoc'

latex_elements = {
}

latex_documents = [
  ('index', 'fockbath.tex', 'fockbath Documentation',
   'the fockbath developers', 'manual'),
]

man_pages = [
    ('index', 'fockbath', 'fockbath Documentation',
     ['the fockbath developers'], 1)
]
