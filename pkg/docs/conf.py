#!/usr/bin/env python3
"""Sphinx configuration; API pages are regenerated from the lrea package on every build."""
import os
import sys

import sphinx_rtd_theme

DOCS_DIR = os.path.abspath(os.path.dirname(__file__))
sys.path.insert(0, os.path.dirname(DOCS_DIR))

project = 'lrea'
author = 'the lrea developers'
copyright = '2026, the lrea developers'
version = '0.1'
release = '0.1.0'

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.viewcode']
master_doc = 'index'
exclude_patterns = ['_build']

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]


def run_apidoc(_):
    from sphinx.ext.apidoc import main
    main(['--separate', '--force', '-o', DOCS_DIR, os.path.join(os.path.dirname(DOCS_DIR), 'lrea')])


def setup(app):
    app.connect('builder-inited', run_apidoc)
