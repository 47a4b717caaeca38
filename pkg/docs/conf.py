# Configuration file for the SalBranch documentation.

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinxcontrib.programoutput',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'SalBranch'
copyright = '2026, SalBranch Contributors'
author = 'SalBranch Contributors'

version = '1.0'
release = '1.0.dev0'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

html_static_path = []
htmlhelp_basename = 'SalBranchdoc'

man_pages = [
    (master_doc, 'salbranch', 'SalBranch Documentation', [author], 1)
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}
