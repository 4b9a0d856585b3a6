# Sphinx configuration for the svmcoreset docs. Build with ``sphinx-build -b html docs docs/_build``.
import os
import re
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)


def _version() -> str:
    # parsed, not imported
    with open(os.path.join(ROOT, "svmcoreset", "__init__.py")) as f:
        match = re.search(r'^__version__\s*=\s*"([^"]+)"', f.read(), re.M)

    return match.group(1) if match else "0.0.0"


project = "svmcoreset"
author = "svmcoreset developers"
copyright = f"2026, {author}"
release = _version()
version = ".".join(release.split(".")[:2])

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosectionlabel",
    "sphinx.ext.mathjax",
    "sphinx_rtd_theme",
]

# the math heavy modules pull these in at import time
autodoc_mock_imports = ["numpy", "pandas", "sklearn", "orjson"]
autodoc_member_order = "bysource"

autosectionlabel_prefix_document = True
autosectionlabel_maxdepth = 3

exclude_patterns = ["_build"]

html_theme = "sphinx_rtd_theme"
html_title = f"svmcoreset {release}"

add_module_names = False
master_doc = "index"
