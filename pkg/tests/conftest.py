import os
import sys

try:
    import pdwg  # noqa: F401
except ImportError:
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))
