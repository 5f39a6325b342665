"""Out-of-process model host for fairprobe audits.

Serves a classifier behind the line-delimited JSON protocol: one request
object per stdin line, one response object per stdout line, strictly
alternating. Supported model specs cover constant labelers, linear models
loaded from fairprobe-model-v1 files, and scikit-learn classifiers trained
at startup from a CSV.
"""

from .models import build_model
from .server import serve

__version__ = "0.1.0"

__all__ = ["build_model", "serve"]
