"""Select the attractor kernel: compiled when available, pure Python otherwise.

Set ``HOCPDA_PURE=1`` to force the pure-Python version.
"""

import os

if os.environ.get("HOCPDA_PURE") == "1":
    from ._attractor_py import attractor

    BACKEND = "python"
else:
    try:
        from ._attractor import attractor

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._attractor_py import attractor

        BACKEND = "python"

__all__ = ["attractor", "BACKEND"]
