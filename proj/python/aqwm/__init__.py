"""Spread-spectrum signal authentication: watermark embedding/extraction,
closed-form error analysis, LSTM-based dynamic fingerprint watermarking,
attack simulation, and cloud-side detection.

The compiled extension normally sits next to this file (installed wheels).
For in-tree test runs the AQWM_EXT_DIR environment variable points at the
CMake build directory holding the extension.
"""

import os
import sys

_ext_dir = os.environ.get("AQWM_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

try:
    from _core import *  # type: ignore[attr-defined]  # noqa: F401,F403
    from _core import __doc__ as _core_doc  # type: ignore[attr-defined]
except ImportError:  # installed layout: aqwm/_core.*.so
    from aqwm._core import *  # type: ignore[attr-defined]  # noqa: F401,F403
    from aqwm._core import __doc__ as _core_doc  # type: ignore[attr-defined]

__doc__ = (__doc__ or "") + "\n\n" + (_core_doc or "")
