"""Backend selection for the convolution gather/scatter kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is used. Setting ``TTS_EMG_PURE_PYTHON=1`` forces the numpy
path, which is how the benchmark and the cross-backend tests compare them.
"""

import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("TTS_EMG_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def im2col(x, R, C, sr, sc, pad_top, pad_left, out_r, out_c):
    return _impl.im2col(x, R, C, sr, sc, pad_top, pad_left, out_r, out_c)


def col2im(cols, shape, R, C, sr, sc, pad_top, pad_left, out_r, out_c):
    return _impl.col2im(cols, shape, R, C, sr, sc, pad_top, pad_left, out_r, out_c)


def use_backend(name):
    """Switch the active backend at runtime (``"python"`` or ``"cython"``)."""
    global BACKEND, _impl
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    BACKEND, _impl = name, BACKENDS[name]
