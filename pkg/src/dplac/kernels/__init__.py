"""Kernel backend selection.

The hot inner-loop kernels (fused activations, optimizer update, rigid-body
stepping) exist twice: a Cython extension (``_core``) and a pure-numpy
fallback with identical signatures.  The compiled backend is used when it
imports cleanly; set ``DPLAC_PURE_PYTHON=1`` to force the fallback.
``dplac bench`` compares the two.
"""

import os

from . import fallback

if os.environ.get("DPLAC_PURE_PYTHON", "") == "1":
    backend = fallback
else:
    try:
        from . import _core as backend  # type: ignore[no-redef]
    except ImportError:
        backend = fallback

IDENTITY = fallback.IDENTITY
RELU = fallback.RELU
TANH = fallback.TANH
SOFTPLUS = fallback.SOFTPLUS
ACTIVATION_IDS = fallback.ACTIVATION_IDS

BACKEND_NAME = backend.BACKEND_NAME
