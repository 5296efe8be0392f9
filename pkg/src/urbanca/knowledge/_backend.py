"""Pick the compiled tree kernels when available, else the numpy fallback.

Set ``URBANCA_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

python_kernels = _kernels_py
compiled_kernels = None

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if os.environ.get("URBANCA_BACKEND", "").lower() == "python" or compiled_kernels is None:
    kernels = python_kernels
else:
    kernels = compiled_kernels

BACKEND = kernels.BACKEND
