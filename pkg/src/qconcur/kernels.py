"""Propagation kernel selection.

The compiled extension is preferred; the numpy/scipy implementation is a
drop-in replacement used when the extension was not built.  Both expose
propagate_path / propagate_path_block with identical contracts, and
benchmarks/bench_kernels.py compares their throughput.
"""
from . import _kernels_py

try:
    from . import _kernels as _impl
except ImportError:
    _impl = _kernels_py

BACKEND = _impl.BACKEND
propagate_path = _impl.propagate_path
propagate_path_block = _impl.propagate_path_block


def get_backend(name):
    """Fetch a specific backend module ("compiled" or "python"); the
    compiled one raises ImportError if it was never built."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
