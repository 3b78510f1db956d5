"""Path-simulation kernels: compiled extension with a pure-Python fallback.

Both backends make exactly the same draws from the same bit generators in
the same order, so results are bit-identical; the compiled kernel is just
fast.  ``BACKEND`` records which one was selected at import time.
"""

from __future__ import annotations

try:
    from . import _paths_cy as _impl

    BACKEND = "cython"
except ImportError:  # extension not built; fall back to the reference kernel
    from . import paths_py as _impl

    BACKEND = "python"

run_paths = _impl.run_paths


def backend_run_paths(name: str):
    """Fetch a specific backend's kernel (for benchmarks and equivalence
    tests).  Raises ImportError if the compiled backend is unavailable."""
    if name == "python":
        from . import paths_py

        return paths_py.run_paths
    if name == "cython":
        from . import _paths_cy

        return _paths_cy.run_paths
    raise ValueError(f"unknown backend {name!r}")
