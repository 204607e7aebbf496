"""Backend selection for the hot loops.

The compiled extension ``snf._ckernels`` is used when it imports cleanly;
otherwise, or when the environment variable ``SNF_PURE_PYTHON`` is set to a
non-empty value other than ``0``, the numpy fallback in ``snf._pykernels``
is used. ``BACKEND`` names the active choice.
"""
import os

from snf import _pykernels

_force_python = os.environ.get("SNF_PURE_PYTHON", "") not in ("", "0")

_ext = None
if not _force_python:
    try:
        from snf import _ckernels as _ext
    except ImportError:  # extension not built
        _ext = None

_impl = _ext if _ext is not None else _pykernels
BACKEND = "cython" if _ext is not None else "python"

lex_rank = _impl.lex_rank
lex_unrank_all = _impl.lex_unrank_all
neighbor_table = _impl.neighbor_table
edge_boundary = _impl.edge_boundary
diagonal_large_counts = _impl.diagonal_large_counts
permanent = _impl.permanent
exhaustive_boundary_scan = _impl.exhaustive_boundary_scan


def available_backends():
    """Map backend name to module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from snf import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
