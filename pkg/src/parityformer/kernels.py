"""Float64 hot kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it was built; otherwise (or
when ``PARITYFORMER_PURE_PYTHON=1``) the numpy twin in ``_pykernels`` is
used.  Both expose the same functions with the same results.
"""
import contextlib
import os

from . import _pykernels

PURE_ENV = "PARITYFORMER_PURE_PYTHON"

if os.environ.get(PURE_ENV, "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

_EXPORTS = ("softmax", "attention", "coeffs", "theta", "margin_sweep")


def _bind(impl):
    global _impl, IMPLEMENTATION
    _impl = impl
    IMPLEMENTATION = "python" if impl is _pykernels else "cython"
    for name in _EXPORTS:
        globals()[name] = getattr(impl, name)


_bind(_impl)

_INT64_LIMIT = 2 ** 62


def _scan_bound(n, num, den):
    return max(
        2 * num * num * den * den * n ** 5,
        2 * num ** 3 * den ** 3 * n ** 4,
        10 * num * num * den * n ** 4,
        num ** 3 * den ** 3 * n ** 2,
    )


def lemma2_scan(n, num, den, alpha):
    """Per-length audit scan; drops to exact Python ints past int64 range."""
    if _scan_bound(n, num, den) < _INT64_LIMIT:
        return _impl.lemma2_scan(n, num, den, alpha)
    return _pykernels.lemma2_scan(n, num, den, alpha, exact_objects=True)


def implementations():
    """Every importable implementation module, keyed by name."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found


@contextlib.contextmanager
def use(name):
    """Temporarily route every kernel call to implementation ``name``."""
    previous = _impl
    _bind(implementations()[name])
    try:
        yield
    finally:
        _bind(previous)
