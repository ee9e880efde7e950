"""Step-kernel backend selection.

Two interchangeable kernel implementations exist: the compiled extension
(_espcore, built from Cython) and the pure-Python fallback (_purecore).
Both expose foraging_steps / pp_steps with identical semantics and
bit-identical results; the compiled one is simply much faster. The
default is the compiled kernel when the extension imported cleanly,
overridable with the PLASTEVO_BACKEND environment variable ("compiled"
or "pure") or set_backend().
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _purecore
from .errors import ConfigurationError

try:
    from . import _espcore
except ImportError:  # extension not built; pure fallback still works
    _espcore = None

__all__ = ["available", "current", "active", "set_backend", "using"]

_BACKENDS = {"pure": _purecore}
if _espcore is not None:
    _BACKENDS["compiled"] = _espcore


def _initial() -> str:
    name = os.environ.get("PLASTEVO_BACKEND")
    if name is None:
        return "compiled" if "compiled" in _BACKENDS else "pure"
    if name not in _BACKENDS:
        raise ConfigurationError(
            f"PLASTEVO_BACKEND={name!r}: known backends are {sorted(_BACKENDS)}"
        )
    return name


_current = _initial()


def available() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def current() -> str:
    return _current


def active():
    """The module whose foraging_steps/pp_steps the wrappers call."""
    return _BACKENDS[_current]


def set_backend(name: str) -> None:
    global _current
    if name not in _BACKENDS:
        raise ConfigurationError(f"unknown backend {name!r}; have {sorted(_BACKENDS)}")
    _current = name


@contextmanager
def using(name: str):
    """Temporarily switch backends (used by the equivalence tests and bench)."""
    global _current
    prev = _current
    set_backend(name)
    try:
        yield
    finally:
        _current = prev
