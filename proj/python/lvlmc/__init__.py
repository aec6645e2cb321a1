"""Locally varying coregionalization simulation toolkit."""

try:
    from . import _lvlmc as _core  # installed wheel layout
except ImportError:  # in-tree build: extension sits on sys.path
    import _lvlmc as _core

__version__ = _core.__version__

_exported = [name for name in dir(_core) if not name.startswith("_")]
globals().update({name: getattr(_core, name) for name in _exported})
__all__ = sorted(_exported)
