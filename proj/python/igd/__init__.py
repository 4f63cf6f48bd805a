"""Inner-geometry distillation pipeline.

Thin re-export of the compiled module. The extension lives inside this
package when installed as a wheel and next to it on sys.path when running
straight out of the build tree.
"""

try:
    from ._igd import *  # noqa: F401,F403
    from . import _igd as _impl
except ImportError:
    from _igd import *  # noqa: F401,F403
    import _igd as _impl

__doc__ = _impl.__doc__
del _impl
