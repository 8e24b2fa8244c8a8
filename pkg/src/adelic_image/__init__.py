"""Mod-p^n and adelic image computations for modular-form Galois data.

Subpackages split by concern: finite matrix groups and their
enumeration, Dirichlet characters, number field residue arithmetic,
newform data handling, image analysis for single forms and pairs, and
hypothesis checks for products of local conditions.
"""

__version__ = "0.1.0"

from . import errors  # noqa: F401

__all__ = ["errors", "__version__"]


def load_newform(source, **kw):
    """Convenience re-export; see adelic_image.newforms.load_newform."""
    from .newforms import load_newform as _load

    return _load(source, **kw)
