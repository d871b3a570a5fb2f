"""Two-mode ground states of repulsive bosons in a symmetric double-well trap."""
from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
