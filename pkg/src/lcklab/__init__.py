"""Numerical verification engine for locally conformally Kahler geometry.

Pointwise-exact exterior calculus over model quotient charts, a gallery of
Hopf/Inoue fixtures, residual verifiers for the defining LCK identities,
torus-action diagnostics with existence verdicts, and two constructive
positive-potential pipelines.
"""

from .errors import GalleryError, InadmissibleInput, NumericalError
from .manifolds import gallery
from .lck import LCKStructure

__all__ = [
    "GalleryError",
    "InadmissibleInput",
    "NumericalError",
    "LCKStructure",
    "gallery",
]
__version__ = "0.1.0"
