"""Weak values and the wave-particle duality in the double-slit experiment.

Closed-form weak values, interference indices and weak trajectories
(``doubleslit``), the generic weak-value engine (``weak``), Gaussian
wavefunction algebra and the free propagator (``core``), and an
independent grid-propagation oracle (``oracle``).
"""

from .core import ComplexGaussian, PhysConfig, free_propagator
from .errors import DomainError, GridResolutionError, NormalizationUndefinedError, SingularTransitionError
from .weak import BranchDecomposition, WeakValueResult

__version__ = "0.1.0"

__all__ = [
    "ComplexGaussian",
    "PhysConfig",
    "free_propagator",
    "DomainError",
    "GridResolutionError",
    "NormalizationUndefinedError",
    "SingularTransitionError",
    "BranchDecomposition",
    "WeakValueResult",
]
