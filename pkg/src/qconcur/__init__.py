"""Two-qubit concurrence measures and a stochastically driven two-atom
cavity model: trajectory simulation, ensemble dephasing, and closed-form
late-time populations."""
from . import closed_form, concurrence, config, dynamics, linalg, model, special
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "closed_form",
    "concurrence",
    "config",
    "dynamics",
    "linalg",
    "model",
    "special",
    "KERNEL_BACKEND",
    "__version__",
]
