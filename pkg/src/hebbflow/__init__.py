"""hebbflow: coupled Langevin/Hebbian swarm learning on manifold
substrates, with gossip consensus and spectral diagnostics.

Numerically hot kernels (RNG, Jacobi eigensolver, Hebbian accumulators,
pairwise distances) live in a compiled extension with a pure-numpy
fallback selected at import; see ``hebbflow.backend.ACTIVE``.
"""

from .backend import ACTIVE as active_backend
from .numerics import SeededRng, sym_eig, gauss_matrix, power_stationary

__all__ = ["active_backend", "SeededRng", "sym_eig", "gauss_matrix", "power_stationary"]
__version__ = "0.1.0"
