"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Input has the wrong shape or an empty dimension."""


class SymmetryError(ValueError):
    """Matrix expected to be symmetric exceeds the symmetry tolerance."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge (e.g. disconnected chain)."""


class TopologyError(RuntimeError):
    """Graph structure violates a requirement (isolated node, disconnected)."""


class ProjectionError(RuntimeError):
    """Newton projection onto the manifold did not converge."""


class CapabilityError(NotImplementedError):
    """Requested operation is not available for this manifold or field."""


class ConfigError(ValueError):
    """Experiment configuration is missing or malformed."""


class DegenerateLabelsError(ValueError):
    """Classification labels contain fewer than two classes."""
