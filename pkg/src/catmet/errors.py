"""Exception types shared across the package."""


class CatmetError(Exception):
    """Base class for all catmet errors."""


class DomainError(CatmetError):
    """A point or request is incompatible with the domain (outside it,
    or the domain lacks the needed structure, e.g. an empty boundary)."""


class GeometryError(CatmetError):
    """A geometric precondition failed (stencil leaves the domain,
    triangle inequality violated, disk exits the domain, ...)."""


class ResolutionError(CatmetError):
    """Grid spacing, margin, or mollifier scale are mutually incompatible."""


class HypothesisError(CatmetError):
    """A density violates the hypotheses required for the requested
    operation (phi outside its interval, failed subharmonicity, ...)."""


class PathError(CatmetError):
    """A path is invalid or two points cannot be joined (segment exits
    the domain, endpoints unreachable, snap failure)."""


class RefinementError(CatmetError):
    """Geodesic refinement failed; carries the best path found so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(CatmetError):
    """A run configuration failed to parse; message carries the
    section/field diagnostic."""
