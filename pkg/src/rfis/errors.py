"""Exception hierarchy shared by all rfis modules."""


class RfisError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateSimplexError(RfisError):
    """A simplex has (numerically) linearly dependent edge vectors."""


class DegenerateInputError(RfisError):
    """Input point set does not span the ambient space."""


class CenterOutsideError(RfisError):
    """The reference center does not lie strictly inside the polytope."""


class UnknownVertexError(RfisError):
    """Vertex index not present in the complex."""


class NoIntersectionError(RfisError):
    """A ray from the center missed the boundary, so the complex is broken
    (not a closed star-shaped surface)."""


class MeshFormatError(RfisError):
    """Malformed .cplx file."""


class NonFiniteDriftError(RfisError):
    """The drift field returned NaN or infinity."""


class EmptySetError(RfisError):
    """A set operation received an empty point set."""


class UnknownSystemError(RfisError):
    """No benchmark system registered under the requested name."""


class CapacityExceededError(RfisError):
    """A test-point lattice would exceed the configured point budget."""


class BudgetExceededError(RfisError):
    """A run would exceed a configured resource cap (simplex count)."""


class SweepFuseError(BudgetExceededError):
    """A perturbation sweep loop failed to terminate within the sweep fuse."""


class ConfigError(RfisError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """Configuration file could not be parsed at all."""


class ValidationError(ConfigError):
    """Configuration parsed but one field is invalid."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
