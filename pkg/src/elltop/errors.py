"""Exception types shared across the package."""


class EllTopError(Exception):
    """Base class for all package errors."""


class NonConvergent(EllTopError):
    """A series hit max_terms before reaching the requested tolerance."""


class PoleAtLattice(EllTopError):
    """An argument fell within the pole-detection radius of a lattice point."""


class IndexOutOfRange(EllTopError):
    """A lattice index is invalid for the requested algebra family."""


class FamilyMismatch(EllTopError):
    """Model family and state container disagree."""


class LevelOutOfRange(EllTopError):
    """Perturbation-tower level exceeds the supplied data."""


class SingularInertia(EllTopError):
    """An inertia weight is too close to zero to invert."""


class SingularPoint(EllTopError):
    """A bosonization / reduction formula was evaluated at a singular point."""


class NonFinite(EllTopError):
    """A state entry became non-finite during integration."""


class ConfigError(EllTopError):
    """A run configuration failed validation."""
