"""Exception types raised across the package."""


class FutonError(Exception):
    """Base class for all library errors."""


class DomainError(FutonError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ShapeError(FutonError, ValueError):
    """Array shapes are inconsistent with each other or with the operation."""


class ResolutionError(FutonError, ValueError):
    """A quadrature or sampling grid is too coarse for the requested truncation."""


class ConfigError(FutonError, ValueError):
    """A run or model configuration is invalid or self-contradictory."""
