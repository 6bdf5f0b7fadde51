"""Exception and warning types shared across the package."""


class CavteleportError(Exception):
    """Base class for all package-specific errors."""


class LayoutError(CavteleportError):
    """Subsystem labels are unknown, duplicated, or otherwise inconsistent."""


class ShapeError(CavteleportError):
    """An operator or amplitude array has the wrong dimensions."""


class NormError(CavteleportError):
    """A state that must be normalized is not."""


class HermiticityError(CavteleportError):
    """A matrix that must be Hermitian is not."""


class ConfigError(CavteleportError):
    """Invalid or missing configuration values."""


class CorrectionTableError(CavteleportError):
    """A correction table is missing a key or is structurally invalid."""


class DerivationError(CavteleportError):
    """No candidate correction recovers the target state for some branch."""


class TruncationWarning(UserWarning):
    """The Fock-space cutoff may be too small for the requested evolution."""
