from __future__ import annotations


class VacuumProbeError(Exception):
    """Base class for every error raised by the package."""


class SpaceMismatchError(VacuumProbeError):
    """Operator or Hamiltonian built on an incompatible Hilbert space."""


class NotHermitianError(VacuumProbeError):
    pass


class PoleError(VacuumProbeError):
    """Ancilla frequency sits on the cavity pole of the dispersive formula."""


class PeakNotFoundError(VacuumProbeError):
    pass


class ConvergenceError(VacuumProbeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class DensityMatrixError(VacuumProbeError):
    pass


class ConfigError(VacuumProbeError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
