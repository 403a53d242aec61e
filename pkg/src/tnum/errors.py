"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed configuration document or CLI input."""


class NoClassicalMotion(ValueError):
    """No classically allowed region at the requested energy."""


class UnsupportedPotential(ValueError):
    """Potential outside the class a routine can handle."""


class EnergyBracketError(RuntimeError):
    """An energy bracket could not be established (target unreachable)."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before reaching tolerance."""
