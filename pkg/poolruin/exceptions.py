"""Custom exceptions for poolruin."""


class PoolRuinError(Exception):
    """Base exception for the package."""


class ExtraNotInstalledError(PoolRuinError):
    """Raised when an optional feature is used without required extra."""


class ScenarioError(PoolRuinError):
    """Raised when a scenario mapping cannot be turned into a pool and a matrix."""


class ScenarioFileError(ScenarioError):
    """Raised for scenario/output file handling issues."""


class SeverityError(PoolRuinError):
    """Raised when a severity model is ill-formed."""


class AllocationError(PoolRuinError):
    """Raised for malformed allocation matrices or an impossible matrix completion."""


class NetProfitError(PoolRuinError):
    """Raised when the premium rate does not exceed the expected claim rate."""


class DiscretizationError(PoolRuinError):
    """Raised when a law cannot be discretized within the configured atom cap."""


class RootFindingError(PoolRuinError):
    """Raised when a Lundberg root cannot be bracketed."""


class MethodMismatchError(PoolRuinError):
    """Raised when a ruin method cannot handle the claim law it was given."""


class HeterogeneousFrequencyError(PoolRuinError):
    """Raised when a check that needs equal claim frequencies gets unequal ones."""
