"""poolruin public API."""

__version__ = "1.0.0"

from poolruin.core.pool_model import (
    AllocationMatrix,
    Participant,
    PoolSpec,
    build_mean_proportional,
    complete_alternative,
    validate,
)
from poolruin.core.ruin import RuinCurve, ruin_curves
from poolruin.core.scenario import Scenario, load_embedded, load_scenario
from poolruin.methods import (
    CachedMethod,
    ClosedFormMethod,
    FallbackMethod,
    MonteCarloMethod,
    PanjerMethod,
    RuinMethod,
)

__all__ = [
    "Participant",
    "PoolSpec",
    "AllocationMatrix",
    "build_mean_proportional",
    "complete_alternative",
    "validate",
    "RuinCurve",
    "ruin_curves",
    "Scenario",
    "load_scenario",
    "load_embedded",
    "RuinMethod",
    "ClosedFormMethod",
    "PanjerMethod",
    "MonteCarloMethod",
    "FallbackMethod",
    "CachedMethod",
]
