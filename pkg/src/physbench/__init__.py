"""Deterministic 2D physics-puzzle benchmark."""

from .geometry import Box, Circle, Compound, CompoundPart
from .world import (
    Body, BodyKind, Goal, Role, WorldState,
    body_from_vocabulary, make_body, overlap,
)
from .engine import (
    DT, GRAVITY, Contact, NumericalDivergence, SimulationResult,
    contacts, simulate, step,
)

__version__ = "0.1.0"
