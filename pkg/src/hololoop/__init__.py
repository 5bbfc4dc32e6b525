"""Closed adiabatic loops that realize one- and two-qubit gates as
non-abelian holonomies, with independent numerical checks."""

from .errors import (
    DuplicateTarget,
    HololoopError,
    LocalityViolation,
    NoConvergence,
    NotHermitian,
    NotUnitary,
    NumericalError,
    QubitOutOfRange,
    ResolutionTooLow,
    Singular,
    UnknownGate,
    ValidationError,
    WindingTooSmall,
)
from .gatelog import GATE_NAMES, GateSpec, gate_generator, gate_spec, resolve_gate
from .loopsynth import LoopPlan, exp_tX, hamiltonian_at, plan_doubled, plan_minimal
from .holocheck import HolonomyReport, wilson_holonomy
from .adiasim import AdiabaticRun, evolve, realized_gate
from .arrayembed import ArrayLayout, LocalLoop, embed_single, embed_two, verify_local_action
from .kernels import BACKEND

__version__ = "0.1.0"
