"""Time-dependent Schrodinger evolution along a loop.

Solves ``i dpsi/dtau = H(tau/T) psi`` for ``tau`` in ``[0, T]`` with the
midpoint exponential rule ``psi <- expm(-i dtau H(t_mid)) psi``.  Every
``H(t)`` is a rank-k projector ``G G^H`` (``G`` the transported frame), so
the step exponential is exactly ``I + (e^{-i dtau} - 1) G G^H`` and is
unitary to rounding.

Units: the encoded level has energy 1, so a state that stays in it
collects the dynamical phase ``e^{-iT}``, which is removed before gates
are compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels, loopsynth, matcore
from .errors import ResolutionTooLow, ValidationError
from .loopsynth import LoopPlan

MIN_STEPS_PER_TIME = 100
STEPS_PER_TIME = 200
FRAME_CHUNK = 4096


@dataclass(eq=False)
class AdiabaticRun:
    T: float
    steps: int
    fidelity: float
    leakage: float
    realized_gate: np.ndarray
    transport_fidelity: float
    column_fidelity: float

    def row(self) -> dict:
        return {"T": self.T, "steps": self.steps, "fidelity": self.fidelity, "leakage": self.leakage}


def default_steps(T: float) -> int:
    return max(MIN_STEPS_PER_TIME, math.ceil(STEPS_PER_TIME * T))


def evolve(plan: LoopPlan, T: float, steps: int, psi0, record: bool = False):
    """Propagate ``psi0`` (a vector, or a matrix of column states) to ``tau = T``.

    With ``record=True`` also returns, for every step, the population
    ``||G^H psi||^2`` of the instantaneous encoded subspace (per column).
    """
    if T <= 0:
        raise ValidationError("T must be positive")
    if steps < MIN_STEPS_PER_TIME * T:
        raise ResolutionTooLow(f"{steps} steps for T={T}; need at least {MIN_STEPS_PER_TIME}*T")
    psi0 = np.asarray(psi0, dtype=np.complex128)
    vector = psi0.ndim == 1
    psi = np.array(psi0.reshape(plan.dim, -1), dtype=np.complex128, order="C")
    norms = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms - 1) > 1e-9):
        raise ValidationError("initial states must be normalized")
    dtau = T / steps
    phase = complex(np.exp(-1j * dtau))
    pops = []
    for start in range(0, steps, FRAME_CHUNK):
        stop = min(start + FRAME_CHUNK, steps)
        g = loopsynth.frames(plan, (np.arange(start, stop) + 0.5) / steps)
        p = kernels.projector_steps(psi, g, phase, record)
        if record:
            pops.append(p)
    out = psi[:, 0] if vector else psi
    if record:
        pops = np.concatenate(pops)
        return out, (pops[:, 0] if vector else pops)
    return out


def realized_gate(
    plan: LoopPlan, T: float, steps: Optional[int] = None, target: Optional[np.ndarray] = None
) -> AdiabaticRun:
    """Evolve every encoded basis state once around the loop and compare the
    resulting k x k map with ``target`` (default: the plan's gate).

    ``fidelity = |tr(U^H R)| / k`` for the encoded block ``R`` with the
    dynamical phase removed, i.e. the mean diagonal overlap after global phase
    alignment.  ``column_fidelity`` is the mean of the per-column moduli
    ``|<U e_j, R e_j>|``; it upper-bounds ``fidelity`` but cannot see
    relative phases between columns.  ``leakage`` is the worst population
    lost from the encoded subspace.  ``transport_fidelity`` compares ``R`` against
    ``return_block @ target``, the map a slow traversal actually produces
    when the frame does not come back to itself.
    """
    steps = default_steps(T) if steps is None else steps
    if target is None:
        if plan.gate is None:
            raise ValidationError("generic plans need an explicit target")
        target = plan.gate.U
    k = plan.k
    psi = evolve(plan, T, steps, plan.E)
    r = psi[:k, :] * np.exp(1j * T)
    leakage = float(np.max(1.0 - np.sum(np.abs(r) ** 2, axis=0)))
    overlap = np.trace(matcore.dag(target) @ r)
    aligned = r * np.exp(-1j * np.angle(overlap))
    expected = loopsynth.return_block(plan) @ target if plan.variant != "generic" else target
    return AdiabaticRun(
        T=float(T),
        steps=int(steps),
        fidelity=float(abs(overlap) / k),
        leakage=max(leakage, 0.0),
        realized_gate=aligned,
        transport_fidelity=float(abs(np.trace(matcore.dag(expected) @ r)) / k),
        column_fidelity=float(np.mean(np.abs(np.sum(target.conj() * r, axis=0)))),
    )


def sweep(plan: LoopPlan, T_list, steps_per_time: float = STEPS_PER_TIME) -> list:
    return [realized_gate(plan, T, max(MIN_STEPS_PER_TIME, math.ceil(steps_per_time * T))) for T in T_list]
