"""Holonomy of a loop from transported frames alone.

The discrete Wilson line multiplies overlaps of consecutive frames,
``W_N = prod_{m=N-1..0} F(t_{m+1})^H F(t_m)`` with later factors on the left.
It never reads the connection, so comparing it to ``expm(-A)`` is an
independent check of the constant-connection result.  The raw product
carries an O(1/N) norm defect; its unitary polar factor is what gets
reported as the holonomy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels, loopsynth, matcore
from .loopsynth import LoopPlan

MIN_WILSON_STEPS = 16
FRAME_CHUNK = 4096


@dataclass(eq=False)
class HolonomyReport:
    closure_residual: float
    connection: np.ndarray
    wilson_steps: int
    wilson_holonomy: np.ndarray
    raw_holonomy: np.ndarray
    target: np.ndarray
    target_distance: float
    raw_distance: float
    isospectral_residual: float
    return_block: np.ndarray


def frame_at(plan: LoopPlan, t) -> np.ndarray:
    return loopsynth.frames(plan, t)


def connection_of(plan: LoopPlan) -> np.ndarray:
    e = plan.E
    return matcore.dag(e) @ plan.X @ e


def wilson_line(plan: LoopPlan, N: int, gauge: Optional[np.ndarray] = None) -> np.ndarray:
    """Raw ordered overlap product over ``t_m = m/N``, ``m = 0..N``.

    ``gauge`` replaces the initial frame ``E`` by ``E V``.
    """
    if N < MIN_WILSON_STEPS:
        raise ValueError(f"need at least {MIN_WILSON_STEPS} Wilson steps, got {N}")
    w = np.eye(plan.k, dtype=np.complex128)
    for start in range(0, N, FRAME_CHUNK):
        stop = min(start + FRAME_CHUNK, N)
        f = frame_at(plan, np.arange(start, stop + 1) / N)
        if gauge is not None:
            f = f @ gauge
        w = kernels.overlap_product(f, w)
    return w


def isospectral_residual(plan: LoopPlan, grid: int = 101) -> float:
    """Largest eigenvalue deviation of ``H(t)`` from ``{0, 1}`` on a t-grid."""
    expected = np.r_[np.zeros(plan.dim - plan.k), np.ones(plan.k)]
    worst = 0.0
    for h in loopsynth.hamiltonian_at(plan, np.linspace(0.0, 1.0, grid)):
        w, _ = matcore.eig_hermitian(h, tol=1e-9)
        worst = max(worst, float(np.max(np.abs(w - expected))))
    return worst


def wilson_holonomy(
    plan: LoopPlan, N: int, gauge: Optional[np.ndarray] = None, iso_grid: int = 101
) -> HolonomyReport:
    a = connection_of(plan)
    if gauge is not None:
        a = matcore.dag(gauge) @ a @ gauge
    target = matcore.expm(-a)
    raw = wilson_line(plan, N, gauge)
    w = matcore.unitarize(raw)
    return HolonomyReport(
        closure_residual=loopsynth.closure_residual(plan),
        connection=a,
        wilson_steps=N,
        wilson_holonomy=w,
        raw_holonomy=raw,
        target=target,
        target_distance=matcore.phase_aligned_distance(w, target),
        raw_distance=matcore.phase_aligned_distance(raw, target),
        isospectral_residual=isospectral_residual(plan, iso_grid) if iso_grid else float("nan"),
        return_block=loopsynth.return_block(plan),
    )
