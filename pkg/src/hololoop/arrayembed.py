"""Loops for gates on a register of qubits sharing one ancilla.

Tensor factor 0 is the ancilla, factors 1..n the main qubits in order, so
``H0 = |0><0| (x) I`` puts the encoded subspace (ancilla in ``|0>``) in the
first ``2^n`` basis states.  That is the same subspace-first layout the loop
constructions use, which makes the local operator of a gate on
``{ancilla, targets}`` equal to the doubled loop operator of that gate
without any reordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import gatelog, holocheck, loopsynth, matcore
from .errors import DuplicateTarget, LocalityViolation, QubitOutOfRange, ValidationError
from .gatelog import GateSpec
from .loopsynth import LoopPlan

MAX_MAIN_QUBITS = 5
SPECTATOR_TOL = 1e-6

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)
I2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class ArrayLayout:
    n_main: int

    def __post_init__(self):
        if not 1 <= self.n_main <= MAX_MAIN_QUBITS:
            raise ValidationError(f"n_main must be in 1..{MAX_MAIN_QUBITS}, got {self.n_main}")

    @property
    def dim(self) -> int:
        return 2 ** (self.n_main + 1)

    @property
    def subspace_dim(self) -> int:
        return 2**self.n_main


@dataclass(eq=False)
class LocalLoop:
    x_local: np.ndarray
    targets: tuple
    X_full: np.ndarray
    H0: np.ndarray
    layout: ArrayLayout
    local_plan: LoopPlan
    plan: LoopPlan

    @property
    def gate(self) -> GateSpec:
        return self.local_plan.gate


def h0_array(layout: ArrayLayout) -> np.ndarray:
    return np.kron(0.5 * (I2 + SIGMA_Z), np.eye(layout.subspace_dim)).astype(np.complex128)


def embed_operator(op: np.ndarray, factors: Sequence[int], n_factors: int) -> np.ndarray:
    """Lift ``op`` acting on the qubit factors ``factors`` (in that order) to
    all ``n_factors`` qubits, identity elsewhere."""
    factors = list(factors)
    rest = [f for f in range(n_factors) if f not in factors]
    full = np.kron(op, np.eye(2 ** len(rest)))
    inv = np.argsort(factors + rest)
    axes = list(inv) + [n_factors + i for i in inv]
    dim = 2**n_factors
    return full.reshape([2] * (2 * n_factors)).transpose(axes).reshape(dim, dim)


def qubit_permutation(order: Sequence[int]) -> np.ndarray:
    """Unitary ``P`` such that ``P (f_0 (x) f_1 ...) P^H`` puts factor ``f_q`` at
    position ``order[q]``."""
    n = len(order)
    dim = 2**n
    eye = np.eye(dim, dtype=np.complex128).reshape([2] * n + [dim])
    return eye.transpose(list(order) + [n]).reshape(dim, dim).T


def _check_targets(targets, layout):
    for q in targets:
        if not 1 <= q <= layout.n_main:
            raise QubitOutOfRange(f"qubit {q} outside 1..{layout.n_main}")
    if len(set(targets)) != len(targets):
        raise DuplicateTarget(f"repeated target in {tuple(targets)}")


def local_x_single(u, windings=(1, 1), strict: bool = False) -> np.ndarray:
    """4 x 4 loop operator on ``{ancilla, qubit}`` for a one-qubit gate,
    assembled from Pauli terms::

        x = P0 (x) A - i P1 (x) diag(lam) + s+ (x) Omega d - s- (x) d Omega^H

    where ``P0, P1`` project the ancilla on ``|0>, |1>`` and ``A`` is the
    generator with ``expm(-A) = u``.
    """
    gate = gatelog.gate_generator(gatelog.resolve_gate(u))
    if gate.k != 2:
        raise ValidationError("local_x_single needs a 2 x 2 gate")
    plan = loopsynth.plan_doubled(gate, windings, strict)
    od = gate.Omega * plan.alphas
    return (
        np.kron(0.5 * (I2 + SIGMA_Z), gate.A)
        - 1j * np.kron(0.5 * (I2 - SIGMA_Z), np.diag(gate.Lambda))
        + np.kron(SIGMA_PLUS, od)
        - np.kron(SIGMA_MINUS, od.conj().T)
    )


def _local_loop(u, factors, layout, windings, strict, x_override=None) -> LocalLoop:
    gate = gatelog.gate_generator(gatelog.resolve_gate(u))
    local_plan = loopsynth.plan_doubled(gate, windings, strict)
    x = local_plan.X if x_override is None else x_override
    x_full = embed_operator(x, [0] + list(factors), layout.n_main + 1)
    return LocalLoop(
        x_local=x,
        targets=tuple(factors),
        X_full=x_full,
        H0=h0_array(layout),
        layout=layout,
        local_plan=local_plan,
        plan=loopsynth.loop_from_generator(x_full, layout.subspace_dim),
    )


def embed_single(u, k: int, layout: ArrayLayout, windings: Optional[Sequence[int]] = None, strict: bool = False):
    _check_targets([k], layout)
    windings = (1, 1) if windings is None else windings
    x = local_x_single(u, windings, strict)
    return _local_loop(u, [k], layout, windings, strict, x_override=x)


def embed_two(u4, targets, layout: ArrayLayout, windings: Optional[Sequence[int]] = None, strict: bool = False):
    """Loop for a two-qubit gate on ``targets = (k, l)``; ``k`` is the gate's
    first (most significant) qubit."""
    targets = tuple(int(q) for q in targets)
    if len(targets) != 2:
        raise ValidationError("embed_two needs exactly two targets")
    _check_targets(targets, layout)
    u4 = gatelog.resolve_gate(u4)
    if u4.shape != (4, 4):
        raise ValidationError("embed_two needs a 4 x 4 gate")
    return _local_loop(u4, targets, layout, windings, strict)


def expected_gate(u, targets, layout: ArrayLayout) -> np.ndarray:
    """``u`` on the main-array qubits ``targets``, identity on the rest."""
    return embed_operator(gatelog.resolve_gate(u), [q - 1 for q in targets], layout.n_main)


def ancilla_leak(loop: LocalLoop) -> float:
    """Off-diagonal block norm of ``e^{X_full}`` from the local closed form."""
    e_local = loopsynth.exp_tX(loop.local_plan, 1.0)
    full = embed_operator(e_local, [0] + list(loop.targets), loop.layout.n_main + 1)
    return loopsynth.offdiag_block_norm(full, loop.layout.subspace_dim)


def spectator_residual(w: np.ndarray, targets, layout: ArrayLayout) -> float:
    """Largest commutator norm of ``w`` with ``sigma_z``/``sigma_x`` on any
    qubit outside ``targets``."""
    worst = 0.0
    for q in range(1, layout.n_main + 1):
        if q in targets:
            continue
        for pauli in (SIGMA_Z, SIGMA_X):
            p = embed_operator(pauli, [q - 1], layout.n_main)
            worst = max(worst, matcore.fro(w @ p - p @ w))
    return worst


def local_action_report(loop: LocalLoop, expected_local, N: int) -> dict:
    report = holocheck.wilson_holonomy(loop.plan, N, iso_grid=0)
    w = report.wilson_holonomy
    expected = expected_gate(expected_local, loop.targets, loop.layout)
    return {
        "residual": matcore.phase_aligned_distance(w, expected),
        "spectator_residual": spectator_residual(w, loop.targets, loop.layout),
        "closure_residual": report.closure_residual,
        "ancilla_leak": ancilla_leak(loop),
        "wilson_holonomy": w,
    }


def verify_local_action(loop: LocalLoop, expected_local, N: int) -> float:
    """Phase-aligned distance between the loop's Wilson holonomy on the main
    array and ``expected_local`` embedded on the loop's targets.

    Raises :class:`LocalityViolation` if a spectator qubit is touched.
    """
    rep = local_action_report(loop, expected_local, N)
    if rep["spectator_residual"] > SPECTATOR_TOL:
        raise LocalityViolation(f"spectator commutator {rep['spectator_residual']:.3e}")
    return rep["residual"]


def reference_sigma_z_x() -> np.ndarray:
    """Alternative 4 x 4 sigma_z loop operator, kept for comparison
    only: ``(i pi/2)[(sz - sy) (x) I + (sy - I) (x) sz]``."""
    return (0.5j * np.pi) * (np.kron(SIGMA_Z - SIGMA_Y, I2) + np.kron(SIGMA_Y - I2, SIGMA_Z))
