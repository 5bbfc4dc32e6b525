"""Target gates and their generators in the holonomy sign convention.

Convention: the generator ``A`` of a gate ``U`` satisfies ``expm(-A) = U``.
``A`` is the block a loop operator must carry on the encoded subspace for
the transported frame to pick up exactly ``U``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matcore
from .errors import NotUnitary, UnknownGate, ValidationError

RAW_UNITARY_TOL = 1e-8

_S2 = 1 / np.sqrt(2)

GATES = {
    "identity": np.eye(2),
    "pauli_x": np.array([[0, 1], [1, 0]]),
    "pauli_y": np.array([[0, -1j], [1j, 0]]),
    "pauli_z": np.diag([1, -1]),
    "hadamard": _S2 * np.array([[1, 1], [1, -1]]),
    "phase_s": np.diag([1, 1j]),
    "t_gate": np.diag([1, np.exp(1j * np.pi / 4)]),
    "cnot": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "cz": np.diag([1, 1, 1, -1]),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
    "qft2": 0.5 * np.array([[1j**(r * c) for c in range(4)] for r in range(4)]),
}
GATE_NAMES = tuple(GATES)


@dataclass(frozen=True)
class GateSpec:
    """A target gate with its generator and the generator's eigendata.

    ``A @ Omega = Omega @ diag(1j * Lambda)``, ``Lambda`` ascending in
    ``[-pi, pi)``.
    """

    U: np.ndarray
    A: np.ndarray
    Omega: np.ndarray
    Lambda: np.ndarray
    name: Optional[str] = None

    @property
    def k(self) -> int:
        return self.U.shape[0]


def resolve_gate(spec) -> np.ndarray:
    """Standard matrix for a gate name, or a validated raw unitary."""
    if isinstance(spec, str):
        try:
            return GATES[spec].astype(np.complex128)
        except KeyError:
            raise UnknownGate(f"unknown gate {spec!r}; known: {', '.join(GATE_NAMES)}") from None
    u = matcore.as_matrix(spec)
    if u.shape not in ((2, 2), (4, 4)):
        raise ValidationError(f"gate matrix must be 2 x 2 or 4 x 4, got {u.shape}")
    if not matcore.is_unitary(u, RAW_UNITARY_TOL):
        raise NotUnitary("gate matrix is not unitary within %g" % RAW_UNITARY_TOL)
    return u


def gate_generator(u, name: Optional[str] = None) -> GateSpec:
    u = matcore.as_matrix(u)
    a = -matcore.logm_unitary(u, tol=RAW_UNITARY_TOL)
    lam, omega = matcore.eig_hermitian(-1j * a, tol=1e-10)
    # rounding can put the branch point just outside [-pi, pi)
    lam = np.where(np.abs(np.abs(lam) - np.pi) <= matcore.BRANCH_TOL, -np.pi, lam)
    order = np.argsort(lam, kind="stable")
    lam, omega = lam[order], omega[:, order]
    return GateSpec(U=u, A=a, Omega=omega, Lambda=lam, name=name)


def gate_spec(spec) -> GateSpec:
    """``gate_generator(resolve_gate(spec))``, keeping the name when given one."""
    name = spec if isinstance(spec, str) else None
    return gate_generator(resolve_gate(spec), name=name)
