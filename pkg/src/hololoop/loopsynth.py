"""Loop operators whose conjugation orbit closes on the encoded subspace.

Basis layout: the k encoded levels come first, auxiliary levels after, so
``P0 = diag(1, ..., 1, 0, ..., 0)`` with k ones.  The family of Hamiltonians
is ``H(t) = e^{tX} P0 e^{-tX}``, ``t`` in ``[0, 1]``; the loop closes when
``e^{X}`` is block diagonal.

Two constructions are provided:

* ``minimal``: one extra level, ``X = [[A, w], [-w^H, i s]]`` with
  ``w = alpha v_j`` along one eigenvector of ``A`` and ``s = -lam_j``.
* ``doubled``: k extra levels, ``X = [[A, Omega D], [-D Omega^H, -i Lambda]]``
  with ``D = diag(alpha_k)``.

Both pick ``alpha^2 = (n pi)^2 - lam^2`` so every rotation frequency is a
whole multiple of pi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import coeffora, matcore
from .errors import ValidationError, WindingTooSmall
from .gatelog import GateSpec

log = logging.getLogger(__name__)

# alpha below this counts as a collapsed loop direction
DEGENERATE_ALPHA = 1e-6


@dataclass(frozen=True, eq=False)
class LoopPlan:
    variant: str
    X: np.ndarray
    k: int
    windings: tuple
    alphas: np.ndarray
    nus: np.ndarray
    lambdas: np.ndarray
    gate: Optional[GateSpec] = None
    eigvec_index: Optional[int] = None
    s_param: Optional[float] = None
    degenerate: tuple = ()
    _spectral: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    @property
    def P0(self) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=np.complex128)
        p[: self.k, : self.k] = np.eye(self.k)
        return p

    @property
    def E(self) -> np.ndarray:
        """Injection of the encoded subspace: the first k basis columns."""
        return np.eye(self.dim, self.k, dtype=np.complex128)

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "dim": self.dim,
            "k": self.k,
            "eigvec_index": self.eigvec_index,
            "s": self.s_param,
            "lambda": [float(x) for x in self.lambdas],
            "alpha": [float(x) for x in self.alphas],
            "nu": [float(x) for x in self.nus],
            "n": [int(x) for x in self.windings],
            "degenerate_direction": list(self.degenerate),
        }


def _alpha(lam: float, n: int) -> float:
    if n < 1:
        raise WindingTooSmall(f"winding must be >= 1, got {n}")
    a2 = (n * math.pi) ** 2 - lam * lam
    if a2 < -1e-9:
        raise WindingTooSmall(f"(n pi)^2 < lam^2 for n={n}, lam={lam}")
    return math.sqrt(max(a2, 0.0))


def _resolve_winding(lam: float, n: int, strict: bool):
    alpha = _alpha(lam, n)
    if alpha <= DEGENERATE_ALPHA and strict:
        n = n + 1
        alpha = _alpha(lam, n)
    degenerate = alpha <= DEGENERATE_ALPHA
    if degenerate:
        log.info("loop direction collapses (alpha=0) for lam=%.6g, n=%d", lam, n)
    return n, alpha, degenerate


def plan_minimal(gate: GateSpec, j: int, n: int = 1, strict: bool = False) -> LoopPlan:
    """Bordered ``(k+1)``-dimensional loop along eigenvector ``j`` (0-based)."""
    k = gate.k
    if not 0 <= j < k:
        raise ValidationError(f"eigvec index {j} out of range 0..{k - 1}")
    lam = float(gate.Lambda[j])
    n, alpha, degenerate = _resolve_winding(lam, n, strict)
    w = alpha * gate.Omega[:, j]
    x = np.zeros((k + 1, k + 1), dtype=np.complex128)
    x[:k, :k] = gate.A
    x[:k, k] = w
    x[k, :k] = -w.conj()
    x[k, k] = -1j * lam
    return LoopPlan(
        variant="minimal",
        X=x,
        k=k,
        windings=(n,),
        alphas=np.array([alpha]),
        nus=np.array([n * math.pi]),
        lambdas=np.array([lam]),
        gate=gate,
        eigvec_index=j,
        s_param=-lam,
        degenerate=(degenerate,),
    )


def plan_doubled(gate: GateSpec, windings: Optional[Sequence[int]] = None, strict: bool = False) -> LoopPlan:
    """``2k``-dimensional loop coupling every eigen-direction of ``A``."""
    k = gate.k
    windings = [1] * k if windings is None else [int(n) for n in windings]
    if len(windings) != k:
        raise ValidationError(f"need {k} windings, got {len(windings)}")
    resolved = [_resolve_winding(float(lam), n, strict) for lam, n in zip(gate.Lambda, windings)]
    ns = tuple(r[0] for r in resolved)
    alphas = np.array([r[1] for r in resolved])
    x = np.zeros((2 * k, 2 * k), dtype=np.complex128)
    x[:k, :k] = gate.A
    x[:k, k:] = gate.Omega * alphas
    x[k:, :k] = -(gate.Omega * alphas).conj().T
    x[k:, k:] = np.diag(-1j * gate.Lambda)
    return LoopPlan(
        variant="doubled",
        X=x,
        k=k,
        windings=ns,
        alphas=alphas,
        nus=np.array(ns, dtype=float) * math.pi,
        lambdas=np.array(gate.Lambda, dtype=float),
        gate=gate,
        degenerate=tuple(r[2] for r in resolved),
    )


def loop_from_generator(X, k: int) -> LoopPlan:
    """Wrap an arbitrary anti-Hermitian ``X``; ``e^{tX}`` is then spectral."""
    x = matcore.as_matrix(X)
    if not matcore.is_antihermitian(x, 1e-10):
        raise ValidationError("loop generator must be anti-Hermitian")
    if not 1 <= k < x.shape[0]:
        raise ValidationError(f"subspace dimension {k} out of range")
    return LoopPlan(
        variant="generic",
        X=x,
        k=k,
        windings=(),
        alphas=np.array([]),
        nus=np.array([]),
        lambdas=np.array([]),
    )


def x0_matrix(plan: LoopPlan) -> np.ndarray:
    """``X0 = [[i Lambda, D], [-D, -i Lambda]]`` of a doubled plan."""
    lam, d = np.diag(plan.lambdas), np.diag(plan.alphas)
    return np.block([[1j * lam, d], [-d, -1j * lam]]).astype(np.complex128)


def _exp_doubled_unit(plan: LoopPlan, t: np.ndarray) -> np.ndarray:
    # all windings 1: nu = pi I
    k, g = plan.k, plan.gate
    c, s = np.cos(np.pi * t), np.sin(np.pi * t)
    eye = np.eye(k)
    od = g.Omega * plan.alphas
    out = np.empty((t.size, 2 * k, 2 * k), dtype=np.complex128)
    out[:, :k, :k] = c[:, None, None] * eye + s[:, None, None] * (g.A / np.pi)
    out[:, :k, k:] = s[:, None, None] * (od / np.pi)
    out[:, k:, :k] = -s[:, None, None] * (od.conj().T / np.pi)
    out[:, k:, k:] = c[:, None, None] * eye - s[:, None, None] * (1j * np.diag(plan.lambdas) / np.pi)
    return out


def _exp_doubled_general(plan: LoopPlan, t: np.ndarray) -> np.ndarray:
    # blockdiag(Omega, I) e^{t X0} blockdiag(Omega^H, I) with diagonal nu
    k, g = plan.k, plan.gate
    nu = plan.nus
    c = np.cos(np.outer(t, nu))
    sn = np.sin(np.outer(t, nu)) / nu
    lam, alpha = plan.lambdas, plan.alphas
    e0 = np.zeros((t.size, 2 * k, 2 * k), dtype=np.complex128)
    idx = np.arange(k)
    e0[:, idx, idx] = c + 1j * lam * sn
    e0[:, idx + k, idx + k] = c - 1j * lam * sn
    e0[:, idx, idx + k] = alpha * sn
    e0[:, idx + k, idx] = -alpha * sn
    rot = np.eye(2 * k, dtype=np.complex128)
    rot[:k, :k] = g.Omega
    return rot @ e0 @ matcore.dag(rot)


def _exp_minimal(plan: LoopPlan, t: np.ndarray) -> np.ndarray:
    lam, alpha = float(plan.lambdas[0]), float(plan.alphas[0])
    w = plan.X[: plan.k, plan.k]
    # a collapsed direction has w = 0, so B never contributes
    B, C, D = coeffora.gen_funcs(lam, alpha, plan.s_param, t, with_b=alpha > DEGENERATE_ALPHA)
    return coeffora.assemble_bordered(plan.gate.A, w, lam, t, B, C, D)


def _exp_spectral(plan: LoopPlan, t: np.ndarray) -> np.ndarray:
    if "eig" not in plan._spectral:
        plan._spectral["eig"] = matcore.eig_hermitian(-1j * plan.X, tol=1e-9)
    w, v = plan._spectral["eig"]
    phases = np.exp(1j * np.outer(t, w))
    return np.einsum("ij,tj,kj->tik", v, phases, v.conj())


def exp_tX(plan: LoopPlan, t, path: Optional[str] = None) -> np.ndarray:
    """``e^{tX}`` in closed form; ``t`` may be a scalar or a 1-d array.

    ``path`` overrides the evaluation route (``"unit"``, ``"general"``,
    ``"minimal"``, ``"spectral"``); by default doubled plans with all
    windings 1 use the ``nu = pi`` form and other doubled plans the general
    diagonal-``nu`` form.
    """
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if path is None:
        if plan.variant == "doubled":
            path = "unit" if all(n == 1 for n in plan.windings) else "general"
        else:
            path = {"minimal": "minimal", "generic": "spectral"}[plan.variant]
    fn = {
        "unit": _exp_doubled_unit,
        "general": _exp_doubled_general,
        "minimal": _exp_minimal,
        "spectral": _exp_spectral,
    }[path]
    out = fn(plan, ts)
    return out[0] if scalar else out


def frames(plan: LoopPlan, t) -> np.ndarray:
    """Transported frame ``e^{tX} E``: the first k columns of ``e^{tX}``."""
    return exp_tX(plan, t)[..., :, : plan.k]


def hamiltonian_at(plan: LoopPlan, t) -> np.ndarray:
    """``H(t) = e^{tX} P0 e^{-tX}``, computed as ``F F^H`` from the frame."""
    f = frames(plan, t)
    return f @ matcore.dag(f)


def offdiag_block_norm(m: np.ndarray, k: int) -> float:
    return math.hypot(matcore.fro(m[:k, k:]), matcore.fro(m[k:, :k]))


def closure_residual(plan: LoopPlan) -> float:
    """``||e^{X} P0 e^{-X} - P0||_F`` with ``e^{X}`` from the generic series."""
    u = matcore.expm(plan.X)
    p0 = plan.P0
    return matcore.fro(u @ p0 @ matcore.dag(u) - p0)


def return_block(plan: LoopPlan) -> np.ndarray:
    """Upper-left k x k block of ``e^{X}``.

    On a closed loop the transported frame comes back as ``E Q`` rather than
    ``E``; a state carried adiabatically around the loop therefore ends up
    transformed by ``Q`` times the holonomy.  For doubled plans with all
    windings 1, ``Q = -I``.
    """
    return exp_tX(plan, 1.0)[: plan.k, : plan.k]
