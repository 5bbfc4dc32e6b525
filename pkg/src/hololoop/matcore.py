"""Dense complex linear algebra on small matrices.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Products, adjoints and norms are numpy; the eigensolver, exponential,
unitary logarithm and polar factor are implemented here.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import NoConvergence, NotHermitian, NotUnitary, Singular, ValidationError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
JACOBI_TOL = 1e-15
JACOBI_MAX_SWEEPS = 64
SINGULAR_TOL = 1e-8
BRANCH_TOL = 1e-9
CLUSTER_TOL = 1e-5


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def _square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def fro(m) -> float:
    return float(np.linalg.norm(m))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and fro(m - dag(m)) <= tol


def is_antihermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and fro(m + dag(m)) <= tol


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and fro(dag(m) @ m - np.eye(m.shape[0])) <= tol


def phase_aligned_distance(w, u) -> float:
    """``min_phi ||W - e^{i phi} U||_F``, attained at ``phi = arg tr(U^H W)``."""
    phi = np.angle(np.trace(dag(u) @ w))
    return fro(w - np.exp(1j * phi) * u)


def eig_hermitian(m, tol: float = HERMITIAN_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``w`` ascending and ``M V = V diag(w)``.  Each
    column of ``V`` is scaled so its first non-negligible entry is real and
    positive, which makes the output reproducible for identical input.
    """
    a = _square(m)
    if fro(a - dag(a)) > tol:
        raise NotHermitian(f"||M - M^H||_F = {fro(a - dag(a)):.3e} exceeds {tol:g}")
    a = 0.5 * (a + dag(a))
    out = kernels.jacobi_eigh(a, JACOBI_TOL, max_sweeps)
    if out is None:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    w, v, _ = out
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-10)
        if big.size:
            z = col[big[0]]
            v[:, j] = col * (abs(z) / z)
    return w, v


def _expm_series(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    norm = float(np.max(np.sum(np.abs(a), axis=0))) if n else 0.0
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    a = a / (2.0**squarings)
    result = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    for j in range(1, 40):
        term = term @ a / j
        result = result + term
        if fro(term) <= 1e-18 * fro(result):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def _expm_eig(a: np.ndarray) -> np.ndarray:
    w, v = eig_hermitian(-1j * a, tol=max(HERMITIAN_TOL, 1e-12 * fro(a)))
    return (v * np.exp(1j * w)) @ dag(v)


def expm(m, method: str = "series") -> np.ndarray:
    """Matrix exponential.

    ``method="series"`` is scaling and squaring with a truncated Taylor
    series (any square matrix); ``method="eig"`` diagonalizes ``-iM`` and is
    only valid for anti-Hermitian ``M``.
    """
    a = _square(m)
    if method == "series":
        return _expm_series(a)
    if method == "eig":
        return _expm_eig(a)
    raise ValueError(f"unknown expm method {method!r}")


def _clusters(values, tol):
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            groups.append(list(range(start, i)))
            start = i
    return groups


def _log_near_identity(e: np.ndarray) -> np.ndarray:
    # log(I + e) by the Mercator series; callers guarantee ||e|| << 1
    out = np.zeros_like(e)
    power = np.eye(e.shape[0], dtype=np.complex128)
    for j in range(1, 60):
        power = power @ e
        term = power / j
        out = out + term if j % 2 else out - term
        if fro(term) < 1e-18:
            break
    return out


def logm_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    """Principal logarithm of a unitary matrix.

    The result ``G`` is anti-Hermitian with ``expm(G) = U`` and eigenvalues
    ``i theta``, ``theta`` in ``(-pi, pi]``; an eigenphase of exactly ``pi``
    maps to ``+pi``.

    The eigenbasis is found from the commuting Hermitian parts
    ``(U + U^H)/2`` and ``(U - U^H)/2i``: the first is diagonalized, then
    the second inside each of its near-degenerate clusters.  Phases that
    still coincide are logged as a block through a series, so nearly
    repeated eigenvalues do not need accurate eigenvectors.
    """
    u = _square(u)
    n = u.shape[0]
    if fro(dag(u) @ u - np.eye(n)) > tol:
        raise NotUnitary(f"||U^H U - I||_F = {fro(dag(u) @ u - np.eye(n)):.3e} exceeds {tol:g}")
    re_part = 0.5 * (u + dag(u))
    im_part = -0.5j * (u - dag(u))
    w, v = eig_hermitian(re_part, tol=1e-9)
    for group in _clusters(w, CLUSTER_TOL):
        if len(group) > 1:
            vc = v[:, group]
            sub = dag(vc) @ im_part @ vc
            _, v2 = eig_hermitian(0.5 * (sub + dag(sub)), tol=1e-9)
            v[:, group] = vc @ v2
    b = dag(v) @ u @ v
    phases = np.angle(np.diag(b))
    order = np.argsort(phases, kind="stable")
    v, b, phases = v[:, order], b[np.ix_(order, order)], phases[order]
    groups = _clusters(phases, CLUSTER_TOL)
    # join the first and last groups across the branch cut
    if len(groups) > 1 and phases[0] + 2 * np.pi - phases[-1] <= CLUSTER_TOL:
        groups = [groups[-1] + groups[0]] + groups[1:-1]
    log_b = np.zeros((n, n), dtype=np.complex128)
    for group in groups:
        block = b[np.ix_(group, group)]
        theta = float(np.angle(np.trace(block)))
        if theta <= -np.pi + BRANCH_TOL:
            theta += 2 * np.pi
        corr = _log_near_identity(np.exp(-1j * theta) * block - np.eye(len(group)))
        log_b[np.ix_(group, group)] = 1j * theta * np.eye(len(group)) + corr
    g = v @ log_b @ dag(v)
    return 0.5 * (g - dag(g))


def unitarize(m, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """Unitary polar factor of ``M``, the closest unitary in Frobenius norm.

    Computed as ``M (M^H M)^{-1/2}`` from the eigendecomposition of ``M^H M``.
    """
    a = _square(m)
    gram = dag(a) @ a
    w, v = eig_hermitian(0.5 * (gram + dag(gram)))
    smallest = math.sqrt(max(float(w[0]), 0.0)) if len(w) else 1.0
    if smallest < singular_tol:
        raise Singular(f"smallest singular value {smallest:.3e} below {singular_tol:g}")
    inv_sqrt = (v / np.sqrt(w)) @ dag(v)
    q = a @ inv_sqrt
    # one Newton step (Q + Q^-H)/2 cleans residual non-unitarity
    return 0.5 * (q + dag(np.linalg.inv(q)))
