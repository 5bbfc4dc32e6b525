"""Power recursion and generating functions for the bordered loop operator.

For ``X = [[A, w], [-w^H, i s]]`` with ``A w = i lam w`` and
``w^H w = alpha^2`` every power has the block pattern::

    X^n = [[A^n - b_n w w^H,  c_n w],
           [-conj(c_n) w^H,   d_n  ]]

with scalar sequences ``b, c, d``.  Their exponential generating functions
``B, C, D`` give ``exp(tX)`` in closed form.  This module evaluates both the
sequences and the closed forms so each can be checked against the other and
against a plain matrix exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matcore

SIMPSON_TOL = 1e-10
# below these the closed forms for B lose digits to cancellation
SMALL_NU = 1e-6
SMALL_ALPHA = 0.1


@dataclass(frozen=True)
class CoeffTriple:
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    lam: float
    alpha: float
    s: float


@dataclass(frozen=True)
class ClosedFormParams:
    q1: complex
    q2: complex
    gamma1: complex
    gamma2: complex
    nu: float


def recursion_coeffs(lam: float, alpha: float, s: float, N: int) -> CoeffTriple:
    """Sequences ``b_n, c_n, d_n`` for ``n = 0..N``.

    ``b_{n+1} = i lam b_n + conj(c_n)``, ``c_{n+1} = i lam c_n + d_n``,
    ``d_{n+1} = i s d_n - alpha^2 c_n``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    b = np.zeros(N + 1, dtype=np.complex128)
    c = np.zeros(N + 1, dtype=np.complex128)
    d = np.zeros(N + 1, dtype=np.complex128)
    c[1] = 1.0
    d[0] = 1.0
    d[1] = 1j * s
    a2 = alpha * alpha
    for n in range(1, N):
        b[n + 1] = 1j * lam * b[n] + np.conj(c[n])
        c[n + 1] = 1j * lam * c[n] + d[n]
        d[n + 1] = 1j * s * d[n] - a2 * c[n]
    return CoeffTriple(b, c, d, lam, alpha, s)


def closed_form_params(lam: float, alpha: float, s: float) -> ClosedFormParams:
    """Characteristic roots of ``C'' = i(lam+s) C' + (lam s - alpha^2) C``.

    ``C(0) = 0`` and ``C'(0) = 1`` fix ``gamma1 = -gamma2 = 1/(q1 - q2)``.
    """
    nu = 0.5 * math.sqrt((lam - s) ** 2 + 4 * alpha * alpha)
    mid = 0.5 * (lam + s)
    q1, q2 = 1j * (mid + nu), 1j * (mid - nu)
    gamma = 1 / (q1 - q2) if nu > 0 else math.inf
    return ClosedFormParams(q1, q2, gamma, -gamma, nu)


def adaptive_simpson(f, a: float, b: float, tol: float = SIMPSON_TOL, max_depth: int = 50):
    """Adaptive Simpson quadrature; ``f`` may be complex-valued."""

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15 * tol:
            return left + right + delta / 15
        return recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2, depth - 1
        )

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, max_depth)


def _c_func(lam, alpha, s, t):
    nu = 0.5 * np.sqrt((lam - s) ** 2 + 4 * alpha * alpha)
    rot = np.exp(0.5j * (lam + s) * t)
    if nu == 0:
        return rot * t
    return rot * np.sin(nu * t) / nu


def _expint(p, t):
    # (e^{pt} - 1)/p with its p -> 0 limit
    if p == 0:
        return t + 0j
    return np.expm1(p * t) / p


def gen_funcs(lam: float, alpha: float, s: float, t, with_b: bool = True):
    """Generating functions ``(B, C, D)`` at ``t`` (scalar or array).

    ``C(t) = e^{i(lam+s)t/2} sin(nu t)/nu``, ``D = C' - i lam C`` and
    ``B(t) = int_0^t e^{i lam (t-tau)} conj(C(tau)) dtau``.  At ``s = -lam``
    these reduce to ``C = sin(nu t)/nu``, ``D = cos(nu t) - i(lam/nu) sin(nu t)``
    and ``B = (e^{i lam t} - cos(nu t) - i(lam/nu) sin(nu t)) / (nu^2 - lam^2)``.
    When ``alpha = 0`` that denominator vanishes and ``B`` comes from the
    integral by adaptive Simpson instead; for small ``alpha`` the equivalent
    form with ``(e^{pt} - 1)/p`` terms is used, which has no cancellation.
    ``with_b=False`` skips ``B`` and returns zeros in its place.
    """
    t = np.asarray(t, dtype=float)
    nu = 0.5 * math.sqrt((lam - s) ** 2 + 4 * alpha * alpha)
    sigma = 0.5 * (lam + s)
    rot = np.exp(1j * sigma * t)
    if nu == 0:
        sin_over_nu, cos_nu = t, np.ones_like(t)
    else:
        sin_over_nu, cos_nu = np.sin(nu * t) / nu, np.cos(nu * t)
    C = rot * sin_over_nu
    D = rot * (cos_nu + 0.5j * (s - lam) * sin_over_nu)

    if not with_b:
        B = np.zeros_like(t, dtype=np.complex128)
    elif alpha == 0 or nu < SMALL_NU:
        B = _b_by_quadrature(lam, alpha, s, t)
    elif s == -lam and alpha >= SMALL_ALPHA:
        B = (np.exp(1j * lam * t) - cos_nu - 1j * lam * sin_over_nu) / (alpha * alpha)
    else:
        # conj(C) = e^{-i sigma tau} (e^{i nu tau} - e^{-i nu tau}) / (2 i nu)
        p_plus = -1j * (sigma + lam - nu)
        p_minus = -1j * (sigma + lam + nu)
        B = np.exp(1j * lam * t) * (_expint(p_plus, t) - _expint(p_minus, t)) / (2j * nu)
    B = np.asarray(B, dtype=np.complex128)
    if B.ndim == 0:
        return complex(B), complex(C), complex(D)
    return B, C, D


def _b_by_quadrature(lam, alpha, s, t):
    def one(x):
        if x == 0:
            return 0j
        return adaptive_simpson(
            lambda tau: np.exp(1j * lam * (x - tau)) * np.conj(_c_func(lam, alpha, s, tau)), 0.0, x
        )

    flat = np.array([one(float(x)) for x in np.ravel(t)], dtype=np.complex128)
    return flat.reshape(np.shape(t))


def assemble_bordered(A, w, lam, t, B, C, D):
    """``exp(tX) = [[e^{tA} - B w w^H, C w], [-conj(C) w^H, D]]``.

    ``t, B, C, D`` may be arrays of equal length; the result then stacks
    along a leading axis.  ``e^{tA}`` comes from the spectral form of ``A``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    B, C, D = (np.atleast_1d(np.asarray(x, dtype=np.complex128)) for x in (B, C, D))
    k = A.shape[0]
    lam_a, omega = matcore.eig_hermitian(-1j * A, tol=1e-9)
    w = np.asarray(w, dtype=np.complex128).reshape(k)
    wwh = np.outer(w, w.conj())
    out = np.zeros((t.size, k + 1, k + 1), dtype=np.complex128)
    out[:, :k, :k] = np.einsum("ij,tj,kj->tik", omega, np.exp(1j * np.outer(t, lam_a)), omega.conj())
    out[:, :k, :k] -= B[:, None, None] * wwh
    out[:, :k, k] = C[:, None] * w
    out[:, k, :k] = -np.conj(C)[:, None] * w.conj()
    out[:, k, k] = D
    return out


def _minimal_data(gate, j, n):
    lam = float(gate.Lambda[j])
    alpha = math.sqrt(max((n * math.pi) ** 2 - lam * lam, 0.0))
    w = alpha * gate.Omega[:, j]
    return lam, alpha, -lam, w


def _series_from_powers(powers_fn, norm, t, n_terms):
    x = abs(t) * norm
    squarings = math.ceil(math.log2(x)) + 1 if x >= 0.5 else 0
    tau = t / 2.0**squarings
    result = sum(powers_fn(m) * (tau**m / math.factorial(m)) for m in range(n_terms + 1))
    for _ in range(squarings):
        result = result @ result
    return result


def series_exp(gate, j: int, n: int, t: float, n_terms: int = 40) -> np.ndarray:
    """``exp(tX)`` from the truncated series, with ``X^m`` built from the
    recursion coefficients in the block pattern.  Scaling keeps the series
    argument below 1 and squaring restores it."""
    lam, alpha, s, w = _minimal_data(gate, j, n)
    k = gate.k
    coeffs = recursion_coeffs(lam, alpha, s, max(n_terms, 2))
    wwh = np.outer(w, w.conj())
    a_pows = [np.eye(k, dtype=np.complex128)]
    for _ in range(n_terms):
        a_pows.append(a_pows[-1] @ gate.A)

    def power(m):
        out = np.zeros((k + 1, k + 1), dtype=np.complex128)
        out[:k, :k] = a_pows[m] - coeffs.b[m] * wwh
        out[:k, k] = coeffs.c[m] * w
        out[k, :k] = -np.conj(coeffs.c[m]) * w.conj()
        out[k, k] = coeffs.d[m]
        return out

    norm = matcore.fro(gate.A) + 2 * alpha + abs(s)
    return _series_from_powers(power, norm, t, n_terms)


def series_exp_doubled(gate, windings, t: float, n_terms: int = 40) -> np.ndarray:
    """Doubled-variant analogue of :func:`series_exp`.

    Each eigen-direction carries its own independent recursion at
    ``s_k = -lam_k``; ``X^m`` is assembled from the per-direction sequences.
    """
    k = gate.k
    lams = np.asarray(gate.Lambda, dtype=float)
    alphas = np.sqrt(np.maximum((np.asarray(windings) * math.pi) ** 2 - lams**2, 0.0))
    ws = gate.Omega * alphas
    seqs = [recursion_coeffs(lams[i], alphas[i], -lams[i], max(n_terms, 2)) for i in range(k)]
    a_pows = [np.eye(k, dtype=np.complex128)]
    for _ in range(n_terms):
        a_pows.append(a_pows[-1] @ gate.A)

    def power(m):
        out = np.zeros((2 * k, 2 * k), dtype=np.complex128)
        out[:k, :k] = a_pows[m]
        for i in range(k):
            wi = ws[:, i]
            out[:k, :k] -= seqs[i].b[m] * np.outer(wi, wi.conj())
            out[:k, k + i] = seqs[i].c[m] * wi
            out[k + i, :k] = -np.conj(seqs[i].c[m]) * wi.conj()
            out[k + i, k + i] = seqs[i].d[m]
        return out

    norm = matcore.fro(gate.A) + 2 * float(np.sum(alphas)) + float(np.sum(np.abs(lams)))
    return _series_from_powers(power, norm, t, n_terms)


def exp_via_recursion(gate, j: int, n: int, t: float, N_terms: int = 40) -> np.ndarray:
    """``exp(tX)`` of the minimal loop on eigenvector ``j`` with winding ``n``,
    from the closed-form generating functions at ``s = -lam``.

    :func:`series_exp` evaluates the same matrix from the raw recursion and is
    the cross-check for this one.
    """
    lam, alpha, s, w = _minimal_data(gate, j, n)
    B, C, D = gen_funcs(lam, alpha, s, t)
    return assemble_bordered(gate.A, w, lam, t, B, C, D)[0]
