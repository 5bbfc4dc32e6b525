"""Pure-Python/numpy versions of the compiled inner loops in ``_kernels``."""

import numpy as np

TINY = 1e-290


def jacobi_eigh(a_in, tol=1e-15, max_sweeps=64):
    """Cyclic Jacobi on a Hermitian matrix.

    Returns ``(w, V, sweeps)`` with unsorted eigenvalues, or ``None`` if the
    off-diagonal mass has not dropped below ``tol * ||A||_F`` after
    ``max_sweeps`` sweeps.
    """
    a = np.array(a_in, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    thresh2 = tol * tol * float(np.sum(np.abs(a) ** 2))
    offmask = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps + 1):
        if float(np.sum(np.abs(a[offmask]) ** 2)) <= thresh2:
            return a.diagonal().real.copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r < TINY:  # phase would overflow; the entry is already negligible
                    a[p, q] = a[q, p] = 0.0
                    continue
                ph = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if abs(tau) > 1e150:  # tau * tau would overflow
                    t = 0.5 / tau
                elif tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * ph.conjugate(), c * ph.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    return None


def overlap_product(frames_in, w0_in=None):
    """Ordered product ``O_{N-1} ... O_0 @ W0`` with ``O_m = F_{m+1}^H F_m``."""
    f = np.asarray(frames_in, dtype=np.complex128)
    k = f.shape[2]
    w = np.eye(k, dtype=np.complex128) if w0_in is None else np.array(w0_in, dtype=np.complex128)
    overlaps = np.matmul(f[1:].conj().transpose(0, 2, 1), f[:-1])
    for o in overlaps:
        w = o @ w
    return w


def projector_steps(psi_in, frames_in, phase, record=False):
    """In place: ``psi <- psi + (phase - 1) G_m G_m^H psi`` for each frame ``G_m``."""
    psi = psi_in
    g = np.asarray(frames_in, dtype=np.complex128)
    factor = phase - 1.0
    gh = g.conj().transpose(0, 2, 1)
    pops = np.zeros((g.shape[0], psi.shape[1])) if record else None
    for m in range(g.shape[0]):
        tmp = gh[m] @ psi
        if record:
            pops[m] = np.sum(np.abs(tmp) ** 2, axis=0)
        psi += factor * (g[m] @ tmp)
    return pops
