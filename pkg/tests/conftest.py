import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n, scale=1.0):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (z + z.conj().T) / 2


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def taylor_c(lam, alpha, s, n_max):
    """n! [t^n] of e^{i sigma t} sin(nu t)/nu by the Cauchy product of the
    two power series."""
    sigma = 0.5 * (lam + s)
    nu = 0.5 * math.sqrt((lam - s) ** 2 + 4 * alpha * alpha)
    rot = [(1j * sigma) ** m / math.factorial(m) for m in range(n_max + 1)]
    sinc = [0.0] * (n_max + 1)
    for r in range(0, (n_max - 1) // 2 + 1):
        sinc[2 * r + 1] = (-1) ** r * nu ** (2 * r) / math.factorial(2 * r + 1)
    return [
        math.factorial(n) * sum(rot[m] * sinc[n - m] for m in range(n + 1)) for n in range(n_max + 1)
    ]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {cid}: {detail}")
