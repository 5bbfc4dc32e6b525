import numpy as np
import pytest
import scipy.linalg

from hololoop import _fallback, adiasim, gatelog, kernels, loopsynth, matcore
from hololoop.errors import ResolutionTooLow, ValidationError

T_SWEEP = (50, 100, 200, 400)


def doubled(name):
    return loopsynth.plan_doubled(gatelog.gate_spec(name))


def exact_final_state(plan, T, psi0):
    """Constant Hamiltonian in the frame co-moving with ``e^{tX}``:
    ``psi(T) = e^{X} expm(-i T P0 - X) psi0``."""
    return scipy.linalg.expm(plan.X) @ scipy.linalg.expm(-1j * T * plan.P0 - plan.X) @ psi0


@pytest.fixture(scope="module")
def sweep_runs():
    return {name: adiasim.sweep(doubled(name), T_SWEEP) for name in gatelog.GATE_NAMES}


# ---------------------------------------------------------------- evolve


def test_short_time_is_trivial():
    p = doubled("identity")
    psi0 = p.E[:, 0]
    psi = adiasim.evolve(p, 1e-6, 1, psi0)
    assert np.linalg.norm(psi - psi0) <= 1e-5


def test_constant_hamiltonian_phase():
    p = loopsynth.loop_from_generator(np.zeros((4, 4)), 2)
    psi0 = np.array([0.6, 0.8j, 0, 0])
    for T in (3.0, 17.5):
        psi = adiasim.evolve(p, T, adiasim.default_steps(T), psi0)
        np.testing.assert_allclose(psi, np.exp(-1j * T) * psi0, atol=1e-12)


def test_pauli_z_superposition():
    p = doubled("pauli_z")
    psi0 = np.zeros(4, complex)
    psi0[:2] = 1 / np.sqrt(2)
    psi = adiasim.evolve(p, 300, 60000, psi0)
    target = np.exp(-300j) * np.array([1, -1, 0, 0]) / np.sqrt(2)
    assert abs(np.vdot(target, psi)) >= 0.98


@pytest.mark.parametrize("name", ["hadamard", "t_gate", "cnot"])
def test_matches_exact_propagator(name):
    p = doubled(name)
    T = 50.0
    psi = adiasim.evolve(p, T, adiasim.default_steps(T), p.E)
    exact = exact_final_state(p, T, p.E)
    assert np.linalg.norm(psi - exact) <= 1e-4
    finer = adiasim.evolve(p, T, 4 * adiasim.default_steps(T), p.E)
    # midpoint rule: error drops by ~16 when steps grow 4x
    assert np.linalg.norm(finer - exact) <= np.linalg.norm(psi - exact) / 10


def test_norm_preserved():
    p = doubled("qft2")
    psi0 = np.full(8, 1 / np.sqrt(8), complex)
    psi = adiasim.evolve(p, 200, adiasim.default_steps(200), psi0)
    assert abs(np.linalg.norm(psi) - 1) < 1e-8


def test_guards():
    p = doubled("hadamard")
    with pytest.raises(ResolutionTooLow):
        adiasim.evolve(p, 10, 999, p.E[:, 0])
    with pytest.raises(ValidationError):
        adiasim.evolve(p, 10, 2000, 2 * p.E[:, 0])
    with pytest.raises(ValidationError):
        adiasim.evolve(p, 0, 2000, p.E[:, 0])
    assert issubclass(ResolutionTooLow, ValidationError)


def test_backends_agree(monkeypatch):
    p = doubled("cnot")
    ref = adiasim.evolve(p, 20, 4000, p.E)
    monkeypatch.setattr(kernels, "projector_steps", _fallback.projector_steps)
    np.testing.assert_allclose(adiasim.evolve(p, 20, 4000, p.E), ref, atol=1e-12)


def test_recorded_population_is_energy():
    p = doubled("hadamard")
    T, steps = 30.0, 3000
    psi0 = p.E[:, 1]
    _, pops = adiasim.evolve(p, T, steps, psi0, record=True)
    assert pops.shape == (steps,)
    # rebuild the state before step m with dense step exponentials
    m, dtau = 1234, T / steps
    psi = psi0.astype(complex)
    for i in range(m):
        h = loopsynth.hamiltonian_at(p, (i + 0.5) / steps)
        psi = scipy.linalg.expm(-1j * dtau * h) @ psi
    h = loopsynth.hamiltonian_at(p, (m + 0.5) / steps)
    assert abs(np.vdot(psi, h @ psi).real - pops[m]) <= 1e-9


# ---------------------------------------------------------------- realized_gate


def test_identity_gate():
    run = adiasim.realized_gate(doubled("identity"), 200)
    assert run.fidelity >= 0.99 and run.leakage <= 0.02
    assert run.realized_gate.shape == (2, 2)
    assert set(run.row()) == {"T", "steps", "fidelity", "leakage"}
    assert run.fidelity <= run.column_fidelity + 1e-15


def test_cnot_at_400():
    assert adiasim.realized_gate(doubled("cnot"), 400).fidelity >= 0.97


@pytest.mark.parametrize("name", gatelog.GATE_NAMES)
def test_infidelity_envelope(name, sweep_runs):
    infid = [1 - r.fidelity for r in sweep_runs[name]]
    for i in range(len(infid)):
        assert max(infid[i:]) <= infid[i] + 0.01


@pytest.mark.parametrize("name", gatelog.GATE_NAMES)
def test_leakage_bounded_by_inverse_square_time(name, sweep_runs):
    nu = doubled(name).nus.max()
    for r in sweep_runs[name]:
        assert r.leakage <= 4 * nu**2 / r.T**2


@pytest.mark.xfail(strict=True, reason="leakage oscillates in T; see the envelope test above")
def test_leakage_pointwise_decrease(sweep_runs):
    for name in gatelog.GATE_NAMES:
        runs = sweep_runs[name]
        assert runs[-1].leakage < runs[0].leakage, name


@pytest.mark.parametrize("name", ["pauli_z", "hadamard", "cnot"])
def test_step_convergence(name):
    p = doubled(name)
    for T in (50, 400):
        a = adiasim.realized_gate(p, T)
        b = adiasim.realized_gate(p, T, 2 * a.steps)
        assert abs(a.fidelity - b.fidelity) < 1e-4


@pytest.mark.parametrize("name", ["identity", "hadamard", "qft2"])
def test_energy_stays_near_one(name):
    p = doubled(name)
    nu = p.nus.max()
    for T in (50, 200):
        _, pops = adiasim.evolve(p, T, adiasim.default_steps(T), p.E, record=True)
        assert pops.max() <= 1 + 1e-12
        assert pops.min() >= 1 - 4 * nu**2 / T**2 - 1e-6


@pytest.mark.xfail(strict=True, reason="mid-loop excursions exceed the leakage left at the end")
def test_energy_bounded_by_final_leakage():
    p = doubled("identity")
    psi, pops = adiasim.evolve(p, 50, adiasim.default_steps(50), p.E[:, 0], record=True)
    leakage = 1 - np.linalg.norm(psi[:2]) ** 2
    assert pops.min() >= 1 - leakage - 1e-6


@pytest.mark.parametrize("name", ["hadamard", "t_gate", "qft2"])
def test_pure_state_leakage_vs_fidelity(name, rng):
    p = doubled(name)
    k = p.k
    z = rng.normal(size=k) + 1j * rng.normal(size=k)
    psi0 = np.zeros(p.dim, complex)
    psi0[:k] = z / np.linalg.norm(z)
    T = 60.0
    psi = adiasim.evolve(p, T, adiasim.default_steps(T), psi0) * np.exp(1j * T)
    target = np.zeros(p.dim, complex)
    target[:k] = p.gate.U @ psi0[:k]
    fidelity = abs(np.vdot(target, psi))
    leakage = 1 - np.linalg.norm(psi[:k]) ** 2
    assert leakage <= 1 - fidelity**2 + 1e-9


def test_fidelity_sees_relative_phases():
    p = doubled("pauli_z")
    run = adiasim.realized_gate(p, 200, target=np.eye(2))
    # per-column overlaps would call identity a perfect match
    assert run.fidelity < 0.05
    assert run.column_fidelity > 0.99
    assert adiasim.realized_gate(p, 200).fidelity > 0.99


def test_minimal_plan_transport():
    g = gatelog.gate_spec("pauli_z")
    j = int(np.argmin(g.Lambda))
    p = loopsynth.plan_minimal(g, j, 1)
    q = loopsynth.return_block(p)
    np.testing.assert_allclose(q @ g.U, np.eye(2), atol=1e-9)
    run = adiasim.realized_gate(p, 200)
    assert run.transport_fidelity > 0.99
    assert run.fidelity < 0.01


def test_generic_plan_needs_target():
    p = loopsynth.loop_from_generator(doubled("hadamard").X, 2)
    with pytest.raises(ValidationError):
        adiasim.realized_gate(p, 10)
    run = adiasim.realized_gate(p, 50, target=-gatelog.resolve_gate("hadamard"))
    assert run.fidelity > 0.99
    assert matcore.is_unitary(run.realized_gate, 0.1)
