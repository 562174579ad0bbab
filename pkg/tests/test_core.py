import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhrouter.core import (
    LindbladTerm,
    Liouvillian,
    build_liouvillian,
    check_density_matrix,
    eigenvalues,
    hermitian,
    is_density_matrix,
    kernel_dimension,
    linear_response,
    projector,
    steady_state,
    transition,
    unvec,
    vec,
)
from nhrouter.dynamics import TimeDependentLiouvillian, evolve
from nhrouter.errors import IntegrationError, NonUniqueSteadyState, NoSteadyState, SolverError

from oracles import two_level_coherence

G, E = 0, 1


def decay2(rate=1.0):
    return build_liouvillian(np.zeros((2, 2)), [LindbladTerm(transition(2, G, E), rate)])


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def test_vec_matches_kron_identity():
    rng = np.random.default_rng(1)
    a, x, b = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(vec(a @ x @ b), np.kron(b.T, a) @ vec(x))
    assert np.array_equal(unvec(vec(x)), x)


def test_hermitian_is_exact():
    h = np.array([[1, 2j], [-2j, 3]])
    assert hermitian(h)
    h2 = h.astype(complex)
    h2[0, 1] += 1e-15j
    assert not hermitian(h2)


def test_zero_hamiltonian_no_terms_gives_zero_matrix():
    lv = build_liouvillian(np.zeros((3, 3)))
    assert np.array_equal(lv.matrix, np.zeros((9, 9)))
    assert lv.trace_preserving


def test_build_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_liouvillian(np.zeros((2, 2)), [LindbladTerm(transition(3, 0, 1), 1.0)])
    with pytest.raises(ValueError):
        LindbladTerm(transition(2, 0, 1), -0.1)
    with pytest.raises(ValueError):
        build_liouvillian(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        build_liouvillian(np.zeros((17, 17)))
    with pytest.raises(ValueError):
        Liouvillian(np.zeros((4, 4)), 3)


def test_non_hermitian_flagged_trace_decreasing():
    h = np.diag([-0.5j, 0, 0])
    assert not build_liouvillian(h).trace_preserving
    assert build_liouvillian(h, recycle=True).trace_preserving


def test_recycling_rejects_gain():
    with pytest.raises(ValueError):
        build_liouvillian(np.diag([0.5j, 0]), recycle=True)


def test_decay_steady_state_is_ground():
    rho = steady_state(decay2())
    assert np.allclose(rho, projector(2, G), atol=1e-14)


def test_driven_two_level_weak_probe():
    omega_p = 0.01
    h = np.array([[0, omega_p / 2], [omega_p / 2, 0]], dtype=complex)
    rho = steady_state(build_liouvillian(h, [LindbladTerm(transition(2, G, E), 1.0)]))
    # rho_eg = -(Omega_p/2) * coherence with Im>0 absorption convention
    expected = -(omega_p / 2) * two_level_coherence(0.0)
    # saturation correction is O(Omega_p^2 / Gamma^2) = 2e-4 here
    assert abs(rho[E, G] - expected) < 1e-3 * abs(expected)


def test_lambda_system_dark_state():
    oc, op = 1.0, 0.01
    h = np.array([[0, 0, op / 2], [0, 0, oc / 2], [op / 2, oc / 2, 0]], dtype=complex)
    terms = [LindbladTerm(transition(3, 0, 2), 0.5), LindbladTerm(transition(3, 1, 2), 0.5)]
    rho = steady_state(build_liouvillian(h, terms))
    assert abs(rho[2, 0]) < 1e-8


def test_degenerate_kernel_raises():
    with pytest.raises(NonUniqueSteadyState) as e:
        steady_state(build_liouvillian(np.zeros((2, 2))))
    assert e.value.kernel_dim == 4


def test_no_steady_state_raises():
    lv = build_liouvillian(np.diag([-0.5j, -0.5j]))
    assert kernel_dimension(lv) == 0
    with pytest.raises(NoSteadyState):
        steady_state(lv)


def test_linear_response_requires_stationary_reference():
    l0 = decay2()
    with pytest.raises(SolverError):
        linear_response(l0, np.zeros((4, 4)), projector(2, E))


def test_eigenvalues_sorted_and_diagonal_exact():
    h = np.diag([-0.2j, 0.3, 0.7]).astype(complex)
    w = eigenvalues(h)
    assert list(w) == [-0.2j, 0.3, 0.7]
    w2 = eigenvalues(np.diag([1.0, 1.0 - 1j, 1.0 + 2j, 0.0]))
    assert list(w2) == [0.0, 1.0 - 1j, 1.0, 1.0 + 2j]


def test_density_matrix_checks():
    assert is_density_matrix(np.eye(2) / 2)
    assert not is_density_matrix(np.eye(2))
    assert not is_density_matrix(np.array([[1.2, 0], [0, -0.2]]))
    assert not is_density_matrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    check_density_matrix(np.diag([1 + 5e-11, -5e-11]))


# evolve

def test_evolve_zero_generator_is_identity():
    rho0 = np.array([[0.3, 0.1 - 0.2j], [0.1 + 0.2j, 0.7]])
    out = evolve(rho0, build_liouvillian(np.zeros((2, 2))), np.linspace(0, 5, 6))
    assert np.array_equal(out, np.repeat(rho0[None], 6, axis=0))


def test_evolve_two_level_decay_matches_exponential():
    t = np.linspace(0, 10, 21)
    out = evolve(projector(2, E), decay2(), t)
    assert np.max(np.abs(out[:, E, E].real - np.exp(-t))) < 1e-6
    assert np.max(np.abs(np.trace(out, axis1=1, axis2=2) - 1)) < 1e-8


def test_evolve_rejects_non_increasing_grid():
    with pytest.raises(ValueError):
        evolve(projector(2, G), decay2(), [0, 1, 1])
    with pytest.raises(ValueError):
        evolve(projector(2, G), decay2(), [1, 0])


def test_evolve_step_underflow_raises_with_time():
    def c(t):
        return (1.0 / (1.0 - t),)  # blows up at t = 1

    x = build_liouvillian(np.array([[0, 1], [1, 0]], dtype=complex)).matrix
    gen = TimeDependentLiouvillian(build_liouvillian(np.zeros((2, 2))), [x], c)
    with pytest.raises(IntegrationError) as e:
        evolve(projector(2, G), gen, [0.0, 2.0])
    assert 0.9 < e.value.t <= 1.0


def test_evolve_max_steps():
    with pytest.raises(IntegrationError):
        evolve(projector(2, E), decay2(), [0, 100], max_steps=3)


def test_non_hermitian_trace_strictly_decreases():
    h = np.array([[-0.2j, 0, 0.005], [0, 0, 0.5], [0.005, 0.5, 0]], dtype=complex)
    terms = [LindbladTerm(transition(3, 0, 2), 0.5), LindbladTerm(transition(3, 1, 2), 0.5)]
    t = np.linspace(0, 20, 41)
    out = evolve(projector(3, 0), build_liouvillian(h, terms), t)
    tr = np.trace(out, axis1=1, axis2=2).real
    assert np.all(np.diff(tr) < 0)


def test_evolve_tolerance_convergence():
    rng = np.random.default_rng(7)
    h = random_hermitian(rng, 3)
    terms = [LindbladTerm(transition(3, 0, 2), 0.7), LindbladTerm(transition(3, 1, 2), 0.3)]
    lv = build_liouvillian(h, terms)
    rho0 = projector(3, 2)
    a = evolve(rho0, lv, [0, 5], rtol=1e-8)[-1]
    b = evolve(rho0, lv, [0, 5], rtol=5e-9)[-1]
    assert np.max(np.abs(a - b)) < 10 * 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4))
def test_hermitian_evolution_preserves_trace_and_positivity(seed, d):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, d)
    terms = [LindbladTerm(transition(d, i, j), float(rng.uniform(0, 1)))
             for i in range(d) for j in range(d) if i != j]
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    out = evolve(np.outer(psi, psi.conj()), build_liouvillian(h, terms), np.linspace(0, 3, 7))
    tr = np.trace(out, axis1=1, axis2=2)
    assert np.max(np.abs(tr - 1)) < 1e-8
    assert min(np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0] for r in out) >= -1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_three_level_steady_state_residual(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 3)
    rates = rng.uniform(0.05, 1.0, size=3)
    terms = [LindbladTerm(transition(3, 0, 2), rates[0]), LindbladTerm(transition(3, 1, 2), rates[1]),
             LindbladTerm(transition(3, 0, 1), rates[2])]
    lv = build_liouvillian(h, terms)
    rho = steady_state(lv)
    assert np.linalg.norm(lv.matrix @ vec(rho)) < 1e-10
    assert abs(np.trace(rho) - 1) < 1e-12
