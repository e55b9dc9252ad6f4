import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import circle, crandn, tangent_fd_check
from riscr.manifold import (
    DegenerateRetraction,
    RcgProblem,
    RcgSettings,
    inner,
    polak_ribiere,
    rcg_maximize,
    retract,
    riemannian_gradient,
    transport,
)

seeds = st.integers(0, 2**32 - 1)
lengths = st.integers(1, 12)


def quadratic_problem(a):
    return RcgProblem(lambda z: float(np.real(np.vdot(z, a @ z))), lambda z: 2 * a @ z)


# [TRIVIAL] projection of a normal vector
def test_radial_gradient_vanishes():
    z = circle(np.random.default_rng(0), 5)
    np.testing.assert_allclose(riemannian_gradient(z, z), 0, atol=1e-15)
    np.testing.assert_allclose(riemannian_gradient(z, 3.7 * z), 0, atol=1e-14)


# [TRIVIAL] projection is idempotent
def test_tangent_gradient_unchanged():
    np.testing.assert_allclose(riemannian_gradient(np.array([1 + 0j]), np.array([1j])), [1j])


# [TRIVIAL] input validation
def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        riemannian_gradient(np.ones(3, complex), np.ones(2, complex))
    with pytest.raises(ValueError):
        retract(np.ones(3, complex), np.ones(4, complex))


# [TRIVIAL] hand-computed cases
def test_transport_examples(rng):
    z = circle(rng, 6)
    eta = riemannian_gradient(z, crandn(rng, 6))
    np.testing.assert_allclose(transport(z, eta), eta, atol=1e-14)
    np.testing.assert_allclose(transport(z, z), 0, atol=1e-15)


# [TRIVIAL] hand-computed cases
def test_retract_examples():
    z = np.array([1 + 0j])
    np.testing.assert_allclose(retract(z, np.zeros(1)), z)
    np.testing.assert_allclose(retract(z, np.array([1j])), [np.exp(1j * np.pi / 4)], atol=1e-15)
    with pytest.raises(DegenerateRetraction):
        retract(z, np.array([-1 + 0j]))


# [TRIVIAL] hand-computed cases
def test_polak_ribiere_examples():
    g = np.array([1 + 0j, 0])
    assert polak_ribiere(g, g, g) == 0.0
    # orthogonal gradients of equal norm -> 1
    assert polak_ribiere(np.array([0, 1 + 0j]), g, np.zeros(2, complex)) == pytest.approx(1.0)
    # negative raw value clamps to 0
    assert polak_ribiere(g, g, 3 * g) == 0.0
    assert polak_ribiere(g, np.zeros(2, complex), g) == 0.0


# [DERIVED] Re(conj(z) v) = 0
@given(seeds, lengths)
def test_projection_is_tangent(seed, n):
    rng = np.random.default_rng(seed)
    z = circle(rng, n)
    v = riemannian_gradient(z, 10 * crandn(rng, n))
    assert np.max(np.abs(np.real(v * z.conj()))) < 1e-10
    z2 = circle(rng, n)
    w = transport(z2, v)
    assert np.max(np.abs(np.real(w * z2.conj()))) < 1e-10


# [TRIVIAL] modulus
@given(seeds, lengths, st.floats(1e-6, 1e3))
def test_retraction_unit_modulus(seed, n, scale):
    rng = np.random.default_rng(seed)
    z = circle(rng, n)
    out = retract(z, scale * riemannian_gradient(z, crandn(rng, n)))
    assert np.max(np.abs(np.abs(out) - 1)) < 1e-12


# [DERIVED] closed-form optimum phase
def test_scalar_linear_objective_converges_to_c():
    c = np.exp(0.7j)
    prob = RcgProblem(lambda z: float(np.real(np.conj(c) * z[0])), lambda z: np.array([c]))
    res = rcg_maximize(prob, np.array([np.exp(-2.0j)]), RcgSettings(tolerance=1e-10))
    assert res.converged
    assert res.z[0] == pytest.approx(c, abs=1e-8)
    assert res.trace[-1] == pytest.approx(1.0, abs=1e-12)


# [TRIVIAL] zero gradient
def test_stationary_start_returns_immediately():
    c = np.exp(0.3j)
    prob = RcgProblem(lambda z: float(np.real(np.conj(c) * z[0])), lambda z: np.array([c]))
    res = rcg_maximize(prob, np.array([c]))
    assert res.iterations == 0 and res.converged
    assert res.z[0] == c


# [DERIVED] random-search baseline
def test_quadratic_beats_random_sampling(rng):
    a = crandn(rng, 4, 4)
    a = a @ a.conj().T
    prob = quadratic_problem(a)
    res = rcg_maximize(prob, circle(rng, 4), RcgSettings(tolerance=1e-8))
    samples = circle(rng, 10_000, 4)
    best = np.max(np.real(np.einsum("ki,ij,kj->k", samples.conj(), a, samples)))
    assert res.trace[-1] >= best - 1e-9


# [TRIVIAL] Armijo ascent
@given(seeds, st.integers(2, 8))
def test_trace_monotone(seed, n):
    rng = np.random.default_rng(seed)
    a = crandn(rng, n, n)
    a = a + a.conj().T
    res = rcg_maximize(quadratic_problem(a), circle(rng, n))
    assert all(b >= a_ for a_, b in zip(res.trace, res.trace[1:]))
    assert np.max(np.abs(np.abs(res.z) - 1)) < 1e-12


# [TRIVIAL] status flag
def test_iteration_cap_reported_not_raised(rng):
    a = crandn(rng, 10, 10)
    a = a @ a.conj().T
    res = rcg_maximize(quadratic_problem(a), circle(rng, 10),
                       RcgSettings(max_iterations=1, tolerance=1e-14))
    assert res.iterations <= 1 and not res.converged


# [DERIVED] central finite differences
@given(seeds)
def test_quadratic_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    a = crandn(rng, 5, 5)
    a = a + a.conj().T
    prob = quadratic_problem(a)
    assert tangent_fd_check(prob.objective, prob.euclidean_gradient, circle(rng, 5), rng) < 1e-5


# [TRIVIAL] input validation
def test_settings_validation():
    with pytest.raises(ValueError):
        RcgSettings(armijo_contraction=1.0)
    with pytest.raises(ValueError):
        RcgSettings(tolerance=0.0)
    assert inner(np.array([1j]), np.array([1j])) == 1.0
