import numpy as np
import pytest

from qprivacy.errors import InvalidInput, InvalidModel, SingularOutcome
from qprivacy.fisher import (
    ProbabilityModel,
    PureStateModel,
    cfim,
    qfim_pure,
    verify_cfim_qfim_order,
)
from qprivacy.protocol import analytic_cfim, ideal_state, protocol_model

from conftest import EQ5


def binary_model(jacobian=True):
    return ProbabilityModel(
        2, 1,
        probs=lambda phi: np.array([1 + np.cos(phi[0]), 1 - np.cos(phi[0])]) / 2,
        jacobian=(lambda phi: np.array([[-np.sin(phi[0])], [np.sin(phi[0])]]) / 2) if jacobian else None,
    )


def test_binary_model_at_quarter_turn():
    # hand sum: (sin^2/4) / ((1 + cos)/2) + (sin^2/4) / ((1 - cos)/2) at phi = pi/2
    phi = np.pi / 2
    s, c = np.sin(phi), np.cos(phi)
    oracle = (s**2 / 4) / ((1 + c) / 2) + (s**2 / 4) / ((1 - c) / 2)
    assert oracle == pytest.approx(1.0)
    np.testing.assert_allclose(cfim(binary_model(), [phi]), [[oracle]], atol=1e-12)
    np.testing.assert_allclose(cfim(binary_model(False), [phi]), [[oracle]], atol=1e-9)


def test_constant_model_has_zero_information():
    m = ProbabilityModel(3, 2, probs=lambda phi: np.array([0.2, 0.3, 0.5]))
    np.testing.assert_array_equal(cfim(m, [0.1, 0.2]), np.zeros((2, 2)))


def test_protocol_unit_visibility_reproduces_heisenberg_matrix():
    m = protocol_model(1.0)
    for phi in ([0.3, 0.7, 1.1, 0.2], [0.1, 0.2, 0.3, 0.4]):
        np.testing.assert_allclose(cfim(m, phi), EQ5, atol=1e-8)


def test_zero_probability_with_slope_is_singular():
    m = ProbabilityModel(
        2, 1,
        probs=lambda phi: np.array([phi[0], 1 - phi[0]]),
        jacobian=lambda phi: np.array([[1.0], [-1.0]]),
    )
    with pytest.raises(SingularOutcome):
        cfim(m, [0.0])


def test_zero_probability_without_slope_contributes_nothing():
    # binary model at phi = 0: p_- = 0 and dp_- = 0
    np.testing.assert_allclose(cfim(binary_model(), [0.0]), [[0.0]], atol=1e-15)


def test_invalid_models_rejected():
    bad_sum = ProbabilityModel(2, 1, probs=lambda phi: np.array([0.5, 0.6]))
    with pytest.raises(InvalidModel):
        cfim(bad_sum, [0.0])
    nan = ProbabilityModel(2, 1, probs=lambda phi: np.array([np.nan, 0.5]))
    with pytest.raises(InvalidModel):
        cfim(nan, [0.0])
    with pytest.raises(InvalidInput):
        cfim(binary_model(False), [0.3], fd_step=0.0)


def test_analytic_and_fd_agree_on_grid():
    grid = np.linspace(0.15, 1.35, 5)
    for v in (0.5, 1.0):
        m = protocol_model(v)
        worst = 0.0
        for phi in np.array(np.meshgrid(grid, grid, grid, grid)).reshape(4, -1).T:
            a = cfim(m, phi)
            d = cfim(m, phi, use_analytic=False)
            worst = max(worst, np.max(np.abs(a - d)))
            assert np.array_equal(a, a.T)
            assert np.linalg.eigvalsh(a)[0] >= -1e-9
        assert worst <= 1e-5


def brute_force_ring_covariance():
    # enumerate the eight basis terms of the ring state explicitly
    terms = []
    for a, b in [(0, 1), (1, 2), (2, 3), (3, 0)]:
        terms.append(np.zeros(4))
        g = np.zeros(4)
        g[a] = g[b] = 1
        terms.append(g)
    q = np.zeros((4, 4))
    for mu in range(4):
        for nu in range(4):
            e_mn = sum(t[mu] * t[nu] for t in terms) / 8
            e_m = sum(t[mu] for t in terms) / 8
            e_n = sum(t[nu] for t in terms) / 8
            q[mu, nu] = 4 * (e_mn - e_m * e_n)
    return q


def test_ring_state_qfim():
    expected = brute_force_ring_covariance()
    np.testing.assert_allclose(expected[0], [0.75, 0.25, -0.25, 0.25])
    np.testing.assert_allclose(qfim_pure(ideal_state()), expected, atol=1e-14)


def test_single_term_state_has_zero_qfim():
    np.testing.assert_array_equal(qfim_pure(PureStateModel([1.0], [[3.0, -1.0]])), np.zeros((2, 2)))


def test_two_term_state():
    state = PureStateModel(np.array([1, 1]) / np.sqrt(2), [[0.0], [1.0]])
    np.testing.assert_allclose(qfim_pure(state), [[1.0]], atol=1e-14)


def test_unnormalized_state_rejected():
    with pytest.raises(InvalidModel):
        PureStateModel([1.0, 1.0], [[0.0], [1.0]])


def test_qfim_shift_invariance():
    st = ideal_state()
    shifted = PureStateModel(st.amplitudes, st.generators + 2.7)
    np.testing.assert_allclose(qfim_pure(shifted), qfim_pure(st), atol=1e-12)


def test_order_check():
    q = qfim_pure(ideal_state())
    rep = verify_cfim_qfim_order(q, q)
    assert rep.ok and abs(rep.min_eig) < 1e-12
    rep = verify_cfim_qfim_order(EQ5, q)
    assert rep.ok
    # Q - F is circulant with first row (1/4, 0, -1/4, 0): symbol 1/4 - cos(pi k)/4
    symbol = sorted(0.25 - 0.25 * np.cos(np.pi * k) for k in range(4))
    np.testing.assert_allclose(np.linalg.eigvalsh(q - EQ5), symbol, atol=1e-12)
    np.testing.assert_allclose(symbol, [0, 0, 0.5, 0.5])
    assert not verify_cfim_qfim_order(2 * q, q).ok
    with pytest.raises(InvalidInput):
        verify_cfim_qfim_order(np.eye(2), np.eye(3))


def test_protocol_cfim_below_qfim_for_any_visibility():
    rng = np.random.default_rng(4)
    q = qfim_pure(ideal_state())
    for _ in range(100):
        v = rng.uniform(0.01, 1.0)
        phi = rng.uniform(0, 2 * np.pi, size=4)
        assert verify_cfim_qfim_order(analytic_cfim(phi, v), q).ok
