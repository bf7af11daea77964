import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lar_dyn.errors import DomainError
from lar_dyn.linalg import expm
from lar_dyn.lifted import (
    PhaseState, action_accumulation, cone_crossing_time, hamiltonian, hamiltonian_defect,
    lifted_flow, lifted_generator, neutral_index, offshell_sigma_rate, product_structure,
    symplectic_defect, symplectic_form, witt_shear_split,
)
from lar_dyn.onshell import onshell_flow


def rand_V(seed, n=4, scale=1.0):
    return np.random.default_rng(seed).uniform(-1, 1, (n, n)) * scale


def rand_state(seed, n=4):
    rng = np.random.default_rng(seed + 1000)
    return PhaseState(rng.standard_normal(n), rng.standard_normal(n))


E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def test_generator_blocks():
    A = lifted_generator(np.zeros((2, 2)))
    assert np.array_equal(A, [[0, 0, 1, 0], [0, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0]])
    S = np.array([[1.0, 2.0], [2.0, -1.0]])
    assert np.array_equal(lifted_generator(S)[2:, 2:], -S)


def test_generator_is_hamiltonian():
    for seed in range(20):
        assert hamiltonian_defect(lifted_generator(rand_V(seed, 5))) <= 1e-14


def test_phase_state_validation():
    with pytest.raises(DomainError):
        PhaseState(np.ones(2), np.ones(3))
    with pytest.raises(DomainError):
        PhaseState(np.array([np.nan, 1.0]), np.ones(2))
    z = rand_state(0)
    assert np.array_equal(PhaseState.from_stacked(z.stacked()).y, z.y)


def test_double_integrator():
    t = np.linspace(0, 2, 9)
    tr = lifted_flow(np.zeros((2, 2)), PhaseState(E1, E2), t)
    assert np.allclose(tr.rho_tilde, np.outer(np.ones_like(t), E1) + np.outer(t, E2), atol=1e-15)
    assert np.allclose(tr.y, np.tile(E2, (9, 1)), atol=0)


def test_zero_residual_leaf_matches_onshell():
    for seed in range(10):
        V = rand_V(seed)
        r0 = rand_state(seed).rho_tilde
        t = np.linspace(0, 3, 13)
        tr = lifted_flow(V, PhaseState(r0, np.zeros(4)), t)
        assert np.max(np.linalg.norm(tr.y, axis=1)) <= 1e-13
        ref = onshell_flow(V, r0, t).states
        assert np.max(np.abs(tr.rho_tilde - ref)) <= 1e-11 * max(1, np.max(np.abs(ref)))


def test_flow_matches_ode():
    for seed in range(5):
        V = rand_V(seed)
        z0 = rand_state(seed)
        A = lifted_generator(V)
        t = np.linspace(0, 2, 21)
        sol = solve_ivp(lambda _, x: A @ x, (0, 2), z0.stacked(), t_eval=t, method="DOP853",
                        rtol=1e-13, atol=1e-14)
        tr = lifted_flow(V, z0, t)
        got = np.hstack([tr.rho_tilde, tr.y])
        scale = np.abs(sol.y.T).max(axis=1, keepdims=True)
        assert np.max(np.abs(got - sol.y.T) / scale) < 1e-9


def test_y_block_consistency():
    for seed in range(10):
        V = rand_V(seed)
        z0 = rand_state(seed)
        tr = lifted_flow(V, z0, [0.0, 0.7, 1.9])
        for t, y in zip(tr.times, tr.y):
            assert np.max(np.abs(y - expm(-V.T, t) @ z0.y)) <= 1e-11 * max(1, np.max(np.abs(y)))


def test_symplectic_defect():
    assert symplectic_defect(rand_V(0), 0.0) == 0.0
    worst = max(symplectic_defect(rand_V(s, 2 + s % 5), t) for s in range(50) for t in (0.5, 1, 2))
    assert worst <= 1e-10
    F = rand_V(3, 4)
    assert symplectic_defect(F - F.T, 10.0) <= 1e-9


def test_witt_shear_split():
    for seed in range(10):
        V = rand_V(seed)
        A_pu, A_sh = witt_shear_split(V)
        K = product_structure(4)
        assert np.array_equal(A_sh @ A_sh, np.zeros((8, 8)))
        assert np.array_equal(A_pu @ K, K @ A_pu)
        assert np.array_equal(A_pu + A_sh, lifted_generator(V))


def test_symplectic_form_and_product_structure():
    J = symplectic_form(3)
    assert np.array_equal(J @ J, -np.eye(6))
    K = product_structure(3)
    assert np.array_equal(K @ K, np.eye(6))


def test_lambda_closed_form():
    t = np.linspace(0, 2, 401)
    tr = lifted_flow(np.zeros((2, 2)), PhaseState(E1, E2), t)
    lam, defect = neutral_index(tr)
    assert np.allclose(lam, 2 * t, atol=1e-15)
    assert defect <= 1e-13
    val, _ = action_accumulation(tr, 0.0, 1.0)
    assert val == pytest.approx(1.0, abs=1e-13)


def test_lambda_zero_on_leaf():
    tr = lifted_flow(rand_V(1), PhaseState(np.ones(4), np.zeros(4)), np.linspace(0, 2, 11))
    assert np.array_equal(neutral_index(tr)[0], np.zeros(11))
    assert action_accumulation(tr)[0] == 0.0


def test_balance_law_random():
    # the absolute 1e-7 target is checked in the acceptance suite; here the
    # defect must be quadrature error, i.e. small relative to Lambda and
    # shrinking at fourth order as the grid is refined
    for seed in range(10):
        V, z0 = rand_V(seed), rand_state(seed)
        tr = lifted_flow(V, z0, np.linspace(0, 2, 400))
        lam, defect = neutral_index(tr)
        assert defect <= 1e-8 * max(1.0, np.max(np.abs(lam)))
        assert np.min(np.diff(lam)) >= -1e-10
        coarse = neutral_index(lifted_flow(V, z0, np.linspace(0, 2, 201)))[1]
        fine = neutral_index(lifted_flow(V, z0, np.linspace(0, 2, 401)))[1]
        if coarse > 1e-12:
            assert coarse / fine > 10.0


def test_cumulative_rule_exact_on_cubics():
    from lar_dyn.lifted import _cumulative
    for m in (4, 7, 10):
        t = np.linspace(0.5, 2.0, m)
        f = 1 - 2 * t + 3 * t ** 2 - t ** 3
        F = lambda s: s - s ** 2 + s ** 3 - s ** 4 / 4
        assert np.allclose(_cumulative(t, f), F(t) - F(t[0]), atol=1e-14)


def test_accumulation_quarter_identity():
    t = np.linspace(0, 2, 401)
    for seed in range(10):
        tr = lifted_flow(rand_V(seed), rand_state(seed), t)
        lam = tr.Lambda
        val, err = action_accumulation(tr, 0.5, 1.5)
        i0, i1 = 100, 300
        # int L = A/2 = (Lambda(t) - Lambda(t0))/4
        assert abs(0.5 * val - 0.25 * (lam[i1] - lam[i0])) <= 1e-7
        assert err < 1e-6


def test_accumulation_requires_ordered_ends():
    tr = lifted_flow(rand_V(0), rand_state(0), np.linspace(0, 1, 11))
    with pytest.raises(DomainError):
        action_accumulation(tr, 0.8, 0.2)
    assert action_accumulation(tr, 0.5, 0.5) == (0.0, 0.0)


def test_neutral_index_needs_three_points():
    tr = lifted_flow(rand_V(0), rand_state(0), [0.0, 1.0])
    with pytest.raises(DomainError):
        neutral_index(tr)


def test_sign_forward_invariant():
    t = np.linspace(0, 3, 101)
    for seed in range(20):
        lam = lifted_flow(rand_V(seed), rand_state(seed), t).Lambda
        pos = np.nonzero(lam > 0)[0]
        if pos.size:
            assert np.all(lam[pos[0]:] > 0)


def test_stationary_lambda_iff_zero_residual():
    t = np.linspace(0, 1, 51)
    tr = lifted_flow(rand_V(2), PhaseState(np.ones(4), np.zeros(4)), t)
    assert np.max(np.abs(tr.Lambda - tr.Lambda[0])) <= 1e-10
    tr = lifted_flow(rand_V(2), rand_state(2), t)
    assert np.max(np.abs(np.diff(tr.Lambda))) > 1e-12


def test_hamiltonian_conserved():
    t = np.linspace(0, 3, 31)
    for seed in range(20):
        V = rand_V(seed)
        tr = lifted_flow(V, rand_state(seed), t)
        H = np.array([hamiltonian(tr.state(k), V) for k in range(t.size)])
        assert np.max(np.abs(H - H[0])) <= 1e-9 * max(1.0, np.max(np.abs(H)))


def test_cone_crossing_witnesses():
    t_star = cone_crossing_time(np.zeros((2, 2)), PhaseState(E1, -E1), 10.0)
    assert abs(t_star - 1.0) <= 1e-12
    assert cone_crossing_time(np.eye(2), PhaseState(E1, -E1), 100.0) is None
    assert cone_crossing_time(np.zeros((2, 2)), PhaseState(E1, E1), 10.0) is None


def test_cone_crossing_edge_cases():
    assert cone_crossing_time(np.eye(2), PhaseState(E1, E2), 5.0) == 0.0
    assert cone_crossing_time(np.eye(2), PhaseState(E1, np.zeros(2)), 5.0) is None
    assert cone_crossing_time(np.zeros((2, 2)), PhaseState(E1, -E1), 0.5) is None
    with pytest.raises(DomainError):
        cone_crossing_time(np.eye(2), PhaseState(E1, E2), 0.0)


def test_cone_crossing_matches_accumulation():
    for seed in range(10):
        V = rand_V(seed)
        z = rand_state(seed)
        if z.rho_tilde @ z.y >= 0:
            z = PhaseState(z.rho_tilde, -z.y)
        ts = cone_crossing_time(V, z, 20.0)
        if ts is None:
            continue
        tr = lifted_flow(V, z, np.linspace(0, ts, 401))
        acc, _ = action_accumulation(tr)
        assert acc == pytest.approx(-tr.Lambda[0] / 2, abs=1e-8 * max(1.0, abs(tr.Lambda[0])))


def test_offshell_sigma_rate():
    V = rand_V(4)
    S = 0.5 * (V + V.T)
    r = np.array([1.0, -0.5, 2.0, 0.3])
    rho = r / np.linalg.norm(r)
    assert offshell_sigma_rate(PhaseState(r, np.zeros(4)), V) == pytest.approx(rho @ S @ rho, abs=1e-15)
    y = np.array([0.2, 0.1, -0.4, 1.0])
    assert offshell_sigma_rate(PhaseState(r, y), np.zeros((4, 4))) == pytest.approx(r @ y / (r @ r), abs=1e-15)
    with pytest.raises(DomainError):
        offshell_sigma_rate(PhaseState(np.zeros(4), y), V)


def test_offshell_sigma_rate_finite_difference():
    h = 1e-4
    for seed in range(10):
        V = rand_V(seed)
        z0 = rand_state(seed)
        tr = lifted_flow(V, z0, [1.0 - h, 1.0, 1.0 + h])
        fd = (tr.sigma[2] - tr.sigma[0]) / (2 * h)
        assert abs(fd - offshell_sigma_rate(tr.state(1), V)) < 1e-6
