import numpy as np
import pytest

from serialsat.bodies import AttitudeState, ControlInput
from serialsat.dynamics import assemble_kane
from serialsat.errors import SingularBlockError
from serialsat.linearize import (Equilibrium, block_reduced_solve,
                                 find_equilibrium_residual, linearize)

EXPECTED_A = np.zeros((10, 10))
EXPECTED_A[0, 5] = 1.0
EXPECTED_A[1, 7] = -1.0
EXPECTED_A[2, 6] = 1.0
EXPECTED_A[3, 8] = 1.0
EXPECTED_A[4, 9] = 1.0


class TestBlockReducedSolve:
    def test_block_diagonal_decouples(self):
        rng = np.random.default_rng(0)
        m1 = rng.normal(size=(5, 5))
        l1 = m1 @ m1.T + 5 * np.eye(5)
        m3 = rng.normal(size=(3, 3))
        l3 = m3 @ m3.T + 3 * np.eye(3)
        l_mat = np.zeros((8, 8))
        l_mat[:5, :5] = l1
        l_mat[5:, 5:] = l3
        p = rng.normal(size=8)
        x1, x2 = block_reduced_solve(l_mat, p)
        assert np.allclose(x1, np.linalg.solve(l1, p[:5]), atol=1e-13)
        assert np.allclose(x2, np.linalg.solve(l3, p[5:]), atol=1e-13)

    def test_identity(self):
        p = np.arange(1.0, 9.0)
        x1, x2 = block_reduced_solve(np.eye(8), p)
        assert np.array_equal(np.concatenate([x1, x2]), p)

    def test_matches_dense_solve_1000_systems(self):
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(1000):
            m = rng.normal(size=(8, 8))
            l_mat = m @ m.T + 8.0 * np.eye(8)
            p = rng.normal(size=8)
            x1, x2 = block_reduced_solve(l_mat, p)
            dense = np.linalg.solve(l_mat, p)
            rel = (np.max(np.abs(np.concatenate([x1, x2]) - dense))
                   / max(np.max(np.abs(dense)), 1e-300))
            worst = max(worst, rel)
        assert worst < 1e-12

    def test_non_pd_block_raises(self):
        l_mat = np.eye(8)
        l_mat[6, 6] = -1.0
        with pytest.raises(SingularBlockError):
            block_reduced_solve(l_mat, np.ones(8))


class TestEquilibrium:
    def test_commanded_roll_is_equilibrium(self, chain):
        res = find_equilibrium_residual(
            chain, AttitudeState.zero_rates(roll=np.pi / 2))
        assert res < 1e-10

    def test_any_zero_rate_attitude_is_equilibrium(self, chain):
        rng = np.random.default_rng(2)
        for _ in range(20):
            st = AttitudeState.zero_rates(
                roll=rng.uniform(-np.pi, np.pi), pitch=rng.uniform(-1.3, 1.3),
                yaw=rng.uniform(-np.pi, np.pi), gamma=rng.uniform(-2, 2),
                lam=rng.uniform(-2, 2))
            assert find_equilibrium_residual(chain, st) < 1e-10

    def test_nonzero_rate_is_not(self, chain):
        st = AttitudeState(euler=AttitudeState.zero_rates().euler, gamma=0.0,
                           lam=0.0, omega=np.zeros(3), sigma1=0.2, sigma2=0.0)
        assert find_equilibrium_residual(chain, st) > 0.1
        with pytest.raises(ValueError, match="zero rates"):
            Equilibrium.at(chain, st)


class TestLinearize:
    def test_a_matrix_structure(self, linear_model):
        _, model = linear_model
        assert np.max(np.abs(model.a - EXPECTED_A)) < 1e-8

    def test_b_rows_identically_zero(self, linear_model):
        _, model = linear_model
        assert np.max(np.abs(model.b[:5])) == 0.0

    def test_b_bottom_block(self, chain, roll_target, linear_model):
        _, model = linear_model
        b2 = model.b[5:]
        scale = np.max(np.abs(b2))
        assert np.max(np.abs(b2 - b2.T)) < 1e-8 * scale
        assert np.all(np.linalg.eigvalsh(0.5 * (b2 + b2.T)) > 0.0)
        l_mat = assemble_kane(chain, roll_target, ControlInput.zero()).mass_matrix
        linv_block = np.linalg.inv(l_mat)[:5, :5]
        assert np.max(np.abs(b2 - linv_block)) < 1e-8 * scale

    def test_step_halving_stability(self, chain, roll_target, linear_model):
        _, model = linear_model
        eq = Equilibrium.at(chain, roll_target)
        half = linearize(chain, eq, fd_step=model.fd_step / 2)
        scale_a = max(np.max(np.abs(model.a)), 1.0)
        scale_b = np.max(np.abs(model.b))
        assert np.max(np.abs(half.a - model.a)) < 1e-6 * scale_a
        assert np.max(np.abs(half.b - model.b)) < 1e-6 * scale_b

    def test_exact_on_affine_map(self):
        """Truncation error vanishes on an affine plant for any step, so a
        coarse step (which keeps subtraction roundoff tiny) recovers the
        matrix to 1e-12."""
        from serialsat.linearize import _jacobian
        rng = np.random.default_rng(3)
        a_true = rng.normal(size=(7, 7))
        c = rng.normal(size=7)
        jac = _jacobian(lambda x: a_true @ x + c, rng.normal(size=7), 1e-2)
        assert np.max(np.abs(jac - a_true)) < 1e-12
