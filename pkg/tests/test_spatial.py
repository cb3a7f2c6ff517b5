import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from serialsat.errors import GimbalLockError, InvalidRotationError
from serialsat.spatial import (EulerAngles321, axis_rotation, euler_rates,
                               inverse_rotation, rot321, rot_y, skew,
                               validate_rotation)

angles = st.floats(-10.0, 10.0, allow_nan=False)
components = st.floats(-1e3, 1e3, allow_nan=False)


class TestSkew:
    def test_zero_vector(self):
        assert np.array_equal(skew([0.0, 0.0, 0.0]), np.zeros((3, 3)))

    def test_layout(self):
        a1, a2, a3 = 1.0, 2.0, 3.0
        expected = np.array([[0, -a3, a2], [a3, 0, -a1], [-a2, a1, 0.0]])
        assert np.array_equal(skew([a1, a2, a3]), expected)

    def test_matches_cross_product(self):
        got = skew([1.0, 2.0, 3.0]) @ np.array([4.0, 5.0, 6.0])
        assert np.allclose(got, [-3.0, 6.0, -3.0], atol=1e-15)

    @given(st.tuples(components, components, components),
           st.tuples(components, components, components))
    def test_cross_identities(self, a, b):
        a, b = np.array(a), np.array(b)
        assert np.allclose(skew(a) @ b, np.cross(a, b), atol=1e-9)
        assert np.allclose(skew(a) @ b, -(skew(b) @ a), atol=1e-9)
        assert np.allclose(skew(a) @ a, 0.0, atol=1e-9)

    @given(st.tuples(components, components, components))
    def test_antisymmetric(self, a):
        s = skew(np.array(a))
        assert np.array_equal(s.T, -s)


class TestRot321:
    def test_identity_at_zero(self):
        assert np.allclose(rot321(EulerAngles321(0, 0, 0)), np.eye(3), atol=1e-15)

    def test_quarter_roll(self):
        got = rot321(EulerAngles321(math.pi / 2, 0, 0))
        expected = np.array([[1, 0, 0], [0, 0, 1], [0, -1, 0.0]])
        assert np.allclose(got, expected, atol=1e-15)

    def test_orthogonality_1000_random_triples(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            e = EulerAngles321(rng.uniform(-np.pi, np.pi),
                               rng.uniform(-1.5, 1.5),
                               rng.uniform(-np.pi, np.pi))
            r = rot321(e)
            assert np.max(np.abs(r @ r.T - np.eye(3))) < 1e-12
            assert abs(np.linalg.det(r) - 1.0) < 1e-12

    def test_matches_factor_product(self):
        e = EulerAngles321(0.3, -0.7, 1.1)
        rx = np.array([[1, 0, 0],
                       [0, math.cos(0.3), math.sin(0.3)],
                       [0, -math.sin(0.3), math.cos(0.3)]])
        ry = np.array([[math.cos(-0.7), 0, -math.sin(-0.7)],
                       [0, 1, 0],
                       [math.sin(-0.7), 0, math.cos(-0.7)]])
        rz = np.array([[math.cos(1.1), math.sin(1.1), 0],
                       [-math.sin(1.1), math.cos(1.1), 0],
                       [0, 0, 1]])
        assert np.allclose(rot321(e), rx @ ry @ rz, atol=1e-15)


class TestRotY:
    def test_identity_at_zero(self):
        assert np.allclose(rot_y(0.0), np.eye(3), atol=1e-15)

    def test_half_turn(self):
        assert np.allclose(rot_y(math.pi),
                           np.diag([-1.0, 1.0, -1.0]), atol=1e-12)

    @given(angles, angles)
    def test_angle_addition(self, g, l):
        assert np.allclose(rot_y(g) @ rot_y(l), rot_y(g + l), atol=1e-12)

    @given(angles)
    def test_matches_axis_rotation_about_y(self, g):
        assert np.allclose(rot_y(g), axis_rotation([0.0, 1.0, 0.0], g), atol=1e-12)


class TestInverseRotation:
    def test_identity(self):
        assert np.array_equal(inverse_rotation(np.eye(3)), np.eye(3))

    def test_y_rotation(self):
        assert np.allclose(inverse_rotation(rot_y(0.4)), rot_y(-0.4), atol=1e-15)

    def test_roundtrip_and_orthogonality(self):
        r = rot321(EulerAngles321(0.2, 0.5, -0.9))
        assert np.allclose(r @ inverse_rotation(r), np.eye(3), atol=1e-14)
        assert np.allclose(inverse_rotation(inverse_rotation(r)), r, atol=1e-15)

    def test_rejects_invalid(self):
        with pytest.raises(InvalidRotationError):
            inverse_rotation(np.eye(3) * 1.001)
        with pytest.raises(InvalidRotationError):
            validate_rotation(-np.eye(3))  # det -1


class TestEulerRates:
    def test_identity_at_zero_attitude(self):
        got = euler_rates(EulerAngles321(0, 0, 0), [0.3, -0.2, 0.7])
        assert np.allclose(got, [0.3, -0.2, 0.7], atol=1e-15)

    def test_quarter_roll_mapping(self):
        # at roll = pi/2, pitch = 0 the map is [[1,0,0],[0,0,-1],[0,1,0]]
        w = np.array([0.11, -0.23, 0.31])
        got = euler_rates(EulerAngles321(math.pi / 2, 0, 0), w)
        expected = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0.0]]) @ w
        assert np.allclose(got, expected, atol=1e-15)

    def test_gimbal_lock_guard(self):
        e = EulerAngles321(0.0, math.pi / 2 - 1e-3, 0.0)
        with pytest.raises(GimbalLockError):
            euler_rates(e, [0.1, 0.1, 0.1], eps=1e-2)

    def test_construction_rejects_locked_pitch(self):
        with pytest.raises(GimbalLockError):
            EulerAngles321(0.0, math.pi / 2, 0.0)

    def test_general_formula(self):
        e = EulerAngles321(0.4, 0.6, -1.0)
        w = np.array([0.05, -0.02, 0.03])
        sph, cph, tth = math.sin(0.4), math.cos(0.4), math.tan(0.6)
        sec = 1.0 / math.cos(0.6)
        expected = [w @ np.array([1.0, sph * tth, cph * tth]),
                    w @ np.array([0.0, cph, -sph]),
                    w @ np.array([0.0, sph * sec, cph * sec])]
        assert np.allclose(euler_rates(e, w), expected, atol=1e-15)
