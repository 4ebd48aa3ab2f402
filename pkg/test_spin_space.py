#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
固定光子数态测试
"""

import json
import math

import numpy as np
import pytest

from conftest import random_density, random_ket
from src.quantum.spin_space import (
    SpinDensity,
    SpinKet,
    basis_ket,
    maximally_mixed,
    monomial_lower,
    noon_state,
    number_operator_a,
    phase_shift,
    spin_coherent_state,
    state_from_dict,
    su2_rotate,
)
from src.quantum.su2_special_functions import wigner_rotation_matrix
from src.utils.exceptions import DomainError


def test_number_operator_is_arm_a_count():
    np.testing.assert_array_equal(number_operator_a(4), [0, 1, 2, 3, 4])
    assert number_operator_a(0).shape == (1,)
    with pytest.raises(DomainError):
        number_operator_a(-1)


def test_phase_shift_examples():
    """N00N 态相移后只有 |N,0> 分量获得 e^{-iNφ}"""
    N, varphi = 5, 0.37
    shifted = phase_shift(noon_state(N), varphi)
    expected = np.zeros(N + 1, dtype=complex)
    expected[0] = 1 / math.sqrt(2)
    expected[N] = np.exp(-1j * N * varphi) / math.sqrt(2)
    np.testing.assert_allclose(shifted.amplitudes, expected, atol=1e-15)

    ket = basis_ket(4, -2)
    np.testing.assert_allclose(phase_shift(ket, 1.3).amplitudes, ket.amplitudes, atol=1e-15)


def test_phase_shift_group_action(rng):
    ket = random_ket(7, rng)
    combined = phase_shift(phase_shift(ket, 0.4), 1.1)
    np.testing.assert_allclose(combined.amplitudes, phase_shift(ket, 1.5).amplitudes, atol=1e-14)

    rho = random_density(7, rng)
    shifted = phase_shift(rho, -0.8)
    back = phase_shift(shifted, 0.8)
    np.testing.assert_allclose(back.matrix, rho.matrix, atol=1e-14)
    # 密度矩阵与纯态的相移一致
    np.testing.assert_allclose(
        phase_shift(ket.to_density(), 0.9).matrix,
        phase_shift(ket, 0.9).to_density().matrix,
        atol=1e-14,
    )


def test_monomial_lower_examples():
    """a 与 b 在 N = 2 上的矩阵"""
    a = monomial_lower(2, 1, 0)
    np.testing.assert_allclose(a, [[0, 1, 0], [0, 0, math.sqrt(2)]], atol=1e-15)
    b = monomial_lower(2, 0, 1)
    np.testing.assert_allclose(b, [[math.sqrt(2), 0, 0], [0, 1, 0]], atol=1e-15)
    np.testing.assert_allclose(monomial_lower(3, 0, 0), np.eye(4), atol=1e-15)


def test_monomial_lower_composes():
    """a^l b^k 等于逐个降算符的乘积"""
    N = 6
    product = monomial_lower(N - 1, 1, 0) @ monomial_lower(N, 0, 1)
    np.testing.assert_allclose(product, monomial_lower(N, 1, 1), atol=1e-12)
    product = monomial_lower(N - 2, 0, 1) @ monomial_lower(N - 1, 1, 0) @ monomial_lower(N, 1, 0)
    np.testing.assert_allclose(product, monomial_lower(N, 2, 1), atol=1e-12)


@pytest.mark.parametrize("l, k", [(-1, 0), (0, -2), (3, 2)])
def test_monomial_lower_rejects_invalid(l, k):
    with pytest.raises(DomainError):
        monomial_lower(4, l, k)


def test_noon_and_basis_states():
    noon = noon_state(3)
    assert noon.amplitudes[0] == pytest.approx(1 / math.sqrt(2))
    assert noon.amplitudes[3] == pytest.approx(1 / math.sqrt(2))
    assert noon.spin == 1.5
    top = basis_ket(4, 2)
    assert top.amplitudes[4] == 1.0
    with pytest.raises(DomainError):
        basis_ket(2, 0.5)
    with pytest.raises(DomainError):
        noon_state(0)


def test_su2_rotate_ket_and_density_agree(rng):
    ket = random_ket(6, rng)
    angles = (0.3, 1.9, -0.7)
    rotated = su2_rotate(ket, *angles)
    np.testing.assert_allclose(
        su2_rotate(ket.to_density(), *angles).matrix,
        rotated.to_density().matrix,
        atol=1e-12,
    )
    D = wigner_rotation_matrix(6, *angles)
    np.testing.assert_allclose(rotated.amplitudes, D @ ket.amplitudes, atol=1e-14)
    # 绕 z 轴的旋转与相移只差一个整体相位
    z_rotated = su2_rotate(ket, 0.6, 0.0, 0.0)
    shifted = phase_shift(ket, 0.6)
    overlap = abs(np.vdot(z_rotated.amplitudes, shifted.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-14)


def test_spin_coherent_state():
    """北极为 |J, J>；<J_z> = J cosθ"""
    N = 8
    np.testing.assert_allclose(spin_coherent_state(N, 0.0, 0.0).amplitudes, basis_ket(N, 4).amplitudes, atol=1e-14)
    theta = 1.1
    state = spin_coherent_state(N, theta, 0.5)
    m = np.arange(N + 1) - N / 2
    assert float(np.dot(np.abs(state.amplitudes) ** 2, m)) == pytest.approx(N / 2 * math.cos(theta), abs=1e-12)


def test_constructors_reject_invalid_input():
    with pytest.raises(DomainError):
        SpinKet(2, [1.0, 0.0])
    with pytest.raises(DomainError):
        SpinKet(1, [1.0, 1.0])
    with pytest.raises(DomainError):
        SpinKet(True, [1.0, 0.0])
    with pytest.raises(DomainError):
        SpinKet(1, [np.nan, 1.0])
    with pytest.raises(DomainError):
        SpinKet.normalized(2, [0.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        SpinDensity(1, [[0.5, 0.3], [0.0, 0.5]])
    with pytest.raises(DomainError):
        SpinDensity(1, [[0.7, 0.0], [0.0, 0.7]])
    with pytest.raises(DomainError):
        SpinDensity(1, [[1.5, 0.0], [0.0, -0.5]])


def test_states_are_immutable(rng):
    ket = random_ket(3, rng)
    with pytest.raises(ValueError):
        ket.amplitudes[0] = 0.0
    rho = maximally_mixed(3)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0
    assert rho.purity() == pytest.approx(0.25)


def test_state_serialization(rng):
    """to_dict 经 JSON 往返后数值不变"""
    ket = random_ket(5, rng)
    restored = state_from_dict(json.loads(json.dumps(ket.to_dict())))
    assert isinstance(restored, SpinKet)
    np.testing.assert_array_equal(restored.amplitudes, ket.amplitudes)

    rho = random_density(4, rng)
    restored = state_from_dict(json.loads(json.dumps(rho.to_dict())))
    assert isinstance(restored, SpinDensity)
    np.testing.assert_allclose(restored.matrix, rho.matrix, atol=1e-15)

    with pytest.raises(DomainError):
        state_from_dict({"kind": "operator", "n_photons": 1})
