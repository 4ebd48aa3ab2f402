#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
SU(2) 特殊函数测试
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import gammaln

from src.quantum.su2_special_functions import (
    HalfInt,
    _recursion,
    _sum_formula,
    clebsch_gordan,
    clebsch_gordan_array,
    log_factorial,
    spherical_harmonic,
    spherical_harmonic_basis,
    wigner_d_matrix,
    wigner_rotation_matrix,
    wigner_small_d,
    zonal_d_table,
)
from src.quantum.wigner_phase_space import SphereGrid
from src.utils.exceptions import DomainError


def test_log_factorial_values():
    """小参数查表，大参数走 gammaln"""
    assert log_factorial(0) == 0.0
    assert log_factorial(1) == 0.0
    assert log_factorial(10) == pytest.approx(math.log(3628800), rel=1e-15)
    assert log_factorial(10) == pytest.approx(15.104412573075516, rel=1e-14)
    assert log_factorial(2000) == pytest.approx(float(gammaln(2001.0)), rel=1e-14)


@pytest.mark.parametrize("bad", [-1, 2.5, True])
def test_log_factorial_rejects_invalid(bad):
    with pytest.raises(DomainError):
        log_factorial(bad)


def test_halfint_construction():
    assert HalfInt.of(0.5).twice_value == 1
    assert HalfInt.of(Fraction(3, 2)).twice_value == 3
    assert HalfInt.of(2).twice_value == 4
    assert str(HalfInt(3)) == "3/2"
    assert str(HalfInt(-4)) == "-2"
    assert (HalfInt.of(1.5) - 0.5) == HalfInt(2)
    assert -HalfInt(1) < HalfInt(1)
    with pytest.raises(DomainError):
        HalfInt.of(0.3)


def test_clebsch_gordan_examples():
    """平凡耦合、伸展态与两个自旋 1/2 的单重/三重态"""
    assert clebsch_gordan(1.5, 0.5, 0, 0, 1.5, 0.5) == pytest.approx(1.0, abs=1e-14)
    assert clebsch_gordan(2, -1, 0, 0, 2, -1) == pytest.approx(1.0, abs=1e-14)
    assert clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 1) == pytest.approx(1.0, abs=1e-14)
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0) == pytest.approx(1 / math.sqrt(2), abs=1e-14)
    # Condon-Shortley: <j m; j -m | 0 0> = (-1)^{j-m}/√(2j+1)
    assert clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(1 / math.sqrt(3), abs=1e-14)
    assert clebsch_gordan(1, 0, 1, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), abs=1e-14)
    assert clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == pytest.approx(-1 / math.sqrt(2), abs=1e-14)


def test_clebsch_gordan_selection_rules():
    assert clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0
    assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0
    with pytest.raises(DomainError):
        clebsch_gordan(1, 2, 1, 0, 2, 2)
    with pytest.raises(DomainError):
        clebsch_gordan(1, 0.5, 1, 0, 1, 0.5)


@pytest.mark.parametrize("tj1, tj2", [(6, 5), (20, 15)])
def test_clebsch_gordan_orthogonality(tj1, tj2):
    """耦合矩阵 <j1 m1 j2 m2 | J M> 是正交矩阵"""
    tm1, tm2 = np.meshgrid(np.arange(-tj1, tj1 + 1, 2), np.arange(-tj2, tj2 + 1, 2), indexing="ij")
    tm1, tm2 = tm1.ravel(), tm2.ravel()
    columns = []
    for tJ in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
        values = clebsch_gordan_array(tj1, tm1, tj2, tm2, tJ)
        for tM in range(-tJ, tJ + 1, 2):
            columns.append(np.where(tm1 + tm2 == tM, values, 0.0))
    matrix = np.stack(columns, axis=1)
    assert matrix.shape == (tm1.size, tm1.size)
    np.testing.assert_allclose(matrix.T @ matrix, np.eye(tm1.size), atol=1e-10)


def test_wigner_small_d_low_spins():
    beta = 0.83
    assert wigner_small_d(0.5, 0.5, 0.5, beta) == pytest.approx(math.cos(beta / 2), abs=1e-15)
    assert wigner_small_d(0.5, 0.5, -0.5, beta) == pytest.approx(-math.sin(beta / 2), abs=1e-15)
    assert wigner_small_d(1, 1, 1, beta) == pytest.approx((1 + math.cos(beta)) / 2, abs=1e-15)
    assert wigner_small_d(1, 1, 0, beta) == pytest.approx(-math.sin(beta) / math.sqrt(2), abs=1e-15)
    assert wigner_small_d(1, 0, 0, beta) == pytest.approx(math.cos(beta), abs=1e-15)


def test_wigner_d_identity_and_pole():
    np.testing.assert_allclose(wigner_d_matrix(2.5, 0.0), np.eye(6), atol=1e-15)
    # d_{m,m'}(π) = (-1)^{j-m'} δ_{m,-m'}
    expected = np.zeros((5, 5))
    for k in range(5):
        expected[4 - k, k] = (-1) ** (2 - (k - 2))
    np.testing.assert_allclose(wigner_d_matrix(2, np.pi), expected, atol=1e-14)


@pytest.mark.parametrize("j, beta", [(5, 0.7), (3.5, 2.9), (30, 2.3), (45.5, 0.4)])
def test_wigner_d_rows_orthonormal(j, beta):
    d = wigner_d_matrix(j, beta)
    np.testing.assert_allclose(d @ d.T, np.eye(d.shape[0]), atol=1e-10)


@pytest.mark.parametrize("j", [3.5, 20])
def test_wigner_d_negative_angle_is_transpose(j):
    beta = 1.1
    np.testing.assert_allclose(wigner_d_matrix(j, -beta), wigner_d_matrix(j, beta).T, atol=1e-12)


@pytest.mark.parametrize("tj", [8, 20, 24])
def test_sum_formula_matches_recursion(tj):
    """两种算法在交接范围内一致"""
    betas = np.array([0.3, 1.2, 2.5])
    cols = np.arange(tj + 1)
    np.testing.assert_allclose(_sum_formula(tj, betas, cols), _recursion(tj, betas, cols), atol=1e-11)


def test_spherical_harmonic_examples():
    assert spherical_harmonic(0, 0, 1.234, 5.6) == pytest.approx(1 / math.sqrt(4 * math.pi), abs=1e-15)
    for j in range(7):
        assert spherical_harmonic(j, 0, 0.0, 0.4) == pytest.approx(
            math.sqrt((2 * j + 1) / (4 * math.pi)), abs=1e-14)
    theta, phi = 0.9, 0.3
    assert spherical_harmonic(1, 0, theta, phi) == pytest.approx(
        math.sqrt(3 / (4 * math.pi)) * math.cos(theta), abs=1e-15)
    assert spherical_harmonic(1, 1, theta, phi) == pytest.approx(
        -math.sqrt(3 / (8 * math.pi)) * math.sin(theta) * np.exp(1j * phi), abs=1e-15)
    values = spherical_harmonic(2, -1, np.array([0.1, 0.2]), np.array([0.0, 1.0]))
    assert values.shape == (2,)


def test_spherical_harmonic_orthonormal_on_grid():
    """j ≤ 40 的球谐函数在默认网格上精确正交归一"""
    max_degree = 40
    grid = SphereGrid.for_photons(max_degree)
    basis = spherical_harmonic_basis(max_degree, grid.theta_nodes)
    for m in range(-max_degree, max_degree + 1):
        block = basis[abs(m):, m + max_degree, :]
        gram = 2.0 * np.pi * (block * grid.theta_weights[None, :]) @ block.T
        np.testing.assert_allclose(gram, np.eye(block.shape[0]), atol=1e-10)


def test_rotation_matrix_properties(rng):
    assert np.allclose(wigner_rotation_matrix(6, 0.0, 0.0, 0.0), np.eye(7), atol=1e-15)
    alpha, beta, gamma = rng.uniform(0, 2 * np.pi, size=3)
    D = wigner_rotation_matrix(10, alpha, beta, gamma)
    np.testing.assert_allclose(D @ D.conj().T, np.eye(11), atol=1e-12)
    phi = 0.77
    m = np.arange(11) - 5.0
    np.testing.assert_allclose(wigner_rotation_matrix(10, phi, 0.0, 0.0), np.diag(np.exp(-1j * phi * m)), atol=1e-15)


def test_functions_are_deterministic():
    """相同输入逐位相同；缓存表只读"""
    assert np.array_equal(wigner_d_matrix(17.5, 1.3), wigner_d_matrix(17.5, 1.3))
    table = zonal_d_table(6, [0.2, 0.9])
    assert not table.flags.writeable
    with pytest.raises(ValueError):
        table[0, 0, 0] = 1.0
