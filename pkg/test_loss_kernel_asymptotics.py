#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
损耗卷积核测试
"""

import math

import numpy as np
import pytest

from conftest import random_density
from src.quantum.loss_channel import conditional_loss_map
from src.quantum.loss_kernel_asymptotics import (
    KernelProfile,
    asymptotic_kernel_profile,
    convolve_loss,
    exact_kernel_profile,
    exact_kernel_value,
    fit_gaussian_width,
    full_width_half_maximum,
    gaussian_kernel_width,
    kernel_integral,
    kernel_legendre_coefficients,
    order0_kernel,
    order0_kernel_profile,
)
from src.quantum.metrology import asymptotic_precision
from src.quantum.spin_space import noon_state, su2_rotate
from src.quantum.wigner_phase_space import SphereGrid, harmonic_coefficients, wigner_function
from src.utils.exceptions import DomainError


@pytest.mark.parametrize("N, L", [(10, 4), (10, 0), (7, 7), (25, 11)])
def test_kernel_normalization(N, L):
    """∫ L^N_L dΩ = (N+1)/(N-L+1)"""
    assert kernel_integral(N, L) == pytest.approx((N + 1) / (N - L + 1), rel=1e-10)


def test_kernel_normalization_example():
    assert kernel_integral(10, 4) == pytest.approx(11 / 7, abs=1e-12)


def test_kernel_depends_only_on_polar_angle():
    N, L, theta = 9, 3, 0.7
    profile_value = exact_kernel_profile(N, L, [theta]).values[0]
    for phi in (0.0, 1.1, 2.9, 5.5):
        assert exact_kernel_value(N, L, theta, phi) == pytest.approx(profile_value, abs=1e-12)


def test_zero_loss_kernel_is_reproducing():
    """L = 0 时 k_j ≡ 1"""
    np.testing.assert_allclose(kernel_legendre_coefficients(12, 0), np.ones(13), atol=1e-11)


@pytest.mark.parametrize("N, L", [(8, 3), (12, 5)])
def test_kernel_is_band_limited(N, L):
    multipliers = kernel_legendre_coefficients(N, L, max_degree=N)
    assert np.max(np.abs(multipliers[N - L + 1:])) < 1e-11
    assert np.all(np.abs(multipliers[:N - L + 1]) > 1e-6)
    # k_0 是核的积分
    assert multipliers[0] == pytest.approx(kernel_integral(N, L), rel=1e-12)


def test_order0_kernel_at_k_zero():
    """K = 0 时积分有闭式 sin((N+1)θ)/sinθ"""
    N = 11
    thetas = np.linspace(0.05, 3.0, 40)
    np.testing.assert_allclose(order0_kernel(N, 0, thetas), np.sin((N + 1) * thetas) / np.sin(thetas), atol=1e-11)


@pytest.mark.parametrize("N, K", [(10, 0), (10, 3), (40, 20), (101, 7)])
def test_order0_kernel_at_pole(N, K):
    assert order0_kernel(N, K, 0.0) == pytest.approx((N + 1) / (2 * K + 1), rel=1e-12)


def test_order0_kernel_gaussian_limit():
    """大 K 时 0 阶核接近峰值 (N+1)/(2K)、宽度 √(2K/(N(N-2K))) 的高斯"""
    N, K = 60, 12
    peak = order0_kernel(N, K, 0.0)
    assert abs(peak - (N + 1) / (2 * K)) / ((N + 1) / (2 * K)) < 0.05
    profile = order0_kernel_profile(N, K, np.linspace(0.0, 0.6, 601))
    expected = math.sqrt(2 * K / (N * (N - 2 * K)))
    assert fit_gaussian_width(profile) == pytest.approx(expected, rel=0.10)


@pytest.mark.parametrize("K, tolerance", [(12, 0.12), (13, 0.135)])
def test_order0_kernel_gaussian_at_fifty_photons(K, tolerance):
    """N = 50 时 2K = 24、26 两个括号值逐点对比高斯；θ ≤ 2σ 内实测最大相对偏差约 10% 与 12%"""
    N = 50
    sigma = math.sqrt(2 * K / (N * (N - 2 * K)))
    thetas = np.linspace(0.0, 2 * sigma, 201)
    gaussian = (N + 1) / (2 * K) * np.exp(-N * (N - 2 * K) * np.sin(thetas) ** 2 / (4 * K))
    relative = np.abs(order0_kernel(N, K, thetas) - gaussian) / gaussian
    # 峰值偏差恰为 1/(2K+1)
    assert relative[0] == pytest.approx(1 / (2 * K + 1), rel=1e-9)
    assert relative.max() < tolerance


def test_order0_kernel_rejects_invalid():
    with pytest.raises(DomainError):
        order0_kernel(5, 3, 0.1)
    with pytest.raises(DomainError):
        order0_kernel(5, -1, 0.1)
    with pytest.raises(DomainError):
        kernel_integral(6, 3, "order0")
    with pytest.raises(DomainError):
        kernel_integral(6, 2, "gaussian")


def test_width_law_matches_asymptotic_precision():
    """L = (1-η)N 时核宽度等于渐近相位精度"""
    assert gaussian_kernel_width(100, 20) == pytest.approx(0.05, rel=1e-14)
    assert gaussian_kernel_width(100, 20) == pytest.approx(asymptotic_precision(100, 0.8), rel=1e-14)
    with pytest.raises(DomainError):
        gaussian_kernel_width(6, 6)
    with pytest.raises(DomainError):
        gaussian_kernel_width(0, 0)


def test_asymptotic_kernel_rescaling():
    N, L = 40, 15
    profile = asymptotic_kernel_profile(N, L, np.linspace(0.0, math.pi, 11))
    assert profile.kind == "asymptotic"
    assert math.isfinite(profile.rescale_factor) and profile.rescale_factor > 0.0
    assert kernel_integral(N, L, "asymptotic") == pytest.approx((N + 1) / (N - L + 1), rel=1e-8)
    frame = profile.to_frame()
    assert set(frame["rescale_factor"]) == {profile.rescale_factor}
    assert profile.metadata()["rescale_factor"] == profile.rescale_factor
    assert exact_kernel_profile(N, L, [0.0]).rescale_factor == 1.0


def test_profile_helpers():
    thetas = np.linspace(0.0, math.pi, 301)
    profile = exact_kernel_profile(12, 4, thetas)
    normalized = profile.peak_normalized()
    assert normalized.values.max() == pytest.approx(1.0)
    assert profile.fwhm() == full_width_half_maximum(profile)
    assert 0.0 < profile.fwhm() < math.pi
    assert profile.n_output == 8
    frame = profile.to_frame()
    assert list(frame.columns) == ["theta", "value", "kind", "N", "L", "rescale_factor"]
    with pytest.raises(DomainError):
        KernelProfile(12, 4, thetas, profile.values, kind="gaussian")
    with pytest.raises(DomainError):
        exact_kernel_profile(4, 5, thetas)


def test_zero_loss_convolution_reproduces_field(rng):
    N = 7
    field = wigner_function(random_density(N, rng), SphereGrid.for_photons(N))
    convolved = convolve_loss(field, 0)
    np.testing.assert_allclose(convolved.values, field.values, atol=1e-10)


@pytest.mark.parametrize("L", [1, 2, 3])
def test_convolution_matches_operator_path(L, rng):
    """相空间卷积与先作用损耗映射再求 Wigner 函数一致"""
    N = 10
    rho = random_density(N, rng)
    field = wigner_function(rho, SphereGrid.for_photons(N))
    convolved = convolve_loss(field, L)
    direct = wigner_function(conditional_loss_map(rho, L), convolved.grid)
    assert convolved.n_photons == N - L
    np.testing.assert_allclose(convolved.values, direct.values, atol=1e-8)


def test_noon_loses_fringe_after_one_photon():
    """N00N 态丢一个光子后不再含 |m| = N-1 的方位角模式"""
    N = 8
    field = wigner_function(noon_state(N), SphereGrid.for_photons(N))
    convolved = convolve_loss(field, 1)
    coefficients = harmonic_coefficients(convolved, N - 1)
    n_out = N - 1
    assert np.max(np.abs(coefficients[:, 0])) < 1e-10
    assert np.max(np.abs(coefficients[:, 2 * n_out])) < 1e-10
    # 输入场确实含 |m| = N 的模式
    input_coefficients = harmonic_coefficients(field, N)
    assert np.abs(input_coefficients[N, 0]) > 1e-3


def test_convolution_is_rotation_equivariant(rng):
    N, L = 6, 2
    rho = random_density(N, rng)
    angles = (1.2, 0.5, 2.0)
    grid = SphereGrid.for_photons(N)
    left = convolve_loss(wigner_function(su2_rotate(rho, *angles), grid), L)
    right = wigner_function(su2_rotate(conditional_loss_map(rho, L), *angles), left.grid)
    np.testing.assert_allclose(left.values, right.values, atol=1e-8)


def test_convolution_checks_grids(rng):
    N = 5
    field = wigner_function(random_density(N, rng), SphereGrid.for_photons(N))
    with pytest.raises(DomainError):
        convolve_loss(field, 2, output_grid=SphereGrid.for_photons(2))
    with pytest.raises(DomainError):
        convolve_loss(field, 6)


def test_exact_width_follows_width_law():
    N, L = 50, 25
    profile = exact_kernel_profile(N, L, np.linspace(0.0, 1.0, 2001))
    assert fit_gaussian_width(profile) == pytest.approx(gaussian_kernel_width(N, L), rel=0.10)
    assert gaussian_kernel_width(N, L) == pytest.approx(math.sqrt(1 / 50), rel=1e-14)


def _fwhm_gap(N, L):
    thetas = np.linspace(0.0, 1.5, 3001)
    exact = exact_kernel_profile(N, L, thetas).fwhm()
    return abs(asymptotic_kernel_profile(N, L, thetas).fwhm() - exact) / exact


@pytest.mark.slow
@pytest.mark.parametrize("N, L, tolerance", [(50, 25, 0.07), (30, 15, 0.11)])
def test_asymptotic_fwhm_matches_exact(N, L, tolerance):
    """渐近核与精确核的半高全宽一致；奇数 L 取 2K = L-1，实测偏差约 6.2% 与 9.9%"""
    assert _fwhm_gap(N, L) < tolerance


@pytest.mark.slow
def test_asymptotic_fwhm_gap_shrinks_with_n():
    """L/N 固定为 1/2 时，N 越大渐近核越接近精确核"""
    assert _fwhm_gap(50, 25) < _fwhm_gap(30, 15)
