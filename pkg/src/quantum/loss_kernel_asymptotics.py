#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
损耗卷积核模块
把条件损耗映射写成相空间卷积: 精确核、0 阶核、渐近核、宽度律与卷积本身

精确核只依赖极角:
    L^N_L(θ) = (N+1)/(4π) · Tr[ŵ_{N-L}(θ) Λ^N_L(ŵ_N(0))]
Λ^N_L(ŵ_N(0)) 是对角矩阵，只需计算一次；ŵ 的对角元只含 d^j_{00} = P_j(cosθ)。
核是带状的，卷积在球谐空间中按阶逐项相乘。
"""

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from numbers import Integral
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit
from scipy.special import eval_legendre, gammaln, roots_legendre

from ..utils.exceptions import DomainError, NumericalError
from ..utils.logger import get_logger
from .loss_channel import _check_lost, apply_conditional_loss
from .spin_space import _check_photon_number
from .wigner_phase_space import (
    IMAGINARY_TOLERANCE,
    SphereGrid,
    WignerField,
    _coupling_table,
    harmonic_coefficients,
    synthesize_field,
    wigner_kernel_matrix,
)

logger = get_logger(__name__)

KERNEL_KINDS = ("exact", "asymptotic", "order0")
# 0 阶核 x 方向 Gauss-Legendre 节点数的下限
MIN_ORDER0_NODES = 64


@dataclass(frozen=True, eq=False)
class KernelProfile:
    """卷积核的极角剖面"""

    n_input: int
    n_lost: int
    thetas: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    kind: str = "exact"
    rescale_factor: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DomainError(f"未知的核类型: {self.kind}")
        thetas = np.array(self.thetas, dtype=float, copy=True).reshape(-1)
        values = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if thetas.shape != values.shape:
            raise DomainError("角度与取值长度不一致")
        if not np.all(np.isfinite(values)):
            raise NumericalError(f"{self.kind} 核剖面包含非有限值")
        thetas.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "values", values)

    @property
    def n_output(self) -> int:
        return self.n_input - self.n_lost

    def peak_normalized(self) -> "KernelProfile":
        peak = float(np.max(self.values))
        if peak <= 0.0:
            raise NumericalError("核剖面峰值非正，无法归一化")
        return replace(self, values=self.values / peak)

    def fwhm(self) -> float:
        return full_width_half_maximum(self)

    def to_frame(self) -> pd.DataFrame:
        """列: theta, value, kind, N, L, rescale_factor"""
        return pd.DataFrame({
            "theta": self.thetas,
            "value": self.values,
            "kind": self.kind,
            "N": self.n_input,
            "L": self.n_lost,
            "rescale_factor": self.rescale_factor,
        })

    def metadata(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "N": self.n_input,
            "L": self.n_lost,
            "rescale_factor": self.rescale_factor,
            "points": int(self.thetas.size),
        }


def _check_pair(N: int, L: int):
    N = _check_photon_number(N)
    return N, _check_lost(N, L)


@lru_cache(maxsize=256)
def _loss_weights(N: int, L: int) -> np.ndarray:
    """Λ^N_L(ŵ_N(0)) 的对角元"""
    image = apply_conditional_loss(wigner_kernel_matrix(N, 0.0, 0.0), N, L)
    off_diagonal = float(np.max(np.abs(image - np.diag(np.diag(image))), initial=0.0))
    if off_diagonal > 1e-12:
        raise NumericalError(f"Λ(ŵ_N(0)) 不是对角矩阵: 偏差 {off_diagonal:.3e}")
    weights = np.diag(image).real.copy()
    weights.setflags(write=False)
    return weights


def _exact_values(N: int, L: int, cosines: np.ndarray) -> np.ndarray:
    n_out = N - L
    coupling = _coupling_table(n_out)
    # ŵ_{N'}(θ) 的对角元: Σ_j (2j+1)/(N'+1) C^{J'm}_{J'm, j0} P_j(cosθ)
    diagonal_coupling = np.einsum("jmm->jm", coupling)
    legendre = np.stack([eval_legendre(j, cosines) for j in range(n_out + 1)])
    diagonal = np.einsum("jm,jt->tm", diagonal_coupling, legendre)
    return (N + 1) / (4.0 * np.pi) * diagonal @ _loss_weights(N, L)


def exact_kernel_profile(N: int, L: int, thetas) -> KernelProfile:
    """
    精确卷积核 L^N_L(θ)

    Raises:
        DomainError: L > N
    """
    N, L = _check_pair(N, L)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    values = _exact_values(N, L, np.cos(thetas))
    return KernelProfile(N, L, thetas, values, kind="exact")


def exact_kernel_value(N: int, L: int, theta: float, phi: float) -> float:
    """不利用带状性，直接以完整核算符求 (N+1)/(4π)·Tr[ŵ_{N-L}(θ, φ) Λ^N_L(ŵ_N(0))]"""
    N, L = _check_pair(N, L)
    value = np.sum(np.diag(wigner_kernel_matrix(N - L, theta, phi)) * _loss_weights(N, L))
    value = complex((N + 1) / (4.0 * np.pi) * value)
    if abs(value.imag) > IMAGINARY_TOLERANCE:
        raise NumericalError(f"核的虚部残差 {abs(value.imag):.3e} 超出容差")
    return value.real


def order0_kernel(N: int, K: int, theta):
    """
    0 阶核的积分表示

    (N+1)/(2√π) · Γ(K+½)/Γ(K+1) · ∫_{-1}^{1} (1-x²)^K (cosθ + i x sinθ)^{N-2K} dx

    x 方向用 max(64, N) 个 Gauss-Legendre 节点；被积函数虚部按奇偶性抵消。
    θ 可以是数组。
    """
    N = _check_photon_number(N)
    if isinstance(K, bool) or not isinstance(K, Integral) or K < 0 or 2 * K > N:
        raise DomainError(f"需要 0 ≤ 2K ≤ N: N={N}, K={K!r}")
    theta_arr = np.asarray(theta, dtype=float)
    nodes, weights = roots_legendre(max(MIN_ORDER0_NODES, N))
    prefactor = (N + 1) / (2.0 * math.sqrt(math.pi)) * math.exp(gammaln(K + 0.5) - gammaln(K + 1.0))

    flat = theta_arr.reshape(-1)
    base = np.cos(flat)[:, None] + 1j * nodes[None, :] * np.sin(flat)[:, None]
    integrand = (1.0 - nodes ** 2)[None, :] ** K * base ** (N - 2 * K)
    integral = integrand @ weights
    scale = max(1.0, float(np.max(np.abs(integral.real), initial=0.0)))
    if float(np.max(np.abs(integral.imag), initial=0.0)) > IMAGINARY_TOLERANCE * scale:
        raise NumericalError("0 阶核积分的虚部没有抵消")
    values = (prefactor * integral.real).reshape(theta_arr.shape)
    if values.ndim == 0:
        return float(values)
    return values


def order0_kernel_profile(N: int, K: int, thetas) -> KernelProfile:
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    return KernelProfile(N, 2 * K, thetas, order0_kernel(N, K, thetas), kind="order0")


def _even_bracket(L: int) -> int:
    """渐近式中使用的 K: 偶数 L 取 L/2，奇数 L 取 (L-1)/2"""
    return L // 2


def _asymptotic_raw(N: int, L: int, thetas: np.ndarray) -> np.ndarray:
    K = _even_bracket(L)
    envelope = 1.0 + (N - 2 * K) / N * np.cos(thetas) + 2 * K / N
    return (N + 1) / (4.0 * np.pi) * envelope * order0_kernel(N, K, thetas)


def _sphere_integral(function, n_nodes: int) -> float:
    nodes, weights = roots_legendre(n_nodes)
    return 2.0 * np.pi * float(np.dot(weights, function(np.arccos(nodes))))


def asymptotic_kernel_profile(N: int, L: int, thetas) -> KernelProfile:
    """
    渐近核 (N+1)/(4π)·[1 + ((N-2K)/N)cosθ + 2K/N]·L^N_{2K}(θ)_0

    之后整体缩放到 ∫ dΩ = (N+1)/(N-L+1)，所用缩放因子记录在 rescale_factor 中。
    N、L、N-L 都远大于 1 时才有意义，但这里不做检查。
    """
    N, L = _check_pair(N, L)
    if N == 0:
        raise DomainError("渐近核需要 N ≥ 1")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    integral = _sphere_integral(lambda t: _asymptotic_raw(N, L, t), max(MIN_ORDER0_NODES, N + 2))
    if integral <= 0.0:
        raise NumericalError(f"渐近核积分非正: {integral}")
    rescale = (N + 1) / (N - L + 1) / integral
    logger.debug("渐近核缩放: N=%d, L=%d, factor=%.12g", N, L, rescale)
    values = rescale * _asymptotic_raw(N, L, thetas)
    return KernelProfile(N, L, thetas, values, kind="asymptotic", rescale_factor=rescale)


def kernel_integral(N: int, L: int, kind: str = "exact") -> float:
    """∫ L^N_L dΩ(Gauss-Legendre 在 cosθ 上精确积分)"""
    N, L = _check_pair(N, L)
    n_nodes = max(MIN_ORDER0_NODES, N + 2)
    if kind == "exact":
        return _sphere_integral(lambda t: _exact_values(N, L, np.cos(t)), n_nodes)
    if kind == "asymptotic":
        return _sphere_integral(lambda t: asymptotic_kernel_profile(N, L, t).values, n_nodes)
    if kind == "order0":
        if L % 2:
            raise DomainError("0 阶核只对偶数 L 定义")
        return _sphere_integral(lambda t: order0_kernel(N, L // 2, t), n_nodes)
    raise DomainError(f"未知的核类型: {kind}")


def kernel_legendre_coefficients(N: int, L: int, max_degree: Optional[int] = None) -> np.ndarray:
    """
    带状核的逐阶乘子 k_j = 2π ∫_{-1}^{1} L^N_L(x) P_j(x) dx

    Funk-Hecke 定理保证卷积把 a_{jm} 变成 k_j·a_{jm}。j > N-L 时 k_j 为零。
    """
    N, L = _check_pair(N, L)
    max_degree = N if max_degree is None else int(max_degree)
    nodes, weights = roots_legendre(max(N, max_degree) + 2)
    kernel = _exact_values(N, L, nodes)
    legendre = np.stack([eval_legendre(j, nodes) for j in range(max_degree + 1)])
    return 2.0 * np.pi * legendre @ (weights * kernel)


def gaussian_kernel_width(N: int, L: int) -> float:
    """
    高斯极限下的核宽度 √(L/(N(N-L)))

    L = (1-η)N 时等于 √((1-η)/(ηN))。
    """
    N, L = _check_pair(N, L)
    if N == 0 or L == N:
        raise DomainError(f"宽度律需要 0 < N - L: N={N}, L={L}")
    return math.sqrt(L / (N * (N - L)))


def fit_gaussian_width(profile: KernelProfile, level: float = 0.5) -> float:
    """
    用 exp(-θ²/(2σ²)) 拟合峰值归一化剖面中高于 level 的部分，返回 σ
    """
    normalized = profile.peak_normalized()
    mask = normalized.values >= level
    if mask.sum() < 3:
        raise NumericalError("拟合区域内的采样点不足")
    thetas, values = normalized.thetas[mask], normalized.values[mask]
    initial = max(float(np.sqrt(np.mean(thetas ** 2))), 1e-3)
    (sigma,), _ = curve_fit(lambda t, s: np.exp(-t ** 2 / (2.0 * s ** 2)), thetas, values, p0=[initial])
    return abs(float(sigma))


def full_width_half_maximum(profile: KernelProfile) -> float:
    """
    峰值归一化后的半高全宽 2·θ_{1/2}

    剖面须从 θ = 0 附近的峰值开始按 θ 升序采样，θ_{1/2} 由线性插值得到。
    """
    order = np.argsort(profile.thetas)
    thetas = profile.thetas[order]
    values = profile.peak_normalized().values[order]
    peak = int(np.argmax(values))
    below = np.nonzero(values[peak:] < 0.5)[0]
    if below.size == 0:
        raise NumericalError("剖面在采样范围内没有降到半高")
    upper = peak + int(below[0])
    lower = upper - 1
    fraction = (values[lower] - 0.5) / (values[lower] - values[upper])
    half_width = thetas[lower] + fraction * (thetas[upper] - thetas[lower])
    return 2.0 * float(half_width)


def convolve_loss(field: WignerField, L: int, output_grid: Optional[SphereGrid] = None) -> WignerField:
    """
    W'(Ω) = ∫ L^N_L(Ω'^{-1}Ω) W(Ω') dΩ'

    先把输入场展开到 N 阶球谐函数，逐阶乘以核的 Legendre 系数，再在 N-L 光子网格上合成。

    Args:
        field: N 光子 Wigner 场
        L: 损失光子数
        output_grid: 输出网格，默认 SphereGrid.for_photons(N-L)

    Raises:
        DomainError: 网格不够精确
    """
    N = field.n_photons
    L = _check_lost(N, L)
    n_out = N - L
    field.grid.require(N, "卷积输入")
    grid = output_grid or SphereGrid.for_photons(n_out)
    grid.require(n_out, "卷积输出")

    coefficients = harmonic_coefficients(field, N)
    multipliers = kernel_legendre_coefficients(N, L)
    convolved = multipliers[:, None] * coefficients
    truncated = convolved[:n_out + 1, N - n_out:N + n_out + 1]
    return synthesize_field(truncated, n_out, grid, kind=field.kind)
