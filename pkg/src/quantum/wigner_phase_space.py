#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
自旋 Wigner 相空间模块
Wigner 核算符、Wigner 变换及其逆变换、球面精确求积与方位角导数

核矩阵元
    <J,m2| ŵ_N(θ, φ) |J,m1> = Σ_j (2j+1)/(N+1) · C^{J m1}_{J m2, j μ} · d^j_{μ,0}(θ) · e^{iμφ},  μ = m1 - m2
只通过相位因子 e^{iμφ} 依赖 φ，所以每个 θ 节点只计算一次实矩阵 ŵ_N(θ, 0)。
Wigner 函数按 ∫ W dΩ = 4π/(N+1) 归一化。
"""

from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Integral
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import roots_legendre

from ..utils.exceptions import DomainError, NumericalError
from ..utils.logger import get_logger
from .spin_space import SpinDensity, SpinState, _check_photon_number, as_density
from .su2_special_functions import clebsch_gordan_array, spherical_harmonic_basis, zonal_d_table

logger = get_logger(__name__)

# 实值断言允许的虚部残差
IMAGINARY_TOLERANCE = 1e-10


@lru_cache(maxsize=64)
def _gauss_legendre(n_theta: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(n_theta)
    # 按 θ 升序排列(cosθ 降序)
    nodes, weights = nodes[::-1].copy(), weights[::-1].copy()
    thetas = np.arccos(nodes)
    thetas.setflags(write=False)
    weights.setflags(write=False)
    return thetas, weights


@dataclass(frozen=True)
class SphereGrid:
    """
    球面求积网格: cosθ 方向 Gauss-Legendre 节点，φ 方向均匀节点

    对声明的 n_max，要求 n_theta ≥ n_max+1、n_phi ≥ 2·n_max+1，
    这时次数 ≤ 2·n_max 的球谐函数乘积被精确积分。极点不是节点。
    """

    n_theta: int
    n_phi: int
    n_max: int
    theta_nodes: np.ndarray = field(repr=False, compare=False, hash=False)
    theta_weights: np.ndarray = field(repr=False, compare=False, hash=False)
    phi_nodes: np.ndarray = field(repr=False, compare=False, hash=False)

    @classmethod
    def create(cls, n_theta: int, n_phi: int, n_max: Optional[int] = None) -> "SphereGrid":
        if n_theta < 1 or n_phi < 1:
            raise DomainError(f"网格节点数必须为正: n_theta={n_theta}, n_phi={n_phi}")
        largest = min(n_theta - 1, (n_phi - 1) // 2)
        if n_max is None:
            n_max = largest
        if n_max < 0 or n_max > largest:
            raise DomainError(
                f"网格 (n_theta={n_theta}, n_phi={n_phi}) 对 N_max={n_max} 不精确: "
                f"需要 n_theta ≥ {n_max + 1} 且 n_phi ≥ {2 * n_max + 1}"
            )
        thetas, weights = _gauss_legendre(int(n_theta))
        phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
        phis.setflags(write=False)
        return cls(int(n_theta), int(n_phi), int(n_max), thetas, weights, phis)

    @classmethod
    def for_photons(cls, N: int, theta_factor: int = 2, phi_factor: int = 4) -> "SphereGrid":
        """光子数 N 的默认网格 n_theta = 2(N+1)、n_phi = 4(N+1)"""
        N = _check_photon_number(N)
        return cls.create(theta_factor * (N + 1), phi_factor * (N + 1), n_max=N)

    @property
    def phi_weight(self) -> float:
        return 2.0 * np.pi / self.n_phi

    @property
    def weights(self) -> np.ndarray:
        """每个节点的立体角权重，形状 (n_theta, n_phi)"""
        return np.repeat(self.theta_weights[:, None] * self.phi_weight, self.n_phi, axis=1)

    def integrate(self, values: np.ndarray) -> float:
        """∫ f dΩ；先对 φ 再对 θ 求和，顺序固定"""
        values = np.asarray(values)
        if values.shape != (self.n_theta, self.n_phi):
            raise DomainError(f"数组形状 {values.shape} 与网格不匹配")
        return float(np.dot(self.theta_weights, values.sum(axis=1)) * self.phi_weight)

    def require(self, N: int, label: str = "操作") -> None:
        if self.n_max < N:
            raise DomainError(f"{label}需要 N_max ≥ {N}，网格只支持 N_max = {self.n_max}")

    def to_dict(self) -> Dict[str, Any]:
        return {"n_theta": self.n_theta, "n_phi": self.n_phi, "n_max": self.n_max}


@dataclass(frozen=True, eq=False)
class WignerField:
    """网格上的实值准概率分布 W(θ_i, φ_j)"""

    n_photons: int
    grid: SphereGrid
    values: np.ndarray = field(repr=False)
    kind: str = "wigner"

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (self.grid.n_theta, self.grid.n_phi):
            raise DomainError(f"场形状 {values.shape} 与网格不匹配")
        if not np.all(np.isfinite(values)):
            raise NumericalError("Wigner 场包含非有限值")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        return self.grid.integrate(self.values)

    def extrema(self) -> Tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def to_frame(self) -> pd.DataFrame:
        """列: theta, phi, weight, value(θ 外层、φ 内层)"""
        theta, phi = np.meshgrid(self.grid.theta_nodes, self.grid.phi_nodes, indexing="ij")
        return pd.DataFrame({
            "theta": theta.ravel(),
            "phi": phi.ravel(),
            "weight": self.grid.weights.ravel(),
            "value": self.values.ravel(),
        })

    def metadata(self) -> Dict[str, Any]:
        minimum, maximum = self.extrema()
        return {
            "n_photons": self.n_photons,
            "kind": self.kind,
            **self.grid.to_dict(),
            "integral": self.integral(),
            "min": minimum,
            "max": maximum,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.metadata(),
            "theta_nodes": self.grid.theta_nodes.tolist(),
            "theta_weights": self.grid.theta_weights.tolist(),
            "phi_nodes": self.grid.phi_nodes.tolist(),
            "values": self.values.tolist(),
        }


@lru_cache(maxsize=64)
def _coupling_table(N: int) -> np.ndarray:
    """
    (2j+1)/(N+1) · C^{J m1}_{J m2, j μ}，形状 (j, m2 行, m1 列)
    """
    twice_m = 2 * np.arange(N + 1) - N
    rows, cols = twice_m[:, None], twice_m[None, :]
    table = np.zeros((N + 1, N + 1, N + 1))
    for j in range(N + 1):
        table[j] = (2 * j + 1) / (N + 1) * clebsch_gordan_array(N, rows, 2 * j, cols - rows, N)
    table.setflags(write=False)
    logger.debug("耦合系数表构建完成: N=%d", N)
    return table


def _mu_offsets(N: int) -> np.ndarray:
    index = np.arange(N + 1)
    return N + index[None, :] - index[:, None]


def _kernel_matrices(N: int, thetas) -> np.ndarray:
    """ŵ_N(θ, 0)，形状 (n_theta, N+1, N+1)"""
    d_table = zonal_d_table(N, thetas)
    coupling = _coupling_table(N)
    offsets = _mu_offsets(N)
    stack = np.zeros((d_table.shape[0], N + 1, N + 1))
    for j in range(N + 1):
        stack += coupling[j][None, :, :] * d_table[:, j, offsets]
    return stack


@lru_cache(maxsize=32)
def _grid_kernel_stack(N: int, n_theta: int) -> np.ndarray:
    thetas, _ = _gauss_legendre(n_theta)
    stack = _kernel_matrices(N, thetas)
    stack.setflags(write=False)
    return stack


def _twist(N: int, phis: np.ndarray) -> np.ndarray:
    """e^{iμφ}，形状 (2N+1, n_phi)"""
    mu = np.arange(-N, N + 1)
    return np.exp(1j * mu[:, None] * np.asarray(phis)[None, :])


def wigner_kernel_matrix(N: int, theta: float, phi: float) -> np.ndarray:
    """
    Wigner 核算符 ŵ_N(Ω) 在 |J, m> 基下的矩阵

    Args:
        N: 光子数
        theta, phi: 球面坐标

    Returns:
        np.ndarray: (N+1)×(N+1) Hermitian 矩阵，迹为 1
    """
    N = _check_photon_number(N)
    base = _kernel_matrices(N, [float(theta)])[0]
    return base * np.exp(1j * (_mu_offsets(N) - N) * phi)


def _as_operator(matrix, N: int) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (N + 1, N + 1):
        raise DomainError(f"算符形状 {matrix.shape} 与光子数 {N} 不匹配")
    return matrix


def _azimuthal_modes(stack: np.ndarray, matrix: np.ndarray, N: int) -> np.ndarray:
    """
    G(θ_i, μ) = Σ_{m1-m2=μ} ŵ_{m2 m1}(θ_i, 0) ρ_{m1 m2}，使 W = Σ_μ G(μ) e^{iμφ}

    Returns:
        np.ndarray: 形状 (n_theta, 2N+1)
    """
    products = stack * matrix.T[None, :, :]
    modes = np.zeros((stack.shape[0], 2 * N + 1), dtype=complex)
    for mu in range(-N, N + 1):
        modes[:, mu + N] = np.trace(products, offset=mu, axis1=1, axis2=2)
    return modes


def _real_part(values: np.ndarray, label: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(values.real), initial=0.0)))
    residue = float(np.max(np.abs(values.imag), initial=0.0))
    if residue > IMAGINARY_TOLERANCE * scale:
        raise NumericalError(f"{label}的虚部残差 {residue:.3e} 超出容差")
    return values.real


def wigner_transform(matrix, N: int, grid: SphereGrid) -> np.ndarray:
    """Hermitian 算符 A 的 Wigner 符号 Tr[ŵ_N(Ω) A]，返回网格上的实数组"""
    N = _check_photon_number(N)
    grid.require(N, "Wigner 变换")
    operator = _as_operator(matrix, N)
    modes = _azimuthal_modes(_grid_kernel_stack(N, grid.n_theta), operator, N)
    return _real_part(modes @ _twist(N, grid.phi_nodes), "Wigner 变换")


def wigner_function(rho: SpinState, grid: SphereGrid) -> WignerField:
    """
    自旋 Wigner 函数 W(Ω) = Tr[ŵ_N(Ω) ρ]

    Raises:
        DomainError: 网格声明的 N_max 小于态的光子数
    """
    density = as_density(rho)
    values = wigner_transform(density.matrix, density.n_photons, grid)
    return WignerField(density.n_photons, grid, values)


def phi_derivative(rho: SpinState, grid: SphereGrid) -> WignerField:
    """∂W/∂φ，解析地在每个方位角模式上乘以 iμ"""
    density = as_density(rho)
    N = density.n_photons
    grid.require(N, "方位角导数")
    modes = _azimuthal_modes(_grid_kernel_stack(N, grid.n_theta), density.matrix, N)
    modes = modes * (1j * np.arange(-N, N + 1))[None, :]
    values = _real_part(modes @ _twist(N, grid.phi_nodes), "方位角导数")
    return WignerField(N, grid, values, kind="phi_derivative")


def wigner_values(rho: SpinState, thetas, phis) -> np.ndarray:
    """在任意点 (θ, φ) 上逐点求 W，θ 与 φ 可广播"""
    density = as_density(rho)
    N = density.n_photons
    theta_arr, phi_arr = np.broadcast_arrays(np.asarray(thetas, dtype=float), np.asarray(phis, dtype=float))
    flat_theta, flat_phi = theta_arr.ravel(), phi_arr.ravel()
    modes = _azimuthal_modes(_kernel_matrices(N, flat_theta), density.matrix, N)
    phases = np.exp(1j * np.arange(-N, N + 1)[None, :] * flat_phi[:, None])
    values = _real_part(np.sum(modes * phases, axis=1), "Wigner 函数")
    return values.reshape(theta_arr.shape)


def inverse_wigner_matrix(values: np.ndarray, N: int, grid: SphereGrid) -> np.ndarray:
    """(N+1)/(4π) ∫ W(Ω) ŵ_N(Ω) dΩ，不做正定性检查"""
    grid.require(N, "逆 Wigner 变换")
    values = np.asarray(values, dtype=float)
    stack = _grid_kernel_stack(N, grid.n_theta)
    # H(θ_i, μ) = Δφ Σ_φ W e^{iμφ}
    harmonics = grid.phi_weight * values @ _twist(N, grid.phi_nodes).T
    gathered = harmonics[:, _mu_offsets(N)]
    return (N + 1) / (4.0 * np.pi) * np.einsum("i,iab,iab->ab", grid.theta_weights, stack, gathered)


def inverse_wigner(field: WignerField) -> SpinDensity:
    """由 Wigner 场重建密度矩阵"""
    matrix = inverse_wigner_matrix(field.values, field.n_photons, field.grid)
    return SpinDensity(field.n_photons, matrix)


def overlap_trace(field_a: WignerField, field_b: WignerField) -> float:
    """
    迹性质: Tr[AB] = (N+1)/(4π) ∫ W_A W_B dΩ

    Raises:
        DomainError: 光子数或网格不一致
    """
    if field_a.n_photons != field_b.n_photons:
        raise DomainError(f"光子数不一致: {field_a.n_photons} ≠ {field_b.n_photons}")
    if (field_a.grid.n_theta, field_a.grid.n_phi) != (field_b.grid.n_theta, field_b.grid.n_phi):
        raise DomainError("两个场的网格不一致")
    N = field_a.n_photons
    return (N + 1) / (4.0 * np.pi) * field_a.grid.integrate(field_a.values * field_b.values)


def operator_field(matrix, N: int, grid: SphereGrid) -> WignerField:
    """任意 Hermitian 算符的 Wigner 符号，包装成 WignerField"""
    return WignerField(N, grid, wigner_transform(matrix, N, grid), kind="operator")


def equator_cut(rho: SpinState, n_points: int = 720) -> Tuple[np.ndarray, np.ndarray]:
    """
    赤道截面 W(π/2, φ)

    Returns:
        (phi, values)，phi 为 [0, 2π) 上 n_points 个均匀点
    """
    if isinstance(n_points, bool) or not isinstance(n_points, Integral) or n_points < 1:
        raise DomainError(f"采样点数必须为正整数: {n_points!r}")
    density = as_density(rho)
    N = density.n_photons
    phis = 2.0 * np.pi * np.arange(n_points) / n_points
    modes = _azimuthal_modes(_kernel_matrices(N, [np.pi / 2]), density.matrix, N)
    return phis, _real_part(modes @ _twist(N, phis), "赤道截面")[0]


def azimuthal_spectrum(values: np.ndarray) -> np.ndarray:
    """
    均匀采样周期信号的傅里叶幅度 |c_k|，k = 0..n/2

    c_k = (1/n) Σ_j f(φ_j) e^{-ikφ_j}
    """
    values = np.asarray(values, dtype=float)
    return np.abs(np.fft.rfft(values)) / values.size


def harmonic_coefficients(field: WignerField, max_degree: int) -> np.ndarray:
    """
    球谐展开系数 a_{jm} = ∫ W Y*_{jm} dΩ

    网格需对次数 N + max_degree 精确，默认网格满足 max_degree ≤ 3N + 3。

    Returns:
        np.ndarray: 形状 (max_degree+1, 2·max_degree+1)，第二维下标 m + max_degree
    """
    grid = field.grid
    if field.n_photons + max_degree > min(2 * grid.n_theta - 1, grid.n_phi - 1):
        raise DomainError(f"网格不足以精确计算到 {max_degree} 阶的展开系数")
    m = np.arange(-max_degree, max_degree + 1)
    # F(θ_i, m) = Δφ Σ_φ W e^{-imφ}
    fourier = grid.phi_weight * field.values @ np.exp(-1j * m[None, :] * grid.phi_nodes[:, None])
    basis = spherical_harmonic_basis(max_degree, grid.theta_nodes)
    return np.einsum("i,im,jmi->jm", grid.theta_weights, fourier, basis)


def synthesize_field(coefficients: np.ndarray, N: int, grid: SphereGrid, kind: str = "wigner") -> WignerField:
    """由球谐系数合成网格上的实场"""
    coefficients = np.asarray(coefficients, dtype=complex)
    max_degree = coefficients.shape[0] - 1
    if coefficients.shape != (max_degree + 1, 2 * max_degree + 1):
        raise DomainError(f"系数数组形状不合法: {coefficients.shape}")
    grid.require(N, "场合成")
    m = np.arange(-max_degree, max_degree + 1)
    basis = spherical_harmonic_basis(max_degree, grid.theta_nodes)
    per_theta = np.einsum("jm,jmi->im", coefficients, basis)
    values = per_theta @ np.exp(1j * m[:, None] * grid.phi_nodes[None, :])
    return WignerField(N, grid, _real_part(values, "场合成"), kind=kind)
