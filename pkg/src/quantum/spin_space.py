#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
固定光子数双模态模块
以角动量表象 |J, m> (J = N/2) 表示 N 光子态，并实现相移、SU(2) 旋转与单项式降算符

基矢顺序为 m = -J..J 升序，下标 i = J + m 恰为 a 臂中的光子数。
"""

from dataclasses import dataclass, field
from numbers import Integral
from typing import Any, Dict, Union

import numpy as np
from scipy.linalg import eigvalsh

from ..utils.exceptions import DomainError
from .su2_special_functions import SpinLike, _lf, _twice, wigner_rotation_matrix

# 构造函数接受的归一化偏差，超出即拒绝，否则重新归一化
NORMALIZATION_TOLERANCE = 1e-9
# 损耗映射会产生舍入级别的负本征值
POSITIVITY_TOLERANCE = 1e-10


def _check_photon_number(N, minimum: int = 0) -> int:
    if isinstance(N, bool) or not isinstance(N, Integral) or N < minimum:
        raise DomainError(f"光子数必须是 ≥ {minimum} 的整数: {N!r}")
    return int(N)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SpinKet:
    """纯 N 光子态，振幅 c_m 按 m 升序"""

    n_photons: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = _check_photon_number(self.n_photons)
        amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size != n + 1:
            raise DomainError(f"振幅长度 {amplitudes.size} 与光子数 {n} 不匹配")
        if not np.all(np.isfinite(amplitudes)):
            raise DomainError("振幅包含非有限值")
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_sq - 1.0) > NORMALIZATION_TOLERANCE:
            raise DomainError(f"态未归一化: Σ|c_m|² = {norm_sq:.3e}")
        object.__setattr__(self, "n_photons", n)
        object.__setattr__(self, "amplitudes", _readonly(amplitudes / np.sqrt(norm_sq)))

    @classmethod
    def normalized(cls, n_photons: int, amplitudes) -> "SpinKet":
        """先归一化再构造，用于优化器等产生任意范数向量的场合"""
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amplitudes)
        if norm == 0.0 or not np.isfinite(norm):
            raise DomainError("零向量或非有限向量无法归一化")
        return cls(n_photons, amplitudes / norm)

    @property
    def spin(self) -> float:
        return self.n_photons / 2

    def to_density(self) -> "SpinDensity":
        return SpinDensity(self.n_photons, np.outer(self.amplitudes, self.amplitudes.conj()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "ket",
            "n_photons": self.n_photons,
            "real": self.amplitudes.real.tolist(),
            "imag": self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SpinKet":
        amplitudes = np.asarray(data["real"], dtype=float) + 1j * np.asarray(data["imag"], dtype=float)
        return cls(int(data["n_photons"]), amplitudes)


@dataclass(frozen=True, eq=False)
class SpinDensity:
    """固定光子数子空间上的密度矩阵(Hermitian、迹为 1、半正定)"""

    n_photons: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = _check_photon_number(self.n_photons)
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (n + 1, n + 1):
            raise DomainError(f"密度矩阵形状 {matrix.shape} 与光子数 {n} 不匹配")
        if not np.all(np.isfinite(matrix)):
            raise DomainError("密度矩阵包含非有限值")
        asymmetry = float(np.max(np.abs(matrix - matrix.conj().T)))
        if asymmetry > NORMALIZATION_TOLERANCE:
            raise DomainError(f"密度矩阵不是 Hermitian: 偏差 {asymmetry:.3e}")
        trace = float(np.trace(matrix).real)
        if abs(trace - 1.0) > NORMALIZATION_TOLERANCE:
            raise DomainError(f"密度矩阵迹不为 1: {trace:.12g}")
        matrix = 0.5 * (matrix + matrix.conj().T) / trace
        lowest = float(eigvalsh(matrix)[0])
        if lowest < -POSITIVITY_TOLERANCE:
            raise DomainError(f"密度矩阵不是半正定: 最小本征值 {lowest:.3e}")
        object.__setattr__(self, "n_photons", n)
        object.__setattr__(self, "matrix", _readonly(matrix))

    @property
    def spin(self) -> float:
        return self.n_photons / 2

    def purity(self) -> float:
        """Tr ρ²"""
        return float(np.vdot(self.matrix, self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return eigvalsh(self.matrix)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "density",
            "n_photons": self.n_photons,
            "real": self.matrix.real.ravel().tolist(),
            "imag": self.matrix.imag.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SpinDensity":
        n = int(data["n_photons"])
        flat = np.asarray(data["real"], dtype=float) + 1j * np.asarray(data["imag"], dtype=float)
        if flat.size != (n + 1) ** 2:
            raise DomainError(f"扁平数组长度 {flat.size} 与光子数 {n} 不匹配")
        return cls(n, flat.reshape(n + 1, n + 1))


SpinState = Union[SpinKet, SpinDensity]


def as_density(state: SpinState) -> SpinDensity:
    if isinstance(state, SpinKet):
        return state.to_density()
    if isinstance(state, SpinDensity):
        return state
    raise DomainError(f"不支持的态类型: {type(state).__name__}")


def state_from_dict(data: Dict[str, Any]) -> SpinState:
    """按 kind 字段反序列化 SpinKet 或 SpinDensity"""
    kind = data.get("kind", "ket")
    if kind == "ket":
        return SpinKet.from_dict(data)
    if kind == "density":
        return SpinDensity.from_dict(data)
    raise DomainError(f"未知的态类型: {kind}")


def number_operator_a(N: int) -> np.ndarray:
    """
    传感臂光子数算符 n_a 的对角元 J + m

    Args:
        N: 光子数

    Returns:
        np.ndarray: (0, 1, ..., N)
    """
    N = _check_photon_number(N)
    return np.arange(N + 1, dtype=float)


def phase_shift(state: SpinState, varphi: float) -> SpinState:
    """相移 exp(-iφ n_a)，c_m ↦ e^{-iφ(J+m)} c_m"""
    phases = np.exp(-1j * varphi * number_operator_a(state.n_photons))
    if isinstance(state, SpinKet):
        return SpinKet(state.n_photons, phases * state.amplitudes)
    if isinstance(state, SpinDensity):
        return SpinDensity(state.n_photons, phases[:, None] * state.matrix * phases.conj()[None, :])
    raise DomainError(f"不支持的态类型: {type(state).__name__}")


def monomial_lower(N: int, l: int, k: int) -> np.ndarray:
    """
    单项式 a^l b^k 在角动量表象下的矩阵

    将 |n_a = i, n_b = N - i> 映到 |i - l, N - i - k>，系数
    √[i!(N-i)!/((i-l)!(N-i-k)!)]；阶乘自变量为负处为 0。

    Returns:
        np.ndarray: (N-l-k+1)×(N+1) 实矩阵
    """
    N = _check_photon_number(N)
    if l < 0 or k < 0:
        raise DomainError(f"l, k 必须非负: l={l}, k={k}")
    if l + k > N:
        raise DomainError(f"l + k = {l + k} 超过光子数 {N}")
    matrix = np.zeros((N - l - k + 1, N + 1))
    i = np.arange(l, N - k + 1)
    matrix[i - l, i] = np.exp(0.5 * (
        _lf(i) + _lf(N - i) - _lf(i - l) - _lf(N - i - k)
    ))
    return matrix


def basis_ket(N: int, m: SpinLike) -> SpinKet:
    """|J, m>"""
    N = _check_photon_number(N)
    tm = _twice(m)
    if abs(tm) > N or (N + tm) % 2:
        raise DomainError(f"m = {m} 不在 J = {N / 2} 的取值范围内")
    amplitudes = np.zeros(N + 1, dtype=complex)
    amplitudes[(N + tm) // 2] = 1.0
    return SpinKet(N, amplitudes)


def noon_state(N: int) -> SpinKet:
    """N00N 态 (|N,0> + |0,N>)/√2"""
    N = _check_photon_number(N, minimum=1)
    amplitudes = np.zeros(N + 1, dtype=complex)
    amplitudes[0] = amplitudes[N] = 1.0 / np.sqrt(2.0)
    return SpinKet(N, amplitudes)


def maximally_mixed(N: int) -> SpinDensity:
    N = _check_photon_number(N)
    return SpinDensity(N, np.eye(N + 1) / (N + 1))


def spin_coherent_state(N: int, theta: float, phi: float) -> SpinKet:
    """自旋相干态 D(φ, θ, 0)|J, J>，θ = 0 对应北极"""
    N = _check_photon_number(N)
    return SpinKet(N, wigner_rotation_matrix(N, phi, theta, 0.0)[:, N])


def su2_rotate(state: SpinState, alpha: float, beta: float, gamma: float) -> SpinState:
    """D(α, β, γ) 作用于态；密度矩阵取 D ρ D†"""
    rotation = wigner_rotation_matrix(state.n_photons, alpha, beta, gamma)
    if isinstance(state, SpinKet):
        return SpinKet(state.n_photons, rotation @ state.amplitudes)
    if isinstance(state, SpinDensity):
        return SpinDensity(state.n_photons, rotation @ state.matrix @ rotation.conj().T)
    raise DomainError(f"不支持的态类型: {type(state).__name__}")
