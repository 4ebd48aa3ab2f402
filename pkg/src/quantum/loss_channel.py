#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
等臂光子损耗信道模块
二项式损耗概率 p^N_L 与条件映射 Λ^N_L: N 光子子空间 → N-L 光子子空间

Λ^N_L(ρ) = [(N-L)!/N!] Σ_l C(L,l) M_{l,L-l} ρ M_{l,L-l}†
其中 M_{l,k} 是 a^l b^k 的角动量表象矩阵。条件映射本身与透射率无关。
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Integral, Real
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import xlogy

from ..utils.exceptions import DomainError
from ..utils.logger import get_logger
from .spin_space import SpinDensity, SpinKet, SpinState, _check_photon_number, as_density
from .su2_special_functions import _lf

logger = get_logger(__name__)

# Kraus 校验器支持的最大截断光子数
MAX_ORACLE_PHOTONS = 12
# 损耗概率之和的容差
PROBABILITY_TOLERANCE = 1e-12


def _check_eta(eta) -> float:
    if isinstance(eta, bool) or not isinstance(eta, Real) or not 0.0 <= float(eta) <= 1.0:
        raise DomainError(f"透射率必须在 [0, 1] 内: {eta!r}")
    return float(eta)


def _check_lost(N: int, L) -> int:
    if isinstance(L, bool) or not isinstance(L, Integral) or not 0 <= L <= N:
        raise DomainError(f"损失光子数必须满足 0 ≤ L ≤ N = {N}: {L!r}")
    return int(L)


def loss_probability(N: int, L: int, eta: float) -> float:
    """
    恰好损失 L 个光子的概率 C(N,L) η^{N-L} (1-η)^L，在对数空间中计算

    Args:
        N: 输入光子数
        L: 损失光子数
        eta: 透射率

    Returns:
        float: p^N_L
    """
    N = _check_photon_number(N)
    L = _check_lost(N, L)
    eta = _check_eta(eta)
    log_p = _lf(N) - _lf(L) - _lf(N - L) + xlogy(N - L, eta) + xlogy(L, 1.0 - eta)
    return float(np.exp(log_p))


def loss_probabilities(N: int, eta: float) -> np.ndarray:
    """p^N_L，L = 0..N"""
    N = _check_photon_number(N)
    eta = _check_eta(eta)
    L = np.arange(N + 1)
    log_p = _lf(N) - _lf(L) - _lf(N - L) + xlogy(N - L, eta) + xlogy(L, 1.0 - eta)
    return np.exp(log_p)


@lru_cache(maxsize=512)
def loss_operators(N: int, L: int) -> np.ndarray:
    """
    条件映射的算符因子 K_l = √[C(L,l)(N-L)!/N!]·M_{l,L-l}，l = 0..L

    每个矩阵元的组合前因子整体在对数空间中拼装。

    Returns:
        np.ndarray: 只读数组，形状 (L+1, N-L+1, N+1)
    """
    N = _check_photon_number(N)
    L = _check_lost(N, L)
    stack = np.zeros((L + 1, N - L + 1, N + 1))
    for l in range(L + 1):
        k = L - l
        i = np.arange(l, N - k + 1)
        log_entry = 0.5 * (
            _lf(L) - _lf(l) - _lf(k) + _lf(N - L) - _lf(N)
            + _lf(i) + _lf(N - i) - _lf(i - l) - _lf(N - i - k)
        )
        stack[l, i - l, i] = np.exp(log_entry)
    stack.setflags(write=False)
    return stack


def apply_conditional_loss(matrix: np.ndarray, N: int, L: int) -> np.ndarray:
    """
    Λ^N_L 作用于任意 (N+1)×(N+1) 算符(不要求是密度矩阵)

    Returns:
        np.ndarray: (N-L+1)×(N-L+1) 复矩阵
    """
    operators = loss_operators(N, L)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (N + 1, N + 1):
        raise DomainError(f"算符形状 {matrix.shape} 与光子数 {N} 不匹配")
    return np.einsum("lai,ij,lbj->ab", operators, matrix, operators, optimize=True)


def conditional_loss_map(rho: SpinState, L: int) -> SpinDensity:
    """
    条件损耗映射 Λ^N_L(ρ)

    Args:
        rho: N 光子态
        L: 损失光子数

    Returns:
        SpinDensity: N-L 光子密度矩阵
    """
    density = as_density(rho)
    N = density.n_photons
    L = _check_lost(N, L)
    return SpinDensity(N - L, apply_conditional_loss(density.matrix, N, L))


@dataclass(frozen=True)
class LossBranch:
    """直和分解中的一项 (L, p^N_L, ρ^N_L)"""

    n_lost: int
    probability: float
    state: SpinDensity = field(repr=False)

    @property
    def n_photons(self) -> int:
        return self.state.n_photons

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_lost": self.n_lost,
            "probability": self.probability,
            "state": self.state.to_dict(),
        }


@dataclass(frozen=True)
class LossEnsemble:
    """损耗后的态 ⊕_L p^N_L ρ^N_L，分支按 L 升序"""

    n_input: int
    eta: float
    branches: Tuple[LossBranch, ...]

    def __post_init__(self):
        if [b.n_lost for b in self.branches] != sorted(b.n_lost for b in self.branches):
            raise DomainError("分支必须按 L 升序排列")
        for branch in self.branches:
            if branch.n_photons != self.n_input - branch.n_lost:
                raise DomainError(f"分支 L={branch.n_lost} 的光子数 {branch.n_photons} 不正确")
        if len(self.branches) == self.n_input + 1:
            total = float(np.sum([b.probability for b in self.branches]))
            if abs(total - 1.0) > PROBABILITY_TOLERANCE:
                raise DomainError(f"损耗概率之和不为 1: {total:.15g}")

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([b.probability for b in self.branches])

    def branch(self, L: int) -> LossBranch:
        for candidate in self.branches:
            if candidate.n_lost == L:
                return candidate
        raise DomainError(f"不存在 L = {L} 的分支")

    def significant(self, min_probability: float) -> List[LossBranch]:
        """概率不低于阈值的分支(命令行过滤用，集合本身保持完整)"""
        return [b for b in self.branches if b.probability >= min_probability]

    def total_trace(self) -> float:
        return float(np.sum([b.probability * np.trace(b.state.matrix).real for b in self.branches]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_input": self.n_input,
            "eta": self.eta,
            "branches": [b.to_dict() for b in sorted(self.branches, key=lambda b: b.n_lost)],
        }


def full_loss_ensemble(rho: SpinState, eta: float, jobs: int = 1) -> LossEnsemble:
    """
    完整的损耗后直和分解，包含 L = 0..N 所有分支(概率再小也保留)

    Args:
        rho: 输入态
        eta: 透射率
        jobs: 并发计算分支的线程数；结果顺序始终按 L 升序
    """
    density = as_density(rho)
    eta = _check_eta(eta)
    N = density.n_photons
    probabilities = loss_probabilities(N, eta)

    def build(L: int) -> LossBranch:
        return LossBranch(L, float(probabilities[L]), conditional_loss_map(density, L))

    if jobs > 1 and N > 0:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            branches = list(executor.map(build, range(N + 1)))
    else:
        branches = [build(L) for L in range(N + 1)]

    logger.debug("损耗分解完成: N=%d, eta=%.6g", N, eta)
    return LossEnsemble(N, eta, tuple(branches))


class LossModel:
    """
    给定 (N, η) 的损耗模型，缓存概率与算符因子

    纯态输入的快速路径: V_l = K_l ψ，Λ^N_L(|ψ><ψ|) = Σ_l V_l V_l†。
    优化器目标函数在这里反复求值，因此不构造 SpinDensity。
    """

    def __init__(self, N: int, eta: float):
        self.n_photons = _check_photon_number(N)
        self.eta = _check_eta(eta)
        self.probabilities = loss_probabilities(self.n_photons, self.eta)
        self.probabilities.setflags(write=False)
        self.operators = [loss_operators(self.n_photons, L) for L in range(self.n_photons + 1)]

    def branch_matrices(self, amplitudes: np.ndarray) -> List[Tuple[int, float, np.ndarray]]:
        """返回 [(L, p, Λ^N_L(|ψ><ψ|)), ...]，未归一化的 ψ 按原样使用"""
        amplitudes = np.asarray(amplitudes, dtype=complex)
        branches = []
        for L, operators in enumerate(self.operators):
            vectors = operators @ amplitudes
            branches.append((L, float(self.probabilities[L]), vectors.T @ vectors.conj()))
        return branches

    def branch_states(self, state: SpinState) -> List[Tuple[int, float, np.ndarray]]:
        if isinstance(state, SpinKet):
            return self.branch_matrices(state.amplitudes)
        density = as_density(state)
        return [
            (L, float(self.probabilities[L]), apply_conditional_loss(density.matrix, self.n_photons, L))
            for L in range(self.n_photons + 1)
        ]


def spin_to_fock(rho: SpinState, cutoff: int) -> np.ndarray:
    """
    把 N 光子态嵌入截断双模 Fock 空间

    Fock 基 |n_a, n_b> 的扁平下标为 n_a·(cutoff+1) + n_b。
    """
    density = as_density(rho)
    N = density.n_photons
    if cutoff < N:
        raise DomainError(f"截断 {cutoff} 小于光子数 {N}")
    dim = cutoff + 1
    index = np.arange(N + 1) * dim + (N - np.arange(N + 1))
    fock = np.zeros((dim * dim, dim * dim), dtype=complex)
    fock[np.ix_(index, index)] = density.matrix
    return fock


def fock_block(rho_fock: np.ndarray, n: int, cutoff: int) -> np.ndarray:
    """取出总光子数为 n 的块，按 |J, m> 基排列"""
    dim = cutoff + 1
    if not 0 <= n <= cutoff:
        raise DomainError(f"光子数 {n} 超出截断 {cutoff}")
    index = np.arange(n + 1) * dim + (n - np.arange(n + 1))
    return np.asarray(rho_fock)[np.ix_(index, index)]


def _single_mode_kraus(eta: float, cutoff: int) -> np.ndarray:
    dim = cutoff + 1
    n = np.arange(dim)
    operators = np.zeros((dim, dim, dim))
    for k in range(dim):
        source = n[n >= k]
        log_amp = 0.5 * (
            _lf(source) - _lf(k) - _lf(source - k)
            + xlogy(source - k, eta) + xlogy(k, 1.0 - eta)
        )
        operators[k, source - k, source] = np.exp(log_amp)
    return operators


def kraus_oracle(rho_fock: np.ndarray, eta: float) -> np.ndarray:
    """
    在截断双模 Fock 空间中直接应用 Kraus 形式的损耗信道(测试用校验器)

    E_k = Σ_n √(C(n,k) η^{n-k} (1-η)^k) |n-k><n|，两臂各自独立作用。

    Args:
        rho_fock: (d², d²) 密度矩阵，d = cutoff + 1 ≤ 13
        eta: 透射率

    Returns:
        np.ndarray: 同形状的输出密度矩阵
    """
    eta = _check_eta(eta)
    rho_fock = np.asarray(rho_fock, dtype=complex)
    dim = int(round(np.sqrt(rho_fock.shape[0])))
    if rho_fock.ndim != 2 or rho_fock.shape != (dim * dim, dim * dim):
        raise DomainError(f"Fock 密度矩阵形状不合法: {rho_fock.shape}")
    cutoff = dim - 1
    if cutoff > MAX_ORACLE_PHOTONS:
        raise DomainError(f"截断光子数 {cutoff} 超过校验器上限 {MAX_ORACLE_PHOTONS}")

    single = _single_mode_kraus(eta, cutoff)
    output = np.zeros_like(rho_fock)
    for ka in range(dim):
        for kb in range(dim):
            kraus = np.kron(single[ka], single[kb])
            if not kraus.any():
                continue
            output += kraus @ rho_fock @ kraus.T
    return output


def oracle_branches(state: SpinState, eta: float, cutoff: Optional[int] = None) -> Dict[int, np.ndarray]:
    """用 Kraus 校验器计算各分支 p^N_L·ρ^N_L，键为 L"""
    density = as_density(state)
    N = density.n_photons
    cutoff = N if cutoff is None else cutoff
    output = kraus_oracle(spin_to_fock(density, cutoff), eta)
    return {L: fock_block(output, N - L, cutoff) for L in range(N + 1)}

