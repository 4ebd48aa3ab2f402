#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
量子计量模块
量子 Fisher 信息(纯态、混态、有损)、超保真度与 Wigner 导数下界、渐近精度以及最优输入态搜索

相位族固定为 exp(-iφ n_a)，生成元是传感臂光子数 n_a。
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import eigh
from scipy.optimize import minimize

from ..utils.exceptions import DomainError, NumericalError
from ..utils.logger import get_logger
from .loss_channel import LossModel, _check_eta
from .spin_space import (
    POSITIVITY_TOLERANCE,
    SpinDensity,
    SpinKet,
    SpinState,
    _check_photon_number,
    as_density,
    number_operator_a,
)
from .wigner_phase_space import SphereGrid, phi_derivative

logger = get_logger(__name__)

# SLD 谱求和中的本征值截断(相对最大本征值)
EIGENVALUE_CUTOFF = 1e-12
# 相移族下纯度导数项的断言阈值
PURITY_DRIFT_TOLERANCE = 1e-12


class OptimizerOptions(BaseModel):
    """最优输入态搜索的参数"""

    restarts: int = Field(default=16, ge=1, description="多起点重启次数")
    max_iters: int = Field(default=20000, ge=1, description="单次单纯形搜索的最大迭代数")
    tol: float = Field(default=1e-10, gt=0, description="xatol 与 fatol")
    symmetric: bool = Field(default=False, description="限制 c_m = c_{-m}")
    allow_phases: bool = Field(default=False, description="同时优化振幅相位")
    seed: int = Field(default=0, ge=0, description="随机种子")
    polish_rounds: int = Field(default=3, ge=0, description="从最优点再启动的次数")
    jobs: int = Field(default=1, ge=1, description="并发重启的线程数")


class OptimizerMeta(BaseModel):
    """优化过程记录"""

    restarts: int
    iterations: int
    evaluations: int
    converged: bool
    best_restart: int
    history: List[float] = Field(default_factory=list, description="逐次重启后的历史最优值")


class PrecisionRecord(BaseModel):
    """一个 (N, η) 点的精度记录"""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    n_photons: int = Field(ge=0)
    eta: float = Field(ge=0.0, le=1.0)
    fisher: float
    delta_phi: float
    bound_asymptotic: Optional[float] = None
    bound_wigner: Optional[float] = None
    bound_superfidelity: Optional[float] = None
    optimizer_meta: Optional[OptimizerMeta] = None

    @model_validator(mode="after")
    def _check_invariants(self) -> "PrecisionRecord":
        if self.fisher < 0.0:
            raise ValueError(f"Fisher 信息为负: {self.fisher}")
        if self.fisher > 0.0 and abs(self.delta_phi * math.sqrt(self.fisher) - 1.0) > 1e-12:
            raise ValueError("delta_phi 与 fisher 不一致")
        if self.bound_wigner is not None and self.bound_wigner > self.fisher + 1e-8 * max(1.0, self.fisher):
            raise ValueError(f"Wigner 下界 {self.bound_wigner} 超过 Fisher 信息 {self.fisher}")
        return self

    @classmethod
    def from_fisher(cls, n_photons: int, eta: float, fisher: float, **kwargs) -> "PrecisionRecord":
        fisher = max(float(fisher), 0.0)
        delta_phi = 1.0 / math.sqrt(fisher) if fisher > 0.0 else math.inf
        return cls(n_photons=n_photons, eta=eta, fisher=fisher, delta_phi=delta_phi, **kwargs)

    def to_row(self) -> Dict[str, object]:
        """精度扫描表的一行"""
        return {
            "N": self.n_photons,
            "eta": self.eta,
            "fisher": self.fisher,
            "delta_phi": self.delta_phi,
            "asymptotic": self.bound_asymptotic,
            "wigner_bound": self.bound_wigner,
            "converged": None if self.optimizer_meta is None else self.optimizer_meta.converged,
        }


def qfi_pure(state: SpinKet) -> float:
    """纯态 QFI = 4(<n_a²> - <n_a>²)"""
    if not isinstance(state, SpinKet):
        raise DomainError(f"qfi_pure 需要 SpinKet: {type(state).__name__}")
    weights = np.abs(state.amplitudes) ** 2
    n = number_operator_a(state.n_photons)
    mean = float(np.dot(weights, n))
    return 4.0 * float(np.dot(weights, (n - mean) ** 2))


def _qfi_matrix(matrix: np.ndarray) -> float:
    """
    F_Q = 2 Σ_{k,l} (λ_k - λ_l)²/(λ_k + λ_l) |<k|n_a|l>|²，只对 λ_k + λ_l > ε 求和
    """
    eigenvalues, vectors = eigh(matrix)
    if eigenvalues[0] < -POSITIVITY_TOLERANCE * max(1.0, float(np.trace(matrix).real)):
        raise DomainError(f"密度矩阵不是半正定: 最小本征值 {eigenvalues[0]:.3e}")
    largest = float(eigenvalues[-1])
    if largest <= 0.0:
        return 0.0
    n = np.arange(matrix.shape[0], dtype=float)
    generator = vectors.conj().T @ (n[:, None] * vectors)
    sums = eigenvalues[:, None] + eigenvalues[None, :]
    diffs = eigenvalues[:, None] - eigenvalues[None, :]
    mask = sums > EIGENVALUE_CUTOFF * largest
    weights = np.zeros_like(sums)
    weights[mask] = diffs[mask] ** 2 / sums[mask]
    return 2.0 * float(np.sum(weights * np.abs(generator) ** 2))


def qfi_mixed(rho: SpinState) -> float:
    """
    混态 QFI(对称对数导数的谱公式)，与相位点无关

    Raises:
        DomainError: 输入超出半正定容差
    """
    density = as_density(rho)
    return _qfi_matrix(density.matrix)


def qfi_lossy(state: SpinKet, eta: float, jobs: int = 1) -> float:
    """
    有损 QFI = Σ_L p^N_L · QFI(Λ^N_L(|ψ><ψ|))
    """
    terms = branch_fisher_contributions(state, eta, jobs=jobs)
    return float(math.fsum(term["weighted"] for term in terms))


def branch_fisher_contributions(state: SpinKet, eta: float, jobs: int = 1) -> List[Dict[str, float]]:
    """逐分支的 p、F 与 p·F，概率为 0 的分支直接记 0"""
    if not isinstance(state, SpinKet):
        raise DomainError(f"需要 SpinKet: {type(state).__name__}")
    model = LossModel(state.n_photons, eta)
    branches = model.branch_matrices(state.amplitudes)

    def evaluate(branch) -> Dict[str, float]:
        L, probability, matrix = branch
        fisher = _qfi_matrix(matrix) if probability > 0.0 else 0.0
        return {"n_lost": L, "probability": probability, "fisher": fisher, "weighted": probability * fisher}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(evaluate, branches))
    return [evaluate(branch) for branch in branches]


def asymptotic_precision(N: int, eta: float) -> float:
    """
    强损耗极限下的精度 √((1-η)/(ηN))

    Raises:
        DomainError: η ∉ (0, 1) 或 N < 1
    """
    N = _check_photon_number(N, minimum=1)
    eta = _check_eta(eta)
    if eta in (0.0, 1.0):
        raise DomainError(f"η = {eta} 时渐近表达式退化")
    return math.sqrt((1.0 - eta) / (eta * N))


def _superfidelity_bound_matrix(matrix: np.ndarray) -> float:
    n = np.arange(matrix.shape[0], dtype=float)
    diff = n[:, None] - n[None, :]
    # ∂ρ/∂φ = -i[n_a, ρ]
    derivative = -1j * diff * matrix
    drift = abs(complex(np.sum(matrix.T * derivative)))
    if drift > PURITY_DRIFT_TOLERANCE * max(1.0, float(np.max(np.abs(matrix)))):
        raise NumericalError(f"相移族下纯度导数不为零: {drift:.3e}")
    return 2.0 * float(np.sum(np.abs(derivative) ** 2))


def superfidelity_qfi_bound(rho: SpinState) -> float:
    """
    超保真度给出的 QFI 下界 2 Tr[(∂ρ/∂φ)²]

    纯度导数项在相移族下为零，这里断言后舍去。
    """
    density = as_density(rho)
    return _superfidelity_bound_matrix(density.matrix)


def superfidelity(rho: SpinState, sigma: SpinState) -> float:
    """G(ρ, σ) = Tr ρσ + √((1 - Tr ρ²)(1 - Tr σ²))"""
    a, b = as_density(rho), as_density(sigma)
    if a.n_photons != b.n_photons:
        raise DomainError("两个态的光子数不一致")
    overlap = float(np.vdot(a.matrix, b.matrix).real)
    return overlap + math.sqrt(max(0.0, 1.0 - a.purity()) * max(0.0, 1.0 - b.purity()))


def fidelity(rho: SpinState, sigma: SpinState) -> float:
    """Uhlmann 保真度 (Tr √(√ρ σ √ρ))²"""
    a, b = as_density(rho), as_density(sigma)
    if a.n_photons != b.n_photons:
        raise DomainError("两个态的光子数不一致")
    eigenvalues, vectors = eigh(a.matrix)
    root = (vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.conj().T
    inner = root @ b.matrix @ root
    inner_eigenvalues = eigh(0.5 * (inner + inner.conj().T), eigvals_only=True)
    return float(np.sum(np.sqrt(np.clip(inner_eigenvalues, 0.0, None)))) ** 2


def lossy_superfidelity_bound(state: SpinKet, eta: float) -> float:
    """逐分支的超保真度下界之和 Σ_L p^N_L · 2Tr[(∂ρ_L/∂φ)²]"""
    model = LossModel(state.n_photons, eta)
    return float(math.fsum(
        p * _superfidelity_bound_matrix(matrix)
        for _, p, matrix in model.branch_states(state) if p > 0.0
    ))


def wigner_qfi_bound(state: SpinKet, eta: float,
                     grids: Optional[Mapping[int, SphereGrid]] = None) -> float:
    """
    相空间形式的 QFI 下界 2 Σ_{N'} p^N_{N-N'} · (N'+1)/(4π) ∫ (∂W^{N'}/∂φ)² dΩ

    Args:
        state: 输入纯态
        eta: 透射率
        grids: 按 N' 指定的网格，缺省时使用 SphereGrid.for_photons(N')

    Raises:
        DomainError: 某个分支的网格不够精确
    """
    if not isinstance(state, SpinKet):
        raise DomainError(f"需要 SpinKet: {type(state).__name__}")
    grids = grids or {}
    model = LossModel(state.n_photons, eta)
    total = []
    for L, probability, matrix in model.branch_states(state):
        if probability == 0.0:
            continue
        n_out = state.n_photons - L
        grid = grids.get(n_out) or SphereGrid.for_photons(n_out)
        derivative = phi_derivative(SpinDensity(n_out, matrix), grid)
        squared = derivative.grid.integrate(derivative.values ** 2)
        total.append(probability * (n_out + 1) / (4.0 * np.pi) * squared)
    return 2.0 * float(math.fsum(total))


def precision_record(state: SpinKet, eta: float, with_wigner_bound: bool = True,
                     grids: Optional[Mapping[int, SphereGrid]] = None,
                     optimizer_meta: Optional[OptimizerMeta] = None,
                     jobs: int = 1) -> PrecisionRecord:
    """汇总给定态在 η 下的 Fisher 信息与各个界"""
    eta = _check_eta(eta)
    fisher = qfi_lossy(state, eta, jobs=jobs)
    asymptotic = None
    if 0.0 < eta < 1.0 and state.n_photons >= 1:
        asymptotic = asymptotic_precision(state.n_photons, eta)
    return PrecisionRecord.from_fisher(
        state.n_photons, eta, fisher,
        bound_asymptotic=asymptotic,
        bound_wigner=wigner_qfi_bound(state, eta, grids) if with_wigner_bound else None,
        bound_superfidelity=lossy_superfidelity_bound(state, eta),
        optimizer_meta=optimizer_meta,
    )


class _Objective:
    """参数向量 → 振幅 → -F_Q 的映射"""

    def __init__(self, N: int, eta: float, symmetric: bool, allow_phases: bool):
        self.n_photons = N
        self.model = LossModel(N, eta)
        self.symmetric = symmetric
        self.allow_phases = allow_phases
        index = np.arange(N + 1)
        self.amplitude_index = np.minimum(index, N - index) if symmetric else index
        self.n_amplitudes = N // 2 + 1 if symmetric else N + 1
        # 第 0 个分量的相位固定为 0
        if symmetric:
            self.phase_index = np.minimum(index, N - index)
            self.n_phases = N // 2
        else:
            self.phase_index = index
            self.n_phases = N
        self.evaluations = 0

    @property
    def dimension(self) -> int:
        return self.n_amplitudes + (self.n_phases if self.allow_phases else 0)

    def amplitudes(self, params: np.ndarray) -> Optional[np.ndarray]:
        magnitudes = np.abs(params[:self.n_amplitudes])[self.amplitude_index]
        norm = np.linalg.norm(magnitudes)
        if norm == 0.0 or not np.isfinite(norm):
            return None
        magnitudes = magnitudes / norm
        if not self.allow_phases:
            return magnitudes
        phases = np.concatenate([[0.0], params[self.n_amplitudes:]])[self.phase_index]
        return magnitudes * np.exp(1j * phases)

    def parameters(self, amplitudes: np.ndarray) -> np.ndarray:
        """振幅 → 参数(对称时取前半部分，相位取辐角)"""
        amplitudes = np.asarray(amplitudes, dtype=complex)
        params = np.abs(amplitudes)[:self.n_amplitudes]
        if self.allow_phases:
            phases = np.angle(amplitudes)[1:self.n_phases + 1] - np.angle(amplitudes[0])
            params = np.concatenate([params, phases])
        return params.astype(float)

    def fisher(self, amplitudes: np.ndarray) -> float:
        total = 0.0
        for _, probability, matrix in self.model.branch_matrices(amplitudes):
            if probability > 0.0:
                if not self.allow_phases:
                    matrix = matrix.real
                total += probability * _qfi_matrix(matrix)
        return total

    def __call__(self, params: np.ndarray) -> float:
        self.evaluations += 1
        amplitudes = self.amplitudes(params)
        if amplitudes is None:
            return 0.0
        return -self.fisher(amplitudes)


def _starting_profiles(N: int, restarts: int, seed: int) -> List[np.ndarray]:
    """结构化起点(类 N00N、均匀、不同宽度的高斯分布)之后是随机起点"""
    index = np.arange(N + 1, dtype=float)
    noon = np.zeros(N + 1)
    noon[0] = noon[-1] = 1.0
    profiles = [noon, np.ones(N + 1)]
    base_width = max(math.sqrt(N) / 2.0, 0.5)
    for factor in (1.0, 1.5, 2.0, 3.0):
        width = base_width * factor
        profiles.append(np.exp(-((index - N / 2.0) ** 2) / (2.0 * width ** 2)))
    starts = profiles[:restarts]
    for restart in range(len(starts), restarts):
        rng = np.random.default_rng([seed, restart])
        starts.append(rng.random(N + 1))
    return starts


def _run_simplex(objective: _Objective, start: np.ndarray, options: OptimizerOptions):
    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={
            "maxiter": options.max_iters,
            "maxfev": options.max_iters * 2,
            "xatol": options.tol,
            "fatol": options.tol,
            "adaptive": True,
        },
    )
    return result


def optimize_input_state(N: int, eta: float,
                         options: Optional[OptimizerOptions] = None,
                         with_wigner_bound: bool = True) -> Tuple[SpinKet, PrecisionRecord]:
    """
    在实非负振幅(可选带相位)的单位球面上最大化有损 QFI

    多起点 Nelder-Mead 单纯形搜索，重启结果按 (seed, index) 顺序合并，
    所以给定种子时输出确定。未收敛不会抛异常，而是在 optimizer_meta 中标记。

    Returns:
        (最优态, 精度记录)
    """
    N = _check_photon_number(N, minimum=1)
    eta = _check_eta(eta)
    if eta == 0.0:
        raise DomainError("η = 0 时所有态的 Fisher 信息为零，无需优化")
    options = options or OptimizerOptions()

    objective_template = _Objective(N, eta, options.symmetric, options.allow_phases)
    starts = []
    for profile in _starting_profiles(N, options.restarts, options.seed):
        params = objective_template.parameters(profile)
        if options.allow_phases:
            rng = np.random.default_rng([options.seed, len(starts), 1])
            params[objective_template.n_amplitudes:] = rng.uniform(-0.1, 0.1, objective_template.n_phases)
        starts.append(params)

    def run(start: np.ndarray):
        objective = _Objective(N, eta, options.symmetric, options.allow_phases)
        result = _run_simplex(objective, start, options)
        return result, objective.evaluations

    if options.jobs > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as executor:
            outcomes = list(executor.map(run, starts))
    else:
        outcomes = [run(start) for start in starts]

    history: List[float] = []
    best_value, best_index, best_result = -math.inf, 0, None
    iterations = evaluations = 0
    for restart, (result, count) in enumerate(outcomes):
        iterations += int(result.nit)
        evaluations += count
        value = -float(result.fun)
        if value > best_value:
            best_value, best_index, best_result = value, restart, result
        history.append(best_value)
        logger.debug("重启 %d: F=%.12g, 收敛=%s", restart, value, result.success)

    converged = bool(best_result.success)
    best_x = best_result.x
    for _ in range(options.polish_rounds):
        polish, count = run(best_x)
        iterations += int(polish.nit)
        evaluations += count
        improved = -float(polish.fun) > best_value + options.tol
        if -float(polish.fun) >= best_value:
            best_value, best_x = -float(polish.fun), polish.x
            converged = bool(polish.success)
        if not improved:
            break

    amplitudes = objective_template.amplitudes(best_x)
    if amplitudes is None:
        raise NumericalError("优化结果是零向量")
    state = SpinKet.normalized(N, amplitudes)
    meta = OptimizerMeta(
        restarts=options.restarts,
        iterations=iterations,
        evaluations=evaluations,
        converged=converged,
        best_restart=best_index,
        history=history,
    )
    if not converged:
        logger.warning("N=%d, η=%.6g 的优化在 %d 次迭代内未收敛，返回历史最优值", N, eta, options.max_iters)
    record = precision_record(state, eta, with_wigner_bound=with_wigner_bound, optimizer_meta=meta)
    return state, record


def sweep_grid(n_values: Sequence[int], eta_values: Sequence[float]) -> List[Tuple[int, float]]:
    """按配置顺序展开 (N, η) 网格"""
    return [(int(n), float(eta)) for n in n_values for eta in eta_values]
