#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
SU(2) 特殊函数模块
对数阶乘、Clebsch-Gordan 系数、Wigner d 函数、球谐函数与旋转矩阵

约定(全库唯一一处说明):
  - Condon-Shortley 相位;
  - 基矢按 m = -j, ..., +j 升序排列，矩阵下标 i = j + m;
  - d^j_{m,m'}(β) = <j m| exp(-iβJ_y) |j m'>，第一个下标为行;
  - D^j_{m,m'}(α, β, γ) = e^{-iαm} d^j_{m,m'}(β) e^{-iγm'}。

所有函数都是纯函数；模块级缓存表在构造后即设为只读。
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Integral
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln, xlogy

from ..utils.exceptions import DomainError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# 对数阶乘查表范围; j ≤ 100 时 Racah 求和的最大自变量为 3j+1
_TABLE_SIZE = 1024
# 求和公式适用的最大 2j，超过后改用三项递推
SUM_FORMULA_MAX_TWICE_J = 24
# 递推中重新缩放的阈值
_RESCALE_THRESHOLD = 1e200
# sinβ 低于该值时使用 β = 0 或 π 的闭式结果
_POLE_TOLERANCE = 1e-15


def _build_log_factorial_table() -> np.ndarray:
    table = gammaln(np.arange(_TABLE_SIZE, dtype=float) + 1.0)
    table[:2] = 0.0
    table.setflags(write=False)
    return table


_LOG_FACTORIAL = _build_log_factorial_table()


@dataclass(frozen=True, order=True)
class HalfInt:
    """以 2 倍整数精确保存的半整数(用于 j、m、J)"""

    twice_value: int

    def __post_init__(self):
        if not isinstance(self.twice_value, Integral):
            raise DomainError(f"twice_value 必须是整数: {self.twice_value!r}")
        object.__setattr__(self, "twice_value", int(self.twice_value))

    @classmethod
    def of(cls, value: Union["HalfInt", int, float, Fraction]) -> "HalfInt":
        """由整数、半整数浮点数或分数构造"""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, Integral):
            return cls(2 * int(value))
        twice = Fraction(value).limit_denominator(4) * 2
        if twice.denominator != 1 or abs(float(twice) - 2 * float(value)) > 1e-12:
            raise DomainError(f"不是整数或半整数: {value!r}")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_value / 2

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice_value)

    def __add__(self, other) -> "HalfInt":
        return HalfInt(self.twice_value + HalfInt.of(other).twice_value)

    def __sub__(self, other) -> "HalfInt":
        return HalfInt(self.twice_value - HalfInt.of(other).twice_value)

    def __str__(self) -> str:
        if self.is_integer:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"


SpinLike = Union[HalfInt, int, float, Fraction]


def _twice(value: SpinLike) -> int:
    return HalfInt.of(value).twice_value


def _check_pair(tj: int, tm: int, label: str) -> None:
    if tj < 0:
        raise DomainError(f"{label}: j 必须非负 (2j = {tj})")
    if abs(tm) > tj:
        raise DomainError(f"{label}: |m| > j (2j = {tj}, 2m = {tm})")
    if (tj + tm) % 2:
        raise DomainError(f"{label}: j 与 m 奇偶不一致 (2j = {tj}, 2m = {tm})")


def log_factorial(n: int) -> float:
    """
    计算 ln(n!)

    Args:
        n: 非负整数

    Returns:
        float: ln(n!)
    """
    if isinstance(n, bool) or not isinstance(n, Integral):
        raise DomainError(f"log_factorial 需要整数参数: {n!r}")
    if n < 0:
        raise DomainError(f"log_factorial 需要非负整数: {n}")
    if n < _TABLE_SIZE:
        return float(_LOG_FACTORIAL[n])
    return float(gammaln(n + 1.0))


def _lf(values) -> np.ndarray:
    """向量化对数阶乘; 负自变量按 0 处理，由调用方屏蔽"""
    values = np.asarray(values)
    clipped = np.clip(values, 0, None)
    if clipped.size and clipped.max() >= _TABLE_SIZE:
        return gammaln(clipped + 1.0)
    return _LOG_FACTORIAL[clipped]


def clebsch_gordan_array(tj1: int, tm1, tj2: int, tm2, tJ: int) -> np.ndarray:
    """
    向量化 Clebsch-Gordan 系数 C^{J, m1+m2}_{j1 m1, j2 m2}

    所有参数均为 2 倍值；tm1、tm2 可以是可广播的整数数组。
    选择定则不满足的位置返回 0。Racah 求和在对数空间中逐项计算并记录符号。
    """
    tm1, tm2 = np.broadcast_arrays(np.asarray(tm1, dtype=np.int64), np.asarray(tm2, dtype=np.int64))
    tM = tm1 + tm2
    result = np.zeros(tm1.shape, dtype=float)

    if min(tj1, tj2, tJ) < 0 or (tj1 + tj2 + tJ) % 2:
        return result
    if tJ > tj1 + tj2 or tJ < abs(tj1 - tj2):
        return result

    valid = (
        (np.abs(tm1) <= tj1) & (np.abs(tm2) <= tj2) & (np.abs(tM) <= tJ)
        & ((tj1 + tm1) % 2 == 0) & ((tj2 + tm2) % 2 == 0)
    )
    if not valid.any():
        return result

    n1 = (tj1 + tj2 - tJ) // 2
    t2 = (tj1 - tm1) // 2
    t3 = (tj2 + tm2) // 2
    t4 = (tJ - tj2 + tm1) // 2
    t5 = (tJ - tj1 - tm2) // 2

    log_prefactor = 0.5 * (
        np.log(tJ + 1.0)
        + _lf((tJ + tj1 - tj2) // 2) + _lf((tJ - tj1 + tj2) // 2) + _lf(n1)
        - _lf((tj1 + tj2 + tJ) // 2 + 1)
        + _lf((tJ + tM) // 2) + _lf((tJ - tM) // 2)
        + _lf(t2) + _lf((tj1 + tm1) // 2)
        + _lf((tj2 - tm2) // 2) + _lf(t3)
    )

    k_min = np.maximum(0, np.maximum(-t4, -t5))
    k_max = np.minimum(n1, np.minimum(t2, t3))

    log_terms = []
    for k in range(n1 + 1):
        active = valid & (k >= k_min) & (k <= k_max)
        term = -(_lf(k) + _lf(n1 - k) + _lf(t2 - k) + _lf(t3 - k) + _lf(t4 + k) + _lf(t5 + k))
        log_terms.append(np.where(active, term, -np.inf))
    log_terms = np.stack(log_terms)

    peak = log_terms.max(axis=0)
    has_terms = np.isfinite(peak)
    peak = np.where(has_terms, peak, 0.0)
    signs = np.where(np.arange(n1 + 1) % 2 == 0, 1.0, -1.0).reshape((-1,) + (1,) * tm1.ndim)
    scaled_sum = np.sum(signs * np.exp(log_terms - peak), axis=0)

    result = np.where(valid & has_terms, scaled_sum * np.exp(log_prefactor + peak), 0.0)
    return result


def clebsch_gordan(j1: SpinLike, m1: SpinLike, j2: SpinLike, m2: SpinLike,
                   J: SpinLike, M: SpinLike) -> float:
    """
    Clebsch-Gordan 系数 <j1 m1; j2 m2 | J M>(Condon-Shortley 约定)

    |m| > j 或奇偶不一致抛出 DomainError；选择定则不满足(M ≠ m1+m2、三角不等式)返回 0。
    """
    tj1, tm1, tj2, tm2, tJ, tM = (_twice(v) for v in (j1, m1, j2, m2, J, M))
    _check_pair(tj1, tm1, "(j1, m1)")
    _check_pair(tj2, tm2, "(j2, m2)")
    _check_pair(tJ, tM, "(J, M)")
    if tM != tm1 + tm2:
        return 0.0
    return float(clebsch_gordan_array(tj1, tm1, tj2, tm2, tJ))


def _reduce_angles(betas: np.ndarray):
    """
    把 β 约化到 [0, π]

    Returns:
        (约化角, 整体符号指数(以 2j 为单位的次数), 是否需要转置)
    """
    reduced = np.mod(betas, 4.0 * np.pi)
    wraps = reduced >= 2.0 * np.pi
    reduced = np.where(wraps, reduced - 2.0 * np.pi, reduced)
    flips = reduced > np.pi
    reduced = np.where(flips, 2.0 * np.pi - reduced, reduced)
    # d(β + 2π) = (-1)^{2j} d(β); d(2π - β) = (-1)^{2j} d(β)^T
    sign_powers = wraps.astype(int) + flips.astype(int)
    return reduced, sign_powers, flips


def _sum_formula(tj: int, betas: np.ndarray, cols: np.ndarray) -> np.ndarray:
    rows = np.arange(tj + 1)[None, :, None, None]
    k = cols[None, None, :, None]
    s = np.arange(tj + 1)[None, None, None, :]

    active = (k - s >= 0) & (rows - k + s >= 0) & (tj - rows - s >= 0)
    half = 0.5 * betas[:, None, None, None]
    cos_power = tj + k - rows - 2 * s
    sin_power = rows - k + 2 * s
    log_term = (
        0.5 * (_lf(rows) + _lf(tj - rows) + _lf(k) + _lf(tj - k))
        - _lf(k - s) - _lf(s) - _lf(rows - k + s) - _lf(tj - rows - s)
        + xlogy(np.where(active, cos_power, 0), np.cos(half))
        + xlogy(np.where(active, sin_power, 0), np.sin(half))
    )
    sign = np.where((rows - k + s) % 2 == 0, 1.0, -1.0)
    terms = np.where(active, sign * np.exp(np.where(active, log_term, 0.0)), 0.0)
    return terms.sum(axis=-1)


def _recursion_pass(tj: int, cos_b, sin_b, log_start, start_sign, cols: np.ndarray, upward: bool):
    """
    对第一个下标 m 做三项递推

    (m' - m cosβ) d_{m,m'} = (sinβ/2)[√((j+m)(j-m+1)) d_{m-1,m'} + √((j-m)(j+m+1)) d_{m+1,m'}]

    以尾数与对数尺度分开保存，避免端点处的下溢。
    """
    n_beta, n_cols = cos_b.shape[0], cols.size
    mantissa = np.zeros((n_beta, tj + 1, n_cols))
    scales = np.zeros((n_beta, tj + 1, n_cols))

    tmp = (cols - tj / 2.0)[None, :]
    half_sin = 0.5 * sin_b

    order = range(tj + 1) if upward else range(tj, -1, -1)
    prev = np.zeros((n_beta, n_cols))
    cur = start_sign * np.ones((n_beta, n_cols))
    scale = log_start.copy()

    for step, row in enumerate(order):
        if step > 0:
            m = (row - 1 if upward else row + 1) - tj / 2.0
            if upward:
                back = np.sqrt((tj / 2.0 + m) * (tj / 2.0 - m + 1.0))
                forward = np.sqrt((tj / 2.0 - m) * (tj / 2.0 + m + 1.0))
            else:
                back = np.sqrt((tj / 2.0 - m) * (tj / 2.0 + m + 1.0))
                forward = np.sqrt((tj / 2.0 + m) * (tj / 2.0 - m + 1.0))
            nxt = ((tmp - m * cos_b) * cur - half_sin * back * prev) / (half_sin * forward)
            prev, cur = cur, nxt
            big = np.abs(cur) > _RESCALE_THRESHOLD
            if big.any():
                factor = np.where(big, np.abs(cur), 1.0)
                cur = cur / factor
                prev = prev / factor
                scale = scale + np.log(factor)
        mantissa[:, row, :] = cur
        scales[:, row, :] = scale
    return mantissa, scales


def _recursion(tj: int, betas: np.ndarray, cols: np.ndarray) -> np.ndarray:
    half = 0.5 * betas[:, None]
    cos_b = np.cos(betas)[:, None]
    sin_b = np.sin(betas)[:, None]
    c_half, s_half = np.cos(half), np.sin(half)
    k = cols[None, :]

    log_binom = 0.5 * (_lf(tj) - _lf(k) - _lf(tj - k))
    # d_{-j,m'} = √C(2j, j+m') cos^{j-m'} sin^{j+m'}
    up_start = log_binom + xlogy(tj - k, c_half) + xlogy(k, s_half)
    # d_{j,m'} = (-1)^{j-m'} √C(2j, j+m') cos^{j+m'} sin^{j-m'}
    down_start = log_binom + xlogy(k, c_half) + xlogy(tj - k, s_half)
    down_sign = np.where((tj - k) % 2 == 0, 1.0, -1.0)

    up_m, up_s = _recursion_pass(tj, cos_b, sin_b, up_start, 1.0, cols, upward=True)
    down_m, down_s = _recursion_pass(tj, cos_b, sin_b, down_start, down_sign, cols, upward=False)

    m = (np.arange(tj + 1) - tj / 2.0)[None, :, None]
    mp = (cols - tj / 2.0)[None, None, :]
    use_up = m <= mp * cos_b[:, :, None]
    mantissa = np.where(use_up, up_m, down_m)
    scales = np.where(use_up, up_s, down_s)
    with np.errstate(under="ignore"):
        return mantissa * np.exp(scales)


def _pole_values(tj: int, at_pi: bool, cols: np.ndarray) -> np.ndarray:
    rows = np.arange(tj + 1)[:, None]
    k = cols[None, :]
    if not at_pi:
        return (rows == k).astype(float)
    # d_{m,m'}(π) = (-1)^{j-m'} δ_{m,-m'}
    sign = np.where((tj - k) % 2 == 0, 1.0, -1.0)
    return np.where(rows == tj - k, sign, 0.0)


def _small_d_block(tj: int, betas, cols: Sequence[int]) -> np.ndarray:
    """
    d^j 的若干列，在一组 β 上同时计算

    Args:
        tj: 2j
        betas: 角度数组
        cols: 列下标 k = j + m'

    Returns:
        np.ndarray: 形状 (len(betas), 2j+1, len(cols))
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    cols = np.asarray(cols, dtype=np.int64)
    reduced, sign_powers, flips = _reduce_angles(betas)

    at_zero = np.abs(np.sin(reduced)) < _POLE_TOLERANCE
    at_zero_only = at_zero & (reduced < np.pi / 2)
    regular = ~at_zero

    block = np.zeros((betas.size, tj + 1, cols.size))
    if regular.any():
        if tj <= SUM_FORMULA_MAX_TWICE_J:
            block[regular] = _sum_formula(tj, reduced[regular], cols)
        else:
            block[regular] = _recursion(tj, reduced[regular], cols)
    if at_zero_only.any():
        block[at_zero_only] = _pole_values(tj, False, cols)
    at_pi = at_zero & ~at_zero_only
    if at_pi.any():
        block[at_pi] = _pole_values(tj, True, cols)

    if tj % 2:
        block *= np.where(sign_powers % 2 == 0, 1.0, -1.0)[:, None, None]
    if flips.any():
        rows = np.arange(tj + 1)[:, None]
        transpose_sign = np.where((rows - cols[None, :]) % 2 == 0, 1.0, -1.0)
        block[flips] *= transpose_sign
    return block


def wigner_small_d(j: SpinLike, m: SpinLike, mp: SpinLike, beta: float) -> float:
    """
    Wigner d 函数 d^j_{m,m'}(β)

    2j ≤ 24 用对数空间求和公式，更大的 j 用按 m 的三项递推。
    """
    tj, tm, tmp = _twice(j), _twice(m), _twice(mp)
    _check_pair(tj, tm, "(j, m)")
    _check_pair(tj, tmp, "(j, m')")
    block = _small_d_block(tj, [beta], [(tj + tmp) // 2])
    return float(block[0, (tj + tm) // 2, 0])


def wigner_d_matrix(j: SpinLike, beta: float) -> np.ndarray:
    """完整的 (2j+1)×(2j+1) 实矩阵 d^j(β)，行列按 m 升序"""
    tj = _twice(j)
    if tj < 0:
        raise DomainError(f"j 必须非负: {j}")
    return _small_d_block(tj, [beta], np.arange(tj + 1))[0]


@lru_cache(maxsize=64)
def _zonal_table(max_degree: int, thetas: tuple) -> np.ndarray:
    """
    d^j_{μ,0}(θ)，形状 (n_theta, max_degree+1, 2·max_degree+1)，μ 下标偏移 max_degree
    """
    angles = np.asarray(thetas, dtype=float)
    logger.debug("构建 d^j_{μ0} 表: max_degree=%d, n_theta=%d", max_degree, angles.size)
    table = np.zeros((angles.size, max_degree + 1, 2 * max_degree + 1))
    for degree in range(max_degree + 1):
        column = _small_d_block(2 * degree, angles, [degree])[:, :, 0]
        table[:, degree, max_degree - degree:max_degree + degree + 1] = column
    table.setflags(write=False)
    return table


def zonal_d_table(max_degree: int, thetas) -> np.ndarray:
    """
    批量计算整数 j 的 d^j_{μ,0}(θ)

    Returns:
        np.ndarray: 只读数组，形状 (n_theta, max_degree+1, 2·max_degree+1)，
            第三维下标为 μ + max_degree，|μ| > j 处为 0
    """
    if max_degree < 0:
        raise DomainError(f"最大阶数必须非负: {max_degree}")
    return _zonal_table(int(max_degree), tuple(np.atleast_1d(np.asarray(thetas, dtype=float)).tolist()))


def spherical_harmonic_basis(max_degree: int, thetas) -> np.ndarray:
    """
    √((2j+1)/4π)·d^j_{m,0}(θ)，即去掉 e^{imφ} 因子后的 Y_{j,m}

    Returns:
        np.ndarray: 形状 (max_degree+1, 2·max_degree+1, n_theta)
    """
    table = zonal_d_table(max_degree, thetas)
    norms = np.sqrt((2.0 * np.arange(max_degree + 1) + 1.0) / (4.0 * np.pi))
    return np.transpose(table, (1, 2, 0)) * norms[:, None, None]


def spherical_harmonic(j: int, m: int, theta, phi):
    """
    球谐函数 Y_{j,m}(θ, φ) = √((2j+1)/4π) d^j_{m,0}(θ) e^{imφ}

    与上面的 Clebsch-Gordan 约定一致(Condon-Shortley)。θ、φ 可以是可广播的数组。
    """
    if isinstance(j, bool) or not isinstance(j, Integral) or not isinstance(m, Integral):
        raise DomainError(f"球谐函数需要整数阶: j={j!r}, m={m!r}")
    _check_pair(2 * int(j), 2 * int(m), "(j, m)")
    theta_arr, phi_arr = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    d_values = _small_d_block(2 * int(j), theta_arr.ravel(), [int(j)])[:, int(j) + int(m), 0]
    values = np.sqrt((2 * j + 1) / (4.0 * np.pi)) * d_values.reshape(theta_arr.shape) * np.exp(1j * m * phi_arr)
    if values.ndim == 0:
        return complex(values)
    return values


def wigner_rotation_matrix(N: int, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """
    自旋 J = N/2 表示中的旋转矩阵 D(α, β, γ)

    Args:
        N: 光子数
        alpha, beta, gamma: 欧拉角(z-y-z)

    Returns:
        np.ndarray: (N+1)×(N+1) 酉矩阵
    """
    if isinstance(N, bool) or not isinstance(N, Integral) or N < 0:
        raise DomainError(f"光子数必须是非负整数: {N!r}")
    m = np.arange(N + 1) - N / 2.0
    d = _small_d_block(int(N), [beta], np.arange(N + 1))[0]
    return np.exp(-1j * alpha * m)[:, None] * d * np.exp(-1j * gamma * m)[None, :]
