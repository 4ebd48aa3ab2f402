#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
运行配置模块
每个命令行子命令对应一个 pydantic 模型；校验在任何计算开始之前完成
"""

import re
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.exceptions import ConfigurationError
from .settings import OptimizerConfig, Settings

_RANGE_PATTERN = re.compile(r"^\s*(-?\d+)\s*-\s*(-?\d+)\s*$")


def parse_int_list(text: str) -> List[int]:
    """
    解析 "1,2,5-10" 形式的整数列表

    Raises:
        ConfigurationError: 空列表或无法解析
    """
    values: List[int] = []
    for item in (text or "").split(","):
        item = item.strip()
        if not item:
            continue
        match = _RANGE_PATTERN.match(item)
        try:
            if match:
                start, stop = int(match.group(1)), int(match.group(2))
                if stop < start:
                    raise ConfigurationError(f"区间上界小于下界: {item}")
                values.extend(range(start, stop + 1))
            else:
                values.append(int(item))
        except ValueError as e:
            raise ConfigurationError(f"无法解析整数列表项: {item!r}") from e
    if not values:
        raise ConfigurationError(f"整数列表为空: {text!r}")
    return values


def parse_float_list(text: str) -> List[float]:
    """解析 "0.5,0.9" 形式的浮点列表"""
    values: List[float] = []
    for item in (text or "").split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(float(item))
        except ValueError as e:
            raise ConfigurationError(f"无法解析浮点列表项: {item!r}") from e
    if not values:
        raise ConfigurationError(f"浮点列表为空: {text!r}")
    return values


class RunConfig(BaseModel):
    """所有子命令共享的字段"""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, description="随机种子，完全决定优化结果")
    out: str = Field(default="results", description="输出目录")
    format: Literal["csv", "json"] = Field(default="csv", description="输出格式")
    jobs: int = Field(default=1, ge=1, description="并发线程数")
    grid_theta: Optional[int] = Field(default=None, ge=1, description="θ 节点数覆盖")
    grid_phi: Optional[int] = Field(default=None, ge=1, description="φ 节点数覆盖")

    def max_photons(self) -> int:
        return 0

    @model_validator(mode="after")
    def _check_grid(self) -> "RunConfig":
        # 覆盖值必须对本次运行中最大的光子数仍然精确
        N = self.max_photons()
        if self.grid_theta is not None and self.grid_theta < N + 1:
            raise ValueError(f"grid_theta = {self.grid_theta} 对 N = {N} 不精确，至少需要 {N + 1}")
        if self.grid_phi is not None and self.grid_phi < 2 * N + 1:
            raise ValueError(f"grid_phi = {self.grid_phi} 对 N = {N} 不精确，至少需要 {2 * N + 1}")
        return self

    def echo(self) -> dict:
        """写入输出文件元数据的配置回显"""
        return self.model_dump(mode="json")


class OptimizedStateMixin(BaseModel):
    """需要先得到输入态的命令共用的字段"""

    restarts: int = Field(default=16, ge=1)
    max_iters: int = Field(default=20000, ge=1)
    tol: float = Field(default=1e-10, gt=0)
    polish_rounds: int = Field(default=3, ge=0)
    symmetric: bool = False
    allow_phases: bool = False

    def optimizer_fields(self) -> dict:
        return {
            "restarts": self.restarts,
            "max_iters": self.max_iters,
            "tol": self.tol,
            "polish_rounds": self.polish_rounds,
            "symmetric": self.symmetric,
            "allow_phases": self.allow_phases,
        }


def _check_etas(values: List[float], allow_zero: bool) -> List[float]:
    for eta in values:
        if not 0.0 <= eta <= 1.0 or (eta == 0.0 and not allow_zero):
            bound = "[0, 1]" if allow_zero else "(0, 1]"
            raise ValueError(f"η = {eta} 不在 {bound} 内")
    return values


class PrecisionSweepConfig(OptimizedStateMixin, RunConfig):
    """precision-sweep: 对每个 (N, η) 优化输入态并输出精度表"""

    n_values: List[int] = Field(min_length=1)
    eta_values: List[float] = Field(min_length=1)
    with_wigner_bound: bool = True

    @field_validator("n_values")
    @classmethod
    def _positive_photons(cls, values: List[int]) -> List[int]:
        if any(n < 1 for n in values):
            raise ValueError(f"光子数必须 ≥ 1: {values}")
        return values

    @field_validator("eta_values")
    @classmethod
    def _etas(cls, values: List[float]) -> List[float]:
        return _check_etas(values, allow_zero=False)

    def max_photons(self) -> int:
        return max(self.n_values)


class OptimizeConfig(OptimizedStateMixin, RunConfig):
    """optimize: 只输出最优态及其精度记录"""

    n: int = Field(ge=1)
    eta: float = Field(gt=0.0, le=1.0)

    def max_photons(self) -> int:
        return self.n


StateKind = Literal["optimal", "noon", "mixed"]


class StateSourceMixin(OptimizedStateMixin):
    """态来源: 态文件，或按 (N, η) 构造/优化"""

    state_file: Optional[str] = None
    state: StateKind = "optimal"
    n: Optional[int] = Field(default=None, ge=1)
    eta: float = Field(default=1.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_source(self):
        if self.state_file is None and self.n is None:
            raise ValueError("需要 --state-file 或 --n")
        if self.state_file is None and self.state == "optimal" and self.eta == 0.0:
            raise ValueError("η = 0 时无法优化输入态")
        return self


class WignerConfig(StateSourceMixin, RunConfig):
    """wigner: 全球面 Wigner 场与赤道截面"""

    equator_points: int = Field(default=720, ge=8)

    def max_photons(self) -> int:
        return self.n or 0


class LossBranchesConfig(StateSourceMixin, RunConfig):
    """loss-branches: 概率表与各分支的 Wigner 场"""

    lost: Optional[List[int]] = None
    min_probability: float = Field(default=0.0, ge=0.0, le=1.0)
    equator_points: int = Field(default=720, ge=8)

    @field_validator("lost")
    @classmethod
    def _non_negative(cls, values: Optional[List[int]]) -> Optional[List[int]]:
        if values is not None and any(L < 0 for L in values):
            raise ValueError(f"损失光子数必须非负: {values}")
        return values

    @model_validator(mode="after")
    def _check_lost_range(self) -> "LossBranchesConfig":
        if self.n is not None and self.lost is not None and max(self.lost) > self.n:
            raise ValueError(f"损失光子数 {max(self.lost)} 超过 N = {self.n}")
        return self

    def max_photons(self) -> int:
        return self.n or 0


class KernelConfig(RunConfig):
    """kernel: 精确核与渐近核剖面"""

    n_values: List[int] = Field(min_length=1)
    lost: List[int] = Field(min_length=1)
    theta_points: int = Field(default=2001, ge=16, description="[0, π] 上的采样点数")
    check_convolution: bool = Field(default=True, description="L = 0 时校验再生核恒等式")

    @model_validator(mode="after")
    def _check_pairs(self) -> "KernelConfig":
        for N, L in self.pairs():
            if N < 1 or L < 0 or L > N:
                raise ValueError(f"非法的 (N, L) 组合: ({N}, {L})")
        return self

    def pairs(self) -> List[Tuple[int, int]]:
        """逐项配对；只给一个值的一侧广播到另一侧的长度"""
        ns, ls = self.n_values, self.lost
        if len(ns) == 1:
            ns = ns * len(ls)
        if len(ls) == 1:
            ls = ls * len(ns)
        if len(ns) != len(ls):
            raise ValueError(f"--n 与 --lost 长度不一致: {len(ns)} ≠ {len(ls)}")
        return list(zip(ns, ls))

    def max_photons(self) -> int:
        return max(self.n_values)


def with_settings_defaults(config_cls, settings: Settings, **values):
    """以 Settings 中的优化器与输出配置补齐未给出的字段"""
    optimizer: OptimizerConfig = settings.optimizer
    defaults = {
        "seed": optimizer.seed,
        "out": settings.output.directory,
        "format": settings.output.format,
        "jobs": settings.concurrency.jobs,
    }
    if issubclass(config_cls, OptimizedStateMixin):
        defaults.update({
            "restarts": optimizer.restarts,
            "max_iters": optimizer.max_iters,
            "tol": optimizer.tol,
            "polish_rounds": optimizer.polish_rounds,
            "symmetric": optimizer.symmetric,
            "allow_phases": optimizer.allow_phases,
        })
    if "equator_points" in config_cls.model_fields:
        defaults["equator_points"] = settings.grid.equator_points
    if "min_probability" in config_cls.model_fields:
        defaults["min_probability"] = settings.output.min_probability
    defaults.update({key: value for key, value in values.items() if value is not None})
    return config_cls(**defaults)
