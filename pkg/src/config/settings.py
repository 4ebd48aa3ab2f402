#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置管理模块
管理数值计算、优化器、输出与日志的配置参数

加载顺序: 默认值 < 配置文件(JSON/YAML) < 环境变量 < 显式关键字参数
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

from ..utils.exceptions import ConfigurationError

# 加载环境变量
load_dotenv()


class GridConfig(BaseModel):
    """球面求积网格配置"""
    theta_factor: int = Field(default=2, ge=1, description="θ 方向 Gauss-Legendre 节点数 = theta_factor·(N+1)")
    phi_factor: int = Field(default=4, ge=1, description="φ 方向均匀节点数 = phi_factor·(N+1)")
    equator_points: int = Field(default=720, ge=8, description="赤道截面采样点数")


class OptimizerConfig(BaseModel):
    """输入态优化器配置"""
    restarts: int = Field(default=16, ge=1, description="多起点重启次数")
    max_iters: int = Field(default=20000, ge=1, description="单次单纯形搜索的最大迭代数")
    tol: float = Field(default=1e-10, gt=0, description="收敛容差(xatol/fatol)")
    seed: int = Field(default=0, ge=0, description="随机种子")
    symmetric: bool = Field(default=False, description="是否限制 c_m = c_{-m}")
    allow_phases: bool = Field(default=False, description="是否同时优化相位")
    polish_rounds: int = Field(default=3, ge=0, description="最优点再启动次数")


class OutputConfig(BaseModel):
    """结果输出配置"""
    directory: str = Field(default="results", description="结果文件目录")
    format: str = Field(default="csv", description="输出格式: csv/json")
    state_dir: str = Field(default="data/states", description="优化态缓存目录")
    float_format: str = Field(default="%.17g", description="CSV 浮点格式")
    min_probability: float = Field(default=0.0, ge=0.0, le=1.0, description="分支输出的最小概率")

    @field_validator("format")
    @classmethod
    def _check_format(cls, value: str) -> str:
        value = value.lower()
        if value not in ("csv", "json"):
            raise ValueError(f"不支持的输出格式: {value}")
        return value


class ConcurrencyConfig(BaseModel):
    """并发配置"""
    jobs: int = Field(default=1, ge=1, description="并发工作线程数")


class LoggingConfig(BaseModel):
    """日志配置"""
    level: str = Field(default="INFO", description="日志级别")
    log_dir: Optional[str] = Field(default="logs", description="日志目录，为空时不写文件")
    performance_logging: bool = Field(default=True, description="是否启用性能日志")


class Settings(BaseModel):
    """主配置类"""

    app_name: str = Field(default="lossy-interferometry", description="应用名称")
    debug: bool = Field(default=False, description="调试模式")

    grid: GridConfig = Field(default_factory=GridConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    concurrency: ConcurrencyConfig = Field(default_factory=ConcurrencyConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    def __init__(self, **kwargs):
        env_config = self._load_from_env()
        merged = _deep_merge(env_config, kwargs)
        super().__init__(**merged)

    @staticmethod
    def _load_from_env() -> Dict[str, Any]:
        """从环境变量加载配置"""
        config: Dict[str, Any] = {}

        if os.getenv("DEBUG"):
            config["debug"] = os.getenv("DEBUG").lower() == "true"

        logging_config = {}
        if os.getenv("LOSSY_LOG_LEVEL"):
            logging_config["level"] = os.getenv("LOSSY_LOG_LEVEL")
        if os.getenv("LOSSY_LOG_DIR"):
            logging_config["log_dir"] = os.getenv("LOSSY_LOG_DIR")
        if logging_config:
            config["logging"] = logging_config

        output_config = {}
        if os.getenv("LOSSY_OUTPUT_DIR"):
            output_config["directory"] = os.getenv("LOSSY_OUTPUT_DIR")
        if os.getenv("LOSSY_STATE_DIR"):
            output_config["state_dir"] = os.getenv("LOSSY_STATE_DIR")
        if output_config:
            config["output"] = output_config

        optimizer_config = {}
        try:
            if os.getenv("LOSSY_RESTARTS"):
                optimizer_config["restarts"] = int(os.getenv("LOSSY_RESTARTS"))
            if os.getenv("LOSSY_SEED"):
                optimizer_config["seed"] = int(os.getenv("LOSSY_SEED"))
            if os.getenv("LOSSY_MAX_ITERS"):
                optimizer_config["max_iters"] = int(os.getenv("LOSSY_MAX_ITERS"))
            if os.getenv("LOSSY_JOBS"):
                config["concurrency"] = {"jobs": int(os.getenv("LOSSY_JOBS"))}
        except ValueError as e:
            raise ConfigurationError(f"环境变量不是合法整数: {e}") from e
        if optimizer_config:
            config["optimizer"] = optimizer_config

        return config

    @property
    def log_level(self) -> str:
        """调试模式下强制 DEBUG"""
        return "DEBUG" if self.debug else self.logging.level.upper()

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典"""
        return self.model_dump()

    def save_to_file(self, filepath: Union[str, Path]) -> None:
        """保存配置到文件(按扩展名选择 JSON 或 YAML)"""
        path = Path(filepath)
        with open(path, 'w', encoding='utf-8') as f:
            if path.suffix.lower() in (".yaml", ".yml"):
                yaml.safe_dump(self.to_dict(), f, allow_unicode=True, sort_keys=True)
            else:
                json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)

    @classmethod
    def load_from_file(cls, filepath: Union[str, Path], **overrides) -> 'Settings':
        """从文件加载配置"""
        path = Path(filepath)
        if not path.exists():
            raise ConfigurationError(f"配置文件不存在: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            if path.suffix.lower() in (".yaml", ".yml"):
                config_data = yaml.safe_load(f) or {}
            else:
                config_data = json.load(f)
        if not isinstance(config_data, dict):
            raise ConfigurationError(f"配置文件顶层必须是映射: {path}")
        # 文件内容优先级低于环境变量
        env_config = cls._load_from_env()
        return cls(**_deep_merge(_deep_merge(config_data, env_config), overrides))


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        elif isinstance(value, BaseModel) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value.model_dump())
        else:
            merged[key] = value
    return merged


# 全局配置实例
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """获取全局配置实例"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reload_settings(filepath: Optional[Union[str, Path]] = None) -> Settings:
    """重新加载配置"""
    global _settings
    _settings = Settings.load_from_file(filepath) if filepath else Settings()
    return _settings
