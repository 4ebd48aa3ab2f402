#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
异常定义模块
数值库与命令行共用的异常层次
"""


class LossyInterferometryError(Exception):
    """所有库内异常的基类"""


class DomainError(LossyInterferometryError, ValueError):
    """参数超出定义域(例如 |m| > j, L > N, η ∉ [0, 1])"""


class NumericalError(LossyInterferometryError, RuntimeError):
    """数值断言失败(虚部残差过大、纯度漂移、非有限值等)"""


class ConfigurationError(LossyInterferometryError, ValueError):
    """运行配置无效，在计算开始前抛出"""
