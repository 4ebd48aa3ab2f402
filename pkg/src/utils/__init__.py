"""通用工具: 日志与异常"""

from .exceptions import ConfigurationError, DomainError, LossyInterferometryError, NumericalError
from .logger import LoggerMixin, get_logger, get_performance_logger, log_execution_time, setup_logger

__all__ = [
    "ConfigurationError",
    "DomainError",
    "LossyInterferometryError",
    "NumericalError",
    "LoggerMixin",
    "get_logger",
    "get_performance_logger",
    "log_execution_time",
    "setup_logger",
]
