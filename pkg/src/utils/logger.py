#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志工具模块

数值模块只通过 get_logger() 取得子记录器并输出 DEBUG 信息，
处理器只在命令行入口调用 setup_logger() 时安装。控制台日志写到标准错误，
标准输出留给写出的结果文件路径。

日志目录下的文件:
    lossy_interferometry.log  主日志，按天轮转
    error.log                 ERROR 及以上
    performance.log           命令与计算步骤的耗时
"""

import functools
import logging
import sys
import time
from logging.handlers import RotatingFileHandler, TimedRotatingFileHandler
from pathlib import Path
from typing import List, Optional, Tuple, Union

BASE_LOGGER_NAME = "lossy_interferometry"
PERFORMANCE_SUFFIX = "performance"

_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
_RECORD_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"
_PERF_FORMAT = "%(asctime)s - PERF - %(message)s"
_MB = 1024 * 1024


def _resolve_level(level: Union[int, str]) -> int:
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(str(level).upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def _close_handlers(logger: logging.Logger) -> None:
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def _file_handlers(log_path: Path) -> Tuple[List[logging.Handler], logging.Handler]:
    """主日志、错误日志与性能日志三个文件处理器"""
    formatter = logging.Formatter(_RECORD_FORMAT, datefmt=_DATE_FORMAT)

    main_handler = TimedRotatingFileHandler(
        log_path / f"{BASE_LOGGER_NAME}.log", when="midnight", backupCount=30, encoding="utf-8"
    )
    main_handler.setLevel(logging.DEBUG)

    error_handler = RotatingFileHandler(log_path / "error.log", maxBytes=10 * _MB, backupCount=5, encoding="utf-8")
    error_handler.setLevel(logging.ERROR)

    for handler in (main_handler, error_handler):
        handler.setFormatter(formatter)

    perf_handler = RotatingFileHandler(
        log_path / "performance.log", maxBytes=5 * _MB, backupCount=3, encoding="utf-8"
    )
    perf_handler.setLevel(logging.INFO)
    perf_handler.setFormatter(logging.Formatter(_PERF_FORMAT, datefmt=_DATE_FORMAT))
    return [main_handler, error_handler], perf_handler


def setup_logger(
    level: Union[int, str] = logging.INFO,
    log_dir: Optional[Union[str, Path]] = "logs",
    console: bool = True,
) -> logging.Logger:
    """
    安装包记录器的处理器

    同一进程内重复调用时，目标相同只更新级别；日志目录或标准错误流变化时先关闭旧处理器再重新安装

    Args:
        level: 日志级别
        log_dir: 日志目录，为 None 时不写文件
        console: 是否输出到标准错误

    Returns:
        logging.Logger: 包记录器
    """
    level = _resolve_level(level)
    logger = logging.getLogger(BASE_LOGGER_NAME)
    perf_logger = get_performance_logger()
    target = (str(Path(log_dir).resolve()) if log_dir is not None else None, sys.stderr if console else None)

    logger.setLevel(level)
    if getattr(logger, "_installed_target", None) == target:
        for handler in logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
                handler.setLevel(level)
        return logger

    _close_handlers(logger)
    _close_handlers(perf_logger)
    logger.propagate = False

    if console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(logging.Formatter(_RECORD_FORMAT, datefmt=_DATE_FORMAT))
        logger.addHandler(console_handler)

    perf_logger.setLevel(logging.INFO)
    perf_logger.propagate = False
    if log_dir is not None:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        handlers, perf_handler = _file_handlers(log_path)
        for handler in handlers:
            logger.addHandler(handler)
        perf_logger.addHandler(perf_handler)

    logger._installed_target = target
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    获取包记录器下的子记录器

    Args:
        name: 子记录器名称(通常为模块名)，为空时返回包记录器
    """
    if not name:
        return logging.getLogger(BASE_LOGGER_NAME)
    if name.startswith(BASE_LOGGER_NAME):
        return logging.getLogger(name)
    return logging.getLogger(f"{BASE_LOGGER_NAME}.{name}")


def get_performance_logger() -> logging.Logger:
    """性能日志记录器；不向包记录器传播"""
    return logging.getLogger(f"{BASE_LOGGER_NAME}.{PERFORMANCE_SUFFIX}")


def _performance_message(operation: str, duration: float, **fields) -> str:
    parts = [operation, f"Duration: {duration:.3f}s"]
    parts.extend(f"{key}={value}" for key, value in fields.items())
    return " - ".join(parts)


class LoggerMixin:
    """
    日志记录器混入类
    为服务、管理器与导出工具提供 self.logger 与性能日志
    """

    @property
    def logger(self) -> logging.Logger:
        if not hasattr(self, "_logger"):
            self._logger = get_logger(type(self).__name__)
        return self._logger

    def log_performance(self, operation: str, duration: float, **fields) -> None:
        """
        记录一条性能日志

        Args:
            operation: 操作名称
            duration: 耗时(秒)
            **fields: 附加字段，如 N、eta、写出的文件数
        """
        get_performance_logger().info(_performance_message(operation, duration, **fields))


def log_execution_time(operation_name: Optional[str] = None):
    """
    装饰器：把函数耗时写入性能日志，失败时附带异常并重新抛出

    Args:
        operation_name: 操作名称，默认使用函数名
    """
    def decorator(func):
        op_name = operation_name or func.__name__

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                get_performance_logger().info(_performance_message(
                    op_name, time.perf_counter() - start_time, status="FAILED", error=type(e).__name__
                ))
                raise
            get_performance_logger().info(
                _performance_message(op_name, time.perf_counter() - start_time, status="SUCCESS")
            )
            return result

        return wrapper
    return decorator
