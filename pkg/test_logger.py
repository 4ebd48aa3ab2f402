#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志配置测试
"""

import logging

import pytest

from src.utils.logger import (
    BASE_LOGGER_NAME,
    LoggerMixin,
    get_logger,
    get_performance_logger,
    log_execution_time,
    setup_logger,
)


class _Worker(LoggerMixin):
    @log_execution_time("worker_step")
    def step(self, fail: bool = False) -> int:
        if fail:
            raise ValueError("boom")
        return 1


def _flush():
    for logger in (logging.getLogger(BASE_LOGGER_NAME), get_performance_logger()):
        for handler in logger.handlers:
            handler.flush()


def test_child_logger_names():
    assert get_logger().name == BASE_LOGGER_NAME
    assert get_logger("metrology").name == f"{BASE_LOGGER_NAME}.metrology"
    assert get_logger(f"{BASE_LOGGER_NAME}.cli").name == f"{BASE_LOGGER_NAME}.cli"
    assert _Worker().logger.name == f"{BASE_LOGGER_NAME}._Worker"


def test_setup_writes_log_files(tmp_path):
    log_dir = tmp_path / "logs"
    setup_logger(level="debug", log_dir=log_dir, console=False)
    worker = _Worker()
    worker.logger.error("失败示例")
    assert worker.step() == 1
    with pytest.raises(ValueError):
        worker.step(fail=True)
    worker.log_performance("sweep_cell", 0.5, N=4, eta=0.9)
    _flush()

    assert "失败示例" in (log_dir / "error.log").read_text(encoding="utf-8")
    performance = (log_dir / "performance.log").read_text(encoding="utf-8")
    assert "worker_step - Duration:" in performance
    assert "status=SUCCESS" in performance
    assert "status=FAILED - error=ValueError" in performance
    assert "sweep_cell - Duration: 0.500s - N=4 - eta=0.9" in performance


def test_setup_is_idempotent_and_follows_directory(tmp_path):
    first = tmp_path / "first"
    logger = setup_logger(log_dir=first, console=False)
    count = len(logger.handlers)
    assert setup_logger(level="WARNING", log_dir=first, console=False) is logger
    assert len(logger.handlers) == count
    assert logger.level == logging.WARNING

    second = tmp_path / "second"
    setup_logger(log_dir=second, console=False)
    assert len(logger.handlers) == count
    get_performance_logger().info("moved")
    _flush()
    assert "moved" in (second / "performance.log").read_text(encoding="utf-8")
    assert "moved" not in (first / "performance.log").read_text(encoding="utf-8")


def test_setup_without_files(tmp_path):
    logger = setup_logger(log_dir=None, console=False)
    assert logger.handlers == []
    assert get_performance_logger().handlers == []
