#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
pytest 公共夹具
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到Python路径
sys.path.insert(0, str(Path(__file__).parent))

from src.quantum.spin_space import SpinDensity, SpinKet  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 运行时间较长的图形复现测试")


def random_ket(N: int, rng: np.random.Generator, real: bool = False) -> SpinKet:
    """随机纯态(复高斯向量归一化)"""
    amplitudes = rng.normal(size=N + 1)
    if not real:
        amplitudes = amplitudes + 1j * rng.normal(size=N + 1)
    return SpinKet.normalized(N, amplitudes)


def random_density(N: int, rng: np.random.Generator, rank: int = 3) -> SpinDensity:
    """随机混态 G G† / Tr(G G†)"""
    g = rng.normal(size=(N + 1, rank)) + 1j * rng.normal(size=(N + 1, rank))
    matrix = g @ g.conj().T
    return SpinDensity(N, matrix / np.trace(matrix).real)


def random_hermitian(N: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(N + 1, N + 1)) + 1j * rng.normal(size=(N + 1, N + 1))
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    """固定种子的随机数生成器"""
    return np.random.default_rng(20240917)


@pytest.fixture
def isolated_workspace(tmp_path, monkeypatch):
    """在临时目录中运行，输出、缓存与日志都落在这里"""
    monkeypatch.chdir(tmp_path)
    for name in ("LOSSY_OUTPUT_DIR", "LOSSY_STATE_DIR", "LOSSY_LOG_DIR", "LOSSY_LOG_LEVEL",
                 "LOSSY_RESTARTS", "LOSSY_SEED", "LOSSY_MAX_ITERS", "LOSSY_JOBS", "DEBUG"):
        monkeypatch.delenv(name, raising=False)
    return tmp_path
