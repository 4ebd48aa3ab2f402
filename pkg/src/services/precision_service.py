#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
精度服务模块
最优输入态搜索、精度扫描与输入态解析
"""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from ..config.run_config import OptimizedStateMixin, PrecisionSweepConfig
from ..config.settings import Settings
from ..quantum.metrology import (
    OptimizerOptions,
    PrecisionRecord,
    optimize_input_state,
    sweep_grid,
)
from ..quantum.spin_space import SpinKet, SpinState, maximally_mixed, noon_state
from ..tools.state_store import StateStore, load_state_file
from ..utils.logger import LoggerMixin, log_execution_time


class PrecisionService(LoggerMixin):
    """精度服务"""

    def __init__(self, settings: Settings, state_store: Optional[StateStore] = None):
        self.settings = settings
        self.state_store = state_store or StateStore(settings.output.state_dir)
        self.is_running = False
        self.optimizations = 0
        self.cache_hits = 0

        self.logger.info("精度服务初始化完成")

    def start(self):
        """启动精度服务"""
        if self.is_running:
            return
        self.is_running = True
        self.logger.info("精度服务启动成功")

    def stop(self):
        """停止精度服务"""
        if not self.is_running:
            return
        self.is_running = False
        self.logger.info("精度服务已停止")

    def optimizer_options(self, config: OptimizedStateMixin, seed: int, jobs: int = 1) -> OptimizerOptions:
        return OptimizerOptions(seed=seed, jobs=jobs, **config.optimizer_fields())

    def optimal_state(self, N: int, eta: float, options: OptimizerOptions,
                      with_wigner_bound: bool = True) -> Tuple[SpinKet, PrecisionRecord]:
        """
        取得 (N, η) 的最优态；先查缓存，未命中时优化并写入缓存
        """
        cached = self.state_store.load(N, eta, options)
        if cached is not None:
            self.cache_hits += 1
            state, record = cached
            if not with_wigner_bound or record.bound_wigner is not None:
                return state, record

        start_time = time.perf_counter()
        try:
            state, record = optimize_input_state(N, eta, options, with_wigner_bound=with_wigner_bound)
        except Exception as e:
            self.logger.error(f"优化 N={N}, η={eta} 失败: {e}")
            raise
        self.optimizations += 1
        self.log_performance(
            "optimize_input_state", time.perf_counter() - start_time,
            N=N, eta=eta, restarts=options.restarts,
        )
        self.state_store.save(state, record, options)
        return state, record

    @log_execution_time("precision_sweep")
    def sweep(self, config: PrecisionSweepConfig) -> Tuple[pd.DataFrame, List[PrecisionRecord]]:
        """
        对每个 (N, η) 单元优化输入态

        单元按 --jobs 并发执行，输出行始终按配置顺序排列。
        """
        cells = sweep_grid(config.n_values, config.eta_values)
        options = self.optimizer_options(config, config.seed)
        self.logger.info(f"精度扫描: {len(cells)} 个单元, jobs={config.jobs}")

        def run(cell):
            N, eta = cell
            return self.optimal_state(N, eta, options, with_wigner_bound=config.with_wigner_bound)[1]

        if config.jobs > 1:
            with ThreadPoolExecutor(max_workers=config.jobs) as executor:
                records = list(executor.map(run, cells))
        else:
            records = [run(cell) for cell in cells]

        unconverged = [(r.n_photons, r.eta) for r in records
                       if r.optimizer_meta is not None and not r.optimizer_meta.converged]
        if unconverged:
            self.logger.warning(f"以下单元未收敛(已在表中标记): {unconverged}")
        frame = pd.DataFrame([record.to_row() for record in records])
        return frame, records

    def resolve_state(self, config) -> SpinState:
        """按 --state-file / --state 解析命令的输入态"""
        if config.state_file is not None:
            state = load_state_file(config.state_file)
            self.logger.info(f"从文件读取输入态: {config.state_file}, N={state.n_photons}")
            return state
        if config.state == "noon":
            return noon_state(config.n)
        if config.state == "mixed":
            return maximally_mixed(config.n)
        options = self.optimizer_options(config, config.seed, jobs=config.jobs)
        return self.optimal_state(config.n, config.eta, options, with_wigner_bound=False)[0]

    def get_status(self) -> Dict[str, Any]:
        """获取服务状态"""
        return {
            "is_running": self.is_running,
            "optimizations": self.optimizations,
            "cache_hits": self.cache_hits,
            "state_dir": str(self.state_store.directory),
        }
