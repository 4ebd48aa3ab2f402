#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
运行管理器
持有各个服务，把命令行子命令分派成计算与结果文件
"""

import time
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd

from ..config.run_config import (
    KernelConfig,
    LossBranchesConfig,
    OptimizeConfig,
    PrecisionSweepConfig,
    RunConfig,
    WignerConfig,
)
from ..config.settings import Settings
from ..services.kernel_service import KernelService
from ..services.phase_space_service import PhaseSpaceService
from ..services.precision_service import PrecisionService
from ..tools.exporters import ResultExporter
from ..tools.state_store import StateStore
from ..utils.logger import LoggerMixin, log_execution_time


class RunManager(LoggerMixin):
    """运行管理器"""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.is_running = False
        self.commands_run = 0

        # 初始化服务
        self.state_store = StateStore(settings.output.state_dir)
        self.precision_service = PrecisionService(settings, self.state_store)
        self.phase_space_service = PhaseSpaceService(settings)
        self.kernel_service = KernelService(settings)

        self.logger.info("运行管理器初始化完成")

    @log_execution_time("run_manager_start")
    def start(self):
        """启动运行管理器"""
        if self.is_running:
            self.logger.warning("运行管理器已在运行")
            return

        try:
            self.precision_service.start()
            self.phase_space_service.start()
            self.kernel_service.start()
            self.is_running = True
            self.logger.info("运行管理器启动成功")
        except Exception as e:
            self.logger.error(f"启动运行管理器失败: {e}")
            raise

    def stop(self):
        """停止运行管理器"""
        if not self.is_running:
            return

        try:
            self.kernel_service.stop()
            self.phase_space_service.stop()
            self.precision_service.stop()
            self.is_running = False
            self.logger.info("运行管理器已停止")
        except Exception as e:
            self.logger.error(f"停止运行管理器时出错: {e}")

    def _exporter(self, config: RunConfig) -> ResultExporter:
        return ResultExporter(config.out, config.format, self.settings.output.float_format)

    def _timed(self, command: str, func, config: RunConfig) -> List[Path]:
        if not self.is_running:
            raise RuntimeError("运行管理器未启动")
        self.logger.info(f"执行命令: {command}")
        start_time = time.perf_counter()
        try:
            paths = func(config)
        except Exception as e:
            self.logger.error(f"命令 {command} 失败: {e}")
            raise
        duration = time.perf_counter() - start_time
        self.commands_run += 1
        self.log_performance("command_execution", duration, command=command, files=len(paths))
        self.logger.info(f"命令 {command} 完成，耗时: {duration:.2f}秒，写出 {len(paths)} 个文件")
        return paths

    def run_precision_sweep(self, config: PrecisionSweepConfig) -> List[Path]:
        return self._timed("precision-sweep", self._precision_sweep, config)

    def run_optimize(self, config: OptimizeConfig) -> List[Path]:
        return self._timed("optimize", self._optimize, config)

    def run_wigner(self, config: WignerConfig) -> List[Path]:
        return self._timed("wigner", self._wigner, config)

    def run_loss_branches(self, config: LossBranchesConfig) -> List[Path]:
        return self._timed("loss-branches", self._loss_branches, config)

    def run_kernel(self, config: KernelConfig) -> List[Path]:
        return self._timed("kernel", self._kernel, config)

    def _precision_sweep(self, config: PrecisionSweepConfig) -> List[Path]:
        exporter = self._exporter(config)
        frame, records = self.precision_service.sweep(config)
        metadata = exporter.base_metadata("precision-sweep", config.echo())
        metadata["cells"] = len(records)
        footer = {"unconverged": sum(
            1 for record in records if record.optimizer_meta is not None and not record.optimizer_meta.converged
        )}
        return [exporter.write_table("precision_sweep", frame, metadata, footer)]

    def _optimize(self, config: OptimizeConfig) -> List[Path]:
        exporter = self._exporter(config)
        options = self.precision_service.optimizer_options(config, config.seed, jobs=config.jobs)
        state, record = self.precision_service.optimal_state(config.n, config.eta, options)
        stem = f"optimal_state_N{config.n}_eta{config.eta:.12g}_seed{config.seed}"
        document = {
            "metadata": exporter.base_metadata("optimize", config.echo()),
            "state": state.to_dict(),
            "record": record.model_dump(mode="python"),
        }
        return [exporter.write_document(stem, document)]

    def _describe_state(self, config) -> Dict[str, Any]:
        if config.state_file is not None:
            return {"source": "file", "path": config.state_file}
        return {"source": config.state, "N": config.n, "eta": config.eta, "seed": config.seed}

    def _wigner(self, config: WignerConfig) -> List[Path]:
        exporter = self._exporter(config)
        state = self.precision_service.resolve_state(config)
        grid = self.phase_space_service.grid_for(state.n_photons, config.grid_theta, config.grid_phi)
        _, field_frame, cut_frame, field_info = self.phase_space_service.wigner(state, grid, config.equator_points)

        metadata = exporter.base_metadata("wigner", config.echo())
        metadata["state"] = self._describe_state(config)
        metadata["field"] = field_info
        return [
            exporter.write_table("wigner_field", field_frame, metadata),
            exporter.write_table("wigner_equator", cut_frame, metadata),
        ]

    def _loss_branches(self, config: LossBranchesConfig) -> List[Path]:
        exporter = self._exporter(config)
        state = self.precision_service.resolve_state(config)
        grids = {}
        if config.grid_theta is not None or config.grid_phi is not None:
            grids[state.n_photons] = self.phase_space_service.grid_for(
                state.n_photons, config.grid_theta, config.grid_phi)
        table, branches, ensemble = self.phase_space_service.loss_branches(
            state, config.eta, config.lost, config.min_probability, grids,
            config.equator_points, jobs=config.jobs,
        )

        metadata = exporter.base_metadata("loss-branches", config.echo())
        metadata["state"] = self._describe_state(config)
        metadata["N"] = ensemble.n_input
        metadata["eta"] = ensemble.eta
        footer = {"probability_sum": float(table["probability"].sum())}
        paths = [exporter.write_table("loss_probabilities", table, metadata, footer)]
        for L, field_frame, cut_frame, info in branches:
            branch_metadata = dict(metadata, branch=info)
            paths.append(exporter.write_table(f"branch_L{L}_field", field_frame, branch_metadata))
            paths.append(exporter.write_table(f"branch_L{L}_equator", cut_frame, branch_metadata))
        if config.format == "json":
            # 完整系综，包含全部 L 分支的密度矩阵
            paths.append(exporter.write_document("loss_ensemble", {"metadata": metadata, **ensemble.to_dict()}))
        return paths

    def _kernel(self, config: KernelConfig) -> List[Path]:
        exporter = self._exporter(config)
        frames, summaries = [], []
        for N, L in config.pairs():
            frame, summary = self.kernel_service.profiles(N, L, config.theta_points, config.check_convolution)
            frames.append(frame)
            summaries.append(summary)

        metadata = exporter.base_metadata("kernel", config.echo())
        metadata["rescale_factors"] = {
            f"{s['N']},{s['L']}": s.get("rescale_factor", 1.0) for s in summaries
        }
        return [
            exporter.write_table("kernel_profiles", pd.concat(frames, ignore_index=True), metadata),
            exporter.write_table("kernel_summary", pd.DataFrame(summaries), metadata),
        ]

    def get_status(self) -> Dict[str, Any]:
        """获取状态信息"""
        return {
            "is_running": self.is_running,
            "commands_run": self.commands_run,
            "services": {
                "precision_service": self.precision_service.get_status(),
                "phase_space_service": self.phase_space_service.get_status(),
                "kernel_service": self.kernel_service.get_status(),
            },
        }
