#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
相空间服务模块
Wigner 场、赤道截面与损耗分支
"""

from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..config.settings import Settings
from ..quantum.loss_channel import LossEnsemble, full_loss_ensemble
from ..quantum.spin_space import SpinState, as_density
from ..quantum.wigner_phase_space import (
    SphereGrid,
    WignerField,
    azimuthal_spectrum,
    equator_cut,
    wigner_function,
)
from ..utils.exceptions import DomainError
from ..utils.logger import LoggerMixin, log_execution_time


class PhaseSpaceService(LoggerMixin):
    """相空间服务"""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.is_running = False
        self.fields_computed = 0

        self.logger.info("相空间服务初始化完成")

    def start(self):
        """启动相空间服务"""
        if self.is_running:
            return
        self.is_running = True
        self.logger.info("相空间服务启动成功")

    def stop(self):
        """停止相空间服务"""
        if not self.is_running:
            return
        self.is_running = False
        self.logger.info("相空间服务已停止")

    def grid_for(self, N: int, grid_theta: Optional[int] = None, grid_phi: Optional[int] = None) -> SphereGrid:
        """默认网格按 Settings 中的倍数选取；给出覆盖值时按覆盖值构造并检查精确性"""
        grid_config = self.settings.grid
        if grid_theta is None and grid_phi is None:
            return SphereGrid.for_photons(N, grid_config.theta_factor, grid_config.phi_factor)
        default = SphereGrid.for_photons(N, grid_config.theta_factor, grid_config.phi_factor)
        return SphereGrid.create(
            grid_theta if grid_theta is not None else default.n_theta,
            grid_phi if grid_phi is not None else default.n_phi,
            N,
        )

    def field_metadata(self, field: WignerField) -> Dict[str, Any]:
        metadata = field.metadata()
        metadata["expected_integral"] = 4.0 * np.pi / (field.n_photons + 1)
        return metadata

    def equator_frame(self, state: SpinState, n_points: int) -> Tuple[pd.DataFrame, Dict[str, Any]]:
        """赤道截面及其主导方位角模式"""
        phis, values = equator_cut(state, n_points)
        spectrum = azimuthal_spectrum(values)
        frame = pd.DataFrame({"phi": phis, "value": values})
        dominant = int(np.argmax(spectrum[1:]) + 1) if spectrum.size > 1 else 0
        summary = {
            "equator_points": n_points,
            "dominant_mode": dominant,
            "dominant_amplitude": float(spectrum[dominant]) if dominant else 0.0,
        }
        return frame, summary

    @log_execution_time("wigner_field")
    def wigner(self, state: SpinState, grid: SphereGrid, equator_points: int):
        """
        计算全球面场与赤道截面

        Returns:
            (field, 场表, 截面表, 元数据)
        """
        density = as_density(state)
        try:
            field = wigner_function(density, grid)
        except Exception as e:
            self.logger.error(f"计算 Wigner 场失败: {e}")
            raise
        self.fields_computed += 1
        cut, cut_summary = self.equator_frame(density, equator_points)
        metadata = self.field_metadata(field)
        metadata.update(cut_summary)
        self.logger.info(
            f"N={field.n_photons} Wigner 场: 积分={metadata['integral']:.12g}, "
            f"范围=[{metadata['min']:.6g}, {metadata['max']:.6g}]"
        )
        return field, field.to_frame(), cut, metadata

    @log_execution_time("loss_branches")
    def loss_branches(self, state: SpinState, eta: float, lost: Optional[List[int]],
                      min_probability: float, grids: Dict[int, SphereGrid], equator_points: int,
                      jobs: int = 1):
        """
        条件损耗分支

        Returns:
            (概率表, [(L, 场表, 截面表, 元数据)], 集合)
        """
        ensemble: LossEnsemble = full_loss_ensemble(state, eta, jobs=jobs)
        N = ensemble.n_input
        if lost is not None and max(lost) > N:
            raise DomainError(f"损失光子数 {max(lost)} 超过 N = {N}")

        probabilities = ensemble.probabilities
        ranking = np.argsort(-probabilities, kind="stable")
        rank = np.empty(N + 1, dtype=int)
        rank[ranking] = np.arange(1, N + 2)
        table = pd.DataFrame({
            "L": np.arange(N + 1),
            "probability": probabilities,
            "rank": rank,
        })

        selected = lost if lost is not None else [b.n_lost for b in ensemble.significant(min_probability)]
        branches = []
        for L in selected:
            branch = ensemble.branch(L)
            if branch.probability == 0.0:
                self.logger.warning(f"L={L} 分支概率为零，跳过")
                continue
            n_out = branch.n_photons
            grid = grids.get(n_out) or SphereGrid.for_photons(
                n_out, self.settings.grid.theta_factor, self.settings.grid.phi_factor)
            field = wigner_function(branch.state, grid)
            cut, cut_summary = self.equator_frame(branch.state, equator_points)
            metadata = self.field_metadata(field)
            metadata.update(cut_summary)
            metadata.update({"L": L, "probability": branch.probability})
            branches.append((L, field.to_frame(), cut, metadata))
            self.fields_computed += 1
        return table, branches, ensemble

    def get_status(self) -> Dict[str, Any]:
        """获取服务状态"""
        return {
            "is_running": self.is_running,
            "fields_computed": self.fields_computed,
        }
