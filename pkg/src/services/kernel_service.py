#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
卷积核服务模块
精确核与渐近核剖面、峰值归一化、半高全宽与宽度律汇总
"""

from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd

from ..config.settings import Settings
from ..quantum.loss_kernel_asymptotics import (
    KernelProfile,
    asymptotic_kernel_profile,
    exact_kernel_profile,
    fit_gaussian_width,
    full_width_half_maximum,
    gaussian_kernel_width,
    kernel_integral,
    kernel_legendre_coefficients,
)
from ..utils.logger import LoggerMixin, log_execution_time


class KernelService(LoggerMixin):
    """卷积核服务"""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.is_running = False
        self.profiles_computed = 0

        self.logger.info("卷积核服务初始化完成")

    def start(self):
        """启动卷积核服务"""
        if self.is_running:
            return
        self.is_running = True
        self.logger.info("卷积核服务启动成功")

    def stop(self):
        """停止卷积核服务"""
        if not self.is_running:
            return
        self.is_running = False
        self.logger.info("卷积核服务已停止")

    @staticmethod
    def _profile_frame(profile: KernelProfile) -> pd.DataFrame:
        frame = profile.to_frame()
        frame["peak_normalized"] = profile.peak_normalized().values
        return frame

    @staticmethod
    def _safe_width(function, profile: KernelProfile) -> float:
        # NumericalError(剖面未降到半高)或 curve_fit 不收敛
        try:
            return function(profile)
        except RuntimeError:
            return float("nan")

    @log_execution_time("kernel_profiles")
    def profiles(self, N: int, L: int, theta_points: int,
                 check_convolution: bool = True) -> Tuple[pd.DataFrame, Dict[str, Any]]:
        """
        一个 (N, L) 组合的剖面表与汇总

        Returns:
            (剖面表, 汇总行)
        """
        thetas = np.linspace(0.0, np.pi, theta_points)
        try:
            exact = exact_kernel_profile(N, L, thetas)
            frames: List[pd.DataFrame] = [self._profile_frame(exact)]
            summary: Dict[str, Any] = {
                "N": N,
                "L": L,
                "integral_exact": kernel_integral(N, L, "exact"),
                "expected_integral": (N + 1) / (N - L + 1),
                "fwhm_exact": self._safe_width(full_width_half_maximum, exact),
            }
            # 渐近式只在 N - L ≥ 1 且 L ≥ 1 时有意义
            if 0 < L < N:
                asymptotic = asymptotic_kernel_profile(N, L, thetas)
                frames.append(self._profile_frame(asymptotic))
                fwhm_asymptotic = self._safe_width(full_width_half_maximum, asymptotic)
                summary.update({
                    "fwhm_asymptotic": fwhm_asymptotic,
                    "fwhm_relative_difference": abs(fwhm_asymptotic - summary["fwhm_exact"]) / summary["fwhm_exact"],
                    "rescale_factor": asymptotic.rescale_factor,
                    "gaussian_width": gaussian_kernel_width(N, L),
                    "fitted_width_exact": self._safe_width(fit_gaussian_width, exact),
                    "fitted_width_asymptotic": self._safe_width(fit_gaussian_width, asymptotic),
                })
            if L == 0 and check_convolution:
                multipliers = kernel_legendre_coefficients(N, 0)
                summary["reproducing_error"] = float(np.max(np.abs(multipliers - 1.0)))
        except Exception as e:
            self.logger.error(f"计算 (N={N}, L={L}) 的卷积核失败: {e}")
            raise

        self.profiles_computed += 1
        self.logger.info(
            f"卷积核 N={N}, L={L}: 积分={summary['integral_exact']:.12g}, FWHM={summary['fwhm_exact']:.6g}"
        )
        return pd.concat(frames, ignore_index=True), summary

    def get_status(self) -> Dict[str, Any]:
        """获取服务状态"""
        return {
            "is_running": self.is_running,
            "profiles_computed": self.profiles_computed,
        }
