#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
有损干涉仪相空间分析 - 命令行入口

子命令: precision-sweep, optimize, wigner, loss-branches, kernel
退出码: 0 成功, 2 配置错误, 3 数值失败
"""

import sys
from pathlib import Path
from typing import Callable, List, Optional

import click
from pydantic import ValidationError

# 添加项目根目录到Python路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src import __version__  # noqa: E402
from src.config.run_config import (  # noqa: E402
    KernelConfig,
    LossBranchesConfig,
    OptimizeConfig,
    PrecisionSweepConfig,
    RunConfig,
    WignerConfig,
    parse_float_list,
    parse_int_list,
    with_settings_defaults,
)
from src.config.settings import Settings, reload_settings  # noqa: E402
from src.core.run_manager import RunManager  # noqa: E402
from src.utils.exceptions import ConfigurationError, DomainError, NumericalError  # noqa: E402
from src.utils.logger import get_logger, setup_logger  # noqa: E402

EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

logger = get_logger("cli")


def _fail(ctx: click.Context, code: int, message: str):
    click.echo(f"错误: {message}", err=True)
    ctx.exit(code)


def _single_int(text: Optional[str], label: str) -> Optional[int]:
    if text is None:
        return None
    values = parse_int_list(text)
    if len(values) != 1:
        raise ConfigurationError(f"{label} 只接受一个整数: {text}")
    return values[0]


def _flag(value: bool) -> Optional[bool]:
    # 未给出的开关交给 Settings 决定
    return True if value else None


def common_options(func: Callable) -> Callable:
    """所有子命令共享的选项"""
    options = [
        click.option("--seed", type=int, default=None, help="随机种子"),
        click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default=None,
                     help="输出格式"),
        click.option("--out", default=None, help="输出目录"),
        click.option("--jobs", type=int, default=None, help="并发线程数"),
        click.option("--grid-theta", type=int, default=None, help="θ 方向 Gauss-Legendre 节点数"),
        click.option("--grid-phi", type=int, default=None, help="φ 方向均匀节点数"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def optimizer_options(func: Callable) -> Callable:
    """需要优化输入态的子命令共享的选项"""
    options = [
        click.option("--restarts", type=int, default=None, help="多起点重启次数"),
        click.option("--max-iters", type=int, default=None, help="单次搜索的最大迭代数"),
        click.option("--allow-phases", is_flag=True, default=False, help="同时优化振幅相位"),
        click.option("--symmetric", is_flag=True, default=False, help="限制 c_m = c_{-m}"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def state_options(func: Callable) -> Callable:
    """输入态来源选项"""
    options = [
        click.option("--state-file", default=None, help="态文件(JSON)"),
        click.option("--state", "state_kind", type=click.Choice(["optimal", "noon", "mixed"]),
                     default="optimal", show_default=True, help="未给出态文件时使用的输入态"),
        click.option("--equator-points", type=int, default=None, help="赤道截面采样点数"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _shared_values(seed, output_format, out, jobs, grid_theta, grid_phi) -> dict:
    return {
        "seed": seed,
        "format": output_format,
        "out": out,
        "jobs": jobs,
        "grid_theta": grid_theta,
        "grid_phi": grid_phi,
    }


def _execute(ctx: click.Context, build: Callable[[Settings], RunConfig],
             run: Callable[[RunManager, RunConfig], List[Path]]):
    """校验配置、执行命令并把异常映射为退出码"""
    settings: Settings = ctx.obj
    try:
        config = build(settings)
    except (ConfigurationError, DomainError) as e:
        _fail(ctx, EXIT_CONFIG_ERROR, str(e))
    except ValidationError as e:
        _fail(ctx, EXIT_CONFIG_ERROR, f"配置校验失败:\n{e}")

    manager = RunManager(settings)
    try:
        manager.start()
        paths = run(manager, config)
    except NumericalError as e:
        logger.error(f"数值失败: {e}")
        _fail(ctx, EXIT_NUMERICAL_ERROR, str(e))
    except (ConfigurationError, DomainError) as e:
        _fail(ctx, EXIT_CONFIG_ERROR, str(e))
    except (ValidationError, RuntimeError, ValueError) as e:
        # 计算中途的校验失败与 scipy 拟合失败都算数值失败
        logger.error(f"数值失败: {type(e).__name__}: {e}")
        _fail(ctx, EXIT_NUMERICAL_ERROR, str(e))
    else:
        logger.debug(f"运行状态: {manager.get_status()}")
    finally:
        manager.stop()

    for path in paths:
        click.echo(str(path))


@click.group()
@click.version_option(__version__, prog_name="lossy-interferometry")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON/YAML 配置文件")
@click.option("--log-level", default=None, help="覆盖配置中的日志级别")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], log_level: Optional[str]):
    """有损双模干涉仪的相空间与计量分析"""
    try:
        settings = reload_settings(config_path)
    except ConfigurationError as e:
        _fail(ctx, EXIT_CONFIG_ERROR, str(e))
    except ValidationError as e:
        _fail(ctx, EXIT_CONFIG_ERROR, f"配置校验失败:\n{e}")

    setup_logger(
        level=log_level or settings.log_level,
        log_dir=settings.logging.log_dir,
    )
    ctx.obj = settings


@cli.command("precision-sweep")
@click.option("--n", "n_text", required=True, help="光子数列表，例如 1-10 或 10,20,30")
@click.option("--eta", "eta_text", required=True, help="透射率列表，例如 0.5,0.9")
@click.option("--no-wigner-bound", is_flag=True, default=False, help="不计算 Wigner 导数下界")
@optimizer_options
@common_options
@click.pass_context
def precision_sweep(ctx, n_text, eta_text, no_wigner_bound, restarts, max_iters, allow_phases, symmetric,
                    seed, output_format, out, jobs, grid_theta, grid_phi):
    """对每个 (N, η) 优化输入态，输出 Fisher 信息与各个界"""
    def build(settings: Settings) -> RunConfig:
        return with_settings_defaults(
            PrecisionSweepConfig, settings,
            n_values=parse_int_list(n_text),
            eta_values=parse_float_list(eta_text),
            with_wigner_bound=not no_wigner_bound,
            restarts=restarts, max_iters=max_iters,
            allow_phases=_flag(allow_phases), symmetric=_flag(symmetric),
            **_shared_values(seed, output_format, out, jobs, grid_theta, grid_phi),
        )

    _execute(ctx, build, RunManager.run_precision_sweep)


@cli.command("optimize")
@click.option("--n", "n_text", required=True, help="光子数")
@click.option("--eta", type=float, required=True, help="透射率")
@optimizer_options
@common_options
@click.pass_context
def optimize(ctx, n_text, eta, restarts, max_iters, allow_phases, symmetric,
             seed, output_format, out, jobs, grid_theta, grid_phi):
    """只输出最优态及其精度记录"""
    def build(settings: Settings) -> RunConfig:
        return with_settings_defaults(
            OptimizeConfig, settings,
            n=_single_int(n_text, "--n"), eta=eta,
            restarts=restarts, max_iters=max_iters,
            allow_phases=_flag(allow_phases), symmetric=_flag(symmetric),
            **_shared_values(seed, output_format, out, jobs, grid_theta, grid_phi),
        )

    _execute(ctx, build, RunManager.run_optimize)


@cli.command("wigner")
@click.option("--n", "n_text", default=None, help="光子数")
@click.option("--eta", type=float, default=None, help="优化输入态时使用的透射率")
@state_options
@optimizer_options
@common_options
@click.pass_context
def wigner(ctx, n_text, eta, state_file, state_kind, equator_points, restarts, max_iters, allow_phases,
           symmetric, seed, output_format, out, jobs, grid_theta, grid_phi):
    """全球面 Wigner 场与赤道截面"""
    def build(settings: Settings) -> RunConfig:
        return with_settings_defaults(
            WignerConfig, settings,
            n=_single_int(n_text, "--n"), eta=eta,
            state_file=state_file, state=state_kind, equator_points=equator_points,
            restarts=restarts, max_iters=max_iters,
            allow_phases=_flag(allow_phases), symmetric=_flag(symmetric),
            **_shared_values(seed, output_format, out, jobs, grid_theta, grid_phi),
        )

    _execute(ctx, build, RunManager.run_wigner)


@cli.command("loss-branches")
@click.option("--n", "n_text", default=None, help="光子数")
@click.option("--eta", type=float, required=True, help="透射率")
@click.option("--lost", "lost_text", default=None, help="输出场的损失光子数列表，默认全部")
@click.option("--min-probability", type=float, default=None, help="未给出 --lost 时的最小分支概率")
@state_options
@optimizer_options
@common_options
@click.pass_context
def loss_branches(ctx, n_text, eta, lost_text, min_probability, state_file, state_kind, equator_points,
                  restarts, max_iters, allow_phases, symmetric,
                  seed, output_format, out, jobs, grid_theta, grid_phi):
    """损耗概率表与逐分支 Wigner 场"""
    def build(settings: Settings) -> RunConfig:
        return with_settings_defaults(
            LossBranchesConfig, settings,
            n=_single_int(n_text, "--n"), eta=eta,
            lost=parse_int_list(lost_text) if lost_text is not None else None,
            min_probability=min_probability,
            state_file=state_file, state=state_kind, equator_points=equator_points,
            restarts=restarts, max_iters=max_iters,
            allow_phases=_flag(allow_phases), symmetric=_flag(symmetric),
            **_shared_values(seed, output_format, out, jobs, grid_theta, grid_phi),
        )

    _execute(ctx, build, RunManager.run_loss_branches)


@cli.command("kernel")
@click.option("--n", "n_text", required=True, help="光子数列表")
@click.option("--lost", "lost_text", required=True, help="损失光子数列表，与 --n 逐项配对")
@click.option("--theta-points", type=int, default=None, help="[0, π] 上的采样点数")
@common_options
@click.pass_context
def kernel(ctx, n_text, lost_text, theta_points, seed, output_format, out, jobs, grid_theta, grid_phi):
    """精确核与渐近核剖面、峰值归一化与半高全宽汇总"""
    def build(settings: Settings) -> RunConfig:
        return with_settings_defaults(
            KernelConfig, settings,
            n_values=parse_int_list(n_text),
            lost=parse_int_list(lost_text),
            theta_points=theta_points,
            **_shared_values(seed, output_format, out, jobs, grid_theta, grid_phi),
        )

    _execute(ctx, build, RunManager.run_kernel)


if __name__ == "__main__":
    cli()
