"""配置包"""

from .run_config import (
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
from .settings import Settings, get_settings, reload_settings

__all__ = [
    "KernelConfig",
    "LossBranchesConfig",
    "OptimizeConfig",
    "PrecisionSweepConfig",
    "RunConfig",
    "Settings",
    "WignerConfig",
    "get_settings",
    "parse_float_list",
    "parse_int_list",
    "reload_settings",
    "with_settings_defaults",
]
