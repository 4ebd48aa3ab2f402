#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
最优态缓存
按 (N, η, seed) 把优化得到的态及其精度记录存成 JSON，供 wigner / loss-branches 复用。
文件里同时记下搜索参数，参数不同的缓存视为未命中。
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..quantum.metrology import OptimizerOptions, PrecisionRecord
from ..quantum.spin_space import SpinKet, SpinState, state_from_dict
from ..utils.exceptions import ConfigurationError
from ..utils.logger import LoggerMixin

# jobs 不影响结果，不进键
SEARCH_FIELDS = ("restarts", "max_iters", "tol", "symmetric", "allow_phases", "polish_rounds")


def search_key(options: OptimizerOptions) -> Dict[str, Any]:
    return options.model_dump(include=set(SEARCH_FIELDS))


class StateStore(LoggerMixin):
    """最优态文件缓存"""

    def __init__(self, directory: str):
        self.directory = Path(directory)

    def path_for(self, N: int, eta: float, seed: int) -> Path:
        return self.directory / f"state_N{N}_eta{eta:.12g}_seed{seed}.json"

    def save(self, state: SpinKet, record: PrecisionRecord, options: OptimizerOptions) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(state.n_photons, record.eta, options.seed)
        document = {
            "key": {"N": state.n_photons, "eta": record.eta, "seed": options.seed},
            "search": search_key(options),
            "state": state.to_dict(),
            "record": record.model_dump(mode="python"),
        }
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(json.dumps(document, indent=2, sort_keys=True) + "\n")
        self.logger.debug(f"已缓存最优态: {path}")
        return path

    def load(self, N: int, eta: float, options: OptimizerOptions) -> Optional[Tuple[SpinKet, PrecisionRecord]]:
        """缓存命中且搜索参数一致时返回 (态, 记录)，否则返回 None"""
        path = self.path_for(N, eta, options.seed)
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
            search = document["search"]
            state = SpinKet.from_dict(document["state"])
            record = PrecisionRecord.model_validate(document["record"])
        except (KeyError, TypeError, ValueError) as e:
            self.logger.warning(f"缓存文件损坏，忽略: {path} ({e})")
            return None
        if search != search_key(options):
            self.logger.info(f"缓存的搜索参数不同，重新优化: {path}")
            return None
        self.logger.info(f"命中最优态缓存: {path}")
        return state, record


def load_state_file(path: str) -> SpinState:
    """
    读取态文件

    既接受 StateStore 写出的文档(含 "state" 字段)，也接受 SpinKet/SpinDensity.to_dict() 的输出。
    """
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigurationError(f"态文件不存在: {file_path}")
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"态文件不是合法 JSON: {file_path}") from e
    if not isinstance(document, dict):
        raise ConfigurationError(f"态文件顶层必须是映射: {file_path}")
    return state_from_dict(document.get("state", document))
