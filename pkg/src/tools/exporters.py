#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
结果导出工具
把 pandas 表写成带 '#' 元数据头的 CSV 或带 metadata 字段的 JSON

输出不含时间戳，相同配置与种子得到逐字节相同的文件。
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

from .. import __version__
from ..utils.exceptions import ConfigurationError
from ..utils.logger import LoggerMixin

SUPPORTED_FORMATS = ("csv", "json")


def _plain(value: Any) -> Any:
    """把 numpy 标量与数组转成 JSON 可序列化的 Python 对象"""
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


def _format_float(value: float, float_format: str) -> str:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return float_format % value


class ResultExporter(LoggerMixin):
    """结果文件写出器"""

    def __init__(self, directory: str, format: str = "csv", float_format: str = "%.17g"):
        if format not in SUPPORTED_FORMATS:
            raise ConfigurationError(f"不支持的输出格式: {format}")
        self.directory = Path(directory)
        self.format = format
        self.float_format = float_format

    def base_metadata(self, command: str, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        metadata: Dict[str, Any] = {"command": command, "version": __version__}
        if config is not None:
            metadata["config"] = config
        return metadata

    def write_table(self, name: str, frame: pd.DataFrame, metadata: Dict[str, Any],
                    footer: Optional[Dict[str, Any]] = None) -> Path:
        """
        写出一张表

        Args:
            name: 不带扩展名的文件名
            frame: 数据
            metadata: 头部元数据(配置回显、版本、网格尺寸、缩放因子等)
            footer: 可选的表尾汇总

        Returns:
            Path: 写出的文件路径
        """
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{name}.{self.format}"
        metadata = _plain(metadata)
        if self.format == "csv":
            text = self._render_csv(frame, metadata, footer)
        else:
            text = self._render_json(frame, metadata, footer)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        self.logger.info(f"已写出 {path} ({len(frame)} 行)")
        return path

    def _render_csv(self, frame: pd.DataFrame, metadata: Dict[str, Any],
                    footer: Optional[Dict[str, Any]]) -> str:
        lines = [f"# {key}: {json.dumps(metadata[key], sort_keys=True, ensure_ascii=False)}"
                 for key in sorted(metadata)]
        body = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
        text = "\n".join(lines) + "\n" + body
        if footer:
            rendered = []
            for key in sorted(footer):
                value = _plain(footer[key])
                if isinstance(value, float):
                    value = _format_float(value, self.float_format)
                rendered.append(f"# {key}: {value}")
            text += "\n".join(rendered) + "\n"
        return text

    def _render_json(self, frame: pd.DataFrame, metadata: Dict[str, Any],
                     footer: Optional[Dict[str, Any]]) -> str:
        document: Dict[str, Any] = {
            "metadata": metadata,
            "rows": _plain(frame.to_dict(orient="records")),
        }
        if footer:
            document["footer"] = _plain(footer)
        return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def write_document(self, name: str, document: Dict[str, Any]) -> Path:
        """写出任意 JSON 文档(例如最优态)，不受表格格式影响"""
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{name}.json"
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(json.dumps(_plain(document), indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        self.logger.info(f"已写出 {path}")
        return path


def read_csv_table(path: Path) -> pd.DataFrame:
    """读回带 '#' 头的 CSV"""
    return pd.read_csv(path, comment="#")


def read_metadata(path: Path) -> Dict[str, Any]:
    """解析 CSV 头部或 JSON 文档中的元数据"""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        if path.suffix == ".json":
            return json.load(f).get("metadata", {})
        metadata: Dict[str, Any] = {}
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            metadata[key] = json.loads(value)
        return metadata


def footer_lines(path: Path) -> List[str]:
    """CSV 表尾的 '#' 行"""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    tail: List[str] = []
    for line in reversed(lines):
        if not line.startswith("# "):
            break
        tail.append(line)
    return list(reversed(tail))
