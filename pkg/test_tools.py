#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
结果导出与态缓存测试
"""

import json
import math

import numpy as np
import pandas as pd
import pytest

from conftest import random_density
from src import __version__
from src.quantum.metrology import OptimizerOptions, PrecisionRecord
from src.quantum.spin_space import noon_state
from src.tools.exporters import ResultExporter, footer_lines, read_csv_table, read_metadata
from src.tools.state_store import StateStore, load_state_file
from src.utils.exceptions import ConfigurationError


def _frame():
    return pd.DataFrame({"N": [1, 2], "value": [0.1, 1.0 / 3.0]})


def test_csv_table_with_header_and_footer(tmp_path):
    exporter = ResultExporter(str(tmp_path), "csv")
    metadata = exporter.base_metadata("kernel", {"seed": 3})
    metadata["grid"] = {"n_theta": np.int64(8)}
    path = exporter.write_table("table", _frame(), metadata, footer={"probability_sum": 1.0, "cells": 2})

    assert path.name == "table.csv"
    text = path.read_text(encoding="utf-8")
    assert text.startswith("# command: \"kernel\"\n")
    header = read_metadata(path)
    assert header == {"command": "kernel", "config": {"seed": 3}, "grid": {"n_theta": 8}, "version": __version__}
    assert footer_lines(path) == ["# cells: 2", "# probability_sum: 1"]

    frame = read_csv_table(path)
    assert list(frame.columns) == ["N", "value"]
    # %.17g 保证浮点数逐位往返
    assert frame["value"].iloc[1] == pytest.approx(1.0 / 3.0, abs=1e-16)


def test_json_table(tmp_path):
    exporter = ResultExporter(str(tmp_path), "json")
    path = exporter.write_table("table", _frame(), {"command": "wigner"}, footer={"unconverged": 0})
    document = json.loads(path.read_text(encoding="utf-8"))
    assert document["metadata"] == {"command": "wigner"}
    assert document["rows"][1]["value"] == 1.0 / 3.0
    assert document["footer"] == {"unconverged": 0}
    assert read_metadata(path) == {"command": "wigner"}


def test_outputs_are_byte_identical(tmp_path):
    first = ResultExporter(str(tmp_path / "a"), "csv").write_table("t", _frame(), {"command": "x"})
    second = ResultExporter(str(tmp_path / "b"), "csv").write_table("t", _frame(), {"command": "x"})
    assert first.read_bytes() == second.read_bytes()


def test_exporter_rejects_unknown_format(tmp_path):
    with pytest.raises(ConfigurationError):
        ResultExporter(str(tmp_path), "xlsx")


def test_state_store_round_trip(tmp_path):
    store = StateStore(str(tmp_path / "states"))
    state = noon_state(3)
    record = PrecisionRecord.from_fisher(3, 0.9, 0.9 ** 3 * 9)
    options = OptimizerOptions(seed=5)
    path = store.save(state, record, options)
    assert path.name == "state_N3_eta0.9_seed5.json"

    loaded = store.load(3, 0.9, options)
    assert loaded is not None
    loaded_state, loaded_record = loaded
    np.testing.assert_array_equal(loaded_state.amplitudes, state.amplitudes)
    assert loaded_record.fisher == record.fisher
    assert store.load(3, 0.9, OptimizerOptions(seed=6)) is None
    # 并发线程数不影响结果，仍然命中
    assert store.load(3, 0.9, OptimizerOptions(seed=5, jobs=4)) is not None

    # 态文件既可以是缓存文档，也可以是裸的 to_dict
    assert load_state_file(str(path)).n_photons == 3


def test_state_store_misses_on_different_search(tmp_path):
    """低成本搜索的缓存不能顶替更充分的搜索"""
    store = StateStore(str(tmp_path))
    cheap = OptimizerOptions(seed=0, restarts=1, max_iters=5)
    store.save(noon_state(4), PrecisionRecord.from_fisher(4, 0.8, 1.0), cheap)
    assert store.load(4, 0.8, cheap) is not None
    thorough = OptimizerOptions(seed=0, restarts=6, max_iters=4000, allow_phases=True)
    assert store.load(4, 0.8, thorough) is None
    assert store.load(4, 0.8, cheap.model_copy(update={"symmetric": True})) is None


def test_state_store_ignores_corrupt_files(tmp_path):
    store = StateStore(str(tmp_path))
    store.path_for(2, 0.5, 0).write_text('{"state": {}}', encoding="utf-8")
    assert store.load(2, 0.5, OptimizerOptions()) is None


def test_infinite_precision_survives_cache(tmp_path):
    store = StateStore(str(tmp_path))
    record = PrecisionRecord.from_fisher(2, 0.5, 0.0)
    store.save(noon_state(2), record, OptimizerOptions())
    _, loaded = store.load(2, 0.5, OptimizerOptions())
    assert math.isinf(loaded.delta_phi)


def test_load_state_file_errors(tmp_path, rng):
    with pytest.raises(ConfigurationError):
        load_state_file(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_state_file(str(broken))
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_state_file(str(listing))

    bare = tmp_path / "density.json"
    rho = random_density(2, rng)
    bare.write_text(json.dumps(rho.to_dict()), encoding="utf-8")
    np.testing.assert_allclose(load_state_file(str(bare)).matrix, rho.matrix, atol=1e-15)
