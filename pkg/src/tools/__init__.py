#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
输入输出工具模块
"""

from .exporters import ResultExporter, read_csv_table, read_metadata
from .state_store import StateStore, load_state_file

__all__ = ['ResultExporter', 'StateStore', 'load_state_file', 'read_csv_table', 'read_metadata']
