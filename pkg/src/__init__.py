"""
有损干涉仪相空间分析
"""

__version__ = "0.1.0"
