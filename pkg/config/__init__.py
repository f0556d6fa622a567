"""
Configuration package for meetsense
"""

from .settings import Settings, settings

__all__ = ["Settings", "settings"]
