"""
Application settings and configuration
Centralizes process-wide settings read from the environment
"""

import logging
import os
from pathlib import Path
from typing import Optional


class Settings:
    """
    Central application settings
    Algorithm defaults live in the pipeline config document (models.PipelineConfig);
    this class only holds what the environment controls.
    """

    # ════════════════════════════════════════════════════════════════
    # APP METADATA
    # ════════════════════════════════════════════════════════════════
    APP_NAME = "meetsense"
    DESCRIPTION = "Meeting-group detection from acoustic context and WiFi proximity"
    VERSION = "1.0.0"

    # ════════════════════════════════════════════════════════════════
    # ENVIRONMENT VARIABLES
    # ════════════════════════════════════════════════════════════════
    CONFIG_ENV_VAR = "MEETSENSE_CONFIG"
    LOG_LEVEL_ENV_VAR = "MEETSENSE_LOG_LEVEL"
    SEED_ENV_VAR = "MEETSENSE_SEED"

    # ════════════════════════════════════════════════════════════════
    # LOGGING
    # ════════════════════════════════════════════════════════════════
    LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
    DEFAULT_LOG_LEVEL = "INFO"

    # ════════════════════════════════════════════════════════════════
    # PLOTS
    # ════════════════════════════════════════════════════════════════
    PLOT_DPI = 120
    PLOT_FORMAT = "png"

    # ════════════════════════════════════════════════════════════════
    # DEVELOPMENT
    # ════════════════════════════════════════════════════════════════
    DEBUG = os.getenv("DEBUG", "False").lower() == "true"

    @classmethod
    def get_config_path(cls) -> Optional[Path]:
        """Default pipeline-config path from the environment (optional)"""
        value = os.getenv(cls.CONFIG_ENV_VAR)
        return Path(value) if value else None

    @classmethod
    def get_log_level(cls) -> int:
        """Root log level; DEBUG=true wins over MEETSENSE_LOG_LEVEL"""
        if os.getenv("DEBUG", "False").lower() == "true":
            return logging.DEBUG
        name = os.getenv(cls.LOG_LEVEL_ENV_VAR, cls.DEFAULT_LOG_LEVEL).upper()
        return getattr(logging, name, logging.INFO)

    @classmethod
    def get_default_seed(cls) -> Optional[int]:
        """Seed from the environment, if set"""
        value = os.getenv(cls.SEED_ENV_VAR)
        return int(value) if value else None


# Singleton instance
settings = Settings()
