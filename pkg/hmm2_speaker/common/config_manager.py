# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains ConfigManager class for managing AppConfig objects
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import Dict, Optional, Tuple

from hmm2_speaker.common.errors import UsageError
from hmm2_speaker.common.app_config import AppConfig


class ConfigManager:
    """
    This class manages multiple AppConfig objects to ensure only
    one instance for a particular (app_key, config_dir, config_file).
    """

    _logger = logging.getLogger(__name__)
    _app_confs: Dict[Tuple, AppConfig] = {}


    @staticmethod
    def get_app_config(
        app_key: str = AppConfig.DEF_APP_KEY,
        config_dir: Optional[str] = None,
        config_file: Optional[str] = None
    ) -> AppConfig:
        if not app_key:
            s = f"ConfigManager.get_app_config(): Error - "\
                f"app_key [{app_key}] is empty!"
            ConfigManager._logger.error(s)
            raise UsageError(s)

        cache_key = (app_key.strip().lower(), config_dir, config_file)
        ac = ConfigManager._app_confs.get(cache_key)
        if ac is None:
            ac = AppConfig(
                app_key=app_key,
                config_dir=config_dir,
                config_file=config_file
            )
            ConfigManager._app_confs[cache_key] = ac
        return ac


    @staticmethod
    def clear():
        ConfigManager._app_confs.clear()
