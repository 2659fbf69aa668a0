# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains AppConfig class representing the configuration of
a speaker identification application: feature analysis, model training,
identification protocol, synthetic corpus and benchmark setups.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


from enum import Enum
import os
from os.path import exists
from pathlib import Path
from typing import Optional, Union, Dict, Tuple
import logging
import toml
from importlib.resources import read_text

from hmm2_speaker.common.errors import UsageError



class ConfigType(Enum):
    Apps = "apps"
    FeatureSetups = "feature_setups"
    TrainSetups = "train_setups"
    SpeakerSetups = "speaker_setups"
    SynthSetups = "synth_setups"
    BenchSetups = "bench_setups"



class ConfigKey(Enum):
    APP_NAME = "app_name"
    NAME = "name"
    TYPE = "type"
    VERSION = "version"
    LOG_LEVEL = "log_level"
    FEATURE_SETUP = "feature_setup"
    TRAIN_SETUP = "train_setup"
    SPEAKER_SETUP = "speaker_setup"
    SYNTH_SETUP = "synth_setup"
    BENCH_SETUP = "bench_setup"



# app item key -> setup root it references
SETUP_REFS: Dict[ConfigType, ConfigKey] = {
    ConfigType.FeatureSetups: ConfigKey.FEATURE_SETUP,
    ConfigType.TrainSetups: ConfigKey.TRAIN_SETUP,
    ConfigType.SpeakerSetups: ConfigKey.SPEAKER_SETUP,
    ConfigType.SynthSetups: ConfigKey.SYNTH_SETUP,
    ConfigType.BenchSetups: ConfigKey.BENCH_SETUP,
}



class AppConfig:
    """
    This class represents the overall configuration loaded from a
    directory of TOML files, and its instance represents one application
    item, i.e. the [apps.<group>.<item>] section together with the setup
    sections it references.

    The bootstrapping priority is the following:

    1) input custom directory (and optional file)
    2) .hmm2_speaker/conf subdir under current directory
    3) .hmm2_speaker/conf subdir under user home directory
    4) conf subdir under hmm2_speaker library installation root dir

        >>> from hmm2_speaker.common import AppConfig
        >>> ac = AppConfig("group_def.speaker_id")
        >>> ac.get_setup(ConfigType.TrainSetups)["n_states"]
        5
    """

    DEF_CONF_LIB_PATH = "hmm2_speaker.conf"
    DEF_CONF_FILE = "app_config.toml"
    DEF_CONF_DIR = ".hmm2_speaker/conf/"
    DEF_APP_KEY = "group_def.speaker_id"
    DEF_LOG_LEVEL = "warning"

    T_DEFAULT = "default"
    T_DEF = "_def"

    _logger = logging.getLogger(__name__)


    def __init__(
        self,
        app_key: str = DEF_APP_KEY,
        config_dir: Optional[Union[str, None]] = None,
        config_file: Optional[Union[str, None]] = None
    ):
        """
        Create app specific AppConfig object.

        Args:
            app_key: A string representing the application; it can have
                the format of <app_group>.<application> ('<', '>' not
                included)
            config_dir: directory path string for custom config load
            config_file: file name string for custom config load
        """
        self.logger = AppConfig._logger
        self.config_path, self.configs = AppConfig.load_configs(
                config_dir, config_file)

        self.app_key, self.app_config = AppConfig.get_group_item_config(
                app_key.strip().lower(), ConfigType.Apps.value, self.configs)
        if not self.app_config:
            s = f"AppConfig.init(): Error - app [{app_key}] is not "\
                f"configured in [{self.config_path}]!"
            self.logger.error(s)
            raise UsageError(s)

        self.app_group, self.app_item = AppConfig.split_group_key(
                self.app_key)
        self.app_name = self.app_config.get(ConfigKey.APP_NAME.value,
                self.app_key.replace('.', '_'))
        self.name = self.app_config.get(ConfigKey.NAME.value, self.app_name)
        self.version = self.app_config.get(ConfigKey.VERSION.value, "")
        apps_root: Dict = self.configs.get(ConfigType.Apps.value, {})
        self.log_level = self.app_config.get(
                ConfigKey.LOG_LEVEL.value,
                apps_root.get(ConfigKey.LOG_LEVEL.value,
                        AppConfig.DEF_LOG_LEVEL))

        self.setups: Dict[ConfigType, Dict] = {}
        for root, ref_key in SETUP_REFS.items():
            # roots absent from a custom file fall back to class defaults
            if root.value not in self.configs:
                self.setups[root] = {}
                continue
            ref = self.app_config.get(ref_key.value, AppConfig.T_DEFAULT)
            _, d = AppConfig.get_group_item_config(
                    ref, root.value, self.configs)
            self.setups[root] = dict(d)

        self.logger.debug(
            f"AppConfig.init(): App_key [{self.app_key}]; Config_path "\
            f"[{self.config_path}]; Setups => {self.setups}."
        )


    @staticmethod
    def load_configs(
        config_dir: Optional[Union[str, None]] = None,
        config_file: Optional[Union[str, None]] = None
    ) -> Tuple[str, Dict]:
        """
        Load configurations from input configuration directory and file if
        supplied, or load them based on bootstrapping priorities.

        Args:
            config_dir (str): Configuration files directory.
            config_file (str): Configuration file name. If it is none or
                empty, all toml files of the directory are merged.

        Returns:
            Tuple[str, Dict]: path the configurations are loaded from and
                the dict of all loaded configurations.

        Raises:
            UsageError: If an explicit config directory is missing.
            ValueError: If a config file is malformed.
        """
        if config_dir:
            if not exists(config_dir):
                s = f"AppConfig.load_configs(): Error - config_dir "\
                    f"[{config_dir}] doesn't exist!"
                AppConfig._logger.error(s)
                raise UsageError(s)
            configs = AppConfig._load_toml_files(config_dir, config_file)
            if configs:
                return (os.path.abspath(config_dir), configs)

        candidates = [
            os.path.abspath(AppConfig.DEF_CONF_DIR),
            os.path.join(Path.home(), AppConfig.DEF_CONF_DIR),
        ]
        for candidate in candidates:
            configs = AppConfig._load_toml_files(candidate)
            AppConfig._logger.debug(
                f"AppConfig.load_configs(): Probed [{candidate}]; "\
                f"Found keys [{list(configs.keys())}]."
            )
            if configs:
                return (candidate, configs)

        return (AppConfig.DEF_CONF_LIB_PATH,
                AppConfig.load_default_configs())


    @staticmethod
    def _load_toml_files(
        config_dir: str,
        config_file: Optional[str] = None
    ) -> Dict:
        rd = {}
        files_tsd = {}
        config_dir = os.path.abspath(config_dir.strip())
        if not exists(config_dir):
            return rd

        if config_file is not None and config_file.strip():
            config_file_path = os.path.join(config_dir, config_file)
            try:
                with open(config_file_path, 'r') as f:
                    rd = toml.load(f)
            except (OSError, toml.TomlDecodeError) as e:
                raise ValueError(
                    f"AppConfig._load_toml_files(): Cannot load "\
                    f"file [{config_file_path}], check format! "\
                    f"Error - {e}!"
                )
            return rd

        toml_files = sorted(
            f for f in os.listdir(config_dir) if f.lower().endswith(".toml")
        )
        for toml_file in toml_files:
            config_file_path = os.path.join(config_dir, toml_file)
            with open(config_file_path, 'r') as f:
                try:
                    toml_dict = toml.load(f)
                except toml.TomlDecodeError as e:
                    raise ValueError(
                        f"AppConfig._load_toml_files(): Cannot load "\
                        f"file [{config_file_path}], check format! "\
                        f"Error - {e}!"
                    )
            file_ts = os.path.getmtime(config_file_path)
            for key, value in toml_dict.items():
                key = key.strip().lower()
                if key not in rd or file_ts > files_tsd[key]:
                    rd[key] = value
                    files_tsd[key] = file_ts

        AppConfig._logger.info(
            f"AppConfig._load_toml_files(): Loaded configuration from "\
            f"directory [{config_dir}]; Loaded files => {toml_files}."
        )
        return rd


    @staticmethod
    def load_default_configs() -> Dict:
        """
        Load default configuration from library.

        Returns:
            dict: loaded configuration as a dictionary
        """
        config_file = read_text(
            AppConfig.DEF_CONF_LIB_PATH,
            AppConfig.DEF_CONF_FILE
        )
        return toml.loads(config_file)


    @staticmethod
    def get_group_item_config(
        group_item_key: str,
        root_key: str,
        configs: Dict
    ) -> Tuple[str, Dict]:
        """
        Get sub configuration of the section <root>.<group>.<item>.

        Args:
            group_item_key (str): string in form of <group_key>.<item_key>
                or a bare <item_key> searched across groups.
            root_key (str): top level configuration section key, e.g.,
                "apps", "train_setups"
            configs (Dict): overall configuration dictionary

        Returns:
            Tuple[str, dict]: matched key in form group_key.item_key and
                the matched section ({} when nothing matches).

        Raises:
            ValueError: If root_key is missing from configs.
        """
        root_key = root_key.strip().lower()
        if configs.get(root_key) is None:
            s = f"AppConfig.get_group_item_config(): Error "\
                f"- [{root_key}] is missing!"
            AppConfig._logger.error(s)
            raise ValueError(s)

        gk, ik = AppConfig.split_group_key(group_item_key)
        if not ik:
            return ('', {})
        if not gk:
            return AppConfig.search_key_by_group(ik, root_key, configs)

        group = configs[root_key].get(gk)
        if isinstance(group, dict) and isinstance(group.get(ik), dict):
            return (f"{gk}.{ik}", group[ik])
        return (f"{gk}.{ik}", {})


    @staticmethod
    def search_key_by_group(key: str, top_key: str, configs: Dict) \
        -> Tuple[str, Dict]:
        """
        Search sections of configs dictionary with the structure
        top_key: { group_key: { key: {} } }. A match in a default group
        ('_def' or 'default' in its name) wins over the first other match
        in sorted group order.

        Returns:
            A tuple of group_key.key and the matched section.
        """
        default_match = ('', {})
        first_match = ('', {})
        groups: Dict = configs.get(top_key, {})
        for group_key in sorted(groups.keys()):
            group = groups[group_key]
            if not isinstance(group, dict) or \
                    not isinstance(group.get(key), dict):
                continue
            if AppConfig.T_DEF in group_key or \
                    AppConfig.T_DEFAULT in group_key:
                if default_match == ('', {}):
                    default_match = (f"{group_key}.{key}", group[key])
            elif first_match == ('', {}):
                first_match = (f"{group_key}.{key}", group[key])
        return default_match if default_match != ('', {}) else first_match


    @staticmethod
    def split_group_key(key: str) -> Tuple[str, str]:
        """
        Split an input key by '.' and return group_key and the key without
        group prefix.
        """
        if key is None:
            return '', ''
        split_keys = key.strip().lower().split('.')
        if len(split_keys) > 1:
            return split_keys[0], split_keys[1]
        return '', split_keys[0]


    def get_setup(self, config_type: ConfigType) -> Dict:
        """
        Get the setup section referenced by this application.

        Args:
            config_type: one of the *_setups roots.

        Returns:
            dict: a copy of the referenced section ({} if unset)
        """
        return dict(self.setups.get(config_type, {}))
