# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains FlowContext class representing the context
of a speaker identification flow
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import Any, Dict, List, Optional

from hmm2_speaker.common import AppConfig


class FlowContext:
    """
    This class provides the shared state of a flow: data loaded by ingest
    steps, models produced by training steps, the parameters and metrics
    recorded along the way, and the outputs the flow writes.

    Example:

    To use this class, instantiate the initial context:

        >>> from hmm2_speaker.mlops import FlowContext
        ...
        >>> ctx: FlowContext = FlowContext()
        >>> ctx.params["seed"] = 0
    """

    FLG_DEF = 0
    FLG_ERR = 1
    T_STEP_ITER = "iteration"

    _logger = logging.getLogger(__name__)

    def __init__(self, app_config: Optional[AppConfig] = None) -> None:
        self.logger = FlowContext._logger
        self.app_config = app_config
        self.pipelines: Dict[str, Dict] = {}
        self.data: Dict[str, Any] = {}
        self.models: Dict[str, Any] = {}
        self.params: Dict[str, Any] = {}
        self.metrics: Dict[str, Any] = {}
        self.outputs: Dict[str, Any] = {}
        self.process_flag: int = FlowContext.FLG_DEF
        self.direct_inputs: Dict[str, Any] = {}
        self.context_inputs: List[Dict] = []


    def record(self, step_name: str, outputs: Dict[str, Any]) -> None:
        """Merge a step's outputs and keep them in the input history."""
        self.outputs.update(outputs)
        self.context_inputs.append(dict(outputs))
        self.logger.debug(
            f"FlowContext.record(): Step [{step_name}]; "\
            f"Outputs [{list(outputs.keys())}]."
        )


    @property
    def failed(self) -> bool:
        return self.process_flag == FlowContext.FLG_ERR
