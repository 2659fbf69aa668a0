# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains Pipeline class running the typed steps of a
speaker identification flow (ingest, preprocess, train, evaluate, serve)
over a shared FlowContext.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from enum import Enum
from typing import Callable, List, Optional, Sequence

from hmm2_speaker.mlops.flow_context import FlowContext



class TaskType(Enum):
    Ingest = "ingest"
    PreProcess = "preprocess"
    Train = "train"
    Evaluate = "evaluate"
    Serve = "serve"



class Step:

    _logger = logging.getLogger(__name__)
    _step_id = 0

    def __init__(
            self,
            func: Callable,
            task_type: TaskType,
            iteration: int = 1
        ):
        self.func = func
        self.task_type = task_type
        self.iteration = iteration
        self.error = False
        Step._step_id += 1
        self.step_id = Step._step_id


    @property
    def name(self) -> str:
        return self.func.__name__



class Pipeline:
    """
    This class runs registered steps in the order of its task list. Each
    task type selects the next registered step of that type; a step with
    iteration n runs n times. A step raising stops the pipeline with the
    context flagged and the error re-raised.

        >>> pp = Pipeline("train", step_tasks=[TaskType.Ingest, TaskType.Train])
        >>> @pp.step(TaskType.Ingest)
        ... def load(ctx): ctx.data["corpus"] = ...
        >>> @pp.step(TaskType.Train)
        ... def fit(ctx): ctx.models["db"] = ...
        >>> pp.execute()
    """
    _logger = logging.getLogger(__name__)

    def __init__(
            self,
            pipeline_key: str,
            ctx: Optional[FlowContext] = None,
            step_tasks: Optional[Sequence[TaskType]] = None
    ) -> None:
        self.logger = Pipeline._logger
        self.pipeline_key = pipeline_key
        self.flow_context = ctx if ctx is not None else FlowContext()
        self.flow_context.pipelines.setdefault(pipeline_key, {})
        self.pipeline_context = self.flow_context.pipelines[pipeline_key]
        self.steps: List[Step] = []
        # without an explicit task list, steps run in registration order
        self._auto_tasks = step_tasks is None
        self.step_tasks: List[TaskType] = list(step_tasks or [])


    def step(self, task_type: TaskType, iteration: int = 1):
        def decorator(func):
            self.steps.append(Step(func, task_type, iteration))
            self.pipeline_context[func.__name__] = \
                    {FlowContext.T_STEP_ITER: iteration}
            if self._auto_tasks:
                self.step_tasks.append(task_type)
            return func
        return decorator


    def execute(self) -> FlowContext:
        ctx = self.flow_context
        pending = list(self.steps)
        for task_type in self.step_tasks:
            step = next((s for s in pending if s.task_type == task_type),
                        None)
            if step is None:
                self.logger.warning(
                    f"Pipeline.execute(): No step for task "\
                    f"[{task_type.value}] in Pipeline [{self.pipeline_key}]."
                )
                continue
            pending.remove(step)
            for n in range(step.iteration):
                self.logger.debug(
                    "Pipeline.execute(): "\
                    f"Executing Pipeline [{self.pipeline_key}]; "\
                    f"Step [{step.name}]; Iteration [{n + 1}]."
                )
                try:
                    step.func(ctx)
                except Exception:
                    step.error = True
                    ctx.process_flag = FlowContext.FLG_ERR
                    self.logger.error(
                        "Pipeline.execute(): "\
                        f"Error in Step [{step.name}] in Pipeline "\
                        f"[{self.pipeline_key}]!"
                    )
                    raise
                self.pipeline_context[step.name] = \
                        {FlowContext.T_STEP_ITER: step.iteration - n - 1}
        return ctx
