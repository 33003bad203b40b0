"""Execution of desugared programs with automatic maintenance of derived predicates."""

from .heap import GLOBAL_CLASS, Heap
from .machine import (
    DEFAULT_STEP_BUDGET, MODES, Machine, RunResult, StepBudgetExceeded, run_program,
)
from .maintain import Inference, RuntimeFailure

__all__ = [
    "GLOBAL_CLASS", "Heap", "DEFAULT_STEP_BUDGET", "MODES", "Machine", "RunResult",
    "StepBudgetExceeded", "run_program", "Inference", "RuntimeFailure",
]
