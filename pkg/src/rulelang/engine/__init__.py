"""Datalog evaluation over ground relations."""

from .compile import compile_rule, generated_source, join_order
from .evaluate import (
    EngineError, EngineInput, EngineOutput, build_index, eval_naive, eval_seminaive,
    eval_wellfounded,
)

__all__ = [
    "EngineError", "EngineInput", "EngineOutput", "eval_naive", "eval_seminaive",
    "eval_wellfounded", "compile_rule", "generated_source", "join_order", "build_index",
]
