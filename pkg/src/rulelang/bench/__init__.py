"""Benchmark inputs, programs, reference oracles and the benchmark runner."""

from .generators import (
    GraphSpec, RbacWorkload, RbacWorkloadSpec, format_facts, gen_family, gen_graph, gen_moves,
    rbac_workload, scaled_totals,
)
from .oracles import RbacOracle, ancestors, closure, retrograde, same_generation
from .runner import BENCH_NAMES, DEFAULT_SPECS, BenchReport, checksum, program_source, run_bench

__all__ = [
    "GraphSpec", "RbacWorkload", "RbacWorkloadSpec", "format_facts", "gen_family", "gen_graph",
    "gen_moves", "rbac_workload", "scaled_totals", "RbacOracle", "ancestors", "closure",
    "retrograde", "same_generation", "BENCH_NAMES", "DEFAULT_SPECS", "BenchReport", "checksum",
    "program_source", "run_bench",
]
