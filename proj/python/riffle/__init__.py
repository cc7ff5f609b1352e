"""Quasi-uniform measures, random orderings of the integers and the riffle
shuffles they induce, with exact oracles on small symmetric groups."""

from ._core import (
    Measure,
    RiffleError,
    exact_ordering_distribution,
    exact_step_distribution,
    is_quasi_uniform,
    kernel_row_exact,
    mixing_curve,
    run_cli,
    sample_orderings,
    shuffle_map,
    step_permutation,
    tv_distance,
    verify,
    walk,
)

__all__ = [
    "Measure",
    "RiffleError",
    "exact_ordering_distribution",
    "exact_step_distribution",
    "is_quasi_uniform",
    "kernel_row_exact",
    "mixing_curve",
    "run_cli",
    "sample_orderings",
    "shuffle_map",
    "step_permutation",
    "tv_distance",
    "verify",
    "walk",
]
