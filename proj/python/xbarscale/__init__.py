"""Hierarchical crossbar interconnect models: analytic AMAT, cycle simulation, HBM link bandwidth."""

from ._core import (
    InputError,
    ModelError,
    __version__,
    analyze,
    arbiter_latency,
    kung_feasible,
    map_address,
    parse_label,
    probe,
    reference_rows,
    run_cli,
    simulate,
    transfer,
    zero_load,
)

__all__ = [
    "InputError",
    "ModelError",
    "__version__",
    "analyze",
    "arbiter_latency",
    "kung_feasible",
    "map_address",
    "parse_label",
    "probe",
    "reference_rows",
    "run_cli",
    "simulate",
    "transfer",
    "zero_load",
]
