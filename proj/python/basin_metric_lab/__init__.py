"""Basins of rational maps, backward orbit trees and grid quasi-hyperbolic distances."""

from ._core import (
    VERSION_LINE,
    Basin,
    BmlError,
    RationalMap,
    disk_reference_distance,
    echo_config,
    greens_function,
    run_experiment,
    spherical_distance,
)

__all__ = [
    "VERSION_LINE",
    "Basin",
    "BmlError",
    "RationalMap",
    "disk_reference_distance",
    "echo_config",
    "greens_function",
    "run_experiment",
    "spherical_distance",
]
