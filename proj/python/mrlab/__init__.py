"""Maximal regularity and boundary perturbation checks."""

import json

from ._mrlab import (
    LinalgError,
    check_groups,
    expm,
    frac_power_contour,
    frac_power_eig,
    heat_boundary_row,
    heat_generator,
    resolvent,
    run_group_json,
)

__all__ = [
    "LinalgError",
    "check_groups",
    "expm",
    "frac_power_contour",
    "frac_power_eig",
    "heat_boundary_row",
    "heat_generator",
    "resolvent",
    "run_group",
]


def run_group(name, **config):
    """Run one check group; keyword arguments use the JSON config keys."""
    return json.loads(run_group_json(name, json.dumps(config)))
