"""Curvature pinching identities, reaction sweeps and mean curvature flow in spheres."""

import json as _json

from ._pinchflow import (
    PinchflowError,
    blowup_time,
    canonical_geometry,
    canonical_reference,
    discriminant_report,
    flow_run,
    gradient_margins,
    grid_norm_a2,
    harnack_bound,
    kperp_checks,
    normal_curvature,
    point_geometry,
    q_value,
    reaction_of_q,
    reaction_terms,
    sample_surface,
    special_form,
    specialize,
    sphere_extinction_time,
    sphere_ode_oracle,
)
from ._pinchflow import execute as _execute

__version__ = "0.1.0"


def run_config(config):
    """Runs a CLI config given as a dict; returns (exit_status, stdout, stderr)."""
    return _execute(_json.dumps(config))


__all__ = [
    "PinchflowError",
    "blowup_time",
    "canonical_geometry",
    "canonical_reference",
    "discriminant_report",
    "flow_run",
    "gradient_margins",
    "grid_norm_a2",
    "harnack_bound",
    "kperp_checks",
    "normal_curvature",
    "point_geometry",
    "q_value",
    "reaction_of_q",
    "reaction_terms",
    "run_config",
    "sample_surface",
    "special_form",
    "specialize",
    "sphere_extinction_time",
    "sphere_ode_oracle",
]
