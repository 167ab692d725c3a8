"""Experiment harness and command-line interface."""

from .experiments import (
    ExperimentSpec,
    Report,
    run_convergence,
    run_patch_diffusion2,
    run_slowfast_pig,
    run_stability_map,
    run_stiff_scaling,
)

__all__ = [
    "ExperimentSpec",
    "Report",
    "run_convergence",
    "run_patch_diffusion2",
    "run_slowfast_pig",
    "run_stability_map",
    "run_stiff_scaling",
]
