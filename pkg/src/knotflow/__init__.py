"""Gradient flow of O'Hara knot energies E^alpha + lambda L for closed curves.

Modules: ``curves`` (spectral curve representation), ``fractional`` (Fourier
multipliers, Q symbol, heat kernel), ``energy``, ``gradient``, ``flow``,
``diagnostics``, ``io`` and ``cli``.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .curves import ClosedCurve, circle, fourier_perturbed_circle, generate, torus_knot
from .energy import EnergyParams, critical_circle_radius, ohara_energy, total_energy
from .errors import (
    ConfigError,
    EmbeddednessError,
    InsufficientTailError,
    KnotflowError,
    NonConvergenceError,
    RegularityError,
    StepCollapse,
)
from .flow import FlowConfig, run_flow
from .gradient import flow_velocity, gradient_direct

__all__ = [
    "ClosedCurve",
    "ConfigError",
    "EmbeddednessError",
    "EnergyParams",
    "FlowConfig",
    "InsufficientTailError",
    "KnotflowError",
    "NonConvergenceError",
    "RegularityError",
    "StepCollapse",
    "circle",
    "critical_circle_radius",
    "flow_velocity",
    "fourier_perturbed_circle",
    "generate",
    "gradient_direct",
    "ohara_energy",
    "run_flow",
    "torus_knot",
    "total_energy",
]
