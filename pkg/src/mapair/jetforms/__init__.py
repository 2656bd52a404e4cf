"""Differential forms on charts, Monge-Ampere systems and model geometries."""

from __future__ import annotations

from .fileio import format_map, format_system, parse_diffform, parse_map, parse_system, parse_vecfield
from .forms import (
    Chart,
    DiffForm,
    PointMap,
    VecField,
    evaluate_on_fields,
    exterior_d,
    interior_field,
    pullback,
    substitute_differential,
    wedge,
)
from .models import (
    ChartReduction,
    Geometry,
    euclidean,
    euclidean_chart_reduce,
    euclidean_reduced_formula,
    flat,
    hyperbolic,
    model_construction,
    model_reeb,
    model_system,
    sphere_lift,
    spherical,
)
from .systems import (
    Classification,
    ClassificationError,
    ConstraintError,
    MASystem,
    NotContactError,
    NotLegendrianError,
    apply_flat_symmetry,
    classify_hesse,
    construct_ma,
    is_contact,
    legendre_dual,
    legendre_map,
    legendrian_lift,
    reduce_mod_theta,
    reeb_closed_formula,
    reeb_field,
    standard_chart,
    standard_frames,
    theta_independence,
    theta_standard,
    transversality_check,
    verify_solution,
)

__all__ = [name for name in dir() if not name.startswith("_")]
