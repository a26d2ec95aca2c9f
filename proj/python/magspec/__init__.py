"""Discrete magnetic Schrodinger operators: spectra, effective potentials, capacities, sweeps."""

import json as _json

from ._magspec import (
    ConfigError,
    Error,
    Field,
    GeometryError,
    Grid,
    NumericalError,
    ParameterError,
    __version__,
    ball_capacity,
    constant_field_2d,
    constant_field_3d,
    counterexample_json,
    effective_potential,
    eigs,
    expression_field,
    free_field,
    harmonic_field,
    load_field,
    molchanov,
    parse_field,
    sweep_json,
)


def sweep(field, grid, r, quantities=("lambda",), centers=None, step=None, jobs=1, seed=20240601):
    """Run a center sweep; returns the report as a dict (rows, verdict, caveat, meta)."""
    text = sweep_json(field, grid, r, list(quantities), centers, step, jobs, seed)
    return _json.loads(text)


__all__ = [name for name in dir() if not name.startswith("_")]
