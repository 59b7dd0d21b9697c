"""Quadratic likelihood approximations: Newton steps, LAMN checks, bootstrap
calibration and the animal model. NaO results come back as None."""

import json

from ._quadlik import (
    Ar1Model,
    AnimalModel,
    InputError,
    LanNormalLocation,
    LikModel,
    WishartLamnModel,
    fit_mle,
    newton_step_quadratic,
    quadratic_mle,
    quadraticity,
    relationship_matrix,
    synthetic_relationship_matrix,
    wald_pivots,
)
from ._quadlik import run as _run


def run(command, config, base_dir=".", workers=1):
    """Run a CLI experiment in-process. Returns (report dict, exit code)."""
    text = config if isinstance(config, str) else json.dumps(config)
    report, code = _run(command, text, str(base_dir), workers)
    return json.loads(report), code


__all__ = [
    "Ar1Model",
    "AnimalModel",
    "InputError",
    "LanNormalLocation",
    "LikModel",
    "WishartLamnModel",
    "fit_mle",
    "newton_step_quadratic",
    "quadratic_mle",
    "quadraticity",
    "relationship_matrix",
    "run",
    "synthetic_relationship_matrix",
    "wald_pivots",
]
