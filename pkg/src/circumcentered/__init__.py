"""Circumcenter operators, circumcenter mappings and circumcentered iteration methods."""

from .ccmap import (
    OperatorFamily,
    OperatorSpec,
    IterationTrace,
    cc_map,
    compose,
    identity,
    iterate,
    projector,
    reflector,
)
from .circumcenter import CircumcenterOutcome, circumcenter, circumcenter3, circumcenter_equidistant, circumcenter_general
from .geometry import AffineSubspace, Ball, Halfspace, Hyperplane, project, reflect
from .harness import run_baseline, run_theorem_suite

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace",
    "Ball",
    "CircumcenterOutcome",
    "Halfspace",
    "Hyperplane",
    "IterationTrace",
    "OperatorFamily",
    "OperatorSpec",
    "cc_map",
    "circumcenter",
    "circumcenter3",
    "circumcenter_equidistant",
    "circumcenter_general",
    "compose",
    "identity",
    "iterate",
    "project",
    "projector",
    "reflect",
    "reflector",
    "run_baseline",
    "run_theorem_suite",
]
