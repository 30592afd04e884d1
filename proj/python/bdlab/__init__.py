"""Desk-scale laboratory for backdoor task-distance experiments."""

from ._core import (
    attack,
    distance_report,
    estimate_kappa_discs,
    generate_task,
    hw1,
    pearson,
    sweep,
    weight_distance,
)

__all__ = [
    "attack",
    "distance_report",
    "estimate_kappa_discs",
    "generate_task",
    "hw1",
    "pearson",
    "sweep",
    "weight_distance",
]
