"""Shared fuzz-suite makers and tiny hand-built instances."""

from __future__ import annotations

from pathprophet import Instance, generate_random_instance


def width1_fuzz(j: int, d: int = 0) -> Instance:
    return generate_random_instance(
        j, shape="width1", n_nodes=4 + j % 4, max_outcomes=1 + j % 3, d=d
    )


def labeled_fuzz(j: int) -> Instance:
    return width1_fuzz(j, d=1 + j % 2)


def dag_fuzz(j: int) -> Instance:
    return generate_random_instance(
        j, shape="dag", n_nodes=4 + j % 4, max_outcomes=1 + j % 3, d=j % 3
    )


def strands_fuzz(j: int) -> Instance:
    return generate_random_instance(
        j, shape="strands", n_nodes=4 + j % 4, max_outcomes=1 + j % 3, d=0
    )


def diamond() -> Instance:
    """Width-2 hand instance: two parallel two-hop routes."""
    return Instance.build(
        ["s", "a", "b", "t"],
        [("s", "a", ()), ("s", "b", ()), ("a", "t", ()), ("b", "t", ())],
        outcomes={
            "s": [(0.5, {0: 1.0, 1: 0.0}), (0.5, {0: 0.0, 1: 1.0})],
            "a": [(1.0, {2: 0.5})],
            "b": [(0.5, {3: 0.0}), (0.5, {3: 1.5})],
        },
    )
