"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numbers
from typing import Any, Sequence

import numpy as np

from .domain import BinarySolution, Problem, RealSolution, Solution


class NotFittedError(AttributeError, ValueError):
    pass


def check_is_fitted(estimator, attribute: str = "record_") -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first."
        )


def check_scalar(x: Any, name: str, target_type, *, min_val=None, max_val=None,
                 include_min: bool = True) -> Any:
    if isinstance(x, bool) or not isinstance(x, target_type):
        raise TypeError(f"{name} must be {target_type}, got {type(x).__name__}")
    if min_val is not None and (x < min_val or (not include_min and x == min_val)):
        op = ">=" if include_min else ">"
        raise ValueError(f"{name} must be {op} {min_val}, got {x}")
    if max_val is not None and x > max_val:
        raise ValueError(f"{name} must be <= {max_val}, got {x}")
    return x


def check_problem(problem: Problem, encoding: str) -> Problem:
    if not isinstance(problem, Problem):
        raise TypeError(f"expected a Problem, got {type(problem).__name__}")
    if problem.encoding != encoding:
        raise ValueError(
            f"{problem.name!r} is {problem.encoding}-encoded; this solver needs {encoding}"
        )
    return problem


def check_seed(seed: Any) -> int:
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    if seed >= 2**64:
        raise ValueError("seed must fit in 64 bits")
    return int(seed)


def check_cloud(cloud: Any) -> list[Solution]:
    """Coerce a point cloud (solutions, bit strings, or a 2-D array) to solutions."""
    if isinstance(cloud, np.ndarray):
        if cloud.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {cloud.shape}")
        points: Sequence = [RealSolution(row) for row in cloud]
    else:
        points = []
        for item in cloud:
            if isinstance(item, (BinarySolution, RealSolution)):
                points.append(item)
            elif isinstance(item, str):
                points.append(BinarySolution(item))
            else:
                points.append(RealSolution(item))
    if not points:
        raise ValueError("point cloud is empty")
    kinds = {type(p) for p in points}
    if len(kinds) > 1:
        raise ValueError("point cloud mixes binary and real solutions")
    if len({len(p) for p in points}) > 1:
        raise ValueError("point cloud has inconsistent dimensions")
    return list(points)
