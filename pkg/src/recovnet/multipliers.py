"""Stage-2 optimization: find the fixed-size node set whose forced recovery
at week 0 maximizes the number of recovered nodes at the horizon.

Includes an exhaustive enumerator usable as an exact oracle whenever the
candidate space is small enough.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .diffusion import DiffusionSchedule, ThresholdVector, all_affected, run_diffusion
from .errors import ConfigError, DataError
from .ga import GaConfig, GaResult, SubsetEncoding, run_ga
from .graph import SpatialGraph

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass
class MultiplierProblem:
    """Fitted thresholds plus the size and candidate pool of the seed set."""

    graph: SpatialGraph
    thresholds: ThresholdVector
    size: int
    schedule: DiffusionSchedule = DiffusionSchedule()
    candidate_pool: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.candidate_pool is None:
            self.candidate_pool = self.graph.nodes
        else:
            self.candidate_pool = tuple(self.candidate_pool)
            unknown = [n for n in self.candidate_pool if n not in self.graph.index]
            if unknown:
                raise DataError(f"candidate pool contains unknown nodes: {unknown[:10]}")
            if len(set(self.candidate_pool)) != len(self.candidate_pool):
                raise DataError("candidate pool contains duplicate nodes")
        if not 1 <= self.size <= len(self.candidate_pool):
            raise ConfigError(
                f"size must be in [1, {len(self.candidate_pool)}], got {self.size}"
            )

    @property
    def pool_indices(self) -> np.ndarray:
        return np.array([self.graph.index[n] for n in self.candidate_pool], dtype=np.int64)


@dataclass
class MultiplierResult:
    """The selected set and its effect against the unforced simulation.

    increment_rate is None when nothing recovers without forcing (the
    percentage gain is undefined).
    """

    members: tuple[str, ...]
    recovered_with: int
    recovered_without: int
    increment_rate: Optional[float]
    ga_result: Optional[GaResult] = None


def _objective_from_node_indices(problem: MultiplierProblem, indices: np.ndarray) -> int:
    initial = all_affected(problem.graph.n)
    initial[indices] = True
    trajectory = run_diffusion(problem.graph, problem.thresholds, initial, problem.schedule)
    return int(trajectory[-1].sum())


def multiplier_objective(members: Iterable[str], problem: MultiplierProblem) -> int:
    """Recovered count at the horizon when `members` start recovered."""
    members = list(members)
    unique = set(members)
    if len(unique) != len(members) or len(members) != problem.size:
        raise ValueError(
            f"multiplier set must contain exactly {problem.size} distinct nodes"
        )
    pool = set(problem.candidate_pool)
    outside = unique - pool
    if outside:
        raise ValueError(f"nodes outside the candidate pool: {sorted(outside)[:10]}")
    indices = np.array([problem.graph.index[n] for n in members], dtype=np.int64)
    return _objective_from_node_indices(problem, indices)


def natural_outcome(problem: MultiplierProblem) -> int:
    """Recovered count at the horizon with no forced seeds."""
    trajectory = run_diffusion(
        problem.graph, problem.thresholds, all_affected(problem.graph.n), problem.schedule
    )
    return int(trajectory[-1].sum())


def increment_rate(recovered_with: int, recovered_without: int) -> float:
    """Percent gain of the forced over the unforced recovered count."""
    if recovered_without <= 0:
        raise ValueError(
            f"recovered_without must be > 0, got {recovered_without}"
        )
    return 100.0 * (recovered_with - recovered_without) / recovered_without


def _finish(problem: MultiplierProblem, members: tuple[str, ...], recovered_with: int,
            ga_result: Optional[GaResult]) -> MultiplierResult:
    recovered_without = natural_outcome(problem)
    rate = (
        increment_rate(recovered_with, recovered_without)
        if recovered_without > 0
        else None
    )
    return MultiplierResult(
        members=members,
        recovered_with=recovered_with,
        recovered_without=recovered_without,
        increment_rate=rate,
        ga_result=ga_result,
    )


def search_multipliers(
    problem: MultiplierProblem, config: GaConfig, n_workers: int = 1
) -> MultiplierResult:
    """Maximize the horizon recovered count over size-N subsets with the GA."""
    pool_indices = problem.pool_indices
    encoding = SubsetEncoding(len(problem.candidate_pool), problem.size)

    def fitness(chromosome: np.ndarray) -> int:
        return _objective_from_node_indices(problem, pool_indices[chromosome])

    result = run_ga(
        fitness, direction="maximize", encoding=encoding, config=config, n_workers=n_workers
    )
    members = tuple(sorted(problem.candidate_pool[i] for i in result.best_chromosome))
    recovered_with = _objective_from_node_indices(
        problem, pool_indices[result.best_chromosome]
    )
    return _finish(problem, members, recovered_with, result)


def brute_force_multipliers(
    problem: MultiplierProblem, enumeration_cap: int = DEFAULT_ENUMERATION_CAP
) -> MultiplierResult:
    """Exact maximizer by exhaustive enumeration, ties broken by taking the
    lexicographically first subset of the sorted candidate pool."""
    total = math.comb(len(problem.candidate_pool), problem.size)
    if total > enumeration_cap:
        raise ConfigError(
            f"{total} candidate subsets exceed the enumeration cap {enumeration_cap}"
        )
    pool_sorted = sorted(problem.candidate_pool)
    best_members: Optional[tuple[str, ...]] = None
    best_value = -1
    for combo in itertools.combinations(pool_sorted, problem.size):
        indices = np.array([problem.graph.index[n] for n in combo], dtype=np.int64)
        value = _objective_from_node_indices(problem, indices)
        if value > best_value:
            best_members, best_value = combo, value
    assert best_members is not None
    return _finish(problem, best_members, best_value, None)
