"""Variable neighborhood search and its simplicial generalization.

With ``m_max = 0`` every step below reduces to the classical algorithm: the
shake is a uniform k-bit inversion of the incumbent and local search scans the
Hamming ball of radius ``ls_k``.
"""

from __future__ import annotations

import dataclasses
import itertools
import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_is_fitted, check_problem, check_seed
from .domain import BinarySolution, Problem
from .records import RunRecord
from .simplex import (
    DEFAULT_BUDGET,
    Archive,
    Mode,
    NeighborhoodParams,
    balanced_extension,
    enumerate_simplices_containing,
    extension_candidates,
    random_simplex_containing,
)

SHAKE_SELECTIONS = ("random", "balanced")


@dataclass(frozen=True)
class TvnsConfig:
    k_min: int = 1
    k_max: int = 3
    m_max: int = 2
    mode: str = "at_most"
    archive_capacity: int | None = 1000
    dedup: bool = True
    ls_m: int = 0
    ls_k: int = 1
    ls_window: int | None = None
    max_iterations: int = 200
    stall_limit: int = 100
    max_evaluations: int | None = None
    seed: int = 0
    shake_selection: str = "random"
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        def integer(name, lo):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")

        for name in ("k_min", "k_max", "ls_k", "max_iterations", "stall_limit", "budget"):
            integer(name, 1)
        integer("m_max", 0)
        integer("ls_m", 0)
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if self.ls_k > 3:
            raise ValueError("ls_k must be 1, 2 or 3")
        if self.ls_m > self.m_max:
            raise ValueError("ls_m must not exceed m_max")
        Mode(self.mode)
        if self.shake_selection not in SHAKE_SELECTIONS:
            raise ValueError(f"shake_selection must be one of {SHAKE_SELECTIONS}")
        for name in ("archive_capacity", "ls_window", "max_evaluations"):
            if getattr(self, name) is not None:
                integer(name, 1)
        check_seed(self.seed)

    @property
    def params(self) -> dict:
        return dataclasses.asdict(self)

    def new_archive(self) -> Archive:
        return Archive(self.archive_capacity, self.dedup)


@dataclass(frozen=True)
class ScheduleState:
    k: int
    m: int


def initial_state(cfg: TvnsConfig) -> ScheduleState:
    return ScheduleState(cfg.k_min, cfg.m_max)


def next_neighborhood(state: ScheduleState, improved: bool, cfg: TvnsConfig) -> ScheduleState:
    """Most restrictive first: lower m at fixed k, then widen k and reset m."""
    if improved:
        return ScheduleState(cfg.k_min, cfg.m_max)
    if state.m > 0:
        return ScheduleState(state.k, state.m - 1)
    if state.k < cfg.k_max:
        return ScheduleState(state.k + 1, cfg.m_max)
    return ScheduleState(cfg.k_min, cfg.m_max)


class Evaluator:
    """Counts objective calls and records every evaluated solution."""

    def __init__(self, problem: Problem, archive: Archive):
        self.problem = problem
        self.archive = archive
        self.count = 0

    def __call__(self, s: BinarySolution) -> float:
        cached = self.archive.lookup(s)
        if cached is not None:
            return cached
        f = self.problem.evaluate(s)
        self.count += 1
        self.archive.add(s, f)
        return f


def k_inversion(x: BinarySolution, k: int, rng: np.random.Generator) -> BinarySolution:
    positions = rng.choice(x.n, size=k, replace=False)
    return x.flip(int(i) for i in positions)


def shake(
    current: BinarySolution,
    archive: Archive,
    state: ScheduleState,
    cfg: TvnsConfig,
    rng: np.random.Generator,
) -> tuple[BinarySolution, int]:
    """Return the shaken solution and the simplex order that produced it."""
    m = state.m
    while m > 0:
        params = NeighborhoodParams(m, state.k, cfg.mode)
        target = random_simplex_containing(archive, current, params, rng)
        if target is not None:
            if cfg.shake_selection == "balanced":
                y = balanced_extension(target, params, cfg.budget, rng)
            else:
                cands = extension_candidates(target, params, cfg.budget, rng)
                y = cands[int(rng.integers(len(cands)))] if cands else None
            if y is not None:
                return y, m
        m -= 1
    return k_inversion(current, state.k, rng), 0


def hamming_ball(x: BinarySolution, radius: int) -> Iterator[BinarySolution]:
    for r in range(1, radius + 1):
        for combo in itertools.combinations(range(x.n), r):
            yield x.flip(combo)


def _simplicial_neighbors(
    x: BinarySolution, archive: Archive, cfg: TvnsConfig, rng: np.random.Generator
) -> list[BinarySolution]:
    params = NeighborhoodParams(cfg.ls_m, cfg.ls_k, cfg.mode)
    pool = [e.solution for e in archive.recent(cfg.ls_window)]
    seen: dict[BinarySolution, None] = {}
    for simplex in enumerate_simplices_containing(pool, x, params):
        for y in extension_candidates(simplex, params, cfg.budget, rng):
            seen.setdefault(y, None)
    return list(seen)


def local_search(
    start: BinarySolution,
    start_fitness: float,
    evaluate: Evaluator,
    cfg: TvnsConfig,
    rng: np.random.Generator,
) -> tuple[BinarySolution, float]:
    """Best-improvement descent; ties keep the first neighbor in scan order."""
    problem = evaluate.problem
    x, fx = start, start_fitness
    while True:
        if cfg.ls_m == 0:
            neighbors = hamming_ball(x, cfg.ls_k)
        else:
            neighbors = _simplicial_neighbors(x, evaluate.archive, cfg, rng)
        best, best_f = None, fx
        for y in neighbors:
            fy = evaluate(y)
            if problem.better(fy, best_f):
                best, best_f = y, fy
        if best is None:
            return x, fx
        x, fx = best, best_f


def _check_run(problem: Problem, cfg: TvnsConfig) -> None:
    check_problem(problem, "binary")
    if cfg.k_max > problem.dimension:
        raise ValueError(f"k_max={cfg.k_max} exceeds problem dimension {problem.dimension}")


def _initial_solution(problem: Problem, rng: np.random.Generator) -> BinarySolution:
    return BinarySolution(int(b) for b in rng.integers(0, 2, size=problem.dimension))


def _stop_reason(cfg: TvnsConfig, iteration: int, stall: int, evaluations: int) -> str | None:
    if iteration >= cfg.max_iterations:
        return "max_iterations"
    if stall >= cfg.stall_limit:
        return "stall"
    if cfg.max_evaluations is not None and evaluations >= cfg.max_evaluations:
        return "max_evaluations"
    return None


def _trace_row(i, k, m, m_eff, shaken, local, f_local, f_best, improved, evals) -> dict:
    return {
        "iteration": i,
        "k": k,
        "m": m,
        "m_eff": m_eff,
        "shaken": str(shaken),
        "local_optimum": str(local),
        "local_fitness": f_local,
        "incumbent_fitness": f_best,
        "improved": improved,
        "evaluations": evals,
    }


def run_tvns(problem: Problem, cfg: TvnsConfig, algorithm: str = "tvns") -> tuple[RunRecord, Archive]:
    _check_run(problem, cfg)
    started = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    archive = cfg.new_archive()
    evaluate = Evaluator(problem, archive)

    best = _initial_solution(problem, rng)
    best_f = evaluate(best)
    state = initial_state(cfg)
    trace: list[dict] = []
    iteration = stall = 0
    while (reason := _stop_reason(cfg, iteration, stall, evaluate.count)) is None:
        iteration += 1
        shaken, m_eff = shake(best, archive, state, cfg, rng)
        f_shaken = evaluate(shaken)
        local, f_local = local_search(shaken, f_shaken, evaluate, cfg, rng)
        improved = problem.better(f_local, best_f)
        if improved:
            best, best_f, stall = local, f_local, 0
        else:
            stall += 1
        trace.append(_trace_row(iteration, state.k, state.m, m_eff, shaken, local,
                                f_local, best_f, improved, evaluate.count))
        state = next_neighborhood(state, improved, cfg)

    record = RunRecord(
        algorithm=algorithm,
        problem=problem.name,
        config=cfg.params,
        seed=cfg.seed,
        trace=trace,
        best=best,
        best_fitness=best_f,
        iterations=iteration,
        evaluations=evaluate.count,
        stop_reason=reason,
        extra={"final_state": {"k": state.k, "m": state.m}},
        wall_time=time.perf_counter() - started,
    )
    return record, archive


def run_vns(problem: Problem, cfg: TvnsConfig) -> tuple[RunRecord, Archive]:
    """Classical VNS: k-inversion shaking, Hamming-ball descent, cyclic k.

    Kept as a separate loop so it can serve as the reference for the
    ``m_max = 0`` reduction of :func:`run_tvns`.
    """
    cfg = dataclasses.replace(cfg, m_max=0, ls_m=0)
    _check_run(problem, cfg)
    started = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    archive = cfg.new_archive()
    evaluate = Evaluator(problem, archive)

    best = _initial_solution(problem, rng)
    best_f = evaluate(best)
    k = cfg.k_min
    trace: list[dict] = []
    iteration = stall = 0
    while (reason := _stop_reason(cfg, iteration, stall, evaluate.count)) is None:
        iteration += 1
        shaken = k_inversion(best, k, rng)
        f_shaken = evaluate(shaken)
        local, f_local = local_search(shaken, f_shaken, evaluate, cfg, rng)
        improved = problem.better(f_local, best_f)
        if improved:
            best, best_f, stall = local, f_local, 0
        else:
            stall += 1
        trace.append(_trace_row(iteration, k, 0, 0, shaken, local,
                                f_local, best_f, improved, evaluate.count))
        k = cfg.k_min if improved or k >= cfg.k_max else k + 1

    record = RunRecord(
        algorithm="vns",
        problem=problem.name,
        config=cfg.params,
        seed=cfg.seed,
        trace=trace,
        best=best,
        best_fitness=best_f,
        iterations=iteration,
        evaluations=evaluate.count,
        stop_reason=reason,
        extra={"final_state": {"k": k, "m": 0}},
        wall_time=time.perf_counter() - started,
    )
    return record, archive


# ---------------------------------------------------------------- estimators


class _VNSBase(BaseEstimator):
    def _config(self) -> TvnsConfig:
        return TvnsConfig(**self.get_params())

    def fit(self, problem: Problem, y=None):
        """Run the search on ``problem``; results land in trailing-underscore attributes."""
        cfg = self._config()
        record, archive = self._run(problem, cfg)
        self.record_ = record
        self.archive_ = archive
        self.best_ = record.best
        self.best_fitness_ = record.best_fitness
        self.n_iter_ = record.iterations
        self.n_evaluations_ = record.evaluations
        return self

    def score(self, problem: Problem = None, y=None) -> float:
        check_is_fitted(self)
        return self.best_fitness_


class TVNS(_VNSBase):
    """Topologically sensitive VNS over binary problems.

    Parameters mirror :class:`TvnsConfig`; ``m_max=0`` gives classical VNS.
    """

    def __init__(self, k_min=1, k_max=3, m_max=2, mode="at_most", archive_capacity=1000,
                 dedup=True, ls_m=0, ls_k=1, ls_window=None, max_iterations=200,
                 stall_limit=100, max_evaluations=None, seed=0, shake_selection="random",
                 budget=DEFAULT_BUDGET):
        self.k_min = k_min
        self.k_max = k_max
        self.m_max = m_max
        self.mode = mode
        self.archive_capacity = archive_capacity
        self.dedup = dedup
        self.ls_m = ls_m
        self.ls_k = ls_k
        self.ls_window = ls_window
        self.max_iterations = max_iterations
        self.stall_limit = stall_limit
        self.max_evaluations = max_evaluations
        self.seed = seed
        self.shake_selection = shake_selection
        self.budget = budget

    def _run(self, problem, cfg):
        return run_tvns(problem, cfg)


class VNS(_VNSBase):
    """Classical VNS with k-inversion shaking and best-improvement descent."""

    def __init__(self, k_min=1, k_max=3, ls_k=1, archive_capacity=1000, dedup=True,
                 max_iterations=200, stall_limit=100, max_evaluations=None, seed=0):
        self.k_min = k_min
        self.k_max = k_max
        self.ls_k = ls_k
        self.archive_capacity = archive_capacity
        self.dedup = dedup
        self.max_iterations = max_iterations
        self.stall_limit = stall_limit
        self.max_evaluations = max_evaluations
        self.seed = seed

    def _config(self) -> TvnsConfig:
        return TvnsConfig(m_max=0, ls_m=0, **self.get_params())

    def _run(self, problem, cfg):
        return run_vns(problem, cfg)
