"""Electromagnetism-like search and its simplex-constrained variant.

Charges and forces follow Birbil and Fang: charge decays exponentially with
the normalized fitness gap to the best point, better points attract and worse
points repel with strength q_i q_j / d^2. Minimization throughout; maximized
problems are negated internally.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_is_fitted, check_problem, check_seed
from .domain import Problem, RealSolution
from .records import RunRecord
from .simplex import ArchiveEntry

EPS = 1e-12
OBJECTIVES = ("avg", "max")


@dataclass(frozen=True)
class TemConfig:
    population_size: int = 20
    max_iterations: int = 1000
    stall_limit: int = 1000
    m_max: int = 2
    include_self: bool = False
    distance_objective: str = "avg"
    threshold: float = math.inf
    move_trials: int = 50
    ls_steps: int = 5
    ls_delta: float = 0.02
    seed: int = 0

    def __post_init__(self):
        for name, lo in (("population_size", 2), ("max_iterations", 1), ("stall_limit", 1),
                         ("m_max", 0), ("move_trials", 1), ("ls_steps", 0)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")
        partners = self.m_max + 1 if self.include_self else self.m_max + 2
        if self.population_size < partners:
            raise ValueError(
                f"population_size must be >= {partners} for m_max={self.m_max}"
                f" (include_self={self.include_self})"
            )
        if self.distance_objective not in OBJECTIVES:
            raise ValueError(f"distance_objective must be one of {OBJECTIVES}")
        threshold = math.inf if self.threshold in (None, "inf") else float(self.threshold)
        if not threshold > 0:
            raise ValueError("threshold must be positive")
        object.__setattr__(self, "threshold", threshold)
        if not self.ls_delta > 0:
            raise ValueError("ls_delta must be positive")
        check_seed(self.seed)

    @property
    def params(self) -> dict:
        out = dataclasses.asdict(self)
        if math.isinf(self.threshold):
            out["threshold"] = "inf"
        return out


@dataclass
class Population:
    X: np.ndarray
    f: np.ndarray

    @property
    def best(self) -> int:
        return int(np.argmin(self.f))

    @property
    def size(self) -> int:
        return self.X.shape[0]


def compute_charges(pop: Population) -> np.ndarray:
    n = pop.X.shape[1]
    gap = pop.f - pop.f.min()
    total = gap.sum()
    if total < EPS:
        return np.ones(pop.size)
    return np.exp(-n * gap / total)


def compute_forces(pop: Population, q: np.ndarray) -> np.ndarray:
    diff = pop.X[None, :, :] - pop.X[:, None, :]  # diff[i, j] = x_j - x_i
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    far = d2 >= EPS * EPS
    coef = np.zeros_like(d2)
    np.divide(np.outer(q, q), d2, out=coef, where=far)
    sign = np.where(pop.f[None, :] < pop.f[:, None], 1.0, -1.0)
    np.fill_diagonal(coef, 0.0)
    return np.einsum("ij,ijk->ik", coef * sign, diff)


def classical_step(x, force, lam, lower, upper) -> np.ndarray:
    norm = np.linalg.norm(force)
    if norm < EPS:
        return np.array(x, dtype=float)
    return np.clip(x + lam * (force / norm) * (upper - lower), lower, upper)


def move_classical(pop: Population, F: np.ndarray, rng: np.random.Generator,
                   lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """New positions for all members; the best one stays put."""
    best = pop.best
    X = pop.X.copy()
    for i in range(pop.size):
        if i == best:
            continue
        lam = rng.random()
        X[i] = classical_step(pop.X[i], F[i], lam, lower, upper)
    return X


@lru_cache(maxsize=64)
def _combos(P: int, m: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(P), m)), dtype=int).reshape(-1, m)


@dataclass
class _SimplexTables:
    """Per-iteration partner sets of each size with their internal distances."""

    D: np.ndarray
    threshold: float
    tables: dict

    @classmethod
    def build(cls, X: np.ndarray, m_max: int, threshold: float) -> "_SimplexTables":
        diff = X[:, None, :] - X[None, :, :]
        D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        tables = {}
        for m in range(1, m_max + 1):
            combos = _combos(X.shape[0], m)
            if m == 1:
                ok = np.ones(len(combos), dtype=bool)
                total = np.zeros(len(combos))
                worst = np.zeros(len(combos))
            else:
                pairs = np.array(list(itertools.combinations(range(m), 2)))
                inner = D[combos[:, pairs[:, 0]], combos[:, pairs[:, 1]]]
                ok = np.all((inner > 0) & (inner <= threshold), axis=1)
                total = inner.sum(axis=1)
                worst = inner.max(axis=1)
            tables[m] = (combos, ok, total, worst)
        return cls(D, threshold, tables)


def move_tem(i: int, pop: Population, F: np.ndarray, m: int, cfg: TemConfig,
             rng: np.random.Generator, lower: np.ndarray, upper: np.ndarray,
             tables: _SimplexTables | None = None) -> tuple[np.ndarray, int, tuple[int, ...]]:
    """Move member ``i`` so it spans an order-m simplex with m other members.

    Candidates are ``move_trials`` classical moves (same direction, fresh
    step lengths). When none of them forms a valid simplex the order drops by
    one and the same candidates are re-checked; at order 0 a single fresh
    classical move is taken. Returns (position, effective order, partners).
    """
    x = pop.X[i]
    if m > 0 and np.linalg.norm(F[i]) >= EPS:
        if tables is None:
            tables = _SimplexTables.build(pop.X, m, cfg.threshold)
        lams = rng.random(cfg.move_trials)
        unit = F[i] / np.linalg.norm(F[i])
        cands = np.clip(x + lams[:, None] * unit * (upper - lower), lower, upper)
        diff = cands[:, None, :] - pop.X[None, :, :]
        Dc = np.sqrt(np.einsum("tjk,tjk->tj", diff, diff))
        for order in range(m, 0, -1):
            combos, ok, total, worst = tables.tables[order]
            keep = ok.copy()
            if not cfg.include_self:
                keep &= ~np.any(combos == i, axis=1)
            if not keep.any():
                continue
            combos, total, worst = combos[keep], total[keep], worst[keep]
            d = Dc[:, combos]  # trials x combos x order
            valid = np.all((d > 0) & (d <= cfg.threshold), axis=2)
            if not valid.any():
                continue
            if cfg.distance_objective == "avg":
                n_pairs = order * (order + 1) / 2
                score = (d.sum(axis=2) + total[None, :]) / n_pairs
            else:
                score = np.maximum(d.max(axis=2), worst[None, :])
            score = np.where(valid, score, np.inf)
            t, c = np.unravel_index(int(np.argmin(score)), score.shape)
            return cands[t], order, tuple(int(j) for j in combos[c])
    lam = rng.random()
    return classical_step(x, F[i], lam, lower, upper), 0, ()


def em_local_search(x: np.ndarray, fx: float, objective, lower: np.ndarray,
                    upper: np.ndarray, ls_steps: int, ls_delta: float,
                    rng: np.random.Generator) -> tuple[np.ndarray, float, int]:
    """Coordinate-wise random probing; returns (point, fitness, evaluations)."""
    x = np.array(x, dtype=float)
    evals = 0
    span = upper - lower
    for k in range(x.size):
        for _ in range(ls_steps):
            sign = 1.0 if rng.random() > 0.5 else -1.0
            y = x.copy()
            y[k] = min(max(y[k] + sign * rng.random() * ls_delta * span[k], lower[k]), upper[k])
            fy = objective(y)
            evals += 1
            if fy < fx:
                x, fx = y, fy
                break
    return x, fx, evals


class _Run:
    """State shared by the classical and topological main loops."""

    def __init__(self, problem: Problem, cfg: TemConfig):
        check_problem(problem, "real")
        self.problem = problem
        self.cfg = cfg
        self.sign = 1.0 if problem.direction == "minimize" else -1.0
        self.lower, self.upper = problem.lower, problem.upper
        self.rng = np.random.default_rng(cfg.seed)
        self.evaluations = 0

    def objective(self, x: np.ndarray) -> float:
        self.evaluations += 1
        return self.sign * float(self.problem.objective(x))

    def loop(self, move) -> tuple[RunRecord, list[ArchiveEntry], str]:
        cfg, rng = self.cfg, self.rng
        started = time.perf_counter()
        X = rng.uniform(self.lower, self.upper, size=(cfg.population_size, self.lower.size))
        pop = Population(X, np.array([self.objective(x) for x in X]))
        best_f = float(pop.f.min())
        trace = []
        iteration = stall = 0
        while True:
            if iteration >= cfg.max_iterations:
                reason = "max_iterations"
                break
            if stall >= cfg.stall_limit:
                reason = "stall"
                break
            iteration += 1
            for i in range(pop.size):
                pop.X[i], pop.f[i], _ = em_local_search(
                    pop.X[i], pop.f[i], self.objective, self.lower, self.upper,
                    cfg.ls_steps, cfg.ls_delta, rng)
            q = compute_charges(pop)
            F = compute_forces(pop, q)
            X_new, orders = move(pop, F)
            moved = [i for i in range(pop.size) if orders[i] is not None]
            pop.X = X_new
            for i in moved:
                pop.f[i] = self.objective(pop.X[i])
            current = float(pop.f.min())
            if current < best_f:
                best_f, stall = current, 0
            else:
                stall += 1
            trace.append({
                "iteration": iteration,
                "best_fitness": self.sign * best_f,
                "m_eff": orders,
                "evaluations": self.evaluations,
            })
        b = pop.best
        entries = [ArchiveEntry(RealSolution(x), float(self.sign * f), t)
                   for t, (x, f) in enumerate(zip(pop.X, pop.f))]
        record = RunRecord(
            algorithm="",
            problem=self.problem.name,
            config=cfg.params,
            seed=cfg.seed,
            trace=trace,
            best=RealSolution(pop.X[b]),
            best_fitness=float(self.sign * pop.f[b]),
            iterations=iteration,
            evaluations=self.evaluations,
            stop_reason=reason,
            wall_time=time.perf_counter() - started,
        )
        return record, entries, reason


def _finish(record: RunRecord, algorithm: str) -> RunRecord:
    record.algorithm = algorithm
    m_eff = [o for row in record.trace for o in row["m_eff"] if o is not None]
    record.extra = {"mean_m_eff": (sum(m_eff) / len(m_eff)) if m_eff else 0.0}
    return record


def run_em(problem: Problem, cfg: TemConfig) -> tuple[RunRecord, list[ArchiveEntry]]:
    """Classical EM; the reference for the ``m_max=0`` reduction of :func:`run_tem`."""
    cfg = dataclasses.replace(cfg, m_max=0, threshold=math.inf)
    run = _Run(problem, cfg)

    def move(pop, F):
        best = pop.best
        X = move_classical(pop, F, run.rng, run.lower, run.upper)
        return X, [None if i == best else 0 for i in range(pop.size)]

    record, entries, _ = run.loop(move)
    return _finish(record, "em"), entries


def run_tem(problem: Problem, cfg: TemConfig) -> tuple[RunRecord, list[ArchiveEntry]]:
    run = _Run(problem, cfg)

    def move(pop, F):
        best = pop.best
        tables = _SimplexTables.build(pop.X, cfg.m_max, cfg.threshold) if cfg.m_max else None
        X = pop.X.copy()
        orders: list[int | None] = []
        # every point restarts from m_max each iteration; moves use the snapshot
        for i in range(pop.size):
            if i == best:
                orders.append(None)
                continue
            X[i], order, _ = move_tem(i, pop, F, cfg.m_max, cfg, run.rng,
                                      run.lower, run.upper, tables)
            orders.append(order)
        return X, orders

    record, entries, _ = run.loop(move)
    return _finish(record, "tem"), entries


# ---------------------------------------------------------------- estimators


class _EMBase(BaseEstimator):
    def fit(self, problem: Problem, y=None):
        cfg = self._config()
        record, entries = self._run(problem, cfg)
        self.record_ = record
        self.population_ = entries
        self.best_ = record.best
        self.best_fitness_ = record.best_fitness
        self.n_iter_ = record.iterations
        self.n_evaluations_ = record.evaluations
        return self

    def score(self, problem: Problem = None, y=None) -> float:
        check_is_fitted(self)
        return self.best_fitness_


class TEM(_EMBase):
    """Electromagnetism search whose moves must span simplices with the population."""

    def __init__(self, population_size=20, max_iterations=1000, stall_limit=1000, m_max=2,
                 include_self=False, distance_objective="avg", threshold=math.inf,
                 move_trials=50, ls_steps=5, ls_delta=0.02, seed=0):
        self.population_size = population_size
        self.max_iterations = max_iterations
        self.stall_limit = stall_limit
        self.m_max = m_max
        self.include_self = include_self
        self.distance_objective = distance_objective
        self.threshold = threshold
        self.move_trials = move_trials
        self.ls_steps = ls_steps
        self.ls_delta = ls_delta
        self.seed = seed

    def _config(self):
        return TemConfig(**self.get_params())

    def _run(self, problem, cfg):
        return run_tem(problem, cfg)


class EM(_EMBase):
    """Classical electromagnetism-like search."""

    def __init__(self, population_size=20, max_iterations=1000, stall_limit=1000,
                 ls_steps=5, ls_delta=0.02, seed=0):
        self.population_size = population_size
        self.max_iterations = max_iterations
        self.stall_limit = stall_limit
        self.ls_steps = ls_steps
        self.ls_delta = ls_delta
        self.seed = seed

    def _config(self):
        return TemConfig(m_max=0, **self.get_params())

    def _run(self, problem, cfg):
        return run_em(problem, cfg)
