"""Experiment orchestration: problem/solver construction, runs, summaries."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import domain
from .records import RunRecord, write_archive
from .tem import TemConfig, run_em, run_tem
from .tvns import TvnsConfig, run_tvns, run_vns

ALGORITHMS = ("vns", "tvns", "em", "tem")
PROBLEMS = ("onemax", "setcover", "sphere", "rastrigin")
DEFAULT_DIMENSION = {"onemax": 20, "sphere": 5, "rastrigin": 5}
SCHEMA_LINE = "# schema=1"
SUMMARY_COLUMNS = ("algorithm", "problem", "seed", "status", "best_fitness", "iterations",
                   "evaluations", "wall_time", "final_state", "error")
OUT_ENV = "TOPO_META_OUT"


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit status 2)."""


class InstanceError(OSError):
    """Unreadable or malformed input file (CLI exit status 3)."""


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dimension: int | None = None
    instance: str | None = None

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "ProblemSpec":
        if not isinstance(d, dict) or "name" not in d:
            raise ConfigError("problem block needs a 'name'")
        unknown = set(d) - {"name", "dimension", "instance"}
        if unknown:
            raise ConfigError(f"unknown problem keys: {sorted(unknown)}")
        instance = d.get("instance")
        if instance is not None and base is not None and not Path(instance).is_absolute():
            candidate = base / instance
            if candidate.exists():
                instance = str(candidate)
        return cls(d["name"], d.get("dimension"), instance)

    def build(self) -> domain.Problem:
        if self.name not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.name!r}; choose from {PROBLEMS}")
        if self.name == "setcover":
            if not self.instance:
                raise ConfigError("setcover needs an instance file")
            try:
                inst = domain.read_setcover(self.instance)
            except (OSError, ValueError) as exc:
                raise InstanceError(str(exc)) from exc
            return domain.setcover(inst, name=f"setcover:{Path(self.instance).stem}")
        dim = self.dimension if self.dimension is not None else DEFAULT_DIMENSION[self.name]
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise ConfigError(f"dimension must be a positive integer, got {dim!r}")
        return getattr(domain, self.name)(dim)

    def to_dict(self) -> dict:
        return {"name": self.name, "dimension": self.dimension, "instance": self.instance}


def make_config(algorithm: str, params: dict, seed: int) -> TvnsConfig | TemConfig:
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    params = dict(params, seed=seed)
    try:
        if algorithm in ("vns", "tvns"):
            if algorithm == "vns":
                params.update(m_max=0, ls_m=0)
            return TvnsConfig(**params)
        if algorithm == "em":
            params.update(m_max=0, threshold=math.inf)
        return TemConfig(**params)
    except TypeError as exc:
        raise ConfigError(f"bad {algorithm} parameters: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad {algorithm} parameters: {exc}") from exc


def run_algorithm(algorithm: str, problem: domain.Problem, cfg):
    """Run one solver; returns (RunRecord, archive entries)."""
    if algorithm in ("vns", "tvns") and problem.encoding != "binary":
        raise ConfigError(f"{algorithm} needs a binary problem, got {problem.name}")
    if algorithm in ("em", "tem") and problem.encoding != "real":
        raise ConfigError(f"{algorithm} needs a real-valued problem, got {problem.name}")
    try:
        if algorithm == "vns":
            record, archive = run_vns(problem, cfg)
        elif algorithm == "tvns":
            record, archive = run_tvns(problem, cfg)
        elif algorithm == "em":
            record, archive = run_em(problem, cfg)
        else:
            record, archive = run_tem(problem, cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return record, list(archive)


def final_state(record: RunRecord) -> str:
    if "final_state" in record.extra:
        s = record.extra["final_state"]
        return f"k={s['k']};m={s['m']}"
    return f"mean_m={record.extra.get('mean_m_eff', 0.0):.6g}"


def file_stem(algorithm: str, problem: str, seed: int) -> str:
    safe = problem.replace(":", "-").replace("/", "-")
    return f"{algorithm}_{safe}_seed{seed}"


def summary_row(record: RunRecord) -> dict:
    return {
        "algorithm": record.algorithm,
        "problem": record.problem,
        "seed": record.seed,
        "status": "ok",
        "best_fitness": repr(float(record.best_fitness)),
        "iterations": record.iterations,
        "evaluations": record.evaluations,
        "wall_time": f"{record.wall_time:.6f}",
        "final_state": final_state(record),
        "error": "",
    }


def failed_row(algorithm: str, problem: str, seed: int, error: str) -> dict:
    row = dict.fromkeys(SUMMARY_COLUMNS, "")
    row.update(algorithm=algorithm, problem=problem, seed=seed, status="error", error=error)
    return row


def write_summary(rows: list[dict], path: Path, append: bool = False) -> None:
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "w" if fresh else "a", newline="") as fh:
        if fresh:
            fh.write(SCHEMA_LINE + "\n")
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        if fresh:
            writer.writeheader()
        writer.writerows(rows)


def read_summary(path: str | Path) -> list[dict]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def output_dir(explicit: str | None) -> Path:
    out = Path(explicit or os.environ.get(OUT_ENV) or "topometa-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def execute(algorithm: str, spec: ProblemSpec, params: dict, seed: int,
            out_dir: Path) -> dict:
    """Run one cell and write its record and archive; returns the summary row."""
    problem = spec.build()
    cfg = make_config(algorithm, params, seed)
    record, archive = run_algorithm(algorithm, problem, cfg)
    stem = file_stem(algorithm, problem.name, seed)
    record.archive_ref = f"{stem}.archive.jsonl"
    record.write(out_dir / f"{stem}.record.json")
    write_archive(archive, out_dir / record.archive_ref)
    return summary_row(record)


def _cell(args: tuple) -> dict:
    algorithm, spec, params, seed, out_dir = args
    try:
        return execute(algorithm, spec, params, seed, Path(out_dir))
    except Exception as exc:  # recorded per cell, never aborts the sweep
        name = spec.name
        return failed_row(algorithm, name, seed, f"{type(exc).__name__}: {exc}")


@dataclass
class ExperimentConfig:
    problem: ProblemSpec
    algorithms: list[tuple[str, dict]]
    seeds: list[int]
    out: str | None = None
    jobs: int = 1

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("experiment config must be a JSON object")
        unknown = set(d) - {"problem", "algorithms", "seeds", "replications", "base_seed",
                            "out", "jobs"}
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        problem = ProblemSpec.from_dict(d.get("problem"), base)
        algorithms = []
        for block in d.get("algorithms") or []:
            if isinstance(block, str):
                block = {"name": block}
            if not isinstance(block, dict) or block.get("name") not in ALGORITHMS:
                raise ConfigError(f"bad algorithm block {block!r}")
            algorithms.append((block["name"], dict(block.get("params", {}))))
        if not algorithms:
            raise ConfigError("experiment needs at least one algorithm block")
        seeds = resolve_seeds(d.get("seeds"), d.get("replications"), d.get("base_seed", 0))
        jobs = d.get("jobs", 1)
        if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
            raise ConfigError("jobs must be a positive integer")
        return cls(problem, algorithms, seeds, d.get("out"), jobs)


def resolve_seeds(seeds: Any, replications: Any, base_seed: Any) -> list[int]:
    """Explicit seed list, or ``base_seed + r`` for each replication r."""
    if seeds is not None:
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("seed list must be a non-empty list")
        if replications is not None and replications != len(seeds):
            raise ConfigError("seed list length must equal the replication count")
        out = seeds
    else:
        reps = 1 if replications is None else replications
        if isinstance(reps, bool) or not isinstance(reps, int) or reps < 1:
            raise ConfigError("replications must be a positive integer")
        if isinstance(base_seed, bool) or not isinstance(base_seed, int):
            raise ConfigError("base_seed must be an integer")
        out = [base_seed + r for r in range(reps)]
    if any(isinstance(s, bool) or not isinstance(s, int) or s < 0 for s in out):
        raise ConfigError("seeds must be non-negative integers")
    return list(out)


def run_experiment(exp: ExperimentConfig, out_dir: Path) -> list[dict]:
    """Run every (algorithm, seed) cell; rows come back in config order."""
    cells = [(alg, exp.problem, params, seed, str(out_dir))
             for alg, params in exp.algorithms for seed in exp.seeds]
    if exp.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=exp.jobs) as pool:
            rows = list(pool.map(_cell, cells))
    else:
        rows = [_cell(c) for c in cells]
    return rows


def write_best_table(rows: list[dict], algorithms: list[str], path: Path) -> None:
    table: dict[int, dict[str, str]] = {}
    for row in rows:
        table.setdefault(int(row["seed"]), {})[row["algorithm"]] = (
            row["best_fitness"] if row["status"] == "ok" else "")
    with open(path, "w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", *algorithms])
        for seed in sorted(table):
            writer.writerow([seed, *(table[seed].get(a, "") for a in algorithms)])


def load_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
