"""Run records and archive (JSON-lines) serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .domain import BinarySolution, RealSolution, Solution
from .simplex import Archive, ArchiveEntry


def solution_to_json(s: Solution) -> str | list[float]:
    return str(s) if isinstance(s, BinarySolution) else list(s.coords)


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, no whitespace variance, repr floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass
class RunRecord:
    """Reproducible trace of one optimization run.

    ``wall_time`` is measured but kept out of :meth:`to_json` so that
    replaying the same config and seed yields byte-identical records.
    """

    algorithm: str
    problem: str
    config: dict
    seed: int
    trace: list[dict]
    best: Solution
    best_fitness: float
    iterations: int
    evaluations: int
    stop_reason: str
    archive_ref: str | None = None
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "algorithm": self.algorithm,
            "problem": self.problem,
            "config": self.config,
            "seed": self.seed,
            "trace": self.trace,
            "best": solution_to_json(self.best),
            "best_fitness": self.best_fitness,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "stop_reason": self.stop_reason,
            "archive_ref": self.archive_ref,
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())


def entry_to_json(entry: ArchiveEntry) -> str:
    key = "bits" if isinstance(entry.solution, BinarySolution) else "coords"
    return dumps({"t": entry.t, key: solution_to_json(entry.solution), "fitness": entry.fitness})


def write_archive(entries: Archive | Iterable[ArchiveEntry], path: str | Path) -> None:
    with open(path, "w") as fh:
        for entry in entries:
            fh.write(entry_to_json(entry) + "\n")


class ArchiveFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_archive(path: str | Path) -> list[ArchiveEntry]:
    """Parse an archive dump; raises :class:`ArchiveFormatError` naming the bad line."""
    entries = []
    kind = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ArchiveFormatError(lineno, f"invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise ArchiveFormatError(lineno, "record is not an object")
            try:
                if "bits" in rec:
                    sol: Solution = BinarySolution(rec["bits"])
                elif "coords" in rec:
                    sol = RealSolution(rec["coords"])
                else:
                    raise ValueError("missing 'bits' or 'coords'")
                entry = ArchiveEntry(sol, float(rec.get("fitness", 0.0)), int(rec["t"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ArchiveFormatError(lineno, str(exc)) from None
            if kind is not None and type(sol) is not kind:
                raise ArchiveFormatError(lineno, "mixed encodings")
            if entries and len(sol) != len(entries[0].solution):
                raise ArchiveFormatError(lineno, "dimension mismatch")
            kind = type(sol)
            entries.append(entry)
    return entries
