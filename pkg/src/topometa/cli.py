"""Command-line entry point: ``topometa solve|analyze|compare|fixtures``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import fixtures
from .harness import (
    ALGORITHMS,
    ConfigError,
    ExperimentConfig,
    InstanceError,
    ProblemSpec,
    execute,
    load_json,
    make_config,
    output_dir,
    run_experiment,
    write_best_table,
    write_summary,
)
from .records import ArchiveFormatError, read_archive
from .tda import build_rips, compute_persistence, persistence_vs_k, regularity_report

EXIT_OK, EXIT_FAILED_CELLS, EXIT_CONFIG, EXIT_INPUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parse_param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"--param expects key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _parse_sweep(text: str) -> list[float]:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ConfigError(f"--k-sweep expects lo:hi:step, got {text!r}") from None
    if not (0 < lo <= hi) or not step > 0:
        raise ConfigError("--k-sweep needs 0 < lo <= hi and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def cmd_solve(args) -> int:
    cfg = load_json(args.config) if args.config else {}
    base = Path(args.config).parent if args.config else None
    algorithm = args.algorithm or cfg.get("algorithm")
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    problem = dict(cfg.get("problem") or {})
    if args.problem:
        problem["name"] = args.problem
    if args.dim is not None:
        problem["dimension"] = args.dim
    if args.instance:
        problem["instance"] = args.instance
    spec = ProblemSpec.from_dict(problem, base)
    if spec.instance and not Path(spec.instance).is_file():
        raise InstanceError(f"instance file not found: {spec.instance}")
    params = dict(cfg.get("params") or {})
    params.update(_parse_param(p) for p in args.param)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    out = output_dir(args.out or cfg.get("out"))
    make_config(algorithm, params, seed)
    row = execute(algorithm, spec, params, seed, out)
    write_summary([row], out / "summary.csv", append=True)
    print(f"{row['algorithm']} {row['problem']} seed={seed} best={row['best_fitness']}"
          f" iterations={row['iterations']} -> {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        entries = read_archive(args.archive)
    except ArchiveFormatError as exc:
        raise InstanceError(f"{args.archive}: {exc}") from exc
    except OSError as exc:
        raise InstanceError(f"cannot read archive: {exc}") from exc
    if not entries:
        raise InstanceError(f"{args.archive}: archive is empty")
    if args.max_radius is not None and args.k_sweep:
        raise ConfigError("use either --max-radius or --k-sweep, not both")
    if not 0 < args.noise_ratio < 1:
        raise ConfigError("--noise-ratio must lie in (0, 1)")
    if args.max_dim not in (1, 2, 3):
        raise ConfigError("--max-dim must be 1, 2 or 3")
    cloud = [e.solution for e in entries]
    out = output_dir(args.out)

    def emit(barcode, suffix: str) -> None:
        (out / f"barcode{suffix}.csv").write_text(barcode.to_csv())
        (out / f"barcode{suffix}.json").write_text(barcode.to_json())
        (out / f"barcode{suffix}.svg").write_text(barcode.to_svg())
        report = regularity_report(barcode, args.noise_ratio).to_dict()
        (out / f"report{suffix}.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")

    if args.k_sweep:
        ks = _parse_sweep(args.k_sweep)
        for k, barcode in persistence_vs_k([cloud], ks, args.max_dim):
            emit(barcode, f"_k{format(k, 'g')}")
        print(f"wrote {len(ks)} barcodes to {out}")
    else:
        radius = math.inf if args.max_radius is None else args.max_radius
        if not radius > 0:
            raise ConfigError("--max-radius must be positive")
        emit(compute_persistence(build_rips(cloud, None, args.max_dim, radius)), "")
        print(f"wrote barcode for {len(cloud)} points to {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    base = Path(args.config).parent
    exp = ExperimentConfig.from_dict(load_json(args.config), base)
    if args.jobs is not None:
        exp.jobs = args.jobs
    for alg, params in exp.algorithms:
        make_config(alg, params, exp.seeds[0])
    out = output_dir(args.out or exp.out)
    rows = run_experiment(exp, out)
    write_summary(rows, out / "summary.csv")
    write_best_table(rows, list(dict.fromkeys(a for a, _ in exp.algorithms)),
                     out / "best_table.csv")
    failed = [r for r in rows if r["status"] != "ok"]
    for r in failed:
        print(f"cell {r['algorithm']}/seed {r['seed']} failed: {r['error']}", file=sys.stderr)
    print(f"{len(rows) - len(failed)}/{len(rows)} cells ok -> {out}")
    return EXIT_FAILED_CELLS if failed else EXIT_OK


def cmd_fixtures(args) -> int:
    if args.list or not args.name:
        print("\n".join(fixtures.names()))
        return EXIT_OK
    try:
        paths = fixtures.write_fixture(args.name, output_dir(args.out))
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topometa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run one solver on one problem")
    p.add_argument("--algorithm", help=f"one of {', '.join(ALGORITHMS)}")
    p.add_argument("--problem", help="onemax | setcover | sphere | rastrigin")
    p.add_argument("--dim", type=int, help="problem dimension")
    p.add_argument("--instance", help="OR-Library set-cover file")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON run config; flags override it")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="solver parameter override (repeatable)")
    p.add_argument("--out", help="output directory (default $TOPO_META_OUT or ./topometa-out)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analyze", help="persistent homology of an archive")
    p.add_argument("--archive", required=True)
    p.add_argument("--max-dim", type=int, default=2)
    p.add_argument("--max-radius", type=float)
    p.add_argument("--k-sweep", metavar="LO:HI:STEP")
    p.add_argument("--noise-ratio", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="run an (algorithm x seed) experiment grid")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fixtures", help="emit built-in homology fixtures")
    p.add_argument("--list", action="store_true")
    p.add_argument("--name")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"topometa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstanceError as exc:
        print(f"topometa: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
