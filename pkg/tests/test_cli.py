import json

import pytest

from topometa.cli import main
from topometa.harness import ConfigError, read_summary, resolve_seeds


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def strip_time(rows):
    return [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]


def test_solve_writes_outputs(tmp_path):
    assert run("solve", "--algorithm", "tvns", "--problem", "onemax", "--dim", 20,
               "--seed", 7, "--out", tmp_path) == 0
    record = json.loads((tmp_path / "tvns_onemax_seed7.record.json").read_text())
    assert record["best_fitness"] == 20 and record["seed"] == 7
    assert record["archive_ref"] == "tvns_onemax_seed7.archive.jsonl"
    assert (tmp_path / record["archive_ref"]).exists()
    rows = read_summary(tmp_path / "summary.csv")
    assert len(rows) == 1 and rows[0]["status"] == "ok"
    assert (tmp_path / "summary.csv").read_text().startswith("# schema=1\n")


def test_solve_appends_rows(tmp_path):
    for seed in (1, 2):
        run("solve", "--algorithm", "vns", "--problem", "onemax", "--dim", 8,
            "--seed", seed, "--out", tmp_path, "--param", "max_iterations=5")
    assert [r["seed"] for r in read_summary(tmp_path / "summary.csv")] == ["1", "2"]


@pytest.mark.parametrize("argv", [
    ("solve", "--algorithm", "sa", "--problem", "onemax"),
    ("solve", "--algorithm", "tvns", "--problem", "knapsack"),
    ("solve", "--algorithm", "tvns", "--problem", "onemax", "--param", "m_max=-1"),
    ("solve", "--algorithm", "tem", "--problem", "onemax"),
    ("solve", "--algorithm", "tvns", "--problem", "onemax", "--param", "nonsense"),
    ("bogus",),
])
def test_solve_config_errors(tmp_path, argv):
    assert run(*argv, "--out", tmp_path) == 2


def test_missing_instance_exit_3(tmp_path):
    assert run("solve", "--algorithm", "tvns", "--problem", "setcover",
               "--instance", tmp_path / "nope.txt", "--out", tmp_path) == 3


def test_setcover_solve(tmp_path, setcover_path):
    assert run("solve", "--algorithm", "tvns", "--problem", "setcover", "--instance",
               setcover_path, "--seed", 0, "--out", tmp_path) == 0
    row = read_summary(tmp_path / "summary.csv")[0]
    assert row["problem"] == "setcover:setcover_10x8" and float(row["best_fitness"]) == 6


def test_env_var_sets_output(tmp_path, monkeypatch):
    monkeypatch.setenv("TOPO_META_OUT", str(tmp_path / "env"))
    assert run("solve", "--algorithm", "em", "--problem", "sphere", "--dim", 2,
               "--param", "max_iterations=3", "--param", "population_size=4") == 0
    assert (tmp_path / "env" / "em_sphere_seed0.record.json").exists()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"algorithm": "vns", "problem": {"name": "onemax", "dimension": 6},
                               "params": {"max_iterations": 4}, "seed": 3}))
    assert run("solve", "--config", cfg, "--seed", 5, "--out", tmp_path) == 0
    row = read_summary(tmp_path / "summary.csv")[0]
    assert row["seed"] == "5" and row["iterations"] == "4"


def test_vns_equals_tvns_without_simplices(tmp_path):
    run("solve", "--algorithm", "vns", "--problem", "onemax", "--dim", 12, "--seed", 4,
        "--out", tmp_path / "a")
    run("solve", "--algorithm", "tvns", "--problem", "onemax", "--dim", 12, "--seed", 4,
        "--param", "m_max=0", "--out", tmp_path / "b")
    a = json.loads((tmp_path / "a" / "vns_onemax_seed4.record.json").read_text())
    b = json.loads((tmp_path / "b" / "tvns_onemax_seed4.record.json").read_text())
    assert a["trace"] == b["trace"] and a["best"] == b["best"]


# ----------------------------------------------------------------- analyze


def write_cloud(path, points):
    path.write_text("".join(json.dumps({"t": t, "coords": p, "fitness": 0.0}) + "\n"
                            for t, p in enumerate(points)))
    return path


def test_analyze_two_points(tmp_path):
    arch = write_cloud(tmp_path / "two.jsonl", [[0.0], [3.0]])
    assert run("analyze", "--archive", arch, "--max-radius", 5, "--out", tmp_path) == 0
    assert (tmp_path / "barcode.csv").read_text().splitlines()[1:] == ["0,0,inf", "0,0,3"]
    for name in ("barcode.json", "barcode.svg", "report.json"):
        assert (tmp_path / name).exists()


def test_analyze_k_sweep(tmp_path):
    assert run("fixtures", "--name", "square", "--out", tmp_path) == 0
    assert run("analyze", "--archive", tmp_path / "square.archive.jsonl",
               "--k-sweep", "0.5:1.5:0.5", "--out", tmp_path / "sweep") == 0
    files = sorted(p.name for p in (tmp_path / "sweep").glob("barcode_k*.csv"))
    assert files == ["barcode_k0.5.csv", "barcode_k1.5.csv", "barcode_k1.csv"]
    rows = (tmp_path / "sweep" / "barcode_k1.5.csv").read_text().splitlines()
    assert any(r.startswith("1,1,") for r in rows)


def test_analyze_malformed_line(tmp_path, capsys):
    arch = tmp_path / "bad.jsonl"
    arch.write_text('{"t": 0, "coords": [0.0], "fitness": 0}\n{not json\n')
    assert run("analyze", "--archive", arch, "--out", tmp_path) == 3
    assert "line 2" in capsys.readouterr().err


def test_analyze_missing_file(tmp_path):
    assert run("analyze", "--archive", tmp_path / "none.jsonl", "--out", tmp_path) == 3


def test_analyze_bad_options(tmp_path):
    arch = write_cloud(tmp_path / "two.jsonl", [[0.0], [3.0]])
    assert run("analyze", "--archive", arch, "--noise-ratio", 2, "--out", tmp_path) == 2
    assert run("analyze", "--archive", arch, "--max-radius", 1, "--k-sweep", "1:2:1",
               "--out", tmp_path) == 2


# ----------------------------------------------------------------- compare


def experiment(tmp_path, **kw):
    cfg = {"problem": {"name": "onemax", "dimension": 10},
           "algorithms": [{"name": "vns", "params": {"max_iterations": 10}},
                          {"name": "tvns", "params": {"max_iterations": 10}}],
           "seeds": [0, 1, 2, 3, 4]}
    cfg.update(kw)
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    return path


def test_compare_grid(tmp_path):
    assert run("compare", "--config", experiment(tmp_path), "--out", tmp_path / "o") == 0
    rows = read_summary(tmp_path / "o" / "summary.csv")
    assert len(rows) == 10
    table = read_summary(tmp_path / "o" / "best_table.csv")
    assert [r["seed"] for r in table] == ["0", "1", "2", "3", "4"]
    # the shared seeding contract gives both solvers the same starting point per seed
    for seed in range(5):
        first = [json.loads((tmp_path / "o" / f"{alg}_onemax_seed{seed}.archive.jsonl")
                            .read_text().splitlines()[0]) for alg in ("vns", "tvns")]
        assert first[0]["bits"] == first[1]["bits"]


def test_compare_parallel_matches_serial(tmp_path):
    run("compare", "--config", experiment(tmp_path), "--out", tmp_path / "s")
    run("compare", "--config", experiment(tmp_path), "--jobs", 2, "--out", tmp_path / "p")
    serial = strip_time(read_summary(tmp_path / "s" / "summary.csv"))
    parallel = strip_time(read_summary(tmp_path / "p" / "summary.csv"))
    assert serial == parallel


def test_compare_single_cell_equals_solve(tmp_path):
    cfg = experiment(tmp_path, algorithms=[{"name": "tvns", "params": {"max_iterations": 10}}],
                     seeds=[3])
    run("compare", "--config", cfg, "--out", tmp_path / "c")
    run("solve", "--algorithm", "tvns", "--problem", "onemax", "--dim", 10, "--seed", 3,
        "--param", "max_iterations=10", "--out", tmp_path / "s")
    assert strip_time(read_summary(tmp_path / "c" / "summary.csv")) == \
        strip_time(read_summary(tmp_path / "s" / "summary.csv"))
    name = "tvns_onemax_seed3.record.json"
    assert (tmp_path / "c" / name).read_bytes() == (tmp_path / "s" / name).read_bytes()


def test_compare_failed_cell_exit_1(tmp_path):
    cfg = experiment(tmp_path, algorithms=["vns", {"name": "tvns", "params": {"k_max": 50}}],
                     seeds=[0])
    assert run("compare", "--config", cfg, "--out", tmp_path / "o") == 1
    statuses = [r["status"] for r in read_summary(tmp_path / "o" / "summary.csv")]
    assert statuses == ["ok", "error"]


@pytest.mark.parametrize("override", [
    {"seeds": []}, {"algorithms": []}, {"algorithms": ["sa"]}, {"jobs": 0}, {"colour": 1},
])
def test_compare_config_errors(tmp_path, override):
    assert run("compare", "--config", experiment(tmp_path, **override), "--out", tmp_path) == 2


def test_resolve_seeds():
    assert resolve_seeds(None, 3, 10) == [10, 11, 12]
    assert resolve_seeds([4, 2], None, 0) == [4, 2]
    with pytest.raises(ConfigError):
        resolve_seeds([1], 2, 0)


# ---------------------------------------------------------------- fixtures


def test_fixtures_list(capsys):
    assert run("fixtures", "--list") == 0
    assert capsys.readouterr().out.split() == [
        "filled-triangle", "hemi-icosahedron", "hollow-triangle", "square", "two-point"]


def test_fixtures_hemi(tmp_path):
    assert run("fixtures", "--name", "hemi-icosahedron", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "hemi-icosahedron.complex.json").read_text())
    assert doc["f_vector"] == [6, 15, 10]
    assert doc["expected"] == {"betti_z2": [1, 1, 1], "euler_characteristic": 1}


def test_fixtures_square(tmp_path):
    run("fixtures", "--name", "square", "--out", tmp_path)
    assert len((tmp_path / "square.archive.jsonl").read_text().splitlines()) == 4
    assert run("fixtures", "--name", "klein", "--out", tmp_path) == 2
