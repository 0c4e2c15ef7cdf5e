"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
without ``-s``) or directly as ``python tests/test_acceptance.py``.
"""

import itertools
import json
import math
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import brute_simplices, persistence_from_ranks  # noqa: E402
from topometa.cli import main as cli  # noqa: E402
from topometa.domain import (  # noqa: E402
    BinarySolution as B,
    evaluate_setcover,
    hamming,
    onemax,
    read_setcover,
    setcover,
    sphere,
)
from topometa.fixtures import hemi_icosahedron, square_cloud, two_point_cloud  # noqa: E402
from topometa.records import dumps  # noqa: E402
from topometa.simplex import (  # noqa: E402
    NeighborhoodParams,
    enumerate_simplices_containing,
    extension_candidates,
    is_simplex,
)
from topometa.tda import (  # noqa: E402
    betti_numbers,
    build_rips,
    compute_persistence,
    edge_path,
    is_boundary,
)
from topometa.tem import TemConfig, run_em, run_tem  # noqa: E402
from topometa.tvns import (  # noqa: E402
    ScheduleState,
    TvnsConfig,
    initial_state,
    next_neighborhood,
    run_tvns,
    run_vns,
)

DATA = Path(__file__).parent / "data"


_emit = print


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    """Let criterion lines reach the terminal even under output capture."""
    global _emit

    def emit(line):
        with capsys.disabled():
            print(line, flush=True)

    _emit = emit
    yield
    _emit = print


@contextmanager
def criterion(number, title, limit=None):
    """Time the body; print one PASS/FAIL line; fail when over the time limit."""
    state = {"detail": ""}
    start = time.perf_counter()
    ok = False
    try:
        yield state
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        slow = limit is not None and elapsed >= limit
        verdict = "PASS" if ok and not slow else "FAIL"
        budget = f", limit {limit:g}s" if limit is not None else ""
        note = f" [{state['detail']}]" if state["detail"] else ""
        if slow and ok:
            note += " [over time limit]"
        line = f"criterion {number} {verdict}: {title} ({elapsed:.2f}s{budget}){note}"
        _emit(line)
    assert not slow, f"criterion {number} took {elapsed:.1f}s (limit {limit}s)"


def P(m, k, mode):
    return NeighborhoodParams(m, k, mode)


def test_criterion_1_reference_examples():
    with criterion(1, "reference examples reproduced exactly", limit=1) as c:
        assert hamming(B("1011110"), B("1111110")) == 1
        assert is_simplex([B("1011110"), B("1111111"), B("1011011")], P(2, 2, "strict"))
        strict = {str(y) for y in extension_candidates([B("1011110"), B("1111111")], P(1, 2, "strict"))}
        assert {"1011101", "1011011", "1010111"} <= strict
        at_most = {str(y) for y in extension_candidates([B("1011110"), B("1111111")], P(1, 2, "at_most"))}
        assert "1011111" in at_most
        tri = [B("1011110"), B("1111111"), B("1011111")]
        assert sorted(hamming(a, b) for a, b in itertools.combinations(tri, 2)) == [1, 1, 2]
        far = {str(y) for y in extension_candidates([B("1011110"), B("0111011")], P(1, 4, "strict"))}
        assert "1100111" in far
        c["detail"] = f"strict-2 set size {len(strict)}, at-most-2 set size {len(at_most)}"


def test_criterion_2_fallback_identities():
    with criterion(2, "m_max=0 reduces TVNS to VNS and TEM to EM byte-for-byte", limit=60) as c:
        for seed in range(20):
            cfg = TvnsConfig(m_max=0, seed=seed, max_iterations=100, stall_limit=100)
            a, _ = run_tvns(onemax(20), cfg)
            b, _ = run_vns(onemax(20), cfg)
            assert dumps(a.trace) == dumps(b.trace), f"VNS trace differs at seed {seed}"
        for seed in range(20):
            cfg = TemConfig(m_max=0, threshold=math.inf, seed=seed, max_iterations=100)
            a, _ = run_tem(sphere(5), cfg)
            b, _ = run_em(sphere(5), cfg)
            assert dumps(a.trace) == dumps(b.trace), f"EM trace differs at seed {seed}"
        c["detail"] = "20 seeds each"


def test_criterion_3_simplex_oracle():
    with criterion(3, "simplex enumeration equals brute-force subsets", limit=60) as c:
        rng = np.random.default_rng(2024)
        checks = 0
        for _ in range(200):
            n = int(rng.integers(2, 11))
            size = int(rng.integers(0, 21))
            archive = ["".join(rng.choice(["0", "1"], n)) for _ in range(size)]
            x = "".join(rng.choice(["0", "1"], n))
            if archive and rng.random() < 0.3:
                x = archive[int(rng.integers(size))]
            pool = [B(s) for s in archive]
            for mode in ("strict", "at_most"):
                for k in range(1, 5):
                    for m in range(4):
                        got = [tuple(str(v) for v in s) for s in
                               enumerate_simplices_containing(pool, B(x), P(m, k, mode))]
                        assert got == brute_simplices(archive, x, m, k, mode)
                        checks += 1
        c["detail"] = f"200 archives, {checks} (m, k, mode) cases"


def test_criterion_4_homology_fixtures():
    with criterion(4, "hemi-icosahedron, square and two-point fixtures", limit=1) as c:
        rp2 = hemi_icosahedron()
        assert betti_numbers(rp2) == (1, 1, 1)
        assert rp2.euler_characteristic() == 1
        assert is_boundary(edge_path([1, 6, 4, 1]), rp2) is False
        assert is_boundary(edge_path([1, 6, 4, 2, 5, 1]), rp2) is True
        h1 = compute_persistence(build_rips(square_cloud(), max_dim=2)).select(dim=1)
        assert len(h1) == 1
        assert abs(h1[0].birth - 1) < 1e-9 and abs(h1[0].death - math.sqrt(2)) < 1e-9
        h0 = compute_persistence(build_rips(two_point_cloud(3.0))).select(dim=0)
        assert [(i.birth, i.death) for i in h0] == [(0, math.inf), (0, 3)]
        c["detail"] = f"square H1 = [{h1[0].birth:g}, {h1[0].death:.12g})"


def test_criterion_5_persistence_oracle():
    with criterion(5, "persistence equals per-scale Z/2 rank reconstruction", limit=60) as c:
        rng = np.random.default_rng(77)
        total = 0
        for _ in range(50):
            n = int(rng.integers(1, 9))
            if rng.random() < 0.5:
                bits = int(rng.integers(3, 8))
                cloud = ["".join(rng.choice(["0", "1"], bits)) for _ in range(n)]
            else:
                cloud = [list(rng.integers(0, 4, 2).astype(float)) for _ in range(n)]
            max_dim = int(rng.integers(1, 4))
            f = build_rips(cloud, max_dim=max_dim)
            got = {}
            for iv in compute_persistence(f).select():
                key = (iv.dim, iv.birth, iv.death)
                got[key] = got.get(key, 0) + 1
            assert got == dict(persistence_from_ranks(list(f.simplices), list(f.births), max_dim))
            total += sum(got.values())
        c["detail"] = f"50 clouds, {total} intervals"


def test_criterion_6_schedule():
    with criterion(6, "no-improvement orbit visits all 9 states in order", limit=1) as c:
        cfg = TvnsConfig(k_min=1, k_max=3, m_max=2)
        expected = [(k, m) for k in (1, 2, 3) for m in (2, 1, 0)]
        state, orbit = initial_state(cfg), []
        for _ in range(9):
            orbit.append((state.k, state.m))
            state = next_neighborhood(state, False, cfg)
        assert orbit == expected
        assert (state.k, state.m) == (1, 2)
        for k, m in expected:
            assert next_neighborhood(ScheduleState(k, m), True, cfg) == ScheduleState(1, 2)
        c["detail"] = " -> ".join(f"({k},{m})" for k, m in orbit)


def _setcover_optimum(inst):
    return min(evaluate_setcover(inst, B(bits))
               for bits in itertools.product([0, 1], repeat=inst.n_sets))


def test_criterion_7_optimization_sanity():
    with criterion(7, "desk-scale optimization sanity", limit=300) as c:
        hits = {}
        big = dict(max_evaluations=10_000, max_iterations=100_000, stall_limit=100_000)
        for name, runner, extra in (("vns", run_vns, {}), ("tvns", run_tvns, {})):
            ok = 0
            for seed in range(10):
                rec, _ = runner(onemax(50), TvnsConfig(seed=seed, **big, **extra))
                ok += rec.best_fitness == 50 and _evals_to_best(rec) <= 10_000
            hits[f"onemax50/{name}"] = ok

        inst = read_setcover(DATA / "setcover_10x8.txt")
        optimum = _setcover_optimum(inst)
        problem = setcover(inst)
        hits["setcover/tvns"] = sum(
            run_tvns(problem, TvnsConfig(seed=seed, stall_limit=50))[0].best_fitness == optimum
            for seed in range(10))

        for name, runner, cfg in (("em", run_em, {}), ("tem", run_tem, {"m_max": 2})):
            ok = 0
            for seed in range(10):
                rec, _ = runner(sphere(5), TemConfig(population_size=20, max_iterations=1000,
                                                     seed=seed, **cfg))
                ok += rec.best_fitness < 0.1
            hits[f"sphere5/{name}"] = ok
        c["detail"] = ", ".join(f"{k} {v}/10" for k, v in hits.items()) + f", setcover opt {optimum:g}"
        assert all(v >= 9 for v in hits.values()), hits


def _evals_to_best(rec):
    """Evaluations spent when the final incumbent was first reached."""
    for row in rec.trace:
        if row["incumbent_fitness"] == rec.best_fitness:
            return row["evaluations"]
    return 0  # the initial solution was already optimal


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "replayed runs give byte-identical records, archives, barcodes") as c:
        cases = [("tvns", "onemax", 12), ("vns", "onemax", 12),
                 ("tem", "sphere", 3), ("em", "sphere", 3)]
        compared = 0
        for alg, problem, dim in cases:
            outs = []
            for rep in ("a", "b"):
                out = tmp_path / rep / alg
                params = ["--param", "max_iterations=40"]
                assert cli(["solve", "--algorithm", alg, "--problem", problem, "--dim", str(dim),
                            "--seed", "11", "--out", str(out), *params]) == 0
                archive = next(out.glob("*.archive.jsonl"))
                assert cli(["analyze", "--archive", str(archive), "--max-radius", "3",
                            "--out", str(out / "tda")]) == 0
                outs.append(out)
            files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*")
                           if p.is_file() and p.name != "summary.csv")
            for rel in files:
                assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel
                compared += 1
            rows = [json.loads((o / next(o.glob("*.record.json")).name).read_text()) for o in outs]
            assert rows[0] == rows[1]
        c["detail"] = f"{compared} files compared"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
