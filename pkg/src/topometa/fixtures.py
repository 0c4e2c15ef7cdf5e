"""Built-in homology fixtures with their known invariants."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .domain import RealSolution
from .records import write_archive
from .simplex import ArchiveEntry
from .tda import SimplicialComplex, betti_numbers

# Six-vertex real projective plane (antipodal quotient of the icosahedron).
# Labels are chosen so that the triangle path 1-6-4-1 is essential while
# 1-6-4-2-5-1 bounds.
HEMI_ICOSAHEDRON_FACETS = (
    (1, 2, 3), (1, 2, 4), (1, 3, 6), (1, 4, 5), (1, 5, 6),
    (2, 3, 5), (2, 4, 6), (2, 5, 6), (3, 4, 5), (3, 4, 6),
)


def hemi_icosahedron() -> SimplicialComplex:
    return SimplicialComplex.from_facets(HEMI_ICOSAHEDRON_FACETS)


def filled_triangle() -> SimplicialComplex:
    return SimplicialComplex.from_facets([(0, 1, 2)])


def hollow_triangle() -> SimplicialComplex:
    return SimplicialComplex.from_facets([(0, 1), (1, 2), (0, 2)])


def square_cloud() -> list[RealSolution]:
    return [RealSolution(p) for p in ((0, 0), (1, 0), (1, 1), (0, 1))]


def two_point_cloud(d: float = 3.0) -> list[RealSolution]:
    return [RealSolution((0.0,)), RealSolution((d,))]


COMPLEXES = {
    "hemi-icosahedron": hemi_icosahedron,
    "filled-triangle": filled_triangle,
    "hollow-triangle": hollow_triangle,
}

CLOUDS = {
    "square": (square_cloud, {"H1": [[1.0, math.sqrt(2.0)]]}),
    "two-point": (two_point_cloud, {"H0": [[0.0, "inf"], [0.0, 3.0]]}),
}


def names() -> list[str]:
    return sorted([*COMPLEXES, *CLOUDS])


def complex_document(name: str) -> dict:
    c = COMPLEXES[name]()
    return {
        "name": name,
        "vertices": list(c.vertices),
        "simplices": [list(s) for s in c.simplices],
        "f_vector": list(c.f_vector()),
        "expected": {
            "betti_z2": list(betti_numbers(c)),
            "euler_characteristic": c.euler_characteristic(),
        },
    }


def write_fixture(name: str, out_dir: str | Path) -> list[Path]:
    """Write fixture ``name`` into ``out_dir``; returns the files created."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if name in COMPLEXES:
        path = out_dir / f"{name}.complex.json"
        path.write_text(json.dumps(complex_document(name), indent=1, sort_keys=True) + "\n")
        return [path]
    if name in CLOUDS:
        build, expected = CLOUDS[name]
        cloud = out_dir / f"{name}.archive.jsonl"
        write_archive([ArchiveEntry(p, 0.0, t) for t, p in enumerate(build())], cloud)
        meta = out_dir / f"{name}.expected.json"
        meta.write_text(json.dumps({"name": name, "expected_barcode": expected},
                                   indent=1, sort_keys=True) + "\n")
        return [cloud, meta]
    raise KeyError(f"unknown fixture {name!r}; known: {', '.join(names())}")
