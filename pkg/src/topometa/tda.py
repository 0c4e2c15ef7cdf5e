"""Vietoris–Rips filtrations and Z/2 persistent homology.

Boundary columns are Python ints used as bit sets over filtration positions,
so column addition is XOR and the pivot is ``bit_length() - 1``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_cloud, check_is_fitted
from .domain import distance as natural_distance

INF = math.inf


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else format(x, ".17g")


# ------------------------------------------------------------------ complexes


@dataclass(frozen=True)
class SimplicialComplex:
    """Finite abstract simplicial complex given by its full simplex list."""

    simplices: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        canon = sorted({tuple(sorted(s)) for s in self.simplices}, key=lambda s: (len(s), s))
        if len(canon) != len(self.simplices):
            raise ValueError("duplicate simplices")
        present = set(canon)
        for s in canon:
            if not s:
                raise ValueError("empty simplex")
            if len(s) > 1:
                for face in itertools.combinations(s, len(s) - 1):
                    if face not in present:
                        raise ValueError(f"not face-closed: {face} missing for {s}")
        object.__setattr__(self, "simplices", tuple(canon))

    @classmethod
    def from_facets(cls, facets: Iterable[Iterable[int]]) -> "SimplicialComplex":
        closure = set()
        for facet in facets:
            f = tuple(sorted(facet))
            for r in range(1, len(f) + 1):
                closure.update(itertools.combinations(f, r))
        return cls(tuple(closure))

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.simplices if len(s) == 1)

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def of_dim(self, d: int) -> list[tuple[int, ...]]:
        return [s for s in self.simplices if len(s) == d + 1]

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.of_dim(d)) for d in range(self.dimension + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * c for d, c in enumerate(self.f_vector()))


def rank_z2(rows: Iterable[int]) -> int:
    """Rank over Z/2 of vectors encoded as int bit sets."""
    pivots: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                break
            v ^= pivots[top]
    return len(pivots)


def _boundary_columns(c: SimplicialComplex, d: int) -> list[int]:
    """Columns of the d-th boundary map as bit sets over the (d-1)-simplices."""
    rows = {s: i for i, s in enumerate(c.of_dim(d - 1))}
    cols = []
    for s in c.of_dim(d):
        v = 0
        for face in itertools.combinations(s, d):
            v |= 1 << rows[face]
        cols.append(v)
    return cols


def betti_numbers(c: SimplicialComplex) -> tuple[int, ...]:
    top = c.dimension
    ranks = [0] + [rank_z2(_boundary_columns(c, d)) for d in range(1, top + 1)] + [0]
    return tuple(len(c.of_dim(d)) - ranks[d] - ranks[d + 1] for d in range(top + 1))


def edge_path(vertices: Sequence[int]) -> list[tuple[int, int]]:
    """Edges of the closed or open walk through ``vertices``."""
    return [tuple(sorted(e)) for e in zip(vertices, vertices[1:])]


def is_boundary(cycle: Iterable[Sequence[int]], c: SimplicialComplex) -> bool:
    """Whether a Z/2 1-cycle bounds a 2-chain of ``c``."""
    edges = {s: i for i, s in enumerate(c.of_dim(1))}
    vec = 0
    for e in cycle:
        key = tuple(sorted(e))
        if key not in edges:
            raise ValueError(f"edge {key} is not in the complex")
        vec ^= 1 << edges[key]
    degree: dict[int, int] = {}
    for key, i in edges.items():
        if vec >> i & 1:
            for v in key:
                degree[v] = degree.get(v, 0) ^ 1
    if any(degree.values()):
        raise ValueError("input is not a cycle: its boundary is nonzero")
    cols = _boundary_columns(c, 2) if c.dimension >= 2 else []
    return rank_z2(cols) == rank_z2(cols + [vec])


# ---------------------------------------------------------------- filtrations


@dataclass(frozen=True)
class Filtration:
    """Simplices with birth values in (birth, dimension, vertices) order."""

    simplices: tuple[tuple[int, ...], ...]
    births: tuple[float, ...]
    max_dim: int
    max_radius: float
    n_points: int

    def __len__(self) -> int:
        return len(self.simplices)

    def complex_at(self, r: float) -> SimplicialComplex:
        return SimplicialComplex(tuple(s for s, b in zip(self.simplices, self.births) if b <= r))


def build_rips(cloud, distance: Callable | None = None, max_dim: int = 2,
               max_radius: float = INF) -> Filtration:
    """Vietoris–Rips filtration up to simplices of dimension ``max_dim``."""
    if max_dim not in (1, 2, 3):
        raise ValueError("max_dim must be 1, 2 or 3")
    if not max_radius > 0:
        raise ValueError("max_radius must be positive")
    points = check_cloud(cloud)
    dist = distance or natural_distance
    n = len(points)
    D = [[0.0] * n for _ in range(n)]
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        d = float(dist(points[i], points[j]))
        D[i][j] = D[j][i] = d
        if d <= max_radius:
            nbrs[i].add(j)
            nbrs[j].add(i)

    items: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (i,)) for i in range(n)]

    def grow(simplex: tuple[int, ...], birth: float, common: set[int]) -> None:
        for v in sorted(w for w in common if w > simplex[-1]):
            b = max(birth, *(D[u][v] for u in simplex))
            s = simplex + (v,)
            items.append((b, len(s) - 1, s))
            if len(s) <= max_dim:
                grow(s, b, common & nbrs[v])

    for i in range(n):
        grow((i,), 0.0, nbrs[i])
    items.sort()
    return Filtration(
        simplices=tuple(s for _, _, s in items),
        births=tuple(b for b, _, _ in items),
        max_dim=max_dim,
        max_radius=float(max_radius),
        n_points=n,
    )


@dataclass(frozen=True, order=True)
class PersistenceInterval:
    dim: int
    birth: float
    death: float

    def __post_init__(self):
        if self.death < self.birth:
            raise ValueError("death precedes birth")

    @property
    def length(self) -> float:
        return self.death - self.birth

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.death)


def _interval_key(iv: PersistenceInterval):
    return (iv.dim, iv.birth, -iv.death)


@dataclass
class Barcode:
    intervals: list[PersistenceInterval]
    n_points: int = 0
    max_dim: int = 2
    max_radius: float = INF

    def __post_init__(self):
        self.intervals = sorted(self.intervals, key=_interval_key)

    def select(self, dim: int | None = None, include_zero: bool = False,
               finite: bool | None = None) -> list[PersistenceInterval]:
        out = []
        for iv in self.intervals:
            if dim is not None and iv.dim != dim:
                continue
            if not include_zero and iv.length == 0:
                continue
            if finite is not None and finite == iv.is_infinite:
                continue
            out.append(iv)
        return out

    def to_dict(self, include_zero: bool = True) -> dict:
        return {
            "n_points": self.n_points,
            "max_dim": self.max_dim,
            "max_radius": _fmt(self.max_radius) if math.isinf(self.max_radius) else self.max_radius,
            "intervals": [
                {"dim": iv.dim, "birth": iv.birth,
                 "death": "inf" if iv.is_infinite else iv.death}
                for iv in self.select(include_zero=include_zero)
            ],
        }

    def to_json(self, include_zero: bool = True) -> str:
        return json.dumps(self.to_dict(include_zero), sort_keys=True, indent=1) + "\n"

    def to_csv(self, include_zero: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dim", "birth", "death"])
        for iv in self.select(include_zero=include_zero):
            writer.writerow([iv.dim, _fmt(iv.birth), _fmt(iv.death)])
        return buf.getvalue()

    def to_svg(self, width: int = 640, bar_height: int = 8, gap: int = 4) -> str:
        return render_svg(self, width, bar_height, gap)


def compute_persistence(f: Filtration) -> Barcode:
    """Standard column reduction of the Z/2 boundary matrix.

    Zero-length intervals are kept; :meth:`Barcode.select` filters them.
    """
    index = {s: i for i, s in enumerate(f.simplices)}
    reduced: dict[int, int] = {}  # pivot row -> reduced column with that pivot
    destroyers: set[int] = set()
    intervals = []
    for j, s in enumerate(f.simplices):
        if len(s) == 1:
            continue
        col = 0
        for face in itertools.combinations(s, len(s) - 1):
            col |= 1 << index[face]
        while col:
            low = col.bit_length() - 1
            if low not in reduced:
                reduced[low] = col
                destroyers.add(j)
                intervals.append(
                    PersistenceInterval(len(s) - 2, f.births[low], f.births[j]))
                break
            col ^= reduced[low]
    for i, s in enumerate(f.simplices):
        dim = len(s) - 1
        if i in reduced or i in destroyers or dim >= f.max_dim:
            continue
        intervals.append(PersistenceInterval(dim, f.births[i], INF))
    return Barcode(intervals, f.n_points, f.max_dim, f.max_radius)


# ------------------------------------------------------------------ analysis


@dataclass
class RegularityReport:
    noise_ratio: float
    thresholds: dict[int, float]
    long_lived: list[PersistenceInterval]
    noise: list[PersistenceInterval]
    infinite: list[PersistenceInterval]
    counts: dict = field(default_factory=dict)
    max_persistence: float = 0.0
    total_persistence: float = 0.0

    def to_dict(self) -> dict:
        def rows(ivs):
            return [[iv.dim, iv.birth, _fmt(iv.death) if iv.is_infinite else iv.death]
                    for iv in ivs]

        return {
            "noise_ratio": self.noise_ratio,
            "thresholds": {str(d): t for d, t in sorted(self.thresholds.items())},
            "counts": {str(d): c for d, c in sorted(self.counts.items())},
            "max_persistence": self.max_persistence,
            "total_persistence": self.total_persistence,
            "long_lived": rows(self.long_lived),
            "noise": rows(self.noise),
            "infinite": rows(self.infinite),
        }


def regularity_report(b: Barcode, noise_ratio: float = 0.5) -> RegularityReport:
    """Split finite, nonzero intervals into long-lived and noise.

    An interval is long-lived when its length is at least ``noise_ratio``
    times the longest finite interval of the same dimension.
    """
    if not 0 < noise_ratio < 1:
        raise ValueError("noise_ratio must lie strictly between 0 and 1")
    finite = b.select(finite=True)
    longest: dict[int, float] = {}
    for iv in finite:
        longest[iv.dim] = max(longest.get(iv.dim, 0.0), iv.length)
    thresholds = {d: noise_ratio * v for d, v in longest.items()}
    long_lived = [iv for iv in finite if iv.length >= thresholds[iv.dim]]
    noise = [iv for iv in finite if iv.length < thresholds[iv.dim]]
    counts: dict[int, dict[str, int]] = {}
    for kind, ivs in (("long_lived", long_lived), ("noise", noise)):
        for iv in ivs:
            counts.setdefault(iv.dim, {"long_lived": 0, "noise": 0})[kind] += 1
    return RegularityReport(
        noise_ratio=noise_ratio,
        thresholds=thresholds,
        long_lived=long_lived,
        noise=noise,
        infinite=b.select(finite=False),
        counts=counts,
        max_persistence=max(longest.values(), default=0.0),
        total_persistence=sum(iv.length for iv in finite),
    )


def persistence_vs_k(snapshots: Sequence, ks: Sequence[float], max_dim: int = 2,
                     distance: Callable | None = None) -> list[tuple[float, Barcode]]:
    """Barcode of each snapshot at Rips radius k, for ascending ks.

    A single snapshot is reused for every k; otherwise there must be one
    snapshot per k.
    """
    ks = list(ks)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("ks must be strictly ascending")
    snapshots = list(snapshots)
    if len(snapshots) == 1:
        snapshots = snapshots * len(ks)
    if len(snapshots) != len(ks):
        raise ValueError("need one snapshot, or one snapshot per k")
    return [(k, compute_persistence(build_rips(cloud, distance, max_dim, k)))
            for cloud, k in zip(snapshots, ks)]


# ------------------------------------------------------------------ export


def render_svg(b: Barcode, width: int = 640, bar_height: int = 8, gap: int = 4) -> str:
    bars = b.select()
    margin_left, margin_right, top = 48, 24, 16
    finite_ends = [iv.death for iv in bars if not iv.is_infinite] + [iv.birth for iv in bars]
    hi = max(finite_ends, default=1.0)
    if not math.isinf(b.max_radius):
        hi = max(hi, b.max_radius)
    hi = hi or 1.0
    plot_w = width - margin_left - margin_right
    x_inf = margin_left + plot_w

    def sx(v: float) -> float:
        return margin_left + plot_w * v / hi * 0.95

    lines = []
    y = top
    for dim in sorted({iv.dim for iv in bars}):
        lines.append(f'<text x="4" y="{y + bar_height}" font-size="10">H{dim}</text>')
        for iv in (iv for iv in bars if iv.dim == dim):
            x0 = sx(iv.birth)
            if iv.is_infinite:
                lines.append(f'<line x1="{x0:.2f}" y1="{y + bar_height / 2:.2f}" '
                             f'x2="{x_inf - 6:.2f}" y2="{y + bar_height / 2:.2f}" '
                             f'stroke="black" stroke-width="{bar_height}"/>')
                lines.append(f'<polygon points="{x_inf - 6:.2f},{y - 2:.2f} {x_inf:.2f},'
                             f'{y + bar_height / 2:.2f} {x_inf - 6:.2f},{y + bar_height + 2:.2f}" '
                             f'fill="black"/>')
            else:
                w = max(sx(iv.death) - x0, 0.5)
                lines.append(f'<rect x="{x0:.2f}" y="{y}" width="{w:.2f}" '
                             f'height="{bar_height}" fill="steelblue"/>')
            y += bar_height + gap
        y += 2 * gap
    axis_y = y + gap
    lines.append(f'<line x1="{margin_left}" y1="{axis_y}" x2="{x_inf}" y2="{axis_y}" stroke="gray"/>')
    lines.append(f'<text x="{margin_left}" y="{axis_y + 12}" font-size="10">0</text>')
    lines.append(f'<text x="{sx(hi):.2f}" y="{axis_y + 12}" font-size="10">{_fmt(hi)}</text>')
    height = axis_y + 20
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, *lines, "</svg>"]) + "\n"


# ------------------------------------------------------------------ estimator


class RipsPersistence(BaseEstimator, TransformerMixin):
    """Map point clouds to Rips persistence barcodes.

    ``X`` is a collection of clouds; each cloud is a sequence of solutions,
    bit strings or coordinate rows.
    """

    def __init__(self, max_dim: int = 2, max_radius: float = INF, distance=None):
        self.max_dim = max_dim
        self.max_radius = max_radius
        self.distance = distance

    def fit(self, X, y=None):
        if self.max_dim not in (1, 2, 3):
            raise ValueError("max_dim must be 1, 2 or 3")
        if not self.max_radius > 0:
            raise ValueError("max_radius must be positive")
        self.n_clouds_ = len(X)
        return self

    def transform(self, X) -> list[Barcode]:
        check_is_fitted(self, "n_clouds_")
        return [compute_persistence(build_rips(c, self.distance, self.max_dim, self.max_radius))
                for c in X]
