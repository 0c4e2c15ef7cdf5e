"""Solution archive and the simplicial-neighborhood engine.

An m-simplex is a set of m + 1 distinct solutions whose pairwise distances all
satisfy the (k, mode) constraint: exactly k in strict mode, in (0, k] in
at-most mode.
"""

from __future__ import annotations

import bisect
import enum
import itertools
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .domain import BinarySolution, EncodingError, RealSolution, Solution, distance

DEFAULT_BUDGET = 10_000


class Mode(str, enum.Enum):
    STRICT = "strict"
    AT_MOST = "at_most"


@dataclass(frozen=True)
class NeighborhoodParams:
    m: int
    k: float
    mode: Mode = Mode.AT_MOST

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("simplex order m must be >= 0")
        if not self.k > 0:
            raise ValueError("distance scale k must be positive")
        object.__setattr__(self, "mode", Mode(self.mode))

    def admits(self, d: float) -> bool:
        if self.mode is Mode.STRICT:
            return d == self.k
        return 0 < d <= self.k

    def with_order(self, m: int) -> "NeighborhoodParams":
        return NeighborhoodParams(m, self.k, self.mode)


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[Solution, ...]

    @property
    def order(self) -> int:
        return len(self.vertices) - 1

    def __iter__(self) -> Iterator[Solution]:
        return iter(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, item) -> bool:
        return item in self.vertices


@dataclass(frozen=True)
class ArchiveEntry:
    solution: Solution
    fitness: float
    t: int


class Archive:
    """Ordered memory of evaluated solutions.

    ``capacity=None`` keeps everything; an integer capacity turns the archive
    into a ring buffer that evicts the oldest entry first. With ``dedup`` a
    solution already present is not inserted again.
    """

    def __init__(self, capacity: int | None = 1000, dedup: bool = True):
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be positive or None")
        self.capacity = capacity
        self.dedup = dedup
        self._entries: deque[ArchiveEntry] = deque()
        self._latest: dict[Solution, ArchiveEntry] = {}
        self._counts: dict[Solution, int] = {}
        self._next_t = 0

    @property
    def policy(self) -> str:
        return "unbounded" if self.capacity is None else f"ring({self.capacity})"

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[ArchiveEntry]:
        return iter(self._entries)

    def __contains__(self, solution) -> bool:
        return solution in self._latest

    @property
    def entries(self) -> list[ArchiveEntry]:
        return list(self._entries)

    def solutions(self) -> list[Solution]:
        return [e.solution for e in self._entries]

    def lookup(self, solution: Solution) -> float | None:
        entry = self._latest.get(solution)
        return None if entry is None else entry.fitness

    def add(self, solution: Solution, fitness: float) -> bool:
        """Insert a solution; returns False when dedup rejected it."""
        if self._entries and type(self._entries[0].solution) is not type(solution):
            raise EncodingError("archive holds a different encoding")
        if self.dedup and solution in self._latest:
            return False
        entry = ArchiveEntry(solution, float(fitness), self._next_t)
        self._next_t += 1
        self._entries.append(entry)
        self._latest[solution] = entry
        self._counts[solution] = self._counts.get(solution, 0) + 1
        if self.capacity is not None and len(self._entries) > self.capacity:
            old = self._entries.popleft()
            left = self._counts[old.solution] - 1
            if left:
                self._counts[old.solution] = left
            else:
                del self._counts[old.solution]
                del self._latest[old.solution]
        return True

    def recent(self, window: int | None) -> list[ArchiveEntry]:
        if window is None or window >= len(self._entries):
            return list(self._entries)
        return list(self._entries)[-window:]


def _check_points(points: Sequence[Solution]) -> None:
    kinds = {type(p) for p in points}
    if len(kinds) > 1:
        raise EncodingError("mixed encodings in simplex")
    dims = {len(p) for p in points}
    if len(dims) > 1:
        raise EncodingError("mixed dimensions in simplex")


def is_simplex(points: Iterable[Solution], p: NeighborhoodParams) -> bool:
    pts = list(points.vertices if isinstance(points, Simplex) else points)
    if len(pts) != p.m + 1:
        raise ValueError(f"expected {p.m + 1} points for an order-{p.m} simplex, got {len(pts)}")
    _check_points(pts)
    return all(p.admits(distance(a, b)) for a, b in itertools.combinations(pts, 2))


def _pairwise_admits(points: Sequence[Solution], p: NeighborhoodParams):
    """Return an ``ok(i, j)`` predicate over indices into ``points``."""
    if points and isinstance(points[0], BinarySolution):
        masks = [s.mask for s in points]
        if p.mode is Mode.STRICT:
            k = p.k
            return lambda i, j: (masks[i] ^ masks[j]).bit_count() == k
        k = p.k
        return lambda i, j: 0 < (masks[i] ^ masks[j]).bit_count() <= k
    return lambda i, j: p.admits(distance(points[i], points[j]))


def _later_bitsets(points: list[BinarySolution], p: NeighborhoodParams) -> list[int]:
    """Row a holds bit b (b > a) when points a and b are admissible together."""
    masks = np.array([q.mask for q in points], dtype=np.uint64)
    d = np.bitwise_count(masks[:, None] ^ masks[None, :])
    adj = d == p.k if p.mode is Mode.STRICT else (d > 0) & (d <= p.k)
    adj &= np.triu(np.ones(adj.shape, dtype=bool), 1)
    packed = np.packbits(adj, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


class _PartnerGraph:
    """Archive members admissible next to x, with "later neighbor" bit sets."""

    def __init__(self, archive, x: Solution, p: NeighborhoodParams):
        members = archive.solutions() if isinstance(archive, Archive) else list(archive)
        if members:
            _check_points([x, members[0]])
        unique = list(dict.fromkeys(s for s in members if s != x))
        ok = _pairwise_admits([x, *unique], p)
        self.partners = [s for i, s in enumerate(unique, start=1) if ok(0, i)]
        idx = [i for i in range(1, len(unique) + 1) if ok(0, i)]
        n = len(idx)
        self.later = [0] * n
        if p.m >= 2 and n:
            if isinstance(x, BinarySolution) and x.n <= 64:
                self.later = _later_bitsets(self.partners, p)
            else:
                for a in range(n):
                    bits = 0
                    for b in range(a + 1, n):
                        if ok(idx[a], idx[b]):
                            bits |= 1 << b
                    self.later[a] = bits
        self.all_bits = (1 << n) - 1

    def _vertices(self, bits: int) -> Iterator[int]:
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def count(self, cand: int, need: int) -> int:
        if need == 0:
            return 1
        if need == 1:
            return cand.bit_count()
        return sum(self.count(cand & self.later[v], need - 1) for v in self._vertices(cand))

    def cliques(self, cand: int, need: int) -> Iterator[tuple[int, ...]]:
        if need == 0:
            yield ()
            return
        for v in self._vertices(cand):
            nxt = cand & self.later[v] if need > 1 else 0
            for rest in self.cliques(nxt, need - 1):
                yield (v, *rest)

    def nth(self, cand: int, need: int, r: int) -> tuple[int, ...]:
        if need == 0:
            return ()
        for v in self._vertices(cand):
            nxt = cand & self.later[v] if need > 1 else 0
            c = self.count(nxt, need - 1)
            if r < c:
                return (v, *self.nth(nxt, need - 1, r))
            r -= c
        raise IndexError(r)


def enumerate_simplices_containing(
    archive: Archive | Iterable[Solution], x: Solution, p: NeighborhoodParams
) -> list[Simplex]:
    """All order-m simplices in archive ∪ {x} that contain x.

    Vertices are ``x`` followed by archive members in insertion order; the
    returned list is lexicographic in those insertion positions.
    """
    if p.m == 0:
        return [Simplex((x,))]
    g = _PartnerGraph(archive, x, p)
    return [Simplex((x, *(g.partners[i] for i in combo)))
            for combo in g.cliques(g.all_bits, p.m)]


def random_simplex_containing(
    archive: Archive | Iterable[Solution], x: Solution, p: NeighborhoodParams,
    rng: np.random.Generator,
) -> Simplex | None:
    """Uniform draw from :func:`enumerate_simplices_containing` without listing it.

    Consumes the generator exactly like ``simplices[rng.integers(len(simplices))]``.
    """
    if p.m == 0:
        return Simplex((x,))
    g = _PartnerGraph(archive, x, p)
    total = g.count(g.all_bits, p.m)
    if total == 0:
        return None
    combo = g.nth(g.all_bits, p.m, int(rng.integers(total)))
    return Simplex((x, *(g.partners[i] for i in combo)))


# ------------------------------------------------------------ extensions


def _flip_classes(s: Simplex) -> list[list[int]]:
    """Group positions by which vertices differ from the first vertex there."""
    anchor = s.vertices[0]
    n = anchor.n
    classes: dict[tuple[int, ...], list[int]] = {}
    for i in range(n):
        shift = n - 1 - i
        key = tuple((v.mask ^ anchor.mask) >> shift & 1 for v in s.vertices)
        classes.setdefault(key, []).append(i)
    return [classes[key] for key in sorted(classes)]


def _count_vectors(s: Simplex, classes: list[list[int]], target: NeighborhoodParams):
    """Per-class flip counts whose resulting point extends the simplex.

    Distances to every vertex depend only on how many positions of each class
    are flipped, so validity is decided on these count vectors.
    """
    k = int(target.k)
    anchor = s.vertices[0]
    n = anchor.n
    patterns = []
    for cls in classes:
        i = cls[0]
        patterns.append([(v.mask ^ anchor.mask) >> (n - 1 - i) & 1 for v in s.vertices])
    sizes = [len(c) for c in classes]
    out = []

    def walk(c: int, counts: list[int], used: int) -> None:
        if c == len(classes):
            if used == 0:
                return
            for j in range(len(s.vertices)):
                d = sum(
                    (sizes[q] - counts[q]) if patterns[q][j] else counts[q]
                    for q in range(len(classes))
                )
                if not target.admits(d):
                    return
            out.append(tuple(counts))
            return
        for f in range(min(sizes[c], k - used) + 1):
            counts.append(f)
            walk(c + 1, counts, used + f)
            counts.pop()

    walk(0, [], 0)
    return out


def _binary_candidates(
    s: Simplex, p: NeighborhoodParams, budget: int, rng: np.random.Generator
) -> list[BinarySolution]:
    k = int(p.k)
    if k != p.k:
        return []
    anchor = s.vertices[0]
    target = p.with_order(s.order + 1)
    classes = _flip_classes(s)
    vectors = _count_vectors(s, classes, target)
    weights = [math.prod(math.comb(len(c), f) for c, f in zip(classes, v)) for v in vectors]
    total = sum(weights)
    if total == 0:
        return []
    if total <= budget:
        out = []
        for v in vectors:
            pools = [itertools.combinations(c, f) for c, f in zip(classes, v)]
            for parts in itertools.product(*pools):
                out.append(anchor.flip(itertools.chain.from_iterable(parts)))
        return out

    # uniform sampling of distinct valid points: count vector by weight, then positions
    picker = random.Random(int(rng.integers(2**63)))
    cum = list(itertools.accumulate(weights))
    found: dict[BinarySolution, None] = {}
    for _ in range(4 * budget):
        v = vectors[bisect.bisect_right(cum, picker.randrange(total))]
        flips = [i for c, f in zip(classes, v) if f for i in picker.sample(c, f)]
        found.setdefault(anchor.flip(flips), None)
        if len(found) >= budget:
            break
    return list(found)


def _real_candidates(
    s: Simplex,
    p: NeighborhoodParams,
    budget: int,
    rng: np.random.Generator,
    bounds: Sequence[tuple[float, float]] | None,
) -> list[RealSolution]:
    if p.mode is Mode.STRICT:
        return []  # exact-distance constraints have measure zero in R^n
    anchor = s.vertices[0].array
    dim = anchor.size
    target = p.with_order(s.order + 1)
    out = []
    for _ in range(budget):
        direction = rng.normal(size=dim)
        direction /= np.linalg.norm(direction) or 1.0
        radius = p.k * rng.random() ** (1.0 / dim)
        y = anchor + radius * direction
        if bounds is not None:
            lo = np.array([b[0] for b in bounds])
            hi = np.array([b[1] for b in bounds])
            if np.any(y < lo) or np.any(y > hi):
                continue
        cand = RealSolution(y)
        if cand not in s.vertices and all(target.admits(distance(cand, v)) for v in s.vertices):
            out.append(cand)
    return out


def extension_candidates(
    s: Simplex | Sequence[Solution],
    p: NeighborhoodParams,
    budget: int = DEFAULT_BUDGET,
    rng: np.random.Generator | None = None,
    bounds: Sequence[tuple[float, float]] | None = None,
) -> list[Solution]:
    """Solutions y not in s such that s ∪ {y} is a simplex one order higher.

    Binary encodings are enumerated exactly when there are at most ``budget``
    valid extensions; otherwise up to ``budget`` distinct ones are drawn
    uniformly at random. Real encodings are sampled uniformly in the k-ball
    of the first vertex and filtered.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not isinstance(s, Simplex):
        s = Simplex(tuple(s))
    rng = np.random.default_rng() if rng is None else rng
    if isinstance(s.vertices[0], BinarySolution):
        return _binary_candidates(s, p, budget, rng)
    return _real_candidates(s, p, budget, rng, bounds)


def pairwise_variance(points: Sequence[Solution]) -> float:
    d = [distance(a, b) for a, b in itertools.combinations(points, 2)]
    if not d:
        return 0.0
    mean = sum(d) / len(d)
    return sum((v - mean) ** 2 for v in d) / len(d)


def balanced_extension(
    s: Simplex | Sequence[Solution],
    p: NeighborhoodParams,
    budget: int = DEFAULT_BUDGET,
    rng: np.random.Generator | None = None,
    bounds: Sequence[tuple[float, float]] | None = None,
) -> Solution | None:
    """Extension whose enlarged simplex has the most even pairwise distances."""
    if not isinstance(s, Simplex):
        s = Simplex(tuple(s))
    rng = np.random.default_rng() if rng is None else rng
    cands = extension_candidates(s, p, budget, rng, bounds)
    if not cands:
        return None
    scores = [pairwise_variance((*s.vertices, y)) for y in cands]
    best = min(scores)
    # exact ties only; scores come from integer or identical float arithmetic
    tied = [y for y, v in zip(cands, scores) if v == best]
    return tied[int(rng.integers(len(tied)))]
