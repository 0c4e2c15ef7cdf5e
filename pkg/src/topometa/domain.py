"""Solution encodings, distances and benchmark problems.

Binary solutions are stored as an integer bit mask (leftmost character of the
bit string is the most significant bit) so Hamming distance is a popcount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np


class EncodingError(ValueError):
    """Raised when two solutions with incompatible encodings are combined."""


class BinarySolution:
    """Immutable fixed-length bit string."""

    __slots__ = ("n", "mask")

    def __init__(self, bits: str | Iterable[int]):
        if isinstance(bits, str):
            text = bits.strip()
            if not text or any(ch not in "01" for ch in text):
                raise ValueError(f"not a bit string: {bits!r}")
            n, mask = len(text), int(text, 2)
        else:
            seq = [int(b) for b in bits]
            if not seq or any(b not in (0, 1) for b in seq):
                raise ValueError("bits must be a non-empty sequence of 0/1")
            n, mask = len(seq), 0
            for b in seq:
                mask = (mask << 1) | b
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "BinarySolution":
        obj = cls.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "mask", mask)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("BinarySolution is immutable")

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(c) for c in str(self))

    def flip(self, positions: Iterable[int]) -> "BinarySolution":
        """Return a copy with the given (0-based, left-to-right) positions flipped."""
        mask = self.mask
        for i in positions:
            mask ^= 1 << (self.n - 1 - i)
        return BinarySolution.from_mask(mask, self.n)

    def __len__(self) -> int:
        return self.n

    def __str__(self) -> str:
        return format(self.mask, f"0{self.n}b")

    def __repr__(self) -> str:
        return f"BinarySolution('{self}')"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinarySolution)
            and self.n == other.n
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.n, self.mask))

    def __reduce__(self):
        return (BinarySolution, (str(self),))


class RealSolution:
    """Immutable vector of finite real coordinates."""

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[float]):
        values = tuple(float(c) for c in coords)
        if not values:
            raise ValueError("coords must be non-empty")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("coords must be finite")
        object.__setattr__(self, "coords", values)

    def __setattr__(self, name, value):
        raise AttributeError("RealSolution is immutable")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def __len__(self) -> int:
        return len(self.coords)

    def __repr__(self) -> str:
        return f"RealSolution({list(self.coords)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RealSolution) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __reduce__(self):
        return (RealSolution, (self.coords,))


Solution = BinarySolution | RealSolution


def hamming(a: BinarySolution, b: BinarySolution) -> int:
    if a.n != b.n:
        raise EncodingError(f"length mismatch: {a.n} != {b.n}")
    return (a.mask ^ b.mask).bit_count()


def euclidean(a: RealSolution, b: RealSolution) -> float:
    if len(a.coords) != len(b.coords):
        raise EncodingError(
            f"dimension mismatch: {len(a.coords)} != {len(b.coords)}"
        )
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a.coords, b.coords)))


def distance(a: Solution, b: Solution) -> float:
    """Dispatch to the natural metric of the encoding."""
    if isinstance(a, BinarySolution) and isinstance(b, BinarySolution):
        return hamming(a, b)
    if isinstance(a, RealSolution) and isinstance(b, RealSolution):
        return euclidean(a, b)
    raise EncodingError(
        f"mixed encodings: {type(a).__name__} and {type(b).__name__}"
    )


# ---------------------------------------------------------------- objectives


def evaluate_onemax(s: BinarySolution) -> float:
    return float(s.mask.bit_count())


def _as_vector(s: RealSolution | Sequence[float]) -> np.ndarray:
    return s.array if isinstance(s, RealSolution) else np.asarray(s, dtype=float)


def evaluate_sphere(s: RealSolution | Sequence[float]) -> float:
    x = _as_vector(s)
    return float(np.dot(x, x))


def evaluate_rastrigin(s: RealSolution | Sequence[float]) -> float:
    x = _as_vector(s)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


@dataclass(frozen=True)
class SetCoverInstance:
    """Weighted set cover; ``incidence[e]`` lists the (0-based) sets covering element e."""

    n_elements: int
    n_sets: int
    costs: tuple[float, ...]
    incidence: tuple[tuple[int, ...], ...]
    _set_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_elements < 1 or self.n_sets < 1:
            raise ValueError("instance needs at least one element and one set")
        if len(self.costs) != self.n_sets:
            raise ValueError(f"expected {self.n_sets} costs, got {len(self.costs)}")
        if any(not (c > 0) for c in self.costs):
            raise ValueError("set costs must be positive")
        if len(self.incidence) != self.n_elements:
            raise ValueError(
                f"expected {self.n_elements} incidence rows, got {len(self.incidence)}"
            )
        masks = [0] * self.n_elements
        for e, sets in enumerate(self.incidence):
            if not sets:
                raise ValueError(f"element {e + 1} is not covered by any set")
            for j in sets:
                if not 0 <= j < self.n_sets:
                    raise ValueError(f"set index {j + 1} out of range")
                # same bit order as BinarySolution: set 0 is the leftmost bit
                masks[e] |= 1 << (self.n_sets - 1 - j)
        object.__setattr__(self, "_set_masks", tuple(masks))

    @property
    def total_cost(self) -> float:
        return float(sum(self.costs))

    @property
    def penalty(self) -> float:
        return 1.0 + self.total_cost

    def uncovered(self, s: BinarySolution) -> int:
        return sum(1 for m in self._set_masks if not (m & s.mask))


def evaluate_setcover(inst: SetCoverInstance, s: BinarySolution) -> float:
    """Cost of the chosen sets plus a penalty per uncovered element (minimized)."""
    if s.n != inst.n_sets:
        raise EncodingError(f"solution has {s.n} bits, instance has {inst.n_sets} sets")
    cost = sum(c for j, c in enumerate(inst.costs) if s.mask >> (inst.n_sets - 1 - j) & 1)
    return float(cost + inst.penalty * inst.uncovered(s))


def read_setcover(path: str | Path) -> SetCoverInstance:
    """Parse an OR-Library style instance (``m n``, n costs, then per element ``k j1..jk``)."""
    tokens = Path(path).read_text().split()
    try:
        pos = 0

        def take() -> str:
            nonlocal pos
            tok = tokens[pos]
            pos += 1
            return tok

        n_elements, n_sets = int(take()), int(take())
        costs = tuple(float(take()) for _ in range(n_sets))
        incidence = []
        for _ in range(n_elements):
            count = int(take())
            incidence.append(tuple(int(take()) - 1 for _ in range(count)))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed set-cover file {path}: {exc}") from exc
    if pos != len(tokens):
        raise ValueError(f"malformed set-cover file {path}: trailing tokens")
    return SetCoverInstance(n_elements, n_sets, costs, tuple(incidence))


def write_setcover(inst: SetCoverInstance, path: str | Path) -> None:
    lines = [f"{inst.n_elements} {inst.n_sets}"]
    lines.append(" ".join(format(c, "g") for c in inst.costs))
    for sets in inst.incidence:
        lines.append(" ".join(str(v) for v in (len(sets), *(j + 1 for j in sets))))
    Path(path).write_text("\n".join(lines) + "\n")


def random_setcover(
    n_elements: int, n_sets: int, density: float = 0.3, seed: int = 0
) -> SetCoverInstance:
    """Unicost random instance; every element gets at least one covering set."""
    rng = np.random.default_rng(seed)
    incidence = []
    for _ in range(n_elements):
        row = np.flatnonzero(rng.random(n_sets) < density)
        if row.size == 0:
            row = np.array([rng.integers(n_sets)])
        incidence.append(tuple(int(j) for j in row))
    return SetCoverInstance(n_elements, n_sets, (1.0,) * n_sets, tuple(incidence))


# ------------------------------------------------------------------ problems


@dataclass(frozen=True)
class Problem:
    """An objective bound to its encoding, dimension and optimization direction."""

    name: str
    dimension: int
    encoding: str
    direction: str
    objective: Callable = field(compare=False, repr=False)
    bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.encoding not in ("binary", "real"):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.direction not in ("minimize", "maximize"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.encoding == "real":
            if self.bounds is None or len(self.bounds) != self.dimension:
                raise ValueError("real problems need one (lo, hi) pair per dimension")
            if any(not lo < hi for lo, hi in self.bounds):
                raise ValueError("bounds must satisfy lo < hi")

    def evaluate(self, s: Solution) -> float:
        return float(self.objective(s))

    def better(self, a: float, b: float) -> bool:
        """True when fitness ``a`` is strictly better than ``b``."""
        return a < b if self.direction == "minimize" else a > b

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds], dtype=float)


def onemax(n: int) -> Problem:
    return Problem("onemax", n, "binary", "maximize", evaluate_onemax)


def setcover(inst: SetCoverInstance, name: str = "setcover") -> Problem:
    return Problem(
        name, inst.n_sets, "binary", "minimize", lambda s: evaluate_setcover(inst, s)
    )


def sphere(n: int, lo: float = -5.0, hi: float = 5.0) -> Problem:
    return Problem("sphere", n, "real", "minimize", evaluate_sphere, ((lo, hi),) * n)


def rastrigin(n: int, lo: float = -5.12, hi: float = 5.12) -> Problem:
    return Problem(
        "rastrigin", n, "real", "minimize", evaluate_rastrigin, ((lo, hi),) * n
    )
