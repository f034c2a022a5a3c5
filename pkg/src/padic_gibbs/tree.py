"""Finite slices of the semi-infinite binary (order-2) Cayley tree.

Level 0 is the root.  The vertex at ``(level, index)`` has successors
``(level + 1, 2 * index)`` and ``(level + 1, 2 * index + 1)``; sibling pairs are
the next-nearest-neighbour pairs and a vertex with its two successors forms a
ternary triple.  Canonical order is ``(level, index)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

__all__ = ["Vertex", "TreeSlice", "build", "successors", "parent", "distance"]


@dataclass(frozen=True, order=True)
class Vertex:
    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.index < 2**self.level:
            raise ValueError(f"no vertex at level {self.level}, index {self.index}")

    @property
    def is_root(self) -> bool:
        return self.level == 0

    def successors(self) -> tuple[Vertex, Vertex]:
        return Vertex(self.level + 1, 2 * self.index), Vertex(self.level + 1, 2 * self.index + 1)

    def parent(self) -> Vertex | None:
        if self.level == 0:
            return None
        return Vertex(self.level - 1, self.index // 2)

    def to_json(self) -> list[int]:
        return [self.level, self.index]

    @classmethod
    def from_json(cls, data) -> Vertex:
        level, index = data
        return cls(int(level), int(index))

    def __str__(self):
        return f"({self.level},{self.index})"


ROOT = Vertex(0, 0)


def successors(x: Vertex) -> tuple[Vertex, Vertex]:
    return x.successors()


def parent(x: Vertex) -> Vertex | None:
    """The predecessor of ``x``, or ``None`` for the root."""
    return x.parent()


def distance(x: Vertex, y: Vertex) -> int:
    """Number of edges on the path from ``x`` to ``y``."""
    d = 0
    while x.level > y.level:
        x, d = x.parent(), d + 1
    while y.level > x.level:
        y, d = y.parent(), d + 1
    while x != y:
        x, y, d = x.parent(), y.parent(), d + 2
    return d


@dataclass(frozen=True)
class TreeSlice:
    """Vertices of levels ``0..depth`` with their edge and pair structure."""

    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")

    def sphere(self, m: int) -> tuple[Vertex, ...]:
        """``W_m``: the vertices at level ``m``."""
        if not 0 <= m <= self.depth:
            raise ValueError(f"level {m} outside slice of depth {self.depth}")
        return tuple(Vertex(m, i) for i in range(2**m))

    @cached_property
    def vertices(self) -> tuple[Vertex, ...]:
        return tuple(v for m in range(self.depth + 1) for v in self.sphere(m))

    @cached_property
    def position(self) -> dict[Vertex, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def boundary(self) -> tuple[Vertex, ...]:
        return self.sphere(self.depth)

    @property
    def interior(self) -> tuple[Vertex, ...]:
        return self.vertices[: 2**self.depth - 1]

    @cached_property
    def edges(self) -> tuple[tuple[Vertex, Vertex], ...]:
        """Nearest-neighbour pairs ``(parent, child)``."""
        return tuple((x, c) for x in self.interior for c in x.successors())

    @cached_property
    def sibling_pairs(self) -> tuple[tuple[Vertex, Vertex], ...]:
        return tuple(x.successors() for x in self.interior)

    @cached_property
    def triples(self) -> tuple[tuple[Vertex, Vertex, Vertex], ...]:
        """Ternary ``(y, x, z)``: siblings ``y, z`` around their parent ``x``."""
        out = []
        for x in self.interior:
            y, z = x.successors()
            out.append((y, x, z))
        return tuple(out)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v) -> bool:
        return isinstance(v, Vertex) and v.level <= self.depth


def build(depth: int) -> TreeSlice:
    return TreeSlice(depth)
