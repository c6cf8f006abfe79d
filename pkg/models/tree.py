"""
Truncated (p+1)-regular tree with vertices numbered in breadth-first order.

Level 0 is the root, level d ≥ 1 holds (p+1)p^{d−1} vertices. Children of the root are
1..p+1; a vertex at offset j inside level d ≥ 1 has its p children at offsets jp..jp+p−1
of level d+1. Nothing is stored per vertex.
"""

from bisect import bisect_right
from typing import Iterator, List, Set

import numpy as np

from utils.validators import InputValidator, ValidationError, require


class TruncatedTree:
    """Ball of radius R around a root in the (p+1)-regular tree."""

    def __init__(self, p: int, radius: int):
        require(InputValidator.validate_prime(p))
        if radius < 1:
            raise ValidationError(f"Tree radius must be at least 1, got {radius}")
        self.p = p
        self.radius = radius
        starts = [0, 1]
        size = p + 1
        for _ in range(radius):
            starts.append(starts[-1] + size)
            size *= p
        # starts[d] is the first index of level d; starts[R+1] is the vertex count
        self.level_start = starts

    @property
    def vertex_count(self) -> int:
        return self.level_start[self.radius + 1]

    def __len__(self) -> int:
        return self.vertex_count

    def __repr__(self) -> str:
        return f"TruncatedTree(p={self.p}, radius={self.radius}, vertices={self.vertex_count})"

    def _check(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise ValidationError(f"Vertex {v} is outside the tree")

    def depth(self, v: int) -> int:
        self._check(v)
        return bisect_right(self.level_start, v) - 1

    def level(self, d: int) -> range:
        return range(self.level_start[d], self.level_start[d + 1])

    def ball(self, d: int) -> range:
        """Vertices at depth ≤ d."""
        return range(0, self.level_start[min(d, self.radius) + 1])

    def parent(self, v: int) -> int:
        d = self.depth(v)
        if d == 0:
            return -1
        if d == 1:
            return 0
        return self.level_start[d - 1] + (v - self.level_start[d]) // self.p

    def children(self, v: int) -> range:
        d = self.depth(v)
        if d == self.radius:
            return range(0)
        if d == 0:
            return range(1, self.p + 2)
        start = self.level_start[d + 1] + (v - self.level_start[d]) * self.p
        return range(start, start + self.p)

    def neighbors(self, v: int) -> List[int]:
        parent = self.parent(v)
        around = [] if parent < 0 else [parent]
        around.extend(self.children(v))
        return around

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def layers(self, v: int, k: int) -> Iterator[Set[int]]:
        """Distance layers 0..k around v. A neighbor of layer j lies in layer j−1 or j+1."""
        previous: Set[int] = set()
        current = {v}
        yield current
        for _ in range(k):
            following = set()
            for w in current:
                following.update(x for x in self.neighbors(w) if x not in previous)
            previous, current = current, following
            yield current

    def sphere(self, v: int, k: int) -> List[int]:
        """Vertices at distance exactly k from v."""
        if k < 0:
            return []
        last: Set[int] = set()
        for last in self.layers(v, k):
            pass
        return sorted(last)

    def vertices(self) -> Iterator[int]:
        return iter(range(self.vertex_count))

    def depth_array(self) -> np.ndarray:
        depths = np.empty(self.vertex_count, dtype=np.int64)
        for d in range(self.radius + 1):
            depths[self.level_start[d]:self.level_start[d + 1]] = d
        return depths
