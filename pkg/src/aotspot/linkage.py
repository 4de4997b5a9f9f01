"""Single-linkage connected components of 2-D points at a fixed radius."""

import numpy as np
from scipy.spatial import cKDTree


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def link_components(points: np.ndarray, radius: float) -> np.ndarray:
    """Component label per point; two points link when distance <= radius.

    Labels are dense ints numbered by first appearance in point order, so
    the labeling is deterministic for a given point sequence.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    uf = UnionFind(n)
    if n and radius > 0:
        pairs = cKDTree(points).query_pairs(radius, output_type="ndarray")
        for a, b in pairs:
            uf.union(int(a), int(b))
    labels = np.empty(n, dtype=np.int64)
    remap: dict[int, int] = {}
    for i in range(n):
        root = uf.find(i)
        if root not in remap:
            remap[root] = len(remap)
        labels[i] = remap[root]
    return labels
