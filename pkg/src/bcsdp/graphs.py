"""Conflict graphs, timetabling instances, partitions and combinatorial bounds.

Vertex ids are dense 0-based integers throughout; parsers renumber on ingest.
All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "ConflictGraph",
    "TimetablingInstance",
    "Partition",
    "ValidationReport",
    "gen_gnp",
    "gen_kneser",
    "gen_forbidden_intersection",
    "complete_graph",
    "empty_graph",
    "path_graph",
    "cycle_graph",
    "connected_components",
    "counting_bound",
    "validate_partition",
    "class_violations",
]


def _normalize_edge(u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise ValueError(f"self-loop on vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class ConflictGraph:
    """Undirected graph whose edges join events that must not share a period."""

    n: int
    edges: frozenset[tuple[int, int]]
    _adjacency: tuple[tuple[int, ...], ...] = field(
        default=(), repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        neighbours: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
            neighbours[u].append(v)
            neighbours[v].append(u)
        adj = tuple(tuple(sorted(ns)) for ns in neighbours)
        object.__setattr__(self, "_adjacency", adj)

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> "ConflictGraph":
        return ConflictGraph(n, frozenset(_normalize_edge(u, v) for u, v in edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self._adjacency), default=0)

    def is_edge(self, u: int, v: int) -> bool:
        return u != v and _normalize_edge(u, v) in self.edges

    def non_edges(self) -> list[tuple[int, int]]:
        return [
            (u, v)
            for u in range(self.n)
            for v in range(u + 1, self.n)
            if (u, v) not in self.edges
        ]

    def complement(self) -> "ConflictGraph":
        return ConflictGraph(self.n, frozenset(self.non_edges()))

    def adjacency_bitsets(self) -> tuple[int, ...]:
        """Neighbour sets packed as integers, for fast subset tests."""
        masks = [0] * self.n
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return tuple(masks)

    def subgraph(self, vertices: Iterable[int]) -> tuple["ConflictGraph", tuple[int, ...]]:
        """Induced subgraph; returns (graph, old-id-per-new-id) with ids renumbered."""
        kept = tuple(sorted(set(vertices)))
        index = {old: new for new, old in enumerate(kept)}
        edges = frozenset(
            (index[u], index[v])
            for u, v in self.edges
            if u in index and v in index
        )
        return ConflictGraph(len(kept), edges), kept


def gen_gnp(n: int, p: float, seed: int) -> ConflictGraph:
    """Erdos-Renyi G(n, p) under numpy's PCG64 stream.

    Pairs are scanned in lexicographic (u, v) order, u < v, and pair k is kept
    when the k-th uniform draw is < p, so instances reproduce across machines
    for a fixed (n, p, seed).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    if n < 0:
        raise ValueError("vertex count must be nonnegative")
    rng = np.random.default_rng(seed)
    num_pairs = n * (n - 1) // 2
    draws = rng.random(num_pairs)
    edges = []
    k = 0
    for u in range(n):
        for v in range(u + 1, n):
            if draws[k] < p:
                edges.append((u, v))
            k += 1
    return ConflictGraph(n, frozenset(edges))


def gen_kneser(n: int, k: int) -> ConflictGraph:
    """Kneser graph K(n, k): k-subsets of {1..n}, adjacent iff disjoint."""
    if k < 1 or k >= n:
        raise ValueError(f"require n > k >= 1, got n={n}, k={k}")
    subsets = [frozenset(c) for c in itertools.combinations(range(1, n + 1), k)]
    edges = frozenset(
        (i, j)
        for i in range(len(subsets))
        for j in range(i + 1, len(subsets))
        if not (subsets[i] & subsets[j])
    )
    return ConflictGraph(len(subsets), edges)


def gen_forbidden_intersection(m: int, gamma: float) -> ConflictGraph:
    """Bit strings of length m, adjacent iff Hamming distance equals (1-gamma)*m.

    The distance must be an integer >= 1; evenness is not required, so rows
    like gamma = 5/6 (distance 1) are accepted.
    """
    if m < 1:
        raise ValueError("bit length must be >= 1")
    d_real = (1.0 - gamma) * m
    d = round(d_real)
    if abs(d_real - d) > 1e-9:
        raise ValueError(f"(1-gamma)*m = {d_real} is not an integer")
    if d < 1:
        raise ValueError(f"(1-gamma)*m = {d} must be >= 1")
    size = 1 << m
    edges = []
    for u in range(size):
        for v in range(u + 1, size):
            if ((u ^ v).bit_count()) == d:
                edges.append((u, v))
    return ConflictGraph(size, frozenset(edges))


def complete_graph(n: int) -> ConflictGraph:
    return ConflictGraph(
        n, frozenset((u, v) for u in range(n) for v in range(u + 1, n))
    )


def empty_graph(n: int) -> ConflictGraph:
    return ConflictGraph(n, frozenset())


def path_graph(n: int) -> ConflictGraph:
    return ConflictGraph(n, frozenset((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> ConflictGraph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    return ConflictGraph(n, frozenset(edges))


def connected_components(g: ConflictGraph) -> list[frozenset[int]]:
    """Maximal connected vertex sets, sorted by size then smallest member."""
    seen = [False] * g.n
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in g.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(frozenset(comp))
    return sorted(comps, key=lambda c: (len(c), min(c)))


def counting_bound(n: int, m: int) -> int:
    """ceil(n / m): the trivial lower bound from class-size limits."""
    if m < 1:
        raise ValueError("bound m must be >= 1")
    return -(-n // m)


@dataclass(frozen=True)
class TimetablingInstance:
    """Conflict graph plus room bound, sizes, capacities, features, pre-colouring.

    Defaults make a bare colouring instance: unit event sizes, m unit-capacity
    rooms, no features, no pre-colouring, no weights.
    """

    graph: ConflictGraph
    m: int
    event_sizes: tuple[int, ...] = ()
    room_capacities: tuple[int, ...] = ()
    feature_count: int = 0
    event_features: frozenset[tuple[int, int]] = frozenset()
    room_features: frozenset[tuple[int, int]] = frozenset()
    precolouring: tuple[frozenset[int], ...] = ()
    weights: tuple[int, ...] | None = None
    lectures: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        n = self.graph.n
        if self.m < 1:
            raise ValueError("room count m must be >= 1")
        if not self.event_sizes:
            object.__setattr__(self, "event_sizes", (1,) * n)
        if not self.room_capacities:
            cap = max(self.event_sizes, default=1)
            object.__setattr__(self, "room_capacities", (cap,) * self.m)
        if len(self.event_sizes) != n:
            raise ValueError("event_sizes length must equal vertex count")
        if len(self.room_capacities) != self.m:
            raise ValueError("room_capacities length must equal m")
        if any(s < 1 for s in self.event_sizes):
            raise ValueError("event sizes must be >= 1")
        if any(c < 1 for c in self.room_capacities):
            raise ValueError("room capacities must be >= 1")
        for v, f in self.event_features:
            if not (0 <= v < n and 0 <= f < self.feature_count):
                raise ValueError(f"event feature ({v},{f}) out of range")
        for r, f in self.room_features:
            if not (0 <= r < self.m and 0 <= f < self.feature_count):
                raise ValueError(f"room feature ({r},{f}) out of range")
        seen: set[int] = set()
        for cls in self.precolouring:
            if len(cls) > self.m:
                raise ValueError("pre-colouring class larger than m")
            if seen & cls:
                raise ValueError("pre-colouring classes must be disjoint")
            if any(not 0 <= v < n for v in cls):
                raise ValueError("pre-colouring vertex out of range")
            seen |= cls
        if self.weights is not None:
            if len(self.weights) != n:
                raise ValueError("weights length must equal vertex count")
            if any(w < 1 for w in self.weights):
                raise ValueError("weights must be >= 1")

    @staticmethod
    def colouring(graph: ConflictGraph, m: int) -> "TimetablingInstance":
        return TimetablingInstance(graph=graph, m=m)

    def vertex_weight(self, v: int) -> int:
        return 1 if self.weights is None else self.weights[v]

    def features_of(self, v: int) -> frozenset[int]:
        return frozenset(f for (u, f) in self.event_features if u == v)

    def rooms_with_feature(self, f: int) -> frozenset[int]:
        return frozenset(r for (r, g) in self.room_features if g == f)

    def compatible_rooms(self, v: int) -> list[int]:
        """Rooms whose capacity and features admit event v."""
        need = self.features_of(v)
        out = []
        for r in range(self.m):
            if self.room_capacities[r] < self.event_sizes[v]:
                continue
            have = frozenset(f for (rr, f) in self.room_features if rr == r)
            if need <= have:
                out.append(r)
        return out


@dataclass(frozen=True)
class Partition:
    """Ordered colour classes, optionally with a per-vertex room assignment."""

    classes: tuple[frozenset[int], ...]
    room_of: Mapping[int, int] | None = None

    @staticmethod
    def from_lists(classes: Iterable[Iterable[int]],
                   room_of: Mapping[int, int] | None = None) -> "Partition":
        return Partition(tuple(frozenset(c) for c in classes if c), room_of)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def vertex_set(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for c in self.classes:
            out |= c
        return out

    def class_index(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.classes) for v in c}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def class_violations(inst: TimetablingInstance, members: Iterable[int]) -> list[str]:
    """Violations of one colour class against edges, size, capacities, features.

    The capacity rule counts, for each distinct capacity c, events needing
    more than c against rooms offering more than c; exact on laminar instances.
    """
    mem = sorted(set(members))
    out = []
    memset = set(mem)
    for v in mem:
        for w in inst.graph.neighbors(v):
            if w > v and w in memset:
                out.append(f"edge conflict ({v},{w}) within a class")
    weight = sum(inst.vertex_weight(v) for v in mem)
    if weight > inst.m:
        out.append(f"class weight {weight} exceeds m={inst.m}")
    for c in sorted(set(inst.room_capacities)):
        big = [v for v in mem if inst.event_sizes[v] > c]
        rooms = sum(1 for r in inst.room_capacities if r > c)
        if len(big) > rooms:
            out.append(
                f"{len(big)} events larger than capacity {c} but only "
                f"{rooms} larger rooms"
            )
    for f in range(inst.feature_count):
        need = [v for v in mem if (v, f) in inst.event_features]
        have = sum(1 for r in range(inst.m) if (r, f) in inst.room_features)
        if len(need) > have:
            out.append(
                f"{len(need)} events need feature {f} available in {have} rooms"
            )
    return out


def class_feasible(inst: TimetablingInstance, members: Iterable[int]) -> bool:
    return not class_violations(inst, members)


def validate_partition(inst: TimetablingInstance, part: Partition) -> ValidationReport:
    """Check every condition of the timetabling problem; violations are data."""
    violations: list[str] = []
    n = inst.graph.n
    covered: dict[int, int] = {}
    for i, cls in enumerate(part.classes):
        for v in cls:
            if v in covered:
                violations.append(f"vertex {v} in classes {covered[v]} and {i}")
            covered[v] = i
    missing = [v for v in range(n) if v not in covered]
    if missing:
        violations.append(f"vertices not covered: {missing}")
    extra = [v for v in covered if not 0 <= v < n]
    if extra:
        violations.append(f"unknown vertices: {sorted(extra)}")
    for i, cls in enumerate(part.classes):
        for msg in class_violations(inst, cls):
            violations.append(f"class {i}: {msg}")
    for pre in inst.precolouring:
        hit = {covered.get(v) for v in pre}
        if len(hit) > 1:
            violations.append(f"pre-colouring class {sorted(pre)} split across {sorted(hit, key=str)}")
    if part.room_of is not None:
        for i, cls in enumerate(part.classes):
            used: dict[int, int] = {}
            for v in sorted(cls):
                r = part.room_of.get(v)
                if r is None:
                    violations.append(f"class {i}: vertex {v} has no room")
                    continue
                if not 0 <= r < inst.m:
                    violations.append(f"class {i}: room {r} out of range")
                    continue
                if r in used:
                    violations.append(
                        f"class {i}: room {r} used by both {used[r]} and {v}"
                    )
                used[r] = v
                if inst.room_capacities[r] < inst.event_sizes[v]:
                    violations.append(
                        f"class {i}: event {v} of size {inst.event_sizes[v]} "
                        f"in room {r} of capacity {inst.room_capacities[r]}"
                    )
                for f in inst.features_of(v):
                    if (r, f) not in inst.room_features:
                        violations.append(
                            f"class {i}: event {v} needs feature {f} missing in room {r}"
                        )
    return ValidationReport(ok=not violations, violations=tuple(violations))
