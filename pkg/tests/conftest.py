import pytest

from bcsdp.graphs import (
    ConflictGraph,
    complete_graph,
    cycle_graph,
    empty_graph,
    gen_kneser,
    path_graph,
)


@pytest.fixture
def petersen() -> ConflictGraph:
    return gen_kneser(5, 2)


@pytest.fixture
def p3() -> ConflictGraph:
    return path_graph(3)


@pytest.fixture
def c5() -> ConflictGraph:
    return cycle_graph(5)


def four_vertex_graphs() -> list[ConflictGraph]:
    """The 11 non-isomorphic graphs on 4 vertices."""
    edge_sets = [
        [],
        [(0, 1)],
        [(0, 1), (2, 3)],
        [(0, 1), (1, 2)],
        [(0, 1), (1, 2), (2, 3)],
        [(0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 2), (0, 2)],
        [(0, 1), (1, 2), (2, 3), (0, 3)],
        [(0, 1), (1, 2), (0, 2), (0, 3)],
        [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3)],
        [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)],
    ]
    return [ConflictGraph.from_edges(4, es) for es in edge_sets]


def named_small_graphs() -> list[tuple[str, ConflictGraph]]:
    """Named graphs with at most 8 vertices, used across oracle tests."""
    graphs = [
        ("K1", complete_graph(1)),
        ("K2", complete_graph(2)),
        ("K3", complete_graph(3)),
        ("K4", complete_graph(4)),
        ("K5", complete_graph(5)),
        ("E4", empty_graph(4)),
        ("E6", empty_graph(6)),
        ("P3", path_graph(3)),
        ("P5", path_graph(5)),
        ("P8", path_graph(8)),
        ("C4", cycle_graph(4)),
        ("C5", cycle_graph(5)),
        ("C7", cycle_graph(7)),
        ("C8", cycle_graph(8)),
        ("star7", ConflictGraph.from_edges(8, [(0, i) for i in range(1, 8)])),
        ("K33", ConflictGraph.from_edges(6, [(i, j) for i in range(3) for j in range(3, 6)])),
        ("K3xK3", gen_kneser(4, 2)),
    ]
    return graphs
