import itertools

import numpy as np
import pytest

from netfx.graph import Dag
from netfx.interference import InteractionNetwork


def generic_graph() -> Dag:
    edges = [("W", "Y"), ("C2", "W"), ("X", "Y"), ("O", "Y"), ("X", "O"), ("W", "O"),
             ("C1", "C2"), ("C1", "Y"), ("C3", "W")]
    roles = {"W": "treatment", "X": "feature-block", "O": "interaction-block", "Y": "outcome",
             "C1": "covariate", "C2": "covariate", "C3": "covariate"}
    return Dag(edges, roles)


def three_unit_network() -> InteractionNetwork:
    # 1->2, 3->1, 2->3, 3->2 in 1-based labels
    return InteractionNetwork.from_edges(3, [(0, 1), (2, 0), (1, 2), (2, 1)])


def six_unit_network() -> InteractionNetwork:
    # 5->1, 2->5, 5->2, 6->5, 2->3 in 1-based labels
    return InteractionNetwork.from_edges(6, [(4, 0), (1, 4), (4, 1), (5, 4), (1, 2)])


@pytest.fixture
def gg():
    return generic_graph()


@pytest.fixture
def net3():
    return three_unit_network()


@pytest.fixture
def net6():
    return six_unit_network()


# --- brute-force graph oracles shared by several test modules ------------


def skeleton_paths(g: Dag, a, b):
    """All simple paths between a and b in the skeleton, as node lists."""
    nbrs = {v: set(g.parents_of(v)) | set(g.children_of(v)) for v in g.nodes}
    out = []

    def walk(path):
        last = path[-1]
        if last == b:
            out.append(list(path))
            return
        for n in nbrs[last]:
            if n not in path:
                path.append(n)
                walk(path)
                path.pop()

    walk([a])
    return out


def all_descendants(g: Dag, v):
    seen, stack = {v}, [v]
    while stack:
        for c in g.children_of(stack.pop()):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def path_open(g: Dag, path, z) -> bool:
    for k in range(1, len(path) - 1):
        prev, mid, nxt = path[k - 1], path[k], path[k + 1]
        collider = prev in g.parents_of(mid) and nxt in g.parents_of(mid)
        if collider:
            if not (all_descendants(g, mid) & set(z)):
                return False
        elif mid in z:
            return False
    return True


def brute_dsep(g: Dag, a, b, z) -> bool:
    for x in a:
        for y in b:
            for path in skeleton_paths(g, x, y):
                if path_open(g, path, z):
                    return False
    return True


def is_directed(g: Dag, path) -> bool:
    return all(path[k + 1] in g.children_of(path[k]) for k in range(len(path) - 1))


def brute_valid_adjustment(g: Dag, a, b, z) -> bool:
    a, z = set(a), set(z)
    proper = []
    for x in a:
        for path in skeleton_paths(g, x, b):
            if not (set(path[1:]) & a):
                proper.append(path)
    cn = set()
    for path in proper:
        if is_directed(g, path):
            cn |= set(path[1:])
    forb = set(a)
    for v in cn:
        forb |= all_descendants(g, v)
    if z & forb:
        return False
    return not any(path_open(g, p, z) for p in proper if not is_directed(g, p))


def random_dag(rng: np.random.Generator, n_nodes: int, p: float) -> Dag:
    names = [f"V{i}" for i in range(n_nodes)]
    order = rng.permutation(n_nodes)
    edges = [(names[order[i]], names[order[j]]) for i, j in itertools.combinations(range(n_nodes), 2)
             if rng.random() < p]
    return Dag(edges, {n: "other" for n in names})
