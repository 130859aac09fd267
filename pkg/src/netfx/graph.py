"""Directed acyclic graphs and graphical identification tools.

Nodes are string labels. Each node carries a role (``covariate``,
``treatment``, ``feature-block``, ``interaction-block``, ``outcome`` or
``other``); roles are metadata and never part of a node's identity. The
feature block ``X`` and the interaction block ``O`` are always single
(multivariate) nodes.

All graphs are immutable and every function here is pure.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import GraphError

ROLES = ("covariate", "treatment", "feature-block", "interaction-block", "outcome", "other")


def _as_set(nodes) -> frozenset:
    if nodes is None:
        return frozenset()
    if isinstance(nodes, str):
        return frozenset([nodes])
    return frozenset(nodes)


class Dag:
    """A directed acyclic graph with role-labelled nodes.

    Parameters
    ----------
    edges : iterable of (src, dst) pairs
    roles : mapping node -> role. Nodes that only appear here (no edges)
        are isolated nodes. Nodes in ``edges`` without a role get ``other``.
    """

    def __init__(self, edges: Iterable[tuple[str, str]] = (), roles: Mapping[str, str] | None = None):
        edge_list = [tuple(e) for e in edges]
        edge_set = frozenset(edge_list)
        if len(edge_set) != len(edge_list):
            raise GraphError("duplicate edges")
        for u, v in edge_set:
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
        node_roles = dict(roles or {})
        for u, v in edge_list:
            node_roles.setdefault(u, "other")
            node_roles.setdefault(v, "other")
        for node, role in node_roles.items():
            if role not in ROLES:
                raise GraphError(f"unknown role {role!r} for node {node!r}")
        object.__setattr__(self, "edges", edge_set)
        object.__setattr__(self, "roles", dict(sorted(node_roles.items())))
        pa: dict[str, set] = {n: set() for n in node_roles}
        ch: dict[str, set] = {n: set() for n in node_roles}
        for u, v in edge_set:
            pa[v].add(u)
            ch[u].add(v)
        object.__setattr__(self, "_pa", {n: frozenset(s) for n, s in pa.items()})
        object.__setattr__(self, "_ch", {n: frozenset(s) for n, s in ch.items()})
        if self._topological_order() is None:
            raise GraphError("graph contains a directed cycle")

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(self.roles)

    def __setattr__(self, name, value):
        raise AttributeError("Dag is immutable")

    def __contains__(self, node) -> bool:
        return node in self.roles

    def __repr__(self):
        return f"Dag(nodes={list(self.nodes)}, edges={sorted(self.edges)})"

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.edges == other.edges and self.roles == other.roles

    def __hash__(self):
        return hash((self.edges, tuple(self.roles.items())))

    def parents_of(self, v: str) -> frozenset:
        self._check(v)
        return self._pa[v]

    def children_of(self, v: str) -> frozenset:
        self._check(v)
        return self._ch[v]

    def nodes_with_role(self, role: str) -> frozenset:
        return frozenset(n for n, r in self.roles.items() if r == role)

    def topological_order(self) -> list[str]:
        return self._topological_order()

    def _topological_order(self):
        indeg = {n: len(p) for n, p in self._pa.items()}
        queue = deque(sorted(n for n, d in indeg.items() if d == 0))
        order = []
        while queue:
            n = queue.popleft()
            order.append(n)
            for c in sorted(self._ch[n]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        return order if len(order) == len(indeg) else None

    def _check(self, *nodes):
        for n in nodes:
            if n not in self.roles:
                raise GraphError(f"unknown node {n!r}")

    def remove_edges(self, edges: Iterable[tuple[str, str]]) -> "Dag":
        drop = set(edges)
        return Dag([e for e in self.edges if e not in drop], self.roles)


@dataclass(frozen=True)
class ProjectedGraph:
    """Mixed graph produced by a latent projection."""

    nodes: tuple
    directed: frozenset
    bidirected: frozenset  # frozensets of two nodes


def parents(g: Dag, v: str) -> frozenset:
    return g.parents_of(v)


def children(g: Dag, v: str) -> frozenset:
    return g.children_of(v)


def descendants(g: Dag, s) -> frozenset:
    """Nodes reachable from ``s`` by directed paths, including ``s`` itself."""
    s = _as_set(s)
    g._check(*s)
    seen = set(s)
    stack = list(s)
    while stack:
        for c in g._ch[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def ancestors(g: Dag, s) -> frozenset:
    """Nodes with a directed path into ``s``, including ``s`` itself."""
    s = _as_set(s)
    g._check(*s)
    seen = set(s)
    stack = list(s)
    while stack:
        for p in g._pa[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def _require_disjoint(**sets):
    names = list(sets)
    for x, y in itertools.combinations(names, 2):
        common = sets[x] & sets[y]
        if common:
            raise GraphError(f"sets {x} and {y} overlap in {sorted(common)}")


def _reachable(g: Dag, sources: frozenset, z: frozenset) -> set:
    """Nodes d-connected to ``sources`` given ``z`` (Bayes-ball traversal)."""
    anc_z = ancestors(g, z) if z else frozenset()
    # direction "up": arrived from a child; "down": arrived from a parent
    queue = deque((s, "up") for s in sources)
    visited = set()
    reach = set()
    while queue:
        v, d = queue.popleft()
        if (v, d) in visited:
            continue
        visited.add((v, d))
        if v not in z:
            reach.add(v)
        if d == "up":
            if v in z:
                continue
            queue.extend((p, "up") for p in g._pa[v])
            queue.extend((c, "down") for c in g._ch[v])
        else:
            if v not in z:
                queue.extend((c, "down") for c in g._ch[v])
            if v in anc_z:
                queue.extend((p, "up") for p in g._pa[v])
    return reach


def d_separated(g: Dag, a, b, z=()) -> bool:
    """True iff ``z`` blocks every path between ``a`` and ``b``."""
    a, b, z = _as_set(a), _as_set(b), _as_set(z)
    g._check(*a, *b, *z)
    _require_disjoint(a=a, b=b, z=z)
    return not (_reachable(g, a, z) & b)


def causal_nodes(g: Dag, a, b) -> frozenset:
    """Nodes on proper causal paths from ``a`` to ``b``, excluding ``a``."""
    a, b = _as_set(a), _as_set(b)
    g._check(*a, *b)
    _require_disjoint(a=a, b=b)
    # directed paths that leave a and never re-enter it
    down = set()
    stack = [c for x in a for c in g._ch[x] if c not in a]
    while stack:
        v = stack.pop()
        if v in down:
            continue
        down.add(v)
        stack.extend(c for c in g._ch[v] if c not in a)
    up = set()
    stack = [v for v in b]
    while stack:
        v = stack.pop()
        if v in up:
            continue
        up.add(v)
        stack.extend(p for p in g._pa[v] if p not in a)
    return frozenset(down & up)


def forbidden_nodes(g: Dag, a, b) -> frozenset:
    """Descendants of the causal nodes, together with ``a``."""
    a = _as_set(a)
    cn = causal_nodes(g, a, b)
    return descendants(g, cn) | a


def proper_backdoor_graph(g: Dag, a, b) -> Dag:
    """Remove the first edge of every proper causal path from ``a`` to ``b``."""
    a = _as_set(a)
    cn = causal_nodes(g, a, b)
    return g.remove_edges((x, c) for x in a for c in g._ch[x] if c in cn)


def is_valid_adjustment(g: Dag, a, b: str, z=()) -> bool:
    """Generalised adjustment criterion for the joint effect of ``a`` on ``b``.

    ``z`` is valid iff it contains no forbidden node and blocks every proper
    noncausal path from ``a`` to ``b``. The second condition is checked as
    d-separation of ``a`` and ``b`` given ``z`` in the proper back-door graph.
    """
    a, z = _as_set(a), _as_set(z)
    bs = _as_set(b)
    g._check(*a, *bs, *z)
    _require_disjoint(a=a, b=bs, z=z)
    if z & forbidden_nodes(g, a, bs):
        return False
    return d_separated(proper_backdoor_graph(g, a, bs), a, bs, z)


def enumerate_valid_adjustment_sets(g: Dag, a, b: str, candidates) -> list[frozenset]:
    """All subsets of ``candidates`` that are valid adjustment sets.

    Sets are ordered by size, then lexicographically on sorted node ids.
    """
    a, cand = _as_set(a), sorted(_as_set(candidates))
    _require_disjoint(candidates=frozenset(cand), exposure=a | {b})
    out = []
    for k in range(len(cand) + 1):
        for combo in itertools.combinations(cand, k):
            if is_valid_adjustment(g, a, b, combo):
                out.append(frozenset(combo))
    return out


def stack_generic(explicit: Dag, unit_of, var_of) -> Dag:
    """Generic graph of an explicit graph: keep within-unit edges, drop units.

    ``unit_of`` and ``var_of`` map an explicit node to its unit id and its
    generic label; either a mapping or a callable.
    """
    unit = unit_of if callable(unit_of) else unit_of.__getitem__
    var = var_of if callable(var_of) else var_of.__getitem__
    roles = {}
    for n in explicit.nodes:
        roles.setdefault(var(n), explicit.roles[n])
    edges = {
        (var(u), var(v)) for u, v in explicit.edges if unit(u) == unit(v)
    }
    try:
        return Dag(sorted(edges), roles)
    except GraphError as exc:
        raise GraphError(f"stacked generic graph is not a DAG: {exc}") from None


def latent_projection(g: Dag, latents) -> ProjectedGraph:
    """Latent projection of ``g`` over the nodes in ``latents``."""
    latents = _as_set(latents)
    g._check(*latents)
    observed = tuple(n for n in g.nodes if n not in latents)

    def latent_reach(start_children):
        # observed endpoints of directed paths whose interior is latent
        hit, seen = set(), set()
        stack = list(start_children)
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            if v in latents:
                stack.extend(g._ch[v])
            else:
                hit.add(v)
        return hit

    directed = set()
    for u in observed:
        for v in latent_reach(g._ch[u]):
            if v != u:
                directed.add((u, v))
    bidirected = set()
    for lat in latents:
        hit = sorted(latent_reach(g._ch[lat]))
        for u, v in itertools.combinations(hit, 2):
            bidirected.add(frozenset((u, v)))
    return ProjectedGraph(observed, frozenset(directed), frozenset(bidirected))


# --- text format ---------------------------------------------------------

def parse_dag(text: str) -> Dag:
    """Parse ``node <id> role=<role>`` declarations and ``src -> dst`` lines."""
    roles: dict[str, str] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            src, dst = (part.strip() for part in line.split("->", 1))
            if not src or not dst or " " in src or " " in dst:
                raise GraphError(f"line {lineno}: malformed edge {raw!r}")
            edges.append((src, dst))
            continue
        parts = line.split()
        if parts[0] != "node" or len(parts) not in (2, 3):
            raise GraphError(f"line {lineno}: cannot parse {raw!r}")
        role = "other"
        if len(parts) == 3:
            key, _, role = parts[2].partition("=")
            if key != "role":
                raise GraphError(f"line {lineno}: expected role=<role>")
        roles[parts[1]] = role
    return Dag(edges, roles)


def read_dag(path) -> Dag:
    return parse_dag(Path(path).read_text())


def format_dag(g: Dag) -> str:
    lines = [f"node {n} role={r}" for n, r in g.roles.items()]
    lines += [f"{u} -> {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def exposure_nodes(g: Dag) -> tuple[frozenset, str]:
    """The exposure set {X, W, O} and the outcome node of a generic graph."""
    a = (g.nodes_with_role("feature-block") | g.nodes_with_role("treatment")
         | g.nodes_with_role("interaction-block"))
    outcomes = g.nodes_with_role("outcome")
    if len(g.nodes_with_role("treatment")) != 1 or len(outcomes) != 1:
        raise GraphError("generic graph needs exactly one treatment and one outcome node")
    return a, next(iter(outcomes))
