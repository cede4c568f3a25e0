"""Bubble diagrams: adjacency graphs over rooms, and exact graph edit
distance for compatibility scoring.

A bubble diagram is an undirected graph whose nodes are rooms (identified by
id, labelled by room type) and whose edges mark spatial adjacency. Two rooms
are adjacent when the Manhattan distance between their boundaries is within a
threshold (inclusive): 8 pixels for raster sources, 2 length units for scene
sources.
"""

from __future__ import annotations

import heapq
import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import geometry
from .model import Floorplan

Edge = Tuple[str, str]

# Exact search guarantee; plans in practice stay at or below 8 rooms.
MAX_EXACT_NODES = 12

# Guard for threshold comparisons on 0.1-grid coordinates.
_THRESHOLD_EPS = 1e-9


def _normalize_edge(a: str, b: str) -> Edge:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class BubbleDiagram:
    """Typed adjacency graph: nodes are (id, room_type), edges id pairs."""

    nodes: Tuple[Tuple[str, str], ...]
    edges: FrozenSet[Edge]

    def __post_init__(self) -> None:
        ids = [i for i, _ in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids in bubble diagram")
        known = set(ids)
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop edge on {a!r}")
            if a not in known or b not in known:
                raise ValueError(f"edge references unknown node ({a!r}, {b!r})")

    @classmethod
    def build(cls, nodes: Iterable[Tuple[str, str]], edges: Iterable[Sequence[str]]) -> "BubbleDiagram":
        return cls(
            nodes=tuple(nodes),
            edges=frozenset(_normalize_edge(a, b) for a, b in edges),
        )

    def node_type(self, node_id: str) -> str:
        for nid, ntype in self.nodes:
            if nid == node_id:
                return ntype
        raise KeyError(node_id)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def to_obj(self) -> Dict:
        return {
            "nodes": [{"id": nid, "room_type": ntype} for nid, ntype in self.nodes],
            "edges": [list(e) for e in self.sorted_edges()],
        }

    @classmethod
    def from_obj(cls, obj: Dict) -> "BubbleDiagram":
        return cls.build(
            ((n["id"], n["room_type"]) for n in obj["nodes"]),
            obj.get("edges", []),
        )


def extract_bubble(fp: Floorplan, threshold: float) -> BubbleDiagram:
    """Derive the bubble diagram of a floorplan from room geometry.

    An edge connects two rooms whenever the Manhattan distance between their
    polygon boundaries is at most the threshold. Node order follows room
    order, so extraction is deterministic.
    """
    nodes = tuple((r.id, r.room_type) for r in fp.rooms)
    edges = set()
    for a, b in itertools.combinations(fp.rooms, 2):
        d = geometry.boundary_manhattan_distance(a.points(), b.points())
        if d <= threshold + _THRESHOLD_EPS:
            edges.add(_normalize_edge(a.id, b.id))
    return BubbleDiagram(nodes=nodes, edges=frozenset(edges))


def _graph_arrays(bd: BubbleDiagram) -> Tuple[List[str], List[int]]:
    """Node type labels plus adjacency bitmasks indexed like ``nodes``."""
    ids = [nid for nid, _ in bd.nodes]
    index = {nid: i for i, nid in enumerate(ids)}
    types = [ntype for _, ntype in bd.nodes]
    adj = [0] * len(ids)
    for a, b in bd.edges:
        ia, ib = index[a], index[b]
        adj[ia] |= 1 << ib
        adj[ib] |= 1 << ia
    return types, adj


def graph_edit_distance(a: BubbleDiagram, b: BubbleDiagram) -> int:
    """Exact graph edit distance between two typed graphs under unit costs.

    Costs: node insertion/deletion 1, node relabel (room type differs) 1,
    edge insertion/deletion 1. Node ids play no role in matching; only the
    type labels and the structure do. Computed by best-first search over node
    assignments with an admissible label/edge-count lower bound, so the
    result is minimal. Graphs beyond 12 nodes are rejected: approximate
    matching is out of scope.
    """
    if len(a.nodes) > MAX_EXACT_NODES or len(b.nodes) > MAX_EXACT_NODES:
        raise ValueError(
            f"exact search is limited to {MAX_EXACT_NODES} nodes per graph; "
            "approximate matching is not supported"
        )
    types_a, adj_a = _graph_arrays(a)
    types_b, adj_b = _graph_arrays(b)
    na, nb = len(types_a), len(types_b)
    edges_b_count = len(b.edges)
    if na == 0:
        return nb + edges_b_count

    # A-edges still unaccounted once the first k nodes are decided: an edge
    # (i, j) with i < j is charged when j is assigned.
    edge_larger_endpoint = [0] * na
    for i in range(na):
        for j in range(i + 1, na):
            if adj_a[i] >> j & 1:
                edge_larger_endpoint[j] += 1
    suffix_a_edges = [0] * (na + 1)
    for k in range(na - 1, -1, -1):
        suffix_a_edges[k] = suffix_a_edges[k + 1] + edge_larger_endpoint[k]

    type_suffix: List[Counter] = [Counter() for _ in range(na + 1)]
    for k in range(na - 1, -1, -1):
        type_suffix[k] = type_suffix[k + 1].copy()
        type_suffix[k][types_a[k]] += 1

    full_b_mask = (1 << nb) - 1

    def charged_b_edges(used_mask: int) -> int:
        count = 0
        for i in range(nb):
            if used_mask >> i & 1:
                count += bin(adj_b[i] & used_mask & ((1 << i) - 1)).count("1")
        return count

    def lower_bound(k: int, used_mask: int) -> int:
        rem_b_ids = [i for i in range(nb) if not used_mask >> i & 1]
        ra, rb = na - k, len(rem_b_ids)
        inter = sum((type_suffix[k] & Counter(types_b[i] for i in rem_b_ids)).values())
        node_lb = max(ra, rb) - inter
        uncharged_b = edges_b_count - charged_b_edges(used_mask)
        edge_lb = abs(suffix_a_edges[k] - uncharged_b)
        return node_lb + edge_lb

    def completion_cost(used_mask: int) -> int:
        """Insertions for unused B nodes and for B edges touching them."""
        unused_mask = full_b_mask & ~used_mask
        cost = bin(unused_mask).count("1")
        for i in range(nb):
            lower = adj_b[i] & ((1 << i) - 1)
            if unused_mask >> i & 1:
                cost += bin(lower).count("1")
            else:
                cost += bin(lower & unused_mask).count("1")
        return cost

    counter = itertools.count()
    start_h = lower_bound(0, 0)
    heap: List[Tuple[int, int, int, int, int, Tuple[Optional[int], ...]]] = [
        (start_h, 0, next(counter), 0, 0, ())
    ]
    while heap:
        f, g, _, k, used_mask, images = heapq.heappop(heap)
        if k == na:
            return g
        candidates: List[Optional[int]] = [i for i in range(nb) if not used_mask >> i & 1]
        candidates.append(None)
        for cand in candidates:
            delta = 0
            if cand is None:
                delta += 1  # node deletion
                for j in range(k):
                    if adj_a[j] >> k & 1:
                        delta += 1
                new_mask = used_mask
            else:
                if types_a[k] != types_b[cand]:
                    delta += 1  # relabel
                for j in range(k):
                    ea = adj_a[j] >> k & 1
                    img = images[j]
                    eb = img is not None and (adj_b[img] >> cand & 1)
                    if bool(ea) != bool(eb):
                        delta += 1
                new_mask = used_mask | (1 << cand)
            new_images = images + (cand,)
            new_g = g + delta
            new_k = k + 1
            if new_k == na:
                new_g += completion_cost(new_mask)
                heapq.heappush(heap, (new_g, new_g, next(counter), new_k, new_mask, new_images))
            else:
                h = lower_bound(new_k, new_mask)
                heapq.heappush(heap, (new_g + h, new_g, next(counter), new_k, new_mask, new_images))
    raise RuntimeError("graph edit distance search exhausted without a solution")


def id_anchored_distance(a: BubbleDiagram, b: BubbleDiagram) -> int:
    """Edit distance with nodes paired by id instead of searched.

    Counts nodes present on one side only, paired nodes whose types differ,
    and the symmetric difference of the edge sets. Offered as an optional
    comparison mode; the default compatibility metric ignores ids.
    """
    ids_a = {nid: ntype for nid, ntype in a.nodes}
    ids_b = {nid: ntype for nid, ntype in b.nodes}
    cost = len(set(ids_a) ^ set(ids_b))
    for nid in set(ids_a) & set(ids_b):
        if ids_a[nid] != ids_b[nid]:
            cost += 1
    cost += len(a.edges ^ b.edges)
    return cost


def compatibility(
    input_bd: BubbleDiagram,
    generated: Floorplan,
    threshold: float,
    id_anchored: bool = False,
) -> int:
    """Distance between a prompted diagram and the one a generation realizes.

    Extracts the generated floorplan's bubble diagram at the given threshold
    and returns its edit distance from the input diagram; 0 means the
    generation realizes the requested adjacency exactly, lower is better.
    """
    extracted = extract_bubble(generated, threshold)
    if id_anchored:
        return id_anchored_distance(input_bd, extracted)
    return graph_edit_distance(input_bd, extracted)
