"""Degree queries, prediction error and instance generators for nomination graphs."""
import itertools
import logging
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from src.data.models import (
    FigureFamily,
    InstanceFamily,
    NominationGraph,
    Prediction,
)
from src.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

# Figure transcriptions, 0-indexed; predicted vertices are drawn first
_FIGURE_EDGES: Dict[FigureFamily, List[List[Tuple[int, int]]]] = {
    FigureFamily.FIG3_1SEL: [
        [(1, 0)],
        [(0, 1)],
        [(0, 1), (1, 0)],
    ],
    FigureFamily.FIG4_PLURALITY: [
        [(2, 0), (3, 1), (0, 1), (1, 0)],
        [(2, 0), (3, 2), (0, 1), (1, 0)],
        [(0, 1), (1, 2), (2, 0), (3, 1)],
    ],
    FigureFamily.FIG5_2SEL: [
        [(2, 0), (2, 1)],
        [(0, 1), (0, 2)],
        [(0, 2), (1, 2), (0, 1), (1, 0)],
        [(0, 1), (2, 1), (0, 2), (2, 0)],
        [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)],
    ],
    FigureFamily.FIG6_3SEL: [
        [(4, 0), (4, 1), (4, 2)],
        [(4, 0), (4, 1), (4, 2), (4, 3)],
        [(0, 1), (0, 2), (0, 3), (0, 4)],
        [(0, 1), (0, 2), (0, 3), (4, 1), (4, 2), (0, 4), (4, 0)],
        [(3, 0), (3, 1), (3, 2), (4, 0), (4, 1), (4, 2), (3, 4), (4, 3)],
        [(0, 1), (0, 2), (0, 3), (4, 1), (4, 2), (4, 3), (0, 4), (4, 0)],
        [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (0, 1), (1, 0)],
    ],
}

_FIGURE_PREDICTION: Dict[FigureFamily, Tuple[int, ...]] = {
    FigureFamily.FIG3_1SEL: (0,),
    FigureFamily.FIG4_PLURALITY: (0,),
    FigureFamily.FIG5_2SEL: (0, 1),
    FigureFamily.FIG6_3SEL: (0, 1, 2),
}

# Probability variables written next to the vertices of each figure instance
_FIGURE_LABELS: Dict[FigureFamily, List[Dict[int, str]]] = {
    FigureFamily.FIG3_1SEL: [
        {0: "p1"},
        {1: "p2"},
        {0: "p1", 1: "p2"},
    ],
    FigureFamily.FIG4_PLURALITY: [
        {0: "p1", 1: "p2"},
        {0: "p1", 1: "p3", 2: "p4"},
        {0: "p5", 1: "p2", 2: "p6"},
    ],
    FigureFamily.FIG5_2SEL: [
        {0: "p1", 1: "p1"},
        {1: "p2", 2: "p3"},
        {0: "p2", 1: "p2", 2: "p4"},
        {0: "p1", 1: "p5", 2: "p3"},
        {0: "p5", 1: "p5", 2: "p4"},
    ],
    FigureFamily.FIG6_3SEL: [
        {0: "p1", 1: "p1", 2: "p1"},
        {0: "p2", 1: "p2", 2: "p2", 3: "p3"},
        {1: "p4", 2: "p4", 3: "p5", 4: "p5"},
        {0: "p1", 1: "p6", 2: "p6", 3: "p7", 4: "p5"},
        {0: "p8", 1: "p8", 2: "p8", 3: "p3", 4: "p3"},
        {0: "p2", 1: "p9", 2: "p9", 3: "p10", 4: "p5"},
        {0: "p4", 1: "p4", 2: "p11", 3: "p12", 4: "p12"},
    ],
}


def indegree(g: NominationGraph, i: int) -> int:
    return len(g.in_neighbors(i))


def indegree_from(g: NominationGraph, sources: Iterable[int], i: int) -> int:
    """Number of edges into i whose source lies in sources"""
    source_set = {g.check_vertex(u) for u in sources}
    return len(g.in_neighbors(i) & source_set)


def set_indegree(g: NominationGraph, vertices: Iterable[int]) -> int:
    """Total indegree of a vertex set"""
    return sum(indegree(g, v) for v in set(vertices))


def max_k_indegree(g: NominationGraph, k: int,
                   exhaustive_limit: Optional[int] = None) -> Tuple[int, Tuple[int, ...]]:
    """Delta_k and the lexicographically smallest size-k set attaining it"""
    if not isinstance(k, int) or not 1 <= k <= g.n:
        raise ValueError(f"k must be between 1 and n={g.n}, got {k!r}.")
    if exhaustive_limit is None:
        exhaustive_limit = ConfigManager().get_config("graphs").exhaustive_indegree_limit

    degrees = [indegree(g, v) for v in g.vertices]
    if g.n <= exhaustive_limit:
        return _max_k_exhaustive(degrees, k)
    return _max_k_top(degrees, k)


def _max_k_exhaustive(degrees: List[int], k: int) -> Tuple[int, Tuple[int, ...]]:
    best_value, best_set = -1, ()
    # combinations() yields sorted tuples in lexicographic order, so the first maximum wins
    for subset in itertools.combinations(range(len(degrees)), k):
        value = sum(degrees[v] for v in subset)
        if value > best_value:
            best_value, best_set = value, subset
    return best_value, best_set


def _max_k_top(degrees: List[int], k: int) -> Tuple[int, Tuple[int, ...]]:
    ranked = sorted(range(len(degrees)), key=lambda v: (-degrees[v], v))[:k]
    return sum(degrees[v] for v in ranked), tuple(sorted(ranked))


def is_plurality(g: NominationGraph) -> bool:
    return all(len(g.out_neighbors(v)) == 1 for v in g.vertices)


def prediction_error(g: NominationGraph, p: Prediction) -> Fraction:
    """Normalized gap eta = (Delta_k - indegree of the prediction) / Delta_k"""
    p.validate_for(g)
    delta_k, _ = max_k_indegree(g, p.k)
    if delta_k == 0:
        return Fraction(0)
    return Fraction(delta_k - set_indegree(g, p.vertices), delta_k)


def gen_random(n: int, edge_prob: float, seed: int) -> NominationGraph:
    """Each ordered non-self pair becomes an edge independently with edge_prob"""
    if n < 1:
        raise ValueError("n must be a positive integer.")
    if not 0 <= edge_prob <= 1:
        raise ValueError("edge_prob must be in [0, 1].")
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and draws[u, v] < edge_prob]
    return NominationGraph(n, edges)


def gen_random_plurality(n: int, seed: int) -> NominationGraph:
    """Every vertex nominates one uniformly chosen other vertex"""
    if n < 2:
        raise ValueError("plurality graphs need n >= 2.")
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n):
        target = int(rng.integers(0, n - 1))
        # Skip over u itself
        if target >= u:
            target += 1
        edges.append((u, target))
    return NominationGraph(n, edges)


def gen_figure_family(fam: InstanceFamily) -> List[Tuple[NominationGraph, Prediction]]:
    """Graph/prediction pairs of a worst-case figure family, padded with isolated vertices"""
    prediction = Prediction(_FIGURE_PREDICTION[fam.family])
    return [(NominationGraph(fam.n, edges), prediction) for edges in _FIGURE_EDGES[fam.family]]


def figure_labels(family: FigureFamily) -> List[Dict[int, str]]:
    """Per instance, the probability variable written next to each labelled vertex"""
    return [dict(labels) for labels in _FIGURE_LABELS[FigureFamily(family)]]


def all_graphs(n: int) -> Iterator[NominationGraph]:
    """Every simple digraph on n vertices (2^(n(n-1)) of them)"""
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    for mask in range(1 << len(pairs)):
        yield NominationGraph(n, [pairs[b] for b in range(len(pairs)) if mask >> b & 1])


def all_plurality_graphs(n: int) -> Iterator[NominationGraph]:
    """Every plurality graph on n vertices ((n-1)^n of them)"""
    if n < 2:
        raise ValueError("plurality graphs need n >= 2.")
    choices = [[t for t in range(n) if t != u] for u in range(n)]
    for targets in itertools.product(*choices):
        yield NominationGraph(n, list(enumerate(targets)))
