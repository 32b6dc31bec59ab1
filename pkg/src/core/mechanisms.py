"""Selection mechanisms; every randomized one takes an explicit numpy Generator."""
import logging
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.data.models import (
    MechanismKind,
    MechanismSpec,
    NominationGraph,
    PartitionAssignment,
    Prediction,
    PriorityVector,
    rational_param,
)

logger = logging.getLogger(__name__)

# Executor of the permutation mechanism along an explicit order; only the eligible set can win
Selector = Callable[[NominationGraph, FrozenSet[int], Sequence[int]], int]


def induced_permutation(x: PriorityVector, s: Iterable[int]) -> List[int]:
    """Order of s by ascending priority, ties to the smaller vertex id"""
    s = frozenset(s)
    if x.keys() != s:
        raise ValueError("priority vector keys must equal the eligible set.")
    return sorted(s, key=lambda v: (x[v], v))


def observed_indegree(g: NominationGraph, s: Iterable[int], perm: Sequence[int], i: int) -> int:
    """Indegree of i from outside s plus from vertices of s placed before i"""
    s = frozenset(s)
    if i not in s:
        raise ValueError(f"vertex {i} is not in the eligible set.")
    if sorted(perm) != sorted(s):
        raise ValueError("perm must be a permutation of the eligible set.")
    before = set(perm[:list(perm).index(i)])
    return sum(1 for u in g.in_neighbors(i) if u not in s or u in before)


def select_from_order(g: NominationGraph, s: FrozenSet[int], order: Sequence[int]) -> int:
    """Permutation mechanism along order, which lists every vertex of s.

    Listed vertices outside s vote from their place in the order but never win.
    Unlisted vertices vote throughout.
    """
    listed = frozenset(order)
    candidate: Optional[int] = None
    d = 0
    seen = set()
    for i in order:
        if i in s:
            sources = g.in_neighbors(i)
            observed = sum(1 for u in sources if u in seen or u not in listed)
            if candidate is None:
                candidate, d = i, observed
            else:
                # The current candidate's vote for i does not count towards the challenge
                challenge = observed - 1 if candidate in sources else observed
                if challenge >= d:
                    candidate, d = i, observed
        seen.add(i)
    return candidate


def permutation_select(g: NominationGraph, s: Iterable[int], x: PriorityVector) -> int:
    s = frozenset(s)
    if not s:
        raise ValueError("eligible set must not be empty.")
    for v in s:
        g.check_vertex(v)
    return select_from_order(g, s, induced_permutation(x, s))


def _uniform(rng: np.random.Generator) -> float:
    return float(rng.random())


def rho_permutation(g: NominationGraph, predicted: int, rho, rng: np.random.Generator) -> int:
    g.check_vertex(predicted)
    rho = rational_param(rho, "rho")
    values: Dict[int, object] = {}
    for v in g.vertices:
        values[v] = rho if v == predicted else _uniform(rng)
    return permutation_select(g, g.vertices, PriorityVector(values))


def uniform_permutation(g: NominationGraph, rng: np.random.Generator) -> int:
    x = PriorityVector({v: _uniform(rng) for v in g.vertices})
    return permutation_select(g, g.vertices, x)


def default_interior_priorities(g: NominationGraph, predicted_pair: Tuple[int, int]) -> PriorityVector:
    """Vertex i gets (i+1)/(n+1), strictly inside (0, 1)"""
    return PriorityVector({v: Fraction(v + 1, g.n + 1) for v in g.vertices if v not in predicted_pair})


def bidirectional_orders(g: NominationGraph, predicted_pair: Tuple[int, int],
                         interior_priorities: Optional[PriorityVector] = None) -> Tuple[List[int], List[int]]:
    """Forward order (first predicted vertex at 0, second at 1) and the order of 1 - x"""
    first, second = predicted_pair
    g.check_vertex(first)
    g.check_vertex(second)
    if first == second:
        raise ValueError("predicted pair must be two distinct vertices.")
    if interior_priorities is None:
        interior_priorities = default_interior_priorities(g, predicted_pair)
    rest = frozenset(g.vertices) - {first, second}
    if interior_priorities.keys() != rest:
        raise ValueError("interior priorities must cover exactly the non-predicted vertices.")
    values = interior_priorities.values
    for v, value in values.items():
        if not 0 < value < 1:
            raise ValueError(f"interior priority of vertex {v} must lie strictly inside (0, 1).")
    values[first] = 0
    values[second] = 1
    x = PriorityVector(values)
    everyone = frozenset(g.vertices)
    return induced_permutation(x, everyone), induced_permutation(x.reversed(), everyone)


def fixed_bidirectional(g: NominationGraph, predicted_pair: Tuple[int, int],
                        interior_priorities: Optional[PriorityVector] = None) -> FrozenSet[int]:
    forward, backward = bidirectional_orders(g, predicted_pair, interior_priorities)
    return bidirectional_winners(g, frozenset(g.vertices), forward, backward)


def bidirectional_winners(g: NominationGraph, eligible: FrozenSet[int], forward: Sequence[int],
                          backward: Sequence[int], selector: Optional[Selector] = None) -> FrozenSet[int]:
    """Winners of the two passes; vertices outside eligible still vote from their place"""
    selector = selector or select_from_order
    return frozenset({selector(g, eligible, forward), selector(g, eligible, backward)})


def randomized_bidirectional(g: NominationGraph, rng: np.random.Generator) -> FrozenSet[int]:
    if g.n < 2:
        raise ValueError("randomized bidirectional selection needs n >= 2.")
    x = PriorityVector({v: _uniform(rng) for v in g.vertices})
    return frozenset({permutation_select(g, g.vertices, x),
                      permutation_select(g, g.vertices, x.reversed())})


def det_k_selection(g: NominationGraph, p: Prediction) -> FrozenSet[int]:
    """First k-2 predicted vertices plus fixed bidirectional on the last two.

    The prefix keeps voting in both passes but cannot win one, so the result has
    k vertices unless both passes pick the same winner.
    """
    if p.k < 2:
        raise ValueError("det-k selection needs k >= 2.")
    p.validate_for(g)
    prefix = frozenset(p.vertices[:-2])
    forward, backward = bidirectional_orders(g, (p.vertices[-2], p.vertices[-1]))
    return prefix | bidirectional_winners(g, frozenset(g.vertices) - prefix, forward, backward)


def draw_rho_partition(g: NominationGraph, p: Prediction, rng: np.random.Generator) -> PartitionAssignment:
    """Predicted vertex j goes to set j; every other vertex to a uniform set (ascending id)"""
    p.validate_for(g)
    predicted = p.as_set()
    set_of = {v: j for j, v in enumerate(p.vertices)}
    for v in g.vertices:
        if v not in predicted:
            set_of[v] = int(rng.integers(0, p.k))
    return PartitionAssignment(set_of, p.k, g.n)


def rho_partition(g: NominationGraph, p: Prediction, rho, rng: np.random.Generator) -> FrozenSet[int]:
    rho = rational_param(rho, "rho")
    if p.k > g.n:
        raise ValueError(f"k={p.k} exceeds n={g.n}.")
    assignment = draw_rho_partition(g, p, rng)
    selected = set()
    for j, predicted in enumerate(p.vertices):
        values = {predicted: rho}
        for v in assignment.members(j):
            if v != predicted:
                values[v] = _uniform(rng)
        selected.add(permutation_select(g, values.keys(), PriorityVector(values)))
    return frozenset(selected)


def k_partition_baseline(g: NominationGraph, k: int, rng: np.random.Generator) -> FrozenSet[int]:
    """Uniform partition of all vertices, uniform permutation inside each nonempty set"""
    if not 1 <= k <= g.n:
        raise ValueError(f"k must be between 1 and n={g.n}.")
    assignment = PartitionAssignment({v: int(rng.integers(0, k)) for v in g.vertices}, k, g.n)
    selected = set()
    for j in range(k):
        members = assignment.members(j)
        if members:
            x = PriorityVector({v: _uniform(rng) for v in members})
            selected.add(permutation_select(g, members, x))
    return frozenset(selected)


def trivial_predicted(p: Prediction) -> FrozenSet[int]:
    return p.as_set()


def lottery(weight, spec_a: MechanismSpec, spec_b: MechanismSpec, g: NominationGraph,
            p: Prediction, rng: np.random.Generator) -> FrozenSet[int]:
    """One Bernoulli(weight) draw, then a draw of spec_a or spec_b"""
    weight = rational_param(weight, "weight")
    chosen = spec_a if rng.random() < weight else spec_b
    return run_mechanism(chosen, g, p, rng)


def check_compatible(spec: MechanismSpec, g: NominationGraph, p: Prediction) -> None:
    """Raise ValueError when the mechanism spec cannot run on (g, p)"""
    p.validate_for(g)
    if p.k != spec.k:
        raise ValueError(f"{spec.label()} selects k={spec.k} but the prediction has {p.k} vertices.")
    if spec.k > g.n:
        raise ValueError(f"{spec.label()} needs n >= {spec.k}, got n={g.n}.")


def run_mechanism(spec: MechanismSpec, g: NominationGraph, p: Prediction,
                  rng: np.random.Generator) -> FrozenSet[int]:
    """One draw of the configured mechanism"""
    check_compatible(spec, g, p)
    kind = spec.kind
    if kind is MechanismKind.RHO_PERMUTATION:
        return frozenset({rho_permutation(g, p.vertices[0], spec.rho, rng)})
    if kind is MechanismKind.UNIFORM_PERMUTATION:
        return frozenset({uniform_permutation(g, rng)})
    if kind is MechanismKind.FIXED_BIDIRECTIONAL:
        return fixed_bidirectional(g, (p.vertices[0], p.vertices[1]))
    if kind is MechanismKind.RANDOMIZED_BIDIRECTIONAL:
        return randomized_bidirectional(g, rng)
    if kind is MechanismKind.DET_K:
        return det_k_selection(g, p)
    if kind is MechanismKind.RHO_PARTITION:
        return rho_partition(g, p, spec.rho, rng)
    if kind is MechanismKind.K_PARTITION_BASELINE:
        return k_partition_baseline(g, spec.k, rng)
    if kind is MechanismKind.TRIVIAL_PREDICTED:
        return trivial_predicted(p)
    return lottery(spec.mix_weight, spec.a, spec.b, g, p, rng)
