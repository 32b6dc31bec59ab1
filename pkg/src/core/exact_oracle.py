"""Exact rational selection distributions and the audits built on them.

Randomness is enumerated, never sampled: permutation mechanisms are reduced to
weighted orders of the eligible set, partitions to weighted assignments, and
lotteries to weighted mixtures. Every weight is a Fraction, so impartiality
and tightness checks compare probabilities with exact equality.
"""
import itertools
import logging
from fractions import Fraction
from math import factorial
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from src.core.analysis import figure_constraints, upper_bound_region
from src.core.graph_core import (
    all_plurality_graphs,
    figure_labels,
    gen_figure_family,
    indegree,
    is_plurality,
    max_k_indegree,
    set_indegree,
)
from src.core.mechanisms import (
    Selector,
    bidirectional_orders,
    bidirectional_winners,
    check_compatible,
    select_from_order,
)
from src.data.models import (
    BoundAuditReport,
    BoundSetting,
    ConstraintCheck,
    ExactDistribution,
    FigureFamily,
    InstanceAudit,
    InstanceFamily,
    LinkageCheck,
    MechanismKind,
    MechanismSpec,
    NominationGraph,
    Prediction,
)
from src.utils.config_manager import ConfigManager, OracleConfig

logger = logging.getLogger(__name__)

SETTING_FAMILY = {
    BoundSetting.SEL1: FigureFamily.FIG3_1SEL,
    BoundSetting.SEL1_PLURALITY: FigureFamily.FIG4_PLURALITY,
    BoundSetting.SEL2: FigureFamily.FIG5_2SEL,
    BoundSetting.SEL3: FigureFamily.FIG6_3SEL,
}
SETTING_K = {
    BoundSetting.SEL1: 1,
    BoundSetting.SEL1_PLURALITY: 1,
    BoundSetting.SEL2: 2,
    BoundSetting.SEL3: 3,
}

_PERMUTATION_KINDS = {MechanismKind.RHO_PERMUTATION, MechanismKind.UNIFORM_PERMUTATION,
                      MechanismKind.RANDOMIZED_BIDIRECTIONAL}
_PARTITION_KINDS = {MechanismKind.RHO_PARTITION, MechanismKind.K_PARTITION_BASELINE}


class InfeasibleEnumerationError(RuntimeError):
    """The requested enumeration exceeds the configured oracle budget"""


def _limits() -> OracleConfig:
    return ConfigManager().get_config("oracle")


def _check_budget(spec: MechanismSpec, g: NominationGraph, limits: OracleConfig) -> None:
    if spec.kind is MechanismKind.LOTTERY:
        _check_budget(spec.a, g, limits)
        _check_budget(spec.b, g, limits)
    elif spec.kind in _PERMUTATION_KINDS and g.n > limits.max_n_permutation:
        raise InfeasibleEnumerationError(
            f"{spec.label()} on n={g.n} exceeds the permutation budget n <= {limits.max_n_permutation}.")
    elif spec.kind in _PARTITION_KINDS and (g.n > limits.max_n_partition or spec.k > limits.max_k_partition):
        raise InfeasibleEnumerationError(
            f"{spec.label()} on n={g.n} exceeds the partition budget "
            f"n <= {limits.max_n_partition}, k <= {limits.max_k_partition}.")


def _cut_weights(m: int, rho: Fraction) -> List[Fraction]:
    """Weight of one arrangement of m others with the first c of them below rho"""
    return [rho ** c * (1 - rho) ** (m - c) / (factorial(c) * factorial(m - c)) for c in range(m + 1)]


def weighted_orders(members: Sequence[int], fixed: Optional[int],
                    rho: Optional[Fraction]) -> Iterator[Tuple[Tuple[int, ...], Fraction]]:
    """Orders of members with their probabilities.

    With fixed=None all orders are equally likely. Otherwise the fixed vertex
    sits at priority rho while the others are uniform, so an order is an
    arrangement of the others plus a cut position for the fixed vertex.
    """
    if fixed is None:
        weight = Fraction(1, factorial(len(members)))
        for order in itertools.permutations(members):
            yield order, weight
        return
    others = [v for v in members if v != fixed]
    weights = _cut_weights(len(others), rho)
    for arrangement in itertools.permutations(others):
        for cut, weight in enumerate(weights):
            if weight:
                yield arrangement[:cut] + (fixed,) + arrangement[cut:], weight


def _set_distribution(g: NominationGraph, members: Tuple[int, ...], fixed: Optional[int],
                      rho: Optional[Fraction], selector: Selector,
                      cache: Dict[tuple, Dict[int, Fraction]]) -> Dict[int, Fraction]:
    key = (members, fixed)
    if key not in cache:
        eligible = frozenset(members)
        probs: Dict[int, Fraction] = {}
        for order, weight in weighted_orders(members, fixed, rho):
            winner = selector(g, eligible, order)
            probs[winner] = probs.get(winner, Fraction(0)) + weight
        cache[key] = probs
    return cache[key]


def _add(target: Dict[int, Fraction], source: Dict[int, Fraction], weight: Fraction = Fraction(1)) -> None:
    for v, value in source.items():
        target[v] = target.get(v, Fraction(0)) + weight * value


def _exact_probs(spec: MechanismSpec, g: NominationGraph, p: Prediction,
                 selector: Selector) -> Dict[int, Fraction]:
    kind = spec.kind
    everyone = tuple(g.vertices)
    everyone_set = frozenset(everyone)
    probs: Dict[int, Fraction] = {}
    cache: Dict[tuple, Dict[int, Fraction]] = {}

    if kind is MechanismKind.RHO_PERMUTATION:
        return dict(_set_distribution(g, everyone, p.vertices[0], spec.rho, selector, cache))

    if kind is MechanismKind.UNIFORM_PERMUTATION:
        return dict(_set_distribution(g, everyone, None, None, selector, cache))

    if kind is MechanismKind.RANDOMIZED_BIDIRECTIONAL:
        for order, weight in weighted_orders(everyone, None, None):
            chosen = {selector(g, everyone_set, order), selector(g, everyone_set, order[::-1])}
            _add(probs, {v: Fraction(1) for v in chosen}, weight)
        return probs

    if kind in (MechanismKind.FIXED_BIDIRECTIONAL, MechanismKind.DET_K):
        forward, backward = bidirectional_orders(g, (p.vertices[-2], p.vertices[-1]))
        prefix = frozenset(p.vertices[:-2])
        chosen = prefix | bidirectional_winners(g, everyone_set - prefix, forward, backward, selector)
        return {v: Fraction(1) for v in chosen}

    if kind is MechanismKind.TRIVIAL_PREDICTED:
        return {v: Fraction(1) for v in p.vertices}

    if kind is MechanismKind.RHO_PARTITION:
        k = p.k
        predicted = p.as_set()
        free = [v for v in everyone if v not in predicted]
        weight = Fraction(1, k ** len(free))
        for assignment in itertools.product(range(k), repeat=len(free)):
            for j, anchor in enumerate(p.vertices):
                members = tuple(sorted([anchor] + [v for v, a in zip(free, assignment) if a == j]))
                _add(probs, _set_distribution(g, members, anchor, spec.rho, selector, cache), weight)
        return probs

    if kind is MechanismKind.K_PARTITION_BASELINE:
        k = spec.k
        weight = Fraction(1, k ** len(everyone))
        for assignment in itertools.product(range(k), repeat=len(everyone)):
            for j in range(k):
                members = tuple(v for v, a in zip(everyone, assignment) if a == j)
                if members:
                    _add(probs, _set_distribution(g, members, None, None, selector, cache), weight)
        return probs

    # Lottery
    _add(probs, _exact_probs(spec.a, g, p, selector), spec.mix_weight)
    _add(probs, _exact_probs(spec.b, g, p, selector), 1 - spec.mix_weight)
    return probs


def exact_distribution(spec: MechanismSpec, g: NominationGraph, p: Prediction,
                       selector: Selector = select_from_order) -> ExactDistribution:
    """Exact f_i for every vertex, by total enumeration of the mechanism's randomness"""
    check_compatible(spec, g, p)
    _check_budget(spec, g, _limits())
    probs = _exact_probs(spec, g, p, selector)
    full = {v: probs.get(v, Fraction(0)) for v in g.vertices}
    logger.debug("exact distribution of %s on n=%d: %s", spec.label(), g.n, full)
    return ExactDistribution(full, spec.k)


def expected_indegree(d: ExactDistribution, g: NominationGraph) -> Fraction:
    return sum((d[v] * indegree(g, v) for v in g.vertices), Fraction(0))


def impartiality_audit(spec: MechanismSpec, g: NominationGraph, p: Prediction, i: int,
                       plurality_mode: bool = False,
                       selector: Selector = select_from_order) -> bool:
    """True iff f_i is unchanged over every choice of i's outgoing edges"""
    g.check_vertex(i)
    limit = _limits().max_n_audit
    if g.n > limit:
        raise InfeasibleEnumerationError(f"impartiality audit on n={g.n} exceeds the budget n <= {limit}.")

    others = [v for v in g.vertices if v != i]
    if plurality_mode:
        variants = [(t,) for t in others]
    else:
        variants = [c for size in range(len(others) + 1) for c in itertools.combinations(others, size)]

    seen = {exact_distribution(spec, g.with_out_edges(i, targets), p, selector)[i] for targets in variants}
    if len(seen) > 1:
        logger.info("impartiality violated for vertex %d under %s: %s", i, spec.label(), sorted(seen))
    return len(seen) == 1


def _invariant_relabelings(n: int, predicted: Sequence[int]) -> List[List[int]]:
    """All vertex permutations mapping the predicted set onto itself"""
    inside = sorted(predicted)
    outside = [v for v in range(n) if v not in set(predicted)]
    mappings = []
    for image_in in itertools.permutations(inside):
        for image_out in itertools.permutations(outside):
            mapping = [0] * n
            for v, w in zip(inside, image_in):
                mapping[v] = w
            for v, w in zip(outside, image_out):
                mapping[v] = w
            mappings.append(mapping)
    return mappings


def symmetrize(spec: MechanismSpec, g: NominationGraph, p: Prediction,
               selector: Selector = select_from_order) -> ExactDistribution:
    """Average of the distributions over all prediction-preserving relabelings"""
    limit = _limits().max_n_symmetrize
    if g.n > limit:
        raise InfeasibleEnumerationError(f"symmetrization on n={g.n} exceeds the budget n <= {limit}.")
    check_compatible(spec, g, p)

    mappings = _invariant_relabelings(g.n, p.vertices)
    totals = {v: Fraction(0) for v in g.vertices}
    for mapping in mappings:
        relabeled = exact_distribution(spec, g.relabel(mapping), p, selector)
        for v in g.vertices:
            totals[v] += relabeled[mapping[v]]
    return ExactDistribution({v: total / len(mappings) for v, total in totals.items()}, spec.k)


def _left_indegree_table(g: NominationGraph, predicted: int) -> List[Tuple[int, ...]]:
    """Indegree from the left of every vertex, for every order with predicted last"""
    others = [v for v in g.vertices if v != predicted]
    table = []
    for arrangement in itertools.permutations(others):
        position = {v: idx for idx, v in enumerate(arrangement + (predicted,))}
        table.append(tuple(sum(1 for u in g.in_neighbors(v) if position[u] < position[v])
                           for v in g.vertices))
    return table


def _conditional_pair(table: List[Tuple[int, ...]], i: int, r: int, s: int) -> Tuple[Fraction, Fraction]:
    def conditional(level: int) -> Fraction:
        rows = [row for row in table if row[i] == level]
        if not rows:
            return Fraction(0)
        hits = sum(1 for row in rows if any(value >= r for j, value in enumerate(row) if j != i))
        return Fraction(hits, len(rows))

    return conditional(s), conditional(r)


def admissible_levels(g: NominationGraph, predicted: int, i: int) -> int:
    """Largest admissible r, s: indegree of i not counting the predicted vertex's vote"""
    return indegree(g, i) - (1 if predicted in g.in_neighbors(i) else 0)


def correlation_probabilities(g: NominationGraph, predicted: int, i: int, r: int,
                              s: int) -> Tuple[Fraction, Fraction]:
    """(P[B_r | A_s], P[B_r | A_r]) with predicted last and the rest uniformly ordered.

    A_t: i has exactly t in-neighbours before it. B_r: some other vertex has at
    least r in-neighbours before it.
    """
    if not is_plurality(g):
        raise ValueError("correlation audit needs a plurality graph.")
    g.check_vertex(predicted)
    g.check_vertex(i)
    if i == predicted:
        raise ValueError("i must differ from the predicted vertex.")
    top = admissible_levels(g, predicted, i)
    if not 0 <= s < r <= top:
        raise ValueError(f"need 0 <= s < r <= {top}, got r={r}, s={s}.")
    return _conditional_pair(_left_indegree_table(g, predicted), i, r, s)


def correlation_audit(g: NominationGraph, predicted: int, i: int, r: int, s: int) -> bool:
    given_s, given_r = correlation_probabilities(g, predicted, i, r, s)
    return given_s >= given_r


def correlation_sweep(n: int) -> Tuple[int, List[Tuple[List[Tuple[int, int]], int, int, int, int]]]:
    """Check every plurality graph on n vertices and every admissible (predicted, i, r, s).

    Returns the number of checked cases and the failing ones.
    """
    checked, failures = 0, []
    for g in all_plurality_graphs(n):
        for predicted in g.vertices:
            table = _left_indegree_table(g, predicted)
            for i in g.vertices:
                if i == predicted:
                    continue
                top = admissible_levels(g, predicted, i)
                for r in range(1, top + 1):
                    for s in range(r):
                        checked += 1
                        given_s, given_r = _conditional_pair(table, i, r, s)
                        if given_s < given_r:
                            failures.append((g.sorted_edges(), predicted, i, r, s))
    logger.info("correlation sweep n=%d: %d cases, %d failures", n, checked, len(failures))
    return checked, failures


def _linked(g_a: NominationGraph, v_a: int, g_b: NominationGraph, v_b: int,
            mappings: List[List[int]]) -> bool:
    """Whether one relabeling plus a change of v_b's own edges turns g_a into g_b"""
    target = {e for e in g_b.edges if e[0] != v_b}
    for mapping in mappings:
        if mapping[v_a] != v_b:
            continue
        moved = {(mapping[u], mapping[w]) for u, w in g_a.edges if u != v_a}
        if moved == target:
            return True
    return False


def bound_audit(setting: BoundSetting, spec: MechanismSpec, n: Optional[int] = None,
                selector: Selector = select_from_order) -> BoundAuditReport:
    """Check a mechanism's symmetrized distributions against the worst-case family constraints"""
    setting = BoundSetting(setting)
    k = SETTING_K[setting]
    if spec.k != k:
        raise ValueError(f"{setting.value} is a {k}-selection setting; {spec.label()} selects {spec.k}.")

    family = SETTING_FAMILY[setting]
    instances = gen_figure_family(InstanceFamily(family, n))
    labels = figure_labels(family)
    distributions = [symmetrize(spec, g, p, selector) for g, p in instances]

    audits = []
    for index, ((g, p), dist) in enumerate(zip(instances, distributions)):
        delta_k, _ = max_k_indegree(g, k)
        audits.append(InstanceAudit(index=index, delta_k=delta_k,
                                    expected=expected_indegree(dist, g),
                                    accurate=set_indegree(g, p.vertices) == delta_k,
                                    probs=dist.probs))
    alpha_hat = min(a.ratio for a in audits if a.accurate)
    beta_hat = min(a.ratio for a in audits)

    occurrences: Dict[str, List[Tuple[int, int]]] = {}
    for index, vertex_labels in enumerate(labels):
        for vertex, label in sorted(vertex_labels.items()):
            occurrences.setdefault(label, []).append((index, vertex))

    mappings = _invariant_relabelings(instances[0][0].n, instances[0][1].vertices)
    linkage: List[LinkageCheck] = []
    connected: Dict[str, bool] = {}
    for label, spots in occurrences.items():
        parent = list(range(len(spots)))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in itertools.combinations(range(len(spots)), 2):
            (ga, va), (gb, vb) = spots[a], spots[b]
            if _linked(instances[ga][0], va, instances[gb][0], vb, mappings):
                linkage.append(LinkageCheck(label, spots[a], spots[b],
                                            distributions[ga][va], distributions[gb][vb]))
                parent[find(a)] = find(b)
        connected[label] = len({find(x) for x in range(len(spots))}) == 1

    variables = {label: distributions[spots[0][0]][spots[0][1]] for label, spots in occurrences.items()}

    checks = []
    for constraint in figure_constraints(setting):
        values = {"alpha": alpha_hat, "beta": beta_hat}
        index = constraint.graph_index
        for vertex, label in labels[index].items():
            values[label] = distributions[index][vertex]
        lhs = constraint.lhs(values)
        checks.append(ConstraintCheck(constraint.describe(), lhs, constraint.rhs,
                                      lhs <= constraint.rhs, index))

    region = []
    for constraint in upper_bound_region(setting).constraints:
        lhs = constraint.lhs({"alpha": alpha_hat, "beta": beta_hat})
        region.append(ConstraintCheck(constraint.describe(), lhs, constraint.rhs, lhs <= constraint.rhs))

    report = BoundAuditReport(setting=setting, spec_label=spec.label(), instances=audits,
                              variables=variables, linkage=linkage, connected=connected,
                              constraints=checks, region=region,
                              alpha_hat=alpha_hat, beta_hat=beta_hat)
    logger.info("bound audit %s for %s: %s (alpha=%s, beta=%s)", setting.value, spec.label(),
                "pass" if report.passed else "FAIL", alpha_hat, beta_hat)
    return report
