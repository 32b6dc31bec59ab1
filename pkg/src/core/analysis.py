"""Closed-form (alpha, beta) guarantees, the partition-probability identities and upper-bound regions."""
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Tuple, Union

from src.data.models import (
    BoundRegion,
    BoundSetting,
    GuaranteeKind,
    GuaranteePair,
    LinearConstraint,
    Rational,
    rational_param,
)

_ALPHA_BETA = ("alpha", "beta")


def one_permutation_plurality_beta(delta: int) -> Fraction:
    """Robustness of the 1-permutation mechanism on plurality graphs of max indegree delta"""
    _check_delta(delta)
    if delta % 2 == 0:
        return Fraction(3 * delta - 2, 4 * delta)
    return Fraction(3 * delta * delta - 2 * delta - 1, 4 * delta * delta)


def uniform_permutation_plurality_beta(delta: int) -> Fraction:
    """Guarantee of the uniform permutation mechanism on plurality graphs of max indegree delta"""
    _check_delta(delta)
    if delta % 2 == 0:
        return Fraction(3 * delta + 2, 4 * (delta + 1))
    return Fraction(3 * delta - 1, 4 * delta)


def _check_delta(delta: int) -> None:
    if not isinstance(delta, int) or delta < 2:
        raise ValueError(f"delta must be an integer >= 2, got {delta!r}.")


def _check_k(k: Optional[int], minimum: int = 1) -> int:
    if k is None:
        raise ValueError("k is required for this guarantee.")
    if not isinstance(k, int) or k < minimum:
        raise ValueError(f"k must be an integer >= {minimum}, got {k!r}.")
    return k


def _check_rho(rho: Optional[Rational], lower: Fraction = Fraction(0)) -> Fraction:
    if rho is None:
        raise ValueError("rho is required for this guarantee.")
    rho = rational_param(rho, "rho")
    if rho < lower:
        raise ValueError(f"rho must be in [{lower}, 1] for this guarantee, got {rho}.")
    return rho


def partition_miss_term(k: int) -> Fraction:
    """1 - ((k-1)/k)^k"""
    return 1 - Fraction(k - 1, k) ** k


def guarantee_pair(kind: Union[GuaranteeKind, str], rho: Optional[Rational] = None,
                   k: Optional[int] = None, delta: Optional[int] = None) -> GuaranteePair:
    """Exact (alpha, beta) of a mechanism family.

    Delta-parameterized kinds default to delta=2, their worst case.
    """
    kind = GuaranteeKind(kind)
    source: Dict[str, object] = {"kind": kind.value}
    half = Fraction(1, 2)

    if kind is GuaranteeKind.RHO_PERMUTATION:
        rho = _check_rho(rho, half)
        alpha, beta = rho, 1 - rho
    elif kind is GuaranteeKind.UNIFORM_PERMUTATION:
        alpha, beta = half, half
    elif kind in (GuaranteeKind.ONE_PERMUTATION_PLURALITY, GuaranteeKind.UNIFORM_PERMUTATION_PLURALITY,
                  GuaranteeKind.PLURALITY_MIXTURE):
        delta = 2 if delta is None else delta
        source["delta"] = delta
        last_fixed = one_permutation_plurality_beta(delta)
        uniform = uniform_permutation_plurality_beta(delta)
        if kind is GuaranteeKind.ONE_PERMUTATION_PLURALITY:
            alpha, beta = Fraction(1), last_fixed
        elif kind is GuaranteeKind.UNIFORM_PERMUTATION_PLURALITY:
            alpha, beta = uniform, uniform
        else:
            rho = _check_rho(rho)
            alpha = rho + (1 - rho) * uniform
            beta = rho * last_fixed + (1 - rho) * uniform
    elif kind is GuaranteeKind.FIXED_BIDIRECTIONAL:
        alpha, beta = Fraction(1), half
    elif kind is GuaranteeKind.RANDOMIZED_K2_MIXTURE:
        rho = _check_rho(rho)
        alpha = Fraction(2, 3) + rho / 3
        beta = Fraction(2, 3) - rho / 6
    elif kind is GuaranteeKind.DET_K:
        k = _check_k(k, 2)
        alpha, beta = Fraction(1), Fraction(1, k)
    elif kind is GuaranteeKind.RHO_PARTITION:
        k = _check_k(k)
        rho = _check_rho(rho, half)
        alpha = 1 - (1 - rho) / k
        beta = (1 - 2 * rho / (k + 1)) * partition_miss_term(k)
    elif kind is GuaranteeKind.K_PARTITION_BASELINE:
        k = _check_k(k)
        value = Fraction(k, k + 1) * (1 - Fraction(k - 1, k) ** (k + 1))
        alpha, beta = value, value
    else:
        k = _check_k(k)
        alpha, beta = Fraction(1), Fraction(0)

    if rho is not None:
        source["rho"] = rational_param(rho, "rho")
    if k is not None:
        source["k"] = k
    return GuaranteePair(alpha, beta, source)


def guarantee_setting(kind: Union[GuaranteeKind, str], k: Optional[int] = None) -> Optional[BoundSetting]:
    """Upper-bound setting a guarantee is measured against, if one exists"""
    kind = GuaranteeKind(kind)
    if kind in (GuaranteeKind.RHO_PERMUTATION, GuaranteeKind.UNIFORM_PERMUTATION):
        return BoundSetting.SEL1
    if kind in (GuaranteeKind.ONE_PERMUTATION_PLURALITY, GuaranteeKind.UNIFORM_PERMUTATION_PLURALITY,
                GuaranteeKind.PLURALITY_MIXTURE):
        return BoundSetting.SEL1_PLURALITY
    if kind in (GuaranteeKind.FIXED_BIDIRECTIONAL, GuaranteeKind.RANDOMIZED_K2_MIXTURE):
        return BoundSetting.SEL2
    return {1: BoundSetting.SEL1, 2: BoundSetting.SEL2, 3: BoundSetting.SEL3}.get(k)


def smoothness(alpha: Rational, beta: Rational, eta: Rational) -> Fraction:
    """Guarantee under prediction error eta: max(alpha * (1 - eta), beta)"""
    alpha = rational_param(alpha, "alpha")
    beta = rational_param(beta, "beta")
    eta = rational_param(eta, "eta")
    return max(alpha * (1 - eta), beta)


def _check_claim_range(k: int, p: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}.")
    if not isinstance(p, int) or not 0 <= p <= k - 1:
        raise ValueError(f"p must be in [0, {k - 1}], got {p!r}.")


def claim3_closed(k: int, p: int) -> Fraction:
    """Probability that the best vertex of a set is the one kept, closed form"""
    _check_claim_range(k, p)
    ratio = Fraction(k - 1, k)
    numerator = k * (k - 2 * p + 1) - (k * k + k - 3 * p * k + p * p) * ratio ** (k - p)
    return numerator / ((k - p + 1) * (k - p))


def claim3_direct(k: int, p: int) -> Fraction:
    """Same probability as claim3_closed, as two binomial-weighted sums"""
    _check_claim_range(k, p)
    m = k - p - 1
    hit, miss = Fraction(1, k), Fraction(k - 1, k)
    with_predicted = Fraction(0)
    without_predicted = Fraction(0)
    for ell in range(m + 1):
        weight = comb(m, ell) * hit ** ell * miss ** (m - ell)
        with_predicted += weight / (ell + 2)
        without_predicted += weight / (ell + 1)
    return Fraction(p, k) * with_predicted + Fraction(k - p, k) * without_predicted


def g_value(k: int, p: int) -> Fraction:
    return claim3_closed(k, p)


def g_monotone_check(k: int) -> bool:
    """True iff g(k, p) is non-increasing in p"""
    values = [g_value(k, p) for p in range(k)]
    return all(a >= b for a, b in zip(values, values[1:]))


def _ab(c_alpha: int, c_beta: int, rhs: Rational) -> LinearConstraint:
    terms = {name: c for name, c in zip(_ALPHA_BETA, (c_alpha, c_beta)) if c}
    return LinearConstraint(terms, rhs)


_REGIONS: Dict[BoundSetting, List[Tuple[int, int, Rational]]] = {
    BoundSetting.SEL1: [(0, 1, Fraction(1, 2)), (1, 1, 1)],
    BoundSetting.SEL1_PLURALITY: [(0, 1, Fraction(3, 4)), (1, 1, Fraction(3, 2))],
    BoundSetting.SEL2: [(0, 1, Fraction(3, 4)), (1, 1, Fraction(3, 2))],
    BoundSetting.SEL3: [(0, 1, Fraction(4, 5)), (4, 3, 6), (4, 21, 20)],
}


def upper_bound_region(setting: Union[BoundSetting, str]) -> BoundRegion:
    setting = BoundSetting(setting)
    return BoundRegion(setting, [_ab(a, b, rhs) for a, b, rhs in _REGIONS[setting]])


def region_contains(region: BoundRegion, alpha: Fraction, beta: Fraction) -> bool:
    values = {"alpha": alpha, "beta": beta}
    return all(constraint.holds(values) for constraint in region.constraints)


# (instance index, terms, rhs) as written under each worst-case instance
_FIGURE_CONSTRAINTS: Dict[BoundSetting, List[Tuple[int, Dict[str, int], int]]] = {
    BoundSetting.SEL1: [
        (0, {"alpha": 1, "p1": -1}, 0),
        (0, {"beta": 1, "p1": -1}, 0),
        (1, {"beta": 1, "p2": -1}, 0),
        (2, {"p1": 1, "p2": 1}, 1),
    ],
    BoundSetting.SEL1_PLURALITY: [
        (0, {"p1": 1, "p2": 1}, 1),
        (1, {"p1": 1, "p3": 1, "p4": 1}, 1),
        (1, {"alpha": 2, "p1": -2, "p3": -1, "p4": -1}, 0),
        (1, {"beta": 2, "p1": -2, "p3": -1, "p4": -1}, 0),
        (2, {"p2": 1, "p5": 1, "p6": 1}, 1),
        (2, {"beta": 2, "p2": -2, "p5": -1, "p6": -1}, 0),
    ],
    BoundSetting.SEL2: [
        (0, {"alpha": 2, "p1": -2}, 0),
        (0, {"beta": 2, "p1": -2}, 0),
        (1, {"beta": 2, "p2": -1, "p3": -1}, 0),
        (2, {"p2": 2, "p4": 1}, 2),
        (3, {"p1": 1, "p3": 1, "p5": 1}, 2),
        (4, {"alpha": 4, "p4": -2, "p5": -4}, 0),
        (4, {"beta": 4, "p4": -2, "p5": -4}, 0),
    ],
    BoundSetting.SEL3: [
        (0, {"alpha": 3, "p1": -3}, 0),
        (1, {"alpha": 3, "p2": -3, "p3": -1}, 0),
        (1, {"beta": 3, "p2": -3, "p3": -1}, 0),
        (2, {"beta": 3, "p4": -2, "p5": -2}, 0),
        (3, {"p1": 1, "p5": 1, "p6": 2, "p7": 1}, 3),
        (3, {"alpha": 5, "p1": -1, "p5": -1, "p6": -4, "p7": -1}, 0),
        (4, {"p3": 2, "p8": 3}, 3),
        (4, {"alpha": 6, "p3": -2, "p8": -6}, 0),
        (4, {"beta": 6, "p3": -2, "p8": -6}, 0),
        (5, {"p2": 1, "p5": 1, "p9": 2, "p10": 1}, 3),
        (5, {"beta": 6, "p2": -1, "p5": -1, "p9": -4, "p10": -2}, 0),
        (6, {"p4": 2, "p11": 1, "p12": 2}, 3),
        (6, {"beta": 6, "p4": -2, "p11": -2, "p12": -4}, 0),
    ],
}


def figure_constraints(setting: Union[BoundSetting, str]) -> List[LinearConstraint]:
    """Linear inequalities over alpha, beta and the figure's probability variables"""
    setting = BoundSetting(setting)
    return [LinearConstraint(terms, rhs, graph_index=index)
            for index, terms, rhs in _FIGURE_CONSTRAINTS[setting]]
