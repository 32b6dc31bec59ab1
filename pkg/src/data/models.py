from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

Edge = Tuple[int, int]
Rational = Union[Fraction, int, str]

# Verification scope stated in every report
VERIFICATION_NOTE = ("Robustness statements are worst-case over all graphs; exact verification "
                     "here is exhaustive up to n <= 5 and property-based (lower bounds never "
                     "violated beyond noise) on larger instances.")


def rational_param(value: Rational, name: str) -> Fraction:
    """Exact rational in [0,1] from a Fraction, an int or a "p/q" string"""
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"{name} must be given as an exact rational, not {value!r}.")
    try:
        result = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValueError(f"{name} must be a rational such as '2/3', got {value!r}.")
    if not 0 <= result <= 1:
        raise ValueError(f"{name} must be in [0, 1], got {result}.")
    return result


def format_rational(value: Fraction) -> str:
    """Render as "p/q" (or "p" for integers)"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class FigureFamily(Enum):
    FIG3_1SEL = "fig3"
    FIG4_PLURALITY = "fig4"
    FIG5_2SEL = "fig5"
    FIG6_3SEL = "fig6"


class BoundSetting(Enum):
    SEL1 = "sel1"
    SEL1_PLURALITY = "sel1-plurality"
    SEL2 = "sel2"
    SEL3 = "sel3"


class MechanismKind(Enum):
    RHO_PERMUTATION = "rho-permutation"
    UNIFORM_PERMUTATION = "uniform-permutation"
    FIXED_BIDIRECTIONAL = "fixed-bidirectional"
    RANDOMIZED_BIDIRECTIONAL = "randomized-bidirectional"
    DET_K = "det-k"
    RHO_PARTITION = "rho-partition"
    K_PARTITION_BASELINE = "k-partition"
    TRIVIAL_PREDICTED = "trivial-predicted"
    LOTTERY = "lottery"


class GuaranteeKind(Enum):
    RHO_PERMUTATION = "rho-permutation"
    UNIFORM_PERMUTATION = "uniform-permutation"
    ONE_PERMUTATION_PLURALITY = "one-permutation-plurality"
    UNIFORM_PERMUTATION_PLURALITY = "uniform-permutation-plurality"
    PLURALITY_MIXTURE = "plurality-mixture"
    FIXED_BIDIRECTIONAL = "fixed-bidirectional"
    RANDOMIZED_K2_MIXTURE = "randomized-k2-mixture"
    DET_K = "det-k"
    RHO_PARTITION = "rho-partition"
    K_PARTITION_BASELINE = "k-partition"
    TRIVIAL_PREDICTED = "trivial-predicted"


@dataclass
class NominationGraph:
    """Directed simple graph on vertices 0..n-1; (u, v) means u nominates v"""
    _n: int
    _edges: FrozenSet[Edge]

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValueError("n must be a positive integer.")
        edge_set = set()
        for edge in edges:
            if len(edge) != 2:
                raise ValueError(f"edge {edge!r} must be a (source, target) pair.")
            u, v = int(edge[0]), int(edge[1])
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {n}).")
            if u == v:
                raise ValueError(f"self-loop ({u}, {u}) is not allowed.")
            edge_set.add((u, v))
        self._n = n
        self._edges = frozenset(edge_set)

        in_sets: List[set] = [set() for _ in range(n)]
        out_sets: List[set] = [set() for _ in range(n)]
        for u, v in self._edges:
            out_sets[u].add(v)
            in_sets[v].add(u)
        self._in = tuple(frozenset(s) for s in in_sets)
        self._out = tuple(frozenset(s) for s in out_sets)

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    @property
    def n(self) -> int:
        """Read-only access to the vertex count"""
        return self._n

    @property
    def edges(self) -> FrozenSet[Edge]:
        """Read-only access to the edge set"""
        return self._edges

    @property
    def vertices(self) -> range:
        return range(self._n)

    def check_vertex(self, i: int) -> int:
        if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < self._n:
            raise ValueError(f"vertex {i!r} is outside [0, {self._n}).")
        return i

    def in_neighbors(self, i: int) -> FrozenSet[int]:
        return self._in[self.check_vertex(i)]

    def out_neighbors(self, i: int) -> FrozenSet[int]:
        return self._out[self.check_vertex(i)]

    def sorted_edges(self) -> List[Edge]:
        return sorted(self._edges)

    def with_out_edges(self, i: int, targets: Iterable[int]) -> 'NominationGraph':
        """Copy of the graph where i's outgoing edges are exactly i -> targets"""
        self.check_vertex(i)
        kept = [e for e in self._edges if e[0] != i]
        return NominationGraph(self._n, kept + [(i, t) for t in targets])

    def relabel(self, mapping: Sequence[int]) -> 'NominationGraph':
        """Graph with every edge (u, v) moved to (mapping[u], mapping[v])"""
        if sorted(mapping) != list(range(self._n)):
            raise ValueError("mapping must be a permutation of the vertices.")
        return NominationGraph(self._n, [(mapping[u], mapping[v]) for u, v in self._edges])


@dataclass
class Prediction:
    """Ordered predicted set of k distinct vertices"""
    _vertices: Tuple[int, ...]

    def __init__(self, vertices: Iterable[int]):
        vertices = tuple(int(v) for v in vertices)
        # Prediction must not empty
        if not vertices:
            raise ValueError("prediction must contain at least one vertex.")
        if len(set(vertices)) != len(vertices):
            raise ValueError("predicted vertices must be distinct.")
        if min(vertices) < 0:
            raise ValueError("predicted vertices must be non-negative ids.")
        self._vertices = vertices

    @property
    def vertices(self) -> Tuple[int, ...]:
        """Read-only access to the predicted vertices in their given order"""
        return self._vertices

    @property
    def k(self) -> int:
        return len(self._vertices)

    def as_set(self) -> FrozenSet[int]:
        return frozenset(self._vertices)

    def validate_for(self, g: NominationGraph) -> 'Prediction':
        """Raise ValueError unless this prediction fits the graph"""
        if self.k > g.n:
            raise ValueError(f"prediction size {self.k} exceeds n={g.n}.")
        for v in self._vertices:
            g.check_vertex(v)
        return self


# Drawn vertex count per family
FAMILY_MIN_N = {
    FigureFamily.FIG3_1SEL: 2,
    FigureFamily.FIG4_PLURALITY: 4,
    FigureFamily.FIG5_2SEL: 3,
    FigureFamily.FIG6_3SEL: 5,
}


@dataclass
class InstanceFamily:
    _family: FigureFamily
    _n: int

    def __init__(self, family: Union[FigureFamily, str], n: Optional[int] = None):
        self._family = FigureFamily(family)
        minimum = FAMILY_MIN_N[self._family]
        if n is None:
            n = minimum
        if n < minimum:
            raise ValueError(f"n must be at least {minimum} for family {self._family.value}.")
        # Padding vertices have outdegree 0, which would break the plurality property
        if self._family is FigureFamily.FIG4_PLURALITY and n != minimum:
            raise ValueError("the plurality family has no isolated padding; n must be 4.")
        self._n = n

    @property
    def family(self) -> FigureFamily:
        return self._family

    @property
    def n(self) -> int:
        return self._n


@dataclass
class PriorityVector:
    """Priorities x in [0,1] for every vertex of an eligible set"""
    _values: Dict[int, Union[Fraction, float]]

    def __init__(self, values: Dict[int, Union[Fraction, float]]):
        for vertex, value in values.items():
            if not 0 <= value <= 1:
                raise ValueError(f"priority of vertex {vertex} must be in [0, 1], got {value}.")
        self._values = dict(values)

    @property
    def values(self) -> Dict[int, Union[Fraction, float]]:
        return dict(self._values)

    def keys(self) -> FrozenSet[int]:
        return frozenset(self._values)

    def __getitem__(self, vertex: int) -> Union[Fraction, float]:
        return self._values[vertex]

    def reversed(self) -> 'PriorityVector':
        """The mirrored vector 1 - x"""
        return PriorityVector({v: 1 - x for v, x in self._values.items()})


@dataclass
class PartitionAssignment:
    _set_of: Dict[int, int]
    _k: int

    def __init__(self, set_of: Dict[int, int], k: int, n: int):
        if k < 1:
            raise ValueError("k must be a positive integer.")
        if set(set_of) != set(range(n)):
            raise ValueError("assignment must cover every vertex exactly once.")
        for vertex, index in set_of.items():
            if not 0 <= index < k:
                raise ValueError(f"set index of vertex {vertex} must be in [0, {k}).")
        self._set_of = dict(set_of)
        self._k = k

    @property
    def k(self) -> int:
        return self._k

    def set_of(self, vertex: int) -> int:
        return self._set_of[vertex]

    def members(self, index: int) -> List[int]:
        return sorted(v for v, j in self._set_of.items() if j == index)


# Kinds whose k is fixed by the mechanism
_FIXED_K = {
    MechanismKind.RHO_PERMUTATION: 1,
    MechanismKind.UNIFORM_PERMUTATION: 1,
    MechanismKind.FIXED_BIDIRECTIONAL: 2,
    MechanismKind.RANDOMIZED_BIDIRECTIONAL: 2,
}
RHO_KINDS = frozenset({MechanismKind.RHO_PERMUTATION, MechanismKind.RHO_PARTITION})
DETERMINISTIC_KINDS = frozenset({MechanismKind.FIXED_BIDIRECTIONAL, MechanismKind.DET_K,
                                 MechanismKind.TRIVIAL_PREDICTED})


@dataclass
class MechanismSpec:
    _kind: MechanismKind
    _k: int
    _rho: Optional[Fraction]
    _mix_weight: Optional[Fraction]
    _a: Optional['MechanismSpec']
    _b: Optional['MechanismSpec']

    def __init__(self,
                 kind: Union[MechanismKind, str],
                 k: Optional[int] = None,
                 rho: Optional[Rational] = None,
                 mix_weight: Optional[Rational] = None,
                 a: Optional['MechanismSpec'] = None,
                 b: Optional['MechanismSpec'] = None):
        try:
            self._kind = MechanismKind(kind)
        except ValueError:
            raise ValueError(f"unknown mechanism kind: {kind!r}.")

        # rho present iff the kind uses it
        if self._kind in RHO_KINDS:
            if rho is None:
                raise ValueError(f"rho is required for {self._kind.value}.")
            self._rho = rational_param(rho, "rho")
        elif rho is not None:
            raise ValueError(f"rho is not used by {self._kind.value}.")
        else:
            self._rho = None

        # Sub-specs present iff LOTTERY
        if self._kind is MechanismKind.LOTTERY:
            if a is None or b is None or mix_weight is None:
                raise ValueError("lottery needs mix_weight and both sub-specs.")
            if a.k != b.k:
                raise ValueError("lottery sub-specs must select the same k.")
            if k is not None and k != a.k:
                raise ValueError("lottery k must match its sub-specs.")
            self._mix_weight = rational_param(mix_weight, "mix_weight")
            self._a, self._b = a, b
            k = a.k
        elif a is not None or b is not None or mix_weight is not None:
            raise ValueError("mix_weight and sub-specs are only used by lottery.")
        else:
            self._mix_weight, self._a, self._b = None, None, None

        fixed_k = _FIXED_K.get(self._kind)
        if fixed_k is not None:
            if k is not None and k != fixed_k:
                raise ValueError(f"{self._kind.value} selects k={fixed_k}, got k={k}.")
            k = fixed_k
        if k is None:
            raise ValueError(f"k is required for {self._kind.value}.")
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ValueError("k must be a positive integer.")
        if self._kind is MechanismKind.DET_K and k < 2:
            raise ValueError("det-k needs k >= 2.")
        self._k = k

    @property
    def kind(self) -> MechanismKind:
        return self._kind

    @property
    def k(self) -> int:
        return self._k

    @property
    def rho(self) -> Optional[Fraction]:
        return self._rho

    @property
    def mix_weight(self) -> Optional[Fraction]:
        return self._mix_weight

    @property
    def a(self) -> Optional['MechanismSpec']:
        return self._a

    @property
    def b(self) -> Optional['MechanismSpec']:
        return self._b

    @property
    def is_deterministic(self) -> bool:
        if self._kind is MechanismKind.LOTTERY:
            if self._mix_weight in (0, 1):
                chosen = self._a if self._mix_weight == 1 else self._b
                return chosen.is_deterministic
            return False
        return self._kind in DETERMINISTIC_KINDS

    def label(self) -> str:
        """Short human-readable description used in reports"""
        if self._kind is MechanismKind.LOTTERY:
            return (f"lottery({format_rational(self._mix_weight)}: "
                    f"{self._a.label()} | {self._b.label()})")
        parts = [f"k={self._k}"]
        if self._rho is not None:
            parts.insert(0, f"rho={format_rational(self._rho)}")
        return f"{self._kind.value}({', '.join(parts)})"


@dataclass
class ExactDistribution:
    """Exact per-vertex selection probabilities f_i"""
    _probs: Dict[int, Fraction]
    _k: int

    def __init__(self, probs: Dict[int, Fraction], k: int = 1):
        for vertex, value in probs.items():
            if not 0 <= value <= 1:
                raise ValueError(f"probability of vertex {vertex} must be in [0, 1], got {value}.")
        total = sum(probs.values(), Fraction(0))
        if total > k:
            raise ValueError(f"probabilities sum to {total}, more than k={k}.")
        self._probs = {int(v): Fraction(p) for v, p in sorted(probs.items())}
        self._k = k

    @property
    def probs(self) -> Dict[int, Fraction]:
        return dict(self._probs)

    @property
    def k(self) -> int:
        return self._k

    def __getitem__(self, vertex: int) -> Fraction:
        return self._probs.get(vertex, Fraction(0))

    def total(self) -> Fraction:
        return sum(self._probs.values(), Fraction(0))


@dataclass
class GuaranteePair:
    _alpha: Fraction
    _beta: Fraction
    source: Dict[str, object] = field(default_factory=dict)

    def __init__(self, alpha: Fraction, beta: Fraction, source: Optional[Dict[str, object]] = None):
        if not 0 <= alpha <= 1:
            raise ValueError(f"alpha must be in [0, 1], got {alpha}.")
        if not 0 <= beta <= 1:
            raise ValueError(f"beta must be in [0, 1], got {beta}.")
        self._alpha = Fraction(alpha)
        self._beta = Fraction(beta)
        self.source = dict(source or {})

    @property
    def alpha(self) -> Fraction:
        """Consistency"""
        return self._alpha

    @property
    def beta(self) -> Fraction:
        """Robustness"""
        return self._beta


@dataclass
class LinearConstraint:
    """sum(coefficient * symbol) <= rhs over symbols such as alpha, beta, p1"""
    _coefficients: Dict[str, Fraction]
    _rhs: Fraction
    graph_index: Optional[int]

    def __init__(self, coefficients: Dict[str, Rational], rhs: Rational,
                 graph_index: Optional[int] = None):
        if not coefficients:
            raise ValueError("constraint must have at least one term.")
        self._coefficients = {name: Fraction(c) for name, c in coefficients.items()}
        self._rhs = Fraction(rhs)
        self.graph_index = graph_index

    @property
    def coefficients(self) -> Dict[str, Fraction]:
        return dict(self._coefficients)

    @property
    def rhs(self) -> Fraction:
        return self._rhs

    @property
    def symbols(self) -> List[str]:
        return list(self._coefficients)

    def lhs(self, values: Dict[str, Fraction]) -> Fraction:
        missing = [s for s in self._coefficients if s not in values]
        if missing:
            raise ValueError(f"no value for symbol(s) {', '.join(missing)}.")
        return sum((c * Fraction(values[s]) for s, c in self._coefficients.items()), Fraction(0))

    def holds(self, values: Dict[str, Fraction]) -> bool:
        return self.lhs(values) <= self._rhs

    def describe(self) -> str:
        text = ""
        for symbol, c in self._coefficients.items():
            magnitude = "" if abs(c) == 1 else format_rational(abs(c))
            if not text:
                text = f"{'-' if c < 0 else ''}{magnitude}{symbol}"
            else:
                text += f" {'-' if c < 0 else '+'} {magnitude}{symbol}"
        return f"{text} <= {format_rational(self._rhs)}"


@dataclass
class BoundRegion:
    _setting: BoundSetting
    _constraints: Tuple[LinearConstraint, ...]

    def __init__(self, setting: BoundSetting, constraints: Iterable[LinearConstraint]):
        constraints = tuple(constraints)
        if not constraints:
            raise ValueError("bound region must have at least one constraint.")
        self._setting = setting
        self._constraints = constraints

    @property
    def setting(self) -> BoundSetting:
        return self._setting

    @property
    def constraints(self) -> Tuple[LinearConstraint, ...]:
        return self._constraints


@dataclass
class ConstraintCheck:
    label: str
    lhs: Fraction
    rhs: Fraction
    passed: bool
    graph_index: Optional[int] = None


@dataclass
class LinkageCheck:
    """Equality f_u(G_a) = f_v(G_b) implied by one relabeling plus impartiality"""
    label: str
    first: Tuple[int, int]
    second: Tuple[int, int]
    first_value: Fraction
    second_value: Fraction

    @property
    def equal(self) -> bool:
        return self.first_value == self.second_value


@dataclass
class InstanceAudit:
    index: int
    delta_k: int
    expected: Fraction
    accurate: bool
    probs: Dict[int, Fraction]

    @property
    def ratio(self) -> Fraction:
        if self.delta_k == 0:
            return Fraction(1)
        return self.expected / self.delta_k


@dataclass
class BoundAuditReport:
    setting: BoundSetting
    spec_label: str
    instances: List[InstanceAudit]
    variables: Dict[str, Fraction]
    linkage: List[LinkageCheck]
    connected: Dict[str, bool]
    constraints: List[ConstraintCheck]
    region: List[ConstraintCheck]
    alpha_hat: Fraction
    beta_hat: Fraction

    @property
    def passed(self) -> bool:
        return (all(check.equal for check in self.linkage)
                and all(self.connected.values())
                and all(check.passed for check in self.constraints)
                and all(check.passed for check in self.region))


@dataclass
class TrialConfig:
    _spec: MechanismSpec
    _trials: int
    _seed: int
    source: str

    def __init__(self, spec: MechanismSpec, trials: int, seed: int, source: str = "inline"):
        # Trials must >= 1
        if not isinstance(trials, int) or trials < 1:
            raise ValueError("trials must be at least 1.")
        if not isinstance(seed, int) or seed < 0:
            raise ValueError("seed must be a non-negative integer.")
        self._spec = spec
        self._trials = trials
        self._seed = seed
        self.source = source

    @property
    def spec(self) -> MechanismSpec:
        return self._spec

    @property
    def trials(self) -> int:
        return self._trials

    @property
    def seed(self) -> int:
        return self._seed


@dataclass
class InstanceResult:
    instance_id: str
    n: int
    k: int
    delta_k: int
    pred_indegree: int
    eta: Fraction
    mean: float
    ci: float

    @property
    def accurate(self) -> bool:
        return self.pred_indegree == self.delta_k

    @property
    def ratio(self) -> float:
        if self.delta_k == 0:
            return 1.0
        return self.mean / self.delta_k


@dataclass
class EvalReport:
    spec_label: str
    trials: int
    seed: int
    rows: List[InstanceResult]
    note: str = VERIFICATION_NOTE

    @property
    def alpha_hat(self) -> Optional[float]:
        """Minimum ratio over accurate-prediction instances"""
        accurate = [row.ratio for row in self.rows if row.accurate]
        return min(accurate) if accurate else None

    @property
    def beta_hat(self) -> float:
        """Minimum ratio over all instances"""
        return min(row.ratio for row in self.rows)


@dataclass
class CurveRow:
    kind: GuaranteeKind
    k: int
    rho: Fraction
    alpha: Fraction
    beta: Fraction
