"""Formula data model: prefixes with dependency sets, matrices, Skolem sets.

A formula is a quantifier prefix over densely numbered variables 1..N plus
a matrix.  Random variables carry a probability (Boolean) or a full
distribution (finite domain).  Existential variables carry an explicit
dependency set over random/universal variables; there is no implicit
linear order.  Universal variables make a formula "extended".

Matrices come in two shapes: CNF over Boolean variables (clauses of
signed DIMACS literals) and conjunctions of implications over equality
atoms for the finite-domain layer.  Truth constants are explicit: an
empty clause list is not silently "true" -- use Matrix.top().  The false
constant normalizes to a CNF holding one empty clause, so it survives
serialization unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadProbability,
    DanglingVariable,
    DuplicateQuantifier,
    IllegalDependency,
    InvalidFormula,
    OutOfRange,
    PartialAssignment,
    SkolemMismatch,
)

RANDOM = "random"
UNIVERSAL = "universal"
EXISTS = "exists"

PROB_TOL = 1e-12

Clause = tuple[int, ...]
Atom = tuple[int, int]  # (variable id, domain value)
Assignment = Mapping[int, int]


@dataclass(frozen=True)
class Variable:
    """One prefix entry.

    ``domain`` is None for Boolean variables and the domain size K for
    finite-domain ones.  Boolean randoms store Pr[x = true] in ``prob``;
    finite-domain randoms store a length-K distribution in ``dist``.
    ``deps`` is meaningful for existentials only and is kept in prefix
    order (established by build_formula).
    """

    vid: int
    kind: str
    prob: float | None = None
    dist: tuple[float, ...] | None = None
    domain: int | None = None
    deps: tuple[int, ...] = ()

    @property
    def boolean(self) -> bool:
        return self.domain is None

    @property
    def values(self) -> int:
        """Number of domain values (2 for Boolean)."""
        return 2 if self.domain is None else self.domain

    def value_prob(self, value: int) -> float:
        if self.kind != RANDOM:
            raise InvalidFormula(f"variable {self.vid} is not random")
        if self.dist is not None:
            return self.dist[value]
        assert self.prob is not None
        return self.prob if value == 1 else 1.0 - self.prob


def random_var(vid: int, prob: float) -> Variable:
    return Variable(vid, RANDOM, prob=float(prob))


def universal_var(vid: int) -> Variable:
    return Variable(vid, UNIVERSAL)


def exist_var(vid: int, deps: Sequence[int] = ()) -> Variable:
    return Variable(vid, EXISTS, deps=tuple(deps))


def finite_random_var(vid: int, dist: Sequence[float]) -> Variable:
    dist = tuple(float(p) for p in dist)
    return Variable(vid, RANDOM, dist=dist, domain=len(dist))


def finite_exist_var(vid: int, domain: int, deps: Sequence[int] = ()) -> Variable:
    return Variable(vid, EXISTS, domain=int(domain), deps=tuple(deps))


@dataclass(frozen=True)
class Implication:
    """Conjunction of equality atoms implying one equality atom."""

    antecedent: tuple[Atom, ...]
    consequent: Atom


@dataclass(frozen=True)
class Matrix:
    kind: str  # "top" | "cnf" | "implications"
    clauses: tuple[Clause, ...] = ()
    implications: tuple[Implication, ...] = ()

    @staticmethod
    def top() -> "Matrix":
        return Matrix("top")

    @staticmethod
    def bottom() -> "Matrix":
        # Normalized to a CNF with a single empty clause so the constant
        # round-trips through the file format byte for byte.
        return Matrix("cnf", clauses=((),))

    @staticmethod
    def cnf(clauses: Iterable[Iterable[int]]) -> "Matrix":
        cls = tuple(tuple(int(l) for l in c) for c in clauses)
        if not cls:
            raise InvalidFormula("empty clause list; use Matrix.top() for the true constant")
        return Matrix("cnf", clauses=cls)

    @staticmethod
    def implied(implications: Iterable[Implication]) -> "Matrix":
        imps = tuple(implications)
        if not imps:
            raise InvalidFormula("empty implication list; use Matrix.top() for the true constant")
        return Matrix("implications", implications=imps)

    def variables(self) -> set[int]:
        out: set[int] = set()
        if self.kind == "cnf":
            for cl in self.clauses:
                out.update(abs(l) for l in cl)
        elif self.kind == "implications":
            for imp in self.implications:
                out.update(v for v, _ in imp.antecedent)
                out.add(imp.consequent[0])
        return out


@dataclass(frozen=True)
class DssatFormula:
    prefix: tuple[Variable, ...]
    matrix: Matrix
    _by_id: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {v.vid: v for v in self.prefix})

    def var(self, vid: int) -> Variable:
        return self._by_id[vid]

    @property
    def randoms(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.prefix if v.kind == RANDOM)

    @property
    def universals(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.prefix if v.kind == UNIVERSAL)

    @property
    def existentials(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.prefix if v.kind == EXISTS)

    @property
    def extended(self) -> bool:
        """True when universal variables are present."""
        return any(v.kind == UNIVERSAL for v in self.prefix)

    @property
    def boolean(self) -> bool:
        return all(v.boolean for v in self.prefix)


def build_formula(prefix: Sequence[Variable], matrix: Matrix) -> DssatFormula:
    """Validate declarations and return an immutable formula.

    Checks: dense ids 1..N, no duplicate quantification, probabilities and
    distributions well formed, dependency sets over earlier-declared
    random/universal variables only, matrix references confined to the
    prefix, CNF literals confined to Boolean variables, equality atoms
    within domain bounds.  Dependency lists are normalized to prefix
    order, which makes the builder a fixpoint on its own output.
    """
    prefix = tuple(prefix)
    seen: set[int] = set()
    for v in prefix:
        if v.vid in seen:
            raise DuplicateQuantifier(f"variable {v.vid} quantified twice")
        seen.add(v.vid)
    n = len(prefix)
    if seen != set(range(1, n + 1)):
        raise InvalidFormula(f"variable ids must be exactly 1..{n}")

    position = {v.vid: i for i, v in enumerate(prefix)}
    normalized: list[Variable] = []
    for v in prefix:
        if v.kind == RANDOM:
            if v.dist is not None:
                if v.domain != len(v.dist) or v.domain < 1:
                    raise InvalidFormula(f"variable {v.vid}: bad distribution length")
                if any(p < -PROB_TOL or p > 1 + PROB_TOL for p in v.dist):
                    raise BadProbability(f"variable {v.vid}: distribution entry outside [0, 1]")
                if abs(sum(v.dist) - 1.0) > 1e-9:
                    raise BadProbability(f"variable {v.vid}: distribution sums to {sum(v.dist)}")
            else:
                if v.prob is None:
                    raise InvalidFormula(f"variable {v.vid}: random without probability")
                if not 0.0 <= v.prob <= 1.0:
                    raise BadProbability(f"variable {v.vid}: probability {v.prob}")
            if v.deps:
                raise IllegalDependency(f"variable {v.vid}: deps on a random variable")
        elif v.kind == UNIVERSAL:
            if not v.boolean:
                raise InvalidFormula(f"variable {v.vid}: universal variables must be Boolean")
            if v.deps:
                raise IllegalDependency(f"variable {v.vid}: deps on a universal variable")
        elif v.kind == EXISTS:
            if v.domain is not None and v.domain < 1:
                raise InvalidFormula(f"variable {v.vid}: domain size {v.domain}")
            dep_set = set(v.deps)
            if len(dep_set) != len(v.deps):
                raise IllegalDependency(f"variable {v.vid}: duplicate dependency")
            for d in v.deps:
                if d not in position:
                    raise DanglingVariable(f"variable {v.vid}: dependency {d} not quantified")
                if prefix[position[d]].kind == EXISTS:
                    raise IllegalDependency(
                        f"variable {v.vid}: dependency {d} is existential")
                if d == v.vid:
                    raise IllegalDependency(f"variable {v.vid}: depends on itself")
            deps = tuple(sorted(v.deps, key=position.__getitem__))
            if deps != v.deps:
                v = Variable(v.vid, EXISTS, domain=v.domain, deps=deps)
        else:
            raise InvalidFormula(f"variable {v.vid}: unknown kind {v.kind!r}")
        normalized.append(v)

    by_id = {v.vid: v for v in normalized}
    for vid in matrix.variables():
        if vid not in by_id:
            raise DanglingVariable(f"matrix references unquantified variable {vid}")
    if matrix.kind == "cnf":
        for cl in matrix.clauses:
            for lit in cl:
                if lit == 0:
                    raise InvalidFormula("literal 0 inside a clause")
                if not by_id[abs(lit)].boolean:
                    raise InvalidFormula(f"CNF literal on finite-domain variable {abs(lit)}")
    elif matrix.kind == "implications":
        for imp in matrix.implications:
            for v, k in (*imp.antecedent, imp.consequent):
                if not 0 <= k < by_id[v].values:
                    raise OutOfRange(f"atom ({v} = {k}) outside domain of size {by_id[v].values}")

    return DssatFormula(tuple(normalized), matrix)


# --------------------------------------------------------------- semantics

def weight(formula: DssatFormula, assignment: Assignment) -> float:
    """Probability mass of one assignment to the random variables.

    Product of p or 1-p per Boolean random variable, or of the selected
    distribution entries for finite-domain ones.  Existential/universal
    values present in the assignment are ignored.
    """
    w = 1.0
    for v in formula.prefix:
        if v.kind != RANDOM:
            continue
        if v.vid not in assignment:
            raise PartialAssignment(f"random variable {v.vid} unassigned")
        value = assignment[v.vid]
        if not 0 <= value < v.values:
            raise OutOfRange(f"variable {v.vid}: value {value}")
        w *= v.value_prob(value)
    return w


def eval_matrix(formula: DssatFormula, assignment: Assignment) -> bool:
    """Truth of the matrix under a total assignment of its support."""
    m = formula.matrix
    if m.kind == "top":
        return True
    for vid in m.variables():
        if vid not in assignment:
            raise PartialAssignment(f"variable {vid} unassigned")
    if m.kind == "cnf":
        for cl in m.clauses:
            if not any(assignment[abs(l)] == (1 if l > 0 else 0) for l in cl):
                return False
        return True
    for imp in m.implications:
        if all(assignment[v] == k for v, k in imp.antecedent):
            v, k = imp.consequent
            if assignment[v] != k:
                return False
    return True


# -------------------------------------------------------------- Skolem sets

def table_index(formula: DssatFormula, deps: Sequence[int], assignment: Assignment) -> int:
    """Mixed-radix index of a dependency assignment, first dep least significant."""
    idx = 0
    stride = 1
    for d in deps:
        v = formula.var(d)
        val = assignment[d]
        if not 0 <= val < v.values:
            raise OutOfRange(f"variable {d}: value {val}")
        idx += val * stride
        stride *= v.values
    return idx


def table_size(formula: DssatFormula, deps: Sequence[int]) -> int:
    return math.prod(formula.var(d).values for d in deps)


@dataclass(frozen=True)
class SkolemSet:
    """One output table per existential, indexed by dependency assignment.

    Entry i of a table is the output for the dependency assignment whose
    mixed-radix encoding (first declared dependency least significant)
    equals i.  Boolean tables hold 0/1; finite-domain tables hold domain
    values.
    """

    tables: Mapping[int, tuple[int, ...]]

    @staticmethod
    def of(tables: Mapping[int, Sequence[int]]) -> "SkolemSet":
        return SkolemSet({int(v): tuple(int(b) for b in t) for v, t in tables.items()})

    def validate(self, formula: DssatFormula) -> None:
        want = {v.vid for v in formula.existentials}
        have = set(self.tables)
        if want != have:
            raise SkolemMismatch(
                f"tables for {sorted(have)} but existentials are {sorted(want)}")
        for v in formula.existentials:
            t = self.tables[v.vid]
            size = table_size(formula, v.deps)
            if len(t) != size:
                raise SkolemMismatch(
                    f"variable {v.vid}: table length {len(t)}, expected {size}")
            if any(not 0 <= b < v.values for b in t):
                raise SkolemMismatch(f"variable {v.vid}: table entry outside domain")

    def output(self, formula: DssatFormula, vid: int, assignment: Assignment) -> int:
        v = formula.var(vid)
        return self.tables[vid][table_index(formula, v.deps, assignment)]
