"""Exact maximization over Skolem sets, threshold decisions, linear solving.

solve_dssat_exact enumerates candidate truth tables for the existentials
in prefix order (tables themselves in lexicographic entry order), keeping
the first candidate that attains the maximum, which makes the reported
witness the lexicographically smallest one.  Subtrees are pruned with an
optimistic upper bound: clauses still touching an undecided existential
are treated as satisfiable at will.

Plain formulas with a small random product space are evaluated through a
row compilation of the matrix (one reduced clause set per weighted random
assignment); everything else falls back to the generic evaluators, so the
two routes cross-check each other through the witness-replay invariant.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import product

from .errors import BadThreshold, SearchSpaceTooLarge
from .evaluator import (
    BOTTOM,
    assign_residual,
    eval_extended,
    eval_skolem,
    gen_clauses,
    ssat_value_fn,
)
from .formula import EXISTS, DssatFormula, SkolemSet, table_index, table_size

EPS = 1e-12
ROWS_CAP = 1 << 14


@dataclass(frozen=True)
class SolveStats:
    candidates: int
    pruned: int
    memo_hits: int
    wall_time: float


@dataclass(frozen=True)
class SolveResult:
    value: float
    witness: SkolemSet
    stats: SolveStats


@dataclass(frozen=True)
class DecideResult:
    decision: bool
    value: float
    witness: SkolemSet | None
    stats: SolveStats


def _candidate_space(formula: DssatFormula, cap: int) -> None:
    total = 1
    for y in formula.existentials:
        size = table_size(formula, y.deps)
        if size > cap:
            raise SearchSpaceTooLarge(
                f"variable {y.vid}: table with {size} entries exceeds cap {cap}")
        total *= y.values ** size
        if total > cap:
            raise SearchSpaceTooLarge(
                f"Skolem candidate space exceeds cap {cap}")


def _compile_rows(formula: DssatFormula):
    """Reduce the matrix under every weighted random assignment.

    Returns (base mass of already-satisfied rows, rows), each row being
    (weight, per-existential table index, clauses over existential slots).
    """
    evars = formula.existentials
    slot = {y.vid: j for j, y in enumerate(evars)}
    randoms = formula.randoms
    clauses = gen_clauses(formula.matrix)
    base = 0.0
    rows = []
    for values in product(*(range(v.values) for v in randoms)):
        assignment = {v.vid: values[i] for i, v in enumerate(randoms)}
        w = 1.0
        for i, v in enumerate(randoms):
            w *= v.value_prob(values[i])
        if w == 0.0:
            continue
        residual = clauses
        for vid, val in assignment.items():
            residual = assign_residual(residual, vid, val)
            if residual is BOTTOM:
                break
        if residual is BOTTOM:
            continue
        if not residual:
            base += w
            continue
        idxs = tuple(table_index(formula, y.deps, assignment) for y in evars)
        reduced = tuple(
            tuple((slot[v], k, pos) for v, k, pos in cl) for cl in residual)
        rows.append((w, idxs, reduced))
    return base, rows


def _search(formula: DssatFormula, cap: int, target: float):
    """Lexicographic branch-and-bound over Skolem candidates.

    Stops as soon as the incumbent reaches ``target``.  Returns
    (value, tables, stats-tuple, reached-target flag).
    """
    _candidate_space(formula, cap)
    evars = formula.existentials
    t0 = time.perf_counter()

    use_rows = (not formula.extended
                and math.prod(v.values for v in formula.randoms) <= ROWS_CAP)
    if use_rows:
        base, rows = _compile_rows(formula)

        def assess(tables, decided):
            """Exact value when fully decided, optimistic bound otherwise."""
            total = base
            for w, idxs, reduced in rows:
                for cl in reduced:
                    sat = False
                    for j, k, pos in cl:
                        if j >= decided:
                            sat = True  # undecided literal: optimistic
                            break
                        if (tables[j][idxs[j]] == k) == pos:
                            sat = True
                            break
                    if not sat:
                        break
                else:
                    total += w
            return total
    else:
        def assess(tables, decided):
            sk = SkolemSet({y.vid: tables[j] for j, y in enumerate(evars)})
            if formula.extended:
                return eval_extended(formula, sk)
            return eval_skolem(formula, sk, max_random_vars=None)

    best = -1.0
    best_tables: tuple | None = None
    candidates = 0
    pruned = 0
    tables: list[tuple[int, ...]] = [() for _ in evars]

    def dfs(j: int) -> bool:
        nonlocal best, best_tables, candidates, pruned
        if j == len(evars):
            candidates += 1
            value = assess(tables, j)
            if value > best + EPS:
                best = value
                best_tables = tuple(tables)
            return best >= target
        size = table_size(formula, evars[j].deps)
        for tbl in product(range(evars[j].values), repeat=size):
            tables[j] = tbl
            if use_rows and evars and best >= 0.0:
                if assess(tables, j + 1) <= best + EPS:
                    pruned += 1
                    continue
            if dfs(j + 1):
                return True
        return False

    reached = dfs(0)
    stats = SolveStats(candidates, pruned, 0, time.perf_counter() - t0)
    witness = SkolemSet({y.vid: best_tables[j] for j, y in enumerate(evars)}) \
        if best_tables is not None else SkolemSet({})
    return best, witness, stats, reached


def solve_dssat_exact(formula: DssatFormula, *, max_skolem_space: int = 1 << 20) -> SolveResult:
    """Maximum satisfying probability over all Skolem sets, with witness.

    The witness is the lexicographically smallest table vector (variables
    in prefix order, table entries as digit strings) among those whose
    value ties the maximum within 1e-12.
    """
    value, witness, stats, _ = _search(formula, max_skolem_space, 1.0 - 1e-13)
    return SolveResult(min(max(value, 0.0), 1.0), witness, stats)


def decide_dssat(formula: DssatFormula, theta: float, *,
                 max_skolem_space: int = 1 << 20) -> DecideResult:
    """Does some Skolem set reach satisfying probability theta?

    Early-exits on the first candidate whose value is >= theta - 1e-12;
    otherwise reports the exact maximum and no witness.
    """
    if not 0.0 <= theta <= 1.0:
        raise BadThreshold(f"theta {theta} outside [0, 1]")
    value, witness, stats, reached = _search(formula, max_skolem_space, theta - EPS)
    value = min(max(value, 0.0), 1.0)
    if reached:
        return DecideResult(True, value, witness, stats)
    return DecideResult(False, value, None, stats)


def solve_ssat(formula: DssatFormula, *, max_depth: int = 1000,
               max_skolem_space: int = 1 << 20) -> SolveResult:
    """Linear-prefix solving by the quantifier rules, with witness tables.

    Existential choices are reconstructed per dependency assignment from
    the max branches of the recursion (ties take the smaller value), each
    table ranging over the variable's full preceding random/universal
    block.
    """
    t0 = time.perf_counter()
    val, residual0 = ssat_value_fn(formula, max_depth=max_depth)
    prefix = formula.prefix
    evars = formula.existentials
    for y in evars:
        if table_size(formula, y.deps) > max_skolem_space:
            raise SearchSpaceTooLarge(
                f"variable {y.vid}: witness table exceeds cap {max_skolem_space}")
    tables = {y.vid: [0] * table_size(formula, y.deps) for y in evars}
    last = max((i for i, v in enumerate(prefix) if v.kind == EXISTS), default=-1)
    assignment: dict[int, int] = {}

    def walk(pos: int, residual) -> None:
        if pos > last:
            return
        v = prefix[pos]
        if v.kind == EXISTS:
            branches = [val(pos + 1, assign_residual(residual, v.vid, k))
                        if residual is not BOTTOM else 0.0
                        for k in range(v.values)]
            choice = max(range(v.values), key=lambda k: (branches[k], -k))
            tables[v.vid][table_index(formula, v.deps, assignment)] = choice
            nxt = residual if residual is BOTTOM \
                else assign_residual(residual, v.vid, choice)
            walk(pos + 1, nxt)
            return
        for k in range(v.values):
            assignment[v.vid] = k
            nxt = residual if residual is BOTTOM \
                else assign_residual(residual, v.vid, k)
            walk(pos + 1, nxt)
            del assignment[v.vid]

    walk(0, residual0)
    value = min(max(val(0, residual0), 0.0), 1.0)
    witness = SkolemSet({vid: tuple(t) for vid, t in tables.items()})
    stats = SolveStats(1, 0, 0, time.perf_counter() - t0)
    return SolveResult(value, witness, stats)
