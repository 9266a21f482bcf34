"""Evaluation of formulas under fixed Skolem sets, and prefix recursions.

Three public entry points:

* eval_skolem    -- plain formulas: the satisfying-probability sum over
                    random assignments, computed exactly by factored
                    summation (variable elimination) so that structured
                    encodings with many random variables stay tractable.
* eval_extended  -- extended formulas: the recursive rules (true = 1,
                    false = 0, random = weighted sum, universal = min)
                    applied in strict prefix order after substituting
                    Skolem outputs, memoized on canonical residuals.
* eval_ssat_prefix -- linear-prefix formulas evaluated with the
                    max/expectation/min rules, no Skolem set required.

The two Skolem-set evaluators are intentionally independent algorithms;
the test suite cross-checks them against each other and against a
literal product-space enumeration.
"""

from __future__ import annotations

import math
import sys
from functools import lru_cache

import numpy as np

from .errors import (
    DepthBudgetExceeded,
    InvalidFormula,
    NotLinearPrefix,
    TooManyRandomVars,
)
from .formula import (
    EXISTS,
    RANDOM,
    UNIVERSAL,
    DssatFormula,
    Matrix,
    SkolemSet,
)

# Hard ceiling on the number of entries of any intermediate factor or
# truth table the engines will materialize.
WIDTH_CAP = 1 << 24

# A generalized literal (vid, value, positive) is satisfied by alpha when
# alpha[vid] == value (positive) or alpha[vid] != value (negative).
GenLiteral = tuple[int, int, bool]
GenClause = tuple[GenLiteral, ...]

BOTTOM = None  # residual sentinel


def gen_clauses(matrix: Matrix) -> tuple[GenClause, ...]:
    """Compile either matrix shape to clauses of generalized literals."""
    if matrix.kind == "top":
        return ()
    if matrix.kind == "cnf":
        return tuple(
            tuple((abs(l), 1 if l > 0 else 0, True) for l in cl)
            for cl in matrix.clauses
        )
    out = []
    for imp in matrix.implications:
        lits = [(v, k, False) for v, k in imp.antecedent]
        lits.append((*imp.consequent, True))
        out.append(tuple(lits))
    return tuple(out)


def _canon(clauses):
    """Canonical residual; an already-empty clause collapses to BOTTOM."""
    out = tuple(sorted({tuple(sorted(set(cl))) for cl in clauses}))
    return BOTTOM if any(not cl for cl in out) else out


def assign_residual(residual, vid: int, value: int):
    """Substitute one variable; returns the simplified residual or BOTTOM."""
    out = []
    changed = False
    for cl in residual:
        keep = []
        satisfied = False
        touched = False
        for lit in cl:
            v, k, pos = lit
            if v == vid:
                touched = True
                if (value == k) if pos else (value != k):
                    satisfied = True
                    break
            else:
                keep.append(lit)
        if satisfied:
            changed = True
            continue
        if touched:
            changed = True
            if not keep:
                return BOTTOM
            out.append(tuple(keep))
        else:
            out.append(cl)
    if not changed:
        return residual
    return tuple(sorted(set(out)))


def _support(residual) -> set[int]:
    return {v for cl in residual for v, _, _ in cl}


# ------------------------------------------------------- factored summation

def _clause_factor(clause: GenClause, sizes: dict[int, int]):
    scope = sorted({v for v, _, _ in clause})
    shape = [sizes[v] for v in scope]
    if math.prod(shape) > WIDTH_CAP:
        raise TooManyRandomVars(f"clause factor over {len(scope)} variables too wide")
    fail = np.ones(shape, dtype=bool)
    for v, k, pos in clause:
        ax = scope.index(v)
        vec = (np.arange(shape[ax]) != k) if pos else (np.arange(shape[ax]) == k)
        view = [1] * len(scope)
        view[ax] = shape[ax]
        fail &= vec.reshape(view)
    return tuple(scope), 1.0 - fail.astype(np.float64)


def _merge(f1, f2, sizes):
    """Pointwise product of two factors over the union scope."""
    s1, a1 = f1
    s2, a2 = f2
    union = sorted(set(s1) | set(s2))
    if math.prod(sizes[v] for v in union) > WIDTH_CAP:
        raise TooManyRandomVars(f"intermediate factor over {len(union)} variables too wide")

    def lift(scope, arr):
        shape = [sizes[v] if v in scope else 1 for v in union]
        order = [scope.index(v) for v in union if v in scope]
        return np.transpose(arr, order).reshape(shape) if scope else arr.reshape(shape)

    return tuple(union), lift(s1, a1) * lift(s2, a2)


def _elimination_order(scopes: list[tuple[int, ...]], sizes: dict[int, int],
                       vids: list[int]) -> tuple[int, ...]:
    """Greedy min-weight ordering, ties broken by variable id."""
    live = [set(s) for s in scopes]
    remaining = set(vids)
    order = []
    while remaining:
        best = None
        best_w = None
        for v in sorted(remaining):
            union: set[int] = {v}
            for s in live:
                if v in s:
                    union |= s
            w = math.prod(sizes[u] for u in union)
            if best_w is None or w < best_w:
                best, best_w = v, w
        order.append(best)
        merged: set[int] = set()
        keep = []
        for s in live:
            if best in s:
                merged |= s
            else:
                keep.append(s)
        merged.discard(best)
        if merged:
            keep.append(merged)
        live = keep
        remaining.discard(best)
    return tuple(order)


@lru_cache(maxsize=32)
def _plain_plan(formula: DssatFormula):
    """Formula-static pieces of the factored sum: factors and ordering."""
    sizes = {v.vid: v.values for v in formula.prefix}
    static = []
    for cl in gen_clauses(formula.matrix):
        static.append(_clause_factor(cl, sizes))
    for v in formula.randoms:
        dist = v.dist if v.dist is not None else (1.0 - v.prob, v.prob)
        static.append(((v.vid,), np.asarray(dist, dtype=np.float64)))
    scopes = [s for s, _ in static]
    for v in formula.existentials:
        scopes.append(tuple(sorted({*v.deps, v.vid})))
    order = _elimination_order(scopes, sizes, [v.vid for v in formula.prefix])
    return sizes, tuple(static), order


def _skolem_factor(formula: DssatFormula, evar, table, sizes):
    dims = [sizes[d] for d in evar.deps]
    tbl = np.asarray(table, dtype=np.int64).reshape(dims, order="F")
    arr = (tbl[..., None] == np.arange(sizes[evar.vid])).astype(np.float64)
    scope = [*evar.deps, evar.vid]
    perm = sorted(range(len(scope)), key=lambda i: scope[i])
    return tuple(scope[i] for i in perm), np.transpose(arr, perm)


def eval_skolem(formula: DssatFormula, skolems, *, max_random_vars: int | None = 24) -> float:
    """Satisfying probability of a plain formula under fixed Skolem tables.

    Computes the exact weighted sum over random-variable assignments by
    factored summation.  ``max_random_vars`` guards desk scale; pass None
    (or a larger bound) for structured encodings known to eliminate well,
    e.g. the decision-process encodings produced by this package.
    """
    if formula.extended:
        raise InvalidFormula("eval_skolem requires a plain formula (no universals)")
    if not isinstance(skolems, SkolemSet):
        skolems = SkolemSet.of(skolems)
    skolems.validate(formula)
    n_random = len(formula.randoms)
    if max_random_vars is not None and n_random > max_random_vars:
        raise TooManyRandomVars(
            f"{n_random} random variables exceed the cap of {max_random_vars}")
    if formula.matrix.kind == "top":
        return 1.0

    sizes, static, order = _plain_plan(formula)
    factors = list(static)
    for v in formula.existentials:
        factors.append(_skolem_factor(formula, v, skolems.tables[v.vid], sizes))

    const = 1.0
    for scope, arr in [f for f in factors if not f[0]]:
        const *= float(arr)
    factors = [f for f in factors if f[0]]
    for vid in order:
        group = [f for f in factors if vid in f[0]]
        if not group:
            continue
        factors = [f for f in factors if vid not in f[0]]
        merged = group[0]
        for f in group[1:]:
            merged = _merge(merged, f, sizes)
        scope, arr = merged
        arr = arr.sum(axis=scope.index(vid))
        scope = tuple(u for u in scope if u != vid)
        if scope:
            factors.append((scope, arr))
        else:
            const *= float(arr)
    for scope, arr in factors:  # pragma: no cover - order covers every vid
        const *= float(arr.sum())
    return min(max(const, 0.0), 1.0)


# --------------------------------------------------- prefix-order recursion

def _budget(formula: DssatFormula, max_depth: int) -> None:
    depth = sum(1 for v in formula.prefix if v.kind != EXISTS)
    if depth > max_depth:
        raise DepthBudgetExceeded(f"prefix depth {depth} exceeds budget {max_depth}")
    need = 64 + 8 * depth
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def eval_extended(formula: DssatFormula, skolems, *, max_depth: int = 1000) -> float:
    """Five-rule evaluation of an extended (or plain) formula.

    Walks the random/universal variables in prefix order, substituting
    each existential as soon as its dependency block is assigned, taking
    probability-weighted sums at random variables and minima at universal
    ones.  Memoized on (position, canonical residual, pending-table
    context).
    """
    if not isinstance(skolems, SkolemSet):
        skolems = SkolemSet.of(skolems)
    skolems.validate(formula)
    _budget(formula, max_depth)

    qvars = [v for v in formula.prefix if v.kind != EXISTS]
    qpos = {v.vid: i for i, v in enumerate(qvars)}
    ready: dict[int, list] = {}
    for y in formula.existentials:
        at = max((qpos[d] + 1 for d in y.deps), default=0)
        ready.setdefault(at, []).append(y)

    def substitute(residual, pos, values):
        for y in ready.get(pos, ()):
            if residual is BOTTOM or not residual:
                break
            if y.vid in _support(residual):
                out = skolems.output(formula, y.vid, values)
                residual = assign_residual(residual, y.vid, out)
        return residual

    memo: dict = {}
    values: dict[int, int] = {}

    def context(residual, pos):
        pending = sorted(_support(residual) & pending_ids[pos])
        return tuple(
            (y, tuple(values[d] for d in formula.var(y).deps if qpos[d] < pos))
            for y in pending
        )

    # ids of existentials not yet substituted when standing at position p
    pending_ids: list[set[int]] = []
    acc = {y.vid for y in formula.existentials}
    for p in range(len(qvars) + 1):
        acc = acc - {y.vid for y in ready.get(p, ())}
        pending_ids.append(set(acc))

    def go(pos, residual):
        if residual is BOTTOM:
            return 0.0
        if not residual:
            return 1.0
        v = qvars[pos]
        key = (pos, residual, context(residual, pos))
        hit = memo.get(key)
        if hit is not None:
            return hit
        branches = []
        for val in range(v.values):
            values[v.vid] = val
            r2 = substitute(assign_residual(residual, v.vid, val), pos + 1, values)
            branches.append(go(pos + 1, r2))
            del values[v.vid]
        if v.kind == RANDOM:
            result = sum(v.value_prob(k) * b for k, b in enumerate(branches))
        else:
            result = min(branches)
        memo[key] = result
        return result

    residual = substitute(_canon(gen_clauses(formula.matrix)), 0, values)
    return min(max(go(0, residual), 0.0), 1.0)


def check_linear_prefix(formula: DssatFormula) -> None:
    """Raise NotLinearPrefix unless deps follow the linear-prefix discipline."""
    seen: list[int] = []
    for v in formula.prefix:
        if v.kind == EXISTS:
            if v.deps != tuple(seen):
                raise NotLinearPrefix(
                    f"variable {v.vid} depends on {v.deps}, "
                    f"but the preceding block is {tuple(seen)}")
        else:
            seen.append(v.vid)


def ssat_value_fn(formula: DssatFormula, *, max_depth: int = 1000):
    """Memoized (position, residual) -> probability for linear prefixes.

    Shared by eval_ssat_prefix and the witness-reconstructing solver.
    Existentials take the max over their domain, randoms the expectation,
    universals the min.
    """
    check_linear_prefix(formula)
    _budget(formula, max_depth)
    prefix = formula.prefix
    memo: dict = {}

    def val(pos: int, residual) -> float:
        if residual is BOTTOM:
            return 0.0
        if not residual:
            return 1.0
        v = prefix[pos]
        key = (pos, residual)
        hit = memo.get(key)
        if hit is not None:
            return hit
        branches = [val(pos + 1, assign_residual(residual, v.vid, k))
                    for k in range(v.values)]
        if v.kind == RANDOM:
            result = sum(v.value_prob(k) * b for k, b in enumerate(branches))
        elif v.kind == UNIVERSAL:
            result = min(branches)
        else:
            result = max(branches)
        memo[key] = result
        return result

    return val, _canon(gen_clauses(formula.matrix))


def eval_ssat_prefix(formula: DssatFormula, *, max_depth: int = 1000) -> float:
    """Value of a linear-prefix formula by the quantifier rules alone."""
    val, residual = ssat_value_fn(formula, max_depth=max_depth)
    return min(max(val(0, residual), 0.0), 1.0)


def evaluate(formula: DssatFormula, skolems, *, max_random_vars: int | None = 24,
             max_depth: int = 1000) -> float:
    """Dispatch: plain formulas to eval_skolem, extended to eval_extended."""
    if formula.extended:
        return eval_extended(formula, skolems, max_depth=max_depth)
    return eval_skolem(formula, skolems, max_random_vars=max_random_vars)
