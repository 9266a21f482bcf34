"""Reductions between formula classes.

Two directions live here:

* DQBF (universals plus Henkin existentials) embeds into the randomized
  setting by replacing every universal with a fair coin.  The original
  formula is satisfiable exactly when the embedded one has value 1: every
  falsified universal assignment removes a weight that is a positive power
  of two, so with at most 53 universals the comparison against 1.0 is exact
  in binary64.

* Finite-domain variables compile down to Boolean blocks.  Randomized
  variables use a stopping chain of K-1 bits whose first set bit marks the
  value (all clear means the last value); existentials use a one-hot block
  of K bits guarded by at-least-one and pairwise at-most-one clauses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

from .errors import InvalidFormula, NonBooleanFormula, TooManyRandomVars
from .formula import (
    DssatFormula,
    Matrix,
    SkolemSet,
    Variable,
    build_formula,
    exist_var,
    random_var,
    table_index,
    universal_var,
)
from .solver import SolveResult, solve_dssat_exact


@dataclass(frozen=True)
class DqbfFormula:
    """A dependency quantified Boolean formula: universals and existentials
    with explicit dependency sets, CNF matrix."""
    prefix: tuple[Variable, ...]
    matrix: Matrix


def dqbf_from_formula(formula: DssatFormula) -> DqbfFormula:
    if not formula.boolean:
        raise NonBooleanFormula("DQBF is a Boolean fragment")
    if formula.matrix.kind == "implications":
        raise InvalidFormula("DQBF requires a CNF matrix")
    for v in formula.prefix:
        if v.kind == "random":
            raise InvalidFormula(f"variable {v.vid} is randomized, not a DQBF quantifier")
    return DqbfFormula(formula.prefix, formula.matrix)


def dqbf_to_dssat(dqbf: DqbfFormula) -> DssatFormula:
    """Replace each universal with a fair coin, keeping dependency sets."""
    prefix = tuple(
        random_var(v.vid, 0.5) if v.kind == "universal" else v
        for v in dqbf.prefix)
    return build_formula(prefix, dqbf.matrix)


def dqbf_check(
    dqbf: DqbfFormula,
    *,
    max_universals: int = 16,
    max_skolem_space: int = 1 << 20,
) -> tuple[bool, SkolemSet | None, SolveResult]:
    """Decide satisfiability of a DQBF through the coin embedding.

    Returns (satisfiable, witness or None, solve result).  The witness,
    when present, is a set of Skolem functions for the original formula.
    """
    n_univ = sum(1 for v in dqbf.prefix if v.kind == "universal")
    if n_univ > max_universals:
        raise TooManyRandomVars(
            f"{n_univ} universals exceed the cap of {max_universals}")
    res = solve_dssat_exact(dqbf_to_dssat(dqbf), max_skolem_space=max_skolem_space)
    sat = res.value >= 1.0 - 1e-12
    return sat, (res.witness if sat else None), res


def _chain_probs(dist: tuple[float, ...]) -> tuple[float, ...]:
    """Bit probabilities for the stopping chain of a distribution.

    Bit t fires with the conditional probability of value t given that no
    earlier value fired.  Once the remaining mass hits zero the rest of the
    chain is pinned to zero.
    """
    qs = []
    rem = 1.0
    for p in dist[:-1]:
        q = 0.0 if rem <= 1e-12 else min(1.0, max(0.0, p / rem))
        qs.append(q)
        rem -= p
    return tuple(qs)


def chain_decode(bits: tuple[int, ...]) -> int:
    """Value encoded by chain bits: index of the first set bit, or the last
    value when every bit is clear."""
    for i, b in enumerate(bits):
        if b:
            return i
    return len(bits)


def chain_encode(value: int, nbits: int) -> tuple[int, ...]:
    """Canonical chain bits for a value; bits past the first set one are
    left clear."""
    return tuple(1 if i == value else 0 for i in range(nbits))


@dataclass(frozen=True, eq=False)
class BoolMapping:
    """Correspondence produced by booleanize.

    blocks maps each original variable id to the tuple of Boolean variable
    ids that encode it (a single id for variables that were already
    Boolean, K-1 chain bits for a K-valued randomized variable, K one-hot
    bits for a K-valued existential).
    """
    source: DssatFormula
    target: DssatFormula
    blocks: dict[int, tuple[int, ...]]

    def _decode_dep(self, dep: Variable, bits: tuple[int, ...]) -> int:
        if dep.boolean:
            return bits[0]
        return chain_decode(bits)

    def _dep_rows(self, deps: tuple[int, ...]):
        """Yield (bool row index, original dep values) over the translated
        dependency space of an original dependency list."""
        bitvars = [b for d in deps for b in self.blocks[d]]
        widths = [len(self.blocks[d]) for d in deps]
        for row in product((0, 1), repeat=len(bitvars)):
            idx = 0
            for b in reversed(row):
                idx = (idx << 1) | b
            values = []
            at = 0
            for d, w in zip(deps, widths):
                values.append(self._decode_dep(self.source.var(d), row[at:at + w]))
                at += w
            yield idx, tuple(values)

    def encode_skolem(self, skolems: SkolemSet) -> SkolemSet:
        """Translate tables over original domains into tables for the
        Boolean encoding (one-hot rows for finite-domain existentials)."""
        tables: dict[int, list[int]] = {
            b: [0] * (1 << len(self.target.var(b).deps))
            for v in self.source.existentials for b in self.blocks[v.vid]}
        for v in self.source.existentials:
            src = skolems.tables[v.vid]
            block = self.blocks[v.vid]
            for idx, values in self._dep_rows(v.deps):
                k = src[table_index(self.source, v.deps, dict(zip(v.deps, values)))]
                if v.boolean:
                    tables[block[0]][idx] = k
                else:
                    for j, b in enumerate(block):
                        tables[b][idx] = 1 if j == k else 0
        return SkolemSet({b: tuple(t) for b, t in tables.items()})

    def lift_skolem(self, skolems: SkolemSet) -> SkolemSet:
        """Read tables for the Boolean encoding back as tables over the
        original domains.  One-hot blocks decode to the first set bit
        (value 0 when the row is all clear); chain-valued dependencies are
        probed at their canonical bit patterns."""
        out: dict[int, tuple[int, ...]] = {}
        for v in self.source.existentials:
            block = self.blocks[v.vid]
            dep_vars = [self.source.var(d) for d in v.deps]
            table = [0] * math.prod(d.values for d in dep_vars)
            for values in product(*(range(d.values) for d in dep_vars)):
                bits: list[int] = []
                for d, val in zip(dep_vars, values):
                    if d.boolean:
                        bits.append(val)
                    else:
                        bits.extend(chain_encode(val, len(self.blocks[d.vid])))
                idx = 0
                for b in reversed(bits):
                    idx = (idx << 1) | b
                if v.boolean:
                    e = skolems.tables[block[0]][idx]
                else:
                    hot = [j for j, b in enumerate(block)
                           if skolems.tables[b][idx]]
                    e = hot[0] if hot else 0
                table[table_index(self.source, v.deps, dict(zip(v.deps, values)))] = e
            out[v.vid] = tuple(table)
        return SkolemSet(out)


def booleanize(formula: DssatFormula) -> BoolMapping:
    """Compile finite-domain variables to Boolean blocks.

    Already-Boolean formulas come back structurally unchanged.  The matrix
    is rewritten to CNF: each implication contributes one clause per
    consequent pattern literal, with antecedent patterns negated in place.
    """
    blocks: dict[int, tuple[int, ...]] = {}
    prefix: list[Variable] = []
    nxt = 1

    def fresh(n: int) -> tuple[int, ...]:
        nonlocal nxt
        ids = tuple(range(nxt, nxt + n))
        nxt += n
        return ids

    for v in formula.prefix:
        deps = tuple(b for d in v.deps for b in blocks[d])
        if v.boolean:
            ids = fresh(1)
            if v.kind == "random":
                prefix.append(random_var(ids[0], v.prob))
            elif v.kind == "universal":
                prefix.append(universal_var(ids[0]))
            else:
                prefix.append(exist_var(ids[0], deps))
        elif v.kind == "random":
            ids = fresh(v.values - 1)
            for b, q in zip(ids, _chain_probs(v.dist)):
                prefix.append(random_var(b, q))
        else:
            ids = fresh(v.values)
            for b in ids:
                prefix.append(exist_var(b, deps))
        blocks[v.vid] = ids

    def pattern(vid: int, value: int) -> tuple[int, ...]:
        v = formula.var(vid)
        blk = blocks[vid]
        if v.boolean:
            return (blk[0],) if value else (-blk[0],)
        if v.kind == "random":
            if value < len(blk):
                return tuple(-blk[i] for i in range(value)) + (blk[value],)
            return tuple(-b for b in blk)
        return (blk[value],)

    clauses: list[tuple[int, ...]] = []
    m = formula.matrix
    if m.kind == "cnf":
        for cl in m.clauses:
            clauses.append(tuple(
                blocks[abs(l)][0] * (1 if l > 0 else -1) for l in cl))
    elif m.kind == "implications":
        for imp in m.implications:
            base: list[int] = []
            for vid, value in imp.antecedent:
                base.extend(-l for l in pattern(vid, value))
            for lit in pattern(*imp.consequent):
                clauses.append(tuple(base) + (lit,))
    for v in formula.existentials:
        if v.boolean:
            continue
        blk = blocks[v.vid]
        clauses.append(blk)
        for i in range(len(blk)):
            for j in range(i + 1, len(blk)):
                clauses.append((-blk[i], -blk[j]))

    matrix = Matrix.cnf(tuple(clauses)) if clauses else Matrix.top()
    target = build_formula(tuple(prefix), matrix)
    return BoolMapping(formula, target, blocks)
