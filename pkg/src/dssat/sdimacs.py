"""Line-oriented file format for Boolean formulas and Skolem tables.

Grammar, one declaration per line:

    c <comment>
    p cnf <nvars> <nclauses>
    r <prob> <var>+ 0        random variables, Pr[var = true] = prob
    a <var>+ 0               universal variables
    e <var>+ 0               existentials depending on all preceding r/a
    d <var> <dep>* 0         existential with an explicit dependency set
    <lit>+ 0                 clause of signed DIMACS literals
    0                        the empty clause (false for every assignment)

Quantifier lines must precede clauses and cover variables 1..nvars exactly
once.  The printer emits one variable per r/a line and explicit d lines,
with dependency lists in prefix order; parse(print(f)) reproduces f.

Skolem files hold one line per existential:

    f <var> <bitstring>

Bit i of the string (leftmost character is index 0) is the output for the
dependency assignment whose bits, first declared dependency least
significant, encode i.
"""

from __future__ import annotations

from .errors import (
    BadProbability,
    CountMismatch,
    DuplicateQuantifier,
    MissingFunction,
    NonBooleanFormula,
    ParseError,
    UnknownVariable,
    WrongTableLength,
)
from .formula import (
    DssatFormula,
    Matrix,
    SkolemSet,
    Variable,
    build_formula,
    exist_var,
    random_var,
    universal_var,
)


def _tokens(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        yield no, line.split()


def _ints(no: int, toks: list[str]) -> list[int]:
    out = []
    for t in toks:
        try:
            out.append(int(t))
        except ValueError:
            raise ParseError(no, f"expected an integer, got {t!r}") from None
    return out


def _closed(no: int, nums: list[int]) -> list[int]:
    if not nums or nums[-1] != 0:
        raise ParseError(no, "line must end with 0")
    body = nums[:-1]
    if any(n == 0 for n in body):
        raise ParseError(no, "0 terminator in the middle of a line")
    return body


def parse_sdimacs(text: str) -> DssatFormula:
    """Parse a document into a validated formula."""
    header: tuple[int, int] | None = None
    header_line = 0
    prefix: list[Variable] = []
    declared: set[int] = set()
    preceding: list[int] = []  # r/a block so far, for e lines
    clauses: list[tuple[int, ...]] = []

    for no, toks in _tokens(text):
        key = toks[0]
        if key == "p":
            if header is not None:
                raise ParseError(no, "duplicate header")
            if len(toks) != 4 or toks[1] != "cnf":
                raise ParseError(no, "header must read 'p cnf <vars> <clauses>'")
            nums = _ints(no, toks[2:])
            if nums[0] < 0 or nums[1] < 0:
                raise ParseError(no, "negative counts in header")
            header = (nums[0], nums[1])
            header_line = no
            continue
        if header is None:
            raise ParseError(no, "header must come before declarations")
        nvars = header[0]

        def declare(vid: int, var: Variable):
            if not 1 <= vid <= nvars:
                raise UnknownVariable(no, f"variable {vid} outside 1..{nvars}")
            if vid in declared:
                raise DuplicateQuantifier(f"line {no}: variable {vid} quantified twice")
            declared.add(vid)
            prefix.append(var)

        if key == "r":
            if len(toks) < 3:
                raise ParseError(no, "random line needs a probability and a variable")
            try:
                prob = float(toks[1])
            except ValueError:
                raise ParseError(no, f"bad probability {toks[1]!r}") from None
            if not 0.0 <= prob <= 1.0:
                raise BadProbability(f"line {no}: probability {prob}")
            for vid in _closed(no, _ints(no, toks[2:])):
                declare(vid, random_var(vid, prob))
                preceding.append(vid)
        elif key == "a":
            for vid in _closed(no, _ints(no, toks[1:])):
                declare(vid, universal_var(vid))
                preceding.append(vid)
        elif key == "e":
            for vid in _closed(no, _ints(no, toks[1:])):
                declare(vid, exist_var(vid, tuple(preceding)))
        elif key == "d":
            body = _closed(no, _ints(no, toks[1:]))
            if not body:
                raise ParseError(no, "d line needs a variable")
            vid, deps = body[0], body[1:]
            for d in deps:
                if d not in declared:
                    raise UnknownVariable(no, f"dependency {d} not yet declared")
            declare(vid, exist_var(vid, tuple(deps)))
        else:
            nums = _ints(no, toks)
            if nums[-1] != 0:
                raise ParseError(no, "clause must end with 0")
            lits = nums[:-1]
            for lit in lits:
                if lit == 0:
                    raise ParseError(no, "0 terminator in the middle of a clause")
                if not 1 <= abs(lit) <= nvars:
                    raise UnknownVariable(no, f"literal {lit} outside 1..{nvars}")
                if abs(lit) not in declared:
                    raise UnknownVariable(no, f"literal {lit} precedes its quantifier")
            clauses.append(tuple(lits))

    if header is None:
        raise ParseError(1, "missing 'p cnf' header")
    nvars, nclauses = header
    if len(declared) != nvars:
        raise CountMismatch(
            header_line,
            f"header declares {nvars} variables but {len(declared)} are quantified")
    if len(clauses) != nclauses:
        raise CountMismatch(
            header_line,
            f"header declares {nclauses} clauses but {len(clauses)} appear")
    matrix = Matrix.top() if not clauses else Matrix.cnf(clauses)
    return build_formula(prefix, matrix)


def print_sdimacs(formula: DssatFormula) -> str:
    """Canonical text for a Boolean formula (finite domains must be
    booleanized first)."""
    if not formula.boolean:
        raise NonBooleanFormula("print_sdimacs requires a Boolean formula")
    if formula.matrix.kind == "implications":
        raise NonBooleanFormula("print_sdimacs requires a CNF or true matrix")
    clauses = formula.matrix.clauses if formula.matrix.kind == "cnf" else ()
    lines = [f"p cnf {len(formula.prefix)} {len(clauses)}"]
    for v in formula.prefix:
        if v.kind == "random":
            lines.append(f"r {v.prob!r} {v.vid} 0")
        elif v.kind == "universal":
            lines.append(f"a {v.vid} 0")
        else:
            lines.append(" ".join(["d", str(v.vid), *map(str, v.deps), "0"]))
    for cl in clauses:
        lines.append(" ".join([*map(str, cl), "0"]))
    return "\n".join(lines) + "\n"


def parse_skolem(text: str, formula: DssatFormula) -> SkolemSet:
    """Parse Skolem tables for the existentials of a Boolean formula."""
    if not formula.boolean:
        raise NonBooleanFormula("Skolem files describe Boolean tables only")
    evars = {v.vid: v for v in formula.existentials}
    tables: dict[int, tuple[int, ...]] = {}
    last = 0
    for no, toks in _tokens(text):
        last = no
        if toks[0] != "f":
            raise ParseError(no, f"expected an f line, got {toks[0]!r}")
        if len(toks) != 3:
            raise ParseError(no, "f line must read 'f <var> <bitstring>'")
        vid = _ints(no, [toks[1]])[0]
        if vid not in evars:
            raise UnknownVariable(no, f"variable {vid} is not existential")
        if vid in tables:
            raise ParseError(no, f"duplicate table for variable {vid}")
        bits = toks[2]
        if set(bits) - {"0", "1"}:
            raise ParseError(no, "bitstring must be over 0/1")
        want = 1 << len(evars[vid].deps)
        if len(bits) != want:
            raise WrongTableLength(
                no, f"variable {vid}: {len(bits)} bits, expected {want}")
        tables[vid] = tuple(int(b) for b in bits)
    for vid in evars:
        if vid not in tables:
            raise MissingFunction(last + 1, f"no table for variable {vid}")
    return SkolemSet(tables)


def print_skolem(skolems: SkolemSet, formula: DssatFormula) -> str:
    """One f line per existential, in prefix order."""
    if not formula.boolean:
        raise NonBooleanFormula("Skolem files describe Boolean tables only")
    lines = []
    for v in formula.existentials:
        bits = "".join(str(b) for b in skolems.tables[v.vid])
        lines.append(f"f {v.vid} {bits}")
    return "\n".join(lines) + ("\n" if lines else "")
