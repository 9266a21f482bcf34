"""Combinational circuits with black boxes and noisy gates.

Circuits are gate lists in topological order.  A black box (``bb``) is an
unimplemented unit that may observe the listed nodes; a gate may carry an
error rate, meaning its output is flipped with that probability,
independently per evaluation.  ``distill`` rewrites noisy gates into
error-free logic XORed with fresh biased noise inputs.

``encode_probabilistic_partial`` and ``encode_approx_partial`` turn a
reference circuit and a partial implementation into a formula whose value
is the best achievable probability of agreement over all completions of
the black boxes.  The construction guards the comparison with universally
quantified copies of the observed intermediate wires: branches where the
copies disagree with the driving logic are vacuously satisfied, so the
minimum over them isolates the one consistent branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping, Sequence

from .errors import (
    CyclicBlackBox,
    ErrorRatesPresent,
    InvalidFormula,
    ParseError,
    PartialAssignment,
    SearchSpaceTooLarge,
    SharedInputMismatch,
    SkolemMismatch,
    UnsupportedGate,
)
from .evaluator import evaluate
from .formula import (
    DssatFormula,
    Matrix,
    SkolemSet,
    build_formula,
    exist_var,
    random_var,
    table_index,
    universal_var,
)

GATE_KINDS = ("and", "or", "not", "xor", "nand", "nor")
NODE_KINDS = GATE_KINDS + ("input", "bb")


@dataclass(frozen=True)
class Node:
    name: str
    kind: str
    fanins: tuple[str, ...] = ()
    err: float | None = None
    prob: float | None = None


@dataclass(eq=False)
class Circuit:
    """Nodes in definition order (which is therefore topological) plus the
    list of output nodes, paired positionally when circuits are compared."""

    nodes: dict[str, Node]
    outputs: tuple[str, ...]

    def __post_init__(self):
        pos: dict[str, int] = {}
        for name, node in self.nodes.items():
            if name != node.name:
                raise InvalidFormula(f"node {node.name!r} indexed as {name!r}")
            if node.kind not in NODE_KINDS:
                raise UnsupportedGate(f"unknown node kind {node.kind!r}")
            if node.kind == "input":
                if node.fanins:
                    raise InvalidFormula(f"input {name!r} with fanins")
            elif node.kind == "not":
                if len(node.fanins) != 1:
                    raise InvalidFormula(f"not gate {name!r} needs one fanin")
            elif node.kind == "xor":
                if len(node.fanins) != 2:
                    raise InvalidFormula(f"xor gate {name!r} needs two fanins")
            elif node.kind != "bb" and not node.fanins:
                raise InvalidFormula(f"gate {name!r} has no fanins")
            if node.kind == "bb" and len(set(node.fanins)) != len(node.fanins):
                raise InvalidFormula(f"duplicate dependency on {name!r}")
            for f in node.fanins:
                if f not in pos:
                    raise InvalidFormula(
                        f"node {name!r} references {f!r} before its definition")
            if node.err is not None and node.kind not in GATE_KINDS:
                raise InvalidFormula(f"error rate on non-gate {name!r}")
            if node.prob is not None and node.kind != "input":
                raise InvalidFormula(f"probability on non-input {name!r}")
            pos[name] = len(pos)
        for out in self.outputs:
            if out not in self.nodes:
                raise InvalidFormula(f"undefined output {out!r}")

    def inputs(self) -> tuple[str, ...]:
        return tuple(n for n, v in self.nodes.items() if v.kind == "input")

    def black_boxes(self) -> tuple[str, ...]:
        return tuple(n for n, v in self.nodes.items() if v.kind == "bb")

    def has_errors(self) -> bool:
        return any(v.err for v in self.nodes.values())


def parse_circuit(text: str) -> Circuit:
    """Parse a gate list.

    One node per line: ``name kind fanins...`` with optional trailing
    ``err p`` on gates and ``prob p`` on inputs; ``output name...`` lines
    collect the outputs; ``#`` starts a comment.
    """
    nodes: dict[str, Node] = {}
    outputs: list[str] = []
    last = 0
    for no, raw in enumerate(text.splitlines(), start=1):
        last = no
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if toks[0] == "output":
            if len(toks) < 2:
                raise ParseError(no, "output line names no nodes")
            for name in toks[1:]:
                if name not in nodes:
                    raise ParseError(no, f"undefined output {name!r}")
                outputs.append(name)
            continue
        if len(toks) < 2:
            raise ParseError(no, "expected: name kind fanins...")
        name, kind = toks[0], toks[1]
        if name in nodes:
            raise ParseError(no, f"duplicate node {name!r}")
        if kind not in NODE_KINDS:
            raise ParseError(no, f"unknown kind {kind!r}")
        rest = toks[2:]
        opts: dict[str, float] = {}
        while len(rest) >= 2 and rest[-2] in ("err", "prob"):
            key = rest[-2]
            if key in opts:
                raise ParseError(no, f"repeated {key!r}")
            try:
                opts[key] = float(rest[-1])
            except ValueError:
                raise ParseError(no, f"bad {key} value {rest[-1]!r}") from None
            if not 0.0 <= opts[key] <= 1.0:
                raise ParseError(no, f"{key} {opts[key]} outside [0, 1]")
            rest = rest[:-2]
        for f in rest:
            if f not in nodes:
                raise ParseError(no, f"node {name!r} references undefined {f!r}")
        try:
            nodes[name] = Node(name, kind, tuple(rest),
                               opts.get("err"), opts.get("prob"))
            Circuit(dict(nodes), ())
        except (InvalidFormula, UnsupportedGate) as exc:
            raise ParseError(no, str(exc)) from None
    if not outputs:
        raise ParseError(last + 1, "missing output directive")
    return Circuit(nodes, tuple(outputs))


def print_circuit(circuit: Circuit) -> str:
    lines = []
    for node in circuit.nodes.values():
        parts = [node.name, node.kind, *node.fanins]
        if node.err is not None:
            parts += ["err", repr(node.err)]
        if node.prob is not None:
            parts += ["prob", repr(node.prob)]
        lines.append(" ".join(parts))
    lines.append("output " + " ".join(circuit.outputs))
    return "\n".join(lines) + "\n"


def _gate_value(kind: str, vals: Sequence[int]) -> int:
    if kind == "and":
        return int(all(vals))
    if kind == "or":
        return int(any(vals))
    if kind == "not":
        return 1 - vals[0]
    if kind == "xor":
        return vals[0] ^ vals[1]
    if kind == "nand":
        return 1 - int(all(vals))
    if kind == "nor":
        return 1 - int(any(vals))
    raise UnsupportedGate(f"unknown gate kind {kind!r}")


def simulate(circuit: Circuit, values: Mapping[str, int],
             bb_tables: Mapping[str, Sequence[int]] | None = None,
             *, rng=None) -> dict[str, int]:
    """Evaluate every node; returns the full wire assignment.

    Black box tables are indexed by their dependency values with the first
    listed dependency least significant.  With ``rng`` given, each noisy
    gate flips its output with probability ``err``; otherwise error rates
    are ignored and the error-free function is computed.
    """
    out: dict[str, int] = {}
    for name, node in circuit.nodes.items():
        if node.kind == "input":
            if name not in values:
                raise PartialAssignment(f"no value for input {name!r}")
            v = int(values[name])
        elif node.kind == "bb":
            if bb_tables is None or name not in bb_tables:
                raise PartialAssignment(f"no table for black box {name!r}")
            table = bb_tables[name]
            if len(table) != 1 << len(node.fanins):
                raise SkolemMismatch(
                    f"table for {name!r} has {len(table)} entries, "
                    f"wants {1 << len(node.fanins)}")
            idx = sum(out[f] << j for j, f in enumerate(node.fanins))
            v = int(table[idx])
        else:
            v = _gate_value(node.kind, [out[f] for f in node.fanins])
            if node.err and rng is not None and rng.random() < node.err:
                v ^= 1
        if v not in (0, 1):
            raise SkolemMismatch(f"non-Boolean value {v} at {name!r}")
        out[name] = v
    return out


def distill(circuit: Circuit) -> tuple[Circuit, tuple[str, ...]]:
    """Split every noisy gate into its error-free core XORed with a fresh
    biased input.  Returns the rewritten circuit and the fresh inputs, in
    the order of the gates they replace.  Zero-rate gates are merely
    stripped of the annotation, so the node set is unchanged for them."""
    used = set(circuit.nodes)
    z_names: list[str] = []
    nodes: dict[str, Node] = {}
    counters: dict[str, int] = {}

    def fresh(stem: str) -> str:
        while True:
            counters[stem] = counters.get(stem, 0) + 1
            cand = f"{stem}{counters[stem]}"
            if cand not in used:
                used.add(cand)
                return cand

    for name, node in circuit.nodes.items():
        if node.kind in GATE_KINDS and node.err:
            z = fresh("z")
            core = fresh(f"{name}__core")
            nodes[z] = Node(z, "input", (), None, node.err)
            nodes[core] = Node(core, node.kind, node.fanins)
            nodes[name] = Node(name, "xor", (core, z))
            z_names.append(z)
        elif node.err is not None:
            nodes[name] = Node(name, node.kind, node.fanins)
        else:
            nodes[name] = node
    return Circuit(nodes, circuit.outputs), tuple(z_names)


def tseitin(circuit: Circuit,
            var_of: Mapping[str, int] | None = None
            ) -> tuple[tuple[tuple[int, ...], ...], dict[str, int]]:
    """Definition clauses for every gate.

    Inputs and black boxes contribute variables but no clauses; each gate
    variable is constrained to equal its function of the fanin variables,
    so for any assignment of the non-gate variables exactly one extension
    satisfies the result.  Error rates must be distilled away first."""
    if var_of is None:
        var_of = {name: k + 1 for k, name in enumerate(circuit.nodes)}
    else:
        var_of = dict(var_of)
        missing = [n for n in circuit.nodes if n not in var_of]
        if missing:
            raise InvalidFormula(f"no variable for node {missing[0]!r}")
    if circuit.has_errors():
        raise ErrorRatesPresent("distill the circuit before clause translation")
    clauses: list[tuple[int, ...]] = []

    def emit(*lits: int) -> None:
        clauses.append(tuple(dict.fromkeys(lits)))

    for name, node in circuit.nodes.items():
        if node.kind not in GATE_KINDS:
            continue
        v = var_of[name]
        a = [var_of[f] for f in node.fanins]
        if node.kind == "and":
            for x in a:
                emit(-v, x)
            emit(v, *(-x for x in a))
        elif node.kind == "or":
            for x in a:
                emit(v, -x)
            emit(-v, *a)
        elif node.kind == "not":
            emit(-v, -a[0])
            emit(v, a[0])
        elif node.kind == "xor":
            emit(-v, a[0], a[1])
            emit(-v, -a[0], -a[1])
            emit(v, -a[0], a[1])
            emit(v, a[0], -a[1])
        elif node.kind == "nand":
            for x in a:
                emit(v, x)
            emit(-v, *(-x for x in a))
        else:
            for x in a:
                emit(-v, -x)
            emit(v, *a)
    return tuple(clauses), var_of


def _cone(circuit: Circuit, name: str) -> tuple[str, ...]:
    seen: set[str] = set()

    def visit(n: str) -> None:
        if n in seen:
            return
        seen.add(n)
        for f in circuit.nodes[n].fanins:
            visit(f)

    visit(name)
    return tuple(n for n in circuit.nodes if n in seen)


# ----------------------------------------------------------- the encoders

@dataclass(eq=False)
class CircuitEncoding:
    """Formula comparing a reference against a partial implementation.

    ``harness`` is the combined comparison circuit; ``directory`` maps its
    node names to formula variables.  ``x``/``z``/``y`` list the primary
    inputs, the noise inputs, and the universally copied intermediate
    wires; ``bbs`` pairs each black box name with its harness node."""

    formula: DssatFormula
    harness: Circuit
    directory: dict[str, int]
    x: tuple[str, ...]
    z: tuple[str, ...]
    y: tuple[str, ...]
    bbs: tuple[tuple[str, str], ...]
    ok: str
    kind: str


def _translate(ns: str, shared: set[str], circuit: Circuit) -> Callable[[str], str]:
    def go(name: str) -> str:
        if circuit.nodes[name].kind == "input" and name in shared:
            return name
        return f"{ns}:{name}"
    return go


def encode_probabilistic_partial(spec: Circuit, impl: Circuit) -> CircuitEncoding:
    """Best-case agreement of a noisy partial design with a reference,
    over biased inputs.  Input probabilities default to one half; gate
    errors become fresh noise inputs."""
    return _encode(spec, impl, probabilistic=True)


def encode_approx_partial(spec: Circuit, impl: Circuit) -> CircuitEncoding:
    """Best-case agreement of a noise-free partial design with a
    reference.  Same construction without the noise block: error rates
    are rejected, input probabilities default to one half."""
    return _encode(spec, impl, probabilistic=False)


def _encode(spec: Circuit, impl: Circuit, *, probabilistic: bool) -> CircuitEncoding:
    for node in spec.nodes.values():
        if node.kind == "bb":
            raise UnsupportedGate(
                f"black box {node.name!r} inside the reference circuit")
    if not probabilistic and (spec.has_errors() or impl.has_errors()):
        raise ErrorRatesPresent("error rates have no uniform-counting reading")
    if len(spec.outputs) != len(impl.outputs):
        raise InvalidFormula(
            f"{len(spec.outputs)} reference outputs vs {len(impl.outputs)}")
    x_names = spec.inputs()
    if set(x_names) != set(impl.inputs()):
        odd = set(x_names) ^ set(impl.inputs())
        raise SharedInputMismatch(f"inputs not shared: {sorted(odd)}")
    probs: dict[str, float] = {}
    for x in x_names:
        ps, pi = spec.nodes[x].prob, impl.nodes[x].prob
        if ps is not None and pi is not None and abs(ps - pi) > 1e-12:
            raise SharedInputMismatch(f"input {x!r} carries two probabilities")
        probs[x] = ps if ps is not None else pi if pi is not None else 0.5

    if probabilistic:
        impl_d, z_impl = distill(impl)
        spec_d, z_spec = distill(spec)
    else:
        impl_d, z_impl, spec_d, z_spec = impl, (), spec, ()
    shared = set(x_names)
    t_impl = _translate("impl", shared, impl_d)
    t_spec = _translate("spec", shared, spec_d)

    y_names: list[str] = []
    for bb in impl_d.black_boxes():
        for dep in impl_d.nodes[bb].fanins:
            if impl_d.nodes[dep].kind == "input" or dep in y_names:
                continue
            for c in _cone(impl_d, dep):
                if impl_d.nodes[c].kind == "bb":
                    raise CyclicBlackBox(
                        f"dependency {dep!r} of {bb!r} reaches black box {c!r}")
            y_names.append(dep)
    y_names.sort(key=list(impl_d.nodes).index)

    def hadd(nodes: dict[str, Node], node: Node) -> str:
        if node.name in nodes:
            raise InvalidFormula(f"name collision at {node.name!r}")
        nodes[node.name] = node
        return node.name

    h: dict[str, Node] = {}
    for x in x_names:
        hadd(h, Node(x, "input", (), None, probs[x]))
    for z in z_impl:
        hadd(h, Node(t_impl(z), "input", (), None, impl_d.nodes[z].prob))
    for z in z_spec:
        hadd(h, Node(t_spec(z), "input", (), None, spec_d.nodes[z].prob))
    for y in y_names:
        hadd(h, Node(t_impl(y), "input"))
    for bb in impl_d.black_boxes():
        deps = tuple(t_impl(d) for d in impl_d.nodes[bb].fanins)
        hadd(h, Node(t_impl(bb), "bb", deps))
    y_set = set(y_names)
    for name, node in impl_d.nodes.items():
        if node.kind in ("input", "bb") or name in y_set:
            continue
        hadd(h, Node(t_impl(name), node.kind, tuple(map(t_impl, node.fanins))))
    for name, node in spec_d.nodes.items():
        if node.kind == "input":
            continue
        hadd(h, Node(t_spec(name), node.kind, tuple(map(t_spec, node.fanins))))

    # Fresh copies of the observed wires, recomputed from scratch so the
    # driven values exist even while the universal copies roam free.
    chk_set: set[str] = set()
    for y in y_names:
        chk_set.update(_cone(impl_d, y))

    def t_chk(name: str) -> str:
        if impl_d.nodes[name].kind == "input":
            return t_impl(name)
        return f"chk:{name}"

    for name in impl_d.nodes:
        if name in chk_set and impl_d.nodes[name].kind != "input":
            node = impl_d.nodes[name]
            hadd(h, Node(t_chk(name), node.kind, tuple(map(t_chk, node.fanins))))
    eqs = []
    for y in y_names:
        w = hadd(h, Node(f"::w:{y}", "xor", (t_impl(y), t_chk(y))))
        eqs.append(hadd(h, Node(f"::eq:{y}", "not", (w,))))
    agrees = []
    for k, (so, io) in enumerate(zip(spec.outputs, impl.outputs)):
        w = hadd(h, Node(f"::xo{k}", "xor", (t_impl(io), t_spec(so))))
        agrees.append(hadd(h, Node(f"::ag{k}", "not", (w,))))
    agree = hadd(h, Node("::agree", "and", tuple(agrees)))
    if y_names:
        ante = hadd(h, Node("::ante", "and", tuple(eqs)))
        nante = hadd(h, Node("::nante", "not", (ante,)))
        ok = hadd(h, Node("::ok", "or", (nante, agree)))
    else:
        ok = agree
    harness = Circuit(h, (ok,))

    var_of = {name: k + 1 for k, name in enumerate(h)}
    xz = [*x_names, *(t_impl(z) for z in z_impl), *(t_spec(z) for z in z_spec)]
    ys = [t_impl(y) for y in y_names]
    ctx = tuple(var_of[n] for n in (*xz, *ys))
    prefix = []
    for name in xz:
        prefix.append(random_var(var_of[name], h[name].prob))
    for name in ys:
        prefix.append(universal_var(var_of[name]))
    for name, node in h.items():
        if node.kind == "bb":
            prefix.append(exist_var(var_of[name],
                                    tuple(var_of[f] for f in node.fanins)))
        elif node.kind != "input":
            prefix.append(exist_var(var_of[name], ctx))
    prefix.sort(key=lambda v: v.vid)
    clauses, _ = tseitin(harness, var_of)
    formula = build_formula(prefix, Matrix.cnf(clauses + ((var_of[ok],),)))
    return CircuitEncoding(
        formula, harness, var_of, tuple(x_names),
        tuple(t_impl(z) for z in z_impl) + tuple(t_spec(z) for z in z_spec),
        tuple(ys), tuple((bb, t_impl(bb)) for bb in impl_d.black_boxes()),
        ok, "probabilistic" if probabilistic else "approx")


def complete_tables(enc: CircuitEncoding,
                    bb_tables: Mapping[str, Sequence[int]] | None = None
                    ) -> SkolemSet:
    """Extend black box tables to all existentials.

    Gate variables are functionally determined, so their tables come from
    simulating the harness once per context row; any other choice would
    falsify a definition clause and could only lower the value."""
    bb_tables = dict(bb_tables or {})
    f = enc.formula
    tables: dict[int, tuple[int, ...]] = {}
    sim_tables: dict[str, Sequence[int]] = {}
    for orig, hname in enc.bbs:
        if orig not in bb_tables:
            raise SkolemMismatch(f"no table for black box {orig!r}")
        node = enc.harness.nodes[hname]
        table = tuple(int(b) for b in bb_tables[orig])
        if len(table) != 1 << len(node.fanins) or any(b not in (0, 1) for b in table):
            raise SkolemMismatch(f"bad table for black box {orig!r}")
        sim_tables[hname] = table
        v = f.var(enc.directory[hname])
        out = [0] * len(table)
        for idx in range(len(table)):
            asg = {enc.directory[dep]: (idx >> j) & 1
                   for j, dep in enumerate(node.fanins)}
            out[table_index(f, v.deps, asg)] = table[idx]
        tables[v.vid] = tuple(out)

    ctx = [*enc.x, *enc.z, *enc.y]
    gates = [n for n, node in enc.harness.nodes.items()
             if node.kind not in ("input", "bb")]
    cols = {name: [0] * (1 << len(ctx)) for name in gates}
    for r in range(1 << len(ctx)):
        values = {name: (r >> j) & 1 for j, name in enumerate(ctx)}
        sim = simulate(enc.harness, values, sim_tables)
        for name in gates:
            cols[name][r] = sim[name]
    for name in gates:
        vid = enc.directory[name]
        assert f.var(vid).deps == tuple(enc.directory[n] for n in ctx)
        tables[vid] = tuple(cols[name])
    return SkolemSet(tables)


def encoding_value(enc: CircuitEncoding,
                   bb_tables: Mapping[str, Sequence[int]] | None = None) -> float:
    return evaluate(enc.formula, complete_tables(enc, bb_tables),
                    max_random_vars=None)


def _all_tables(n_deps: int):
    return product((0, 1), repeat=1 << n_deps)


def solve_partial_design(enc: CircuitEncoding, *, max_candidates: int = 1 << 16
                         ) -> tuple[float, dict[str, tuple[int, ...]]]:
    """Maximize the encoded value over black box tables by exhaustive
    search; the first table vector in lexicographic order wins ties."""
    sizes = [len(enc.harness.nodes[hname].fanins) for _, hname in enc.bbs]
    total = 1
    for k in sizes:
        total <<= 1 << k
        if total > max_candidates:
            raise SearchSpaceTooLarge(
                f"more than {max_candidates} table combinations")
    best = -1.0
    best_tables: dict[str, tuple[int, ...]] = {}
    for cand in product(*(_all_tables(k) for k in sizes)):
        tabs = {orig: cand[i] for i, (orig, _) in enumerate(enc.bbs)}
        value = encoding_value(enc, tabs)
        if value > best:
            best, best_tables = value, tabs
    return best, best_tables


def agreement_probability(spec: Circuit, impl: Circuit,
                          bb_tables: Mapping[str, Sequence[int]] | None = None,
                          *, approx: bool = False) -> float:
    """Exact agreement probability by direct enumeration of inputs and
    noise, with no formula machinery involved.  With ``approx`` error
    rates are rejected instead of distilled."""
    if approx:
        if spec.has_errors() or impl.has_errors():
            raise ErrorRatesPresent("error rates have no noise-free reading")
        spec_d, impl_d = spec, impl
        noise: list[tuple[str, str, float]] = []
    else:
        spec_d, z_spec = distill(spec)
        impl_d, z_impl = distill(impl)
        noise = [("impl", z, impl_d.nodes[z].prob) for z in z_impl]
        noise += [("spec", z, spec_d.nodes[z].prob) for z in z_spec]
    xs = spec.inputs()
    if set(xs) != set(impl.inputs()):
        raise SharedInputMismatch(f"inputs not shared: "
                                  f"{sorted(set(xs) ^ set(impl.inputs()))}")
    total = 0.0
    for row in product((0, 1), repeat=len(xs) + len(noise)):
        values = dict(zip(xs, row))
        w = 1.0
        for name, v in values.items():
            p = spec.nodes[name].prob
            if p is None:
                p = impl.nodes[name].prob
            p = 0.5 if p is None else p
            w *= p if v else 1.0 - p
        sv = dict(values)
        iv = dict(values)
        for (side, z, p), v in zip(noise, row[len(xs):]):
            (iv if side == "impl" else sv)[z] = v
            w *= p if v else 1.0 - p
        if w == 0.0:
            continue
        sim_s = simulate(spec_d, sv)
        sim_i = simulate(impl_d, iv, bb_tables)
        if all(sim_s[a] == sim_i[b]
               for a, b in zip(spec.outputs, impl.outputs)):
            total += w
    return total


def best_completion_bruteforce(spec: Circuit, impl: Circuit, *,
                               max_candidates: int = 1 << 16,
                               approx: bool = False
                               ) -> tuple[float, dict[str, tuple[int, ...]]]:
    """Reference maximizer over black box tables using simulation only."""
    bbs = impl.black_boxes()
    sizes = [len(impl.nodes[b].fanins) for b in bbs]
    total = 1
    for k in sizes:
        total <<= 1 << k
        if total > max_candidates:
            raise SearchSpaceTooLarge(
                f"more than {max_candidates} table combinations")
    best = -1.0
    best_tables: dict[str, tuple[int, ...]] = {}
    for cand in product(*(_all_tables(k) for k in sizes)):
        tabs = dict(zip(bbs, cand))
        value = agreement_probability(spec, impl, tabs, approx=approx)
        if value > best:
            best, best_tables = value, tabs
    return best, best_tables
