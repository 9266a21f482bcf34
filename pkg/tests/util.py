"""Shared oracles and random-instance generators.

Every oracle here recomputes values by direct definition-level
enumeration, independent of the factored, residual-rewriting, or
search-based code under test.
"""

from itertools import product

import numpy as np

from dssat import (
    DecPomdpModel,
    SkolemSet,
    build_formula,
    exist_var,
    random_var,
    table_size,
    universal_var,
)
from dssat.formula import Matrix, eval_matrix


def brute_value(formula, skolems) -> float:
    """Quantifier semantics by plain recursion over an assignment dict."""
    if not isinstance(skolems, SkolemSet):
        skolems = SkolemSet.of(skolems)
    order = formula.prefix

    def go(i, asg):
        if i == len(order):
            return 1.0 if eval_matrix(formula, asg) else 0.0
        v = order[i]
        if v.kind == "random":
            return sum(v.value_prob(k) * go(i + 1, {**asg, v.vid: k})
                       for k in range(v.values))
        if v.kind == "universal":
            return min(go(i + 1, {**asg, v.vid: k}) for k in (0, 1))
        return go(i + 1, {**asg, v.vid: skolems.output(formula, v.vid, asg)})

    return go(0, {})


def all_skolem_sets(formula):
    """Every Skolem set, tables ascending lexicographically."""
    evars = formula.existentials
    spaces = [
        list(product(range(v.values), repeat=table_size(formula, v.deps)))
        for v in evars
    ]
    for combo in product(*spaces):
        yield SkolemSet({v.vid: t for v, t in zip(evars, combo)})


def brute_best(formula) -> float:
    return max(brute_value(formula, sk) for sk in all_skolem_sets(formula))


def dqbf_true(dqbf) -> bool:
    """Classical DQBF truth: some Skolem set satisfies the matrix under
    every universal assignment."""
    unis = [v.vid for v in dqbf.prefix if v.kind == "universal"]
    evars = [v for v in dqbf.prefix if v.kind == "exists"]
    clauses = dqbf.matrix.clauses if dqbf.matrix.kind == "cnf" else ()
    if dqbf.matrix.kind == "top":
        return True

    for combo in product(*[product((0, 1), repeat=1 << len(v.deps))
                           for v in evars]):
        ok = True
        for ubits in product((0, 1), repeat=len(unis)):
            asg = dict(zip(unis, ubits))
            for v, table in zip(evars, combo):
                idx = sum(asg[d] << j for j, d in enumerate(v.deps))
                asg[v.vid] = table[idx]
            if not all(any((l > 0) == bool(asg[abs(l)]) for l in cl)
                       for cl in clauses):
                ok = False
                break
        if ok:
            return True
    return False


# ------------------------------------------------------------- generators

def random_plain_formula(rng, max_vars=12):
    """Random prefix of random/existential variables with a random CNF."""
    n = int(rng.integers(2, max_vars + 1))
    prefix = []
    randoms = []
    for vid in range(1, n + 1):
        if vid <= 2 or rng.random() < 0.6:
            prefix.append(random_var(vid, float(rng.random())))
            randoms.append(vid)
        else:
            k = int(rng.integers(0, min(len(randoms), 4) + 1))
            deps = tuple(sorted(rng.choice(randoms, size=k, replace=False).tolist())) if k else ()
            prefix.append(exist_var(vid, deps))
    m = int(rng.integers(1, 2 * n + 1))
    clauses = []
    for _ in range(m):
        width = int(rng.integers(1, 4))
        vids = rng.choice(range(1, n + 1), size=min(width, n), replace=False)
        clauses.append(tuple(int(v) if rng.random() < 0.5 else -int(v)
                             for v in vids))
    return build_formula(prefix, Matrix.cnf(tuple(clauses)))


def random_extended_formula(rng, max_vars=10):
    """Like random_plain_formula but with universal variables mixed in."""
    n = int(rng.integers(2, max_vars + 1))
    prefix = []
    outer = []
    for vid in range(1, n + 1):
        r = rng.random()
        if vid <= 2 or r < 0.45:
            prefix.append(random_var(vid, float(rng.random())))
            outer.append(vid)
        elif r < 0.7:
            prefix.append(universal_var(vid))
            outer.append(vid)
        else:
            k = int(rng.integers(0, min(len(outer), 4) + 1))
            deps = tuple(sorted(rng.choice(outer, size=k, replace=False).tolist())) if k else ()
            prefix.append(exist_var(vid, deps))
    m = int(rng.integers(1, 2 * n + 1))
    clauses = []
    for _ in range(m):
        width = int(rng.integers(1, 4))
        vids = rng.choice(range(1, n + 1), size=min(width, n), replace=False)
        clauses.append(tuple(int(v) if rng.random() < 0.5 else -int(v)
                             for v in vids))
    return build_formula(prefix, Matrix.cnf(tuple(clauses)))


def random_small_formula(rng, *, extended=False, max_vars=6, max_table_bits=8):
    """Random formula whose Skolem candidate space fits 2**max_table_bits,
    small enough for exhaustive oracles."""
    n = int(rng.integers(2, max_vars + 1))
    prefix = []
    outer = []
    bits = 0
    for vid in range(1, n + 1):
        r = rng.random()
        if vid > 2 and extended and r < 0.2:
            prefix.append(universal_var(vid))
            outer.append(vid)
        elif vid <= 2 or r < 0.55:
            prefix.append(random_var(vid, float(rng.random())))
            outer.append(vid)
        else:
            k = int(rng.integers(0, min(len(outer), 3) + 1))
            while k > 0 and bits + (1 << k) > max_table_bits:
                k -= 1
            if bits + (1 << k) > max_table_bits:
                prefix.append(random_var(vid, float(rng.random())))
                outer.append(vid)
                continue
            deps = tuple(sorted(rng.choice(outer, size=k, replace=False).tolist())) if k else ()
            bits += 1 << k
            prefix.append(exist_var(vid, deps))
    m = int(rng.integers(1, 2 * n + 1))
    clauses = []
    for _ in range(m):
        width = int(rng.integers(1, 4))
        vids = rng.choice(range(1, n + 1), size=min(width, n), replace=False)
        clauses.append(tuple(int(v) if rng.random() < 0.5 else -int(v)
                             for v in vids))
    return build_formula(prefix, Matrix.cnf(tuple(clauses)))


def random_linear_ssat(rng, max_vars=10, max_table_bits=12):
    """Random/existential prefix where each existential sees everything
    declared before it (the linear-prefix discipline); max_table_bits
    caps the total Skolem candidate space at 2**max_table_bits."""
    n = int(rng.integers(2, max_vars + 1))
    prefix = []
    randoms = []
    table_bits = 0
    for vid in range(1, n + 1):
        if (vid == 1 or rng.random() < 0.55
                or table_bits + (1 << len(randoms)) > max_table_bits):
            prefix.append(random_var(vid, float(rng.random())))
            randoms.append(vid)
        else:
            prefix.append(exist_var(vid, tuple(randoms)))
            table_bits += 1 << len(randoms)
    m = int(rng.integers(1, 2 * n + 1))
    clauses = []
    for _ in range(m):
        width = int(rng.integers(1, 4))
        vids = rng.choice(range(1, n + 1), size=min(width, n), replace=False)
        clauses.append(tuple(int(v) if rng.random() < 0.5 else -int(v)
                             for v in vids))
    return build_formula(prefix, Matrix.cnf(tuple(clauses)))


def random_finite_formula(rng, *, max_fd_vars=3, max_domain=4,
                          max_candidates=256):
    """Random mixed Boolean/finite-domain formula with an implication
    matrix and an exhaustively enumerable Skolem space."""
    from dssat.formula import (
        Implication,
        finite_exist_var,
        finite_random_var,
    )

    prefix = []
    randoms = []
    evars = []
    candidates = 1
    fd_left = int(rng.integers(1, max_fd_vars + 1))
    n = int(rng.integers(2, 6))
    for vid in range(1, n + 1):
        r = rng.random()
        if vid == 1 or r < 0.4 or not randoms:
            if fd_left and rng.random() < 0.7:
                k = int(rng.integers(2, max_domain + 1))
                prefix.append(finite_random_var(vid, dist_of(rng, k)))
                fd_left -= 1
            else:
                prefix.append(random_var(vid, float(rng.random())))
            randoms.append(vid)
        else:
            kdom = int(rng.integers(2, max_domain + 1)) if fd_left else 2
            nd = int(rng.integers(0, min(len(randoms), 2) + 1))
            deps = tuple(sorted(
                rng.choice(randoms, size=nd, replace=False).tolist())) if nd else ()
            size = 1
            for d in deps:
                size *= next(v for v in prefix if v.vid == d).values
            while deps and candidates * kdom ** size > max_candidates:
                deps = deps[:-1]
                size = 1
                for d in deps:
                    size *= next(v for v in prefix if v.vid == d).values
            if candidates * kdom ** size > max_candidates:
                kdom = 2
            if candidates * kdom ** size > max_candidates:
                prefix.append(random_var(vid, float(rng.random())))
                randoms.append(vid)
                continue
            candidates *= kdom ** size
            if kdom > 2:
                fd_left = max(0, fd_left - 1)
                prefix.append(finite_exist_var(vid, kdom, deps))
            else:
                prefix.append(exist_var(vid, deps))
            evars.append(vid)

    by_id = {v.vid: v for v in prefix}
    imps = []
    for _ in range(int(rng.integers(1, 2 * n + 1))):
        na = int(rng.integers(0, 3))
        vids = rng.choice(range(1, n + 1), size=min(na + 1, n), replace=False)
        atoms = [(int(v), int(rng.integers(0, by_id[int(v)].values)))
                 for v in vids]
        imps.append(Implication(tuple(atoms[1:]), atoms[0]))
    return build_formula(prefix, Matrix.implied(tuple(imps)))


def dist_of(rng, k):
    v = rng.random(k) + 0.05
    v = v / v.sum()
    return tuple(float(x) for x in v)


def random_dqbf(rng, *, max_universals=4, max_exist=3):
    """Random DQBF with 3-CNF matrix; candidate spaces stay enumerable."""
    from dssat import dqbf_from_formula

    nu = int(rng.integers(1, max_universals + 1))
    ne = int(rng.integers(1, max_exist + 1))
    prefix = [universal_var(v) for v in range(1, nu + 1)]
    unis = list(range(1, nu + 1))
    table_bits = 0
    for vid in range(nu + 1, nu + ne + 1):
        k = int(rng.integers(0, nu + 1))
        while k > 0 and table_bits + (1 << k) > 12:
            k -= 1
        deps = tuple(sorted(rng.choice(unis, size=k, replace=False).tolist())) if k else ()
        table_bits += 1 << k
        prefix.append(exist_var(vid, deps))
    n = nu + ne
    m = int(rng.integers(2, 3 * n + 1))
    clauses = []
    for _ in range(m):
        vids = rng.choice(range(1, n + 1), size=min(3, n), replace=False)
        clauses.append(tuple(int(v) if rng.random() < 0.5 else -int(v)
                             for v in vids))
    formula = build_formula(prefix, Matrix.cnf(tuple(clauses)))
    return dqbf_from_formula(formula)


def random_circuit(rng, *, n_inputs=3, n_gates=4, errors=False, probs=False):
    """Random gate list over the full gate alphabet; single output."""
    from dssat import Circuit, Node

    kinds = ("and", "or", "not", "xor", "nand", "nor")
    nodes = {}
    names = []
    for i in range(n_inputs):
        p = float(rng.random()) if probs and rng.random() < 0.5 else None
        nodes[f"x{i}"] = Node(f"x{i}", "input", (), None, p)
        names.append(f"x{i}")
    for g in range(n_gates):
        kind = kinds[int(rng.integers(0, len(kinds)))]
        arity = 1 if kind == "not" else 2
        fi = tuple(str(f) for f in rng.choice(names, size=arity, replace=True))
        err = None
        if errors and rng.random() < 0.6:
            err = float(rng.uniform(0.05, 0.3))
        nodes[f"g{g}"] = Node(f"g{g}", kind, fi, err, None)
        names.append(f"g{g}")
    return Circuit(nodes, (f"g{n_gates - 1}",))


def make_partial(rng, spec):
    """Replace one random gate of a bb-free circuit with a black box over
    the gate's fanins (deduplicated), keeping everything else intact."""
    from dssat import Circuit, Node

    gates = [n for n, v in spec.nodes.items()
             if v.kind not in ("input", "bb")]
    victim = gates[int(rng.integers(0, len(gates)))]
    nodes = {}
    for name, node in spec.nodes.items():
        if name == victim:
            deps = tuple(dict.fromkeys(node.fanins))
            nodes[name] = Node(name, "bb", deps)
        else:
            nodes[name] = node
    return Circuit(nodes, spec.outputs)


def random_decpomdp(rng, *, max_agents=2, max_states=3, max_actions=2,
                    max_obs=2, max_horizon=3):
    def dist(k):
        v = rng.random(k) + 0.05
        return v / v.sum()

    n = int(rng.integers(1, max_agents + 1))
    S = int(rng.integers(1, max_states + 1))
    h = int(rng.integers(1, max_horizon + 1))
    asize = tuple(int(rng.integers(1, max_actions + 1)) for _ in range(n))
    osize = tuple(int(rng.integers(1, max_obs + 1)) for _ in range(n))
    JA = int(np.prod(asize))
    JO = int(np.prod(osize))
    trans = np.stack([np.stack([dist(S) for _ in range(JA)]) for _ in range(S)])
    obs = np.stack([np.stack([dist(JO) for _ in range(JA)]) for _ in range(S)])
    reward = np.round(rng.normal(size=(S, JA)) * 5, 3)
    return DecPomdpModel(
        tuple(f"s{i}" for i in range(S)),
        tuple(tuple(f"a{j}" for j in range(asize[i])) for i in range(n)),
        tuple(tuple(f"o{j}" for j in range(osize[i])) for i in range(n)),
        h, dist(S), trans, obs, reward)
