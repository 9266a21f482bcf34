"""Finite-horizon Dec-POMDPs: models, policies, and the formula encoder.

The encoder produces a plain finite-domain formula whose value, multiplied
by the scaling factor kappa, equals the expected total scaled reward of the
joint policy carried by the Skolem functions.  Variables are declared
stage-major; for every stage t:

    act[i][t]      existential, |A_i| values, deps cont[0], obs[i][0], ...
    cont[t]        Boolean random, Pr 0.5 (the process-continues flag)
    obs[i][t]      random, uniform over O_i             (t <= h-2 only)
    state[t]       random, start distribution at t=0, uniform after
    reward[t]      random over S x joint actions, scaled-reward distribution
    trans[t][s,a]  random over S, row T(s,a,.)          (t <= h-2 only)
    obsdist[t][s2,a] random over joint obs, row O(s2,a,.)  (t <= h-2 only)

The matrix ties them together per stage: stopping zeroes later variables
and fires the reward constraint once; while running, the transition and
observation variables of the active context must echo the sampled
successor state and joint observation.  Full stages carry exactly
3 + 2(|I| + |S||A|) variables and 2 + |I| + |S||A| + |S|^2|A| + |S||A||O|
clauses; the last stage has 3 + |I| variables and 1 + |S||A| clauses.
Horizon 1 collapses to state, reward, and the first actions with one
clause per (s, a) pair and kappa = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    BadHorizon,
    DomainTooLarge,
    OutOfRange,
    ParseError,
    PartialPolicy,
    PolicyMismatch,
    PolicySpaceTooLarge,
    RowNotNormalized,
)
from .evaluator import eval_skolem
from .formula import (
    DssatFormula,
    Implication,
    Matrix,
    SkolemSet,
    Variable,
    build_formula,
    finite_exist_var,
    finite_random_var,
    random_var,
)
from .reductions import booleanize
from .sdimacs import print_sdimacs

ROW_TOL = 1e-9
MAX_DOMAIN = 1 << 16


def tuple_number(values, sizes) -> int:
    """Mixed-radix number of a tuple, first coordinate least significant."""
    n = 0
    stride = 1
    for q, size in zip(values, sizes, strict=True):
        if not 0 <= q < size:
            raise OutOfRange(f"coordinate {q} outside 0..{size - 1}")
        n += q * stride
        stride *= size
    return n


def number_tuple(n: int, sizes) -> tuple[int, ...]:
    out = []
    for size in sizes:
        out.append(n % size)
        n //= size
    return tuple(out)


@dataclass(eq=False)
class DecPomdpModel:
    """Tables of a finite-horizon Dec-POMDP.

    trans[s, ja, s2] and obs[s2, ja, jo] rows must each sum to 1 or to 0;
    all-zero rows stand for omitted table lines and are rejected only when
    an encoder or evaluator actually needs them.
    """

    states: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    observations: tuple[tuple[str, ...], ...]
    horizon: int
    start: np.ndarray
    trans: np.ndarray
    obs: np.ndarray
    reward: np.ndarray

    def __post_init__(self):
        self.start = np.asarray(self.start, dtype=float)
        self.trans = np.asarray(self.trans, dtype=float)
        self.obs = np.asarray(self.obs, dtype=float)
        self.reward = np.asarray(self.reward, dtype=float)
        if self.horizon < 1:
            raise BadHorizon(f"horizon {self.horizon}")
        if len(self.actions) != len(self.observations) or not self.actions:
            raise PolicyMismatch("action and observation lists must cover the same agents")
        s, ja, jo = self.n_states, self.joint_actions, self.joint_observations
        if self.start.shape != (s,):
            raise RowNotNormalized(f"start vector shape {self.start.shape}")
        if self.trans.shape != (s, ja, s):
            raise RowNotNormalized(f"transition table shape {self.trans.shape}")
        if self.obs.shape != (s, ja, jo):
            raise RowNotNormalized(f"observation table shape {self.obs.shape}")
        if self.reward.shape != (s, ja):
            raise RowNotNormalized(f"reward table shape {self.reward.shape}")
        for arr, what in ((self.start, "start"), (self.trans, "T"), (self.obs, "O")):
            if (arr < -ROW_TOL).any() or (arr > 1 + ROW_TOL).any():
                raise RowNotNormalized(f"{what} entry outside [0, 1]")
        if abs(float(self.start.sum()) - 1.0) > ROW_TOL:
            raise RowNotNormalized(f"start sums to {float(self.start.sum())}")
        for table, what in ((self.trans, "T"), (self.obs, "O")):
            sums = table.sum(axis=2)
            bad = (np.abs(sums - 1.0) > ROW_TOL) & (np.abs(sums) > ROW_TOL)
            if bad.any():
                s_i, ja_i = map(int, np.argwhere(bad)[0])
                raise RowNotNormalized(
                    f"{what} row ({s_i}, joint action {ja_i}) sums to {sums[s_i, ja_i]}")

    @property
    def n_agents(self) -> int:
        return len(self.actions)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def action_sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.actions)

    @property
    def observation_sizes(self) -> tuple[int, ...]:
        return tuple(len(o) for o in self.observations)

    @property
    def joint_actions(self) -> int:
        return math.prod(self.action_sizes)

    @property
    def joint_observations(self) -> int:
        return math.prod(self.observation_sizes)

    def require_rows(self) -> None:
        """Reject the all-zero placeholder rows (needed whenever h > 1)."""
        for table, what in ((self.trans, "T"), (self.obs, "O")):
            sums = table.sum(axis=2)
            if (np.abs(sums - 1.0) > ROW_TOL).any():
                s_i, ja_i = map(int, np.argwhere(np.abs(sums - 1.0) > ROW_TOL)[0])
                raise RowNotNormalized(
                    f"{what} row ({s_i}, joint action {ja_i}) is missing")


# ------------------------------------------------------------- text format

def _segments(tokens: list[str]) -> list[list[str]]:
    out: list[list[str]] = [[]]
    for t in tokens:
        if t == "|":
            out.append([])
        else:
            out[-1].append(t)
    return out


def _names(seg: list[str], no: int) -> tuple[str, ...]:
    if len(seg) == 1 and seg[0].isdigit():
        return tuple(str(k) for k in range(int(seg[0])))
    if not seg:
        raise ParseError(no, "empty name list")
    if len(set(seg)) != len(seg):
        raise ParseError(no, "duplicate name")
    return tuple(seg)


def parse_decpomdp(text: str) -> DecPomdpModel:
    """Parse the line-oriented model format.

    Directives: agents:, states:, actions:, observations: (per-agent name
    lists separated by |, or counts), horizon:, start:, then T/O/R lines
    naming entries by state/action/observation name:

        T: s a_1 .. a_n s' p
        O: s' a_1 .. a_n o_1 .. o_n p
        R: s a_1 .. a_n value

    Omitted T/O entries default to 0.
    """
    head: dict[str, tuple[int, list[str]]] = {}
    body: list[tuple[int, str, list[str]]] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        if not _ or key not in (
                "agents", "states", "actions", "observations", "horizon",
                "start", "T", "O", "R"):
            raise ParseError(no, f"unknown directive {key!r}")
        if key in ("T", "O", "R"):
            body.append((no, key, rest.split()))
        elif key in head:
            raise ParseError(no, f"duplicate {key!r} directive")
        else:
            head[key] = (no, rest.split())
    for need in ("agents", "states", "actions", "observations", "horizon", "start"):
        if need not in head:
            raise ParseError(len(text.splitlines()) + 1, f"missing {need!r} directive")

    no, toks = head["agents"]
    if len(toks) != 1 or not toks[0].isdigit():
        raise ParseError(no, "agents: takes one integer")
    n = int(toks[0])
    states = _names(head["states"][1], head["states"][0])
    actions = tuple(_names(seg, head["actions"][0])
                    for seg in _segments(head["actions"][1]))
    observations = tuple(_names(seg, head["observations"][0])
                         for seg in _segments(head["observations"][1]))
    if len(actions) != n:
        raise ParseError(head["actions"][0], f"expected {n} action lists")
    if len(observations) != n:
        raise ParseError(head["observations"][0], f"expected {n} observation lists")
    no, toks = head["horizon"]
    if len(toks) != 1 or not toks[0].isdigit() or int(toks[0]) < 1:
        raise ParseError(no, "horizon: takes one positive integer")
    horizon = int(toks[0])
    no, toks = head["start"]
    if len(toks) != len(states):
        raise ParseError(no, f"start: expected {len(states)} entries")
    try:
        start = [float(t) for t in toks]
    except ValueError:
        raise ParseError(no, "start: bad number") from None

    s_idx = {name: k for k, name in enumerate(states)}
    a_idx = [{name: k for k, name in enumerate(acts)} for acts in actions]
    o_idx = [{name: k for k, name in enumerate(obss)} for obss in observations]

    def resolve(no: int, token: str, table: dict[str, int], what: str) -> int:
        if token in table:
            return table[token]
        raise ParseError(no, f"unknown {what} {token!r}")

    S, JA = len(states), math.prod(len(a) for a in actions)
    JO = math.prod(len(o) for o in observations)
    trans = np.zeros((S, JA, S))
    obs = np.zeros((S, JA, JO))
    reward = np.zeros((S, JA))
    seen: set[tuple] = set()
    asize = tuple(len(a) for a in actions)
    osize = tuple(len(o) for o in observations)
    for no, key, toks in body:
        want = {"T": 2 + n + 1, "O": 2 + 2 * n, "R": 2 + n}[key]
        if len(toks) != want:
            raise ParseError(no, f"{key}: line needs {want} fields")
        try:
            value = float(toks[-1])
        except ValueError:
            raise ParseError(no, f"{key}: bad number {toks[-1]!r}") from None
        ja = tuple_number(
            [resolve(no, toks[1 + i], a_idx[i], "action") for i in range(n)], asize)
        if key == "T":
            entry = ("T", resolve(no, toks[0], s_idx, "state"), ja,
                     resolve(no, toks[n + 1], s_idx, "state"))
            trans[entry[1], ja, entry[3]] = value
        elif key == "O":
            jo = tuple_number(
                [resolve(no, toks[1 + n + i], o_idx[i], "observation") for i in range(n)],
                osize)
            entry = ("O", resolve(no, toks[0], s_idx, "state"), ja, jo)
            obs[entry[1], ja, jo] = value
        else:
            entry = ("R", resolve(no, toks[0], s_idx, "state"), ja)
            reward[entry[1], ja] = value
        if entry in seen:
            raise ParseError(no, f"duplicate {key} entry")
        seen.add(entry)

    return DecPomdpModel(states, actions, observations, horizon,
                         np.array(start), trans, obs, reward)


def print_decpomdp(model: DecPomdpModel) -> str:
    lines = [
        f"agents: {model.n_agents}",
        "states: " + " ".join(model.states),
        "actions: " + " | ".join(" ".join(a) for a in model.actions),
        "observations: " + " | ".join(" ".join(o) for o in model.observations),
        f"horizon: {model.horizon}",
        "start: " + " ".join(repr(float(p)) for p in model.start),
    ]
    n = model.n_agents
    for s in range(model.n_states):
        for ja in range(model.joint_actions):
            acts = [model.actions[i][a] for i, a in
                    enumerate(number_tuple(ja, model.action_sizes))]
            for s2 in range(model.n_states):
                p = float(model.trans[s, ja, s2])
                if p:
                    lines.append(f"T: {model.states[s]} {' '.join(acts)} "
                                 f"{model.states[s2]} {p!r}")
    for s2 in range(model.n_states):
        for ja in range(model.joint_actions):
            acts = [model.actions[i][a] for i, a in
                    enumerate(number_tuple(ja, model.action_sizes))]
            for jo in range(model.joint_observations):
                p = float(model.obs[s2, ja, jo])
                if p:
                    names = [model.observations[i][o] for i, o in
                             enumerate(number_tuple(jo, model.observation_sizes))]
                    lines.append(f"O: {model.states[s2]} {' '.join(acts)} "
                                 f"{' '.join(names)} {p!r}")
    for s in range(model.n_states):
        for ja in range(model.joint_actions):
            acts = [model.actions[i][a] for i, a in
                    enumerate(number_tuple(ja, model.action_sizes))]
            lines.append(f"R: {model.states[s]} {' '.join(acts)} "
                         f"{float(model.reward[s, ja])!r}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- policies

@dataclass
class JointPolicy:
    """Per-agent deterministic maps from observation histories to actions.

    maps[i] covers every history of length 0..h-1 over agent i's
    observation indices; the empty history picks the first action.
    """

    maps: tuple[dict[tuple[int, ...], int], ...]

    def action(self, agent: int, history: tuple[int, ...]) -> int:
        return self.maps[agent][history]

    def validate(self, model: DecPomdpModel) -> None:
        if len(self.maps) != model.n_agents:
            raise PolicyMismatch(
                f"{len(self.maps)} agent maps for {model.n_agents} agents")
        for i, table in enumerate(self.maps):
            n_obs, n_act = len(model.observations[i]), len(model.actions[i])
            want = set()
            for t in range(model.horizon):
                want.update(product(range(n_obs), repeat=t))
            missing = want - set(table)
            if missing:
                raise PartialPolicy(
                    f"agent {i}: no action for history {sorted(missing)[0]}")
            for hist, act in table.items():
                if hist not in want:
                    raise PolicyMismatch(f"agent {i}: stray history {hist}")
                if not 0 <= act < n_act:
                    raise PolicyMismatch(f"agent {i}: action {act} out of range")


def parse_policy(text: str, model: DecPomdpModel) -> JointPolicy:
    """Lines of the form 'agent : observation names... : action name'."""
    maps: tuple[dict, ...] = tuple({} for _ in range(model.n_agents))
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(":")
        if len(parts) != 3:
            raise ParseError(no, "policy line must have two ':' separators")
        try:
            agent = int(parts[0])
        except ValueError:
            raise ParseError(no, f"bad agent index {parts[0].strip()!r}") from None
        if not 0 <= agent < model.n_agents:
            raise ParseError(no, f"agent {agent} out of range")
        o_idx = {name: k for k, name in enumerate(model.observations[agent])}
        a_idx = {name: k for k, name in enumerate(model.actions[agent])}
        hist = []
        for tok in parts[1].split():
            if tok not in o_idx:
                raise ParseError(no, f"unknown observation {tok!r}")
            hist.append(o_idx[tok])
        act = parts[2].strip()
        if act not in a_idx:
            raise ParseError(no, f"unknown action {act!r}")
        if tuple(hist) in maps[agent]:
            raise ParseError(no, f"duplicate history for agent {agent}")
        maps[agent][tuple(hist)] = a_idx[act]
    policy = JointPolicy(maps)
    policy.validate(model)
    return policy


def print_policy(policy: JointPolicy, model: DecPomdpModel) -> str:
    lines = []
    for i, table in enumerate(policy.maps):
        for hist in sorted(table, key=lambda h: (len(h), h)):
            names = " ".join(model.observations[i][o] for o in hist)
            lines.append(f"{i} : {names} : {model.actions[i][table[hist]]}")
    return "\n".join(lines) + "\n"


def policy_space_size(model: DecPomdpModel) -> int:
    total = 1
    for i in range(model.n_agents):
        histories = sum(len(model.observations[i]) ** t
                        for t in range(model.horizon))
        total *= len(model.actions[i]) ** histories
    return total


def all_policies(model: DecPomdpModel):
    """Every deterministic joint policy, lexicographic over the encoding
    (agents outer, histories by stage then value, actions ascending)."""
    hist_lists = []
    for i in range(model.n_agents):
        hists = []
        for t in range(model.horizon):
            hists.extend(product(range(len(model.observations[i])), repeat=t))
        hist_lists.append(hists)
    per_agent = [product(range(len(model.actions[i])), repeat=len(hist_lists[i]))
                 for i in range(model.n_agents)]
    for choice in product(*per_agent):
        yield JointPolicy(tuple(
            dict(zip(hist_lists[i], choice[i]))
            for i in range(model.n_agents)))


def policy_value(model: DecPomdpModel, policy: JointPolicy,
                 rewards: np.ndarray | None = None, *, validate: bool = True) -> float:
    """Exact expected total reward by recursion over joint histories."""
    if validate:
        policy.validate(model)
    table = model.reward if rewards is None else rewards
    n = model.n_agents
    asize, osize = model.action_sizes, model.observation_sizes
    h, S, JO = model.horizon, model.n_states, model.joint_observations
    empty = tuple(() for _ in range(n))

    def go(t: int, s: int, hists) -> float:
        ja = tuple_number([policy.maps[i][hists[i]] for i in range(n)], asize)
        v = float(table[s, ja])
        if t == h - 1:
            return v
        for s2 in range(S):
            p = float(model.trans[s, ja, s2])
            if p == 0.0:
                continue
            for jo in range(JO):
                q = float(model.obs[s2, ja, jo])
                if q == 0.0:
                    continue
                ot = number_tuple(jo, osize)
                v += p * q * go(t + 1, s2,
                                tuple(hists[i] + (ot[i],) for i in range(n)))
        return v

    return sum(float(model.start[s]) * go(0, s, empty)
               for s in range(S) if model.start[s] != 0.0)


def scaled_reward(model: DecPomdpModel) -> tuple[np.ndarray, float, float]:
    """Normalize rewards into a distribution: r = (rho - min rho)/Z with
    Z the total shifted mass.  All-equal rewards degenerate to uniform
    with Z recorded as 0."""
    m = float(model.reward.min())
    shifted = model.reward - m
    z = float(shifted.sum())
    if z == 0.0:
        r = np.full_like(model.reward, 1.0 / model.reward.size)
    else:
        r = shifted / z
    return r, z, m


def scaled_policy_value(model: DecPomdpModel, policy: JointPolicy) -> float:
    r, _, _ = scaled_reward(model)
    return policy_value(model, policy, rewards=r)


def descale(value_scaled: float, scale: float, offset: float, horizon: int) -> float:
    """Undo the reward normalization on an expected total value."""
    return scale * value_scaled + horizon * offset


def optimal_policy_bruteforce(
        model: DecPomdpModel, *, max_policies: int = 10 ** 6
) -> tuple[JointPolicy, float]:
    """Exhaustive maximizer of policy_value; first policy in enumeration
    order wins ties."""
    space = policy_space_size(model)
    if space > max_policies:
        raise PolicySpaceTooLarge(f"{space} joint policies exceed {max_policies}")
    best: JointPolicy | None = None
    best_value = -math.inf
    for policy in all_policies(model):
        value = policy_value(model, policy, validate=False)
        if value > best_value:
            best, best_value = policy, value
    assert best is not None
    return best, best_value


# ------------------------------------------------------------------ encoder

@dataclass(eq=False)
class EncodingArtifact:
    """Formula plus the bookkeeping needed to read values back."""

    model: DecPomdpModel
    formula: DssatFormula
    kappa: int
    scale: float
    offset: float
    directory: dict[str, int]
    stage_vars: tuple[int, ...]
    stage_clauses: tuple[int, ...]

    def vid(self, name: str) -> int:
        return self.directory[name]

    def descale(self, value_scaled: float) -> float:
        return descale(value_scaled, self.scale, self.offset, self.model.horizon)


def encode_decpomdp(model: DecPomdpModel) -> EncodingArtifact:
    S, JA, JO = model.n_states, model.joint_actions, model.joint_observations
    n, h = model.n_agents, model.horizon
    asize, osize = model.action_sizes, model.observation_sizes
    if max(S, JA, JO, S * JA) > MAX_DOMAIN:
        raise DomainTooLarge(f"domain of {max(S, JA, JO, S * JA)} values")
    r, z, m = scaled_reward(model)
    rdist = [float(r[k % S, k // S]) for k in range(S * JA)]
    if h > 1:
        model.require_rows()

    directory: dict[str, int] = {}
    prefix: list[Variable] = []
    stage_vars: list[int] = []

    def declare(name: str, var_for) -> int:
        vid = len(prefix) + 1
        directory[name] = vid
        prefix.append(var_for(vid))
        return vid

    if h == 1:
        declare("state[0]", lambda v: finite_random_var(v, model.start))
        declare("reward[0]", lambda v: finite_random_var(v, rdist))
        for i in range(n):
            declare(f"act[{i}][0]", lambda v, i=i: finite_exist_var(v, asize[i]))
        stage_vars.append(len(prefix))
        imps = []
        for k in range(S * JA):
            s, ja = k % S, k // S
            acts = tuple((directory[f"act[{i}][0]"], a)
                         for i, a in enumerate(number_tuple(ja, asize)))
            imps.append(Implication(((directory["state[0]"], s),) + acts,
                                    (directory["reward[0]"], k)))
        formula = build_formula(prefix, Matrix.implied(imps))
        return EncodingArtifact(model, formula, 1, z, m, directory,
                                tuple(stage_vars), (len(imps),))

    for t in range(h):
        base = len(prefix)
        for i in range(n):
            deps = tuple(directory[name] for j in range(t)
                         for name in (f"cont[{j}]", f"obs[{i}][{j}]"))
            declare(f"act[{i}][{t}]",
                    lambda v, i=i, deps=deps: finite_exist_var(v, asize[i], deps))
        declare(f"cont[{t}]", lambda v: random_var(v, 0.5))
        if t <= h - 2:
            for i in range(n):
                declare(f"obs[{i}][{t}]",
                        lambda v, i=i: finite_random_var(v, [1.0 / osize[i]] * osize[i]))
        dist = model.start if t == 0 else [1.0 / S] * S
        declare(f"state[{t}]", lambda v, dist=dist: finite_random_var(v, dist))
        declare(f"reward[{t}]", lambda v: finite_random_var(v, rdist))
        if t <= h - 2:
            for k in range(S * JA):
                s, ja = k % S, k // S
                row = [float(p) for p in model.trans[s, ja]]
                declare(f"trans[{t}][{s},{ja}]",
                        lambda v, row=row: finite_random_var(v, row))
            for k in range(S * JA):
                s2, ja = k % S, k // S
                row = [float(p) for p in model.obs[s2, ja]]
                declare(f"obsdist[{t}][{s2},{ja}]",
                        lambda v, row=row: finite_random_var(v, row))
        stage_vars.append(len(prefix) - base)

    imps: list[Implication] = []
    stage_clauses: list[int] = []
    for t in range(h):
        base = len(imps)
        cont = directory[f"cont[{t}]"]
        acts_at = lambda ja, t=t: tuple(
            (directory[f"act[{i}][{t}]"], a)
            for i, a in enumerate(number_tuple(ja, asize)))
        if t <= h - 2:
            # Stopping propagates: observations, the next state, and the
            # next continue flag all collapse to value 0.
            for i in range(n):
                imps.append(Implication(((cont, 0),),
                                        (directory[f"obs[{i}][{t}]"], 0)))
            imps.append(Implication(((cont, 0),), (directory[f"state[{t + 1}]"], 0)))
            imps.append(Implication(((cont, 0),), (directory[f"cont[{t + 1}]"], 0)))
        else:
            imps.append(Implication((), (cont, 0)))
        # The reward variable must echo the (state, joint action) pair of
        # the stage at which the process stops.
        for k in range(S * JA):
            s, ja = k % S, k // S
            ante = ((cont, 0), (directory[f"state[{t}]"], s)) + acts_at(ja)
            if t > 0:
                ante = ((directory[f"cont[{t - 1}]"], 1),) + ante
            imps.append(Implication(ante, (directory[f"reward[{t}]"], k)))
        if t <= h - 2:
            nxt = directory[f"state[{t + 1}]"]
            for k in range(S * JA):
                s, ja = k % S, k // S
                tv = directory[f"trans[{t}][{s},{ja}]"]
                for s2 in range(S):
                    imps.append(Implication(
                        ((cont, 1), (directory[f"state[{t}]"], s)) + acts_at(ja)
                        + ((nxt, s2),),
                        (tv, s2)))
            for k in range(S * JA):
                s2, ja = k % S, k // S
                ov = directory[f"obsdist[{t}][{s2},{ja}]"]
                for jo in range(JO):
                    obs_atoms = tuple((directory[f"obs[{i}][{t}]"], o)
                                      for i, o in enumerate(number_tuple(jo, osize)))
                    imps.append(Implication(
                        ((cont, 1), (nxt, s2)) + acts_at(ja) + obs_atoms,
                        (ov, jo)))
        stage_clauses.append(len(imps) - base)

    formula = build_formula(prefix, Matrix.implied(imps))
    kappa = 2 ** h * (JO * S) ** (h - 1)
    return EncodingArtifact(model, formula, kappa, z, m, directory,
                            tuple(stage_vars), tuple(stage_clauses))


def policy_to_skolem(model: DecPomdpModel, policy: JointPolicy,
                     artifact: EncodingArtifact) -> SkolemSet:
    """Skolem tables whose all-continue rows replay the policy.

    Rows where some continue flag is 0 answer with the action for the
    history truncated at the first stop; those rows carry no weight but a
    fixed rule keeps tables reproducible.
    """
    policy.validate(model)
    osize = model.observation_sizes
    tables: dict[int, tuple[int, ...]] = {}
    for i in range(model.n_agents):
        for t in range(model.horizon):
            vid = artifact.vid(f"act[{i}][{t}]")
            sizes = [x for _ in range(t) for x in (2, osize[i])]
            table = []
            for idx in range(math.prod(sizes)):
                vals = number_tuple(idx, sizes)
                conts, hist = vals[0::2], vals[1::2]
                stop = next((j for j, c in enumerate(conts) if c == 0), t)
                table.append(policy.maps[i][tuple(hist[:stop])])
            tables[vid] = tuple(table)
    return SkolemSet(tables)


def policy_encoding_value(model: DecPomdpModel, policy: JointPolicy,
                          artifact: EncodingArtifact) -> float:
    """kappa times the formula value under the policy's Skolem tables."""
    skolems = policy_to_skolem(model, policy, artifact)
    return artifact.kappa * eval_skolem(artifact.formula, skolems,
                                        max_random_vars=None)


def best_policy_via_encoding(
        model: DecPomdpModel, artifact: EncodingArtifact | None = None,
        *, max_policies: int = 10 ** 5) -> tuple[JointPolicy, float]:
    """Maximize the encoded value over policy-shaped Skolem sets by
    exhaustive search; returns (policy, value) in original reward units,
    directly comparable to optimal_policy_bruteforce."""
    space = policy_space_size(model)
    if space > max_policies:
        raise PolicySpaceTooLarge(f"{space} joint policies exceed {max_policies}")
    if artifact is None:
        artifact = encode_decpomdp(model)
    best: JointPolicy | None = None
    best_value = -math.inf
    for policy in all_policies(model):
        value = policy_encoding_value(model, policy, artifact)
        if value > best_value:
            best, best_value = policy, value
    assert best is not None
    return best, artifact.descale(best_value)


def encoding_to_sdimacs(artifact: EncodingArtifact) -> tuple[str, dict]:
    """Booleanized SDIMACS text plus a sidecar directory: variable names
    to bit ids, kappa, and the descaling pair."""
    mapping = booleanize(artifact.formula)
    sidecar = {
        "horizon": artifact.model.horizon,
        "kappa": artifact.kappa,
        "scale": artifact.scale,
        "offset": artifact.offset,
        "agents": artifact.model.n_agents,
        "states": artifact.model.n_states,
        "joint_actions": artifact.model.joint_actions,
        "joint_observations": artifact.model.joint_observations,
        "variables": {
            name: {
                "kind": artifact.formula.var(vid).kind,
                "domain": artifact.formula.var(vid).values,
                "ids": list(mapping.blocks[vid]),
            }
            for name, vid in artifact.directory.items()
        },
    }
    return print_sdimacs(mapping.target), sidecar
