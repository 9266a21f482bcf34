"""Exact toolkit for stochastic Boolean satisfiability with explicit
dependency sets, plus the reductions that make it useful: quantified
formulas with randomized branching, decision-process encodings, and
partial-design circuit comparison."""

from .circuits import (
    Circuit,
    CircuitEncoding,
    Node,
    agreement_probability,
    best_completion_bruteforce,
    complete_tables,
    distill,
    encode_approx_partial,
    encode_probabilistic_partial,
    encoding_value,
    parse_circuit,
    print_circuit,
    simulate,
    solve_partial_design,
    tseitin,
)
from .decpomdp import (
    DecPomdpModel,
    EncodingArtifact,
    JointPolicy,
    all_policies,
    best_policy_via_encoding,
    descale,
    encode_decpomdp,
    encoding_to_sdimacs,
    number_tuple,
    optimal_policy_bruteforce,
    parse_decpomdp,
    parse_policy,
    policy_encoding_value,
    policy_space_size,
    policy_to_skolem,
    policy_value,
    print_decpomdp,
    print_policy,
    scaled_policy_value,
    scaled_reward,
    tuple_number,
)
from .errors import DssatError, ResourceCapError
from .evaluator import (
    eval_extended,
    eval_skolem,
    eval_ssat_prefix,
    evaluate,
)
from .formula import (
    DssatFormula,
    Implication,
    Matrix,
    SkolemSet,
    Variable,
    build_formula,
    exist_var,
    finite_exist_var,
    finite_random_var,
    random_var,
    table_index,
    table_size,
    universal_var,
)
from .reductions import (
    BoolMapping,
    DqbfFormula,
    booleanize,
    chain_decode,
    chain_encode,
    dqbf_check,
    dqbf_from_formula,
    dqbf_to_dssat,
)
from .sdimacs import (
    parse_sdimacs,
    parse_skolem,
    print_sdimacs,
    print_skolem,
)
from .solver import (
    DecideResult,
    SolveResult,
    decide_dssat,
    solve_dssat_exact,
    solve_ssat,
)

__version__ = "0.1.0"

__all__ = [
    "BoolMapping",
    "Circuit",
    "CircuitEncoding",
    "DecPomdpModel",
    "DecideResult",
    "DqbfFormula",
    "DssatError",
    "DssatFormula",
    "EncodingArtifact",
    "Implication",
    "JointPolicy",
    "Matrix",
    "Node",
    "ResourceCapError",
    "SkolemSet",
    "SolveResult",
    "Variable",
    "agreement_probability",
    "all_policies",
    "best_completion_bruteforce",
    "best_policy_via_encoding",
    "booleanize",
    "build_formula",
    "chain_decode",
    "chain_encode",
    "complete_tables",
    "decide_dssat",
    "descale",
    "distill",
    "dqbf_check",
    "dqbf_from_formula",
    "dqbf_to_dssat",
    "encode_approx_partial",
    "encode_decpomdp",
    "encode_probabilistic_partial",
    "encoding_to_sdimacs",
    "encoding_value",
    "eval_extended",
    "eval_skolem",
    "eval_ssat_prefix",
    "evaluate",
    "exist_var",
    "finite_exist_var",
    "finite_random_var",
    "number_tuple",
    "optimal_policy_bruteforce",
    "parse_circuit",
    "parse_decpomdp",
    "parse_policy",
    "parse_sdimacs",
    "parse_skolem",
    "policy_encoding_value",
    "policy_space_size",
    "policy_to_skolem",
    "policy_value",
    "print_circuit",
    "print_decpomdp",
    "print_policy",
    "print_sdimacs",
    "print_skolem",
    "random_var",
    "scaled_policy_value",
    "scaled_reward",
    "simulate",
    "solve_dssat_exact",
    "solve_partial_design",
    "solve_ssat",
    "table_index",
    "table_size",
    "tseitin",
    "tuple_number",
    "universal_var",
]
