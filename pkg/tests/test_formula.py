import pytest

from dssat import (
    Implication,
    SkolemSet,
    build_formula,
    exist_var,
    finite_exist_var,
    finite_random_var,
    random_var,
    table_index,
    table_size,
    universal_var,
)
from dssat.errors import (
    BadProbability,
    DuplicateQuantifier,
    IllegalDependency,
    InvalidFormula,
    OutOfRange,
    SkolemMismatch,
)
from dssat.formula import Matrix, eval_matrix, weight


def linear(p1=0.5, p2=0.5):
    return build_formula(
        [random_var(1, p1), random_var(2, p2), exist_var(3, (1, 2))],
        Matrix.cnf(((1, 2, 3),)))


def test_table_index_first_dep_least_significant():
    f = build_formula(
        [random_var(1, 0.5), finite_random_var(2, (0.2, 0.3, 0.5)),
         finite_exist_var(3, 4, (1, 2))],
        Matrix.top())
    deps = f.var(3).deps
    assert deps == (1, 2)
    assert table_size(f, deps) == 6
    # value tuple (1, 2) over sizes (2, 3) numbers to 1 + 2*2 = 5
    assert table_index(f, deps, {1: 1, 2: 2}) == 5
    assert table_index(f, deps, {1: 0, 2: 0}) == 0
    assert table_index(f, deps, {1: 1, 2: 0}) == 1
    assert table_index(f, deps, {1: 0, 2: 1}) == 2


def test_deps_normalized_to_prefix_order():
    f = build_formula(
        [random_var(1, 0.5), random_var(2, 0.5), exist_var(3, (2, 1))],
        Matrix.top())
    assert f.var(3).deps == (1, 2)


def test_build_rejects_sparse_ids():
    with pytest.raises(InvalidFormula):
        build_formula([random_var(1, 0.5), random_var(3, 0.5)], Matrix.top())


def test_build_rejects_duplicates():
    with pytest.raises(DuplicateQuantifier):
        build_formula([random_var(1, 0.5), random_var(1, 0.5)], Matrix.top())


def test_build_rejects_bad_probability():
    with pytest.raises(BadProbability):
        build_formula([random_var(1, 1.5)], Matrix.top())
    with pytest.raises(BadProbability):
        build_formula([finite_random_var(1, (0.5, 0.4))], Matrix.top())


def test_build_rejects_dependency_on_existential():
    with pytest.raises(IllegalDependency):
        build_formula(
            [random_var(1, 0.5), exist_var(2), exist_var(3, (2,))],
            Matrix.top())


def test_build_rejects_clause_on_finite_domain_var():
    with pytest.raises(InvalidFormula):
        build_formula(
            [finite_random_var(1, (0.5, 0.2, 0.3))],
            Matrix.cnf(((1,),)))


def test_build_rejects_atom_out_of_domain():
    imp = Implication((), (1, 3))
    with pytest.raises(OutOfRange):
        build_formula(
            [finite_random_var(1, (0.5, 0.2, 0.3))],
            Matrix.implied((imp,)))


def test_weight_and_eval_matrix():
    f = linear(0.25, 0.5)
    assert weight(f, {1: 1, 2: 0, 3: 1}) == pytest.approx(0.25 * 0.5)
    assert weight(f, {1: 0, 2: 1, 3: 0}) == pytest.approx(0.75 * 0.5)
    assert eval_matrix(f, {1: 0, 2: 0, 3: 1})
    assert not eval_matrix(f, {1: 0, 2: 0, 3: 0})


def test_skolem_validate_catches_shape_errors():
    f = linear()
    SkolemSet({3: (0, 1, 1, 0)}).validate(f)
    with pytest.raises(SkolemMismatch):
        SkolemSet({3: (0, 1)}).validate(f)
    with pytest.raises(SkolemMismatch):
        SkolemSet({3: (0, 1, 2, 0)}).validate(f)
    with pytest.raises(SkolemMismatch):
        SkolemSet({}).validate(f)


def test_skolem_output_indexing():
    f = linear()
    sk = SkolemSet({3: (0, 1, 1, 0)})
    # index = x1 + 2*x2
    assert sk.output(f, 3, {1: 1, 2: 0}) == 1
    assert sk.output(f, 3, {1: 0, 2: 1}) == 1
    assert sk.output(f, 3, {1: 1, 2: 1}) == 0


def test_matrix_normalizations():
    assert Matrix.bottom().kind == "cnf"
    assert Matrix.bottom().clauses == ((),)
    with pytest.raises(InvalidFormula):
        Matrix.cnf(())
    with pytest.raises(InvalidFormula):
        Matrix.implied(())


def test_universals_are_boolean_only():
    v = universal_var(4)
    f = build_formula(
        [random_var(1, 0.5), random_var(2, 0.5), exist_var(3, (1, 2)),
         v],
        Matrix.top())
    assert f.extended
    assert f.var(4).values == 2
