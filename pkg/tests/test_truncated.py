import random

import pytest
from hypothesis import given, settings, strategies as st

from twistkit.errors import (DegreeOutOfRange, DegreeTooLarge,
                             NotGeneratedInDegreeOne)
from twistkit.presentation import builtin_corpus, parse_presentation
from twistkit.truncated import (TruncatedAlgebraModel, build_truncation,
                                check_associativity, hilbert_function,
                                presentation_completion)


def test_polynomial_hilbert():
    assert hilbert_function(builtin_corpus("polynomial", 2), 6) == [1, 2, 3, 4, 5, 6, 7]
    assert hilbert_function(builtin_corpus("polynomial", 3), 5) == [1, 3, 6, 10, 15, 21]


def test_free_algebra_hilbert():
    p = parse_presentation("algebra F over Q { generators: x:1, y:1; }")
    assert hilbert_function(p, 5) == [1, 2, 4, 8, 16, 32]


def test_commutative_reduce():
    m = build_truncation(builtin_corpus("polynomial", 2), 4)
    alg = m.algebra
    assert m.reduce(alg.parse("y*x")) == alg.parse("x*y")
    assert m.reduce(alg.parse("y*x*y - x*y^2")).is_zero
    assert m.reduce(alg.parse("y*x^2*y")) == alg.parse("x^2*y^2")


def test_quantum_plane_reduce():
    m = build_truncation(builtin_corpus("quantum_plane"), 4)
    alg = m.algebra
    q = m.field.gen("q")
    assert m.reduce(alg.parse("y*x")) == alg.parse("-q*x*y")
    # frozen from the dense rref oracle
    assert m.reduce(alg.parse("y*x^2")) == alg.gen("x") ** 2 * alg.gen("y") * (q ** 2)
    assert m.reduce(alg.parse("y*x*y")) == alg.parse("x*y^2").scale(-q)
    assert m.hilbert == [1, 2, 3, 4, 5]


def test_oq_m2_reduction_rules():
    m = build_truncation(builtin_corpus("oq_m", 2), 4)
    alg = m.algebra
    expect = {
        "x12*x11": "q*x11*x12",
        "x21*x11": "q*x11*x21",
        "x21*x12": "x12*x21",
        "x22*x11": "x11*x22 - (q - q^-1)*x12*x21",
        "x22*x12": "q*x12*x22",
        "x22*x21": "q*x21*x22",
    }
    for lhs, rhs in expect.items():
        assert m.reduce(alg.parse(lhs)) == alg.parse(rhs), lhs
    assert m.hilbert == [1, 4, 10, 20, 35]


def test_quadratic_algebra_dims_match_oracle():
    assert hilbert_function(builtin_corpus("zhang_running_example"), 4) == [1, 4, 10, 20, 35]
    assert hilbert_function(builtin_corpus("a_rho"), 4) == [1, 4, 10, 20, 35]


def test_degree_one_relation():
    p = parse_presentation("algebra L over Q { generators: x:1, y:1; relations: y - x; }")
    m = build_truncation(p, 4)
    assert m.hilbert == [1, 1, 1, 1, 1]
    assert m.reduce(m.algebra.parse("y")) == m.algebra.parse("x")


def test_mixed_generator_degrees():
    p = parse_presentation(
        "algebra M over Q { generators: x:1, w:2; relations: w*x - x*w; }")
    m = build_truncation(p, 6)
    assert m.hilbert == [1, 1, 2, 2, 3, 3, 4]
    assert m.reduce(m.algebra.parse("w*x^2*w")) == m.algebra.parse("x^2*w^2")


def test_degree_bounds():
    m = build_truncation(builtin_corpus("polynomial", 2), 3)
    with pytest.raises(DegreeOutOfRange):
        m.reduce(m.algebra.parse("x^4"))
    with pytest.raises(DegreeOutOfRange):
        m.dim(4)
    with pytest.raises(DegreeTooLarge):
        build_truncation(builtin_corpus("polynomial", 2), 50)


def test_oracle_interface():
    m = build_truncation(builtin_corpus("quantum_plane"), 4)
    assert m.dim(2) == 3
    assert m.basis_label(2, 0) == "x^2"
    assert m.degree_one_names() == ["x", "y"]
    # y * x in the oracle: indexes 1, 0 in degree 1
    v = m.mult(1, 1, 1, 0)
    q = m.field.gen("q")
    assert v == {1: -q}


def test_check_associativity_clean():
    m = build_truncation(builtin_corpus("oq_m", 2), 4)
    rep = check_associativity(m, 1, 1, 2)
    assert rep["ok"] and rep["checked"] == 4 * 4 * 10 and not rep["failures"]


def test_serialization_roundtrip():
    m = build_truncation(builtin_corpus("quantum_plane"), 3)
    text = m.to_json()
    m2 = TruncatedAlgebraModel.from_json(text)
    assert m2.hilbert == m.hilbert
    assert m2.reduce(m2.algebra.parse("y*x")) == m2.algebra.parse("-q*x*y")


def test_completion_recovers_quantum_plane():
    m = build_truncation(builtin_corpus("quantum_plane"), 4)
    pres, report = presentation_completion(m, 4)
    assert report["new_relations_by_degree"] == {2: 1}
    assert len(pres.relations) == 1
    r = pres.relations[0]
    q = m.field.gen("q")
    # y*x + q*x*y up to the stored monic normalization
    assert r.coeff((1, 0)) == 1 and r.coeff((0, 1)) == q


def test_completion_recovers_polynomial3():
    m = build_truncation(builtin_corpus("polynomial", 3), 4)
    pres, report = presentation_completion(m, 4)
    assert report["new_relations_by_degree"] == {2: 3}
    assert hilbert_function(pres, 4) == m.hilbert


def test_completion_flags_missing_degree_one_generation():
    # k[x] with x in degree 1 plus a degree-2 generator nothing produces
    p = parse_presentation("algebra G over Q { generators: x:1, w:2; relations: w*x - x*w; }")
    m = build_truncation(p, 4)
    with pytest.raises(NotGeneratedInDegreeOne) as exc:
        presentation_completion(m, 4)
    assert exc.value.degree == 2


def test_hilbert_invariant_under_relation_shuffle():
    base = builtin_corpus("zhang_running_example")
    dims = hilbert_function(base, 3)
    rng = random.Random(7)
    for _ in range(3):
        rels = list(base.relations)
        rng.shuffle(rels)
        mixed = [r.scale(base.field.gen("a") ** rng.randint(0, 2)) for r in rels]
        shuffled = type(base)("shuffled", base.algebra, mixed)
        assert hilbert_function(shuffled, 3) == dims


@st.composite
def quantum_plane_polys(draw):
    m = _QP
    alg = m.algebra
    p = alg.zero()
    for _ in range(draw(st.integers(0, 3))):
        d = draw(st.integers(0, 2))
        w = draw(st.sampled_from(alg.words_of_degree(d)))
        p = p + alg.monomial(w, draw(st.integers(-3, 3)))
    return p


_QP = build_truncation(builtin_corpus("quantum_plane"), 4)


@given(quantum_plane_polys(), quantum_plane_polys())
@settings(max_examples=60, deadline=None)
def test_reduce_is_idempotent_and_multiplicative(p, q):
    m = _QP
    rp = m.reduce(p)
    assert m.reduce(rp) == rp
    assert m.reduce(p * q) == m.reduce(m.reduce(p) * m.reduce(q))
