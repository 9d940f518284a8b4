import pytest
from hypothesis import given, strategies as st

from twistkit.errors import (AlphabetMismatch, LengthMismatch,
                             NonLinearGenerators, ParseError)
from twistkit.freealg import (FreeAlgebra, GeneratorSymbol, NcPoly,
                              apply_tensor_map, parse_ncpoly)
from twistkit.scalars import scalar_field

F = scalar_field(("a", "q"))
ALG = FreeAlgebra(F, [GeneratorSymbol("x"), GeneratorSymbol("y")])
X = ALG.gen("x")
Y = ALG.gen("y")
Q = F.gen("q")


def test_word_enumeration_is_deglex_ascending():
    ws = ALG.words_of_degree(2)
    assert ws == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(ALG.words_of_degree(5)) == 32


def test_word_enumeration_with_mixed_degrees():
    alg = FreeAlgebra(F, [GeneratorSymbol("u", 1), GeneratorSymbol("w", 2)])
    ws = alg.words_of_degree(3)
    # u^3, u*w, w*u
    assert ws == [(0, 0, 0), (0, 1), (1, 0)]
    assert alg.word_degree((1, 1)) == 4


def test_multiplication_concatenates():
    p = (X + Y) * (X - Y)
    assert p.coeff((0, 0)) == 1
    assert p.coeff((0, 1)) == -1
    assert p.coeff((1, 0)) == 1
    assert p.coeff((1, 1)) == -1


def test_alphabet_mismatch():
    other = FreeAlgebra(F, [GeneratorSymbol("z")])
    with pytest.raises(AlphabetMismatch):
        _ = X * other.gen("z")


def test_leading_word_and_monic():
    p = ALG.parse("2*y*x + x*y + x")
    assert p.leading_word() == (1, 0)
    m = p.monic()
    assert m.coeff((1, 0)) == 1
    assert m.coeff((0, 1)) == Q / (2 * Q)  # 1/2


def test_parse_display_roundtrip():
    for text in ["q*x*y + y*x", "x^2 - (q^2 - 1)/q*x*y", "-x + 2/3*y",
                 "a*x*y - y*x + x^2"]:
        p = ALG.parse(text)
        assert ALG.parse(str(p)) == p


def test_parse_precedence_and_powers():
    assert ALG.parse("q^-1*x") == X.scale(Q.inv())
    assert ALG.parse("(x + y)^2") == (X + Y) * (X + Y)
    assert ALG.parse("x*y/2") == (X * Y).scale(F.from_rational("1/2"))
    assert ALG.parse("2 - q") == ALG.scalar(2 - Q)


def test_parse_errors_carry_location():
    with pytest.raises(ParseError):
        ALG.parse("x + z")
    with pytest.raises(ParseError):
        ALG.parse("x / y")
    with pytest.raises(ParseError):
        ALG.parse("x ^ y")
    err = None
    try:
        ALG.parse("x +\n* y")
    except ParseError as e:
        err = e
    assert err is not None and err.line == 2


def test_homogeneous_parts():
    p = ALG.parse("x*y + x + 1")
    assert not p.is_homogeneous()
    assert p.homogeneous_part(2) == ALG.parse("x*y")
    assert ALG.parse("x*y - y*x").degree() == 2


def test_apply_tensor_map_swaps_letters():
    swap = lambda j: ALG.gen("y" if j == 0 else "x")
    ident = lambda j: ALG.gen(ALG.gens[j].name)
    p = ALG.parse("x*y")
    q = apply_tensor_map([swap, ident], p)
    assert q == ALG.parse("y*y")
    with pytest.raises(LengthMismatch):
        apply_tensor_map([swap], p)


def test_apply_tensor_map_rejects_nonlinear_images():
    bad = lambda j: ALG.parse("x*y")
    with pytest.raises(NonLinearGenerators):
        apply_tensor_map([bad, bad], ALG.parse("x*y"))


def test_apply_tensor_map_expands_sums():
    to_sum = lambda j: X + Y
    p = apply_tensor_map([to_sum, to_sum], ALG.parse("x*y"))
    assert p == (X + Y) * (X + Y)


words = st.lists(st.integers(min_value=0, max_value=1), min_size=0, max_size=4).map(tuple)
coeffs = st.integers(min_value=-5, max_value=5)


@st.composite
def polys(draw):
    n = draw(st.integers(min_value=0, max_value=4))
    p = ALG.zero()
    for _ in range(n):
        p = p + ALG.monomial(draw(words), draw(coeffs))
    return p


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert p * (q * r) == (p * q) * r
    assert p - p == ALG.zero()


@given(polys())
def test_str_parse_roundtrip(p):
    if p.is_zero:
        return
    assert ALG.parse(str(p)) == p
