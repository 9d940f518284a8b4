"""Graded linear maps on generators, Zhang twists, and twisting systems.

A GradedGeneratorMap sends each generator to a linear combination of
generators of the same degree, so it is determined by one block matrix
per generator degree.  Zhang twists transport relations through inverse
powers of an automorphism, letterwise:

    right twist:  r  ->  (1 (x) phi^-1 (x) ... (x) phi^-(d-1)) r
    left twist:   r  ->  (phi^-(d-1) (x) ... (x) phi^-1 (x) 1) r

for a degree-d relation r.  The transported slice is cross-checked per
degree against an independent route, the kernel of

    w  ->  reduce_A( (1 (x) phi (x) ... (x) phi^(d-1)) w ),

which computes the twisted multiplication of the letters of w directly.
"""

from .errors import (NonDegreeOneGenerators, NonLinearGenerators,
                     NotAutomorphism, ParseError, WindowTooSmall)
from .freealg import NcPoly, apply_tensor_map
from .linalg import Echelon, invert_matrix, kernel_vectors
from .presentation import GradedPresentation, TokenStream, poly_from_tokens, tokenize_dsl
from .truncated import build_truncation


class GradedGeneratorMap:
    """Degreewise linear map on generators, extended to words as an
    algebra endomorphism of the free algebra."""

    def __init__(self, algebra, images):
        self.algebra = algebra
        self.images = {}
        for j, g in enumerate(algebra.gens):
            img = images.get(j)
            if img is None:
                img = algebra.gen(g.name)
            for w in img.terms:
                if len(w) != 1:
                    raise NonLinearGenerators(
                        f"image of {g.name} is {img}, not linear in the generators")
                if algebra.gens[w[0]].degree != g.degree:
                    raise ParseError(
                        f"image of {g.name} uses {algebra.gens[w[0]].name}, "
                        f"which has a different degree")
            self.images[j] = img
        self._powers = {1: self}
        self._inverse = None

    @classmethod
    def identity(cls, algebra):
        return cls(algebra, {})

    @classmethod
    def from_images_by_name(cls, algebra, images):
        return cls(algebra, {algebra.index[n]: p for n, p in images.items()})

    def __repr__(self):
        body = ", ".join(f"{g.name} -> {self.images[j]}"
                         for j, g in enumerate(self.algebra.gens))
        return f"<gen map {body}>"

    def image_of(self, j):
        return self.images[j]

    def gens_by_degree(self):
        out = {}
        for j, g in enumerate(self.algebra.gens):
            out.setdefault(g.degree, []).append(j)
        return out

    def block(self, degree):
        """Matrix of the degree-d block, rows indexed by source generator."""
        local = self.gens_by_degree()[degree]
        pos = {j: i for i, j in enumerate(local)}
        mat = {}
        for i, j in enumerate(local):
            row = {}
            for (g,), c in self.images[j].terms.items():
                row[pos[g]] = c
            mat[i] = row
        return mat, local

    def is_invertible(self):
        try:
            self.inverse()
            return True
        except NotAutomorphism:
            return False

    def inverse(self):
        if self._inverse is None:
            images = {}
            for degree, local in self.gens_by_degree().items():
                mat, local = self.block(degree)
                inv = invert_matrix(mat, len(local))
                if inv is None:
                    raise NotAutomorphism(
                        f"generator block in degree {degree} is singular")
                for i, j in enumerate(local):
                    p = self.algebra.zero()
                    for k, c in inv.get(i, {}).items():
                        p = p + self.algebra.monomial((local[k],), c)
                    images[j] = p
            self._inverse = GradedGeneratorMap(self.algebra, images)
            self._inverse._inverse = self
        return self._inverse

    def apply_linear(self, p):
        """Apply to a linear polynomial."""
        out = self.algebra.zero()
        for (g,), c in p.terms.items():
            out = out + self.images[g].scale(c)
        return out

    def compose(self, inner):
        """self after inner."""
        images = {j: self.apply_linear(inner.images[j]) for j in self.images}
        return GradedGeneratorMap(self.algebra, images)

    def power(self, n):
        if n == 0:
            return GradedGeneratorMap.identity(self.algebra)
        if n < 0:
            return self.inverse().power(-n)
        if n not in self._powers:
            self._powers[n] = self.compose(self.power(n - 1))
        return self._powers[n]

    def apply(self, p):
        """Extend multiplicatively to any polynomial."""
        out = self.algebra.zero()
        for w, c in p.terms.items():
            prod = self.algebra.scalar(c)
            for g in w:
                prod = prod * self.images[g]
            out = out + prod
        return out

    def letter_map(self):
        return lambda j: self.images[j]


def parse_generator_map(text, algebra):
    """Parse the map format:  map theta { x1 -> a*x1; x2 -> x2; }

    Unlisted generators stay fixed.  Returns (name, GradedGeneratorMap).
    """
    ts = TokenStream(tokenize_dsl(text))
    ts.expect("NAME", "map")
    name = ts.expect("NAME")[1]
    ts.expect("OP", "{")
    images = {}
    while not ts.at("OP", "}"):
        gname = ts.expect("NAME")
        if gname[1] not in algebra.index:
            raise ParseError(f"unknown generator {gname[1]!r}", gname[2], gname[3])
        ts.expect("OP", "->")
        toks = ts.split_until({";"})
        ts.expect("OP", ";")
        j = algebra.index[gname[1]]
        if j in images:
            raise ParseError(f"generator {gname[1]!r} mapped twice", gname[2], gname[3])
        images[j] = poly_from_tokens(toks, algebra)
    ts.expect("OP", "}")
    return name, GradedGeneratorMap(algebra, images)


def check_algebra_map(model, gen_map):
    """Does the generator map respect the relations?

    Returns (ok, witness); the witness names the first relation whose
    image has a nonzero normal form.
    """
    for r in model.presentation.relations:
        img = gen_map.apply(r)
        rem = model.reduce(img)
        if not rem.is_zero:
            return False, {"relation": str(r), "image": str(img),
                           "normal_form": str(rem)}
    return True, None


def _require_degree_one(presentation):
    if not presentation.gens_all_degree_one():
        bad = [g.name for g in presentation.gens if g.degree != 1]
        raise NonDegreeOneGenerators(
            f"generators {bad} have degree > 1; twist transport needs "
            f"degree-one generators")


def zhang_twist(presentation, gen_map, side="right"):
    """Presentation of the Zhang twist of A by an automorphism.

    The twisted product is r * s = r phi^{|r|}(s) on the right,
    r * s = phi^{|s|}(r) s on the left.  Relations are transported by
    letterwise inverse powers and the result is cross-checked against
    the kernel of the twisted evaluation map in every relation degree.
    """
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    _require_degree_one(presentation)
    phi = gen_map
    phi.inverse()  # raises NotAutomorphism on a singular block
    degrees = sorted({r.degree() for r in presentation.relations})
    model = build_truncation(presentation, max(degrees, default=1))
    ok, witness = check_algebra_map(model, phi)
    if not ok:
        raise NotAutomorphism(
            f"map does not respect relation {witness['relation']}: image "
            f"reduces to {witness['normal_form']}")

    alg = presentation.algebra
    twisted = []
    for r in presentation.relations:
        d = r.degree()
        if side == "right":
            maps = [phi.power(-k).letter_map() for k in range(d)]
        else:
            maps = [phi.power(-(d - 1 - k)).letter_map() for k in range(d)]
        twisted.append(apply_tensor_map(maps, r))

    # dual route: in each relation degree, the transported ideal slice
    # must match the kernel of the twisted evaluation on words
    for d in degrees:
        words_desc = list(reversed(alg.words_of_degree(d)))
        col = {w: i for i, w in enumerate(words_desc)}
        transported = Echelon()
        if side == "right":
            maps = [phi.power(-k).letter_map() for k in range(d)]
            fwd = [phi.power(k).letter_map() for k in range(d)]
        else:
            maps = [phi.power(-(d - 1 - k)).letter_map() for k in range(d)]
            fwd = [phi.power(d - 1 - k).letter_map() for k in range(d)]
        for row in model._ech[d].rows.values():
            p = model._poly_of_row(row, d)
            q = apply_tensor_map(maps, p)
            transported.insert({col[w]: c for w, c in q.terms.items()})
        images = []
        for w in words_desc:
            ev = model.reduce(apply_tensor_map(fwd, alg.monomial(w)))
            images.append(model.vector_of(ev, d))
        kernel = Echelon()
        kernel.insert_many(kernel_vectors(images))
        assert transported.equals(kernel), (
            f"twist transport disagrees with the evaluation kernel in degree {d}")

    name = f"{presentation.name}_{side}_twist"
    return GradedPresentation(name, alg, twisted)


class TwistingSystem:
    """Maps tau_n for n in the window [-N, N].

    The member maps act on algebra elements by applying the generator
    matrix to each letter of a normal-form representative and reducing
    again.  Systems whose members act that way on classes include all
    powers of an automorphism; general systems are a strict subclass of
    what the compatibility condition below allows.
    """

    def __init__(self, maps, window):
        self.window = window
        self._maps = dict(maps)
        for n in range(-window, window + 1):
            if n not in self._maps:
                raise WindowTooSmall(f"twisting system has no map at index {n}")

    @classmethod
    def from_power(cls, gen_map, window):
        maps = {n: gen_map.power(n) for n in range(-window, window + 1)}
        return cls(maps, window)

    @classmethod
    def identity(cls, algebra, window):
        one = GradedGeneratorMap.identity(algebra)
        return cls({n: one for n in range(-window, window + 1)}, window)

    def tau(self, n):
        if n not in self._maps:
            raise WindowTooSmall(
                f"index {n} is outside the window [-{self.window}, {self.window}]")
        return self._maps[n]


def verify_twisting_system(model, system, max_degree=None):
    """Check tau_n(b tau_m(c)) = tau_n(b) tau_{n+m}(c) for |b| = m.

    Pairs run over the normal basis up to max_degree; n runs over every
    window index for which n + m is still inside the window.  The window
    must reach max_degree - 1, which is what the twisted multiplication
    model needs, otherwise WindowTooSmall.
    """
    D = model.max_degree if max_degree is None else max_degree
    N = system.window
    if N < D - 1:
        raise WindowTooSmall(
            f"window {N} cannot support products up to degree {D}; need {D - 1}")
    failures = []
    checked = 0
    for n in range(-N, N + 1):
        for m in range(1, D):
            if not (-N <= n + m <= N):
                continue
            for l in range(1, D - m + 1):
                tau_n = system.tau(n)
                tau_m = system.tau(m)
                tau_nm = system.tau(n + m)
                for b in model.normal_words(m):
                    pb = model.algebra.monomial(b)
                    for c in model.normal_words(l):
                        pc = model.algebra.monomial(c)
                        inner = model.reduce(pb * _letterwise(tau_m, pc))
                        lhs = model.reduce(_letterwise(tau_n, inner))
                        rhs = model.reduce(
                            _letterwise(tau_n, pb) * _letterwise(tau_nm, pc))
                        checked += 1
                        if lhs != rhs:
                            failures.append({
                                "n": n, "m": m,
                                "b": model.algebra.format_word(b),
                                "c": model.algebra.format_word(c),
                                "left": str(lhs), "right": str(rhs)})
    # member maps must be bijective
    for n in range(-N, N + 1):
        if not system.tau(n).is_invertible():
            failures.append({"n": n, "problem": "singular generator block"})
    return {"ok": not failures, "checked": checked, "window": N,
            "max_degree": D, "failures": failures}


def _letterwise(gen_map, p):
    """Apply a generator map to every letter of every word."""
    out = p.algebra.zero()
    for w, c in p.terms.items():
        q = apply_tensor_map([gen_map.letter_map()] * len(w),
                             p.algebra.monomial(w))
        out = out + q.scale(c)
    return out


class TwistedModel:
    """Multiplication table of a twist, over the base model's basis.

    right:  u * v = reduce( u tau_{|u|}(v) )
    left:   u * v = reduce( tau_{|v|}(u) v )
    """

    def __init__(self, model, system, side="right"):
        if side not in ("right", "left"):
            raise ValueError(f"side must be 'right' or 'left', got {side!r}")
        if system.window < model.max_degree - 1:
            raise WindowTooSmall(
                f"window {system.window} cannot support products up to "
                f"degree {model.max_degree}")
        self.base = model
        self.system = system
        self.side = side
        self.field = model.field
        self.max_degree = model.max_degree
        self._cache = {}

    def dim(self, d):
        return self.base.dim(d)

    def normal_words(self, d):
        return self.base.normal_words(d)

    def basis_label(self, d, i):
        return self.base.basis_label(d, i)

    def degree_one_names(self):
        return self.base.degree_one_names()

    def mult(self, d1, i1, d2, i2):
        key = (d1, i1, d2, i2)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        alg = self.base.algebra
        u = alg.monomial(self.base.normal_words(d1)[i1])
        v = alg.monomial(self.base.normal_words(d2)[i2])
        if self.side == "right":
            p = u * _letterwise(self.system.tau(d1), v)
        else:
            p = _letterwise(self.system.tau(d2), u) * v
        vec = self.base.vector_of(p, d1 + d2)
        self._cache[key] = vec
        return vec


def twisted_multiplication_model(model, twist, side="right"):
    """Model of the twisted product; twist is a TwistingSystem or a
    GradedGeneratorMap (taken as its system of powers)."""
    if isinstance(twist, GradedGeneratorMap):
        twist = TwistingSystem.from_power(twist, max(model.max_degree - 1, 1))
    return TwistedModel(model, twist, side)


def left_right_twist_isomorphism_check(presentation, gen_map, max_degree=4):
    """Check that a |-> phi^{-|a|}(a) turns the right twist by phi into
    the left twist by phi^{-1}, degree by degree up to max_degree."""
    _require_degree_one(presentation)
    phi = gen_map
    phi.inverse()  # raises NotAutomorphism early on a singular block
    model = build_truncation(presentation, max_degree)
    ok, witness = check_algebra_map(model, phi)
    if not ok:
        raise NotAutomorphism(
            f"map does not respect relation {witness['relation']}: image "
            f"reduces to {witness['normal_form']}")

    def psi(p, d):
        return model.reduce(_letterwise(phi.power(-d), p))

    failures = []
    checked = 0
    alg = model.algebra
    # bijectivity of psi in each degree
    bijective = {}
    for d in range(max_degree + 1):
        cols = {}
        for i, w in enumerate(model.normal_words(d)):
            cols[i] = model.vector_of(psi(alg.monomial(w), d), d)
        bijective[d] = invert_matrix(cols, model.dim(d)) is not None
    for m in range(1, max_degree):
        for l in range(1, max_degree - m + 1):
            for u in model.normal_words(m):
                pu = alg.monomial(u)
                for v in model.normal_words(l):
                    pv = alg.monomial(v)
                    prod_right = model.reduce(pu * _letterwise(phi.power(m), pv))
                    lhs = psi(prod_right, m + l)
                    iu, iv = psi(pu, m), psi(pv, l)
                    rhs = model.reduce(_letterwise(phi.power(-l), iu) * iv)
                    checked += 1
                    if lhs != rhs:
                        failures.append({
                            "u": alg.format_word(u), "v": alg.format_word(v),
                            "left": str(lhs), "right": str(rhs)})
    ok = not failures and all(bijective.values())
    return {"ok": ok, "checked": checked, "bijective_by_degree": bijective,
            "failures": failures}
