"""Free algebra on graded generators.

Words are tuples of generator indices into the algebra's generator
list.  Polynomials are sparse dicts word -> nonzero FieldElement.  The
monomial order everywhere is deglex: compare total degree first, then
the index tuples lexicographically in the declared generator order.
"""

from .errors import AlphabetMismatch, LengthMismatch, NonLinearGenerators, ParseError
from .scalars import FieldElement


class GeneratorSymbol:
    __slots__ = ("name", "degree")

    def __init__(self, name, degree=1):
        if not (isinstance(degree, int) and degree >= 1):
            raise ParseError(f"generator {name!r} needs a positive integer degree, got {degree!r}")
        if not (isinstance(name, str) and name.isidentifier()):
            raise ParseError(f"bad generator name {name!r}")
        self.name = name
        self.degree = degree

    def __repr__(self):
        return f"{self.name}:{self.degree}"

    def __eq__(self, other):
        return (isinstance(other, GeneratorSymbol)
                and self.name == other.name and self.degree == other.degree)

    def __hash__(self):
        return hash((self.name, self.degree))


class FreeAlgebra:
    """Generator list plus scalar field; owns word bookkeeping."""

    def __init__(self, field, gens):
        self.field = field
        self.gens = tuple(gens)
        names = [g.name for g in self.gens]
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate generator names in {names}")
        clash = set(names) & set(field.params)
        if clash:
            raise ParseError(f"generator names {sorted(clash)} collide with scalar parameters")
        self.index = {g.name: i for i, g in enumerate(self.gens)}
        self._words_cache = {}

    def __repr__(self):
        return "FreeAlgebra({} over {!r})".format(", ".join(map(repr, self.gens)), self.field)

    def __eq__(self, other):
        return (isinstance(other, FreeAlgebra)
                and self.field is other.field and self.gens == other.gens)

    def __hash__(self):
        return hash((id(self.field), self.gens))

    def word_degree(self, word):
        return sum(self.gens[i].degree for i in word)

    def deglex_key(self, word):
        return (self.word_degree(word), word)

    def words_of_degree(self, d):
        """All words of total degree d, ascending deglex order."""
        if d < 0:
            return []
        if d not in self._words_cache:
            if d == 0:
                out = [()]
            else:
                out = []
                for i, g in enumerate(self.gens):
                    if g.degree <= d:
                        out.extend((i,) + w for w in self.words_of_degree(d - g.degree))
            self._words_cache[d] = out
        return self._words_cache[d]

    def format_word(self, word):
        if not word:
            return "1"
        parts = []
        run_gen, run_len = word[0], 1
        for i in word[1:]:
            if i == run_gen:
                run_len += 1
            else:
                parts.append(self._run(run_gen, run_len))
                run_gen, run_len = i, 1
        parts.append(self._run(run_gen, run_len))
        return "*".join(parts)

    def _run(self, i, k):
        name = self.gens[i].name
        return name if k == 1 else f"{name}^{k}"

    # polynomial constructors

    def zero(self):
        return NcPoly(self, {})

    def one(self):
        return NcPoly(self, {(): self.field.one})

    def gen(self, name):
        return NcPoly(self, {(self.index[name],): self.field.one})

    def scalar(self, value):
        c = self.field.element(value)
        return NcPoly(self, {(): c} if not c.is_zero else {})

    def monomial(self, word, coeff=None):
        c = self.field.one if coeff is None else self.field.element(coeff)
        return NcPoly(self, {tuple(word): c} if not c.is_zero else {})

    def parse(self, text):
        return parse_ncpoly(text, self)


def _merge_term(terms, word, c):
    v = terms.get(word)
    v = c if v is None else v + c
    if v.is_zero:
        terms.pop(word, None)
    else:
        terms[word] = v


class NcPoly:
    """Sparse noncommutative polynomial over a FreeAlgebra."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra, terms):
        self.algebra = algebra
        self.terms = terms

    def _check(self, other):
        if other.algebra != self.algebra:
            raise AlphabetMismatch(
                f"operands live over different alphabets: {self.algebra!r} vs {other.algebra!r}")

    @property
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, NcPoly):
            return self.algebra == other.algebra and self.terms == other.terms
        if isinstance(other, int) and other == 0:
            return not self.terms
        return NotImplemented

    def copy(self):
        return NcPoly(self.algebra, dict(self.terms))

    def __add__(self, other):
        if isinstance(other, NcPoly):
            self._check(other)
            out = dict(self.terms)
            for w, c in other.terms.items():
                _merge_term(out, w, c)
            return NcPoly(self.algebra, out)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, NcPoly):
            self._check(other)
            out = dict(self.terms)
            for w, c in other.terms.items():
                _merge_term(out, w, -c)
            return NcPoly(self.algebra, out)
        return NotImplemented

    def __neg__(self):
        return NcPoly(self.algebra, {w: -c for w, c in self.terms.items()})

    def scale(self, c):
        c = self.algebra.field.element(c)
        if c.is_zero:
            return self.algebra.zero()
        return NcPoly(self.algebra, {w: c * v for w, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, NcPoly):
            self._check(other)
            out = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    _merge_term(out, w1 + w2, c1 * c2)
            return NcPoly(self.algebra, out)
        if isinstance(other, (int, FieldElement)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, FieldElement)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n):
        if not (isinstance(n, int) and n >= 0):
            return NotImplemented
        out = self.algebra.one()
        for _ in range(n):
            out = out * self
        return out

    # degree structure

    def degrees(self):
        return sorted({self.algebra.word_degree(w) for w in self.terms})

    def is_homogeneous(self):
        return len(self.degrees()) <= 1

    def degree(self):
        """Degree of a homogeneous polynomial (None for zero)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError(f"not homogeneous: degrees {ds}")
        return ds[0] if ds else None

    def homogeneous_part(self, d):
        alg = self.algebra
        return NcPoly(alg, {w: c for w, c in self.terms.items() if alg.word_degree(w) == d})

    def leading_word(self):
        if not self.terms:
            return None
        return max(self.terms, key=self.algebra.deglex_key)

    def monic(self):
        """Scale so the deglex-leading coefficient is 1."""
        lw = self.leading_word()
        if lw is None:
            return self
        return self.scale(self.terms[lw].inv())

    def coeff(self, word):
        return self.terms.get(tuple(word), self.algebra.field.zero)

    def __str__(self):
        if not self.terms:
            return "0"
        alg = self.algebra
        words = sorted(self.terms, key=alg.deglex_key, reverse=True)
        pieces = []
        for w in words:
            c = self.terms[w]
            cs = str(c)
            if cs.startswith("-"):
                sign, cs = "-", str(-c)
            else:
                sign = "+"
            if any(ch in cs for ch in " /"):
                cs = f"({cs})"
            if not w:
                body = cs
            elif cs == "1":
                body = alg.format_word(w)
            else:
                body = f"{cs}*{alg.format_word(w)}"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"<{self}>"


def apply_tensor_map(maps, p):
    """Apply f1 (x) ... (x) fd letterwise to every word of p.

    Each map is a callable taking a generator index and returning a
    linear NcPoly (a combination of single generators).  Every word of p
    must have length len(maps).
    """
    alg = p.algebra
    out = {}
    for word, c in p.terms.items():
        if len(word) != len(maps):
            raise LengthMismatch(
                f"word {alg.format_word(word)} has length {len(word)}, expected {len(maps)}")
        partial = {(): c}
        for pos, j in enumerate(word):
            img = maps[pos](j)
            for w in img.terms:
                if len(w) != 1:
                    raise NonLinearGenerators(
                        f"factor {pos} sends generator {alg.gens[j].name} to "
                        f"{img}, which is not linear in the generators")
            nxt = {}
            for w0, c0 in partial.items():
                for (g,), cg in img.terms.items():
                    _merge_term(nxt, w0 + (g,), c0 * cg)
            partial = nxt
        for w, cw in partial.items():
            _merge_term(out, w, cw)
    return NcPoly(alg, out)


# polynomial text grammar:
#   expr   := ['-'] term (('+'|'-') term)*
#   term   := power (('*'|'/') power)*
#   power  := atom ['^' ['-'] NUMBER]
#   atom   := NUMBER | IDENT | '(' expr ')'
# IDENTs name either generators or scalar parameters; '/' needs a
# scalar, word-free divisor.

_SYMS = ("+", "-", "*", "/", "^", "(", ")")


def tokenize_poly(text, line_base=1):
    """Tokens as (kind, value, line, col); kind in NUM, NAME, OP."""
    toks = []
    line, col = line_base, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(("NUM", int(text[i:j]), line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("NAME", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _SYMS:
            toks.append(("OP", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    return toks


class _PolyParser:
    def __init__(self, toks, algebra):
        self.toks = toks
        self.pos = 0
        self.alg = algebra

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input",
                             *(self.toks[-1][2:] if self.toks else (None, None)))
        self.pos += 1
        return t

    def at_op(self, *ops):
        t = self.peek()
        return t is not None and t[0] == "OP" and t[1] in ops

    def expr(self):
        negate = False
        while self.at_op("-"):
            self.take()
            negate = not negate
        acc = self.term()
        if negate:
            acc = -acc
        while self.at_op("+", "-"):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.power()
        while self.at_op("*", "/"):
            _, op, line, col = self.take()
            rhs = self.power()
            if op == "*":
                acc = acc * rhs
            else:
                if any(w for w in rhs.terms):
                    raise ParseError("division by a non-scalar", line, col)
                c = rhs.terms.get((), self.alg.field.zero)
                if c.is_zero:
                    raise ParseError("division by zero", line, col)
                acc = acc.scale(c.inv())
        return acc

    def power(self):
        base = self.atom()
        if self.at_op("^"):
            _, _, line, col = self.take()
            neg = False
            if self.at_op("-"):
                self.take()
                neg = True
            t = self.take()
            if t[0] != "NUM":
                raise ParseError("exponent must be an integer", t[2], t[3])
            n = t[1]
            if neg:
                if any(w for w in base.terms):
                    raise ParseError("negative power of a non-scalar", line, col)
                c = base.terms.get((), self.alg.field.zero)
                if c.is_zero:
                    raise ParseError("negative power of zero", line, col)
                return self.alg.scalar(c.inv() ** n)
            return base ** n
        return base

    def atom(self):
        t = self.take()
        kind, val, line, col = t
        if kind == "NUM":
            return self.alg.scalar(val)
        if kind == "NAME":
            if val in self.alg.index:
                return self.alg.gen(val)
            if val in self.alg.field.params:
                return NcPoly(self.alg, {(): self.alg.field.gen(val)})
            raise ParseError(f"unknown name {val!r} (not a generator or parameter)", line, col)
        if kind == "OP" and val == "(":
            inner = self.expr()
            close = self.take()
            if close[:2] != ("OP", ")"):
                raise ParseError("expected ')'", close[2], close[3])
            return inner
        raise ParseError(f"unexpected token {val!r}", line, col)


def parse_ncpoly(text, algebra, line_base=1):
    toks = tokenize_poly(text, line_base)
    if not toks:
        raise ParseError("empty polynomial")
    p = _PolyParser(toks, algebra)
    out = p.expr()
    t = p.peek()
    if t is not None:
        raise ParseError(f"trailing input starting at {t[1]!r}", t[2], t[3])
    return out
