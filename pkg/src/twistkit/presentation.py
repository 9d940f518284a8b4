"""Graded algebra presentations: the .alg text format and a builtin corpus.

A presentation is a scalar field, a list of graded generators, and a
list of homogeneous relations.  Relations are normalized monic in their
deglex-leading word at construction.
"""

from .errors import InhomogeneousRelation, ParseError, UnknownCorpusEntry
from .freealg import FreeAlgebra, GeneratorSymbol, _PolyParser
from .scalars import scalar_field


class GradedPresentation:
    def __init__(self, name, algebra, relations):
        self.name = name
        self.algebra = algebra
        rels = []
        for r in relations:
            if r.algebra != algebra:
                raise ParseError(f"relation {r} lives over a different alphabet")
            if r.is_zero:
                continue
            if not r.is_homogeneous():
                raise InhomogeneousRelation(
                    f"relation {r} mixes degrees {r.degrees()}")
            if r.degree() == 0:
                raise InhomogeneousRelation(
                    f"relation {r} is a nonzero constant, which collapses the algebra")
            rels.append(r.monic())
        self.relations = rels

    @property
    def field(self):
        return self.algebra.field

    @property
    def gens(self):
        return self.algebra.gens

    def gens_all_degree_one(self):
        return all(g.degree == 1 for g in self.gens)

    def __repr__(self):
        return f"<presentation {self.name}: {len(self.gens)} gens, {len(self.relations)} relations>"

    def to_text(self):
        params = ", ".join(self.field.params)
        lines = [f"algebra {self.name} over Q({params}) {{"]
        gens = ", ".join(f"{g.name}:{g.degree}" for g in self.gens)
        lines.append(f"  generators: {gens};")
        if self.relations:
            body = ",\n    ".join(str(r) for r in self.relations)
            lines.append(f"  relations: {body};")
        lines.append("}")
        return "\n".join(lines)

    def specialize(self, assignments):
        """Substitute rational values for scalar parameters."""
        remaining = tuple(p for p in self.field.params if p not in assignments)
        field2 = scalar_field(remaining)
        alg2 = FreeAlgebra(field2, self.gens)
        rels2 = []
        for r in self.relations:
            p2 = alg2.zero()
            for w, c in r.terms.items():
                p2 = p2 + alg2.monomial(w, c.specialize(assignments))
            if p2:
                rels2.append(p2)
        return GradedPresentation(self.name, alg2, rels2)

    def rename_generators(self, mapping):
        """New presentation with generators renamed by the given dict."""
        gens2 = [GeneratorSymbol(mapping.get(g.name, g.name), g.degree) for g in self.gens]
        alg2 = FreeAlgebra(self.field, gens2)
        rels2 = [type(r)(alg2, dict(r.terms)) for r in self.relations]
        return GradedPresentation(self.name, alg2, rels2)


# .alg tokenization: polynomial tokens plus the structural symbols, with
# '->' kept as a single token for the map and twist formats.

_DSL_SYMS = ("+", "-", "*", "/", "^", "(", ")", "{", "}", ",", ";", ":")


def tokenize_dsl(text):
    toks = []
    line, col = 1, 1
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
        if ch == "-" and i + 1 < len(text) and text[i + 1] == ">":
            toks.append(("OP", "->", line, col))
            i += 2
            col += 2
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
        if ch in _DSL_SYMS:
            toks.append(("OP", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    return toks


class TokenStream:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def done(self):
        return self.pos >= len(self.toks)

    def take(self):
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else ("", "", None, None)
            raise ParseError("unexpected end of input", last[2], last[3])
        self.pos += 1
        return t

    def expect(self, kind, value=None):
        t = self.take()
        if t[0] != kind or (value is not None and t[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {t[1]!r}", t[2], t[3])
        return t

    def at(self, kind, value=None):
        t = self.peek()
        return t is not None and t[0] == kind and (value is None or t[1] == value)

    def split_until(self, stop_values):
        """Consume tokens up to an unnested stop symbol; returns the slice."""
        depth = 0
        out = []
        while True:
            t = self.peek()
            if t is None:
                last = self.toks[-1] if self.toks else ("", "", None, None)
                raise ParseError(f"expected one of {stop_values}", last[2], last[3])
            if t[0] == "OP":
                if t[1] == "(":
                    depth += 1
                elif t[1] == ")":
                    depth -= 1
                elif depth == 0 and t[1] in stop_values:
                    return out
            out.append(self.take())


def poly_from_tokens(toks, algebra):
    if not toks:
        raise ParseError("empty polynomial")
    p = _PolyParser(toks, algebra)
    out = p.expr()
    t = p.peek()
    if t is not None:
        raise ParseError(f"trailing input starting at {t[1]!r}", t[2], t[3])
    return out


def parse_presentation(text):
    """Parse the algebra format:

    algebra A over Q(a, b) {
      generators: u:1, v:1;
      relations: u*v - v*u;
    }
    """
    ts = TokenStream(tokenize_dsl(text))
    ts.expect("NAME", "algebra")
    name = ts.expect("NAME")[1]
    ts.expect("NAME", "over")
    qt = ts.expect("NAME")
    if qt[1] != "Q":
        raise ParseError(f"expected the base field 'Q', found {qt[1]!r}", qt[2], qt[3])
    params = []
    if ts.at("OP", "("):
        ts.take()
        while not ts.at("OP", ")"):
            params.append(ts.expect("NAME")[1])
            if ts.at("OP", ","):
                ts.take()
        ts.expect("OP", ")")
    ts.expect("OP", "{")

    gens = []
    rel_token_groups = []
    while not ts.at("OP", "}"):
        key = ts.expect("NAME")
        ts.expect("OP", ":")
        if key[1] == "generators":
            while True:
                gname = ts.expect("NAME")[1]
                degree = 1
                if ts.at("OP", ":"):
                    ts.take()
                    degree = ts.expect("NUM")[1]
                gens.append(GeneratorSymbol(gname, degree))
                if ts.at("OP", ","):
                    ts.take()
                    continue
                break
            ts.expect("OP", ";")
        elif key[1] == "relations":
            while True:
                group = ts.split_until({",", ";"})
                if group:
                    rel_token_groups.append(group)
                if ts.at("OP", ","):
                    ts.take()
                    continue
                break
            ts.expect("OP", ";")
        else:
            raise ParseError(f"unknown section {key[1]!r}", key[2], key[3])
    ts.expect("OP", "}")
    t = ts.peek()
    if t is not None:
        raise ParseError(f"trailing input starting at {t[1]!r}", t[2], t[3])
    if not gens:
        raise ParseError("presentation declares no generators")

    field = scalar_field(tuple(params))
    algebra = FreeAlgebra(field, gens)
    relations = [poly_from_tokens(g, algebra) for g in rel_token_groups]
    return GradedPresentation(name, algebra, relations)


def parse_presentation_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_presentation(fh.read())


# builtin corpus

def _simple_presentation(name, params, gen_names, relation_texts):
    field = scalar_field(params)
    algebra = FreeAlgebra(field, [GeneratorSymbol(g) for g in gen_names])
    rels = [algebra.parse(t) for t in relation_texts]
    return GradedPresentation(name, algebra, rels)


def _polynomial(n=3):
    n = int(n)
    if n < 1:
        raise UnknownCorpusEntry(f"polynomial({n}): need at least one variable")
    names = ["x", "y", "z"][:n] if n <= 3 else [f"x{i}" for i in range(1, n + 1)]
    rels = [f"{names[j]}*{names[i]} - {names[i]}*{names[j]}"
            for i in range(n) for j in range(i + 1, n)]
    return _simple_presentation(f"polynomial{n}", (), names, rels)


def _quantum_plane():
    return _simple_presentation("quantum_plane", ("q",), ["x", "y"], ["q*x*y + y*x"])


def _zhang_running_example():
    rels = ["x1*x2 - x2*x1",
            "a*x1*x3 - x3*x1",
            "a*x1*x4 - x4*x1",
            "a*x2*x3 - x3*x2",
            "a*x2*x4 - x4*x2",
            "x3*x4 - x4*x3"]
    return _simple_presentation("zhang_running_example", ("a",),
                                ["x1", "x2", "x3", "x4"], rels)


def _a_rho():
    rels = ["rho^2*x1*x2 + x2*x1",
            "rho*x1*x3 - x3*x1",
            "rho*x1*x4 + x4*x1",
            "x2*x3 - rho*x3*x2",
            "x2*x4 + rho*x4*x2",
            "x3*x4 + x4*x3 + x1*x2"]
    return _simple_presentation("a_rho", ("rho",), ["x1", "x2", "x3", "x4"], rels)


def _ttp_running_example():
    rels = ["u*v - v*u",
            "a*u*x - x*u",
            "c*u*y - y*u",
            "b*v*x - x*v",
            "d*v*y - y*v",
            "x*y - y*x"]
    return _simple_presentation("ttp_running_example", ("a", "b", "c", "d"),
                                ["u", "v", "x", "y"], rels)


def _oq_m(n=2):
    n = int(n)
    if n < 1:
        raise UnknownCorpusEntry(f"oq_m({n}): need a positive size")
    names = [f"x{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
    rels = []
    cells = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    for a in range(len(cells)):
        for b in range(a + 1, len(cells)):
            (i, j), (u, v) = cells[a], cells[b]
            P, R = f"x{i}{j}", f"x{u}{v}"
            if i == u:
                rels.append(f"q*{P}*{R} - {R}*{P}")
            elif j == v:
                rels.append(f"q*{P}*{R} - {R}*{P}")
            elif j < v:
                rels.append(f"{P}*{R} - {R}*{P} - (q - q^-1)*x{i}{v}*x{u}{j}")
            else:
                rels.append(f"{P}*{R} - {R}*{P}")
    return _simple_presentation(f"oq_m{n}", ("q",), names, rels)


_CORPUS = {
    "polynomial": _polynomial,
    "quantum_plane": _quantum_plane,
    "zhang_running_example": _zhang_running_example,
    "a_rho": _a_rho,
    "ttp_running_example": _ttp_running_example,
    "oq_m": _oq_m,
}


def builtin_corpus(name, *args):
    key = name.lower()
    if key not in _CORPUS:
        raise UnknownCorpusEntry(
            f"no corpus entry {name!r}; available: {', '.join(sorted(_CORPUS))}")
    return _CORPUS[key](*args)


def corpus_from_text(text):
    """Parse 'name' or 'name(3)' into a corpus presentation."""
    text = text.strip()
    if "(" in text:
        if not text.endswith(")"):
            raise UnknownCorpusEntry(f"malformed corpus reference {text!r}")
        name, inner = text[:-1].split("(", 1)
        args = [s.strip() for s in inner.split(",") if s.strip()]
        try:
            args = [int(s) for s in args]
        except ValueError:
            raise UnknownCorpusEntry(
                f"corpus arguments must be integers in {text!r}")
        return builtin_corpus(name.strip(), *args)
    return builtin_corpus(text)
