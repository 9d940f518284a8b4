"""Degree-truncated models of finitely presented graded algebras.

The model of A = F/(R) up to degree D keeps, for every degree d <= D, a
reduced echelon basis of the ideal slice I_d inside the span of all
degree-d words.  Columns are numbered by descending deglex, so pivots
are the largest words and the normal (non-pivot) words form the
canonical monomial basis of A_d.  The slices are built incrementally:

    I_d = R_d + sum_g ( g * I_{d - deg g}  +  I_{d - deg g} * g )

Reduction against a slice is exact normal-form rewriting in that degree.
"""

import json

from .errors import DegreeOutOfRange, DegreeTooLarge, NotGeneratedInDegreeOne, ParseError
from .freealg import FreeAlgebra, GeneratorSymbol, NcPoly
from .linalg import Echelon, kernel_vectors
from .presentation import GradedPresentation
from .scalars import scalar_field

DEGREE_CAP = 24

TRUNCATION_SCHEMA = "twistkit.truncation.v1"


def build_truncation(presentation, max_degree=6, cap=None):
    cap = DEGREE_CAP if cap is None else cap
    if max_degree > cap:
        raise DegreeTooLarge(max_degree, cap)
    if max_degree < 0:
        raise DegreeOutOfRange(f"negative truncation degree {max_degree}")
    return TruncatedAlgebraModel(presentation, max_degree)


class TruncatedAlgebraModel:
    def __init__(self, presentation, max_degree):
        self.presentation = presentation
        self.max_degree = max_degree
        alg = presentation.algebra
        self.algebra = alg
        self.field = alg.field

        self._words_desc = {}   # degree -> words, largest first
        self._col = {}          # degree -> word -> column
        self._ech = {}          # degree -> Echelon of the ideal slice
        self._normal = {}       # degree -> normal words, ascending deglex
        self._mult_cache = {}

        rels_by_degree = {}
        for r in presentation.relations:
            rels_by_degree.setdefault(r.degree(), []).append(r)

        for d in range(max_degree + 1):
            words = list(reversed(alg.words_of_degree(d)))
            self._words_desc[d] = words
            self._col[d] = {w: i for i, w in enumerate(words)}
            ech = Echelon()
            for r in rels_by_degree.get(d, ()):
                ech.insert(self._row_of_poly(r, d))
            for gi, g in enumerate(alg.gens):
                lower = d - g.degree
                if lower < 0:
                    continue
                col_d = self._col[d]
                words_lo = self._words_desc[lower]
                for row in self._ech[lower].rows.values():
                    left = {col_d[(gi,) + words_lo[j]]: c for j, c in row.items()}
                    right = {col_d[words_lo[j] + (gi,)]: c for j, c in row.items()}
                    ech.insert(left)
                    ech.insert(right)
            self._ech[d] = ech
            pivots = set(ech.rows)
            normal = [w for i, w in enumerate(words) if i not in pivots]
            normal.reverse()
            self._normal[d] = normal

        self.hilbert = [len(self._normal[d]) for d in range(max_degree + 1)]

    def __repr__(self):
        return (f"<truncation of {self.presentation.name} to degree "
                f"{self.max_degree}, dims {self.hilbert}>")

    def _row_of_poly(self, p, d):
        col = self._col[d]
        return {col[w]: c for w, c in p.terms.items()}

    def _poly_of_row(self, row, d):
        words = self._words_desc[d]
        return NcPoly(self.algebra, {words[i]: c for i, c in row.items()})

    # normal forms

    def reduce(self, p):
        """Normal form of an NcPoly, component by component."""
        if p.algebra != self.algebra:
            raise ValueError("polynomial is over a different alphabet")
        out = self.algebra.zero()
        for d in p.degrees():
            if d > self.max_degree:
                raise DegreeOutOfRange(
                    f"degree {d} exceeds the truncation bound {self.max_degree}")
            comp = p.homogeneous_part(d)
            rem = self._ech[d].reduce(self._row_of_poly(comp, d))
            out = out + self._poly_of_row(rem, d)
        return out

    def is_zero(self, p):
        return self.reduce(p).is_zero

    def multiply(self, p, q):
        return self.reduce(p * q)

    # graded oracle interface

    def dim(self, d):
        if d < 0 or d > self.max_degree:
            raise DegreeOutOfRange(
                f"degree {d} outside the truncation range 0..{self.max_degree}")
        return len(self._normal[d])

    def normal_words(self, d):
        self.dim(d)
        return list(self._normal[d])

    def basis_label(self, d, i):
        return self.algebra.format_word(self._normal[d][i])

    def degree_one_names(self):
        return [self.algebra.format_word(w) for w in self._normal[1]]

    def basis_poly(self, d, i):
        return self.algebra.monomial(self._normal[d][i])

    def vector_of(self, p, d):
        """Coefficients of reduce(p) on the degree-d normal basis."""
        r = self.reduce(p).homogeneous_part(d)
        pos = {w: i for i, w in enumerate(self._normal[d])}
        return {pos[w]: c for w, c in r.terms.items()}

    def mult(self, d1, i1, d2, i2):
        key = (d1, i1, d2, i2)
        hit = self._mult_cache.get(key)
        if hit is not None:
            return hit
        if d1 + d2 > self.max_degree:
            raise DegreeOutOfRange(
                f"product degree {d1 + d2} exceeds the truncation bound {self.max_degree}")
        w = self._normal[d1][i1] + self._normal[d2][i2]
        vec = self.vector_of(self.algebra.monomial(w), d1 + d2)
        self._mult_cache[key] = vec
        return vec

    # serialization

    def to_json(self):
        rules = {}
        for d in range(self.max_degree + 1):
            words = self._words_desc[d]
            dr = []
            for p, row in sorted(self._ech[d].rows.items()):
                rest = {words[j]: -c for j, c in row.items() if j != p}
                dr.append([self.algebra.format_word(words[p]),
                           str(NcPoly(self.algebra, rest))])
            if dr:
                rules[str(d)] = dr
        return json.dumps({
            "schema": TRUNCATION_SCHEMA,
            "name": self.presentation.name,
            "parameters": list(self.field.params),
            "generators": [[g.name, g.degree] for g in self.presentation.gens],
            "relations": [str(r) for r in self.presentation.relations],
            "max_degree": self.max_degree,
            "hilbert": self.hilbert,
            "normal_words": {
                str(d): [self.algebra.format_word(w) for w in self._normal[d]]
                for d in range(self.max_degree + 1)},
            "reduction_rules": rules,
        }, indent=2)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        if data.get("schema") != TRUNCATION_SCHEMA:
            raise ParseError(
                f"unsupported schema {data.get('schema')!r}, expected {TRUNCATION_SCHEMA!r}")
        field = scalar_field(tuple(data["parameters"]))
        alg = FreeAlgebra(field, [GeneratorSymbol(n, d) for n, d in data["generators"]])
        pres = GradedPresentation(data["name"], alg, [alg.parse(t) for t in data["relations"]])
        model = cls(pres, data["max_degree"])
        if model.hilbert != data["hilbert"]:
            raise ParseError("stored Hilbert function does not match the rebuilt model")
        return model


def hilbert_function(presentation, max_degree=6, cap=None):
    return build_truncation(presentation, max_degree, cap).hilbert


def check_associativity(oracle, d1, d2, d3):
    """Compare (ab)c with a(bc) over full basis triples of the given degrees.

    The oracle needs dim(d), mult(d1,i1,d2,i2) -> sparse coefficient
    vector, and basis_label(d,i) for witnesses.
    """
    failures = []
    checked = 0
    n1, n2, n3 = oracle.dim(d1), oracle.dim(d2), oracle.dim(d3)
    for i in range(n1):
        for j in range(n2):
            ab = oracle.mult(d1, i, d2, j)
            for k in range(n3):
                bc = oracle.mult(d2, j, d3, k)
                lhs = {}
                for m, c in ab.items():
                    for t, v in oracle.mult(d1 + d2, m, d3, k).items():
                        w = lhs.get(t)
                        w = c * v if w is None else w + c * v
                        if w.is_zero:
                            lhs.pop(t, None)
                        else:
                            lhs[t] = w
                rhs = {}
                for m, c in bc.items():
                    for t, v in oracle.mult(d1, i, d2 + d3, m).items():
                        w = rhs.get(t)
                        w = c * v if w is None else w + c * v
                        if w.is_zero:
                            rhs.pop(t, None)
                        else:
                            rhs[t] = w
                checked += 1
                if lhs != rhs:
                    failures.append({
                        "triple": (oracle.basis_label(d1, i),
                                   oracle.basis_label(d2, j),
                                   oracle.basis_label(d3, k)),
                        "left": {oracle.basis_label(d1 + d2 + d3, t): str(c)
                                 for t, c in lhs.items()},
                        "right": {oracle.basis_label(d1 + d2 + d3, t): str(c)
                                  for t, c in rhs.items()},
                    })
    return {"degrees": (d1, d2, d3), "checked": checked,
            "ok": not failures, "failures": failures}


def presentation_completion(oracle, max_degree, name="completed", gen_names=None):
    """Recover a presentation from a graded multiplication oracle.

    The oracle must be generated in degree one; otherwise
    NotGeneratedInDegreeOne reports the first degree where products of
    degree-one elements fail to span.  Returns the presentation together
    with a per-degree report of the relations found.
    """
    field = oracle.field
    n1 = oracle.dim(1)
    if gen_names is None:
        if hasattr(oracle, "degree_one_names"):
            gen_names = list(oracle.degree_one_names())
        else:
            gen_names = [f"g{i+1}" for i in range(n1)]
    if len(gen_names) != n1 or not all(isinstance(s, str) and s.isidentifier()
                                       for s in gen_names):
        gen_names = [f"g{i+1}" for i in range(n1)]
    alg = FreeAlgebra(field, [GeneratorSymbol(nm) for nm in gen_names])

    relations = []
    new_by_degree = {}
    cons = {0: Echelon(), 1: Echelon()}  # relation span per degree, grown as found
    # degree-one words map to the oracle basis directly
    prev_images = {(i,): {i: field.one} for i in range(n1)}

    for d in range(2, max_degree + 1):
        words = alg.words_of_degree(d)
        col = {w: i for i, w in enumerate(reversed(words))}
        imgs = {}
        for w in words:
            head, last = w[:-1], w[-1]
            base = prev_images[head]
            acc = {}
            for m, c in base.items():
                for t, v in oracle.mult(d - 1, m, 1, last).items():
                    u = acc.get(t)
                    u = c * v if u is None else u + c * v
                    if u.is_zero:
                        acc.pop(t, None)
                    else:
                        acc[t] = u
            imgs[w] = acc
        # kernel of the evaluation, rows ordered by descending deglex so
        # pivots land on leading words
        desc = list(reversed(words))
        ker = kernel_vectors([imgs[w] for w in desc])
        rank = len(words) - len(ker)
        if rank < oracle.dim(d):
            raise NotGeneratedInDegreeOne(d)

        # consequences of relations found in lower degrees
        ech = Echelon()
        words_lo = list(reversed(alg.words_of_degree(d - 1)))
        for gi in range(n1):
            for row in cons[d - 1].rows.values():
                ech.insert({col[(gi,) + words_lo[j]]: c for j, c in row.items()})
                ech.insert({col[words_lo[j] + (gi,)]: c for j, c in row.items()})
        found = 0
        for kv in ker:
            if ech.insert(dict(kv)) is not None:
                # genuinely new relation in this degree
                p = NcPoly(alg, {desc[i]: c for i, c in kv.items()})
                relations.append(p.monic())
                found += 1
        if found:
            new_by_degree[d] = found
        cons[d] = ech
        prev_images = imgs

    pres = GradedPresentation(name, alg, relations)
    report = {
        "generators": gen_names,
        "oracle_dims": [oracle.dim(d) for d in range(max_degree + 1)],
        "new_relations_by_degree": new_by_degree,
        "relation_count": len(relations),
        "generated_in_degree_one": True,
    }
    return pres, report
