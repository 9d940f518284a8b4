"""Bigraded structure of twisted tensor products and twisted Segre products.

A tensor a (x) b with deg a = m and deg b = j sits in bidegree
(m - j, j): the internal degree j remembers the B side, the external
degree i = m - j measures the imbalance, and the (i, j) component of the
product is A_{i+j} (x) B_j.  External degree zero collects the diagonal
+_j A_j (x) B_j, which under the multiplication
(nabla_A (x) nabla_B)(1 (x) tau (x) 1) is the twisted Segre product of
the factors.  This only makes sense when tau preserves the tensor
degrees separately, so merely graded twists are turned away at the door.

The module extracts that diagonal from a twisted tensor product model,
regrades A_d (x) B_d to degree d, completes the result to a presentation
on the A_1 (x) B_1 generators, and tabulates window-relative codimension
diagnostics dim(S_{i+j} / S_i S_j) for the external Z-grading.  All of
it is degree-truncated linear algebra; nothing here certifies anything
beyond the computed window.
"""

from .errors import (DegreeOutOfRange, DimensionMismatch, NotStronglyGraded,
                     WindowExceedsTruncation)
from .linalg import Echelon
from .truncated import build_truncation, presentation_completion


def _acc(vec, key, c):
    cur = vec.get(key)
    s = c if cur is None else cur + c
    if s.is_zero:
        vec.pop(key, None)
    else:
        vec[key] = s


class BigradedTruncation:
    """A twisted tensor product model with its tensor bidegrees exposed.

    component(i, j) lists the positions of the A_{i+j} (x) B_j slice
    inside the total-degree-(i + 2j) basis of the model.  Built through
    assign_bigrading, which refuses merely graded twists.
    """

    def __init__(self, model):
        self.model = model
        self.ext = model.ext
        self.A = model.A
        self.B = model.B
        self.field = model.field
        self.max_degree = model.max_degree
        self._components = {}

    def bidegree(self, n, p):
        """Bidegree of basis position p in total degree n."""
        (k, _, _) = self.model.basis(n)[p]
        return (2 * k - n, n - k)

    def component(self, i, j):
        """Basis positions of the (i, j) component, possibly empty."""
        key = (i, j)
        hit = self._components.get(key)
        if hit is not None:
            return hit
        n = i + 2 * j
        k = i + j
        if j < 0 or k < 0 or n < 0 or n > self.max_degree:
            out = []
        else:
            out = [p for p, (kk, _, _) in enumerate(self.model.basis(n))
                   if kk == k]
        self._components[key] = out
        return out

    def component_dim(self, i, j):
        return len(self.component(i, j))


def assign_bigrading(model, check_degree=4):
    """Wrap a TTP model in its bigrading; the twist must be strongly graded.

    Multiplication additivity on bidegrees is exact for strongly graded
    twists; it is still re-verified here on all basis pairs up to total
    degree check_degree as a guard against a mis-assembled model.
    """
    ext = model.ext
    if not ext.strongly_graded():
        for (j, i), mat in sorted(ext.blocks.items()):
            for (b, a), vec in sorted(mat.items()):
                for (k, _, _) in vec:
                    if k != i:
                        raise NotStronglyGraded(
                            f"tau moves B_{j} (x) A_{i} mass into A-degree "
                            f"{k}; the bigrading (deg a - deg b, deg b) is "
                            f"only multiplicative for strongly graded twists")
        raise NotStronglyGraded("twist is not strongly graded")
    bg = BigradedTruncation(model)
    top = min(model.max_degree, check_degree)
    for n1 in range(1, top):
        for n2 in range(1, top - n1 + 1):
            for p1, (k1, _, _) in enumerate(model.basis(n1)):
                for p2, (k2, _, _) in enumerate(model.basis(n2)):
                    prod = model.mult(n1, p1, n2, p2)
                    for p in prod:
                        (k, _, _) = model.basis(n1 + n2)[p]
                        assert k == k1 + k2, \
                            "product left its expected bidegree"
    return bg


class DiagonalModel:
    """Graded oracle for the external-degree-zero part of the product.

    Degree d is A_d (x) B_d, regraded from bidegree (0, d); the basis is
    x-major over the factor bases.  Multiplication restricts the twisted
    tensor product.  Generator names are X{p}{q} for the A_1 (x) B_1
    pairs, so completions read like the classical Segre embedding.
    """

    def __init__(self, bg):
        self.bg = bg
        self.model = bg.model
        self.ext = bg.ext
        self.A = bg.A
        self.B = bg.B
        self.field = bg.field
        self.max_degree = bg.max_degree // 2

    def dim(self, d):
        assert 0 <= d <= self.max_degree
        return self.A.dim(d) * self.B.dim(d)

    def triple(self, d, i):
        x, y = divmod(i, self.B.dim(d))
        return (d, x, y)

    def index_of(self, d, t):
        (k, x, y) = t
        assert k == d
        return x * self.B.dim(d) + y

    def basis_label(self, d, i):
        if d == 0:
            return "1"
        (_, x, y) = self.triple(d, i)
        return f"{self.A.basis_label(d, x)}(x){self.B.basis_label(d, y)}"

    def degree_one_names(self):
        names = []
        for x in range(self.A.dim(1)):
            for y in range(self.B.dim(1)):
                names.append(f"X{x + 1}{y + 1}")
        return names

    def mult(self, d1, i1, d2, i2):
        d = d1 + d2
        assert d <= self.max_degree
        p1 = self.model.index_of(2 * d1, self.triple(d1, i1))
        p2 = self.model.index_of(2 * d2, self.triple(d2, i2))
        prod = self.model.mult(2 * d1, p1, 2 * d2, p2)
        out = {}
        for p, c in prod.items():
            t = self.model.basis(2 * d)[p]
            assert t[0] == d, "diagonal product left the diagonal"
            out[self.index_of(d, t)] = c
        return out


def diagonal_subalgebra(bg):
    """The twisted Segre product of the factors, as a graded oracle.

    The restricted-product multiplication is compared on every basis
    pair against the intrinsic route a1 tau_A(b1 (x) a2) (x)
    tau_B(b1 (x) a2) b2; the two must agree exactly, and the assert
    keeps them from ever drifting apart.
    """
    s0 = DiagonalModel(bg)
    ext, A, B = bg.ext, bg.A, bg.B
    for d1 in range(1, s0.max_degree + 1):
        for d2 in range(1, s0.max_degree - d1 + 1):
            for i1 in range(s0.dim(d1)):
                (_, x1, y1) = s0.triple(d1, i1)
                for i2 in range(s0.dim(d2)):
                    (_, x2, y2) = s0.triple(d2, i2)
                    direct = {}
                    for (km, xm, ym), cm in ext.pair_image(d1, d2, y1, x2).items():
                        assert km == d2
                        pa = A.mult(d1, x1, d2, xm)
                        pb = B.mult(d1, ym, d2, y2)
                        for xf, ca in pa.items():
                            for yf, cb in pb.items():
                                _acc(direct, xf * B.dim(d1 + d2) + yf,
                                     cm * ca * cb)
                    assert direct == s0.mult(d1, i1, d2, i2), \
                        "diagonal and intrinsic Segre products disagree"
    return s0


def segre_presentation(bg, max_degree, name="segre"):
    """Present the twisted Segre product on its degree-one part.

    Runs completion on the diagonal oracle and then re-truncates the
    result, insisting that the Hilbert function come back as the
    Hadamard product dim A_d * dim B_d.  A mismatch is a real finding
    (relations past max_degree, or a diagonal not generated in degree
    one) and aborts with the first failing degree.
    """
    s0 = diagonal_subalgebra(bg)
    if max_degree > s0.max_degree:
        raise DegreeOutOfRange(
            f"segre degree {max_degree} needs the product model to degree "
            f"{2 * max_degree}, have {bg.max_degree}")
    pres, _ = presentation_completion(s0, max_degree, name)
    check = build_truncation(pres, max_degree)
    for d in range(max_degree + 1):
        want = s0.dim(d)
        got = check.hilbert[d]
        if got != want:
            raise DimensionMismatch(
                f"completed Segre presentation has dim {got} in degree {d}, "
                f"Hadamard product says {want}",
                degree=d, expected=want, found=got)
    return pres


def hilbert_hadamard_check(bg, max_degree):
    """Whether dim S_d = dim A_d * dim B_d holds through the presentation.

    The diagonal basis gives the product dimensions by construction; the
    content of the check is that the completed presentation reproduces
    them.  Returns False instead of raising, for report pipelines.
    """
    for d in range(min(max_degree, bg.max_degree // 2) + 1):
        if bg.component_dim(0, d) != bg.A.dim(d) * bg.B.dim(d):
            return False
    try:
        segre_presentation(bg, max_degree)
    except DimensionMismatch:
        return False
    return True


def densely_graded_diagnostic(bg, window=2, depth=None):
    """Codimension table dim(S_{i+j} / S_i S_j) for the external grading.

    For every pair |i|, |j| <= window and every internal degree l <=
    depth that the truncation retains, the span of products from the
    (i, l1) and (j, l - l1) components is ranked inside the (i+j, l)
    component.  Values are window-relative: a 0 here is evidence, not a
    theorem, and a positive entry only says degree-(<= l) products miss
    part of the slice.  Every requested pair must retain at least one
    internal degree, else WindowExceedsTruncation; external degree
    -2*window needs internal degree 2*window just to be nonempty, so a
    full window-W table wants the product model built to degree 4W.
    """
    if depth is None:
        depth = bg.max_degree // 2
    model = bg.model
    table = {}
    for i in range(-window, window + 1):
        for j in range(-window, window + 1):
            ext_deg = i + j
            per_l = {}
            for l in range(max(0, -ext_deg), depth + 1):
                n = ext_deg + 2 * l
                if n < 0 or n > bg.max_degree:
                    continue
                target = bg.component(ext_deg, l)
                col = {p: c for c, p in enumerate(target)}
                ech = Echelon()
                for l1 in range(0, l + 1):
                    l2 = l - l1
                    src1 = bg.component(i, l1)
                    src2 = bg.component(j, l2)
                    if not src1 or not src2:
                        continue
                    n1 = i + 2 * l1
                    n2 = j + 2 * l2
                    for p1 in src1:
                        for p2 in src2:
                            prod = model.mult(n1, p1, n2, p2)
                            row = {}
                            for p, c in prod.items():
                                assert p in col, "product left its bidegree"
                                row[col[p]] = c
                            if row:
                                ech.insert(row)
                per_l[l] = len(target) - ech.rank
            if not per_l:
                raise WindowExceedsTruncation(
                    f"external pair ({i}, {j}) retains no internal degree "
                    f"within truncation {bg.max_degree}; shrink the window "
                    f"or deepen the product model")
            table[(i, j)] = per_l
    return table
