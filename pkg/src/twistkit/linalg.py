"""Exact sparse row reduction.

Rows are dicts mapping integer column indices to nonzero FieldElements.
The pivot of a row is its smallest column index, so callers steer the
pivoting strategy purely through how they number columns.  Everything
here keeps fully reduced echelon form (each stored row is monic in its
pivot and pivots do not appear in other rows), which makes reduction
against a row space canonical.
"""


def row_scaled(row, c):
    return {j: c * v for j, v in row.items()}


def row_sub_scaled(row, other, c):
    """row - c*other, dropping entries that cancel."""
    out = dict(row)
    for j, v in other.items():
        w = out.get(j)
        if w is None:
            out[j] = -c * v
        else:
            w = w - c * v
            if w.is_zero:
                del out[j]
            else:
                out[j] = w
    return out


class Echelon:
    """A row space kept in reduced echelon form, insert one row at a time."""

    def __init__(self):
        self.rows = {}  # pivot column -> monic reduced row

    @property
    def rank(self):
        return len(self.rows)

    def pivots(self):
        return sorted(self.rows)

    def reduce(self, row):
        """Fully reduce a row against the stored space."""
        out = dict(row)
        # stored rows only touch non-pivot columns besides their own pivot,
        # so one pass over the pivot columns present in `out` is enough
        for j in [j for j in out if j in self.rows]:
            c = out.get(j)
            if c is None or c.is_zero:
                out.pop(j, None)
                continue
            out = row_sub_scaled(out, self.rows[j], c)
        return out

    def insert(self, row):
        """Insert a row; returns its pivot column, or None if dependent."""
        rem = self.reduce(row)
        if not rem:
            return None
        p = min(rem)
        lead = rem[p]
        if not (lead == 1):
            rem = row_scaled(rem, lead.inv())
        # keep stored rows clear of the new pivot
        for q, r in list(self.rows.items()):
            c = r.get(p)
            if c is not None:
                self.rows[q] = row_sub_scaled(r, rem, c)
        self.rows[p] = rem
        return p

    def insert_many(self, rows):
        for r in rows:
            self.insert(r)

    def row_list(self):
        return [self.rows[p] for p in sorted(self.rows)]

    def contains(self, row):
        return not self.reduce(row)

    def equals(self, other):
        """Row-space equality; canonical reduced forms make this a dict compare."""
        if set(self.rows) != set(other.rows):
            return False
        return all(self.rows[p] == other.rows[p] for p in self.rows)


def kernel_vectors(rows):
    """Kernel of the map sending domain basis vector i to rows[i].

    Returns a list of coefficient dicts {i: c} spanning all relations
    sum_i c_i * rows[i] = 0, in reduced echelon form over the domain
    indices.
    """
    ech = Echelon()
    tags = {}  # pivot column of value part -> tag row
    out = []
    for i, row in enumerate(rows):
        val = dict(row)
        tag = {i: _one_like(rows, val)}
        # mirror the reduction steps on the tag part
        for j in [j for j in val if j in ech.rows]:
            c = val.get(j)
            if c is None or c.is_zero:
                val.pop(j, None)
                continue
            val = row_sub_scaled(val, ech.rows[j], c)
            tag = row_sub_scaled(tag, tags[j], c)
        if not val:
            out.append(tag)
            continue
        p = min(val)
        lead = val[p]
        if not (lead == 1):
            inv = lead.inv()
            val = row_scaled(val, inv)
            tag = row_scaled(tag, inv)
        for q, r in list(ech.rows.items()):
            c = r.get(p)
            if c is not None:
                ech.rows[q] = row_sub_scaled(r, val, c)
                tags[q] = row_sub_scaled(tags[q], tag, c)
        ech.rows[p] = val
        tags[p] = tag
    # canonical form for the kernel itself
    kech = Echelon()
    kech.insert_many(out)
    return kech.row_list()


def _one_like(rows, val):
    # a 1 in the scalar field carried by whatever nonzero entry is at hand
    for r in rows:
        for v in r.values():
            return v.field.one
    for v in val.values():
        return v.field.one
    raise ValueError("cannot infer the scalar field from all-zero rows")


def solve_linear(rows, rhs, ncols):
    """One solution x of sum_j rows[i][j] * x[j] = rhs[i], or None.

    rows is a list of coefficient dicts over columns 0..ncols-1, rhs a
    list of scalars.  Free variables are set to zero.
    """
    ech = Echelon()
    aug = ncols  # rhs column sits after all unknowns so it is never a pivot
    consistent = True
    for row, b in zip(rows, rhs):
        r = dict(row)
        if not b.is_zero:
            r[aug] = b
        p = ech.insert(r)
        if p == aug:
            consistent = False
    if not consistent:
        return None
    x = {}
    for p, r in ech.rows.items():
        if p == aug:
            return None
        b = r.get(aug)
        if b is not None:
            # reduced row reads x_p + sum_{j free} c_j x_j = b, free vars at 0
            x[p] = b
    return x


def invert_matrix(mat, n):
    """Inverse of an n-by-n matrix given as {i: {j: c}} rows, or None."""
    ech = Echelon()
    tags = {}
    for i in range(n):
        val = dict(mat.get(i, {}))
        tag = {i: _one_from_mat(mat)}
        for j in [j for j in val if j in ech.rows]:
            c = val.get(j)
            if c is None or c.is_zero:
                val.pop(j, None)
                continue
            val = row_sub_scaled(val, ech.rows[j], c)
            tag = row_sub_scaled(tag, tags[j], c)
        if not val:
            return None
        p = min(val)
        lead = val[p]
        if not (lead == 1):
            inv = lead.inv()
            val = row_scaled(val, inv)
            tag = row_scaled(tag, inv)
        for q, r in list(ech.rows.items()):
            c = r.get(p)
            if c is not None:
                ech.rows[q] = row_sub_scaled(r, val, c)
                tags[q] = row_sub_scaled(tags[q], tag, c)
        ech.rows[p] = val
        tags[p] = tag
    if len(ech.rows) < n:
        return None
    # rows are now the identity; tags hold the inverse, re-keyed by pivot
    return {p: tags[p] for p in ech.rows}


def _one_from_mat(mat):
    for r in mat.values():
        for v in r.values():
            return v.field.one
    raise ValueError("cannot infer the scalar field from a zero matrix")


def mat_mul(a, b):
    """Product of {i: {j: c}} sparse matrices."""
    out = {}
    for i, row in a.items():
        acc = {}
        for k, c in row.items():
            brow = b.get(k)
            if not brow:
                continue
            for j, d in brow.items():
                v = acc.get(j)
                v = c * d if v is None else v + c * d
                if v.is_zero:
                    acc.pop(j, None)
                else:
                    acc[j] = v
        if acc:
            out[i] = acc
    return out


def mat_apply(mat, vec):
    """Apply {i: {j: c}} to a column vector {j: v}."""
    out = {}
    for i, row in mat.items():
        acc = None
        for j, c in row.items():
            v = vec.get(j)
            if v is None:
                continue
            acc = c * v if acc is None else acc + c * v
        if acc is not None and not acc.is_zero:
            out[i] = acc
    return out
