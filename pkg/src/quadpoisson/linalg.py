"""Exact sparse linear algebra over the rationals.

Everything here is fraction-free where it matters: rows are scaled to
integer content before elimination, updates are cross-multiplications
followed by content (gcd) removal, so intermediate entries stay integral
and bounded.  No floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class SparseMatrix:
    """A rows x cols matrix with a sparse {(row, col): Fraction} entry map.

    Zero entries are never stored.  Instances are value-like: operations
    return new matrices.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            for (r, c), v in entries.items():
                if not (0 <= r < rows and 0 <= c < cols):
                    raise ValueError(f"entry ({r},{c}) outside {rows}x{cols}")
                v = Fraction(v)
                if v:
                    self.entries[(r, c)] = v

    @classmethod
    def from_dense(cls, dense):
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        m = cls(rows, cols)
        for r, row in enumerate(dense):
            for c, v in enumerate(row):
                if v:
                    m.entries[(r, c)] = Fraction(v)
        return m

    @classmethod
    def from_columns(cls, rows, columns):
        """Build from a list of sparse columns, each a {row: value} dict."""
        m = cls(rows, len(columns))
        for c, col in enumerate(columns):
            for r, v in col.items():
                if v:
                    m.entries[(r, c)] = Fraction(v)
        return m

    def to_dense(self):
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def row_lists(self):
        """Rows as {col: value} dicts (only nonempty rows present)."""
        rows = {}
        for (r, c), v in self.entries.items():
            rows.setdefault(r, {})[c] = v
        return rows

    def transpose(self):
        t = SparseMatrix(self.cols, self.rows)
        for (r, c), v in self.entries.items():
            t.entries[(c, r)] = v
        return t

    def matmul(self, other):
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matmul")
        by_row = other.row_lists()
        out = SparseMatrix(self.rows, other.cols)
        acc = {}
        for (r, k), v in self.entries.items():
            row_k = by_row.get(k)
            if not row_k:
                continue
            for c, w in row_k.items():
                key = (r, c)
                acc[key] = acc.get(key, 0) + v * w
        for key, v in acc.items():
            if v:
                out.entries[key] = v
        return out

    def apply(self, vec):
        """Matrix-vector product; vec is a sparse {col: value} dict."""
        out = {}
        for (r, c), v in self.entries.items():
            w = vec.get(c)
            if w:
                out[r] = out.get(r, 0) + v * w
        return {r: v for r, v in out.items() if v}

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _integer_rows(matrix):
    """Rows as {col: int} dicts with denominators cleared and content removed."""
    rows = []
    for r, row in sorted(matrix.row_lists().items()):
        denom = 1
        for v in row.values():
            denom = denom * v.denominator // gcd(denom, v.denominator)
        irow = {c: int(v * denom) for c, v in row.items()}
        content = 0
        for v in irow.values():
            content = gcd(content, v)
        if content > 1:
            irow = {c: v // content for c, v in irow.items()}
        rows.append(irow)
    return rows


def _eliminate(rows, cols, strategy):
    """Sparse integer row echelon. Returns (pivots, echelon_rows).

    pivots is an ordered list of (col, row_dict) with strictly increasing
    col; each row_dict is an integer row whose leading column is col and
    which is content-reduced.  Pivot choice is deterministic: columns are
    scanned left to right; among candidate rows, `leftmost` takes the one
    of lowest original index, `markowitz` the one with fewest nonzeros
    (ties by index).
    """
    active = [dict(r) for r in rows if r]
    order = list(range(len(active)))
    pivots = []
    for col in range(cols):
        cand = [i for i in order if col in active[i]]
        if not cand:
            continue
        if strategy == "markowitz":
            piv = min(cand, key=lambda i: (len(active[i]), i))
        else:
            piv = cand[0]
        prow = active[piv]
        p = prow[col]
        for i in cand:
            if i == piv:
                continue
            row = active[i]
            q = row[col]
            new = {}
            for c, v in row.items():
                new[c] = v * p
            for c, v in prow.items():
                w = new.get(c, 0) - v * q
                if w:
                    new[c] = w
                else:
                    new.pop(c, None)
            content = 0
            for v in new.values():
                content = gcd(content, v)
            if content > 1:
                new = {c: v // content for c, v in new.items()}
            active[i] = new
        pivots.append((col, prow))
        order = [i for i in order if i != piv and active[i]]
    return pivots


def rank_kernel(matrix, strategy="leftmost"):
    """Exact rank and a kernel basis of `matrix`.

    Returns (rank, basis) where basis is a list of sparse {col: Fraction}
    vectors v with M v = 0; len(basis) == cols - rank.
    """
    rows = _integer_rows(matrix)
    pivots = _eliminate(rows, matrix.cols, strategy)
    rank = len(pivots)
    pivot_cols = [c for c, _ in pivots]
    pivot_set = set(pivot_cols)
    basis = []
    for free in range(matrix.cols):
        if free in pivot_set:
            continue
        vec = {free: Fraction(1)}
        for col, row in reversed(pivots):
            s = Fraction(0)
            for c, v in row.items():
                if c == col:
                    continue
                w = vec.get(c)
                if w:
                    s += v * w
            if s:
                vec[col] = -s / row[col]
        basis.append(vec)
    return rank, basis


def rank(matrix, strategy="leftmost"):
    rows = _integer_rows(matrix)
    return len(_eliminate(rows, matrix.cols, strategy))


def solve_in_image(matrix, vector):
    """Solve M x = v exactly.

    `vector` is a sparse {row: value} dict.  Returns (x, None) with x a
    sparse {col: Fraction} dict when solvable, or (None, certificate)
    where the certificate records the rank jump proving infeasibility.
    """
    for r in vector:
        if not 0 <= r < matrix.rows:
            raise ValueError("vector index outside matrix rows")
    aug_col = matrix.cols
    aug = SparseMatrix(matrix.rows, matrix.cols + 1, dict(matrix.entries))
    for r, v in vector.items():
        v = Fraction(v)
        if v:
            aug.entries[(r, aug_col)] = v
    rows = _integer_rows(aug)
    pivots = _eliminate(rows, aug.cols, "leftmost")
    pivot_cols = [c for c, _ in pivots]
    if aug_col in pivot_cols:
        base_rank = len(pivot_cols) - 1
        return None, {
            "solvable": False,
            "rank": base_rank,
            "augmented_rank": base_rank + 1,
        }
    # Back-substitute with the free (non-pivot) genuine columns set to 0
    # and the augmented column fixed at -1, i.e. solve [M|v]*(x,-1)=0.
    vec = {aug_col: Fraction(-1)}
    for col, row in reversed(pivots):
        s = Fraction(0)
        for c, v in row.items():
            if c == col:
                continue
            w = vec.get(c)
            if w:
                s += v * w
        if s:
            vec[col] = -s / row[col]
    vec.pop(aug_col)
    return {c: v for c, v in vec.items() if v}, None
