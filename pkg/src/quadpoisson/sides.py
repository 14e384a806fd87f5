"""Generator signatures for the two families of free graded-commutative algebras.

The primal side is built on n even coordinates x_i; the Koszul side on n
odd coordinates xi_i.  Each side carries three signatures sharing the
coordinate block in slots 0..n-1:

  sig_form : coordinates and their differentials      (x, dx) / (xi, dxi)
  sig_poly : coordinates and the dual derivations     (x, Dx) / (xi, Dxi)
  sig_dual : dual-basis functionals and derivations   (xs, Dxi), Koszul only

Degree and weight conventions (homdeg, weight per generator):

  x_i  ( 0, +1)   dx_i  (+1, +1)   Dx_i  (-1, -1)
  xi_i (-1, -1)   dxi_i ( 0, -1)   Dxi_i ( 0, +1)   xs_i (+1, +1)

With these choices every differential in the package preserves the weight,
and the degree/weight bookkeeping matches across the x -> Dxi, dx -> xs,
Dx -> xi substitutions, which the duality maps rely on.

Each signature also carries a "complex degree", the count of one
distinguished letter class, which indexes its chain complex:
form degree (#d-letters), polyvector arity (#Dx), coordinate count (#xi)
on the Koszul polyvector side, and functional degree (#xs).
"""

from __future__ import annotations

from itertools import combinations

from .algebra import Element, Generator, Signature

PRIMAL = "primal"
KOSZUL = "koszul"


class Side:
    """Signatures and index helpers for one side (primal or Koszul)."""

    def __init__(self, n, name):
        if name not in (PRIMAL, KOSZUL):
            raise ValueError(f"unknown side {name!r}")
        self.n = n
        self.name = name
        rng = range(1, n + 1)
        if name == PRIMAL:
            coords = [Generator(f"x{i}", False, 0, 1) for i in rng]
            self.sig_form = Signature(
                coords + [Generator(f"dx{i}", True, 1, 1) for i in rng]
            )
            self.sig_poly = Signature(
                coords + [Generator(f"Dx{i}", True, -1, -1) for i in rng]
            )
            self.sig_dual = None
        else:
            coords = [Generator(f"xi{i}", True, -1, -1) for i in rng]
            self.sig_form = Signature(
                coords + [Generator(f"dxi{i}", False, 0, -1) for i in rng]
            )
            self.sig_poly = Signature(
                coords + [Generator(f"Dxi{i}", False, 0, 1) for i in rng]
            )
            self.sig_dual = Signature(
                [Generator(f"xs{i}", True, 1, 1) for i in rng]
                + [Generator(f"Dxi{i}", False, 0, 1) for i in rng]
            )

    # ---- generator indices ---------------------------------------------
    # In every signature the coordinate-like block is slots 0..n-1 and the
    # partner block (d-letters, derivations) is slots n..2n-1.

    def coord(self, sig, i):
        return Element.generator(sig, i)

    def partner(self, sig, i):
        return Element.generator(sig, self.n + i)

    def coords_part(self, exps):
        return exps[: self.n]

    def partner_part(self, exps):
        return exps[self.n :]

    # ---- complex degrees -------------------------------------------------
    def complex_degree(self, sig, exps):
        """Chain-complex index of a monomial in the given signature."""
        n = self.n
        if sig == self.sig_form:
            return sum(exps[n:])
        if sig == self.sig_poly:
            if self.name == PRIMAL:
                return sum(exps[n:])  # arity
            return sum(exps[:n])  # coordinate count
        if self.sig_dual is not None and sig == self.sig_dual:
            return sum(exps[:n])
        raise ValueError("signature does not belong to this side")

    def arity(self, exps):
        return sum(exps[self.n :])

    def group_counts(self, sig, cdeg, weight):
        """Solve for (coordinate-block total, partner-block total) at a slice.

        Returns None when the slice is structurally empty.
        """
        n = self.n
        if sig == self.sig_form:
            if self.name == PRIMAL:
                a, b = weight - cdeg, cdeg
            else:
                a, b = -weight - cdeg, cdeg
        elif sig == self.sig_poly:
            if self.name == PRIMAL:
                a, b = weight + cdeg, cdeg
            else:
                a, b = cdeg, weight + cdeg
        elif self.sig_dual is not None and sig == self.sig_dual:
            a, b = cdeg, weight - cdeg
        else:
            raise ValueError("signature does not belong to this side")
        if a < 0 or b < 0:
            return None
        return a, b

    def slice_basis(self, sig, cdeg, weight):
        """Sorted monomial basis of the (complex degree, weight) slice."""
        counts = self.group_counts(sig, cdeg, weight)
        if counts is None:
            return []
        a, b = counts
        n = self.n
        first_odd = sig.generators[0].odd
        second_odd = sig.generators[n].odd
        firsts = _distributions(a, n, first_odd)
        seconds = _distributions(b, n, second_odd)
        basis = [fa + sb for fa in firsts for sb in seconds]
        basis.sort()
        return basis


def _distributions(total, n, odd):
    if odd:
        if total > n:
            return []
        out = []
        for picks in combinations(range(n), total):
            e = [0] * n
            for i in picks:
                e[i] = 1
            out.append(tuple(e))
        return out
    return list(_compositions(total, n))


def _compositions(total, n):
    if n == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, n - 1):
            yield (head,) + rest


def side(n, name):
    return Side(n, name)
