"""Reduced bar-complex operator calculus for finite-dimensional graded
algebras.

Elements of the algebra are sparse {basis index: Fraction} maps.  A chain
of level m is a combination of words (a_0, w_1, ..., w_m) with a_0 any
basis index and the w_k reduced (non-unit) indices; an algebra-valued
cochain of level n assigns an element to every length-n reduced word; a
functional cochain assigns a scalar to every (a_0, w_1, ..., w_q) word.

All operator signs use the bar level as the degree, exactly as in the
untwisted associative-algebra formulas; the internal grading of the
algebra is carried along only as a weight, which every operator below
preserves up to the fixed shift of its own value.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product


class FiniteGradedAlgebra:
    """Finite-dimensional graded algebra by structure constants.

    mult maps (i, j) to the sparse product {k: c} of basis elements i, j;
    missing pairs multiply to zero.  The unit must be a basis element.
    Associativity, the unit laws and degree additivity are checked on
    construction.

    `nakayama` is the diagonal automorphism carrying the dual-bimodule
    structure (identity by default; the parity involution scaled to the
    socle degree for exterior algebras).  It twists the wrap-around terms
    of the functional-coefficient operators.
    """

    def __init__(self, labels, degrees, unit, mult, nakayama=None):
        self.labels = list(labels)
        self.degrees = list(degrees)
        self.unit = unit
        self.dim = len(self.labels)
        self.mult = {}
        for (i, j), val in mult.items():
            val = {k: Fraction(c) for k, c in val.items() if c}
            if val:
                self.mult[(i, j)] = val
        self.reduced = [i for i in range(self.dim) if i != unit]
        self.nakayama = list(nakayama) if nakayama else [1] * self.dim
        self._validate()

    def _validate(self):
        for i in range(self.dim):
            if self.product_indices(self.unit, i) != {i: Fraction(1)}:
                raise ValueError("left unit law fails")
            if self.product_indices(i, self.unit) != {i: Fraction(1)}:
                raise ValueError("right unit law fails")
        for i in range(self.dim):
            for j in range(self.dim):
                prod = self.product_indices(i, j)
                d = self.degrees[i] + self.degrees[j]
                for k in prod:
                    if self.degrees[k] != d:
                        raise ValueError("product is not degree-additive")
        for i in range(self.dim):
            for j in range(self.dim):
                for k in range(self.dim):
                    left = self.mul(self.product_indices(i, j), {k: Fraction(1)})
                    right = self.mul({i: Fraction(1)}, self.product_indices(j, k))
                    if left != right:
                        raise ValueError(
                            f"associativity fails at ({i},{j},{k})"
                        )

    @classmethod
    def exterior(cls, n):
        """The exterior algebra on n odd generators, degree -1 each."""
        basis = []
        for size in range(n + 1):
            from itertools import combinations

            basis.extend(combinations(range(n), size))
        index = {s: i for i, s in enumerate(basis)}
        labels = ["1" if not s else "".join(f"e{k + 1}" for k in s) for s in basis]
        degrees = [-len(s) for s in basis]
        mult = {}
        for i, s in enumerate(basis):
            for j, t in enumerate(basis):
                if set(s) & set(t):
                    continue
                merged = tuple(sorted(s + t))
                # parity of the merge shuffle
                crossings = sum(1 for a in s for b in t if a > b)
                sign = -1 if crossings & 1 else 1
                mult[(i, j)] = {index[merged]: Fraction(sign)}
        nakayama = [
            -1 if (len(s) * (n + 1)) & 1 else 1 for s in basis
        ]
        return cls(labels, degrees, index[()], mult, nakayama)

    @classmethod
    def from_presentation(cls, data):
        """Loader for the JSON algebra-presentation schema."""
        labels = data["basis"]
        degrees = data["degrees"]
        unit = data["unit"]
        mult = {}
        for entry in data["products"]:
            i, j = entry["left"], entry["right"]
            val = {int(k): Fraction(v) for k, v in entry["value"].items()}
            mult[(i, j)] = val
        return cls(labels, degrees, unit, mult)

    def product_indices(self, i, j):
        return self.mult.get((i, j), {})

    def mul(self, a, b):
        out = {}
        for i, ca in a.items():
            for j, cb in b.items():
                for k, c in self.product_indices(i, j).items():
                    v = out.get(k, 0) + ca * cb * c
                    if v:
                        out[k] = v
                    else:
                        out.pop(k, None)
        return out

    def reduce(self, a):
        """Class of an element in the reduced quotient (unit dropped)."""
        return {k: v for k, v in a.items() if k != self.unit}

    def words(self, level):
        return list(product(self.reduced, repeat=level))

    def word_degree(self, word):
        return sum(self.degrees[i] for i in word)


# ---------------------------------------------------------------------------
# carriers
# ---------------------------------------------------------------------------

class BarCochain:
    """Algebra-valued cochain: reduced words of one level to elements."""

    __slots__ = ("alg", "level", "data")

    def __init__(self, alg, level, data=None):
        self.alg = alg
        self.level = level
        self.data = {}
        if data:
            for word, val in data.items():
                val = {k: Fraction(c) for k, c in val.items() if c}
                if val:
                    if len(word) != level:
                        raise ValueError("word length differs from the level")
                    self.data[tuple(word)] = val

    def __call__(self, word):
        return self.data.get(tuple(word), {})

    def is_zero(self):
        return not self.data

    def __eq__(self, other):
        return (
            isinstance(other, BarCochain)
            and self.data == other.data
            and (self.level == other.level or not self.data)
        )

    def __add__(self, other):
        if not other.data:
            return self
        if not self.data:
            return other
        out = dict(self.data)
        for w, val in other.data.items():
            cur = dict(out.get(w, {}))
            for k, c in val.items():
                v = cur.get(k, 0) + c
                if v:
                    cur[k] = v
                else:
                    cur.pop(k, None)
            if cur:
                out[w] = cur
            else:
                out.pop(w, None)
        return BarCochain(self.alg, self.level, out)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return BarCochain(self.alg, self.level)
        return BarCochain(
            self.alg,
            self.level,
            {w: {k: v * c for k, v in val.items()} for w, val in self.data.items()},
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + other.scale(-1)

    def weight_components(self):
        """Split by internal weight: value degree minus word degree."""
        parts = {}
        for w, val in self.data.items():
            base = self.alg.word_degree(w)
            for k, c in val.items():
                wt = self.alg.degrees[k] - base
                parts.setdefault(wt, {}).setdefault(w, {})[k] = c
        return {wt: BarCochain(self.alg, self.level, d) for wt, d in parts.items()}


class BarChain:
    """Chain: combination of (a_0, w_1..w_m) words, barred slots reduced."""

    __slots__ = ("alg", "level", "data")

    def __init__(self, alg, level, data=None):
        self.alg = alg
        self.level = level
        self.data = {}
        if data:
            for word, c in data.items():
                c = Fraction(c)
                if c:
                    if len(word) != level + 1:
                        raise ValueError("word length differs from level + 1")
                    self.data[tuple(word)] = c

    def is_zero(self):
        return not self.data

    def __eq__(self, other):
        return (
            isinstance(other, BarChain)
            and self.data == other.data
            and (self.level == other.level or not self.data)
        )

    def __add__(self, other):
        if not other.data:
            return self
        if not self.data:
            return other
        out = dict(self.data)
        for w, c in other.data.items():
            v = out.get(w, 0) + c
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        return BarChain(self.alg, self.level, out)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return BarChain(self.alg, self.level)
        return BarChain(
            self.alg, self.level, {w: v * c for w, v in self.data.items()}
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + other.scale(-1)


class DualCochain:
    """Functional cochain: scalars on (a_0, w_1..w_q) words."""

    __slots__ = ("alg", "level", "data")

    def __init__(self, alg, level, data=None):
        self.alg = alg
        self.level = level
        self.data = {}
        if data:
            for word, c in data.items():
                c = Fraction(c)
                if c:
                    if len(word) != level + 1:
                        raise ValueError("word length differs from level + 1")
                    self.data[tuple(word)] = c

    def evaluate(self, chain):
        """Pair with a chain of the same level."""
        if chain.level != self.level:
            return Fraction(0)
        total = Fraction(0)
        for w, c in chain.data.items():
            v = self.data.get(w)
            if v:
                total += v * c
        return total

    def is_zero(self):
        return not self.data

    def __eq__(self, other):
        return (
            isinstance(other, DualCochain)
            and self.data == other.data
            and (self.level == other.level or not self.data)
        )

    def __add__(self, other):
        if not other.data:
            return self
        if not self.data:
            return other
        out = dict(self.data)
        for w, c in other.data.items():
            v = out.get(w, 0) + c
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        return DualCochain(self.alg, self.level, out)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return DualCochain(self.alg, self.level)
        return DualCochain(
            self.alg, self.level, {w: v * c for w, v in self.data.items()}
        )

    def __sub__(self, other):
        return self + other.scale(-1)


def apply_cochain(f, args):
    """Multilinear application of a cochain to index-or-element arguments."""
    words = [((), Fraction(1))]
    for a in args:
        if isinstance(a, int):
            words = [(w + (a,), c) for w, c in words]
        else:
            words = [
                (w + (k,), c * ck) for w, c in words for k, ck in a.items()
            ]
    out = {}
    for w, c in words:
        val = f(w)
        for k, v in val.items():
            s = out.get(k, 0) + c * v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


# ---------------------------------------------------------------------------
# differentials
# ---------------------------------------------------------------------------

def hoch_coboundary(f):
    """Hochschild differential on algebra-valued cochains, level +1."""
    alg = f.alg
    n = f.level
    out = BarCochain(alg, n + 1)
    for word in alg.words(n + 1):
        acc = {}
        first = alg.mul({word[0]: Fraction(1)}, f(word[1:]))
        _acc_add(acc, first, 1)
        for i in range(1, n + 1):
            merged = alg.reduce(alg.product_indices(word[i - 1], word[i]))
            if merged:
                inner = apply_cochain(
                    f, list(word[: i - 1]) + [merged] + list(word[i + 1 :])
                )
                _acc_add(acc, inner, -1 if i & 1 else 1)
        last = alg.mul(f(word[:n]), {word[n]: Fraction(1)})
        _acc_add(acc, last, -1 if (n + 1) & 1 else 1)
        if acc:
            out.data[word] = acc
    return out


def _acc_add(acc, val, sign):
    for k, c in val.items():
        v = acc.get(k, 0) + sign * c
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)


def hoch_boundary(alpha):
    """Hochschild boundary on chains, level -1."""
    alg = alpha.alg
    m = alpha.level
    out = BarChain(alg, m - 1) if m else BarChain(alg, 0)
    if m == 0:
        return BarChain(alg, 0)
    data = {}
    for word, c in alpha.data.items():
        a0, bars = word[0], word[1:]
        # merge a_0 with the first bar, unreduced slot
        prod = alg.product_indices(a0, bars[0])
        for k, v in prod.items():
            _chain_add(data, (k,) + bars[1:], c * v)
        for i in range(1, m):
            merged = alg.reduce(alg.product_indices(bars[i - 1], bars[i]))
            sign = -1 if i & 1 else 1
            for k, v in merged.items():
                _chain_add(
                    data, (a0,) + bars[: i - 1] + (k,) + bars[i + 1 :], sign * c * v
                )
        prod = alg.product_indices(bars[m - 1], a0)
        sign = -1 if m & 1 else 1
        for k, v in prod.items():
            _chain_add(data, (k,) + bars[: m - 1], sign * c * v)
    return BarChain(alg, m - 1, data)


def _chain_add(data, word, c):
    v = data.get(word, 0) + c
    if v:
        data[word] = v
    else:
        data.pop(word, None)


# ---------------------------------------------------------------------------
# cup, circle, bracket
# ---------------------------------------------------------------------------

def cup(f, g):
    """(f u g)(w) = f(front) g(back).

    The global (-1)^{nm} normalisation is dropped so that acting by f and
    then by g on chains agrees with acting by f u g on the nose; see the
    module-law regression tests.
    """
    alg = f.alg
    n, m = f.level, g.level
    out = {}
    for wf, vf in f.data.items():
        for wg, vg in g.data.items():
            word = wf + wg
            val = alg.mul(vf, vg)
            if not val:
                continue
            cur = out.setdefault(word, {})
            _acc_add(cur, val, 1)
            if not cur:
                out.pop(word, None)
    return BarCochain(alg, n + m, out)


def circle(f, g):
    """Composition sum: g slotted into each argument position of f."""
    alg = f.alg
    n, m = f.level, g.level
    level = n + m - 1
    if n == 0:
        return BarCochain(alg, max(level, 0))
    out = BarCochain(alg, level)
    for word in alg.words(level):
        acc = {}
        for i in range(0, n):
            gval = alg.reduce(apply_cochain(g, list(word[i : i + m])))
            if not gval:
                continue
            inner = apply_cochain(
                f, list(word[:i]) + [gval] + list(word[i + m :])
            )
            sign = -1 if ((m + 1) * i) & 1 else 1
            _acc_add(acc, inner, sign)
        if acc:
            out.data[word] = acc
    return out


def gerst_bracket(f, g):
    """{f, g} = f o g - (-1)^{(n+1)(m+1)} g o f."""
    n, m = f.level, g.level
    sign = -1 if ((n + 1) * (m + 1)) & 1 else 1
    return circle(f, g) - circle(g, f).scale(sign)


# ---------------------------------------------------------------------------
# module operations on chains
# ---------------------------------------------------------------------------

def cap(f, alpha):
    """f n alpha = (a_0 f(w_1..w_n), w_{n+1}..w_m), zero for short chains."""
    alg = f.alg
    n, m = f.level, alpha.level
    if m < n:
        return BarChain(alg, 0)
    data = {}
    for word, c in alpha.data.items():
        a0, bars = word[0], word[1:]
        val = f(bars[:n])
        if not val:
            continue
        head = alg.mul({a0: Fraction(1)}, val)
        for k, v in head.items():
            _chain_add(data, (k,) + bars[n:], c * v)
    return BarChain(alg, m - n, data)


def lie_L(f, alpha):
    """Lie derivative of a chain along a cochain, both displayed sums.

    The operator has degree 1 - n on levels: one slot replaces the n
    consumed letters.
    """
    alg = f.alg
    n, m = f.level, alpha.level
    if n > m + 1:
        return BarChain(alg, 0)
    level = m - n + 1
    data = {}
    for word, c in alpha.data.items():
        a0, bars = word[0], word[1:]
        for i in range(0, m - n + 1):
            val = alg.reduce(f(bars[i : i + n]))
            if not val:
                continue
            sign = -1 if ((n + 1) * i) & 1 else 1
            for k, v in val.items():
                _chain_add(
                    data,
                    (a0,) + bars[:i] + (k,) + bars[i + n :],
                    sign * c * v,
                )
        # cyclic terms with the head inside the cochain
        if a0 == alg.unit:
            continue
        for i in range(m - n + 1, m + 1):
            args = list(bars[i:]) + [a0] + list(bars[: n - m + i - 1])
            val = f(tuple(args))
            if not val:
                continue
            sign = -1 if (m * (i + 1) + n + 1) & 1 else 1
            rest = bars[n - m + i - 1 : i]
            for k, v in val.items():
                _chain_add(data, (k,) + rest, sign * c * v)
    return BarChain(alg, level, data)


def connes_B(alpha):
    """The cyclic rotation-into-unit operator, level +1."""
    alg = alpha.alg
    m = alpha.level
    data = {}
    for word, c in alpha.data.items():
        a0, bars = word[0], word[1:]
        if a0 == alg.unit:
            continue
        # term i rotates so that a_i leads: (1, a_i..a_m, a_0..a_{i-1})
        cyc = (a0,) + bars
        for i in range(0, m + 1):
            rotated = cyc[i:] + cyc[:i]
            sign = -1 if (m * i) & 1 else 1
            _chain_add(data, (alg.unit,) + rotated, sign * c)
    return BarChain(alg, m + 1, data)


# ---------------------------------------------------------------------------
# homotopy operators
# ---------------------------------------------------------------------------

def homotopy_S(f, alpha):
    """The cyclic homotopy for the first Cartan formula, degree 2 - n."""
    alg = f.alg
    n, m = f.level, alpha.level
    level = m - n + 2
    if m - n < 0:
        return BarChain(alg, max(level, 0))
    data = {}
    for word, c in alpha.data.items():
        a0, bars = word[0], word[1:]
        if a0 == alg.unit:
            continue
        for i in range(0, m - n + 1):
            val = alg.reduce(f(bars[i : i + n]))
            if not val:
                continue
            for j in range(i + n, m + 1):
                eta = (n + 1) * m + (m - j) * m + (n + 1) * (j - i)
                sign = -1 if eta & 1 else 1
                tail = bars[j:]
                head = (a0,) + bars[:i]
                mid = bars[i + n : j]
                for k, v in val.items():
                    _chain_add(
                        data,
                        (alg.unit,) + tail + head + (k,) + mid,
                        sign * c * v,
                    )
    return BarChain(alg, level, data)


def homotopy_T(f, g, alpha):
    """The two-cochain homotopy of the second Cartan formula, degree
    2 - n - m."""
    alg = f.alg
    n, m = f.level, g.level
    l = alpha.level
    level = l - n - m + 2
    if level < 0:
        return BarChain(alg, 0)
    data = {}
    for word, c in alpha.data.items():
        a0, bars = word[0], word[1:]
        if a0 == alg.unit:
            continue
        lo = max(l - n + 2, 0)
        for i in range(lo, l + 1):
            for j in range(0, n + i - l - 2 + 1):
                gval = alg.reduce(g(bars[j : j + m]))
                if not gval:
                    continue
                args = (
                    list(bars[i:])
                    + [a0]
                    + list(bars[:j])
                    + [gval]
                    + list(bars[j + m : n + m + i - l - 2])
                )
                val = apply_cochain(f, args)
                if not val:
                    continue
                theta = (m + 1) * (i + j + l) + l * (i + 1)
                sign = -1 if theta & 1 else 1
                rest = bars[n + m + i - l - 2 : i]
                for k, v in val.items():
                    _chain_add(data, (k,) + rest, sign * c * v)
    return BarChain(alg, level, data)


def cartan_one_defect(f, alpha):
    """Defect of L_f = [B, iota_f] + [b, S_f] - (-1)^{|f|+1} S_{df}.

    The correction term carries (-1)^{|f|+1} relative to the plain
    difference; with that factor the identity is exact for every cochain
    of level at least one.  Degrees are bar levels throughout.
    """
    n = f.level
    if n < 1:
        raise ValueError("the homotopy formula needs cochain level >= 1")
    comm_B = connes_B(cap(f, alpha)) - cap(f, connes_B(alpha)).scale(
        -1 if n & 1 else 1
    )
    comm_b = hoch_boundary(homotopy_S(f, alpha)) - homotopy_S(
        f, hoch_boundary(alpha)
    ).scale(-1 if n & 1 else 1)
    corr = homotopy_S(hoch_coboundary(f), alpha).scale(-1 if (n + 1) & 1 else 1)
    return lie_L(f, alpha) - (comm_B + comm_b - corr)


def cartan_two_defect(f, g, alpha):
    """Defect of the second homotopy formula.

    [L_f, iota_g] - (-1)^{|f|+1} iota_{{f,g}}
      = [b, T(f,g)] - (-1)^{|f|+1} T(df, g) - (-1)^{|g|+1} T(f, dg),
    exact for cochain levels at least one, degrees being bar levels.
    """
    n, m = f.level, g.level
    if n < 1 or m < 1:
        raise ValueError("the homotopy formula needs cochain levels >= 1")
    lhs = (
        lie_L(f, cap(g, alpha))
        - cap(g, lie_L(f, alpha)).scale(-1 if (m * (n + 1)) & 1 else 1)
        - cap(gerst_bracket(f, g), alpha).scale(-1 if (n + 1) & 1 else 1)
    )
    comm_b = hoch_boundary(homotopy_T(f, g, alpha)) - homotopy_T(
        f, g, hoch_boundary(alpha)
    ).scale(-1 if (n + m) & 1 else 1)
    rhs = (
        comm_b
        - homotopy_T(hoch_coboundary(f), g, alpha).scale(
            -1 if (n + 1) & 1 else 1
        )
        - homotopy_T(f, hoch_coboundary(g), alpha).scale(
            -1 if (m + 1) & 1 else 1
        )
    )
    return lhs - rhs


# ---------------------------------------------------------------------------
# functional-coefficient operators
# ---------------------------------------------------------------------------

def dual_coboundary(g):
    """Hochschild differential on functional cochains.

    The differential of the dual bimodule, written pointwise: the leading
    term merges the zero slot from the left, the inner merges alternate,
    and the wrap term acts through the algebra's Nakayama twist (trivial
    for odd-rank exterior algebras).  With this operator the duality cap
    is a chain map on the nose; see the regression tests.
    """
    alg = g.alg
    q = g.level
    out = {}
    for point in _chain_words(alg, q + 1):
        a0, bars = point[0], point[1:]
        total = Fraction(0)
        for k, v in alg.product_indices(a0, bars[0]).items():
            total += v * g.data.get((k,) + bars[1:], Fraction(0))
        for i in range(1, q + 1):
            merged = alg.reduce(alg.product_indices(bars[i - 1], bars[i]))
            sign = -1 if i & 1 else 1
            for k, v in merged.items():
                total += sign * v * g.data.get(
                    (a0,) + bars[: i - 1] + (k,) + bars[i + 1 :], Fraction(0)
                )
        wq = bars[q]
        wrap_sign = (-1 if (q + 1) & 1 else 1) * alg.nakayama[wq]
        for k, v in alg.product_indices(wq, a0).items():
            total += wrap_sign * v * g.data.get((k,) + bars[:q], Fraction(0))
        if total:
            out[point] = total
    return DualCochain(alg, q + 1, out)


def connes_B_dual(g):
    """B*(g) = (-1)^{|g|} g o B, level -1.

    B is the plain rotation operator; the square is zero exactly, and on
    algebras with trivial Nakayama twist the operator commutes with the
    functional differential.
    """
    alg = g.alg
    q = g.level
    if q == 0:
        return DualCochain(alg, 0)
    sign = -1 if q & 1 else 1
    out = {}
    for word in _chain_words(alg, q - 1):
        val = g.evaluate(connes_B(BarChain(alg, q - 1, {word: Fraction(1)})))
        if val:
            out[word] = sign * val
    return DualCochain(alg, q - 1, out)


def iota_dual(f, g):
    """iota*_f(g) = (-1)^{|f||g|} g o iota_f, level +|f|."""
    alg = f.alg
    n, q = f.level, g.level
    sign = -1 if (n * q) & 1 else 1
    out = {}
    for word in _chain_words(alg, q + n):
        val = g.evaluate(cap(f, BarChain(alg, q + n, {word: Fraction(1)})))
        if val:
            out[word] = sign * val
    return DualCochain(alg, q + n, out)


def lie_dual_direct(f, g):
    """L*_f(g) = (-1)^{|f||g|+|g|+1} g o L_f."""
    alg = f.alg
    n, q = f.level, g.level
    level = q + n - 1
    if level < 0:
        return DualCochain(alg, 0)
    sign = -1 if (n * q + q + 1) & 1 else 1
    out = {}
    for word in _chain_words(alg, level):
        val = g.evaluate(lie_L(f, BarChain(alg, level, {word: Fraction(1)})))
        if val:
            out[word] = sign * val
    return DualCochain(alg, level, out)


def lie_dual(f, g):
    """[B*, iota*_f], the bracket defining the dual Lie action."""
    n = f.level
    first = connes_B_dual(iota_dual(f, g))
    second = iota_dual(f, connes_B_dual(g))
    sign = -1 if n & 1 else 1
    return first - second.scale(sign)


def _chain_words(alg, level):
    return [
        (a0,) + w
        for a0 in range(alg.dim)
        for w in product(alg.reduced, repeat=level)
    ]


# ---------------------------------------------------------------------------
# the symmetric pairing and the duality cap
# ---------------------------------------------------------------------------

class SymmetricPairing:
    """Nondegenerate pairing matrix <e_i, e_j> of one fixed degree."""

    def __init__(self, alg, matrix, degree):
        self.alg = alg
        self.matrix = {
            k: Fraction(v) for k, v in matrix.items() if v
        }
        self.degree = degree
        self._check()

    @classmethod
    def exterior_top(cls, alg, n):
        """<a, b> = top-monomial coefficient of a*b on the exterior algebra."""
        top = None
        for i, d in enumerate(alg.degrees):
            if d == -n:
                top = i
        matrix = {}
        for i in range(alg.dim):
            for j in range(alg.dim):
                prod = alg.product_indices(i, j)
                c = prod.get(top)
                if c:
                    matrix[(i, j)] = c
        return cls(alg, matrix, -n)

    def _check(self):
        alg = self.alg
        dim = alg.dim
        from .linalg import SparseMatrix, rank

        mat = SparseMatrix(dim, dim, {k: v for k, v in self.matrix.items()})
        if rank(mat) != dim:
            raise ValueError("pairing is degenerate")
        for i in range(dim):
            for j in range(dim):
                a = self.matrix.get((i, j), Fraction(0))
                b = self.matrix.get((j, i), Fraction(0))
                if a != b * (1 if (alg.degrees[i] * alg.degrees[j]) % 2 == 0 else -1):
                    raise ValueError("pairing is not graded symmetric")

    def pair(self, a, b):
        total = Fraction(0)
        for i, ca in a.items():
            for j, cb in b.items():
                v = self.matrix.get((i, j))
                if v:
                    total += ca * cb * v
        return total

    def cyclic_defect(self, i, j, k):
        """<e_i, e_j e_k> - (-1)^{(|i|+|j|)|k|} <e_k, e_i e_j>."""
        alg = self.alg
        left = self.pair({i: Fraction(1)}, alg.product_indices(j, k))
        right = self.pair({k: Fraction(1)}, alg.product_indices(i, j))
        sign = (
            -1
            if ((alg.degrees[i] + alg.degrees[j]) * alg.degrees[k]) % 2
            else 1
        )
        return left - sign * right


def tradler_cap(f, pairing):
    """Post-compose an algebra-valued cochain with the pairing.

    The functional sends (a_0, w) to <a_0, f(w)>; with the dual bimodule
    structure twisted by the pairing's Nakayama automorphism this is a
    chain map, and it induces slice bijections on the cohomology of the
    two coefficient systems.
    """
    alg = f.alg
    out = {}
    for word, val in f.data.items():
        for a0 in range(alg.dim):
            v = pairing.pair({a0: Fraction(1)}, val)
            if v:
                out[(a0,) + word] = v
    return DualCochain(alg, f.level, out)


# ---------------------------------------------------------------------------
# cohomology dimensions
# ---------------------------------------------------------------------------

def _cochain_basis(alg, level, coeff):
    if coeff == "self":
        return [(w, k) for w in alg.words(level) for k in range(alg.dim)]
    return _chain_words(alg, level)


def _basis_weight(alg, item, coeff):
    if coeff == "self":
        w, k = item
        return alg.degrees[k] - alg.word_degree(w)
    return -alg.degrees[item[0]] - alg.word_degree(item[1:])


def cochain_matrix(alg, level, coeff):
    """Matrix of the level -> level+1 differential on the chosen cochains."""
    from .linalg import SparseMatrix

    src = _cochain_basis(alg, level, coeff)
    dst = _cochain_basis(alg, level + 1, coeff)
    index = {b: i for i, b in enumerate(dst)}
    mat = SparseMatrix(len(dst), len(src))
    for col, item in enumerate(src):
        if coeff == "self":
            w, k = item
            f = BarCochain(alg, level, {w: {k: Fraction(1)}})
            img = hoch_coboundary(f)
            for w2, val in img.data.items():
                for k2, c in val.items():
                    mat.entries[(index[(w2, k2)], col)] = c
        else:
            g = DualCochain(alg, level, {item: Fraction(1)})
            img = dual_coboundary(g)
            for w2, c in img.data.items():
                mat.entries[(index[w2], col)] = c
    return src, dst, mat


def hochschild_dims(alg, coeff="self", max_level=3, weights=None):
    """Exact cohomology dimensions by (level, internal weight)."""
    from .linalg import rank

    mats = {}
    bases = {}
    for level in range(max_level + 2):
        src, dst, mat = cochain_matrix(alg, level, coeff)
        mats[level] = mat
        bases[level] = src
    dims = {}
    for level in range(max_level + 1):
        by_weight = {}
        for i, item in enumerate(bases[level]):
            by_weight.setdefault(_basis_weight(alg, item, coeff), []).append(i)
        for wt, cols in by_weight.items():
            if weights is not None and wt not in weights:
                continue
            out_cols = _restrict_cols(mats[level], cols, bases[level + 1], alg, wt, coeff)
            if level:
                prev_cols = [
                    i
                    for i, item in enumerate(bases[level - 1])
                    if _basis_weight(alg, item, coeff) == wt
                ]
                in_mat = _restrict_cols(
                    mats[level - 1], prev_cols, bases[level], alg, wt, coeff
                )
                in_rank = rank(in_mat)
            else:
                in_rank = 0
            dims[(level, wt)] = len(cols) - rank(out_cols) - in_rank
    return {k: v for k, v in dims.items() if v}


def _restrict_cols(mat, cols, dst_basis, alg, wt, coeff):
    from .linalg import SparseMatrix

    rows = [
        i
        for i, item in enumerate(dst_basis)
        if _basis_weight(alg, item, coeff) == wt
    ]
    row_index = {r: i for i, r in enumerate(rows)}
    col_index = {c: i for i, c in enumerate(cols)}
    out = SparseMatrix(len(rows), len(cols))
    for (r, c), v in mat.entries.items():
        if c in col_index:
            if r not in row_index:
                raise ArithmeticError("differential image escaped the weight slice")
            out.entries[(row_index[r], col_index[c])] = v
    return out
