"""Free graded-commutative algebra kernel over exact rationals.

A signature fixes an ordered list of generators, each with a parity, a
homological degree and an internal weight.  Monomials are dense exponent
tuples in that fixed order; elements are sparse rational combinations of
monomials.  Every sign in the package is derived from the single Koszul
rule implemented here: transposing two odd symbols costs -1, all other
transpositions are free.
"""

from __future__ import annotations

from fractions import Fraction


class Generator:
    __slots__ = ("name", "odd", "homdeg", "weight")

    def __init__(self, name, odd, homdeg, weight):
        self.name = name
        self.odd = bool(odd)
        self.homdeg = homdeg
        self.weight = weight

    def __repr__(self):
        kind = "odd" if self.odd else "even"
        return f"Generator({self.name}, {kind}, deg={self.homdeg}, wt={self.weight})"


class Signature:
    """Ordered generator list; the order is the canonical monomial order."""

    __slots__ = ("generators", "names", "index", "odd_indices", "homdegs", "weights")

    def __init__(self, generators):
        gens = tuple(generators)
        names = tuple(g.name for g in gens)
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique within a signature")
        self.generators = gens
        self.names = names
        self.index = {name: i for i, name in enumerate(names)}
        self.odd_indices = tuple(i for i, g in enumerate(gens) if g.odd)
        self.homdegs = tuple(g.homdeg for g in gens)
        self.weights = tuple(g.weight for g in gens)

    def __len__(self):
        return len(self.generators)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Signature({', '.join(self.names)})"

    def zero_exponents(self):
        return (0,) * len(self.generators)

    def monomial_homdeg(self, exps):
        return sum(e * d for e, d in zip(exps, self.homdegs))

    def monomial_weight(self, exps):
        return sum(e * w for e, w in zip(exps, self.weights))

    def sort_word(self, word):
        """Koszul sign of sorting a generator-index word into canonical order.

        Returns (exponents, sign) with sign in {+1,-1}, or None when the
        word repeats an odd generator (the monomial is zero).
        """
        exps = [0] * len(self.generators)
        sign = 1
        odd_seen = []  # indices of odd letters so far, in written order
        for idx in word:
            g = self.generators[idx]
            if g.odd:
                if exps[idx]:
                    return None
                # crossing every odd letter already written that is > idx
                crossings = sum(1 for j in odd_seen if j > idx)
                if crossings & 1:
                    sign = -sign
                odd_seen.append(idx)
            exps[idx] += 1
        return tuple(exps), sign


class SignatureMismatch(ValueError):
    pass


class Element:
    """Sparse rational combination of canonical monomials in one signature."""

    __slots__ = ("sig", "terms")

    def __init__(self, sig, terms=None):
        self.sig = sig
        self.terms = {}
        if terms:
            for exps, c in terms.items():
                c = Fraction(c)
                if c:
                    self.terms[exps] = c

    # ---- constructors -------------------------------------------------
    @classmethod
    def zero(cls, sig):
        return cls(sig)

    @classmethod
    def one(cls, sig, coeff=1):
        return cls(sig, {sig.zero_exponents(): Fraction(coeff)})

    @classmethod
    def generator(cls, sig, name_or_index, coeff=1):
        idx = name_or_index
        if not isinstance(idx, int):
            idx = sig.index[idx]
        exps = [0] * len(sig)
        exps[idx] = 1
        return cls(sig, {tuple(exps): Fraction(coeff)})

    @classmethod
    def monomial(cls, sig, exps, coeff=1):
        exps = tuple(exps)
        if len(exps) != len(sig):
            raise ValueError("exponent tuple length mismatch")
        for i in sig.odd_indices:
            if exps[i] > 1:
                return cls(sig)
        return cls(sig, {exps: Fraction(coeff)})

    @classmethod
    def from_word(cls, sig, word, coeff=1):
        res = sig.sort_word(word)
        if res is None:
            return cls(sig)
        exps, sign = res
        return cls(sig, {exps: Fraction(coeff) * sign})

    # ---- basics -------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def copy(self):
        e = Element(self.sig)
        e.terms = dict(self.terms)
        return e

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.sig == other.sig
            and self.terms == other.terms
        )

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            s = terms.get(exps, 0) + c
            if s:
                terms[exps] = s
            else:
                terms.pop(exps, None)
        out = Element(self.sig)
        out.terms = terms
        return out

    def __neg__(self):
        out = Element(self.sig)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        out = Element(self.sig)
        if c:
            out.terms = {e: v * c for e, v in self.terms.items()}
        return out

    def _check(self, other):
        if not isinstance(other, Element) or other.sig != self.sig:
            raise SignatureMismatch("elements live in different signatures")

    # ---- multiplication ------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        sig = self.sig
        odd = sig.odd_indices
        out = {}
        for ea, ca in self.terms.items():
            # suffix counts of odd letters in ea, used for crossing signs
            a_odd = [ea[i] for i in odd]
            suffix = [0] * (len(odd) + 1)
            for k in range(len(odd) - 1, -1, -1):
                suffix[k] = suffix[k + 1] + a_odd[k]
            for eb, cb in other.terms.items():
                crossings = 0
                dead = False
                for k, i in enumerate(odd):
                    if eb[i]:
                        if ea[i]:
                            dead = True
                            break
                        crossings += suffix[k + 1]
                if dead:
                    continue
                exps = tuple(x + y for x, y in zip(ea, eb))
                c = ca * cb
                if crossings & 1:
                    c = -c
                s = out.get(exps, 0) + c
                if s:
                    out[exps] = s
                else:
                    out.pop(exps, None)
        res = Element(sig)
        res.terms = out
        return res

    __rmul__ = __mul__

    # ---- grading -------------------------------------------------------
    def component(self, homdeg, weight):
        sig = self.sig
        out = Element(sig)
        out.terms = {
            e: c
            for e, c in self.terms.items()
            if sig.monomial_homdeg(e) == homdeg and sig.monomial_weight(e) == weight
        }
        return out

    def bidegrees(self):
        sig = self.sig
        return sorted(
            {(sig.monomial_homdeg(e), sig.monomial_weight(e)) for e in self.terms}
        )

    def homdeg(self):
        """Homological degree of a homogeneous element (None if mixed or 0)."""
        degs = {self.sig.monomial_homdeg(e) for e in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def weight(self):
        wts = {self.sig.monomial_weight(e) for e in self.terms}
        if len(wts) == 1:
            return wts.pop()
        return None

    def coefficient(self, exps):
        return self.terms.get(tuple(exps), Fraction(0))

    # ---- rendering -----------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        sig = self.sig
        bits = []
        for exps in sorted(self.terms):
            c = self.terms[exps]
            factors = []
            for i, e in enumerate(exps):
                if not e:
                    continue
                factors.append(
                    sig.names[i] if e == 1 else f"{sig.names[i]}^{e}"
                )
            mono = "*".join(factors) if factors else "1"
            if c == 1 and factors:
                bits.append(mono)
            elif c == -1 and factors:
                bits.append(f"-{mono}")
            elif not factors:
                bits.append(str(c))
            else:
                bits.append(f"{c}*{mono}")
        out = bits[0]
        for b in bits[1:]:
            out += f" + {b}" if not b.startswith("-") else f" - {b[1:]}"
        return out

    __repr__ = __str__


def apply_derivation(table, sign_degree, a):
    """Extend a generator table to a graded derivation and apply it.

    `table` maps generator index (or name) to an Element of a's signature;
    missing generators map to zero.  `sign_degree` is the derivation's
    degree: D(uv) = D(u) v + (-1)^(sign_degree*|u|) u D(v), so only its
    parity matters for signs.
    """
    sig = a.sig
    images = {}
    for key, img in table.items():
        idx = key if isinstance(key, int) else sig.index[key]
        if not isinstance(img, Element) or img.sig != sig:
            raise SignatureMismatch("derivation image in a different signature")
        images[idx] = img
    d_odd = sign_degree & 1
    out = Element.zero(sig)
    for exps, coeff in a.terms.items():
        prefix_parity = 0
        for i, e in enumerate(exps):
            if e:
                img = images.get(i)
                if img is not None and not img.is_zero():
                    rest = list(exps)
                    rest[i] = e - 1
                    sign = -1 if (d_odd and prefix_parity & 1) else 1
                    # left part of the monomial up to (not incl.) slot i
                    left = [0] * len(exps)
                    for j in range(i):
                        left[j] = exps[j]
                    right = [0] * len(exps)
                    right[i] = e - 1
                    for j in range(i + 1, len(exps)):
                        right[j] = exps[j]
                    piece = Element.monomial(sig, left, coeff * e * sign)
                    piece = piece * img
                    piece = piece * Element.monomial(sig, right, 1)
                    out = out + piece
                if sig.generators[i].odd:
                    prefix_parity ^= e & 1
    return out


def koszul_shuffle_sign(perm, parities):
    """Sign of permuting symbols with the given parities into perm order.

    perm[k] is the source position of the k-th output symbol; the sign is
    the product of (-1)^(p_i p_j) over inversions, which for all-odd
    symbols reduces to the ordinary permutation sign.
    """
    sign = 1
    m = len(perm)
    for a in range(m):
        for b in range(a + 1, m):
            if perm[a] > perm[b] and parities[perm[a]] & parities[perm[b]] & 1:
                sign = -sign
    return sign
