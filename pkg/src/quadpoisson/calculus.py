"""Differential calculus on polyvectors, forms, and dual-valued polyvectors.

Conventions (fixed once, regression-locked in the test suite):

* Contraction with a monomial polyvector is the composition of the
  single-derivation contractions taken in ascending generator order with
  the highest index applied first, after multiplying in the coefficient
  from the left.  This makes iota(P wedge Q) = iota(P) o iota(Q) exact.
* Multilinear evaluation of a polyvector P on arguments (f_1, ..., f_p)
  is iota_P(df_1 ^ ... ^ df_p) projected to the coordinate part.  Shuffle
  sums are signed by Koszul crossings of the df letters, i.e. with the
  arguments' parities shifted by one; for even coordinates this is the
  ordinary shuffle sign.
* The action of the coordinate algebra on dual functionals is the
  composition of the odd derivations dual to multiplication, highest
  index applied first; the functional pairing is the constant term of
  that action.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .algebra import Element, SignatureMismatch, apply_derivation, koszul_shuffle_sign
from .sides import KOSZUL, PRIMAL, Side

# Sign of the transpose defining the dual exterior differential:
# <d* phi, w> = DUAL_DE_RHAM_SIGN(|phi|) * <phi, d w>.  The graded-transpose
# convention (sign (-1)^{deg phi}) is the one under which the dual-side
# Poincare square and the Batalin-Vilkovisky checks close up exactly; see
# tests/test_bv.py regression cases.
def _dual_transpose_sign(homdeg):
    return -1 if homdeg & 1 else 1


# ---------------------------------------------------------------------------
# basic operators
# ---------------------------------------------------------------------------

def de_rham(side, omega):
    """Exterior differential: coordinates to their d-letters, degree +1."""
    sig = omega.sig
    if sig != side.sig_form:
        raise SignatureMismatch("de_rham expects a form")
    table = {i: Element.generator(sig, side.n + i) for i in range(side.n)}
    return apply_derivation(table, 1, omega)


def contract_single(side, sig, idx, elem):
    """Contraction with the idx-th derivation generator on `sig`."""
    parity = side.sig_poly.generators[side.n + idx].homdeg & 1
    table = {side.n + idx: Element.one(sig)}
    return apply_derivation(table, parity, elem)


def contract(side, P, omega):
    """iota_P omega for P a polyvector and omega a form on the same side."""
    if P.sig != side.sig_poly or omega.sig != side.sig_form:
        raise SignatureMismatch("contract expects (polyvector, form) on one side")
    n = side.n
    out = Element.zero(side.sig_form)
    for exps, coeff in P.terms.items():
        partials = []
        for i in range(n):
            partials.extend([i] * exps[n + i])
        tmp = omega
        for i in reversed(partials):
            if tmp.is_zero():
                break
            tmp = contract_single(side, side.sig_form, i, tmp)
        if tmp.is_zero():
            continue
        coord_mono = Element.monomial(side.sig_form, exps[:n] + (0,) * n, coeff)
        out = out + coord_mono * tmp
    return out


def wedge(side, P, Q):
    """Wedge of polyvectors; identical to the graded product."""
    if P.sig != side.sig_poly or Q.sig != side.sig_poly:
        raise SignatureMismatch("wedge expects two polyvectors on one side")
    return P * Q


def lie_derivative(side, P, omega):
    """Cartan formula L_P = iota_P d - (-1)^{|P|} d iota_P, per parity part."""
    if P.sig != side.sig_poly or omega.sig != side.sig_form:
        raise SignatureMismatch("lie_derivative expects (polyvector, form)")
    out = Element.zero(side.sig_form)
    for parity in (0, 1):
        part = Element(
            side.sig_poly,
            {
                e: c
                for e, c in P.terms.items()
                if side.sig_poly.monomial_homdeg(e) & 1 == parity
            },
        )
        if part.is_zero():
            continue
        term = contract(side, part, de_rham(side, omega))
        second = de_rham(side, contract(side, part, omega))
        out = out + (term - second if parity == 0 else term + second)
    return out


# ---------------------------------------------------------------------------
# evaluation and reconstruction of polyvectors
# ---------------------------------------------------------------------------

def project_coords(side, elem):
    """Keep the terms of a form with no d-letters."""
    n = side.n
    return Element(
        elem.sig,
        {e: c for e, c in elem.terms.items() if not any(e[n:])},
    )


def coords_element(side, to_sig, elem):
    """Move a coordinate-only element between signatures sharing the block."""
    n = side.n
    out = {}
    for e, c in elem.terms.items():
        if any(e[n:]):
            raise ValueError("element is not coordinate-only")
        out[e[:n] + (0,) * n] = c
    return Element(to_sig, out)


def _d_expansion(side, elem):
    """Leibniz expansion of d(elem) as (letter, remaining exps, scalar) rows.

    elem is coordinate-only; d(m) = sum over letters of the remaining
    monomial times the d-letter, with the Koszul sign of carrying d past
    the preceding odd letters.
    """
    n = side.n
    odd = side.sig_form.generators[0].odd
    out = []
    for exps, c in elem.terms.items():
        if any(exps[n:]):
            raise ValueError("evaluation arguments must be coordinate-only")
        prefix = 0
        for k in range(n):
            e = exps[k]
            if e:
                sign = -1 if (odd and prefix & 1) else 1
                rest = list(exps[:n])
                rest[k] = e - 1
                out.append((k, tuple(rest), c * e * sign))
                if odd:
                    prefix ^= 1
    return out


def _evaluation_buckets(side, args):
    """Contract d(args) wedges down to {derivation multiset: coefficient}.

    Returns a map from sorted letter tuples to coordinate-only elements;
    coefficient monomials of the arguments commute freely past d-letters
    on both sides, so the wedge splits as (product of coefficients) times
    the pure d-letter wedge, which contracts against its own multiset.
    """
    from itertools import product as iproduct

    n = side.n
    sig = side.sig_form
    expansions = [_d_expansion(side, a) for a in args]
    buckets = {}
    for choice in iproduct(*expansions):
        word = [n + item[0] for item in choice]
        res = sig.sort_word(word)
        if res is None:
            continue
        _, ksign = res
        letters = tuple(sorted(item[0] for item in choice))
        coeff = Element.one(sig, ksign)
        for item in choice:
            coeff = coeff * Element.monomial(sig, item[1] + (0,) * n, item[2])
            if coeff.is_zero():
                break
        if coeff.is_zero():
            continue
        prev = buckets.get(letters)
        buckets[letters] = coeff if prev is None else prev + coeff
    return {k: v for k, v in buckets.items() if not v.is_zero()}


def evaluate(side, P, args):
    """P(f_1, ..., f_p): multilinear evaluation with values in coordinates.

    args are coordinate-only form elements; the result is a coordinate-only
    form element.  Terms of P whose arity differs from len(args) drop out.
    """
    if not args:
        return project_coords(side, coords_poly_to_form(side, P))
    n = side.n
    buckets = _evaluation_buckets(side, args)
    if not buckets:
        return Element.zero(side.sig_form)
    out = Element.zero(side.sig_form)
    for exps, c in P.terms.items():
        J = tuple(i for i in range(n) for _ in range(exps[n + i]))
        coeff = buckets.get(J)
        if coeff is None:
            continue
        norm = _partial_norm(n, side.name, J)
        mono = Element.monomial(side.sig_form, exps[:n] + (0,) * n, c * norm)
        out = out + mono * coeff
    return out


def coords_poly_to_form(side, P):
    n = side.n
    out = {}
    for e, c in P.terms.items():
        if not any(e[n:]):
            out[e] = c
    return Element(side.sig_form, out)


def arg_tuples(side, size):
    """Canonical evaluation tuples of coordinate indices for one arity."""
    n = side.n
    if side.sig_poly.generators[n].odd:
        return list(combinations(range(n), size))
    return list(_multisets(range(n), size))


def _multisets(pool, size):
    pool = list(pool)
    if size == 0:
        yield ()
        return
    for k, v in enumerate(pool):
        for rest in _multisets(pool[k:], size - 1):
            yield (v,) + rest


@lru_cache(maxsize=None)
def _partial_norm(n, name, J):
    """Pairing normalisation: the pure-partial monomial on its own tuple."""
    side = Side(n, name)
    exps = [0] * (2 * n)
    for i in J:
        exps[n + i] += 1
    mono = Element.monomial(side.sig_poly, tuple(exps))
    w = Element.one(side.sig_form)
    for i in J:
        w = w * de_rham(side, Element.generator(side.sig_form, i))
    val = project_coords(side, contract(side, mono, w))
    return val.terms.get(side.sig_form.zero_exponents(), Fraction(0))


def reconstruct(side, arity, values):
    """Rebuild the arity-p polyvector from its values on canonical tuples."""
    out = Element.zero(side.sig_poly)
    n = side.n
    for J, val in values.items():
        if val.is_zero():
            continue
        norm = _partial_norm(n, side.name, tuple(J))
        if not norm:
            raise ArithmeticError("degenerate evaluation normalisation")
        exps = [0] * (2 * n)
        for i in J:
            exps[n + i] += 1
        part = Element.monomial(side.sig_poly, tuple(exps))
        piece = coords_element(side, side.sig_poly, val) * part
        out = out + piece.scale(Fraction(1) / norm)
    return out


# ---------------------------------------------------------------------------
# the dual-valued side: functionals on the Koszul coordinate algebra
# ---------------------------------------------------------------------------

def dual_derivation(side, idx, phi):
    """Odd derivation on functionals dual to multiplication by coordinate idx."""
    table = {idx: Element.one(side.sig_dual)}
    return apply_derivation(table, 1, phi)


def module_action(side, g, phi):
    """Action of a coordinate-only element g on a functional element phi.

    Monomials act by composing the dual derivations, highest coordinate
    index applied first.
    """
    if side.sig_dual is None:
        raise ValueError("module_action lives on the Koszul side")
    n = side.n
    out = Element.zero(side.sig_dual)
    for e, c in g.terms.items():
        if any(e[n:]):
            raise ValueError("acting element is not coordinate-only")
        cur = phi.scale(c)
        word = [i for i in range(n) for _ in range(e[i])]
        for i in reversed(word):
            if cur.is_zero():
                break
            cur = dual_derivation(side, i, cur)
        out = out + cur
    return out


def pair_functional(side, phi, g):
    """<phi, g>: pairing of a functional element with a coordinate element."""
    acted = module_action(side, g, phi)
    return acted.terms.get(side.sig_dual.zero_exponents(), Fraction(0))


def stars_part(side, exps):
    return exps[: side.n]


def eval_dual(side, P, args):
    """Evaluation of a dual-valued polyvector; the result is a functional."""
    if P.sig != side.sig_dual:
        raise SignatureMismatch("eval_dual expects a dual-valued polyvector")
    n = side.n
    if not args:
        out = {}
        for exps, c in P.terms.items():
            if not any(exps[n:]):
                out[exps] = c
        return Element(side.sig_dual, out)
    buckets = _evaluation_buckets(side, args)
    out = Element.zero(side.sig_dual)
    for exps, c in P.terms.items():
        J = tuple(i for i in range(n) for _ in range(exps[n + i]))
        coeff = buckets.get(J)
        if coeff is None:
            continue
        norm = _partial_norm(n, side.name, J)
        star = Element.monomial(side.sig_dual, exps[:n] + (0,) * n, c * norm)
        out = out + module_action(side, coeff, star)
    return out


def reconstruct_dual(side, arity, values):
    """Rebuild a dual-valued polyvector from functional values on tuples."""
    out = Element.zero(side.sig_dual)
    n = side.n
    for J, val in values.items():
        if val.is_zero():
            continue
        norm = _partial_norm(n, side.name, tuple(J))
        if not norm:
            raise ArithmeticError("degenerate evaluation normalisation")
        exps = [0] * (2 * n)
        for i in J:
            exps[n + i] += 1
        part = Element.monomial(side.sig_dual, tuple(exps))
        out = out + (val * part).scale(Fraction(1) / norm)
    return out


# ---------------------------------------------------------------------------
# shuffles
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def shuffles(p, q):
    """(p, q)-shuffles of 0..p+q-1 as source-position tuples."""
    out = []
    universe = range(p + q)
    for left in combinations(universe, p):
        right = tuple(i for i in universe if i not in left)
        out.append(left + right)
    return tuple(out)


def shifted_parity(side):
    """Parity of a d-letter of the side's coordinates."""
    return (side.sig_form.generators[side.n].homdeg) & 1


def shuffle_sign(side, perm):
    par = [shifted_parity(side)] * len(perm)
    return koszul_shuffle_sign(perm, par)


# ---------------------------------------------------------------------------
# Schouten bracket
# ---------------------------------------------------------------------------

def arity_components(side, P):
    parts = {}
    n = side.n
    for e, c in P.terms.items():
        a = sum(e[n:])
        parts.setdefault(a, {})[e] = c
    return {a: Element(P.sig, t) for a, t in parts.items()}


def _bigraded_components(side, P):
    parts = {}
    n = side.n
    sig = P.sig
    for e, c in P.terms.items():
        key = (side.complex_degree(sig, e), sum(e[n:]))
        parts.setdefault(key, {})[e] = c
    return {k: Element(sig, t) for k, t in parts.items()}


def schouten(side, P, Q):
    """Schouten bracket via the double shuffle formula.

    [P,Q](f_1..f_{p+q-1}) is the (q,p-1)-shuffle sum of P(Q(..), ..)
    minus (-1)^{(dP-1)(dQ-1)} times the mirrored sum, where the shuffle
    shapes use the arities and the exchange prefactor uses the complex
    degrees (these coincide for even coordinates).  On the odd-coordinate
    side the whole double sum carries one global minus; both conventions
    are pinned by the bracket-generator regression tests.
    """
    if P.sig != side.sig_poly or Q.sig != side.sig_poly:
        raise SignatureMismatch("schouten expects two polyvectors on one side")
    out = Element.zero(side.sig_poly)
    parts_P = _bigraded_components(side, P)
    parts_Q = _bigraded_components(side, Q)
    coords = [Element.generator(side.sig_form, i) for i in range(side.n)]
    overall = -1 if side.sig_form.generators[0].odd else 1
    for (dp, p), Pp in parts_P.items():
        for (dq, q), Qq in parts_Q.items():
            r = p + q - 1
            if r < 0:
                continue
            pref = -1 if ((dp - 1) * (dq - 1)) & 1 else 1
            values = {}
            for T in arg_tuples(side, r):
                args = [coords[i] for i in T]
                acc = Element.zero(side.sig_form)
                if p >= 1:
                    for perm in shuffles(q, p - 1):
                        sign = shuffle_sign(side, perm)
                        inner = evaluate(side, Qq, [args[k] for k in perm[:q]])
                        if inner.is_zero():
                            continue
                        val = evaluate(
                            side, Pp, [inner] + [args[k] for k in perm[q:]]
                        )
                        acc = acc + val.scale(sign)
                if q >= 1:
                    for perm in shuffles(p, q - 1):
                        sign = pref * shuffle_sign(side, perm)
                        inner = evaluate(side, Pp, [args[k] for k in perm[:p]])
                        if inner.is_zero():
                            continue
                        val = evaluate(
                            side, Qq, [inner] + [args[k] for k in perm[p:]]
                        )
                        acc = acc - val.scale(sign)
                if not acc.is_zero():
                    values[T] = acc
            if values:
                out = out + reconstruct(side, r, values).scale(overall)
    return out


# ---------------------------------------------------------------------------
# dual contraction and dual exterior differential
# ---------------------------------------------------------------------------

def contract_dual(side, P, phi):
    """iota*_P phi: the shuffle action of a polyvector on a dual polyvector."""
    if side.sig_dual is None:
        raise ValueError("contract_dual lives on the Koszul side")
    if P.sig != side.sig_poly or phi.sig != side.sig_dual:
        raise SignatureMismatch("contract_dual expects (polyvector, dual)")
    out = Element.zero(side.sig_dual)
    coords = [Element.generator(side.sig_form, i) for i in range(side.n)]
    parts_P = arity_components(side, P)
    parts_phi = {}
    n = side.n
    for e, c in phi.terms.items():
        a = sum(e[n:])
        parts_phi.setdefault(a, {})[e] = c
    parts_phi = {a: Element(side.sig_dual, t) for a, t in parts_phi.items()}
    for p, Pp in parts_P.items():
        for q, Fq in parts_phi.items():
            values = {}
            for T in arg_tuples(side, p + q):
                args = [coords[i] for i in T]
                acc = Element.zero(side.sig_dual)
                for perm in shuffles(p, q):
                    sign = shuffle_sign(side, perm)
                    pval = evaluate(side, Pp, [args[k] for k in perm[:p]])
                    if pval.is_zero():
                        continue
                    fval = eval_dual(side, Fq, [args[k] for k in perm[p:]])
                    if fval.is_zero():
                        continue
                    acc = acc + module_action(side, pval, fval).scale(sign)
                if not acc.is_zero():
                    values[T] = acc
            if values:
                out = out + reconstruct_dual(side, p + q, values)
    return out


def _form_partner_exps(side, exps):
    return exps[side.n :]


@lru_cache(maxsize=None)
def _dual_norm(n, star_key, partial_key):
    """<dual monomial, form monomial> for matching exponent patterns."""
    side = Side(n, KOSZUL)
    dual_exps = star_key + partial_key
    form_exps = star_key + partial_key
    dual_mono = Element.monomial(side.sig_dual, dual_exps)
    partials = []
    for i in range(n):
        partials.extend([i] * partial_key[i])
    form_mono = Element.monomial(side.sig_form, form_exps)
    tmp = form_mono
    for i in reversed(partials):
        tmp = contract_single(side, side.sig_form, i, tmp)
    tmp = project_coords(side, tmp)
    star = Element.monomial(side.sig_dual, star_key + (0,) * n)
    acted = module_action(side, tmp, star)
    return acted.terms.get(side.sig_dual.zero_exponents(), Fraction(0))


def pair_dual_form(side, phi, omega):
    """Full pairing between dual-valued polyvectors and forms."""
    total = Fraction(0)
    n = side.n
    for fe, fc in phi.terms.items():
        oc = omega.terms.get(fe)
        if oc:
            norm = _dual_norm(n, fe[:n], fe[n:])
            total += fc * oc * norm
    return total


def dual_de_rham(side, phi):
    """Transpose of the exterior differential on dual-valued polyvectors.

    <d* phi, w> = (-1)^{|phi|} <phi, d w> on every monomial pair.
    """
    if side.sig_dual is None:
        raise ValueError("dual_de_rham lives on the Koszul side")
    if phi.sig != side.sig_dual:
        raise SignatureMismatch("dual_de_rham expects a dual-valued polyvector")
    n = side.n
    out = Element.zero(side.sig_dual)
    for exps, coeff in phi.terms.items():
        sign = _dual_transpose_sign(side.sig_dual.monomial_homdeg(exps))
        stars, partials = exps[:n], exps[n:]
        norm_m = _dual_norm(n, stars, partials)
        # candidate preimages: one d-letter of the paired form un-bars into
        # a coordinate, i.e. stars lose nothing, a partial drops by one and
        # a coordinate slot gains one.
        for i in range(n):
            if partials[i] == 0 or stars[i] >= 1:
                continue
            new_stars = list(stars)
            new_stars[i] += 1
            new_partials = list(partials)
            new_partials[i] -= 1
            cand_form = Element.monomial(
                side.sig_form, tuple(new_stars) + tuple(new_partials)
            )
            if cand_form.is_zero():
                continue
            d_cand = de_rham(side, cand_form)
            target = exps
            c = d_cand.terms.get(target)
            if not c:
                continue
            norm_c = _dual_norm(n, tuple(new_stars), tuple(new_partials))
            dual_mono = Element.monomial(
                side.sig_dual, tuple(new_stars) + tuple(new_partials)
            )
            out = out + dual_mono.scale(sign * coeff * c * norm_m / norm_c)
    return out
