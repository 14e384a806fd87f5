"""Quadratic duality: dual coalgebra components, the Koszul complex per
weight, the bivector transpose between the polynomial and exterior sides,
and the half-swap chain isomorphisms between their complexes.

Tensors over the generating space are sparse {index tuple: Fraction} maps.
Components of the dual coalgebra are computed by the pairwise-intersection
recursion U_m = (V (x) U_{m-1}) n (U_{m-1} (x) V); degree components of the
quadratic algebra itself are realised through the annihilator of the
relation ideal slice, which obeys the same recursion over the orthogonal
relation space.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import Element
from .linalg import SparseMatrix, rank_kernel, solve_in_image
from .poisson import QuadraticBivector
from .sides import KOSZUL, PRIMAL, Side


class QuadraticPresentation:
    """Generators plus a spanning list of quadratic relations.

    `dim` is the number of generators; relations are sparse two-index
    tensors.  The stored relation list is reduced to a basis on input.
    """

    def __init__(self, dim, relations, degrees=None):
        self.dim = dim
        self.degrees = tuple(degrees) if degrees else (0,) * dim
        rel = [
            {k: Fraction(v) for k, v in r.items() if v} for r in relations
        ]
        rel = [r for r in rel if r]
        for r in rel:
            for (i, j) in r:
                if not (0 <= i < dim and 0 <= j < dim):
                    raise ValueError("relation index out of range")
        self.relations = _reduce_tensors(rel, dim, 2)

    @classmethod
    def polynomial(cls, n):
        """Commuting generators: relations e_i e_j - e_j e_i, i < j."""
        rel = []
        for i in range(n):
            for j in range(i + 1, n):
                rel.append({(i, j): Fraction(1), (j, i): Fraction(-1)})
        return cls(n, rel)

    @classmethod
    def exterior(cls, n):
        """Anticommuting generators: e_i e_j + e_j e_i and squares."""
        rel = []
        for i in range(n):
            rel.append({(i, i): Fraction(1)})
            for j in range(i + 1, n):
                rel.append({(i, j): Fraction(1), (j, i): Fraction(1)})
        return cls(n, rel)

    def relation_perp(self):
        """Basis of the annihilator of the relation space in degree two."""
        cached = getattr(self, "_perp", None)
        if cached is not None:
            return cached
        cols = [(i, j) for i in range(self.dim) for j in range(self.dim)]
        index = {c: k for k, c in enumerate(cols)}
        mat = SparseMatrix(len(self.relations), len(cols))
        for r, rel in enumerate(self.relations):
            for key, v in rel.items():
                mat.entries[(r, index[key])] = v
        _, kern = rank_kernel(mat)
        out = []
        for vec in kern:
            out.append({cols[c]: v for c, v in vec.items()})
        self._perp = out
        return out

    def u_tower(self, max_m):
        """Cached dual-coalgebra tower up to tensor order max_m."""
        tower = getattr(self, "_u_tower", None)
        if tower is None or len(tower) <= max_m:
            tower = _tower(self.relations, self.dim, max_m)
            self._u_tower = tower
        return tower

    def w_tower(self, max_m):
        """Cached annihilator tower of the relation ideal slices."""
        tower = getattr(self, "_w_tower", None)
        if tower is None or len(tower) <= max_m:
            tower = _tower(self.relation_perp(), self.dim, max_m)
            self._w_tower = tower
        return tower

    def algebra_basis(self, j):
        """Cached pivot-monomial basis plus functionals in degree j."""
        cache = getattr(self, "_alg_basis", None)
        if cache is None:
            cache = {}
            self._alg_basis = cache
        if j not in cache:
            cache[j] = algebra_component_basis(self, j)
        return cache[j]

    def algebra_coords(self, word, j):
        """Cached coordinates of a word's class in the degree-j basis."""
        cache = getattr(self, "_alg_coords", None)
        if cache is None:
            cache = {}
            self._alg_coords = cache
        if word not in cache:
            monos, funcs = self.algebra_basis(j)
            cache[word] = _express_in_algebra(word, monos, funcs)
        return cache[word]


def _tensor_keys(tensors):
    keys = set()
    for t in tensors:
        keys.update(t)
    return sorted(keys)


def _reduce_tensors(tensors, dim, order):
    """Row-reduce a list of sparse tensors to an independent list."""
    if not tensors:
        return []
    keys = _tensor_keys(tensors)
    index = {k: i for i, k in enumerate(keys)}
    mat = SparseMatrix(len(keys), len(tensors))
    for c, t in enumerate(tensors):
        for k, v in t.items():
            mat.entries[(index[k], c)] = v
    r, kern = rank_kernel(mat)
    if r == len(tensors):
        return tensors
    # keep the columns that are pivots of the transpose elimination
    drop = set()
    for vec in kern:
        lead = max(vec)
        drop.add(lead)
    return [t for c, t in enumerate(tensors) if c not in drop]


def _intersect(space_a, space_b, order):
    """Intersection of two spanned tensor spaces of the same tensor order."""
    if not space_a or not space_b:
        return []
    keys = _tensor_keys(space_a + space_b)
    index = {k: i for i, k in enumerate(keys)}
    cols = len(space_a) + len(space_b)
    mat = SparseMatrix(len(keys), cols)
    for c, t in enumerate(space_a):
        for k, v in t.items():
            mat.entries[(index[k], c)] = v
    for c, t in enumerate(space_b):
        for k, v in t.items():
            mat.entries[(index[k], len(space_a) + c)] = -v
    _, kern = rank_kernel(mat)
    out = []
    for vec in kern:
        combo = {}
        for c, coef in vec.items():
            if c >= len(space_a):
                continue
            for k, v in space_a[c].items():
                combo[k] = combo.get(k, 0) + coef * v
        combo = {k: v for k, v in combo.items() if v}
        if combo:
            out.append(combo)
    return _reduce_tensors(out, 0, order)


def _extend_left(space, dim):
    out = []
    for e in range(dim):
        for t in space:
            out.append({(e,) + k: v for k, v in t.items()})
    return out


def _extend_right(space, dim):
    out = []
    for t in space:
        for e in range(dim):
            out.append({k + (e,): v for k, v in t.items()})
    return out


def _tower(seed, dim, max_order):
    """[T_0, T_1, ..., T_max] with T_m = (V (x) T_{m-1}) n (T_{m-1} (x) V).

    T_0 is the scalar line, T_1 the generating space, T_2 the seed.
    """
    tower = [
        [{(): Fraction(1)}],
        [{(i,): Fraction(1)} for i in range(dim)],
        list(seed),
    ]
    while len(tower) <= max_order:
        prev = tower[-1]
        if not prev:
            tower.append([])
            continue
        tower.append(
            _intersect(_extend_left(prev, dim), _extend_right(prev, dim), len(tower))
        )
    return tower[: max_order + 1]


def dual_coalgebra_component(pres, m):
    """Basis of the weight-m component of the dual coalgebra."""
    if m < 0:
        raise ValueError("component index must be nonnegative")
    return pres.u_tower(m)[m]


def algebra_component_basis(pres, j):
    """Pivot-monomial basis of the degree-j component of the algebra.

    Returns (monomials, functionals): the chosen representative words and
    the annihilator basis dual to the quotient, with the Gram matrix
    between them upper triangular by construction.
    """
    funcs = pres.w_tower(j)[j]
    if not funcs:
        return [], []
    keys = _tensor_keys(funcs)
    index = {k: i for i, k in enumerate(keys)}
    mat = SparseMatrix(len(funcs), len(keys))
    for r, t in enumerate(funcs):
        for k, v in t.items():
            mat.entries[(r, index[k])] = v
    # pivot columns of the functional matrix give the monomial basis
    from .linalg import _eliminate, _integer_rows

    pivots = _eliminate(_integer_rows(mat), len(keys), "leftmost")
    monos = [keys[c] for c, _ in pivots]
    return monos, funcs


class KoszulComplexSlice:
    """One weight strand of the Koszul complex with its differentials."""

    def __init__(self, weight, spaces, matrices):
        self.weight = weight
        self.spaces = spaces  # list of (algebra degree, coalgebra degree, dim)
        self.matrices = matrices  # matrices[i]: component i -> component i-1

    def homology_dims(self):
        from .linalg import rank

        dims = []
        for k, (_, _, d) in enumerate(self.spaces):
            out_rank = rank(self.matrices[k]) if k < len(self.matrices) else 0
            in_rank = rank(self.matrices[k - 1]) if k >= 1 else 0
            dims.append(d - out_rank - in_rank)
        return dims


def koszul_complex_slice(pres, weight):
    """Assemble the weight strand A_{w-i} (x) U_i with its differentials."""
    dim = pres.dim
    comps = pres.u_tower(weight)
    # component i: A_{weight-i} (x) U_i, listed from i = weight down to 0
    spaces = []
    bases = []
    for i in range(weight, -1, -1):
        monos, funcs = pres.algebra_basis(weight - i)
        u_basis = comps[i] if i < len(comps) else []
        dim_c = len(monos) * len(u_basis)
        spaces.append((weight - i, i, dim_c))
        bases.append((monos, funcs, u_basis))
    matrices = []
    for k in range(len(spaces) - 1):
        matrices.append(
            _koszul_differential(pres, bases[k], bases[k + 1], dim, weight, k)
        )
    return KoszulComplexSlice(weight, spaces, matrices)


def _express_in_algebra(word, monos, funcs):
    """Coordinates of a word's class in the pivot-monomial basis."""
    if not monos:
        return None
    rows = len(funcs)
    mat = SparseMatrix(rows, len(monos))
    for r, f in enumerate(funcs):
        for c, m in enumerate(monos):
            v = f.get(m)
            if v:
                mat.entries[(r, c)] = v
    vec = {}
    for r, f in enumerate(funcs):
        v = f.get(word)
        if v:
            vec[r] = v
    sol, cert = solve_in_image(mat, vec)
    if sol is None:
        raise ArithmeticError("algebra class failed to resolve")
    return sol


def _koszul_differential(pres, src, dst, dim, weight, spot):
    """Matrix of r (x) f -> sum_e (e r) (x) (e* |- f) between strand spots."""
    s_monos, s_funcs, s_u = src
    d_monos, d_funcs, d_u = dst
    rows = len(d_monos) * len(d_u)
    cols = len(s_monos) * len(s_u)
    mat = SparseMatrix(rows, cols)
    if rows == 0 or cols == 0:
        return mat
    # index maps for the destination coalgebra component
    d_u_keys = _tensor_keys(d_u)
    d_u_index = {k: i for i, k in enumerate(d_u_keys)}
    d_u_mat = SparseMatrix(len(d_u_keys), len(d_u))
    for c, t in enumerate(d_u):
        for k, v in t.items():
            d_u_mat.entries[(d_u_index[k], c)] = v
    for cs, mono in enumerate(s_monos):
        for cu, u in enumerate(s_u):
            col = cs * len(s_u) + cu
            # deconcatenate the leading tensor slot of u
            by_lead = {}
            for key, v in u.items():
                by_lead.setdefault(key[0], {})[key[1:]] = v
            for e, tail in by_lead.items():
                # express e* |- u in the destination coalgebra basis
                vec = {}
                for k, v in tail.items():
                    idx = d_u_index.get(k)
                    if idx is None:
                        raise ArithmeticError("deconcatenation left the component")
                    vec[idx] = v
                sol, cert = solve_in_image(d_u_mat, vec)
                if sol is None:
                    raise ArithmeticError("deconcatenation failed to resolve")
                # multiply the word by e on the left and resolve its class
                word = (e,) + mono
                coords = pres.algebra_coords(word, len(word))
                if coords is None:
                    continue
                for cm, vm in coords.items():
                    for cu2, vu in sol.items():
                        row = cm * len(d_u) + cu2
                        prev = mat.entries.get((row, col), Fraction(0))
                        val = prev + vm * vu
                        if val:
                            mat.entries[(row, col)] = val
                        else:
                            mat.entries.pop((row, col), None)
    return mat


def koszul_acyclicity(pres, max_weight):
    """Check exactness of every weight strand up to the cutoff.

    Returns a report dict; weight 0 computes the ground field and is
    reported separately.  Any failing (weight, spot) lands in "failures"
    with the offending homology dimension.
    """
    report = {"max_weight": max_weight, "weights": {}, "failures": []}
    for w in range(1, max_weight + 1):
        sl = koszul_complex_slice(pres, w)
        dims = sl.homology_dims()
        report["weights"][w] = {
            "space_dims": [d for (_, _, d) in sl.spaces],
            "homology": dims,
        }
        for spot, d in enumerate(dims):
            if d != 0:
                report["failures"].append(
                    {"weight": w, "spot": spot, "dim": d}
                )
    report["acyclic"] = not report["failures"]
    return report


# ---------------------------------------------------------------------------
# bivector transpose and the chain isomorphisms
# ---------------------------------------------------------------------------

def koszul_dual_bivector(pi):
    """Transpose the coefficient tensor onto the opposite side."""
    target = KOSZUL if pi.side_name == PRIMAL else PRIMAL
    return QuadraticBivector.from_terms(pi.n, target, pi.to_terms())


def _swap_halves(exps, n):
    return exps[n:] + exps[:n]


def phi(primal_side, koszul_side, omega):
    """Form-to-dual-polyvector isomorphism: x -> Dxi, dx -> xs, sign-free."""
    if omega.sig != primal_side.sig_form:
        raise ValueError("phi expects a primal form")
    n = primal_side.n
    return Element(
        koszul_side.sig_dual,
        {_swap_halves(e, n): c for e, c in omega.terms.items()},
    )


def phi_inverse(primal_side, koszul_side, elem):
    if elem.sig != koszul_side.sig_dual:
        raise ValueError("phi_inverse expects a dual-valued polyvector")
    n = primal_side.n
    return Element(
        primal_side.sig_form,
        {_swap_halves(e, n): c for e, c in elem.terms.items()},
    )


def psi(primal_side, koszul_side, P):
    """Polyvector isomorphism: x -> Dxi, Dx -> xi; a ring map on the nose."""
    if P.sig != primal_side.sig_poly:
        raise ValueError("psi expects a primal polyvector")
    n = primal_side.n
    return Element(
        koszul_side.sig_poly,
        {_swap_halves(e, n): c for e, c in P.terms.items()},
    )


def psi_inverse(primal_side, koszul_side, P):
    if P.sig != koszul_side.sig_poly:
        raise ValueError("psi_inverse expects a Koszul polyvector")
    n = primal_side.n
    return Element(
        primal_side.sig_poly,
        {_swap_halves(e, n): c for e, c in P.terms.items()},
    )


def verify_chain_isomorphisms(pi, max_weight=4, degrees=None):
    """Chain-map and bijectivity checks for both substitution maps, plus
    slicewise equality of the paired homology tables.

    For the form map: applying the boundary then substituting equals
    substituting then applying the dual differential, on every slice
    basis monomial up to the cutoff.  For the polyvector map the same
    with the algebra-coefficient differentials.  The tables compared are
    chain homology against dual-coefficient cohomology, and the two
    algebra-coefficient cohomologies.
    """
    from .poisson import homology_dims, jacobi_check, JacobiError
    from .poisson import poisson_boundary, poisson_coboundary

    if pi.side_name != PRIMAL:
        raise ValueError("chain isomorphism verification starts primal")
    ok, wit = jacobi_check(pi)
    if not ok:
        raise JacobiError(wit)
    dual = koszul_dual_bivector(pi)
    pside, kside = pi.side, dual.side
    n = pside.n
    degrees = list(degrees) if degrees is not None else list(range(0, n + 1))
    report = {
        "phi_chain_map": True,
        "psi_chain_map": True,
        "phi_bijective": True,
        "psi_bijective": True,
        "tables_low_vs_dual": None,
        "tables_high_vs_high": None,
        "failures": [],
    }
    for p in degrees:
        for w in range(-n, max_weight + 1):
            form_basis = pside.slice_basis(pside.sig_form, p, w)
            for mono in form_basis:
                omega = Element.monomial(pside.sig_form, mono)
                lhs = phi(pside, kside, poisson_boundary(pi, omega))
                rhs = poisson_coboundary(dual, phi(pside, kside, omega), "dual")
                if lhs != rhs:
                    report["phi_chain_map"] = False
                    report["failures"].append(("phi", p, w, mono))
            if form_basis:
                image = {
                    tuple(_swap_halves(m, n)) for m in form_basis
                }
                target = set(kside.slice_basis(kside.sig_dual, p, w))
                if image != target:
                    report["phi_bijective"] = False
            poly_basis = pside.slice_basis(pside.sig_poly, p, w)
            for mono in poly_basis:
                P = Element.monomial(pside.sig_poly, mono)
                lhs = psi(pside, kside, poisson_coboundary(pi, P, "self"))
                rhs = poisson_coboundary(dual, psi(pside, kside, P), "self")
                if lhs != rhs:
                    report["psi_chain_map"] = False
                    report["failures"].append(("psi", p, w, mono))
            if poly_basis:
                image = {tuple(_swap_halves(m, n)) for m in poly_basis}
                target = set(kside.slice_basis(kside.sig_poly, p, w))
                if image != target:
                    report["psi_bijective"] = False
    low = homology_dims(pi, "hp_low", degrees, max_weight)
    dual_low = homology_dims(dual, "hp_high_dual", degrees, max_weight)
    high = homology_dims(pi, "hp_high", degrees, max_weight)
    dual_high = homology_dims(dual, "hp_high", degrees, max_weight)
    report["tables_low_vs_dual"] = low == dual_low
    report["tables_high_vs_high"] = high == dual_high
    report["betti_low"] = low
    report["betti_low_dual"] = dual_low
    report["betti_high"] = high
    report["betti_high_dual_side"] = dual_high
    report["ok"] = all(
        [
            report["phi_chain_map"],
            report["psi_chain_map"],
            report["phi_bijective"],
            report["psi_bijective"],
            report["tables_low_vs_dual"],
            report["tables_high_vs_high"],
        ]
    )
    return report
