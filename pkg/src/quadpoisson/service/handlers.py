"""Command handlers shared by the HTTP service and the command line.

Every handler takes a validated request model and returns a Report.
Input problems raise InputError (exit code 2 territory); a verified
property that fails study produces exit code 1 with the witness in the
report, never an exception.
"""

from __future__ import annotations

import os
import random
import time
from fractions import Fraction

from ..algebra import Element
from ..bv import (
    DEFAULT_MAX_WEIGHT,
    eg_bracket,
    is_unimodular,
    pym_bracket,
    verify_bv_identity,
    verify_theorem_bv_transport,
    verify_theorem_duality,
)
from ..hochschild import (
    BarChain,
    BarCochain,
    FiniteGradedAlgebra,
    SymmetricPairing,
    cartan_one_defect,
    cartan_two_defect,
    dual_coboundary,
    hochschild_dims,
    tradler_cap,
    _chain_words,
)
from ..koszul import (
    QuadraticPresentation,
    koszul_acyclicity,
    koszul_dual_bivector,
    verify_chain_isomorphisms,
)
from ..poisson import (
    JacobiError,
    QuadraticBivector,
    homology_dims,
    jacobi_check,
)
from .schemas import BettiEntry, Report


class InputError(ValueError):
    """Schema-level or precondition failure; maps to exit code 2."""


def default_max_weight():
    raw = os.environ.get("QUADPOISSON_MAX_WEIGHT")
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            raise InputError(f"bad QUADPOISSON_MAX_WEIGHT: {raw!r}") from exc
    return DEFAULT_MAX_WEIGHT


def _frac(text, where):
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {text!r} in {where}") from exc


def parse_structure(spec):
    """Build the bivector a structure file describes."""
    n = spec.n
    if spec.generator is not None:
        block = spec.generator
        if block.family == "eg":
            if n != 3:
                raise InputError("the cubic generator family needs n = 3")
            if not block.cubic:
                raise InputError("generator family 'eg' needs a cubic block")
            coeffs = {}
            for term in block.cubic:
                key = tuple(term.exponents)
                coeffs[key] = coeffs.get(key, Fraction(0)) + _frac(
                    term.c, "generator.cubic"
                )
            try:
                return eg_bracket(coeffs)
            except ValueError as exc:
                raise InputError(str(exc)) from exc
        if n != 4:
            raise InputError("the one-form generator family needs n = 4")
        if not block.alpha or len(block.alpha) != 4:
            raise InputError("generator family 'pym' needs four components")
        comps = []
        for k, comp in enumerate(block.alpha):
            cur = {}
            for term in comp:
                key = tuple(term.exponents)
                cur[key] = cur.get(key, Fraction(0)) + _frac(
                    term.c, f"generator.alpha[{k}]"
                )
            comps.append(cur)
        try:
            return pym_bracket(comps)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    terms = []
    for t in spec.terms:
        for idx in (t.i1, t.i2, t.j1, t.j2):
            if not 1 <= idx <= n:
                raise InputError(f"index {idx} outside 1..{n}")
        terms.append((t.i1 - 1, t.i2 - 1, t.j1 - 1, t.j2 - 1, _frac(t.c, "terms")))
    return QuadraticBivector.from_terms(n, spec.side, terms)


def structure_echo(spec):
    return spec.model_dump(exclude_none=True)


def terms_payload(pi):
    return [
        {
            "i1": i1 + 1,
            "i2": i2 + 1,
            "j1": j1 + 1,
            "j2": j2 + 1,
            "c": str(c),
        }
        for (i1, i2, j1, j2, c) in pi.to_terms()
    ]


def betti_payload(table):
    return [
        BettiEntry(degree=p, weight=w, dim=d)
        for (p, w), d in sorted(table.dims.items())
        if d
    ]


def parse_degrees(text, n):
    if not text:
        return range(0, n + 1)
    try:
        lo, hi = text.split("..")
        return range(int(lo), int(hi) + 1)
    except ValueError as exc:
        raise InputError(f"bad degree range {text!r}, expected 'a..b'") from exc


def _report(command, echo, verdicts, started, *, seed=None, tables=None,
            witnesses=None, details=None, exit_code=0):
    return Report(
        command=command,
        echo=echo,
        seed=seed,
        verdicts=verdicts,
        tables=tables or {},
        witnesses=witnesses or {},
        details=details or {},
        timing_ms=(time.time() - started) * 1000.0,
        exit_code=exit_code,
    )


def handle_jacobi(req):
    started = time.time()
    pi = parse_structure(req.structure)
    ok, witness = jacobi_check(pi)
    return _report(
        "jacobi",
        structure_echo(req.structure),
        {"jacobi": ok},
        started,
        witnesses={} if ok else {"self_bracket": str(witness)},
        exit_code=0 if ok else 1,
    )


def handle_dual(req):
    started = time.time()
    pi = parse_structure(req.structure)
    dual = koszul_dual_bivector(pi)
    return _report(
        "dual",
        structure_echo(req.structure),
        {"side": dual.side_name},
        started,
        details={"terms": terms_payload(dual), "n": dual.n},
    )


def handle_homology(req):
    started = time.time()
    pi = parse_structure(req.structure)
    max_weight = req.max_weight if req.max_weight is not None else default_max_weight()
    degrees = parse_degrees(req.degrees, pi.n)
    try:
        table = homology_dims(pi, req.which, degrees, max_weight)
    except JacobiError as exc:
        return _report(
            "homology",
            structure_echo(req.structure),
            {"jacobi": False},
            started,
            witnesses={"self_bracket": str(exc.witness)},
            exit_code=1,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return _report(
        "homology",
        structure_echo(req.structure),
        {"jacobi": True, "which": req.which},
        started,
        tables={req.which: betti_payload(table)},
        details={"max_weight": max_weight, "degrees": [degrees[0], degrees[-1]]},
    )


def handle_unimodular(req):
    started = time.time()
    pi = parse_structure(req.structure)
    max_weight = req.max_weight if req.max_weight is not None else default_max_weight()
    try:
        ok, rep = is_unimodular(pi, max_weight=max_weight)
    except JacobiError as exc:
        return _report(
            "unimodular",
            structure_echo(req.structure),
            {"jacobi": False},
            started,
            witnesses={"self_bracket": str(exc.witness)},
            exit_code=1,
        )
    witnesses = {}
    if rep["witness"] is not None:
        witnesses["volume_boundary"] = str(rep["witness"])
    if rep["square_witness"] is not None:
        cdeg, weight, entry = rep["square_witness"]
        witnesses["square"] = f"slice degree {cdeg} weight {weight} entry {entry}"
    return _report(
        "unimodular",
        structure_echo(req.structure),
        {
            "jacobi": True,
            "unimodular": ok,
            "cycle": rep["cycle"],
            "diagram": rep["diagram"],
            "discrepancy": rep["discrepancy"],
        },
        started,
        witnesses=witnesses,
        details={"max_weight": max_weight},
        exit_code=0 if ok else 1,
    )


def handle_bv_verify(req):
    started = time.time()
    pi = parse_structure(req.structure)
    max_weight = req.max_weight if req.max_weight is not None else default_max_weight()
    try:
        rep = verify_bv_identity(
            pi,
            samples=req.samples,
            max_weight=max_weight,
            seed=req.seed,
            max_degree=req.max_degree,
        )
    except JacobiError as exc:
        return _report(
            "bv-verify",
            structure_echo(req.structure),
            {"jacobi": False},
            started,
            seed=req.seed,
            witnesses={"self_bracket": str(exc.witness)},
            exit_code=1,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return _report(
        "bv-verify",
        structure_echo(req.structure),
        {"ok": rep["ok"]},
        started,
        seed=req.seed,
        details=rep,
        exit_code=0 if rep["ok"] else 1,
    )


def handle_verify(req):
    started = time.time()
    pi = parse_structure(req.structure)
    max_weight = req.max_weight if req.max_weight is not None else default_max_weight()
    try:
        if req.theorem == "thm1":
            rep = verify_chain_isomorphisms(pi, max_weight=max_weight)
            tables = {
                "hp_low": betti_payload(rep.pop("betti_low")),
                "hp_high_dual": betti_payload(rep.pop("betti_low_dual")),
                "hp_high": betti_payload(rep.pop("betti_high")),
                "hp_high_dual_side": betti_payload(rep.pop("betti_high_dual_side")),
            }
            rep.pop("failures", None)
            return _report(
                "verify",
                structure_echo(req.structure),
                {"theorem": req.theorem, "ok": rep["ok"]},
                started,
                tables=tables,
                details=rep,
                exit_code=0 if rep["ok"] else 1,
            )
        if req.theorem == "thm2":
            rep = verify_theorem_duality(pi, max_weight=max_weight)
            rep.pop("primal_report", None)
            rep.pop("dual_report", None)
            rep.pop("square_witness", None)
            return _report(
                "verify",
                structure_echo(req.structure),
                {"theorem": req.theorem, "ok": rep["ok"]},
                started,
                details=rep,
                exit_code=0 if rep["ok"] else 1,
            )
        rep = verify_theorem_bv_transport(pi, max_weight=max_weight)
        return _report(
            "verify",
            structure_echo(req.structure),
            {"theorem": req.theorem, "ok": rep["ok"]},
            started,
            details=rep,
            exit_code=0 if rep["ok"] else 1,
        )
    except JacobiError as exc:
        return _report(
            "verify",
            structure_echo(req.structure),
            {"theorem": req.theorem, "jacobi": False},
            started,
            witnesses={"self_bracket": str(exc.witness)},
            exit_code=1,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def handle_koszul_acyclic(req):
    started = time.time()
    max_weight = req.max_weight if req.max_weight is not None else default_max_weight()
    if req.presentation == "polynomial":
        pres = QuadraticPresentation.polynomial(req.n)
    else:
        pres = QuadraticPresentation.exterior(req.n)
    rep = koszul_acyclicity(pres, max_weight)
    return _report(
        "koszul-acyclic",
        {"n": req.n, "presentation": req.presentation},
        {"acyclic": rep["acyclic"]},
        started,
        details={
            "max_weight": max_weight,
            "failures": rep["failures"],
            "weights": {str(k): v for k, v in rep["weights"].items()},
        },
        exit_code=0 if rep["acyclic"] else 1,
    )


def _load_algebra(req):
    if req.algebra == "exterior":
        if req.gens < 1:
            raise InputError("exterior algebra needs at least one generator")
        return FiniteGradedAlgebra.exterior(req.gens)
    if req.presentation is None:
        raise InputError("algebra = 'file' needs a presentation block")
    data = req.presentation
    try:
        return FiniteGradedAlgebra(
            data.basis,
            data.degrees,
            data.unit,
            {
                (p.left, p.right): {int(k): Fraction(v) for k, v in p.value.items()}
                for p in data.products
            },
            data.nakayama,
        )
    except ValueError as exc:
        raise InputError(f"bad algebra presentation: {exc}") from exc


def handle_hochschild(req):
    started = time.time()
    alg = _load_algebra(req)
    dims = hochschild_dims(alg, req.coeff, max_level=req.max_level)
    entries = [
        BettiEntry(degree=lv, weight=wt, dim=d)
        for (lv, wt), d in sorted(dims.items())
    ]
    verdicts = {"coeff": req.coeff}
    details = {"dim": alg.dim, "max_level": req.max_level}
    exit_code = 0
    if req.cartan_fuzz:
        rng = random.Random(req.seed)
        fails = 0
        for _ in range(req.cartan_fuzz):
            f = _random_cochain(alg, rng, rng.randint(1, 3))
            a = _random_chain(alg, rng, rng.randint(0, 4))
            if not cartan_one_defect(f, a).is_zero():
                fails += 1
            g = _random_cochain(alg, rng, rng.randint(1, 2))
            f2 = _random_cochain(alg, rng, rng.randint(1, 2))
            a2 = _random_chain(alg, rng, rng.randint(0, 4))
            if not cartan_two_defect(f2, g, a2).is_zero():
                fails += 1
        verdicts["cartan_failures"] = fails
        details["cartan_fuzz"] = req.cartan_fuzz
        if fails:
            exit_code = 1
    return _report(
        "hochschild",
        {"algebra": req.algebra, "gens": req.gens, "coeff": req.coeff},
        verdicts,
        started,
        seed=req.seed if req.cartan_fuzz else None,
        tables={"hh": entries},
        details=details,
        exit_code=exit_code,
    )


def _random_cochain(alg, rng, level, bound=3):
    data = {}
    for w in alg.words(level):
        val = {}
        for k in range(alg.dim):
            c = rng.randint(-bound, bound)
            if c:
                val[k] = Fraction(c)
        if val:
            data[w] = val
    return BarCochain(alg, level, data)


def _random_chain(alg, rng, level, bound=3):
    data = {}
    for w in _chain_words(alg, level):
        c = rng.randint(-bound, bound)
        if c:
            data[w] = Fraction(c)
    return BarChain(alg, level, data)


def random_eg_structure(rng):
    coeffs = {}
    for exps in _cubic_exponents(3):
        c = rng.randint(-3, 3)
        if c:
            coeffs[exps] = Fraction(c)
    return coeffs


def random_pym_alpha(rng):
    """A valid one-form family: alpha = f dg - g df for random quadrics."""
    from ..sides import Side

    side = Side(4, "primal")

    def rand_quadric():
        e = Element.zero(side.sig_form)
        for exps in _quadric_exponents(4):
            c = rng.randint(-2, 2)
            if c:
                e = e + Element.monomial(side.sig_form, exps + (0, 0, 0, 0), c)
        return e

    from ..algebra import apply_derivation

    f, g = rand_quadric(), rand_quadric()
    comps = []
    for i in range(4):
        table = {i: Element.one(side.sig_form)}
        di_g = apply_derivation(table, 0, g)
        di_f = apply_derivation(table, 0, f)
        comp = f * di_g - g * di_f
        comps.append(
            {e[:4]: c for e, c in comp.terms.items()}
        )
    return comps


def _cubic_exponents(n):
    out = []
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                e[k] += 1
                out.append(tuple(e))
    return out


def _quadric_exponents(n):
    out = []
    for i in range(n):
        for j in range(i, n):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            out.append(tuple(e))
    return out


def handle_fuzz(req):
    started = time.time()
    rng = random.Random(req.seed)
    max_weight = req.max_weight if req.max_weight is not None else 3
    jacobi_true = jacobi_false = 0
    unimodular_true = unimodular_false = 0
    violations = []
    for case in range(req.cases):
        if req.family == "eg":
            pi = eg_bracket(random_eg_structure(rng))
            expect_unimodular = True
        elif req.family == "pym":
            try:
                pi = pym_bracket(random_pym_alpha(rng))
            except ValueError:
                violations.append({"case": case, "reason": "generator rejected"})
                continue
            expect_unimodular = True
        else:
            n = req.n
            terms = []
            for _ in range(rng.randint(1, 4)):
                terms.append(
                    (
                        rng.randrange(n),
                        rng.randrange(n),
                        rng.randrange(n),
                        rng.randrange(n),
                        Fraction(rng.randint(-3, 3)),
                    )
                )
            pi = QuadraticBivector.from_terms(n, "primal", terms)
            expect_unimodular = None
        ok, witness = jacobi_check(pi)
        if ok:
            jacobi_true += 1
        else:
            jacobi_false += 1
            if req.family in ("eg", "pym"):
                violations.append(
                    {"case": case, "reason": "jacobi failed", "witness": str(witness)}
                )
            continue
        if expect_unimodular is not None:
            uni, _ = is_unimodular(pi, max_weight=max_weight)
            if uni:
                unimodular_true += 1
            else:
                unimodular_false += 1
                violations.append({"case": case, "reason": "unimodularity failed"})
    verdicts = {
        "family": req.family,
        "cases": req.cases,
        "jacobi_true": jacobi_true,
        "jacobi_false": jacobi_false,
        "unimodular_true": unimodular_true,
        "unimodular_false": unimodular_false,
        "violations": len(violations),
    }
    return _report(
        "fuzz",
        {"family": req.family, "cases": req.cases, "n": req.n},
        verdicts,
        started,
        seed=req.seed,
        details={"violations": violations, "max_weight": max_weight},
        exit_code=0 if not violations else 1,
    )
