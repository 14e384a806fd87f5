"""HTTP front end: one POST endpoint per workbench command."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import handlers
from .schemas import (
    BvVerifyRequest,
    DualRequest,
    FuzzRequest,
    HochschildRequest,
    HomologyRequest,
    JacobiRequest,
    KoszulAcyclicRequest,
    Report,
    TheoremRequest,
    UnimodularRequest,
)

app = FastAPI(
    title="quadpoisson",
    description=(
        "Exact verification service for quadratic Poisson structures: "
        "Jacobi and unimodularity checks, per-weight homology tables, "
        "duality transposes, operator identities and bar-complex calculus."
    ),
)


def _run(handler, request):
    try:
        return handler(request)
    except handlers.InputError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/jacobi", response_model=Report)
def jacobi(request: JacobiRequest):
    return _run(handlers.handle_jacobi, request)


@app.post("/dual", response_model=Report)
def dual(request: DualRequest):
    return _run(handlers.handle_dual, request)


@app.post("/homology", response_model=Report)
def homology(request: HomologyRequest):
    return _run(handlers.handle_homology, request)


@app.post("/unimodular", response_model=Report)
def unimodular(request: UnimodularRequest):
    return _run(handlers.handle_unimodular, request)


@app.post("/bv-verify", response_model=Report)
def bv_verify(request: BvVerifyRequest):
    return _run(handlers.handle_bv_verify, request)


@app.post("/verify", response_model=Report)
def verify(request: TheoremRequest):
    return _run(handlers.handle_verify, request)


@app.post("/koszul-acyclic", response_model=Report)
def koszul_acyclic(request: KoszulAcyclicRequest):
    return _run(handlers.handle_koszul_acyclic, request)


@app.post("/hochschild", response_model=Report)
def hochschild(request: HochschildRequest):
    return _run(handlers.handle_hochschild, request)


@app.post("/fuzz", response_model=Report)
def fuzz(request: FuzzRequest):
    return _run(handlers.handle_fuzz, request)
