"""Request and response models for the verification service.

Rationals travel as exact "p/q" strings.  Indices in structure files are
1-based; internally everything is 0-based.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class BivectorTerm(BaseModel):
    i1: int
    i2: int
    j1: int
    j2: int
    c: str = "1"


class CubicTerm(BaseModel):
    exponents: list[int]
    c: str = "1"


class GeneratorBlock(BaseModel):
    family: Literal["eg", "pym"]
    cubic: Optional[list[CubicTerm]] = None
    alpha: Optional[list[list[CubicTerm]]] = None


class Structure(BaseModel):
    n: int = Field(ge=0)
    side: Literal["primal", "koszul"] = "primal"
    terms: list[BivectorTerm] = Field(default_factory=list)
    generator: Optional[GeneratorBlock] = None


class AlgebraProduct(BaseModel):
    left: int
    right: int
    value: dict[str, str]


class AlgebraPresentation(BaseModel):
    basis: list[str]
    degrees: list[int]
    unit: int
    products: list[AlgebraProduct]
    nakayama: Optional[list[int]] = None


class JacobiRequest(BaseModel):
    structure: Structure


class DualRequest(BaseModel):
    structure: Structure


class HomologyRequest(BaseModel):
    structure: Structure
    which: Literal["hp_low", "hp_high", "hp_high_dual"] = "hp_low"
    degrees: str = ""
    max_weight: Optional[int] = None


class UnimodularRequest(BaseModel):
    structure: Structure
    max_weight: Optional[int] = None


class BvVerifyRequest(BaseModel):
    structure: Structure
    samples: int = 100
    seed: int = 0
    max_weight: Optional[int] = None
    max_degree: int = 3


class TheoremRequest(BaseModel):
    structure: Structure
    theorem: Literal["thm1", "thm2", "thm3"]
    max_weight: Optional[int] = None


class KoszulAcyclicRequest(BaseModel):
    n: int = Field(ge=1)
    presentation: Literal["polynomial", "exterior"] = "polynomial"
    max_weight: Optional[int] = None


class HochschildRequest(BaseModel):
    algebra: Literal["exterior", "file"] = "exterior"
    gens: int = 1
    presentation: Optional[AlgebraPresentation] = None
    coeff: Literal["self", "dual"] = "self"
    max_level: int = 3
    cartan_fuzz: int = 0
    seed: int = 0


class FuzzRequest(BaseModel):
    family: Literal["eg", "pym", "random"] = "eg"
    cases: int = 10
    seed: int = 0
    n: int = 3
    max_weight: Optional[int] = None


class BettiEntry(BaseModel):
    degree: int
    weight: int
    dim: int


class Report(BaseModel):
    command: str
    echo: dict
    seed: Optional[int] = None
    verdicts: dict
    tables: dict[str, list[BettiEntry]] = Field(default_factory=dict)
    witnesses: dict[str, str] = Field(default_factory=dict)
    details: dict = Field(default_factory=dict)
    timing_ms: float = 0.0
    exit_code: int = 0
