"""Random hybrid-instance generator for the four benchmark families.

Families: cnf_xor (3-CNF clauses mixed with XORs), xor_card (XORs plus one
global cardinality bound), cards (random cardinality constraints), pbs
(random pseudo-Boolean inequalities, with per-occurrence or per-variable
coefficients).  Planted mode first draws a hidden assignment and then
rejection-resamples each constraint until the hidden assignment satisfies
it (XOR parities are fixed directly by negating the first literal), so
every planted instance is satisfiable by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .formula import (Constraint, Formula, Kind, Literal, WeightMap,
                      check_constraint, check_formula)

FAMILY_CNF_XOR = "cnf_xor"
FAMILY_XOR_CARD = "xor_card"
FAMILY_CARDS = "cards"
FAMILY_PBS = "pbs"
FAMILIES = (FAMILY_CNF_XOR, FAMILY_XOR_CARD, FAMILY_CARDS, FAMILY_PBS)

COEF_PER_OCCURRENCE = "per_occurrence"
COEF_PER_VARIABLE = "per_variable"

_MAX_RESAMPLES = 100_000


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one generation batch.

    Densities are constraints-per-variable ratios; ``delta`` is the
    cardinality threshold fraction and ``r_v`` the per-constraint variable
    fraction.  Fractional counts and thresholds are floored.
    """

    family: str
    n: int
    r_c: float = 0.0
    r_x: float = 0.0
    r_p: float = 0.0
    delta: float = 0.0
    r_v: float = 0.0
    clause_width: int = 3
    coef_mode: str = COEF_PER_OCCURRENCE
    count: int = 10
    seed: int = 0
    plant: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if min(self.r_c, self.r_x, self.r_p) < 0:
            raise ValueError("densities must be nonnegative")
        if self.family == FAMILY_XOR_CARD and not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if self.family in (FAMILY_CARDS, FAMILY_PBS) and not 0 < self.r_v < 1:
            raise ValueError("r_v must be in (0, 1)")
        if self.clause_width < 1 or self.clause_width > self.n:
            raise ValueError("clause_width must be in [1, n]")
        if self.coef_mode not in (COEF_PER_OCCURRENCE, COEF_PER_VARIABLE):
            raise ValueError(f"unknown coef_mode {self.coef_mode!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")


@dataclass(frozen=True)
class GeneratedInstance:
    formula: Formula
    hidden: np.ndarray | None
    index: int
    name: str


def _floor(x: float) -> int:
    # tolerate float fuzz like 0.7*50 == 34.999...
    return math.floor(x + 1e-9)


def _hidden_assignment(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.where(rng.integers(0, 2, n) == 1, -1, 1).astype(np.int8)


def _resample(draw: Callable[[], Constraint], hidden: np.ndarray | None) -> Constraint:
    for _ in range(_MAX_RESAMPLES):
        c = draw()
        if hidden is None or check_constraint(c, hidden):
            return c
    raise RuntimeError("resampling limit hit; constraint incompatible with plant")


def _draw_clause(rng: np.random.Generator, n: int, width: int) -> Constraint:
    vars_ = rng.choice(n, size=width, replace=False) + 1
    negs = rng.integers(0, 2, width)
    lits = tuple(Literal(int(v), bool(neg)) for v, neg in zip(vars_, negs))
    return Constraint(kind=Kind.CLAUSE, literals=lits)


def _draw_xor(rng: np.random.Generator, n: int,
              hidden: np.ndarray | None) -> Constraint:
    while True:
        member = rng.random(n) < 0.5
        if member.any():
            break
    vars_ = np.flatnonzero(member) + 1
    lits = [Literal(int(v)) for v in vars_]
    if hidden is not None:
        true_count = int(np.count_nonzero(hidden[vars_ - 1] == -1))
        if true_count % 2 == 0:
            lits[0] = Literal(lits[0].var, True)
    return Constraint(kind=Kind.XOR, literals=tuple(lits))


def _draw_card(rng: np.random.Generator, n: int, k: int, threshold: int) -> Constraint:
    vars_ = rng.choice(n, size=k, replace=False) + 1
    comparator = ">=" if rng.integers(0, 2) else "<="
    lits = tuple(Literal(int(v)) for v in vars_)
    return Constraint(kind=Kind.CARD, literals=lits,
                      comparator=comparator, threshold=threshold)


def _draw_pb(rng: np.random.Generator, n: int, k: int,
             coef_table: np.ndarray | None) -> Constraint:
    vars_ = rng.choice(n, size=k, replace=False) + 1
    if coef_table is None:
        coefs = rng.integers(1, n + 1, k)
    else:
        coefs = coef_table[vars_ - 1]
    comparator = ">=" if rng.integers(0, 2) else "<="
    threshold = int(coefs.sum()) // 2
    lits = tuple(Literal(int(v)) for v in vars_)
    return Constraint(kind=Kind.PB, literals=lits, coefficients=tuple(int(c) for c in coefs),
                      comparator=comparator, threshold=threshold)


def _assemble(n: int, constraints: list[Constraint]) -> Formula:
    dense = tuple(
        Constraint(kind=c.kind, literals=c.literals, comparator=c.comparator,
                   threshold=c.threshold, coefficients=c.coefficients, id=i)
        for i, c in enumerate(constraints))
    return Formula(n=n, constraints=dense)


def _one_cnf_xor(spec: GenSpec, rng) -> tuple[Formula, np.ndarray | None]:
    n = spec.n
    hidden = _hidden_assignment(rng, n) if spec.plant else None
    constraints = []
    for _ in range(_floor(spec.r_c * n)):
        constraints.append(_resample(
            lambda: _draw_clause(rng, n, spec.clause_width), hidden))
    for _ in range(_floor(spec.r_x * n)):
        # parity is fixed directly, no rejection needed
        constraints.append(_draw_xor(rng, n, hidden))
    return _assemble(n, constraints), hidden


def _one_xor_card(spec: GenSpec, rng) -> tuple[Formula, np.ndarray | None]:
    n = spec.n
    threshold = _floor(spec.delta * n)
    hidden = None
    if spec.plant:
        # exactly `threshold` True variables, so the global bound holds
        hidden = np.ones(n, dtype=np.int8)
        true_vars = rng.choice(n, size=threshold, replace=False)
        hidden[true_vars] = -1
    constraints = [_draw_xor(rng, n, hidden) for _ in range(_floor(spec.r_x * n))]
    card = Constraint(kind=Kind.CARD,
                      literals=tuple(Literal(v) for v in range(1, n + 1)),
                      comparator="<=", threshold=threshold)
    constraints.append(card)
    return _assemble(n, constraints), hidden


def _one_cards(spec: GenSpec, rng) -> tuple[Formula, np.ndarray | None]:
    n = spec.n
    hidden = _hidden_assignment(rng, n) if spec.plant else None
    k = _floor(spec.r_v * n)
    threshold = k // 2
    constraints = [
        _resample(lambda: _draw_card(rng, n, k, threshold), hidden)
        for _ in range(_floor(spec.r_p * n))
    ]
    return _assemble(n, constraints), hidden


def _one_pbs(spec: GenSpec, rng) -> tuple[Formula, np.ndarray | None]:
    n = spec.n
    hidden = _hidden_assignment(rng, n) if spec.plant else None
    k = _floor(spec.r_v * n)
    coef_table = rng.integers(1, n + 1, n) if spec.coef_mode == COEF_PER_VARIABLE else None
    constraints = [
        _resample(lambda: _draw_pb(rng, n, k, coef_table), hidden)
        for _ in range(_floor(spec.r_p * n))
    ]
    return _assemble(n, constraints), hidden


_GENERATORS = {
    FAMILY_CNF_XOR: _one_cnf_xor,
    FAMILY_XOR_CARD: _one_xor_card,
    FAMILY_CARDS: _one_cards,
    FAMILY_PBS: _one_pbs,
}


def instance_name(spec: GenSpec, index: int) -> str:
    parts = [spec.family, f"n{spec.n}"]
    if spec.family == FAMILY_CNF_XOR:
        parts += [f"rc{spec.r_c:g}", f"rx{spec.r_x:g}", f"k{spec.clause_width}"]
    elif spec.family == FAMILY_XOR_CARD:
        parts += [f"rx{spec.r_x:g}", f"d{spec.delta:g}"]
    else:
        parts += [f"rp{spec.r_p:g}", f"rv{spec.r_v:g}"]
        if spec.family == FAMILY_PBS:
            parts.append("t1" if spec.coef_mode == COEF_PER_OCCURRENCE else "t2")
    if spec.plant:
        parts.append("planted")
    parts.append(f"{index:03d}")
    return "_".join(parts) + ".hbf"


def generate_instance(spec: GenSpec, index: int = 0) -> GeneratedInstance:
    """Instance ``index`` of the batch; deterministic in (spec, index)."""
    rng = np.random.default_rng([spec.seed, index])
    formula, hidden = _GENERATORS[spec.family](spec, rng)
    if hidden is not None:
        _, unsat = check_formula(formula, hidden, WeightMap.uniform(formula.m))
        if unsat:
            raise AssertionError("planted assignment fails its own instance")
    return GeneratedInstance(formula=formula, hidden=hidden, index=index,
                             name=instance_name(spec, index))


def generate_batch(spec: GenSpec) -> list[GeneratedInstance]:
    return [generate_instance(spec, i) for i in range(spec.count)]


def gen_cnf_xor(spec: GenSpec) -> Formula:
    if spec.family != FAMILY_CNF_XOR:
        raise ValueError("spec.family must be cnf_xor")
    return generate_instance(spec).formula


def gen_xor_card(spec: GenSpec) -> Formula:
    if spec.family != FAMILY_XOR_CARD:
        raise ValueError("spec.family must be xor_card")
    return generate_instance(spec).formula


def gen_cards(spec: GenSpec) -> Formula:
    if spec.family != FAMILY_CARDS:
        raise ValueError("spec.family must be cards")
    return generate_instance(spec).formula


def gen_pbs(spec: GenSpec) -> Formula:
    if spec.family != FAMILY_PBS:
        raise ValueError("spec.family must be pbs")
    return generate_instance(spec).formula


# Full parameter grids of the standard benchmark suite (per-n instance counts:
# cnf_xor 120, xor_card 90, cards 120, pbs 240).

_CNF_XOR_GRID = ((1, 0.2), (2, 0.2), (3, 0.2), (1, 0.4), (2, 0.4), (1, 0.6),
                 (5, 0.2), (5, 0.4), (5, 0.6), (10, 0.2), (10, 0.4), (15, 0.2))
_N_GRID = (50, 100, 150)
_DENSITY_GRID = (0.5, 0.6, 0.7)
_RV_GRID = (0.2, 0.3, 0.4, 0.5)
_XC_GRID = (0.2, 0.3, 0.4)


def benchmark_grid(family: str, seed: int = 0, plant: bool = False) -> list[GenSpec]:
    """All GenSpecs of one family's full parameter grid (count=10 each)."""
    specs = []
    if family == FAMILY_CNF_XOR:
        for n in _N_GRID:
            for r_c, r_x in _CNF_XOR_GRID:
                specs.append(GenSpec(family=family, n=n, r_c=r_c, r_x=r_x,
                                     seed=seed, plant=plant))
    elif family == FAMILY_XOR_CARD:
        for n in _N_GRID:
            for r_x in _XC_GRID:
                for delta in _XC_GRID:
                    specs.append(GenSpec(family=family, n=n, r_x=r_x, delta=delta,
                                         seed=seed, plant=plant))
    elif family == FAMILY_CARDS:
        for n in _N_GRID:
            for r_p in _DENSITY_GRID:
                for r_v in _RV_GRID:
                    specs.append(GenSpec(family=family, n=n, r_p=r_p, r_v=r_v,
                                         seed=seed, plant=plant))
    elif family == FAMILY_PBS:
        for n in _N_GRID:
            for r_p in _DENSITY_GRID:
                for r_v in _RV_GRID:
                    for mode in (COEF_PER_OCCURRENCE, COEF_PER_VARIABLE):
                        specs.append(GenSpec(family=family, n=n, r_p=r_p, r_v=r_v,
                                             coef_mode=mode, seed=seed, plant=plant))
    else:
        raise ValueError(f"unknown family {family!r}")
    return specs
