"""Randomized cross-checks between the fast paths and enumeration oracles.

Four suites: gradient vs. coordinate differences, BDD output probability
vs. enumeration, top-down vs. bottom-up sweeps (plus the multilinear
expansion), and vertex consistency against the direct checker.  All
instances are small enough for exact enumeration; the shared random
instance helpers here are also used by the test suite.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .bdd import build_formula
from .engine import (MessageBuffers, bottom_up, brute_cop, cop,
                     discrete_gradient, top_down, wfe_eval)
from .formula import (Constraint, Formula, Kind, Literal, WeightMap,
                      check_formula)

ALL_KINDS = (Kind.CLAUSE, Kind.XOR, Kind.NAE, Kind.CARD, Kind.PB)


def random_constraint(
    rng: np.random.Generator, n: int, cid: int = -1,
    kind: Kind | None = None, max_len: int = 6,
) -> Constraint:
    """One random constraint over at most max_len of n variables."""
    if kind is None:
        kind = ALL_KINDS[rng.integers(0, len(ALL_KINDS))]
    if kind is Kind.NAE and n < 2:
        kind = Kind.CLAUSE
    k = int(rng.integers(1, min(n, max_len) + 1))
    if kind is Kind.NAE and k < 2:
        k = 2
    vars_ = rng.choice(n, size=k, replace=False) + 1
    negs = rng.integers(0, 2, k)
    lits = tuple(Literal(int(v), bool(g)) for v, g in zip(vars_, negs))
    if kind is Kind.CARD:
        comparator = ("<=", ">=", "=")[rng.integers(0, 3)]
        threshold = int(rng.integers(0, k + 1))
        return Constraint(kind=kind, literals=lits, comparator=comparator,
                          threshold=threshold, id=cid)
    if kind is Kind.PB:
        coefs = rng.integers(1, 6, k) * (rng.integers(0, 2, k) * 2 - 1)
        comparator = ("<=", ">=", "=")[rng.integers(0, 3)]
        neg_sum = int(coefs[coefs < 0].sum())
        pos_sum = int(coefs[coefs > 0].sum())
        threshold = int(rng.integers(neg_sum - 1, pos_sum + 2))
        return Constraint(kind=kind, literals=lits, coefficients=tuple(int(c) for c in coefs),
                          comparator=comparator, threshold=threshold, id=cid)
    return Constraint(kind=kind, literals=lits, id=cid)


def random_formula(
    rng: np.random.Generator, n: int, m: int,
    kinds: Sequence[Kind] | None = None, max_len: int = 6,
) -> Formula:
    chosen = tuple(kinds) if kinds is not None else ALL_KINDS
    constraints = tuple(
        random_constraint(rng, n, cid=i,
                          kind=chosen[rng.integers(0, len(chosen))],
                          max_len=max_len)
        for i in range(m))
    return Formula(n=n, constraints=constraints)


def random_weights(rng: np.random.Generator, m: int) -> WeightMap:
    return WeightMap(rng.integers(1, 6, m).astype(float))


def random_point(rng: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
    lim = 1.0 - margin
    return rng.uniform(-lim, lim, n)


def check_gradient(rng: np.random.Generator, rounds: int = 50) -> list[str]:
    """Gradient equals coordinate differences and the spanned finite difference."""
    failures = []
    h = 0.25
    for case in range(rounds):
        n = int(rng.integers(2, 10))
        f = random_formula(rng, n, int(rng.integers(1, 8)))
        w = random_weights(rng, f.m)
        mrbdd = build_formula(f)
        a = random_point(rng, n, margin=h)
        g = discrete_gradient(mrbdd, a, w)
        for i in range(n):
            up, down = a.copy(), a.copy()
            up[i], down[i] = 1.0, -1.0
            exact = top_down(mrbdd, up, w)[0] - top_down(mrbdd, down, w)[0]
            if abs(g[i] - exact) > 1e-10:
                failures.append(f"case {case}: coordinate diff mismatch at {i}")
                break
            plus, minus = a.copy(), a.copy()
            plus[i] += h
            minus[i] -= h
            # multilinearity makes the spanned central difference exact
            fd = (top_down(mrbdd, plus, w)[0] - top_down(mrbdd, minus, w)[0]) / h
            if abs(g[i] - fd) / max(1.0, abs(g[i])) > 1e-6:
                failures.append(f"case {case}: finite difference mismatch at {i}")
                break
    return failures


def check_cop(rng: np.random.Generator, rounds: int = 100) -> list[str]:
    """BDD output probability equals enumeration for every kind."""
    failures = []
    for case in range(rounds):
        n = int(rng.integers(1, 10))
        c = random_constraint(rng, n, cid=0)
        f = Formula(n=n, constraints=(c,))
        mrbdd = build_formula(f)
        p = rng.random(n)
        got = cop(mrbdd, mrbdd.entries[0], p)
        want = brute_cop(c, p)
        if abs(got - want) > 1e-9:
            failures.append(f"case {case}: cop {got} != brute {want} ({c.kind.value})")
    return failures


def check_dual_sweep(rng: np.random.Generator, rounds: int = 100) -> list[str]:
    """Both sweep directions and the multilinear expansion agree."""
    failures = []
    buffers = MessageBuffers()
    for case in range(rounds):
        n = int(rng.integers(2, 12))
        f = random_formula(rng, n, int(rng.integers(1, 10)))
        w = random_weights(rng, f.m)
        mrbdd = build_formula(f)
        a = random_point(rng, n)
        td, _ = top_down(mrbdd, a, w, buffers)
        bu, _ = bottom_up(mrbdd, a, w, buffers)
        if abs(td - bu) > 1e-12:
            failures.append(f"case {case}: top_down {td} != bottom_up {bu}")
            continue
        wfe = sum(w[c.id] * wfe_eval(c, a) for c in f.constraints)
        if abs(td - wfe) > 1e-9:
            failures.append(f"case {case}: sweeps {td} != expansion {wfe}")
    return failures


def check_vertex(rng: np.random.Generator, rounds: int = 100) -> list[str]:
    """At cube vertices the sweep value equals the verifier's weight exactly."""
    failures = []
    for case in range(rounds):
        n = int(rng.integers(2, 12))
        f = random_formula(rng, n, int(rng.integers(1, 10)))
        w = random_weights(rng, f.m)
        mrbdd = build_formula(f)
        b = np.where(rng.integers(0, 2, n) == 1, -1, 1).astype(np.int8)
        value = top_down(mrbdd, b.astype(float), w)[0]
        want, _ = check_formula(f, b, w)
        if value != want:
            failures.append(f"case {case}: vertex value {value} != checked {want}")
    return failures


SUITES = (
    ("gradient-vs-differences", check_gradient),
    ("cop-vs-enumeration", check_cop),
    ("dual-sweep-and-expansion", check_dual_sweep),
    ("vertex-consistency", check_vertex),
)


def run_all(seed: int, write=print) -> bool:
    """Run every suite; report one line each; True when all pass."""
    write(f"selfcheck seed {seed}")
    ok = True
    for idx, (name, suite) in enumerate(SUITES):
        rng = np.random.default_rng([seed, idx])
        failures = suite(rng)
        if failures:
            ok = False
            write(f"{name}: FAIL ({len(failures)} cases)")
            for line in failures[:5]:
                write(f"  {line}")
        else:
            write(f"{name}: ok")
    return ok
