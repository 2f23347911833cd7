"""Objective evaluation and gradient by message passing over the shared BDD.

The objective of a weighted formula at a point a in [-1,1]^n is
F(a) = sum_c w(c) * P[c satisfied], where each variable is independently
rounded to True with probability (1 - a_i)/2.  Both sweep directions
compute F exactly:

* top_down seeds each constraint's root with its weight and pushes
  reach-probability mass toward the terminals; F is the mass at ONE.
* bottom_up propagates per-node satisfaction probabilities from the
  terminals; the root value of constraint c is its satisfaction
  probability, and F is the weighted sum over roots.

The gradient convention is the discrete coordinate difference
g[i] = F(a with a_i=+1) - F(a with a_i=-1), which by multilinearity is
twice the analytic partial derivative.  One fused top-down plus bottom-up
pass produces value and full gradient in O(size of the forest).

The module also houses slow enumeration oracles (brute_cop,
wf_coefficient, wfe_eval) used for cross-checking; they never touch the
BDD.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .bdd import MrBdd, ONE, ZERO
from .formula import Constraint, WeightMap, check_constraint

ORACLE_MAX_VARS = 20


def as_point(values: Sequence[float], n: int | None = None) -> np.ndarray:
    """Validate and return a point of the cube [-1,1]^n."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("point must be one-dimensional")
    if n is not None and a.size != n:
        raise ValueError(f"point has {a.size} entries, expected {n}")
    if not np.isfinite(a).all():
        raise ValueError("point entries must be finite")
    if (np.abs(a) > 1).any():
        raise ValueError("point entries must lie in [-1, 1]")
    return a


class MessageBuffers:
    """Reusable per-worker message arrays indexed by frozen NodeId.

    Buffers are bulk-zeroed at the start of each sweep; one instance must
    not be shared between concurrent evaluations.
    """

    __slots__ = ("m_td", "m_bu", "g")

    def __init__(self):
        self.m_td = np.empty(0)
        self.m_bu = np.empty(0)
        self.g = np.empty(0)

    def resize(self, num_nodes: int, n: int) -> None:
        if self.m_td.size != num_nodes:
            self.m_td = np.empty(num_nodes)
            self.m_bu = np.empty(num_nodes)
        if self.g.size != n:
            self.g = np.empty(n)


def _probabilities(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # p_true[i] = P[x_{i+1} rounds to True], the mass sent to the hi child
    p_true = (1.0 - a) * 0.5
    p_false = (1.0 + a) * 0.5
    return p_true, p_false


def top_down(
    mrbdd: MrBdd, a: np.ndarray, w: WeightMap,
    buffers: MessageBuffers | None = None,
) -> tuple[float, np.ndarray]:
    """Forward sweep; returns (F(a), reach-probability messages)."""
    buffers = buffers if buffers is not None else MessageBuffers()
    buffers.resize(mrbdd.num_nodes, mrbdd.n)
    m_td = buffers.m_td
    m_td.fill(0.0)
    np.add.at(m_td, mrbdd.roots, w.values)
    p_true, p_false = _probabilities(a)
    hi, lo, offsets = mrbdd.hi, mrbdd.lo, mrbdd.offsets
    for level in range(1, mrbdd.n + 1):
        start, stop = offsets[level], offsets[level + 1]
        if start == stop:
            continue
        sl = slice(start, stop)
        msg = m_td[sl]
        np.add.at(m_td, hi[sl], p_true[level - 1] * msg)
        np.add.at(m_td, lo[sl], p_false[level - 1] * msg)
    return float(m_td[ONE]), m_td


def bottom_up(
    mrbdd: MrBdd, a: np.ndarray, w: WeightMap,
    buffers: MessageBuffers | None = None,
) -> tuple[float, np.ndarray]:
    """Backward sweep; m_bu[v] is the satisfaction probability of v's function."""
    buffers = buffers if buffers is not None else MessageBuffers()
    buffers.resize(mrbdd.num_nodes, mrbdd.n)
    m_bu = buffers.m_bu
    m_bu.fill(0.0)
    m_bu[ONE] = 1.0
    p_true, p_false = _probabilities(a)
    hi, lo, offsets = mrbdd.hi, mrbdd.lo, mrbdd.offsets
    for level in range(mrbdd.n, 0, -1):
        start, stop = offsets[level], offsets[level + 1]
        if start == stop:
            continue
        sl = slice(start, stop)
        m_bu[sl] = p_true[level - 1] * m_bu[hi[sl]] + p_false[level - 1] * m_bu[lo[sl]]
    value = float(np.dot(w.values, m_bu[mrbdd.roots]))
    return value, m_bu


def value_and_gradient(
    mrbdd: MrBdd, a: np.ndarray, w: WeightMap,
    buffers: MessageBuffers | None = None,
) -> tuple[float, np.ndarray]:
    """One fused evaluation: F(a) and the full discrete gradient.

    Runs the top-down sweep, then folds the per-level gradient accumulation
    into the bottom-up sweep, so the whole forest is traversed exactly
    twice.
    """
    buffers = buffers if buffers is not None else MessageBuffers()
    value, m_td = top_down(mrbdd, a, w, buffers)
    m_bu = buffers.m_bu
    m_bu.fill(0.0)
    m_bu[ONE] = 1.0
    g = buffers.g
    g.fill(0.0)
    p_true, p_false = _probabilities(a)
    hi, lo, offsets = mrbdd.hi, mrbdd.lo, mrbdd.offsets
    for level in range(mrbdd.n, 0, -1):
        start, stop = offsets[level], offsets[level + 1]
        if start == stop:
            continue
        sl = slice(start, stop)
        bu_hi = m_bu[hi[sl]]
        bu_lo = m_bu[lo[sl]]
        m_bu[sl] = p_true[level - 1] * bu_hi + p_false[level - 1] * bu_lo
        # g[i] accumulates m_td[v] * (m_bu[v.F] - m_bu[v.T]) over nodes testing i
        g[level - 1] = np.dot(m_td[sl], bu_lo - bu_hi)
    return value, g


def discrete_gradient(
    mrbdd: MrBdd, a: np.ndarray, w: WeightMap,
    buffers: MessageBuffers | None = None,
) -> np.ndarray:
    """g[i] = F(a with a_i=+1) - F(a with a_i=-1) for every coordinate."""
    _, g = value_and_gradient(mrbdd, a, w, buffers)
    return g.copy()


def cop(mrbdd: MrBdd, root: int, p: Sequence[float]) -> float:
    """Output probability of one diagram when var i is True with prob p[i-1].

    ``root`` is a manager-space handle (an entry from ``mrbdd.entries``).
    """
    p = np.asarray(p, dtype=np.float64)
    if ((p < 0) | (p > 1)).any():
        raise ValueError("probabilities must lie in [0, 1]")
    mgr = mrbdd.manager
    memo = {ZERO: 0.0, ONE: 1.0}

    def rec(v: int) -> float:
        found = memo.get(v)
        if found is not None:
            return found
        pt = p[mgr.var[v] - 1]
        out = pt * rec(mgr.hi[v]) + (1.0 - pt) * rec(mgr.lo[v])
        memo[v] = out
        return out

    return rec(root)


# ---------------------------------------------------------------------------
# Enumeration oracles (BDD-free, small constraints only)
# ---------------------------------------------------------------------------


def _guard(c: Constraint) -> tuple[int, tuple[int, ...]]:
    k = len(c.literals)
    if k > ORACLE_MAX_VARS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_VARS} variables, got {k}")
    return k, c.variables


def _vertex_iter(c: Constraint, nmax: int):
    """Yield (mask, b) over all assignments to c's variables.

    Bit j of mask set means the j-th variable of c is True (-1 in b);
    untouched variables stay +1.
    """
    k, vars_ = _guard(c)
    b = np.ones(nmax, dtype=np.int8)
    for mask in range(1 << k):
        for j, v in enumerate(vars_):
            b[v - 1] = -1 if (mask >> j) & 1 else 1
        yield mask, b


def brute_cop(c: Constraint, p: Sequence[float]) -> float:
    """COP by direct summation over all 2^k assignments."""
    k, vars_ = _guard(c)
    p = np.asarray(p, dtype=np.float64)
    nmax = max(vars_)
    total = 0.0
    for mask, b in _vertex_iter(c, nmax):
        if not check_constraint(c, b):
            continue
        prob = 1.0
        for j, v in enumerate(vars_):
            pv = p[v - 1]
            prob *= pv if (mask >> j) & 1 else (1.0 - pv)
        total += prob
    return total


def _truth_table(c: Constraint) -> np.ndarray:
    k, vars_ = _guard(c)
    table = np.empty(1 << k)
    for mask, b in _vertex_iter(c, max(vars_)):
        table[mask] = 1.0 if check_constraint(c, b) else 0.0
    return table


def wf_coefficient(c: Constraint, S: Sequence[int]) -> float:
    """Fourier coefficient of c on variable set S, by direct enumeration."""
    k, vars_ = _guard(c)
    S = set(S)
    if not S <= set(vars_):
        return 0.0
    s_mask = 0
    for j, v in enumerate(vars_):
        if v in S:
            s_mask |= 1 << j
    total = 0
    for mask, b in _vertex_iter(c, max(vars_)):
        if check_constraint(c, b):
            # x_j = -1 exactly when bit j of mask is set
            sign = -1 if bin(mask & s_mask).count("1") % 2 else 1
            total += sign
    return total / (1 << k)


def wfe_eval(c: Constraint, a: Sequence[float]) -> float:
    """Evaluate the multilinear expansion of c at a real point.

    Truth table -> Walsh-Hadamard transform -> coefficient fold; shares no
    arithmetic with the probability-propagation path.
    """
    k, vars_ = _guard(c)
    a = np.asarray(a, dtype=np.float64)
    h = _truth_table(c)
    for j in range(k):
        h = h.reshape(-1, 2, 1 << j)
        h = np.concatenate([h[:, 0] + h[:, 1], h[:, 0] - h[:, 1]], axis=1)
    coef = h.reshape(-1) / (1 << k)
    # fold out the slowest-varying index bit first; bit j carries x_{vars_[j]}
    for j in range(k - 1, -1, -1):
        coef = coef.reshape(2, -1)
        coef = coef[0] + a[vars_[j] - 1] * coef[1]
    return float(coef[0])
