"""Reduced ordered BDDs with hash-consing, shared across all constraints.

All diagrams live in one ``BddManager`` under the fixed natural variable
order 1..n, so structurally equal subfunctions get the same node handle.
There are no complement edges; literal polarity is folded into the child
wiring at construction time.  ``hi`` is the child taken when the branch
variable is True (assignment value -1), ``lo`` when it is False (+1).

``build_formula`` compiles every constraint of a formula into one shared
manager and freezes the reachable nodes into flat arrays sorted by level,
the layout the message-passing engine sweeps over.
"""

from __future__ import annotations

import math
from bisect import bisect_right, insort
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .formula import Constraint, Formula, Kind, _compare

ZERO = 0
ONE = 1

_APPLY_TABLE = {
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
}


class BddManager:
    """Hash-consed node store enforcing reduction and the fixed order."""

    def __init__(self):
        # Slots 0 and 1 are the terminals; their var/child fields are unused.
        self.var: list[int] = [0, 0]
        self.hi: list[int] = [0, 1]
        self.lo: list[int] = [0, 1]
        self.unique: dict[tuple[int, int, int], int] = {}

    def __len__(self) -> int:
        return len(self.var)

    def make_node(self, var: int, hi: int, lo: int) -> int:
        """Return the canonical node for ite(var, hi, lo)."""
        if hi == lo:
            return hi
        key = (var, hi, lo)
        found = self.unique.get(key)
        if found is not None:
            return found
        for child in (hi, lo):
            if child > ONE and self.var[child] <= var:
                raise ValueError(
                    f"child level {self.var[child]} not below parent level {var}")
        idx = len(self.var)
        self.var.append(var)
        self.hi.append(hi)
        self.lo.append(lo)
        self.unique[key] = idx
        return idx

    def evaluate(self, root: int, b: Sequence[int]) -> bool:
        """Follow the unique branch for a +-1 assignment (-1 = True)."""
        v = root
        while v > ONE:
            v = self.hi[v] if b[self.var[v] - 1] == -1 else self.lo[v]
        return v == ONE

    def reachable(self, root: int) -> set[int]:
        seen: set[int] = set()
        stack = [root]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            if v > ONE:
                stack.append(self.hi[v])
                stack.append(self.lo[v])
        return seen

    def reachable_count(self, root: int) -> int:
        """Number of distinct nodes under root, terminals included."""
        return len(self.reachable(root))

    def apply(self, op: str, u: int, v: int) -> int:
        """Combine two diagrams with op in {'and', 'or', 'xor'}."""
        table = _APPLY_TABLE.get(op)
        if table is None:
            raise ValueError(f"unsupported op {op!r}")
        memo: dict[tuple[int, int], int] = {}

        def rec(a: int, b: int) -> int:
            if a <= ONE and b <= ONE:
                return table(a, b)
            if op == "and" and ZERO in (a, b):
                return ZERO
            if op == "or" and ONE in (a, b):
                return ONE
            key = (a, b) if a <= b else (b, a)  # all three ops commute
            found = memo.get(key)
            if found is not None:
                return found
            va = self.var[a] if a > ONE else math.inf
            vb = self.var[b] if b > ONE else math.inf
            split = int(min(va, vb))
            a_hi, a_lo = (self.hi[a], self.lo[a]) if va == split else (a, a)
            b_hi, b_lo = (self.hi[b], self.lo[b]) if vb == split else (b, b)
            node = self.make_node(split, rec(a_hi, b_hi), rec(a_lo, b_lo))
            memo[key] = node
            return node

        return rec(u, v)


# ---------------------------------------------------------------------------
# Per-kind compilation
# ---------------------------------------------------------------------------


def symmetric_value_vector(c: Constraint) -> list[int]:
    """Truth value of a symmetric constraint as a function of #true literals."""
    k = len(c.literals)
    if c.kind is Kind.CLAUSE:
        return [int(t >= 1) for t in range(k + 1)]
    if c.kind is Kind.XOR:
        return [t % 2 for t in range(k + 1)]
    if c.kind is Kind.NAE:
        return [int(0 < t < k) for t in range(k + 1)]
    if c.kind is Kind.CARD:
        return [int(_compare(t, c.comparator, c.threshold)) for t in range(k + 1)]
    raise ValueError("PB constraints are not symmetric in general")


def build_clause(manager: BddManager, c: Constraint) -> int:
    """Linear chain: the first true literal exits to ONE."""
    node = ZERO
    for lit in sorted(c.literals, key=lambda l: l.var, reverse=True):
        if lit.negated:
            node = manager.make_node(lit.var, node, ONE)
        else:
            node = manager.make_node(lit.var, ONE, node)
    return node


def build_xor(manager: BddManager, c: Constraint) -> int:
    """Parity chain, at most two states per level."""
    # f[p] = diagram for "number of true literals in the suffix == p mod 2"
    f = [ONE, ZERO]
    for lit in sorted(c.literals, key=lambda l: l.var, reverse=True):
        if lit.negated:
            f = [manager.make_node(lit.var, f[0], f[1]),
                 manager.make_node(lit.var, f[1], f[0])]
        else:
            f = [manager.make_node(lit.var, f[1], f[0]),
                 manager.make_node(lit.var, f[0], f[1])]
    return f[1]


def build_symmetric(manager: BddManager, c: Constraint) -> int:
    """Layered count-of-true-literals DP for any symmetric constraint."""
    values = symmetric_value_vector(c)
    lits = sorted(c.literals, key=lambda l: l.var)
    layer = [ONE if v else ZERO for v in values]
    for i in range(len(lits) - 1, -1, -1):
        lit = lits[i]
        nxt = []
        for t in range(i + 1):
            on_true, on_false = layer[t + 1], layer[t]
            if lit.negated:
                nxt.append(manager.make_node(lit.var, on_false, on_true))
            else:
                nxt.append(manager.make_node(lit.var, on_true, on_false))
        layer = nxt
    return layer[0]


def build_pb(manager: BddManager, c: Constraint) -> int:
    """Threshold diagram for a linear inequality over literals.

    One-sided constraints descend over the literals in variable order with
    interval memoization: each memo entry records the maximal interval of
    residual thresholds yielding the same subfunction, so any threshold
    falling inside a known interval reuses its node.  Equality conjoins the
    two one-sided diagrams.
    """
    order = sorted(range(len(c.literals)), key=lambda i: c.literals[i].var)
    vars_ = [c.literals[i].var for i in order]
    t_contrib = [0] * len(order)
    f_contrib = [0] * len(order)
    for pos, i in enumerate(order):
        if c.literals[i].negated:
            f_contrib[pos] = c.coefficients[i]
        else:
            t_contrib[pos] = c.coefficients[i]
    if c.comparator == ">=":
        return _pb_geq(manager, vars_, t_contrib, f_contrib, c.threshold)
    neg_t = [-x for x in t_contrib]
    neg_f = [-x for x in f_contrib]
    if c.comparator == "<=":
        return _pb_geq(manager, vars_, neg_t, neg_f, -c.threshold)
    geq = _pb_geq(manager, vars_, t_contrib, f_contrib, c.threshold)
    leq = _pb_geq(manager, vars_, neg_t, neg_f, -c.threshold)
    return manager.apply("and", geq, leq)


def _pb_geq(manager, vars_, t_contrib, f_contrib, threshold: int) -> int:
    """ROBDD of "sum of per-variable contributions >= threshold"."""
    k = len(vars_)
    smin = [0] * (k + 1)
    smax = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        smin[i] = smin[i + 1] + min(t_contrib[i], f_contrib[i])
        smax[i] = smax[i + 1] + max(t_contrib[i], f_contrib[i])
    # Per position, disjoint (lo, hi, node) intervals kept sorted by lo.
    intervals: list[list[tuple[float, float, int]]] = [[] for _ in range(k)]

    def rec(i: int, need: int) -> tuple[int, float, float]:
        if need <= smin[i]:
            return ONE, -math.inf, smin[i]
        if need > smax[i]:
            return ZERO, smax[i] + 1, math.inf
        cache = intervals[i]
        pos = bisect_right(cache, (need, math.inf, len(manager.var))) - 1
        if pos >= 0:
            lo, hi, node = cache[pos]
            if lo <= need <= hi:
                return node, lo, hi
        t_node, tl, th = rec(i + 1, need - t_contrib[i])
        f_node, fl, fh = rec(i + 1, need - f_contrib[i])
        node = manager.make_node(vars_[i], t_node, f_node)
        lo = max(tl + t_contrib[i], fl + f_contrib[i])
        hi = min(th + t_contrib[i], fh + f_contrib[i])
        insort(cache, (lo, hi, node))
        return node, lo, hi

    node, _, _ = rec(0, threshold)
    return node


def build_constraint(manager: BddManager, c: Constraint) -> int:
    if c.kind is Kind.CLAUSE:
        return build_clause(manager, c)
    if c.kind is Kind.XOR:
        return build_xor(manager, c)
    if c.kind in (Kind.CARD, Kind.NAE):
        return build_symmetric(manager, c)
    return build_pb(manager, c)


def symmetric_node_bound(c: Constraint) -> int:
    """Worst-case reachable node count for a symmetric constraint."""
    k = len(c.literals)
    return (k + 1) * (k + 2) // 2 + 2


def pb_node_bound(c: Constraint) -> int:
    """Worst-case reachable node count for a one-sided PB constraint."""
    k = len(c.literals)
    total = sum(abs(x) for x in c.coefficients)
    return k * (2 * total + 1) + 2


# ---------------------------------------------------------------------------
# Multi-rooted shared form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MrBdd:
    """All constraint diagrams frozen into level-sorted flat arrays.

    Frozen index 0 is the ZERO terminal and 1 is ONE; internal nodes follow,
    sorted by branch variable, so every level is one contiguous slice: nodes
    testing variable v occupy ``[offsets[v], offsets[v+1])``.  ``roots[c]``
    is the frozen entry node of constraint c and ``entries[c]`` the same
    node as a manager handle.
    """

    n: int
    var: np.ndarray
    hi: np.ndarray
    lo: np.ndarray
    offsets: np.ndarray
    roots: np.ndarray
    manager: BddManager
    entries: tuple[int, ...]

    @property
    def num_nodes(self) -> int:
        return int(self.var.size)

    @property
    def num_edges(self) -> int:
        return 2 * (self.num_nodes - 2)

    def level_slice(self, level: int) -> slice:
        return slice(int(self.offsets[level]), int(self.offsets[level + 1]))

    def entry(self, cid: int) -> int:
        return self.entries[cid]


@dataclass(frozen=True)
class BddStats:
    shared_nodes: int
    sum_individual_nodes: int
    reduction_ratio: float
    per_kind: dict = field(default_factory=dict)


def freeze(manager: BddManager, n: int, entries: Sequence[int]) -> MrBdd:
    """Renumber the nodes reachable from the entries into the sweep layout."""
    reachable: set[int] = set()
    for h in entries:
        if h not in reachable:
            reachable |= manager.reachable(h)
    internal = sorted((v for v in reachable if v > ONE),
                      key=lambda v: (manager.var[v], v))
    perm = {ZERO: 0, ONE: 1}
    for new, old in enumerate(internal, start=2):
        perm[old] = new
    size = len(internal) + 2
    var = np.zeros(size, dtype=np.int32)
    hi = np.zeros(size, dtype=np.int32)
    lo = np.zeros(size, dtype=np.int32)
    hi[ONE] = 1
    lo[ONE] = 1
    for new, old in enumerate(internal, start=2):
        var[new] = manager.var[old]
        hi[new] = perm[manager.hi[old]]
        lo[new] = perm[manager.lo[old]]
    offsets = np.full(n + 2, 2, dtype=np.int64)
    counts = np.bincount(var[2:], minlength=n + 1)
    offsets[1:] = 2 + np.cumsum(counts)
    roots = np.asarray([perm[h] for h in entries], dtype=np.int32)
    return MrBdd(n=n, var=var, hi=hi, lo=lo, offsets=offsets, roots=roots,
                 manager=manager, entries=tuple(int(h) for h in entries))


def build_formula(f: Formula, manager: BddManager | None = None) -> MrBdd:
    """Compile every constraint into one shared manager and freeze it."""
    mgr = manager if manager is not None else BddManager()
    entries = [build_constraint(mgr, c) for c in f.constraints]
    return freeze(mgr, f.n, entries)


def eval_vertex(mrbdd: MrBdd, root: int, b: Sequence[int]) -> bool:
    """Path-following evaluation of one manager-space root at a vertex."""
    return mrbdd.manager.evaluate(root, b)


def stats(mrbdd: MrBdd, f: Formula) -> BddStats:
    """Node sharing achieved by the multi-rooted form."""
    shared = mrbdd.num_nodes
    per_kind: dict[str, list[int]] = {}
    total = 0
    for c in f.constraints:
        count = mrbdd.manager.reachable_count(mrbdd.entries[c.id])
        total += count
        per_kind.setdefault(c.kind.value, [0, 0])
        per_kind[c.kind.value][0] += 1
        per_kind[c.kind.value][1] += count
    ratio = total / shared if shared else 1.0
    return BddStats(shared_nodes=shared, sum_individual_nodes=total,
                    reduction_ratio=ratio,
                    per_kind={k: tuple(v) for k, v in per_kind.items()})


def to_dot(mrbdd: MrBdd) -> str:
    """DOT rendering of the frozen forest (solid = hi, dashed = lo)."""
    lines = ["digraph mrbdd {", '  0 [label="0" shape=box];',
             '  1 [label="1" shape=box];']
    for v in range(2, mrbdd.num_nodes):
        lines.append(f'  {v} [label="x{int(mrbdd.var[v])}"];')
        lines.append(f"  {v} -> {int(mrbdd.hi[v])};")
        lines.append(f"  {v} -> {int(mrbdd.lo[v])} [style=dashed];")
    for cid, root in enumerate(mrbdd.roots):
        lines.append(f'  e{cid} [label="c{cid}" shape=plaintext];')
        lines.append(f"  e{cid} -> {int(root)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
