"""Hybrid constraint model, direct semantics, and input-format parsers.

Variables use the signed encoding throughout: an assignment entry of -1
means the variable is True and +1 means False.  A constraint evaluates to
True when it is satisfied.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

COMPARATORS = ("<=", ">=", "=")


class Kind(enum.Enum):
    CLAUSE = "clause"
    XOR = "xor"
    NAE = "nae"
    CARD = "card"
    PB = "pb"


class ParseError(ValueError):
    """Input-format error carrying the 1-based source line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Literal:
    var: int
    negated: bool = False

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"variable index must be >= 1, got {self.var}")

    @classmethod
    def from_signed(cls, lit: int) -> "Literal":
        if lit == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(lit), lit < 0)

    @property
    def signed(self) -> int:
        return -self.var if self.negated else self.var

    def truth(self, b: Sequence[int]) -> bool:
        """Truth value of this literal under assignment b (-1 = True)."""
        return (b[self.var - 1] == -1) != self.negated


@dataclass(frozen=True)
class Constraint:
    """One hybrid constraint: a clause, XOR, NAE, cardinality, or PB inequality.

    Cardinality and PB constraints carry a comparator from {<=, >=, =} and an
    integer threshold; PB additionally carries one nonzero integer coefficient
    per literal.  A variable appears at most once per constraint.
    """

    kind: Kind
    literals: tuple[Literal, ...]
    comparator: str | None = None
    threshold: int | None = None
    coefficients: tuple[int, ...] | None = None
    id: int = -1

    def __post_init__(self):
        if not self.literals:
            raise ValueError("zero-length constraint")
        seen = set()
        for lit in self.literals:
            if lit.var in seen:
                raise ValueError(f"variable {lit.var} repeated in constraint")
            seen.add(lit.var)
        if self.kind in (Kind.CARD, Kind.PB):
            if self.comparator not in COMPARATORS:
                raise ValueError(f"bad comparator {self.comparator!r}")
            if self.threshold is None:
                raise ValueError("missing threshold")
        else:
            if self.comparator is not None or self.threshold is not None:
                raise ValueError(f"{self.kind.value} takes no comparator")
        if self.kind is Kind.PB:
            if self.coefficients is None or len(self.coefficients) != len(self.literals):
                raise ValueError("coefficient list must align with literals")
            if any(c == 0 for c in self.coefficients):
                raise ValueError("PB coefficients must be nonzero")
        elif self.coefficients is not None:
            raise ValueError(f"{self.kind.value} takes no coefficients")

    @property
    def length(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(lit.var for lit in self.literals)

    @property
    def max_coefficient(self) -> int:
        """Coefficient-magnitude bound M (1 for the symmetric kinds)."""
        if self.kind is Kind.PB:
            return max(abs(c) for c in self.coefficients)
        return 1


@dataclass(frozen=True)
class Formula:
    """An immutable conjunction of hybrid constraints over n variables.

    ``soft[i]`` marks constraint i as soft (relevant in MaxSAT mode) and
    ``soft_weights[i]`` is its violation cost; both default to hard / 1.
    """

    n: int
    constraints: tuple[Constraint, ...]
    soft: tuple[bool, ...] = ()
    soft_weights: tuple[float, ...] = ()

    def __post_init__(self):
        m = len(self.constraints)
        if not self.soft:
            object.__setattr__(self, "soft", (False,) * m)
        if not self.soft_weights:
            object.__setattr__(self, "soft_weights", (1.0,) * m)
        if len(self.soft) != m or len(self.soft_weights) != m:
            raise ValueError("soft flags/weights must align with constraints")
        for c in self.constraints:
            for lit in c.literals:
                if lit.var > self.n:
                    raise ValueError(f"variable {lit.var} exceeds n={self.n}")
        for i, c in enumerate(self.constraints):
            if c.id != i:
                raise ValueError(f"constraint ids must be dense, got {c.id} at {i}")

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def has_soft(self) -> bool:
        return any(self.soft)

    @property
    def hard_ids(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.soft) if not s)

    @property
    def soft_ids(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.soft) if s)


class WeightMap:
    """Positive per-constraint weights with a cached total."""

    __slots__ = ("values", "total")

    def __init__(self, values: Iterable[float]):
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                         dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if arr.size and (not np.isfinite(arr).all() or (arr <= 0).any()):
            raise ValueError("weights must be positive and finite")
        self.values = arr
        self.total = float(arr.sum())

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, cid: int) -> float:
        return float(self.values[cid])

    @classmethod
    def uniform(cls, m: int, value: float = 1.0) -> "WeightMap":
        return cls(np.full(m, value))


def as_assignment(values: Sequence[int], n: int | None = None) -> np.ndarray:
    """Validate and return a dense +-1 assignment vector."""
    b = np.asarray(values, dtype=np.int8)
    if b.ndim != 1 or not np.isin(b, (-1, 1)).all():
        raise ValueError("assignment entries must be exactly -1 or +1")
    if n is not None and b.size != n:
        raise ValueError(f"assignment has {b.size} entries, expected {n}")
    return b


def _compare(value: int, op: str, threshold: int) -> bool:
    if op == "<=":
        return value <= threshold
    if op == ">=":
        return value >= threshold
    return value == threshold


def check_constraint(c: Constraint, b: Sequence[int]) -> bool:
    """Evaluate one constraint under a +-1 assignment by direct semantics."""
    if c.kind is Kind.PB:
        total = sum(coef for coef, lit in zip(c.coefficients, c.literals) if lit.truth(b))
        return _compare(total, c.comparator, c.threshold)
    ntrue = sum(1 for lit in c.literals if lit.truth(b))
    if c.kind is Kind.CLAUSE:
        return ntrue >= 1
    if c.kind is Kind.XOR:
        return ntrue % 2 == 1
    if c.kind is Kind.NAE:
        return 0 < ntrue < len(c.literals)
    return _compare(ntrue, c.comparator, c.threshold)


def check_formula(
    f: Formula, b: Sequence[int], w: WeightMap
) -> tuple[float, list[int]]:
    """Total weight of satisfied constraints and the ids of violated ones.

    This is the solver-independent verifier: it never consults the compiled
    form of the formula.
    """
    satisfied = 0.0
    unsatisfied: list[int] = []
    for c in f.constraints:
        if check_constraint(c, b):
            satisfied += w[c.id]
        else:
            unsatisfied.append(c.id)
    return satisfied, unsatisfied


def constraint_length(c: Constraint) -> int:
    """Number of literals in the constraint."""
    return len(c.literals)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _Builder:
    """Accumulates parsed constraints and assigns dense ids."""

    def __init__(self, n: int):
        self.n = n
        self.constraints: list[Constraint] = []
        self.soft: list[bool] = []
        self.soft_weights: list[float] = []

    def add(self, line_no: int, soft: bool = False, weight: float = 1.0, **kw) -> None:
        try:
            c = Constraint(id=len(self.constraints), **kw)
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        for lit in c.literals:
            if lit.var > self.n:
                raise ParseError(line_no, f"variable {lit.var} exceeds declared n={self.n}")
        self.constraints.append(c)
        self.soft.append(soft)
        self.soft_weights.append(weight)

    def finish(self) -> Formula:
        return Formula(
            n=self.n,
            constraints=tuple(self.constraints),
            soft=tuple(self.soft),
            soft_weights=tuple(self.soft_weights),
        )


def _content_lines(text: str):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("c ") or stripped == "c":
            continue
        yield line_no, stripped.split()


def _parse_literals(line_no: int, tokens: list[str]) -> tuple[Literal, ...]:
    if not tokens or tokens[-1] != "0":
        raise ParseError(line_no, "constraint line must end with 0")
    lits = []
    for tok in tokens[:-1]:
        try:
            value = int(tok)
        except ValueError:
            raise ParseError(line_no, f"bad literal token {tok!r}") from None
        if value == 0:
            raise ParseError(line_no, "unexpected 0 inside constraint")
        lits.append(Literal.from_signed(value))
    if not lits:
        raise ParseError(line_no, "zero-length constraint")
    return tuple(lits)


def _parse_int(line_no: int, tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(line_no, f"bad {what} {tok!r}") from None


def _parse_comparator(line_no: int, tok: str) -> str:
    if tok not in COMPARATORS:
        raise ParseError(line_no, f"comparator must be one of {COMPARATORS}, got {tok!r}")
    return tok


def parse_hybrid(text: str) -> Formula:
    """Parse the hybrid (HBF) format.

    Line-oriented, whitespace-separated, 0-terminated constraint lines:

    * ``c ...``             comment
    * ``p hbf <n> <m>``     header (required, first non-comment line)
    * ``<lit> ... 0``       clause
    * ``x <lit> ... 0``     XOR: odd number of listed literals true
    * ``n <lit> ... 0``     not-all-equal
    * ``d <op> <k> <lit> ... 0``          cardinality, op in {<=, >=, =}
    * ``b <op> <k> (<coef> <lit>)... 0``  pseudo-Boolean
    """
    builder = None
    declared_m = 0
    for line_no, tokens in _content_lines(text):
        tag = tokens[0]
        if tag == "p":
            if builder is not None:
                raise ParseError(line_no, "duplicate header")
            if len(tokens) != 4 or tokens[1] != "hbf":
                raise ParseError(line_no, "header must be 'p hbf <n> <m>'")
            n = _parse_int(line_no, tokens[2], "variable count")
            declared_m = _parse_int(line_no, tokens[3], "constraint count")
            if n < 1 or declared_m < 0:
                raise ParseError(line_no, "header counts must be positive")
            builder = _Builder(n)
            continue
        if builder is None:
            raise ParseError(line_no, "constraint before 'p hbf' header")
        if tag == "x":
            builder.add(line_no, kind=Kind.XOR, literals=_parse_literals(line_no, tokens[1:]))
        elif tag == "n":
            builder.add(line_no, kind=Kind.NAE, literals=_parse_literals(line_no, tokens[1:]))
        elif tag == "d":
            if len(tokens) < 4:
                raise ParseError(line_no, "cardinality line needs '<op> <k> <lit>... 0'")
            op = _parse_comparator(line_no, tokens[1])
            k = _parse_int(line_no, tokens[2], "threshold")
            builder.add(line_no, kind=Kind.CARD, comparator=op, threshold=k,
                        literals=_parse_literals(line_no, tokens[3:]))
        elif tag == "b":
            if len(tokens) < 4:
                raise ParseError(line_no, "PB line needs '<op> <k> (<coef> <lit>)... 0'")
            op = _parse_comparator(line_no, tokens[1])
            k = _parse_int(line_no, tokens[2], "threshold")
            body = tokens[3:]
            if body[-1] != "0":
                raise ParseError(line_no, "constraint line must end with 0")
            body = body[:-1]
            if not body:
                raise ParseError(line_no, "zero-length constraint")
            if len(body) % 2:
                raise ParseError(line_no, "PB body must be coefficient/literal pairs")
            coefs, lits = [], []
            for i in range(0, len(body), 2):
                coefs.append(_parse_int(line_no, body[i], "coefficient"))
                value = _parse_int(line_no, body[i + 1], "literal")
                if value == 0:
                    raise ParseError(line_no, "unexpected 0 inside constraint")
                lits.append(Literal.from_signed(value))
            builder.add(line_no, kind=Kind.PB, comparator=op, threshold=k,
                        literals=tuple(lits), coefficients=tuple(coefs))
        else:
            builder.add(line_no, kind=Kind.CLAUSE,
                        literals=_parse_literals(line_no, tokens))
    if builder is None:
        raise ParseError(1, "missing 'p hbf' header")
    if len(builder.constraints) != declared_m:
        raise ParseError(1, f"header declares {declared_m} constraints, "
                            f"found {len(builder.constraints)}")
    return builder.finish()


def parse_dimacs_cnf(text: str) -> Formula:
    """Parse standard DIMACS CNF ('p cnf <n> <m>', 0-terminated clauses)."""
    builder = None
    declared_m = 0
    for line_no, tokens in _content_lines(text):
        if tokens[0] == "p":
            if builder is not None:
                raise ParseError(line_no, "duplicate header")
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise ParseError(line_no, "header must be 'p cnf <n> <m>'")
            n = _parse_int(line_no, tokens[2], "variable count")
            declared_m = _parse_int(line_no, tokens[3], "clause count")
            if n < 1 or declared_m < 0:
                raise ParseError(line_no, "header counts must be positive")
            builder = _Builder(n)
            continue
        if builder is None:
            raise ParseError(line_no, "clause before 'p cnf' header")
        builder.add(line_no, kind=Kind.CLAUSE, literals=_parse_literals(line_no, tokens))
    if builder is None:
        raise ParseError(1, "missing 'p cnf' header")
    if len(builder.constraints) != declared_m:
        raise ParseError(1, f"header declares {declared_m} clauses, "
                            f"found {len(builder.constraints)}")
    return builder.finish()


def parse_wcnf(text: str) -> Formula:
    """Parse WCNF for partial MaxSAT.

    Two conventions are accepted:

    * classic ``p wcnf <n> <m> <top>``: every clause line starts with an
      integer weight; weight >= top marks the clause hard;
    * header without top (``p wcnf <n> <m>`` or none at all): hard clauses
      use an ``h`` prefix and every numeric-weight clause is soft.
    """
    builder = None
    top = None
    headerless: list[tuple[int, list[str]]] = []

    def add_clause(line_no, tokens):
        if tokens[0] == "h":
            if top is not None:
                raise ParseError(line_no, "'h' prefix not allowed with a top header")
            builder.add(line_no, kind=Kind.CLAUSE,
                        literals=_parse_literals(line_no, tokens[1:]))
            return
        weight_tok, rest = tokens[0], tokens[1:]
        try:
            weight = int(weight_tok)
        except ValueError:
            raise ParseError(line_no, f"bad clause weight {weight_tok!r}") from None
        if weight <= 0:
            raise ParseError(line_no, f"clause weight must be positive, got {weight}")
        lits = _parse_literals(line_no, rest)
        if top is not None and weight >= top:
            builder.add(line_no, kind=Kind.CLAUSE, literals=lits)
        else:
            builder.add(line_no, kind=Kind.CLAUSE, literals=lits,
                        soft=True, weight=float(weight))

    for line_no, tokens in _content_lines(text):
        if tokens[0] == "p":
            if builder is not None:
                raise ParseError(line_no, "duplicate header")
            if headerless:
                raise ParseError(line_no, "header must precede clauses")
            if len(tokens) not in (4, 5) or tokens[1] != "wcnf":
                raise ParseError(line_no, "header must be 'p wcnf <n> <m> [top]'")
            n = _parse_int(line_no, tokens[2], "variable count")
            if n < 1:
                raise ParseError(line_no, "header counts must be positive")
            if len(tokens) == 5:
                top = _parse_int(line_no, tokens[4], "top")
                if top <= 0:
                    raise ParseError(line_no, "missing top")
            builder = _Builder(n)
            continue
        if builder is None:
            # Headerless new-style file: buffer clauses, infer n at the end.
            headerless.append((line_no, tokens))
            continue
        add_clause(line_no, tokens)

    if builder is None:
        if not headerless:
            raise ParseError(1, "empty WCNF input")
        n = 0
        for _, tokens in headerless:
            for tok in tokens[1:]:
                try:
                    n = max(n, abs(int(tok)))
                except ValueError:
                    pass
        if n < 1:
            raise ParseError(1, "cannot infer variable count")
        builder = _Builder(n)
        for saved in headerless:
            add_clause(*saved)
    return builder.finish()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_hbf(f: Formula) -> str:
    """Serialize a (fully hard) formula back to the hybrid format."""
    if f.has_soft:
        raise ValueError("the hybrid format has no soft-constraint syntax")
    lines = [f"p hbf {f.n} {f.m}"]
    for c in f.constraints:
        lits = " ".join(str(lit.signed) for lit in c.literals)
        if c.kind is Kind.CLAUSE:
            lines.append(f"{lits} 0")
        elif c.kind is Kind.XOR:
            lines.append(f"x {lits} 0")
        elif c.kind is Kind.NAE:
            lines.append(f"n {lits} 0")
        elif c.kind is Kind.CARD:
            lines.append(f"d {c.comparator} {c.threshold} {lits} 0")
        else:
            pairs = " ".join(f"{coef} {lit.signed}"
                             for coef, lit in zip(c.coefficients, c.literals))
            lines.append(f"b {c.comparator} {c.threshold} {pairs} 0")
    return "\n".join(lines) + "\n"
