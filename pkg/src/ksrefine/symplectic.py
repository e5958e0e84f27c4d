"""Exact tensor-power decompositions for the compact symplectic group USp(2g).

Everything here is integer arithmetic.  Repeatedly tensoring with the
standard 2g-dimensional representation V obeys a one-box branching rule:
V_lambda (x) V splits into one copy of V_mu for every partition mu obtained
from lambda by adding or removing a single box, subject to the rank bound of
at most g nonzero rows.  Iterating from the empty partition gives the
multiplicity c_{lambda,n} of V_lambda inside V^(x)n, and in particular

    a_n(g) = multiplicity of the trivial representation in V^(x)n,
    b_n(g) = multiplicity of V_(1,1,1) in V^(x)n          (g >= 3),

the two sequences that drive the refined trace-distribution predictions.
Multiplicity tables are cached per genus and grown on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Partition",
    "MultiplicityTable",
    "tensor_step",
    "multiplicity_table",
    "multiplicity",
    "a_n",
    "b_n",
    "c2_n",
    "weyl_dimension",
    "bn_root_trend",
    "TrendReport",
]


@dataclass(frozen=True)
class Partition:
    """A weakly decreasing tuple of positive parts; the empty tuple is the trivial weight."""

    parts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        if any(p < 0 for p in parts):
            raise ValueError(f"negative part in {parts!r}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"parts not weakly decreasing: {parts!r}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, parts: Iterable[int]) -> "Partition":
        return cls(tuple(parts))

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def rows(self) -> int:
        return len(self.parts)

    def valid_for(self, g: int) -> bool:
        """Whether this weight exists for USp(2g), i.e. has at most g rows."""
        return self.rows <= g

    def one_box_moves(self, g: int) -> Iterator["Partition"]:
        """All partitions reachable by adding or removing one box, rank bound g."""
        parts = self.parts
        k = len(parts)
        # add a box to row i (or start row k)
        for i in range(min(k + 1, g)):
            cur = parts[i] if i < k else 0
            above = parts[i - 1] if i > 0 else None
            if above is None or cur + 1 <= above:
                new = list(parts) + [0] * (i + 1 - k)
                new[i] = cur + 1
                yield Partition(tuple(new))
        # remove a box from row i
        for i in range(k):
            below = parts[i + 1] if i + 1 < k else 0
            if parts[i] - 1 >= below:
                new = list(parts)
                new[i] -= 1
                yield Partition(tuple(new))

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")" if self.parts else "(0)"


TRIVIAL = Partition()
LAMBDA_111 = Partition((1, 1, 1))

# weights whose multiplicities sum to the stable two-point count contribution
_C2_WEIGHTS = (
    Partition(),
    Partition((1, 1)),
    Partition((1, 1, 1, 1)),
    Partition((1, 1, 1, 1, 1, 1)),
    Partition((2, 2, 1, 1)),
)


def tensor_step(row: Mapping[Partition, int], g: int) -> dict[Partition, int]:
    """One tensoring with the standard representation.

    Takes a multiset of weights with multiplicities (the decomposition of some
    representation W) and returns the decomposition of W (x) V.  Rejects any
    weight with more than g rows.
    """
    if g < 1:
        raise ValueError(f"rank must be positive, got g={g}")
    out: dict[Partition, int] = {}
    for lam, mult in row.items():
        if not lam.valid_for(g):
            raise ValueError(f"weight {lam} has more than g={g} rows")
        if mult == 0:
            continue
        for mu in lam.one_box_moves(g):
            out[mu] = out.get(mu, 0) + mult
    return out


@dataclass
class MultiplicityTable:
    """Multiplicities c_{lambda,n} for V^(x)n over USp(2g), rows indexed by n."""

    g: int
    rows: list[dict[Partition, int]] = field(default_factory=lambda: [{TRIVIAL: 1}])

    @property
    def n_max(self) -> int:
        return len(self.rows) - 1

    def extend_to(self, n: int) -> None:
        while self.n_max < n:
            self.rows.append(tensor_step(self.rows[-1], self.g))

    def row(self, n: int) -> dict[Partition, int]:
        if n < 0:
            raise ValueError(f"tensor power must be nonnegative, got n={n}")
        self.extend_to(n)
        return self.rows[n]

    def multiplicity(self, n: int, lam: Partition) -> int:
        if not lam.valid_for(self.g):
            raise ValueError(f"weight {lam} has more than g={self.g} rows")
        return self.row(n).get(lam, 0)


_tables: dict[int, MultiplicityTable] = {}


def multiplicity_table(g: int) -> MultiplicityTable:
    """The cached multiplicity table for USp(2g)."""
    if g < 1:
        raise ValueError(f"rank must be positive, got g={g}")
    if g not in _tables:
        _tables[g] = MultiplicityTable(g)
    return _tables[g]


def multiplicity(g: int, n: int, lam: Partition | Iterable[int]) -> int:
    """Multiplicity of V_lambda inside V^(x)n for USp(2g).  Exact integer."""
    if not isinstance(lam, Partition):
        lam = Partition.of(lam)
    return multiplicity_table(g).multiplicity(n, lam)


def a_n(g: int, n: int) -> int:
    """Multiplicity of the trivial representation in V^(x)n.

    Vanishes for odd n; equals the number of perfect matchings (n-1)!! once
    n <= 2g.
    """
    return multiplicity(g, n, TRIVIAL)


def b_n(g: int, n: int) -> int:
    """Multiplicity of V_(1,1,1) in V^(x)n; the genus-g odd-moment correction term.

    Defined here for g >= 3 only: in rank 2 the weight (1,1,1) does not exist
    and the correction is identically zero, and in rank 1 it is undefined.
    """
    if g < 3:
        raise ValueError(f"b_n requires g >= 3 (zero in rank 2, undefined in rank 1); got g={g}")
    return multiplicity(g, n, LAMBDA_111)


def c2_n(g: int, n: int) -> int:
    """Stable combination counting pairs of points: sum of the multiplicities of
    (0), (1,1), (1^4), (1^6) and (2,2,1,1) in V^(x)n.  Requires g >= 6 so all
    five weights exist."""
    if g < 6:
        raise ValueError(f"c2_n requires g >= 6 so every contributing weight exists; got g={g}")
    table = multiplicity_table(g)
    return sum(table.multiplicity(n, lam) for lam in _C2_WEIGHTS)


def weyl_dimension(g: int, lam: Partition | Iterable[int]) -> int:
    """Dimension of the irreducible USp(2g) representation with highest weight lam.

    Weyl dimension formula for type C_g:

        dim = prod_{i<j} (l_i^2 - l_j^2)/(m_i^2 - m_j^2) * prod_i l_i/m_i

    with l_i = lam_i + g - i + 1 and m_i = g - i + 1.  The product is assembled
    in exact rational arithmetic and asserted to be an integer.
    """
    if not isinstance(lam, Partition):
        lam = Partition.of(lam)
    if not lam.valid_for(g):
        raise ValueError(f"weight {lam} has more than g={g} rows")
    padded = lam.parts + (0,) * (g - lam.rows)
    l = [padded[i] + g - i for i in range(g)]  # l_i with i zero-based: lam_i + g - i
    m = [g - i for i in range(g)]
    dim = Fraction(1)
    for i in range(g):
        dim *= Fraction(l[i], m[i])
        for j in range(i + 1, g):
            dim *= Fraction(l[i] ** 2 - l[j] ** 2, m[i] ** 2 - m[j] ** 2)
    assert dim.denominator == 1, f"non-integral dimension for {lam}, g={g}"
    return dim.numerator


@dataclass(frozen=True)
class TrendReport:
    """n-th roots of the odd-moment corrections b_n and their growth diagnostics."""

    g: int
    roots: tuple[tuple[int, float], ...]  # (n, b_n ** (1/n)) for odd n with b_n > 0
    nondecreasing: bool
    below_2g: bool


def bn_root_trend(g: int, n_max: int) -> TrendReport:
    """Roots b_n^(1/n) for odd n <= n_max, with flags for monotone growth and
    the 2g ceiling they approach from below."""
    roots: list[tuple[int, float]] = []
    for n in range(1, n_max + 1, 2):
        val = b_n(g, n)
        if val > 0:
            roots.append((n, math.exp(math.log(val) / n)))
    vals = [r for _, r in roots]
    nondec = all(vals[i] <= vals[i + 1] + 1e-12 for i in range(len(vals) - 1))
    below = all(v < 2 * g for v in vals)
    return TrendReport(g=g, roots=tuple(roots), nondecreasing=nondec, below_2g=below)
