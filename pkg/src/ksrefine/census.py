"""Weighted point-count censuses of curve families over prime fields.

A hyperelliptic curve of genus g over F_q (q an odd prime) is presented as
y^2 = c f(x) with c either 1 or a fixed nonsquare and f monic separable of
degree 2g+1 or 2g+2.  Each pair is counted once and the histogram of traces
t = q + 1 - #C(F_q) is divided by 2(q^3 - q): the PGL_2 action has orbits of
size #PGL_2/#Aut through each curve twice, so the weighted count per
isomorphism class is 1/#Aut and the total mass lands exactly on q^(2g-1).

Enumeration is exact integer work on numpy arrays.  For a monic f the affine
character sum S(f) = sum_x chi(f(x)) determines the traces of both twists at
once, so only monic polynomials are swept.  Separability is enforced by a
Mobius sieve over square divisors: summing mu(m) times the histogram of
m(x)^2 u(x) over all monic m, u with deg(m^2 u) = d leaves exactly the
squarefree f, which for monic polynomials is the same as gcd(f, f') = 1.
The identity sum_{m^2 | f} mu(m) = [f squarefree] makes the correction an
exact rewrite, not an approximation; the classical total 2 q^(2g+2) - 2 q^(2g)
over both degrees and twists is asserted on every run.

Elliptic curves run over all (a, b) with 4a^3 + 27b^2 != 0, weighted by
1/(q - 1) since each isomorphism class is hit (q-1)/#Aut times.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np
import sympy

from .errors import DomainError

__all__ = [
    "PrimeField",
    "TraceHistogram",
    "ParityReport",
    "hyperelliptic_census",
    "elliptic_census",
    "parity_report",
    "nolimit_bounds",
    "empirical_Sn",
    "signed_asymmetry",
    "root_count_table",
    "parity_defect",
]

_FAMILY_DIMENSIONS = {"hyperelliptic": None, "elliptic": 1, "external": None}


@dataclass(frozen=True)
class PrimeField:
    """F_q for an odd prime q, with the quadratic character tabulated."""

    q: int
    chi: np.ndarray = field(compare=False, repr=False, default=None)
    nonsquare: int = 0

    def __post_init__(self) -> None:
        q = self.q
        if q < 3 or not sympy.isprime(q):
            raise DomainError(f"q must be an odd prime, got {q}")
        chi = np.full(q, -1, dtype=np.int8)
        chi[0] = 0
        chi[(np.arange(1, q, dtype=np.int64) ** 2) % q] = 1
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "nonsquare", int(np.nonzero(chi == -1)[0][0]))
        # +1 and -1 values balance on the nonzero residues
        assert int(chi.sum()) == 0

    def chi_of(self, v: int) -> int:
        return int(self.chi[v % self.q])


@dataclass
class TraceHistogram:
    """Weighted trace counts for one family at one (g, q).

    ``counts[t]`` is the exact weighted number of curves with trace t (weight
    1/#Aut); ``raw_pair_counts`` keeps the unweighted equation counts when the
    histogram came from an enumeration of our own.  Bins with zero weight are
    omitted.  Traces must respect the Weil bound |t| <= 2g sqrt(q).
    """

    family: str
    g: int
    q: int
    counts: dict[int, Fraction]
    raw_pair_counts: dict[int, int] | None = None

    def __post_init__(self) -> None:
        if self.family not in _FAMILY_DIMENSIONS:
            raise DomainError(f"unknown family {self.family!r}")
        if self.g < 1:
            raise DomainError(f"genus must be positive, got {self.g}")
        bound = self.trace_bound()
        for t in self.counts:
            if abs(t) > bound:
                raise DomainError(
                    f"trace {t} violates the Weil bound |t| <= {bound} for g={self.g}, q={self.q}"
                )

    def trace_bound(self) -> int:
        return math.isqrt(4 * self.g * self.g * self.q)

    def total_mass(self) -> Fraction:
        return sum(self.counts.values(), Fraction(0))

    def dimension(self) -> int:
        """Dimension of the family's parameter space, used to normalize moments."""
        if self.family == "hyperelliptic":
            return 2 * self.g - 1
        if self.family == "elliptic":
            return 1
        return 3 * self.g - 3

    def weight(self, t: int) -> Fraction:
        return self.counts.get(t, Fraction(0))

    def traces(self) -> list[int]:
        return sorted(self.counts)


# ---------------------------------------------------------------------------
# polynomial helpers over F_q (dense coefficient lists, low degree first)
# ---------------------------------------------------------------------------


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a: Sequence[int], b: Sequence[int], q: int) -> tuple[list[int], list[int]]:
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    inv = pow(lb, -1, q)
    quot = [0] * max(0, len(a) - db)
    while len(a) - 1 >= db and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        shift = len(a) - 1 - db
        c = (a[-1] * inv) % q
        quot[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % q
        _poly_trim(a)
    return _poly_trim(quot), _poly_trim(a)


def _poly_gcd(a: Sequence[int], b: Sequence[int], q: int) -> list[int]:
    a, b = _poly_trim(list(a)), _poly_trim(list(b))
    while b:
        _, r = _poly_divmod(a, b, q)
        a, b = b, r
    if a:
        inv = pow(a[-1], -1, q)
        a = [(c * inv) % q for c in a]
    return a


def _poly_mulmod(a: Sequence[int], b: Sequence[int], mod: Sequence[int], q: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ac in enumerate(a):
        if ac:
            for j, bc in enumerate(b):
                out[i + j] = (out[i + j] + ac * bc) % q
    _, r = _poly_divmod(out, mod, q)
    return r


def _poly_powmod(base: Sequence[int], e: int, mod: Sequence[int], q: int) -> list[int]:
    result = [1]
    b = list(base)
    while e:
        if e & 1:
            result = _poly_mulmod(result, b, mod, q)
        b = _poly_mulmod(b, b, mod, q)
        e >>= 1
    return result


def _poly_deriv(a: Sequence[int], q: int) -> list[int]:
    return _poly_trim([(i * c) % q for i, c in enumerate(a)][1:])


def _mobius_poly(m: Sequence[int], q: int) -> int:
    """Mobius function of a monic polynomial: 0 unless squarefree, else
    (-1)^(number of irreducible factors), counted by distinct-degree splitting."""
    m = _poly_trim(list(m))
    deg = len(m) - 1
    if deg == 0:
        return 1
    if len(_poly_gcd(m, _poly_deriv(m, q), q)) != 1:
        return 0
    factors = 0
    f = m
    d = 1
    while len(f) - 1 >= 2 * d:
        xq = _poly_powmod([0, 1], q**d, f, q)
        xq = list(xq) + [0] * (2 - len(xq))
        diff = _poly_trim([(xq[0] - 0) % q, (xq[1] - 1) % q] + xq[2:])
        gd = _poly_gcd(diff, f, q)
        if len(gd) > 1:
            factors += (len(gd) - 1) // d
            f, _ = _poly_divmod(f, gd, q)
        d += 1
    if len(f) > 1:
        factors += 1
    return -1 if factors % 2 else 1


def _monic_polys(q: int, deg: int) -> Iterator[list[int]]:
    """All monic polynomials of the given degree, as coefficient lists."""
    total = q**deg
    for idx in range(total):
        coeffs = []
        v = idx
        for _ in range(deg):
            coeffs.append(v % q)
            v //= q
        yield coeffs + [1]


# ---------------------------------------------------------------------------
# vectorized character-sum histograms
# ---------------------------------------------------------------------------


def _hist_char_sums(
    field: PrimeField,
    deg: int,
    scale: np.ndarray | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Histogram of S(f) = sum_x chi(scale(x) * f(x)) over all monic f of the
    given degree.  Index layout: position s + q holds the count of S = s."""
    q = field.q
    powers = np.array([[pow(x, i, q) for x in range(q)] for i in range(deg + 1)], dtype=np.float64)
    chi = field.chi
    total = q**deg
    block = max(1, (1 << 21) // q)

    def do_range(start: int, stop: int) -> np.ndarray:
        hist = np.zeros(2 * q + 1, dtype=np.int64)
        for s in range(start, stop, block):
            idx = np.arange(s, min(s + block, stop), dtype=np.int64)
            digits = np.empty((len(idx), deg), dtype=np.float64)
            v = idx.copy()
            for i in range(deg):
                digits[:, i] = v % q
                v //= q
            vals = digits @ powers[:deg] + powers[deg][None, :]
            vals = np.mod(vals, q)
            if scale is not None:
                vals = np.mod(vals * scale[None, :], q)
            ssum = chi[vals.astype(np.int64)].sum(axis=1, dtype=np.int64)
            hist += np.bincount(ssum + q, minlength=2 * q + 1)
        return hist

    if threads <= 1 or total < 4 * block:
        return do_range(0, total)
    bounds = np.linspace(0, total, threads + 1, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda ab: do_range(int(ab[0]), int(ab[1])), zip(bounds, bounds[1:])))
    return sum(parts)


def _hist_separable(field: PrimeField, deg: int, threads: int = 1) -> np.ndarray:
    """Character-sum histogram restricted to separable monic f, by the Mobius
    sieve over square factors m^2 | f."""
    q = field.q
    hist = _hist_char_sums(field, deg, threads=threads)
    xs = np.arange(q, dtype=np.int64)
    for k in range(1, deg // 2 + 1):
        u_deg = deg - 2 * k
        for m in _monic_polys(q, k):
            mu = _mobius_poly(m, q)
            if mu == 0:
                continue
            vm = np.zeros(q, dtype=np.int64)
            for i, c in enumerate(m):
                if c:
                    vm = (vm + c * pow_array(xs, i, q)) % q
            scale = (vm * vm) % q
            hist += mu * _hist_char_sums(field, u_deg, scale=scale.astype(np.float64), threads=threads)
    return hist


def pow_array(xs: np.ndarray, e: int, q: int) -> np.ndarray:
    out = np.ones_like(xs)
    base = xs % q
    while e:
        if e & 1:
            out = (out * base) % q
        base = (base * base) % q
        e >>= 1
    return out


def hyperelliptic_census(g: int, q: int, *, threads: int = 1) -> TraceHistogram:
    """Exact weighted trace histogram of genus-g hyperelliptic curves over F_q.

    Sweeps monic separable f of degrees 2g+1 and 2g+2 and both quadratic twists.
    Points at infinity: one for odd degree; for even degree, two on the trivial
    twist and none on the nonsquare twist (the leading coefficient is 1).
    """
    if g < 1:
        raise DomainError(f"genus must be positive, got g={g}")
    field = PrimeField(q)
    raw: dict[int, int] = {}

    def add(t: int, c: int) -> None:
        if c:
            raw[t] = raw.get(t, 0) + c

    sep_odd = _hist_separable(field, 2 * g + 1, threads=threads)
    sep_even = _hist_separable(field, 2 * g + 2, threads=threads)
    for pos, cnt in enumerate(sep_odd):
        s = pos - q
        # y^2 = f: one point at infinity, t = -S(f); the twist flips the sign
        add(-s, int(cnt))
        add(s, int(cnt))
    for pos, cnt in enumerate(sep_even):
        s = pos - q
        # y^2 = f: two points at infinity, t = -S(f) - 1; twist: none, t = S(f) + 1
        add(-s - 1, int(cnt))
        add(s + 1, int(cnt))

    total = sum(raw.values())
    expected = 2 * q ** (2 * g + 2) - 2 * q ** (2 * g)
    if total != expected:
        raise AssertionError(
            f"census mass {total} != 2q^(2g+2) - 2q^(2g) = {expected} for g={g}, q={q}"
        )
    denom = 2 * (q**3 - q)
    counts = {t: Fraction(c, denom) for t, c in sorted(raw.items())}
    return TraceHistogram(family="hyperelliptic", g=g, q=q, counts=counts,
                          raw_pair_counts=dict(sorted(raw.items())))


# ---------------------------------------------------------------------------
# elliptic curves
# ---------------------------------------------------------------------------


def _elliptic_char_sums(field: PrimeField, method: str | None = None) -> np.ndarray:
    """S(a, b) = sum_x chi(x^3 + ax + b) for all (a, b), as a (q, q) int array.

    ``method`` forces the 'matmul' or 'fft' evaluation; by default small q uses
    the dense product and large q the circular cross-correlation."""
    q = field.q
    xs = np.arange(q, dtype=np.int64)
    x3 = (xs**3) % q
    if method not in (None, "matmul", "fft"):
        raise DomainError(f"unknown method {method!r}")
    if method == "matmul" or (method is None and q <= 1024):
        # S(a, .) = cnt_a @ chi_shift with chi_shift[w, b] = chi(w + b)
        chi_shift = field.chi[(xs[:, None] + xs[None, :]) % q].astype(np.float64)
        out = np.empty((q, q), dtype=np.int64)
        for a in range(q):
            cnt = np.bincount((x3 + a * xs) % q, minlength=q).astype(np.float64)
            out[a] = np.rint(cnt @ chi_shift).astype(np.int64)
        return out
    # circular cross-correlation by FFT, batched over a; entries are small
    # integers so rounding is verified strictly
    chi_f = np.fft.rfft(field.chi.astype(np.float64))
    out = np.empty((q, q), dtype=np.int64)
    batch = max(1, (1 << 22) // q)
    for start in range(0, q, batch):
        a_vals = np.arange(start, min(start + batch, q), dtype=np.int64)
        cnt = np.zeros((len(a_vals), q), dtype=np.float64)
        for i, a in enumerate(a_vals):
            cnt[i] = np.bincount((x3 + a * xs) % q, minlength=q)
        corr = np.fft.irfft(np.conj(np.fft.rfft(cnt, axis=1)) * chi_f[None, :], n=q, axis=1)
        rounded = np.rint(corr).astype(np.int64)
        if np.max(np.abs(corr - rounded)) > 0.01:
            raise AssertionError("FFT correlation failed to round to integers")
        out[start : start + len(a_vals)] = rounded
    return out


def elliptic_census(q: int) -> TraceHistogram:
    """Exact weighted trace histogram of elliptic curves y^2 = x^3 + ax + b
    over F_q, q > 3 prime; weights are pair counts divided by q - 1."""
    field = PrimeField(q)
    if q <= 3:
        raise DomainError(f"elliptic census needs q > 3, got q={q}")
    S = _elliptic_char_sums(field)
    hist = np.bincount((S + q).ravel(), minlength=2 * q + 1).astype(np.int64)
    # remove the singular locus 4a^3 + 27b^2 = 0 (exactly q pairs)
    xs = np.arange(q, dtype=np.int64)
    x3 = (xs**3) % q
    inv27 = pow(27, -1, q)
    root = np.full(q, -1, dtype=np.int64)
    for x in range(q - 1, -1, -1):
        root[(x * x) % q] = x
    removed = 0
    for a in range(q):
        rhs = (-4 * pow(a, 3, q) * inv27) % q
        r = int(root[rhs])
        if r < 0:
            continue
        for b in {r, (q - r) % q}:
            s_ab = int(field.chi[(x3 + a * xs + b) % q].sum())
            hist[s_ab + q] -= 1
            removed += 1
    assert removed == q, f"singular locus has {removed} pairs, expected {q}"
    counts: dict[int, Fraction] = {}
    for pos in range(2 * q + 1):
        c = int(hist[pos])
        if c:
            counts[-(pos - q)] = Fraction(c, q - 1)
    raw = {t: int(counts[t] * (q - 1)) for t in sorted(counts)}
    hist_total = sum(raw.values())
    assert hist_total == q * q - q, f"nonsingular pair count {hist_total} != q^2 - q"
    return TraceHistogram(family="elliptic", g=1, q=q,
                          counts=dict(sorted(counts.items())), raw_pair_counts=raw)


# ---------------------------------------------------------------------------
# derived statistics
# ---------------------------------------------------------------------------


def parity_defect(g: int) -> Fraction:
    """r_g = sum_{i=0}^{2g+2} (-2)^i / i!, the truncated e^{-2} series that
    measures how far even and odd traces are from balancing."""
    if g < 1:
        raise DomainError(f"genus must be positive, got g={g}")
    return sum((Fraction((-2) ** i, math.factorial(i)) for i in range(2 * g + 3)), Fraction(0))


@dataclass(frozen=True)
class ParityReport:
    """Even/odd trace mass split of a hyperelliptic census, against the exact
    (1 + r_g)/2 prediction."""

    g: int
    q: int
    even_mass: Fraction
    odd_mass: Fraction
    r_g: Fraction
    predicted_even: Fraction
    deviation: Fraction


def parity_report(hist: TraceHistogram) -> ParityReport:
    if hist.family != "hyperelliptic":
        raise DomainError("parity split is defined for hyperelliptic censuses")
    mass = hist.total_mass()
    even = sum((w for t, w in hist.counts.items() if t % 2 == 0), Fraction(0)) / mass
    odd = 1 - even
    r = parity_defect(hist.g)
    predicted = (1 + r) / 2
    return ParityReport(g=hist.g, q=hist.q, even_mass=even, odd_mass=odd, r_g=r,
                        predicted_even=predicted, deviation=abs(even - predicted))


def nolimit_bounds(
    g: int, eps: float | Fraction = 0, *, tail_nodes: int = 160
) -> tuple[Fraction, Fraction] | tuple[float, float]:
    """Upper/lower constants (b_g, c_g) bounding limsup and liminf of the even
    trace mass ratio: b = (1 - r_g)/(1 - 2v), c = (1 + r_g - 4v)/(1 - 2v), with
    v the Weyl mass of [2g - eps, 2g].  At eps = 0 the result is exact."""
    r = parity_defect(g)
    if eps == 0:
        return (1 - r), (1 + r)
    eps = float(eps)
    if not 0 < eps < 2 * g:
        raise DomainError(f"eps must lie in [0, 2g), got {eps}")
    from .quadrature import _slice_values  # deferred: avoids import cycle at load

    x, w = np.polynomial.legendre.leggauss(tail_nodes)
    lo, hi = 2 * g - eps, 2 * g
    taus = (x + 1.0) * (hi - lo) / 2.0 + lo
    v = float(sum(wi * _slice_values(g, float(t), 120, 160)[0] for t, wi in zip(taus, w)))
    v *= (hi - lo) / 2.0
    rf = float(r)
    return (1 - rf) / (1 - 2 * v), (1 + rf - 4 * v) / (1 - 2 * v)


def empirical_Sn(hist: TraceHistogram, n: int) -> tuple[Fraction, float]:
    """n-th power sum of traces: the exact weighted sum_t t^n counts(t) and its
    normalization by q^(dim + n/2), which converges to the Haar moment."""
    if n < 0:
        raise DomainError(f"moment order must be nonnegative, got n={n}")
    raw = sum((Fraction(t**n) * w for t, w in hist.counts.items()), Fraction(0))
    normalized = float(raw) / hist.q ** (hist.dimension() + n / 2.0)
    return raw, normalized


def signed_asymmetry(hist: TraceHistogram) -> dict[int, Fraction]:
    """q * (counts(t) - counts(-t))/mass for t >= 0: the signed part of the
    trace distribution on the sqrt(q) scale, exact."""
    mass = hist.total_mass()
    if mass == 0:
        return {}
    q = hist.q
    out: dict[int, Fraction] = {}
    for t in range(0, hist.trace_bound() + 1):
        diff = hist.weight(t) - hist.weight(-t)
        if t in hist.counts or -t in hist.counts:
            out[t] = q * diff / mass
    return out


def root_count_table(q: int, d: int, *, separable: bool = False) -> dict[int, int]:
    """Number of monic degree-d polynomials over F_q with exactly k roots in F_q,
    for k = 0..d, by inclusion-exclusion over root sets (#{f : roots >= S} =
    q^(d - |S|)).  With separable=True, restrict to squarefree f by direct
    enumeration (intended for small q^d; the exact totals q^d and q^d - q^(d-1)
    are the cross-checks)."""
    if d < 1:
        raise DomainError(f"degree must be positive, got d={d}")
    field = PrimeField(q)
    if not separable:
        out = {}
        for k in range(d + 1):
            val = sum(
                (-1) ** (j - k) * math.comb(j, k) * math.comb(q, j) * q ** (d - j)
                for j in range(k, min(d, q) + 1)
            )
            out[k] = val
        assert sum(out.values()) == q**d
        return out
    if q**d > 4_000_000:
        raise DomainError(f"separable refinement enumerates q^d polynomials; {q}^{d} is too large")
    out = {k: 0 for k in range(d + 1)}
    for f in _monic_polys(q, d):
        if len(_poly_gcd(f, _poly_deriv(f, q), q)) != 1:
            continue
        roots = sum(1 for x in range(q) if _poly_eval(f, x, q) == 0)
        out[roots] += 1
    return out


def _poly_eval(f: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % q
    return acc
