"""Imaginary quadratic class numbers and Weil-number trace constructions.

Class numbers are counted directly as reduced primitive binary quadratic forms
(a, b, c) of the given discriminant.  For a non-maximal order of discriminant
Delta = F^2 Delta_0 the Kronecker class number, which is what counts elliptic
curves per isogeny class, is assembled by the multiplicative formula

    H(Delta) = h(Delta_0) * prod_{p^e || F} (1 + (1 - chi(p)/p)(p + ... + p^e)),

chi the quadratic character of Delta_0.  The same quantity is also a plain sum
of form counts over the orders between the maximal one and conductor F, which
is what the tests compare against.

The anomalous-trace search builds a Weil number pi = x + f y sqrt(Delta_0) of
prime norm q0, then powers it until its argument lands in [pi/3, 2pi/3), which
pins |t| <= sqrt(q) while the discriminant t^2 - 4q keeps the conductor 2 f v
divisible by every chosen inert prime.  Those primes inflate H(t^2 - 4q), so a
census at cardinality q would see an excess of curves at an abnormally central
trace.  All certificate inequalities are checked in exact rational arithmetic;
floating point only steers the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import sympy

from .errors import BudgetExceededError, DomainError

__all__ = [
    "QuadDiscriminant",
    "WeilNumberState",
    "SearchBudget",
    "DeuringReport",
    "AnomalyCertificate",
    "class_number_forms",
    "kronecker_H",
    "deuring_check",
    "find_anomalous_trace",
    "quadratic_character",
]


def _is_discriminant(d: int) -> bool:
    return d < 0 and d % 4 in (0, 1)


def _is_fundamental(d: int) -> bool:
    if not _is_discriminant(d):
        return False
    if d % 4 == 1:
        return all(e == 1 for e in sympy.factorint(-d).values())
    m = d // 4
    if m % 4 in (-2, -1, 2, 3):
        return all(e == 1 for e in sympy.factorint(-m).values())
    return False


def quadratic_character(delta0: int, p: int) -> int:
    """chi(p) = Kronecker symbol (delta0 / p) for prime p: +1 split, -1 inert,
    0 ramified."""
    if p == 2:
        if delta0 % 2 == 0:
            return 0
        return 1 if delta0 % 8 in (1, 7) else -1
    r = delta0 % p
    if r == 0:
        return 0
    ls = pow(r, (p - 1) // 2, p)
    return 1 if ls == 1 else -1


def _form_count(delta: int) -> int:
    """Number of reduced primitive forms (a, b, c) with b^2 - 4ac = delta:
    |b| <= a <= c, gcd(a, b, c) = 1, and b >= 0 whenever |b| = a or a = c."""
    if not _is_discriminant(delta):
        raise DomainError(f"{delta} is not a negative discriminant")
    count = 0
    a = 1
    while 4 * a * a <= -delta + a * a:  # a <= sqrt(|delta|/3) <=> 3a^2 <= |delta|
        for b in range(-a, a + 1):
            if (b - delta) % 2:
                continue
            num = b * b - delta
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (b == -a or a == c):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            count += 1
        a += 1
    return count


def class_number_forms(delta0: int) -> int:
    """Class number h(delta0) of the maximal order, by enumerating reduced
    primitive forms.  Restricted to fundamental delta0 < -4; the two
    discriminants with extra units are out of scope throughout."""
    if delta0 >= 0:
        raise DomainError(f"discriminant must be negative, got {delta0}")
    if delta0 in (-3, -4):
        raise DomainError("delta0 in {-3, -4} carries extra units and is not supported")
    if not _is_fundamental(delta0):
        raise DomainError(f"{delta0} is not a fundamental discriminant")
    return _form_count(delta0)


@dataclass(frozen=True)
class QuadDiscriminant:
    """A negative discriminant split as Delta = conductor^2 * Delta_0."""

    delta: int
    delta0: int
    conductor: int
    conductor_factors: tuple[tuple[int, int], ...]

    @classmethod
    def from_int(cls, delta: int) -> "QuadDiscriminant":
        if not _is_discriminant(delta):
            raise DomainError(f"{delta} is not a negative discriminant (need < 0 and 0, 1 mod 4)")
        fac = sympy.factorint(-delta)
        square = 1
        for p, e in fac.items():
            square *= p ** (e // 2)
        m = (-delta) // (square * square)  # squarefree part
        if (-m) % 4 == 1:
            delta0, cond = -m, square
        else:
            if square % 2:
                raise AssertionError(f"inconsistent discriminant decomposition for {delta}")
            delta0, cond = -4 * m, square // 2
        if delta0 in (-3, -4):
            raise DomainError(
                f"fundamental part of {delta} is {delta0}, which carries extra units"
            )
        cf = tuple(sorted(sympy.factorint(cond).items())) if cond > 1 else ()
        return cls(delta=delta, delta0=delta0, conductor=cond, conductor_factors=cf)

    @property
    def is_fundamental(self) -> bool:
        return self.conductor == 1


def kronecker_H(disc: QuadDiscriminant | int) -> int:
    """Kronecker class number H(Delta): the weighted count of elliptic curves
    per ordinary isogeny class is H/2.  Computed by the conductor product
    formula over h(Delta_0); exact, and asserted integral."""
    if isinstance(disc, int):
        disc = QuadDiscriminant.from_int(disc)
    h0 = class_number_forms(disc.delta0)
    total = Fraction(h0)
    for p, e in disc.conductor_factors:
        chi = quadratic_character(disc.delta0, p)
        geom = sum(p**i for i in range(1, e + 1))
        total *= 1 + (1 - Fraction(chi, p)) * geom
    assert total.denominator == 1, f"H({disc.delta}) not integral"
    return total.numerator


@dataclass(frozen=True)
class DeuringReport:
    q: int
    t: int
    delta: int
    delta0: int
    conductor: int
    H: int
    expected: Fraction
    census: Fraction
    equal: bool


def deuring_check(q: int, t: int, *, hist=None) -> DeuringReport:
    """Compare the weighted elliptic count at trace t with H(t^2 - 4q)/2.

    Preconditions are reported, not skipped: q > 3 prime, gcd(t, q) = 1 (the
    ordinary case), t^2 < 4q, and a fundamental part below -4.  ``hist`` may
    carry a precomputed census for q.
    """
    if not sympy.isprime(q) or q <= 3:
        raise DomainError(f"q must be a prime > 3, got {q}")
    if math.gcd(t, q) != 1:
        raise DomainError(f"trace t={t} is not coprime to q={q} (supersingular cases excluded)")
    if t * t >= 4 * q:
        raise DomainError(f"t={t} violates t^2 < 4q for q={q}")
    disc = QuadDiscriminant.from_int(t * t - 4 * q)
    H = kronecker_H(disc)
    expected = Fraction(H, 2)
    if hist is None:
        from .census import elliptic_census

        hist = elliptic_census(q)
    if hist.q != q or hist.family != "elliptic":
        raise DomainError("supplied histogram does not match q or is not elliptic")
    census = hist.weight(t)
    return DeuringReport(q=q, t=t, delta=disc.delta, delta0=disc.delta0,
                         conductor=disc.conductor, H=H, expected=expected,
                         census=census, equal=expected == census)


# ---------------------------------------------------------------------------
# anomalous trace construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchBudget:
    """Caps for the anomalous-trace search; exceeding any of them raises
    BudgetExceededError with the progress state attached."""

    max_inert: int = 6
    x_max: int = 400
    y_max: int = 4
    m_max: int = 24
    factor_limit: int = 10**6
    max_v_bits: int = 96
    census_q_max: int = 3000


@dataclass(frozen=True)
class WeilNumberState:
    """The integer data of pi^m = u + f v sqrt(delta0), norm q = q0^m."""

    delta0: int
    f: int
    inert_primes: tuple[int, ...]
    q0: int
    x: int
    y: int
    m: int
    u: int
    v: int


@dataclass(frozen=True)
class AnomalyCertificate:
    """A verified instance of an overloaded central trace: H(t^2 - 4q)/2 curves
    share trace t with |t| <= sqrt(q), while a typical class holds only about
    sqrt(4q - t^2) of mass 1/(2c) times that."""

    state: WeilNumberState
    q: int
    t: int
    discriminant: int
    conductor: int
    H: int
    c: Fraction
    ratio: float  # H / (2 sqrt(4q - t^2)) >= c, also checked exactly
    inert_product: Fraction
    threshold: float
    census_verified: bool | None


def _inert_primes(delta0: int) -> Iterator[int]:
    for p in sympy.primerange(2, 10**6):
        if quadratic_character(delta0, p) == -1:
            yield p


def _certificate_holds(H: int, c: Fraction, q: int, t: int) -> bool:
    # H/2 > c sqrt(4q - t^2), squared to stay rational
    return Fraction(H, 2) ** 2 > c * c * (4 * q - t * t)


def find_anomalous_trace(
    c: Fraction | float | str,
    delta0: int,
    budget: SearchBudget | None = None,
) -> AnomalyCertificate:
    """Search for (q, t) with |t| <= sqrt(q) and H(t^2 - 4q)/2 > c sqrt(4q - t^2).

    Follows the Weil-number construction: f ranges over products of the first
    few primes inert in Q(sqrt(delta0)); for each, primes q0 = x^2 - f^2 delta0
    y^2 are powered until the argument of pi^m lands in [pi/3, 2pi/3), checked
    exactly as 4u^2 <= q0^m.  Every candidate certificate is verified in exact
    rational arithmetic before being returned, so the sufficient product
    criterion prod(1 + 1/p) > (c pi^2 / 3) sqrt(|delta0|)/h(delta0) is reported
    but need not be reached: it is wildly conservative at practical sizes, and
    the growth it requires of f is astronomical already for c near 1/2.
    """
    c = Fraction(str(c)) if not isinstance(c, Fraction) else c
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    if delta0 >= 0 or delta0 in (-3, -4) or not _is_fundamental(delta0):
        raise DomainError(f"delta0 must be a fundamental discriminant < -4, got {delta0}")
    budget = budget or SearchBudget()
    h0 = class_number_forms(delta0)
    threshold = float(c) * math.pi**2 / 3.0 * math.sqrt(-delta0) / h0

    primes: list[int] = []
    gen = _inert_primes(delta0)
    best_state: WeilNumberState | None = None
    for n_inert in range(budget.max_inert + 1):
        f = math.prod(primes)
        inert_product = math.prod((Fraction(p + 1, p) for p in primes), start=Fraction(1))
        for y in range(1, budget.y_max + 1):
            for x in range(1, budget.x_max + 1):
                q0 = x * x - f * f * delta0 * y * y
                if not sympy.isprime(q0):
                    continue
                u, s = x, f * y
                for m in range(1, budget.m_max + 1):
                    qm = q0**m
                    if 4 * u * u < qm or (4 * u * u == qm and u > 0):
                        break
                    u, s = u * x + s * f * y * delta0, u * f * y + s * x
                else:
                    continue
                if u == 0 or s % f:
                    continue
                v = s // f
                t, q = 2 * u, qm
                if math.gcd(t, q0) != 1:
                    continue
                if abs(v).bit_length() > budget.max_v_bits:
                    continue
                state = WeilNumberState(delta0=delta0, f=f, inert_primes=tuple(primes),
                                        q0=q0, x=x, y=y, m=m, u=u, v=v)
                best_state = state
                delta = t * t - 4 * q
                assert delta == 4 * f * f * v * v * delta0
                fac = sympy.factorint(2 * f * abs(v), limit=budget.factor_limit,
                                      use_rho=False, use_pm1=False)
                if not all(sympy.isprime(p) for p in fac):
                    continue
                disc = QuadDiscriminant(
                    delta=delta, delta0=delta0, conductor=2 * f * abs(v),
                    conductor_factors=tuple(sorted(fac.items())),
                )
                H = kronecker_H(disc)
                if not _certificate_holds(H, c, q, t):
                    continue
                verified: bool | None = None
                if m == 1 and q <= budget.census_q_max:
                    from .census import elliptic_census

                    verified = elliptic_census(q).weight(t) == Fraction(H, 2)
                ratio = H / (2.0 * math.sqrt(4 * q - t * t))
                return AnomalyCertificate(
                    state=state, q=q, t=t, discriminant=delta,
                    conductor=disc.conductor, H=H, c=c, ratio=ratio,
                    inert_product=inert_product, threshold=threshold,
                    census_verified=verified,
                )
        primes.append(next(gen))
    raise BudgetExceededError(
        f"no certificate with c={c}, delta0={delta0} within budget {budget}; "
        f"last state: {best_state}"
    )
