"""Class numbers, the Kronecker class-number formula, Deuring matching, and
the anomalous-trace search.

Oracles:

* classical class numbers of small imaginary quadratic fields (frozen table);
* the finite character sum h = |sum chi(k) k| / |Delta| over 0 < k < |Delta|,
  an entirely different computation from reduced-form counting;
* the order-by-order sum H(Delta) = sum_{d | conductor} h(d^2 Delta_0), which
  the multiplicative formula must reproduce.
"""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
import sympy

from ksrefine.classnumbers import (
    AnomalyCertificate,
    QuadDiscriminant,
    SearchBudget,
    _form_count,
    class_number_forms,
    deuring_check,
    find_anomalous_trace,
    kronecker_H,
    quadratic_character,
)
from ksrefine.errors import BudgetExceededError, DomainError

# Classical values: the full class-number-one list below -4, plus the first
# few larger ones.
H_TABLE = {
    -7: 1,
    -8: 1,
    -11: 1,
    -15: 2,
    -19: 1,
    -20: 2,
    -23: 3,
    -24: 2,
    -31: 3,
    -39: 4,
    -43: 1,
    -47: 5,
    -67: 1,
    -71: 7,
    -163: 1,
}


def kronecker_chi(delta0: int, k: int) -> int:
    """Multiplicative extension of the prime character to all k >= 1."""
    value = 1
    for p, e in sympy.factorint(k).items():
        cp = quadratic_character(delta0, p)
        if cp == 0:
            return 0
        value *= cp**e
    return value


def class_number_dirichlet(delta0: int) -> int:
    """h(delta0) = |sum_{0<k<|d|} chi(k) k| / |d|, valid for delta0 < -4."""
    d = -delta0
    total = sum(kronecker_chi(delta0, k) * k for k in range(1, d))
    assert total % d == 0
    return abs(total) // d


def fundamental_discriminants(lo: int) -> list[int]:
    out = []
    for delta in range(-5, lo - 1, -1):
        if delta % 4 not in (0, 1) or delta in (-3, -4):
            continue
        try:
            disc = QuadDiscriminant.from_int(delta)
        except DomainError:
            continue
        if disc.is_fundamental:
            out.append(delta)
    return out


# ---------------------------------------------------------------------------
# class numbers of the maximal order
# ---------------------------------------------------------------------------


def test_class_number_table():
    for delta0, h in H_TABLE.items():
        assert class_number_forms(delta0) == h, delta0


def test_class_number_matches_character_sum():
    for delta0 in fundamental_discriminants(-300):
        assert class_number_forms(delta0) == class_number_dirichlet(delta0), delta0


def test_class_number_rejects_bad_input():
    with pytest.raises(DomainError):
        class_number_forms(5)
    with pytest.raises(DomainError):
        class_number_forms(-12)  # conductor 2 over -3
    for units in (-3, -4):
        with pytest.raises(DomainError):
            class_number_forms(units)
    with pytest.raises(DomainError):
        class_number_forms(-6)  # not a discriminant at all


def test_form_count_has_principal_form():
    # (1, b, c) with b = delta mod 2 is always reduced and primitive.
    for delta in range(-5, -500, -1):
        if delta % 4 in (0, 1):
            assert _form_count(delta) >= 1


# ---------------------------------------------------------------------------
# quadratic character
# ---------------------------------------------------------------------------


def test_character_at_two():
    assert quadratic_character(-7, 2) == 1
    assert quadratic_character(-15, 2) == 1
    assert quadratic_character(-23, 2) == 1
    assert quadratic_character(-11, 2) == -1
    assert quadratic_character(-19, 2) == -1
    assert quadratic_character(-20, 2) == 0
    assert quadratic_character(-8, 2) == 0


def test_character_matches_legendre_symbol():
    for delta0 in (-7, -11, -15, -19, -20, -23, -24, -163):
        for p in sympy.primerange(3, 60):
            if delta0 % p == 0:
                assert quadratic_character(delta0, p) == 0
            else:
                assert quadratic_character(delta0, p) == sympy.legendre_symbol(delta0, p)


# ---------------------------------------------------------------------------
# discriminant decomposition
# ---------------------------------------------------------------------------


def test_from_int_decomposition():
    disc = QuadDiscriminant.from_int(-76)
    assert (disc.delta0, disc.conductor) == (-19, 2)
    assert disc.conductor_factors == ((2, 1),)
    assert not disc.is_fundamental

    disc = QuadDiscriminant.from_int(-19)
    assert disc.is_fundamental and disc.conductor == 1

    disc = QuadDiscriminant.from_int(-720)
    assert (disc.delta0, disc.conductor) == (-20, 6)
    assert disc.conductor**2 * disc.delta0 == -720
    assert disc.conductor_factors == ((2, 1), (3, 1))


def test_from_int_rejections():
    with pytest.raises(DomainError):
        QuadDiscriminant.from_int(-27)  # fundamental part -3
    with pytest.raises(DomainError):
        QuadDiscriminant.from_int(-16)  # fundamental part -4
    with pytest.raises(DomainError):
        QuadDiscriminant.from_int(-5)  # 3 mod 4
    with pytest.raises(DomainError):
        QuadDiscriminant.from_int(5)


# ---------------------------------------------------------------------------
# Kronecker class numbers
# ---------------------------------------------------------------------------


def test_kronecker_H_values():
    assert kronecker_H(-76) == 4
    assert kronecker_H(-92) == 6
    assert kronecker_H(QuadDiscriminant.from_int(-76)) == 4
    # fundamental discriminants reduce to the plain class number
    for delta0, h in H_TABLE.items():
        assert kronecker_H(delta0) == h


def test_kronecker_H_equals_sum_over_orders():
    for delta in range(-5, -401, -1):
        if delta % 4 not in (0, 1):
            continue
        try:
            disc = QuadDiscriminant.from_int(delta)
        except DomainError:
            continue
        by_orders = sum(
            _form_count(d * d * disc.delta0) for d in sympy.divisors(disc.conductor)
        )
        assert kronecker_H(disc) == by_orders, delta


# ---------------------------------------------------------------------------
# Deuring matching against the census
# ---------------------------------------------------------------------------


def test_deuring_small_cases(ell_small):
    report = deuring_check(5, 1, hist=ell_small[5])
    assert report.delta == -19 and report.H == 1
    assert report.expected == Fraction(1, 2)
    assert report.equal and report.census == report.expected

    report = deuring_check(7, 2, hist=ell_small[7])
    assert report.delta == -24 and report.H == 2
    assert report.equal


def test_deuring_every_admissible_trace(ell_small):
    checked = 0
    for q, hist in ell_small.items():
        for t in range(-math.isqrt(4 * q - 1), math.isqrt(4 * q - 1) + 1):
            if math.gcd(t, q) != 1:
                continue
            try:
                report = deuring_check(q, t, hist=hist)
            except DomainError:
                continue  # fundamental part -3 or -4
            assert report.equal, (q, t)
            checked += 1
    assert checked > 20


def test_deuring_rejections(ell_small, hyp_g2):
    with pytest.raises(DomainError):
        deuring_check(4, 1)
    with pytest.raises(DomainError):
        deuring_check(3, 1)
    with pytest.raises(DomainError):
        deuring_check(5, 5, hist=ell_small[5])  # supersingular
    with pytest.raises(DomainError):
        deuring_check(5, 6, hist=ell_small[5])  # t^2 >= 4q
    with pytest.raises(DomainError):
        deuring_check(7, 1, hist=ell_small[7])  # discriminant -27 over -3
    with pytest.raises(DomainError):
        deuring_check(5, 1, hist=ell_small[7])  # wrong q
    with pytest.raises(DomainError):
        deuring_check(5, 1, hist=hyp_g2[5])  # wrong family


# ---------------------------------------------------------------------------
# anomalous traces
# ---------------------------------------------------------------------------


def certificate_inequality(cert: AnomalyCertificate) -> bool:
    return Fraction(cert.H, 2) ** 2 > cert.c**2 * (4 * cert.q - cert.t**2)


def test_anomaly_small_c_is_census_verified():
    cert = find_anomalous_trace(Fraction(1, 10), -19)
    assert (cert.q, cert.t, cert.H) == (23, 4, 4)
    assert cert.census_verified is True
    assert certificate_inequality(cert)
    assert cert.t**2 <= cert.q
    assert cert.discriminant == cert.t**2 - 4 * cert.q
    assert cert.ratio > 0.1


def test_anomaly_larger_c():
    cert = find_anomalous_trace(Fraction(1, 2), -19)
    assert certificate_inequality(cert)
    assert cert.t**2 <= cert.q
    assert cert.ratio > 0.5
    state = cert.state
    assert cert.discriminant == 4 * state.f**2 * state.v**2 * state.delta0
    assert cert.conductor == 2 * state.f * abs(state.v)
    assert kronecker_H(
        QuadDiscriminant(
            delta=cert.discriminant,
            delta0=state.delta0,
            conductor=cert.conductor,
            conductor_factors=tuple(sorted(sympy.factorint(cert.conductor).items())),
        )
    ) == cert.H


def test_anomaly_budget_exceeded():
    tiny = SearchBudget(max_inert=0, x_max=5, y_max=1, m_max=3)
    with pytest.raises(BudgetExceededError, match="last state"):
        find_anomalous_trace(Fraction(1, 2), -19, tiny)


def test_anomaly_rejections():
    with pytest.raises(DomainError):
        find_anomalous_trace(0, -19)
    with pytest.raises(DomainError):
        find_anomalous_trace(Fraction(-1, 2), -19)
    with pytest.raises(DomainError):
        find_anomalous_trace(Fraction(1, 10), -3)
    with pytest.raises(DomainError):
        find_anomalous_trace(Fraction(1, 10), -12)
    with pytest.raises(DomainError):
        find_anomalous_trace(Fraction(1, 10), 5)
