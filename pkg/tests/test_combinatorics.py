import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from randtensor.combinatorics import (FactorialMode, NarayanaRow, Permutation, bell, beta_coefficients, beta_eval,
                                      catalan, cycle_count, exact_root, factorial_family, falling, integer_root,
                                      narayana, narayana_row, rising, shifted_cycle_count)
from randtensor.errors import DomainError


def test_factorial_family_examples():
    assert factorial_family(5, 3, FactorialMode.FALLING) == 60
    assert factorial_family(2, 3, FactorialMode.RISING) == 24
    for n in range(6):
        for mode in FactorialMode:
            assert factorial_family(n, 0, mode) == 1
    assert factorial_family(3, 5, FactorialMode.FALLING) == 0


@given(st.integers(0, 30), st.integers(0, 30))
def test_factorials_match_math(n, t):
    want = math.perm(n, t) if t <= n else 0
    assert falling(n, t) == want
    assert rising(n, t) == (math.factorial(n + t - 1) // math.factorial(n - 1) if n else int(t == 0))


def test_factorial_domain():
    with pytest.raises(DomainError):
        factorial_family(-1, 2, FactorialMode.RISING)


def test_narayana_examples():
    assert narayana(4, 2) == 6
    assert narayana(6, 3) == 50
    assert all(narayana(m, 1) == 1 for m in range(1, 15))
    assert narayana(0, 0) == 1
    assert narayana(5, 0) == 0
    for bad in ((3, 4), (3, -1)):
        with pytest.raises(DomainError):
            narayana(*bad)


def _recurrence_rhs(m, ell, j_start):
    def n(a, b):
        return narayana(a, b) if 0 <= b <= a else 0

    tot = n(m - 1, ell - 1) - n(m - 1, ell)
    for i in range(1, m + 1):
        for j in range(j_start, min(i - 1, ell) + 1):
            tot += n(i - 1, j) * n(m - i, ell - j)
    return tot


def test_narayana_recurrence():
    # the convolution must include j = 0 (the N(0,0) N(m-1, ell) term)
    for m in range(1, 13):
        for ell in range(1, m + 1):
            assert narayana(m, ell) == _recurrence_rhs(m, ell, 0)


def test_recurrence_with_j_from_one_is_wrong():
    assert _recurrence_rhs(2, 1, 1) != narayana(2, 1)


def test_rows_sum_to_catalan():
    for m in range(1, 21):
        assert sum(narayana(m, l) for l in range(1, m + 1)) == catalan(m) == math.comb(2 * m, m) // (m + 1)
        assert narayana_row(m)[m] == 1
    with pytest.raises(DomainError):
        NarayanaRow(2, (1, 2))


def test_bell():
    assert [bell(m) for m in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]


def test_beta_examples():
    assert beta_eval(1, Fraction(3, 7)) == Fraction(3, 7)
    assert beta_eval(3, 1) == 5
    assert beta_eval(2, 2) == 6
    assert beta_coefficients(3) == [0, 1, 3, 1]
    assert beta_eval(0, 5) == 1


@pytest.mark.parametrize("x,root", [(Fraction(1, 4), Fraction(1, 2)), (Fraction(1), Fraction(1)),
                                    (Fraction(4), Fraction(2)), (Fraction(9), Fraction(3))])
def test_beta_envelope(x, root):
    for m in range(1, 51):
        b = beta_eval(m, x)
        top = (1 + root) ** (2 * m)
        assert x * top / (2 * m * m * (1 + root) ** 3) <= b <= top


def test_beta_envelope_irrational_x():
    for x in (0.5, 2.0, 3.0):
        r = math.sqrt(x)
        for m in range(1, 31):
            b = float(beta_eval(m, Fraction(x)))
            top = (1 + r) ** (2 * m)
            assert x * top / (2 * m * m * (1 + r) ** 3) <= b * (1 + 1e-12)
            assert b <= top * (1 + 1e-12)


def test_generating_function_recurrence():
    # F = 1 + x y F + y (F^2 - F), coefficients of y^m for m <= 12, at several rational x
    M = 12
    for x in (Fraction(1, 3), Fraction(1), Fraction(5, 2)):
        f = [beta_eval(m, x) for m in range(M + 1)]
        sq = [sum(f[i] * f[m - i] for i in range(m + 1)) for m in range(M + 1)]
        for m in range(M + 1):
            rhs = (m == 0) + (x * f[m - 1] + sq[m - 1] - f[m - 1] if m else 0)
            assert f[m] == rhs


def test_shifted_cycle_count_examples():
    assert shifted_cycle_count(Permutation.identity(4)) == 1
    assert shifted_cycle_count(Permutation.from_cycles(4, (1, 3))) == 2
    assert shifted_cycle_count(Permutation.from_cycles(4, (1, 3), (2, 4))) == 1


def test_cycle_sum_bound_exhaustive():
    for m in range(1, 8):
        for img in itertools.permutations(range(1, m + 1)):
            pi = Permutation(img)
            assert shifted_cycle_count(pi) + len(pi.cycles()) <= m + 1


def test_permutation_basics():
    with pytest.raises(DomainError):
        Permutation((1, 1, 2))
    a = Permutation.from_cycles(3, (1, 2, 3))
    assert a.compose(a).compose(a) == Permutation.identity(3)
    assert cycle_count([1, 0, 2]) == 2
    shift = Permutation.from_cycles(5, (1, 2, 3, 4, 5))
    pi = Permutation.from_cycles(5, (2, 4))
    assert len(shift.compose(pi).cycles()) == shifted_cycle_count(pi)


@given(st.integers(0, 10 ** 40), st.integers(1, 6))
def test_integer_root(n, k):
    r = integer_root(n, k)
    assert r ** k <= n < (r + 1) ** k
    assert exact_root(r ** k, k) == r
