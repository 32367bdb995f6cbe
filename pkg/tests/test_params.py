from fractions import Fraction

import pytest

from inlslab.extended import INF, XR
from inlslab.params import (
    ModelParams,
    critical_index,
    critical_index_exact,
    scaling_exponents,
    upper_exponents,
    validate_scope,
)


def test_critical_index_values():
    # s_c = N/2 - (2-b)/alpha
    assert critical_index(3, 2.0, 0.3) == pytest.approx(0.65)
    assert critical_index(2, 3.0, 0.2) == pytest.approx(0.4)
    assert critical_index(4, 1.2, 0.25) == pytest.approx(2 - 1.75 / 1.2)
    assert critical_index(1, 2.0, 0.0) == pytest.approx(-0.5)


def test_critical_index_exact_is_rational():
    s = critical_index_exact(3, Fraction(2), Fraction(3, 10))
    assert s == Fraction(13, 20)


def test_upper_exponents():
    # exact rationals in, exact rationals out
    two_star, two_lower = upper_exponents(3, Fraction(3, 10))
    assert two_star == XR(Fraction(17, 5))
    assert two_lower == XR(Fraction(12, 5))
    two_star, two_lower = upper_exponents(4, 0.25)
    assert two_star == two_lower == XR(Fraction(7, 4))
    two_star, two_lower = upper_exponents(2, 0.5)
    assert two_star is INF and two_lower is INF
    with pytest.raises(ValueError):
        upper_exponents(1, 0.0)


def test_scope_flags_at_reference_points():
    for n, alpha, b in [(3, 2.0, 0.3), (2, 3.0, 0.2), (4, 1.2, 0.25)]:
        rep = validate_scope(ModelParams(n, alpha, b))
        assert rep.theorem_scope and rep.global_scope


def test_scope_boundaries_are_strict():
    # alpha exactly at the mass-critical endpoint (4-2b)/N fails
    p = ModelParams(3, (4 - 2 * 0.5) / 3, 0.5)
    rep = validate_scope(p)
    assert not rep.mass_supercritical and not rep.theorem_scope
    # b = 0 fails both b-conditions
    rep0 = validate_scope(ModelParams(3, 2.0, 0.0))
    assert not rep0.b_theorem_ok and not rep0.b_global_ok
    # b at N/3 for N = 3 fails the theorem window but not the global one
    rep3 = validate_scope(ModelParams(3, 2.0, 1.0))
    assert not rep3.b_theorem_ok
    assert rep3.b_global_ok


def test_scope_n1_all_false():
    rep = validate_scope(ModelParams(1, 2.0, 0.0))
    assert not any(
        [rep.mass_supercritical, rep.energy_subcritical, rep.theorem_scope, rep.global_scope]
    )


def test_sigma():
    p = ModelParams(3, 2.0, 0.3)
    assert p.sigma == pytest.approx((1 - 0.65) / 0.65)
    assert ModelParams(1, 2.0, 0.0).sigma is None


def test_scaling_multipliers():
    p = ModelParams(3, 2.0, 0.3)
    rep = scaling_exponents(p, 2.0)
    assert rep.L2 == pytest.approx(2.0 ** (-0.65))
    assert rep.gradL2 == pytest.approx(2.0**0.35)
    assert rep.potential == pytest.approx(2.0**0.7)
    with pytest.raises(ValueError):
        scaling_exponents(p, 0.0)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        ModelParams(0, 2.0, 0.3)
    with pytest.raises(ValueError):
        ModelParams(3, 0.0, 0.3)
    with pytest.raises(ValueError):
        ModelParams(3, 2.0, -0.1)
