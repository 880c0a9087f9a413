import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from queue_persuasion import incentives
from queue_persuasion.model import Policy, RewardFn, utility_closed_form

finite = st.floats(-5, 5)


def test_build_taxes_example():
    t = incentives.build_taxes(-0.1, 0.2, 0.5)
    assert t.t1 == pytest.approx(0.1)
    assert t.t2 == pytest.approx(0.7)


@given(finite, finite, finite)
def test_tax_gap_is_twice_allocation_gap(t0, q1, q2):
    t = incentives.build_taxes(t0, q1, q2)
    assert t.t2 - t.t1 == pytest.approx(2 * (q2 - q1), abs=1e-12)


def test_allocations_point_mass():
    v = RewardFn.quadratic(50)
    mu = np.zeros(11)
    mu[0] = 1.0
    pol = Policy(np.vstack([np.zeros(11), np.ones(11)]))
    assert incentives.allocations(pol, mu, v) == (0.0, 1.0)


def test_dsic_slacks_example():
    rep = incentives.verify_dsic(incentives.build_taxes(0.0, 0.2, 0.5))
    assert rep.dsic_ok and rep.monotone_ok
    assert rep.dsic_slacks[(1, 2)] == pytest.approx(0.3)
    # type 2 is exactly indifferent to under-reporting under these taxes
    assert rep.dsic_slacks[(2, 1)] == pytest.approx(0.0, abs=1e-15)


@given(finite, finite, finite)
def test_dsic_slacks_follow_closed_form(t0, q1, q2):
    taxes = incentives.build_taxes(t0, q1, q2)
    rep = incentives.verify_dsic(taxes)
    for (i, m), s in rep.dsic_slacks.items():
        direct = utility_closed_form(i, i, taxes) - utility_closed_form(i, m, taxes)
        assert s == pytest.approx(direct, abs=1e-9)
    assert rep.dsic_slacks[(1, 2)] == pytest.approx(q2 - q1, abs=1e-9)
    assert rep.dsic_slacks[(2, 1)] == pytest.approx(0.0, abs=1e-9)
    assert rep.dsic_ok == (q2 >= q1 - incentives.VERIFY_TOL)


def test_dsic_equal_allocations():
    rep = incentives.verify_dsic(incentives.build_taxes(-0.2, 0.4, 0.4))
    assert rep.dsic_ok
    assert all(abs(s) < 1e-15 for s in rep.dsic_slacks.values())


def test_dsic_fails_when_allocations_decrease():
    rep = incentives.verify_dsic(incentives.build_taxes(0.0, 0.5, 0.2))
    assert not rep.dsic_ok and not rep.monotone_ok
    assert rep.dsic_slacks[(1, 2)] == pytest.approx(-0.3)


def test_ir_examples():
    rep = incentives.verify_ir(incentives.build_taxes(0.0, 0.0, 0.0), 0.0, -0.1, 0.0)
    assert rep.ir_ok
    assert rep.ir_slacks == {1: 0.0, 2: 0.0}
    rep = incentives.verify_ir(incentives.build_taxes(-0.05, 0.1, 0.3), 0.1, 0.3, 0.2)
    assert rep.ir_slacks[1] == pytest.approx(-0.05)
    assert rep.ir_slacks[2] == pytest.approx(0.1 + 0.05 - 0.4)
    assert not rep.ir_ok


def test_report_merge():
    a = incentives.verify_dsic(incentives.build_taxes(0.0, 0.1, 0.2))
    b = incentives.verify_ir(incentives.build_taxes(0.0, 0.1, 0.2), 0.1, -1.0, 0.0)
    merged = a.merge(b)
    assert merged.ok
    assert set(merged.to_dict()) >= {"dsic_ok", "ir_ok", "monotone_ok", "dsic_slacks", "ir_slacks"}


def test_revenue_examples():
    taxes = incentives.build_taxes(0.0, 0.0, 0.0655)
    assert incentives.revenue(taxes, 1.2) == pytest.approx(1.2 * 0.0655)
    assert incentives.revenue(incentives.build_taxes(-0.1, 0.3, 0.3), 2.0) == pytest.approx(0.4)


@given(finite, finite, finite, st.floats(0.01, 5))
def test_uniform_revenue_is_offset_plus_top_allocation(t0, q1, q2, lam):
    taxes = incentives.build_taxes(t0, q1, q2)
    assert incentives.revenue(taxes, lam) == pytest.approx(lam * (t0 + q2), abs=1e-9)


@pytest.mark.parametrize("lam,p,expected", [(1.2, 0.0, 0.0), (1.2, 0.2, 0.12), (2.0, 1.0, 1.0)])
def test_outside_option_revenue(lam, p, expected):
    assert math.isclose(incentives.outside_option_revenue(lam, p), expected, abs_tol=1e-15)
