"""Independent exact-arithmetic oracle for the multi-path slot-count profile.

This module evaluates the closed-form interference profile with sympy
(exact radicals, exact floors) and freezes the expected rationals used by
the acceptance suite.  It is intentionally independent of the planner
implementation in ``relayplan.single``: the oracle below was written and
committed first, and the planner must reproduce its numbers exactly.
"""

from __future__ import annotations

import math

import pytest
import sympy as sp


def oracle_slot_total(c: int, q: int, r, R):
    """Exact slot total for a gate node q hops out, with c paths built."""
    total = q + 1
    for m in range(2, c + 1):
        theta = sp.Rational(2 * (m - 1), c) * sp.pi
        cos_t = sp.cos(theta)
        x = q * r * cos_t + sp.sqrt(q**2 * r**2 * cos_t**2 - q**2 * r**2 + R**2)
        slots = sp.Max(sp.floor(x / r), 0) + 1
        total += slots
    return sp.simplify(total)


def oracle_profile(c: int, r, R, f):
    """Exact (max slot count, per-configuration flow) over all gate offsets."""
    span = int(sp.floor(R / r))
    assert span >= 1
    s_c = max(int(oracle_slot_total(c, q, r, R)) for q in range(1, span + 1))
    return s_c, sp.Rational(c, s_c) * f


# Frozen from the oracle above with r=10, R=10*sqrt(2), f=1.  These exact
# rationals gate the planner's profile implementation.
SQRT2_EXPECTED = {
    1: (2, sp.Rational(1, 2)),
    2: (3, sp.Rational(2, 3)),
    3: (4, sp.Rational(3, 4)),
    4: (7, sp.Rational(4, 7)),
}


def test_oracle_reproduces_frozen_sqrt2_profile():
    r = sp.Integer(10)
    R = 10 * sp.sqrt(2)
    for c, (s_exp, f_exp) in SQRT2_EXPECTED.items():
        s_c, f_c = oracle_profile(c, r, R, sp.Integer(1))
        assert s_c == s_exp, f"c={c}: oracle slot count {s_c} != frozen {s_exp}"
        assert f_c == f_exp


def test_oracle_best_configuration_is_three_paths():
    r = sp.Integer(10)
    R = 10 * sp.sqrt(2)
    flows = {c: oracle_profile(c, r, R, sp.Integer(1))[1] for c in range(1, 5)}
    best = max(flows, key=lambda c: flows[c])
    assert best == 3
    assert flows[best] == sp.Rational(3, 4)


def test_oracle_single_path_matches_chain_bound():
    # With one path the profile must collapse to f / (span + 1).
    r = sp.Integer(10)
    for R in (sp.Integer(10), 10 * sp.sqrt(2), sp.Integer(18), sp.Integer(22)):
        span = int(sp.floor(R / r))
        s_c, f_c = oracle_profile(1, r, R, sp.Integer(1))
        assert s_c == span + 1
        assert f_c == sp.Rational(1, span + 1)


def test_planner_profile_matches_oracle_exactly():
    """The float implementation must hit the frozen rationals exactly."""
    relayplan = pytest.importorskip("relayplan")
    from relayplan.model import RadioConfig
    from relayplan.single import interference_profile, max_flow

    config = RadioConfig(r=10.0, R=10.0 * math.sqrt(2.0), f=1.0, C=4)
    for c, (s_exp, f_exp) in SQRT2_EXPECTED.items():
        prof = interference_profile(c, config)
        assert prof.max_slots == s_exp
        assert prof.flow == float(f_exp)
    flow, best_c = max_flow(config)
    assert best_c == 3
    assert flow == 0.75


def test_planner_interference_length_examples():
    """Hand-evaluated reach values for the cross-path interference length."""
    relayplan = pytest.importorskip("relayplan")
    from relayplan.model import RadioConfig
    from relayplan.single import interference_length

    R = 10.0 * math.sqrt(2.0)
    config = RadioConfig(r=10.0, R=R, f=1.0, C=4)
    # Antipodal path, cos(pi) = -1: reach is R - r.
    assert interference_length(1, 2, 2, config) == pytest.approx(R - 10.0, abs=1e-9)
    # Three paths, cos(2*pi/3) = -1/2: reach is -5 + sqrt(125).
    assert interference_length(1, 2, 3, config) == pytest.approx(
        -5.0 + math.sqrt(125.0), abs=1e-9
    )
    # Four paths, the third is antipodal again.
    assert interference_length(1, 3, 4, config) == pytest.approx(R - 10.0, abs=1e-9)
