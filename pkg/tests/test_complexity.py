import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patsp.complexity import (
    base_log_complexity,
    domain_variant_complexity,
    effective_complexity,
    pattern_factor,
    pue_from_logs,
    upper_bound_log,
)


def test_base_log_complexity():
    assert base_log_complexity(2) == pytest.approx(4 * math.log(2), abs=1e-12)
    assert base_log_complexity(22) == pytest.approx(math.log(22 ** 2 * 2 ** 22), abs=1e-12)
    assert base_log_complexity(22) == pytest.approx(21.431322879035427, abs=1e-12)
    # direct evaluation gives 1673.5678...; exact integers cross-check it
    assert base_log_complexity(2392) == pytest.approx(1673.5678261295302, rel=1e-12)
    assert base_log_complexity(2392) == pytest.approx(math.log(2392 ** 2) + math.log(2 ** 2392), rel=1e-12)


def test_pattern_factor_examples():
    assert pattern_factor(50, 1.0, 2.7) == 0.0
    assert pattern_factor(50, 0.0, 0.0) == 1.0
    assert pattern_factor(100, 0.5, 2.0, 2) == pytest.approx(0.48579111385635054, abs=1e-12)


@pytest.mark.parametrize("n", [0, 1])
def test_pattern_factor_rejects_small_n(n):
    with pytest.raises(ValueError):
        pattern_factor(n, 0.5, 1.0)


def test_full_coverage_collapses_to_residual():
    est = effective_complexity(48, 1.0, 3.3)
    assert math.exp(est.log_effective) == pytest.approx(math.log(49), rel=1e-12)
    assert math.exp(est.log_effective) == pytest.approx(3.8918202981106265, rel=1e-12)
    assert est.pue_complexity == pytest.approx(100.0, abs=1e-9)
    assert est.pue_coverage == 100.0


def test_no_patterns_no_reduction():
    est = effective_complexity(100, 0.0, 0.0)
    assert est.log_effective == pytest.approx(est.log_base, rel=1e-12)
    assert abs(est.pue_complexity) < 1e-9


def test_without_pattern_credit():
    est = effective_complexity(100, 1.0, 3.0, pattern_credit=False)
    assert est.log_effective >= est.log_base
    assert est.pue_complexity <= 0.0


def test_domain_variant_examples():
    n = 100
    assert domain_variant_complexity(50.0, 1.0, 2.0, n) == pytest.approx(math.log(math.log(n + 1)), abs=1e-15)
    assert domain_variant_complexity(50.0, 0.0, 2.0, n) == pytest.approx(50.0, abs=1e-12)
    got = domain_variant_complexity(math.log(1e6), 0.5, 2.0, n, H=1.0)
    assert got == pytest.approx(math.log(1e6 * 0.25 * 0.5 + math.log(101)), abs=1e-12)
    assert got == pytest.approx(11.73610593656701, abs=1e-12)


def test_huge_n_is_finite():
    est = effective_complexity(10 ** 6, 0.3, 2.0, R=0.5)
    assert all(math.isfinite(v) for v in (est.log_base, est.log_effective, est.pue_complexity))


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 10 ** 6), st.floats(0, 1), st.floats(0, 10), st.floats(1e-6, 1.0))
def test_residual_floor_and_bound(n, rho, H, R):
    est = effective_complexity(n, rho, H, R)
    floor = math.log(math.log(n + 1))
    assert est.log_effective >= floor - 1e-12
    bound = upper_bound_log(n, rho, H)
    assert est.log_effective <= bound + 1e-12 * abs(bound)
    assert est.pue_complexity <= 100.0


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 5000), st.floats(0, 1), st.floats(0, 1), st.floats(0, 8), st.floats(0, 8))
def test_pue_monotone(n, r1, r2, h1, h2):
    (rlo, rhi), (hlo, hhi) = sorted((r1, r2)), sorted((h1, h2))
    assert effective_complexity(n, rlo, hlo).pue_complexity <= effective_complexity(n, rhi, hlo).pue_complexity
    assert effective_complexity(n, rlo, hlo).pue_complexity <= effective_complexity(n, rlo, hhi).pue_complexity


def test_pue_from_logs_identity():
    assert pue_from_logs(10.0, 10.0) == 0.0
    assert pue_from_logs(10.0, 10.0 - math.log(2)) == pytest.approx(50.0)


@pytest.mark.parametrize("bad", [dict(rho=-0.1), dict(rho=1.1), dict(H=-1.0), dict(R=0.0), dict(R=1.5)])
def test_contract_violations(bad):
    args = dict(n=50, rho=0.5, H=1.0, R=1.0)
    args.update(bad)
    with pytest.raises(ValueError):
        effective_complexity(**args)
