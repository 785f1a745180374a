"""Acceptance criteria 1 to 12, one printed PASS/FAIL line each.

Criteria 1 to 11 run the matching validation family at full scale; the
tolerances live in the families and are restated here. Criterion 12 times
the complete ``validate`` subcommand.
"""

import math
import time

import pytest

from euler_poisson_ct.cli import main
from euler_poisson_ct.thresholds_1d import ConstantBackground, ZeroBackground, threshold_margin
from euler_poisson_ct.validation import ValidationConfig, run_family

CRITERIA = {
    1: ("worked-example", "beta0 == -2 to 1e-12, bound 2-sqrt(2) to 1e-9, oracle within 1e-4, < 1 s"),
    2: ("zero-background-oracle-equivalence", "1000 cases, 100% agreement, t_c rel 1e-6, < 30 s"),
    3: ("asymptotic-decay", "20 global cases, both ratios in [0.98, 1.02] at t = 1e3"),
    4: ("constant-background", "500 + 500 cases, agreement where |margin| > 1e-9"),
    5: ("weak-relaxation", "100 cases, |G_t(t*)| < 1e-6 |G_tt| t*, G_tt > 0, decay 1e-3 by 40 eps"),
    6: ("singular-limit", "gap < 1e-3 at c = 1e-6"),
    7: ("flowmap-fidelity", "nu 0..3 x 50, r rel 1e-8 on [0, 100], energy 1e-9, bounds at 100 times"),
    8: ("nu3-exact", "200 cases, bidirectional agreement, t_c rel 1e-6, velocity limit 1e-2"),
    9: ("threshold-band", "nu 1, 2 x 200, no double firing, oracle soundness, h_nu < alpha^(1-nu)"),
    10: ("cross-formula", "planar t_c equals gradient t_c^- to 1e-12"),
    11: ("viscous-fd", "400 cells to t = 0.5, oscillation 1e-6, implied rho 1e-6"),
}

FULL_SUITE_SECONDS = 180.0


def report(capsys, n, ok, text):
    with capsys.disabled():
        print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'} {text}")


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    name, tol = CRITERIA[n]
    r = run_family(name, ValidationConfig())
    extra = f" worst case: {r.worst_case}" if r.worst_case else ""
    report(capsys, n, r.passed, f"{name}: {r.detail} ({r.samples} checks; {tol}){extra}")
    assert r.passed


def test_criterion_6_value():
    # restated directly: sqrt(k (2 rho0 - c)) against sqrt(2 k rho0)
    gap = abs(threshold_margin(ConstantBackground(1.0, 1e-6), 1.0, 0.0) - threshold_margin(ZeroBackground(1.0), 1.0, 0.0))
    assert gap < 1e-3
    assert gap == pytest.approx(math.sqrt(2.0) - math.sqrt(2.0 - 1e-6), rel=1e-6)


def test_criterion_12(capsys):
    start = time.perf_counter()
    with capsys.disabled():
        print()
        code = main(["validate"])
    secs = time.perf_counter() - start
    ok = code == 0 and secs < FULL_SUITE_SECONDS
    report(capsys, 12, ok, f"full validate suite: exit {code} in {secs:.1f} s (limit {FULL_SUITE_SECONDS:.0f} s)")
    assert ok
