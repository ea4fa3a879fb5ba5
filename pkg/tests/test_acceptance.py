"""Acceptance criteria at their stated tolerances.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""

import io
import math

import numpy as np
import pytest
from scipy import integrate

from blindspot.analytic import (
    asymptotic_blindspot,
    design_anchor_intensity,
    gamma_cell_area_pdf,
    independent_blindspot_lines,
    min_lambda0_for_delta,
    visibility_probability,
)
from blindspot.cli import cell_summary, main
from blindspot.config import ScenarioConfig
from blindspot.simulator import blindspot_indicators, estimate_blindspot, sample_cell_areas

pytestmark = pytest.mark.slow

R = 20.0
DELTA = 1e-4
LAM0 = 0.03
LAMBDAS = [k / 100 for k in range(1, 11)]
N_TRIALS = 100_000
SEED = 1
LENGTHS = [float(v) for v in range(1, 21)]


def test_operating_point_is_admissible():
    assert LAM0 >= min_lambda0_for_delta(R, DELTA)
    assert visibility_probability(R, LAM0) < DELTA


@pytest.mark.criterion("C1 fig5 analytic vs MC")
def test_c1_mc_matches_asymptotic(criterion):
    z = {}
    for lam in LAMBDAS:
        est = estimate_blindspot(ScenarioConfig(lam=lam, lam0=LAM0, R=R), N_TRIALS, SEED)
        z[lam] = (est.value - asymptotic_blindspot(lam, LAM0)) / est.stderr
    worst = max(z, key=lambda k: abs(z[k]))
    criterion(f"max |z| = {abs(z[worst]):.2f} at lambda = {worst} (limit 3)")
    assert all(abs(v) <= 3 for v in z.values()), f"|z| > 3: {z}"


@pytest.mark.criterion("C2 independent baseline underestimates")
def test_c2_independent_underestimates(criterion):
    pairs = {lam: (independent_blindspot_lines(lam, LAM0, R), asymptotic_blindspot(lam, LAM0)) for lam in LAMBDAS}
    violations = {lam: p for lam, p in pairs.items() if p[0] > p[1]}
    interior = LAMBDAS[1:-1]
    criterion("b_ind <= b_as on the whole grid, strict inside")
    assert not violations, (
        "b_ind > b_as at " + ", ".join(f"lambda={k}: {a:.6f} > {b:.6f}" for k, (a, b) in violations.items())
    )
    assert all(pairs[lam][0] < pairs[lam][1] for lam in interior)


@pytest.fixture(scope="module")
def length_sweep():
    lam = design_anchor_intensity(LAM0, 0.2)
    cfg = ScenarioConfig(lam=lam, lam0=LAM0, R=R)
    ind = blindspot_indicators(cfg, LENGTHS, N_TRIALS, SEED)
    p = ind.mean(axis=0)
    se = np.sqrt(p * (1 - p) / N_TRIALS)
    return dict(lam=lam, b_as=asymptotic_blindspot(lam, LAM0), ind=ind, p=p, se=se)


@pytest.mark.criterion("C3a fig6 monotone in L per trial")
def test_c3a_monotone(length_sweep, criterion):
    ind = length_sweep["ind"].astype(np.int8)
    bad = int(np.count_nonzero(np.diff(ind, axis=1) < 0))
    criterion(f"{bad} per-trial decreases over {ind.shape[0]} trials x {len(LENGTHS)} lengths")
    assert bad == 0
    assert np.all(np.diff(length_sweep["p"]) >= 0)


@pytest.mark.criterion("C3b fig6 upper bound b <= b_as + 3se")
def test_c3b_upper_bound(length_sweep, criterion):
    p, se, b_as = length_sweep["p"], length_sweep["se"], length_sweep["b_as"]
    has_var = se > 0
    margin = (p[has_var] - b_as) / se[has_var]
    criterion(f"max (b - b_as)/se = {margin.max():.2f} (b_as = {b_as:.4f})")
    assert np.all(p <= b_as + 3 * se)


@pytest.mark.criterion("C3c fig6 tight from L = R/2")
def test_c3c_tight_from_half_range(length_sweep, criterion):
    p, se, b_as = length_sweep["p"], length_sweep["se"], length_sweep["b_as"]
    z = {L: (p[i] - b_as) / se[i] for i, L in enumerate(LENGTHS) if L >= R / 2}
    worst = max(z, key=lambda k: abs(z[k]))
    criterion(f"max |b - b_as|/se = {abs(z[worst]):.1f} at L = {worst}")
    assert all(abs(v) <= 3 for v in z.values()), (
        f"b(L) not within 3 se of b_as={b_as:.4f} for L >= R/2: "
        + ", ".join(f"L={L:g}: z={v:.1f}" for L, v in z.items() if abs(v) > 3)
    )


@pytest.mark.criterion("C4 L = 2R equals lines per trial")
def test_c4_two_r_equivalence(criterion):
    lam = design_anchor_intensity(LAM0, 0.2)
    ind = blindspot_indicators(ScenarioConfig(lam=lam, lam0=LAM0, R=R), [2 * R, math.inf], 10_000, SEED)
    mismatches = int(np.count_nonzero(ind[:, 0] != ind[:, 1]))
    criterion(f"{mismatches} mismatches in 10000 trials")
    assert mismatches == 0


@pytest.mark.criterion("C5 cell areas follow the Voronoi law")
def test_c5_cell_areas(criterion):
    sample = sample_cell_areas(LAM0, N_TRIALS, SEED)
    summary = cell_summary(sample, LAM0)
    criterion(
        f"mean {summary['mean_area']:.3f} (rel err {summary['relative_error']:+.4f}), "
        f"KS {summary['ks_statistic']:.4f}, discarded {sample.n_discarded}"
    )
    assert abs(summary["relative_error"]) < 0.02
    assert summary["ks_statistic"] < 0.02
    assert sample.n_discarded / N_TRIALS < 1e-4


@pytest.mark.criterion("C6 analytic self-consistency")
def test_c6_analytic_consistency(criterion):
    mass, _ = integrate.quad(gamma_cell_area_pdf, 0, np.inf, args=(LAM0,), epsabs=1e-13, epsrel=1e-12)
    mean, _ = integrate.quad(lambda a: a * gamma_cell_area_pdf(a, LAM0), 0, np.inf, epsrel=1e-12)
    grid = [(0.01, 0.03), (0.03, 0.03), (0.05, 0.02), (0.08, 0.04), (0.1, 0.06)]
    drift = max(abs(asymptotic_blindspot(l, l0) - asymptotic_blindspot(2 * l, 2 * l0)) for l, l0 in grid)
    criterion(f"|mass-1| = {abs(mass - 1):.1e}, mean rel err {mean * LAM0 / 4 - 1:+.1e}, scale drift {drift:.1e}")
    assert abs(mass - 1) <= 1e-6
    assert abs(mean / (4 / LAM0) - 1) <= 5e-3
    assert drift < 1e-8


@pytest.mark.criterion("C7 design solver round trip")
def test_c7_design_round_trip(criterion):
    errs = {}
    for eps in (0.01, 0.05, 0.1, 0.3):
        lam = design_anchor_intensity(LAM0, eps)
        errs[eps] = asymptotic_blindspot(lam, LAM0) - eps
    criterion(f"max |b_as(lam*) - eps| = {max(abs(e) for e in errs.values()):.1e}")
    assert all(abs(e) <= 1e-6 for e in errs.values())


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    assert main(argv, out, err) == 0, err.getvalue()
    return out.getvalue()


@pytest.mark.criterion("C8 seeded commands are deterministic")
def test_c8_determinism(criterion):
    commands = [
        ["simulate", "--lambda", "0.05", "--lambda0", "0.03", "--infinite", "--trials", "4000", "--seed", "5"],
        ["simulate", "--lambda", "0.05", "--lambda0", "0.03", "--length", "7", "--trials", "4000", "--seed", "5"],
        ["sweep", "--vary", "L", "--values", "2,6,10", "--lambda", "0.044", "--trials", "2000",
         "--methods", "mc,mc_independent_segments,analytic_asymptotic", "--area-draws", "20", "--seed", "5",
         "--out", "-"],
        ["validate-cells", "--lambda0", "0.03", "--samples", "500", "--seed", "5", "--out", "-"],
    ]
    checked = 0
    for cmd in commands:
        base = _run(cmd + ["--threads", "1"])
        assert _run(cmd + ["--threads", "1"]) == base
        assert _run(cmd + ["--threads", "8"]) == base
        checked += 1
    criterion(f"{checked} commands byte-identical across reruns and --threads 1/8")
