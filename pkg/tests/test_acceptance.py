"""Acceptance gate: one test per shipped criterion, at the stated tolerance.

Each test prints a single ``ACCEPTANCE nn ... PASS|FAIL`` line before its
assertions so the tee'd run log shows the full scorecard even when a
criterion fails.

Criteria 01 and 02 assert a published candidate table: candidate counts,
Legendre verdicts, grid values, *and* the table's objective column.  The
first three conjuncts reproduce here; the objective column does not, and the
discrepancy is structural rather than a solver artifact:

* ``h * el_residual_frac`` is exactly the finite-difference gradient of
  ``functional_value`` (asserted in the unit suite), so the solver's
  objective evaluator is the unique one consistent with its stationarity
  system;
* every y-row of the reference table is a stationary point of this system
  (residual norms <= 1e-4 — also asserted in the unit suite), with matching
  candidate counts and Legendre verdicts;
* therefore no functional having those rows as stationary points can emit
  the table's objective numbers (9.30.., -32.71.., 5.104.., ...); a wide
  sweep of alternative summation conventions (dropped step weights, shifted
  kernels, order permutations, endpoint handling) reproduces none of them.

The objective conjunct is asserted anyway and left red on purpose: the
evaluator stays faithful to the discretization rather than being tuned to
reproduce unexplained numbers.
"""

import math
import time

import numpy as np
import pytest

from tsvar import dsl, inequalities, timescale, varcalc
from tsvar.cli import _SUITES
from tsvar.fracvar import (
    FracGrid,
    FracOrders,
    FracProblem,
    frac_sbp_residual,
    left_frac_sum,
    right_frac_sum,
    solve_frac_el,
)
from tsvar.solvers import SolverConfig, adaptive_simpson
from tsvar.timescale import GridFunction, uniform


def report(num: int, label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"ACCEPTANCE {num:02d} {label}: {status}{suffix}")


# ---------------------------------------------------------------------------
# 01 cubic + quadratic fractional problem: candidate table


def test_criterion_01_candidate_table_orders_08_05():
    reference_y = (1.0306820, 1.8920322, 2.7429222)
    reference_F = -32.7189756
    problem = FracProblem(FracGrid(0.0, 1.0, 0.25), FracOrders(0.8, 0.5),
                          dsl.parse("v^3 + 1*w^2"), A=0.0, B=1.0)
    started = time.perf_counter()
    cands = solve_frac_el(problem, SolverConfig(starts=512, seed=0,
                                                box=(-6.0, 6.0)))
    elapsed = time.perf_counter() - started

    n_legendre = sum(c.legendre_ok for c in cands)
    y_match = None
    for c in cands:
        if np.max(np.abs(c.y.values[1:-1] - np.asarray(reference_y))) <= 1e-4:
            y_match = c
    f_ok = y_match is not None and abs(y_match.functional_value
                                       - reference_F) <= 1e-3
    ok = (len(cands) >= 8 and n_legendre == 2 and y_match is not None
          and f_ok and elapsed < 10.0)
    got_F = "n/a" if y_match is None else f"{y_match.functional_value:.7f}"
    report(1, "candidate table, orders (0.8, 0.5)", ok,
           f"{len(cands)} candidates, {n_legendre} Legendre-verified, "
           f"y-match {'yes' if y_match is not None else 'no'}, "
           f"F = {got_F} vs {reference_F}, {elapsed:.1f} s")

    assert len(cands) >= 8
    assert n_legendre == 2
    assert y_match is not None and y_match.legendre_ok
    assert elapsed < 10.0
    assert f_ok, (
        f"objective column not reproducible: faithful evaluator gives "
        f"{y_match.functional_value:.7f} at the matching candidate, table "
        f"says {reference_F}; see module docstring")


# ---------------------------------------------------------------------------
# 02 pure cubic fractional problem: sixteen-candidate table


def test_criterion_02_candidate_table_order_03():
    reference_y = (0.259846344, 0.364035314, 0.463222456, 0.597907505)
    reference_F = 5.104389191
    problem = FracProblem(FracGrid(0.0, 0.5, 0.1), FracOrders(0.3, 0.3),
                          dsl.parse("v^3"), A=0.0, B=1.0)
    started = time.perf_counter()
    cands = solve_frac_el(problem, SolverConfig(starts=512, seed=0,
                                                box=(-6.0, 6.0)))
    elapsed = time.perf_counter() - started

    n_legendre = sum(c.legendre_ok for c in cands)
    winner = next((c for c in cands if c.legendre_ok), None)
    y_ok = (winner is not None
            and np.max(np.abs(winner.y.values[1:-1]
                              - np.asarray(reference_y))) <= 1e-4
            and abs(winner.y.values[-1] - 1.0) <= 1e-12)
    f_ok = winner is not None and abs(winner.functional_value
                                      - reference_F) <= 1e-3
    ok = (len(cands) >= 16 and n_legendre == 1 and y_ok and f_ok
          and elapsed < 30.0)
    got_F = "n/a" if winner is None else f"{winner.functional_value:.7f}"
    report(2, "candidate table, order 0.3", ok,
           f"{len(cands)} candidates, {n_legendre} Legendre-verified, "
           f"y-match {'yes' if y_ok else 'no'}, "
           f"F = {got_F} vs {reference_F}, {elapsed:.1f} s")

    assert len(cands) >= 16
    assert n_legendre == 1
    assert y_ok
    assert elapsed < 30.0
    assert f_ok, (
        f"objective column not reproducible: faithful evaluator gives "
        f"{winner.functional_value:.7f} at the Legendre-verified candidate, "
        f"table says {reference_F}; see module docstring")


# ---------------------------------------------------------------------------
# 03 direct method on the integer grid


def test_criterion_03_direct_method_exact():
    scale = uniform(0.0, 5.0, 1.0)
    result = varcalc.direct_solve_entropy(scale, lambda t: 2.0 * t + 1.0, 25.0)
    exact = 10.0 * scale.points - scale.points ** 2
    y_exact = bool(np.array_equal(np.asarray(result.y.values), exact))
    f_err = abs(result.F_value - 50.0 * math.log(10.0))
    ok = y_exact and f_err <= 1e-12
    report(3, "direct method, y = 10t - t^2 and F = 50 ln 10", ok,
           f"|F - 50 ln 10| = {f_err:.2e}")
    assert y_exact
    assert f_err <= 1e-12


# ---------------------------------------------------------------------------
# 04 fourth-order problem on the doubling grid


def test_criterion_04_fourth_order_doubling_grid():
    scale = timescale.geometric(2.0, 0, 8)  # 9 points
    pts = scale.points
    a, rho_b = pts[0], pts[-2]
    den = (a - rho_b) * (2.0 * a - rho_b) * (a - 2.0 * rho_b)
    exact = (a - pts) * (2.0 * a - pts) * (a - 2.0 * pts) / den
    sampled = GridFunction(scale, exact)
    ya = tuple(timescale.higher_delta_derivative(sampled, i).values[0]
               for i in range(2))
    yb = tuple(timescale.higher_delta_derivative(sampled, i).values[pts.size - 2]
               for i in range(2))
    L = varcalc.QuadraticLagrangian(np.diag([0.0, 0.0, 1.0]), np.zeros(3))
    problem = varcalc.HigherOrderProblem(scale, 2, L, ya, yb)
    cands = varcalc.solve_el(problem, SolverConfig(starts=4, seed=0))
    sup = float(np.max(np.abs(cands[0].y.values - exact)))
    ok = len(pts) >= 8 and sup <= 1e-8
    report(4, "4th-order extremal on q=2 grid", ok, f"sup error = {sup:.2e}")
    assert len(pts) >= 8
    assert sup <= 1e-8


# ---------------------------------------------------------------------------
# 05 fractional summation by parts


def test_criterion_05_summation_by_parts():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        h = float(rng.choice([1.0, 0.5, 0.1]))
        alpha = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
        n = int(rng.integers(3, 10))
        g = uniform(0.0, n * h, h)
        f = GridFunction(g.drop_last(1), rng.uniform(-2, 2, n))
        w = GridFunction(g, rng.uniform(-2, 2, n + 1))
        scale = max(1.0, float(np.max(np.abs(f.values))),
                    float(np.max(np.abs(w.values))))
        worst = max(worst, frac_sbp_residual(f, w, alpha) / scale)

    # alpha = 1 is Abel's classical summation by parts, written out directly
    g = uniform(0.0, 6.0, 1.0)
    fv = rng.uniform(-2, 2, 6)
    wv = rng.uniform(-2, 2, 7)
    lhs = sum(fv[j] * (wv[j + 1] - wv[j]) for j in range(6))
    rhs = fv[-1] * wv[-1] - fv[0] * wv[0] \
        - sum((fv[j] - fv[j - 1]) * wv[j] for j in range(1, 6))
    classical = abs(lhs - rhs)
    frac_a1 = frac_sbp_residual(GridFunction(g.drop_last(1), fv),
                                GridFunction(g, wv), 1.0)
    ok = worst <= 1e-10 and classical <= 1e-12 and frac_a1 <= 1e-12
    report(5, "fractional summation by parts", ok,
           f"worst scaled residual = {worst:.2e} over 100 draws")
    assert worst <= 1e-10
    assert classical <= 1e-12
    assert frac_a1 <= 1e-12


# ---------------------------------------------------------------------------
# 06 classical-order convergence to t(1-t)/2


def test_criterion_06_convergence_classical_order():
    hs = [0.5, 0.25, 0.125, 0.0625]
    errs = []
    for h in hs:
        problem = FracProblem(FracGrid(0.0, 1.0, h), FracOrders(1.0, 1.0),
                              dsl.parse("0.5*v^2 - u"), A=0.0, B=0.0)
        cands = solve_frac_el(problem, SolverConfig(starts=6, seed=0))
        pts = cands[0].y.scale.points
        errs.append(float(np.max(np.abs(cands[0].y.values
                                        - 0.5 * pts * (1.0 - pts)))))
    nonincreasing = all(errs[i + 1] <= errs[i] + 1e-12
                        for i in range(len(errs) - 1))
    ok = nonincreasing and errs[-1] <= 0.05
    report(6, "classical-order sup-error trend", ok,
           "errors " + ", ".join(f"{e:.1e}" for e in errs))
    assert nonincreasing
    assert errs[-1] <= 0.05


# ---------------------------------------------------------------------------
# 07 order-3/4 convergence toward the continuous extremal


def continuous_reference(t: float) -> float:
    if t <= 0.0:
        return 0.0
    return (2.0 / 3.0) * adaptive_simpson(
        lambda s: (1.0 - t + s ** (4.0 / 3.0)) ** (-0.25), 0.0, t ** 0.75)


def test_criterion_07_convergence_fractional_order():
    hs = [0.5, 0.125, 0.0625, 1.0 / 30.0]
    discs = []
    for h in hs:
        problem = FracProblem(FracGrid(0.0, 1.0, h), FracOrders(0.75, 0.75),
                              dsl.parse("0.5*v^2"), A=0.0, B=1.0)
        cands = solve_frac_el(problem, SolverConfig(starts=4, seed=0))
        y = cands[0].y
        pts = y.scale.points
        # h-weighted L2 distance: integral metric comparable across grids
        dev = [y.values[j] - continuous_reference(pts[j])
               for j in range(1, pts.size - 1)]
        discs.append(math.sqrt(h * sum(d * d for d in dev)))
    monotone = all(discs[i + 1] < discs[i] for i in range(len(discs) - 1))
    report(7, "order-3/4 discrepancy trend", monotone,
           "discrepancies " + ", ".join(f"{d:.2e}" for d in discs))
    assert monotone


# ---------------------------------------------------------------------------
# 08 first Sturm-Liouville eigenvalue on integer grids


def test_criterion_08_sturm_liouville_eigenvalues():
    worst_lam, worst_j = 0.0, 0.0
    for N in (5, 10, 20):
        scale = uniform(0.0, float(N), 1.0)
        lam, y1 = varcalc.sturm_liouville_first(scale, lambda t: 0.0)
        closed = 2.0 - 2.0 * math.cos(math.pi / N)
        worst_lam = max(worst_lam, abs(lam - closed))
        dy = np.diff(np.asarray(y1.values))
        worst_j = max(worst_j, abs(float(dy @ dy) - lam))
    ok = worst_lam <= 1e-10 and worst_j <= 1e-9
    report(8, "Sturm-Liouville lambda_1 = 2 - 2 cos(pi/N)", ok,
           f"max |lambda error| = {worst_lam:.1e}, max |J[y1]-lambda| = {worst_j:.1e}")
    assert worst_lam <= 1e-10
    assert worst_j <= 1e-9


# ---------------------------------------------------------------------------
# 09 inequality certification suites


def test_criterion_09_inequality_certification():
    results = {name: fn(1000, seed) for seed, (name, fn)
               in enumerate(_SUITES.items(), start=1)}
    all_hold = all(v == 1000 for v in results.values())

    grid = uniform(0.0, 5.0, 0.5)
    plain = inequalities.jensen_certify(grid, lambda x: x ** 4, lambda t: 2.0)
    weighted = inequalities.jensen_certify(grid, math.exp, lambda t: -1.5,
                                           weights=lambda t: 1.0 + t,
                                           alpha=0.3)
    equality = (abs(plain.lhs - plain.rhs) <= 1e-12
                and abs(weighted.lhs - weighted.rhs) <= 1e-12)

    ts1 = uniform(0.0, 3.0, 1.0)
    ts2 = uniform(0.0, 2.0, 1.0)
    table = {(0, 0): 0.25, (1, 0): 0.2, (2, 0): 1.0,
             (0, 1): 0.5, (1, 1): 0.0, (2, 1): 5.0}
    f = lambda t1, t2: table.get((int(round(t1)), int(round(t2))), 0.0)
    b1, b2 = inequalities.gronwall_2d_bound(ts1, ts2, lambda t1, t2: 1.0, f)
    rationals = (abs(b1[2, 1] - 3 / 2) <= 1e-12
                 and abs(b2[2, 1] - 29 / 20) <= 1e-12
                 and abs(b1[3, 2] - 147 / 10) <= 1e-12
                 and abs(b2[3, 2] - 637 / 40) <= 1e-12)

    ok = all_hold and equality and rationals
    held = ", ".join(f"{k} {v}/1000" for k, v in results.items())
    report(9, "inequality certification", ok, held)
    assert all_hold, results
    assert equality
    assert rationals


# ---------------------------------------------------------------------------
# 10 the claimed supremum is exceeded by an explicit curve


def test_criterion_10_counterexample_regression():
    along_curve = 2.0 * math.log(2.0) - 1.0
    claimed = -math.log(math.log(2.0))
    ok = (along_curve > claimed
          and round(along_curve, 4) == 0.3863
          and round(claimed, 4) == 0.3665)
    report(10, "2 ln 2 - 1 > -ln(ln 2)", ok,
           f"{along_curve:.4f} > {claimed:.4f}")
    assert round(along_curve, 4) == 0.3863
    assert round(claimed, 4) == 0.3665
    assert along_curve > claimed


# ---------------------------------------------------------------------------
# 11 vanishing-order limit of the fractional sums


def test_criterion_11_small_order_limits():
    rng = np.random.default_rng(99)
    nu = 1e-6
    worst = 0.0
    for h in (0.5, 0.25):
        g = uniform(0.0, 3.0, h)
        f = GridFunction(g, rng.uniform(-2.0, 2.0, len(g)))
        for j, t in enumerate(g.points):
            worst = max(worst,
                        abs(left_frac_sum(f, nu, t + nu * h) - f.values[j]),
                        abs(right_frac_sum(f, nu, t - nu * h) - f.values[j]))
    ok = worst <= 1e-4
    report(11, "order -> 0 limit of both fractional sums", ok,
           f"max deviation = {worst:.2e}")
    assert worst <= 1e-4
