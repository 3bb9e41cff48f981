"""Discrete fractional calculus on uniform grids and the fractional
variational solver.

Operators follow the usual discrete fractional conventions on hZ: the left
fractional h-sum of order nu lives on the grid shifted by +nu*h, the right one
on the grid shifted by -nu*h, and the order-alpha differences (0 < alpha <= 1)
are forward h-differences of the order-(1-alpha) sums, the right one carrying
a minus sign.  On the grid everything reduces to lower-triangular weight
tables

    w_nu(m) = Gamma(m + nu) / (Gamma(m + 1) Gamma(nu)),  w_nu(0) = 1,

so functions here are assembled from cached weight vectors; the public sum
operators evaluate the textbook kernel (t - sigma(s))_h^(nu-1) through
h_factorial, and the two routes are cross-checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .dsl import Expr, ensure_expr, eval_grad, eval_jet2
from .errors import InvalidAlpha, OffDomain, OrderNotPositive
from .solvers import SolverConfig, multi_start
from .special import gamma_fn, h_factorial
from .timescale import GridFunction, TimeScale, uniform
from .varcalc import ExtremalCandidate, LegendreReport

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class FracGrid:
    """Uniform grid {a, a+h, ..., b} used by the fractional operators."""

    a: float
    b: float
    h: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("step h must be positive")
        steps = (self.b - self.a) / self.h
        k = round(steps)
        if k < 2 or abs(steps - k) > 1e-9 * max(1.0, abs(steps)):
            raise ValueError(f"(b-a)/h = {steps} must be an integer >= 2")

    @property
    def n_steps(self) -> int:
        return round((self.b - self.a) / self.h)

    def scale(self) -> TimeScale:
        return uniform(self.a, self.b, self.h)

    def points(self) -> np.ndarray:
        return self.scale().points


@dataclass(frozen=True)
class FracOrders:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidAlpha(f"alpha = {self.alpha} must be in (0, 1]")
        if not (0.0 < self.beta <= 1.0):
            raise InvalidAlpha(f"beta = {self.beta} must be in (0, 1]")

    @property
    def gamma(self) -> float:
        return 1.0 - self.alpha

    @property
    def nu_order(self) -> float:
        return 1.0 - self.beta


@dataclass(frozen=True)
class FracProblem:
    """Minimize sum of h*L(t, y^sigma, left-diff y, right-diff y) over [a, b).

    A or B set to None leaves that endpoint free; the corresponding natural
    boundary condition then joins the stationarity system.
    """

    grid: FracGrid
    orders: FracOrders
    L: Union[Expr, str]
    A: Optional[float] = None
    B: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "L", ensure_expr(self.L))


# ---------------------------------------------------------------------------
# Weight / kernel tables


@lru_cache(maxsize=None)
def _weights(nu: float, count: int) -> np.ndarray:
    w = np.empty(count)
    w[0] = 1.0
    for m in range(1, count):
        w[m] = w[m - 1] * (m - 1 + nu) / m
    w.flags.writeable = False
    return w


@lru_cache(maxsize=None)
def _kernel_table(nu: float, h: float, count: int) -> np.ndarray:
    """((m - 1 + nu) h)_h^{(nu - 1)} for m = 0..count-1."""
    k = np.array([h_factorial((m - 1.0 + nu) * h, nu - 1.0, h) for m in range(count)])
    k.flags.writeable = False
    return k


def _uniform_step(f: GridFunction) -> float:
    step = f.scale.step
    if step is None:
        raise ValueError("fractional operators are defined on uniform grids only")
    return step


# ---------------------------------------------------------------------------
# Fractional sums (public, kernel form) and differences


def left_frac_sum(f: GridFunction, nu: float, t: float) -> float:
    """Left fractional h-sum of order nu at t, with t on the +nu*h shifted grid."""
    if nu <= 0:
        raise OrderNotPositive(f"order nu = {nu} must be positive")
    h = _uniform_step(f)
    pts = f.scale.points
    pos = (t - pts[0] - nu * h) / h
    j = round(pos)
    if abs(pos - j) > 1e-9 * max(1.0, abs(pos)) or not (0 <= j < pts.size):
        raise OffDomain(f"t = {t} is not on the shifted grid a + nu*h + k*h")
    kern = _kernel_table(nu, h, pts.size)
    vals = np.asarray(f.values)
    acc = 0.0
    for i in range(j + 1):
        acc += kern[j - i] * vals[i]
    return acc * h / gamma_fn(nu)


def right_frac_sum(f: GridFunction, nu: float, t: float) -> float:
    """Right fractional h-sum of order nu at t, with t on the -nu*h shifted grid."""
    if nu <= 0:
        raise OrderNotPositive(f"order nu = {nu} must be positive")
    h = _uniform_step(f)
    pts = f.scale.points
    pos = (t - pts[0] + nu * h) / h
    j = round(pos)
    if abs(pos - j) > 1e-9 * max(1.0, abs(pos)) or not (0 <= j < pts.size):
        raise OffDomain(f"t = {t} is not on the shifted grid s - nu*h for s on the grid")
    kern = _kernel_table(nu, h, pts.size)
    vals = np.asarray(f.values)
    acc = 0.0
    for m in range(pts.size - j):
        acc += kern[m] * vals[j + m]
    return acc * h / gamma_fn(nu)


def _left_sum_series(vals: np.ndarray, nu: float, h: float) -> np.ndarray:
    """Y[j] = left sum of order nu evaluated at t_j + nu*h, for every j."""
    n = vals.size
    w = _weights(nu, n)
    return math.pow(h, nu) * np.convolve(w, vals)[:n]


def _right_sum_series(vals: np.ndarray, nu: float, h: float) -> np.ndarray:
    """V[j] = right sum of order nu evaluated at t_j - nu*h, for every j."""
    n = vals.size
    w = _weights(nu, n)
    return math.pow(h, nu) * np.convolve(w, vals[::-1])[:n][::-1]


def _left_diff_values(vals: np.ndarray, alpha: float, h: float) -> np.ndarray:
    gamma = 1.0 - alpha
    if gamma == 0.0:
        return np.diff(vals) / h
    return np.diff(_left_sum_series(vals, gamma, h)) / h


def _right_diff_values(vals: np.ndarray, alpha: float, h: float) -> np.ndarray:
    gamma = 1.0 - alpha
    if gamma == 0.0:
        return -np.diff(vals) / h
    return -np.diff(_right_sum_series(vals, gamma, h)) / h


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise InvalidAlpha(f"alpha = {alpha} must be in (0, 1]")


def left_frac_diff(f: GridFunction, alpha: float) -> GridFunction:
    """Order-alpha left fractional difference on T^kappa."""
    _check_alpha(alpha)
    h = _uniform_step(f)
    vals = np.asarray(f.values, dtype=float)
    return GridFunction(f.scale.drop_last(1), _left_diff_values(vals, alpha, h))


def right_frac_diff(f: GridFunction, alpha: float) -> GridFunction:
    """Order-alpha right fractional difference (base point max of the grid) on T^kappa."""
    _check_alpha(alpha)
    h = _uniform_step(f)
    vals = np.asarray(f.values, dtype=float)
    return GridFunction(f.scale.drop_last(1), _right_diff_values(vals, alpha, h))


# ---------------------------------------------------------------------------
# Summation by parts


def frac_sbp_residual(f: GridFunction, g: GridFunction, alpha: float) -> float:
    """|LHS - RHS| of the fractional summation-by-parts identity.

    f lives on T^kappa (one point short of g's grid); the right difference of
    f inside the identity is based at rho(b), i.e. taken on f's own grid.
    """
    _check_alpha(alpha)
    gamma = 1.0 - alpha
    h = _uniform_step(g)
    gp = g.scale.points
    fp = f.scale.points
    if fp.size != gp.size - 1 or abs(fp[0] - gp[0]) > 1e-12 * max(1.0, abs(gp[0])):
        raise ValueError("f must live on g's grid with the last point dropped")
    fv = np.asarray(f.values, dtype=float)
    gv = np.asarray(g.values, dtype=float)
    n = gp.size

    lfd_g = _left_diff_values(gv, alpha, h)          # on T^kappa
    lhs = h * float(fv @ lfd_g)

    rfd_f = _right_diff_values(fv, alpha, h)         # on (T^kappa)^kappa
    rhs = math.pow(h, gamma) * (fv[-1] * gv[-1] - fv[0] * gv[0])
    rhs += h * float(rfd_f @ gv[1:n - 1])
    if gamma != 0.0:
        # gamma-correction: kernels (t_j + gamma h - a) and (t_j + gamma h - sigma(a))
        corr1 = sum(
            h_factorial((j + gamma) * h, gamma - 1.0, h) * fv[j] for j in range(n - 1))
        corr2 = sum(
            h_factorial((j - 1 + gamma) * h, gamma - 1.0, h) * fv[j] for j in range(1, n - 1))
        rhs += (gamma / gamma_fn(gamma + 1.0)) * gv[0] * h * (corr1 - corr2)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Euler-Lagrange machinery


def _arg_arrays(pts: np.ndarray, h: float, alpha: float, beta: float,
                yvals: np.ndarray):
    """(t, u, v, w) rows of [y] on T^kappa."""
    u = yvals[1:]
    v = _left_diff_values(yvals, alpha, h)
    w = _right_diff_values(yvals, beta, h)
    return pts[:-1], u, v, w


def _el_core(L: Expr, pts: np.ndarray, h: float, alpha: float, beta: float,
             yvals: np.ndarray) -> np.ndarray:
    t, u, v, w = _arg_arrays(pts, h, alpha, beta, yvals)
    m = t.size
    Lu = np.empty(m)
    Lv = np.empty(m)
    Lw = np.empty(m)
    for j in range(m):
        _, du, dv, dw = eval_grad(L, t[j], u[j], v[j], w[j])
        Lu[j] = du
        Lv[j] = dv
        Lw[j] = dw
    res = Lu[:-1] + _right_diff_values(Lv, alpha, h) + _left_diff_values(Lw, beta, h)
    return res


def el_residual_frac(p: FracProblem, y: GridFunction) -> GridFunction:
    """L_u + (right diff base rho(b)) L_v + (left diff order beta) L_w on T^{kappa kappa}."""
    pts = p.grid.points()
    res = _el_core(p.L, pts, p.grid.h, p.orders.alpha, p.orders.beta,
                   np.asarray(y.values, dtype=float))
    return GridFunction(y.scale.drop_last(2), res)


def functional_value(p: FracProblem, y: GridFunction) -> float:
    """Sum of h * L([y](t)) over [a, b)."""
    pts = p.grid.points()
    h = p.grid.h
    t, u, v, w = _arg_arrays(pts, h, p.orders.alpha, p.orders.beta,
                             np.asarray(y.values, dtype=float))
    total = 0.0
    for j in range(t.size):
        total += eval_grad(p.L, t[j], u[j], v[j], w[j])[0]
    return h * total


def natural_bc_residuals(p: FracProblem, y: GridFunction):
    """(left, right) residuals of the natural boundary conditions; None when fixed."""
    if p.A is not None and p.B is not None:
        return (None, None)
    pts = p.grid.points()
    h = p.grid.h
    gamma = p.orders.gamma
    nu = p.orders.nu_order
    t, u, v, w = _arg_arrays(pts, h, p.orders.alpha, p.orders.beta,
                             np.asarray(y.values, dtype=float))
    m = t.size  # = n points - 1
    Lu = np.empty(m)
    Lv = np.empty(m)
    Lw = np.empty(m)
    for j in range(m):
        _, du, dv, dw = eval_grad(p.L, t[j], u[j], v[j], w[j])
        Lu[j], Lv[j], Lw[j] = du, dv, dw

    left = None
    if p.A is None:
        left = -math.pow(h, gamma) * Lv[0] + Lw[0]
        if gamma != 0.0:
            c1 = sum(h_factorial((j + gamma) * h, gamma - 1.0, h) * Lv[j]
                     for j in range(m))
            c2 = sum(h_factorial((j - 1 + gamma) * h, gamma - 1.0, h) * Lv[j]
                     for j in range(1, m))
            left += (gamma / gamma_fn(gamma + 1.0)) * h * (c1 - c2)

    right = None
    if p.B is None:
        right = (h * Lu[m - 1] + math.pow(h, gamma) * Lv[m - 1]
                 - math.pow(h, nu) * Lw[m - 1])
        if nu != 0.0:
            # kernels (b + nu h - sigma(t_j)) and (rho(b) + nu h - sigma(t_j))
            c1 = sum(h_factorial((m - 1 - j + nu) * h, nu - 1.0, h) * Lw[j]
                     for j in range(m))
            c2 = sum(h_factorial((m - 2 - j + nu) * h, nu - 1.0, h) * Lw[j]
                     for j in range(m - 1))
            right += (nu / gamma_fn(nu + 1.0)) * h * (c1 - c2)
    return (left, right)


def legendre_frac_check(p: FracProblem, y: GridFunction) -> LegendreReport:
    """Second-order (Legendre) margins on T^{kappa kappa}; verdict >= -1e-8."""
    pts = p.grid.points()
    h = p.grid.h
    gamma = p.orders.gamma
    nu = p.orders.nu_order
    t, u, v, w = _arg_arrays(pts, h, p.orders.alpha, p.orders.beta,
                             np.asarray(y.values, dtype=float))
    m = t.size
    jets = [eval_jet2(p.L, t[j], u[j], v[j], w[j]) for j in range(m)]
    Huu = np.array([j.hess[0] for j in jets])
    Huv = np.array([j.hess[1] for j in jets])
    Huw = np.array([j.hess[2] for j in jets])
    Hvv = np.array([j.hess[3] for j in jets])
    Hvw = np.array([j.hess[4] for j in jets])
    Hww = np.array([j.hess[5] for j in jets])

    if nu != 0.0:
        cw = nu * (1.0 - nu) / gamma_fn(nu + 1.0)
        kern_w = np.array([h_factorial((d + nu) * h, nu - 2.0, h)
                           for d in range(m)])  # d = (t_j - sigma(t_i))/h
    if gamma != 0.0:
        cv = gamma * (gamma - 1.0) / gamma_fn(gamma + 1.0)
        kern_v = np.array([h_factorial((d + gamma) * h, gamma - 2.0, h)
                           for d in range(m)])  # d = (t_i - sigma(sigma(t_j)))/h

    margins = np.empty(m - 1)
    for j in range(m - 1):
        val = (h * h * Huu[j]
               + 2.0 * math.pow(h, gamma + 1.0) * Huv[j]
               + 2.0 * math.pow(h, nu + 1.0) * (nu - 1.0) * Huw[j]
               + math.pow(h, 2.0 * gamma) * (gamma - 1.0) ** 2 * Hvv[j + 1]
               + 2.0 * math.pow(h, nu + gamma) * (gamma - 1.0) * Hvw[j + 1]
               + 2.0 * math.pow(h, nu + gamma) * (nu - 1.0) * Hvw[j]
               + math.pow(h, 2.0 * nu) * (nu - 1.0) ** 2 * Hww[j]
               + math.pow(h, 2.0 * nu) * Hww[j + 1]
               + math.pow(h, gamma) * Hvv[j])
        if nu != 0.0:
            acc = 0.0
            for i in range(j):
                acc += Hww[i] * (cw * kern_w[j - i - 1]) ** 2
            val += h**4 * acc  # integral carries one extra h
        if gamma != 0.0:
            acc = 0.0
            for i in range(j + 2, m):
                acc += Hvv[i] * (cv * kern_v[i - j - 2]) ** 2
            val += h**4 * acc
        margins[j] = val
    ok = bool(np.all(margins >= -1e-8))
    return LegendreReport(GridFunction(y.scale.drop_last(2), margins), ok)


# ---------------------------------------------------------------------------
# Solver


def solve_frac_el(p: FracProblem, config: Optional[SolverConfig] = None) -> list:
    """Multi-start Newton on the stationarity system of the fractional problem.

    Unknowns are the interior values plus any free endpoint; free endpoints
    contribute their natural-boundary-condition rows.  Candidates come back
    deduplicated, annotated with Legendre verdicts, sorted by functional value.
    """
    cfg = config or SolverConfig()
    scale = p.grid.scale()
    pts = scale.points
    h = p.grid.h
    N = pts.size
    alpha, beta = p.orders.alpha, p.orders.beta
    free_left = p.A is None
    free_right = p.B is None
    n_unknowns = (N - 2) + int(free_left) + int(free_right)

    def assemble(x):
        full = np.empty(N)
        k = 0
        if free_left:
            full[0] = x[0]
            k = 1
        else:
            full[0] = p.A
        full[1:N - 1] = x[k:k + N - 2]
        full[N - 1] = x[-1] if free_right else p.B
        return full

    def residual_map(x):
        full = assemble(x)
        rows = [_el_core(p.L, pts, h, alpha, beta, full)]
        if free_left or free_right:
            yf = GridFunction(scale, full)
            left, right = natural_bc_residuals(p, yf)
            if free_left:
                rows.append([left])
            if free_right:
                rows.append([right])
        return np.concatenate(rows)

    sols = multi_start(residual_map, n_unknowns, cfg)
    out = []
    for x in sols:
        full = assemble(x)
        y = GridFunction(scale, full)
        res = residual_map(x)
        report = legendre_frac_check(p, y)
        out.append(ExtremalCandidate(
            y=y,
            residual_norm=float(np.linalg.norm(res)),
            legendre_ok=report.ok,
            margins=report.margins,
            functional_value=functional_value(p, y),
        ))
    out.sort(key=lambda c: c.functional_value)
    return out
