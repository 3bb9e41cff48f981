"""Shared numerical routines: damped Newton, multi-start roots, quadrature.

The eigenvalue routine is a plain cyclic Jacobi sweep; tests cross-check it
against numpy's eigh but the library itself only relies on this one.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    NoConvergence,
    NonFinite,
    QuadratureFailure,
    RootNotBracketed,
    SingularJacobian,
)

_SQRT_EPS = math.sqrt(np.finfo(float).eps)


@dataclass
class SolverConfig:
    starts: int = 64
    seed: int = 0
    box: tuple = (-2.0, 3.0)
    tol: float = 1e-9
    dedup_tol: float = 1e-6
    max_iter: int = 200
    max_halvings: int = 30


def _forward_jacobian(fn, x, r0):
    n = x.size
    m = r0.size
    J = np.empty((m, n))
    for i in range(n):
        h = _SQRT_EPS * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        J[:, i] = (fn(xp) - r0) / h
    return J


def newton_solve(
    fn: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    tol: float = 1e-9,
    max_iter: int = 200,
    max_halvings: int = 30,
) -> np.ndarray:
    """Damped Newton iteration on a square (or rectangular) residual system.

    Steps are backtracked (halving, up to ``max_halvings``) until the
    2-norm of the residual decreases.  Raises NoConvergence if the iteration
    stalls or exceeds ``max_iter``, SingularJacobian if a linear solve fails.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = np.asarray(fn(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise NonFinite("residual is not finite at the initial point")
    rnorm = np.linalg.norm(r)
    for _ in range(max_iter):
        if rnorm <= tol:
            return x
        J = _forward_jacobian(fn, x, r)
        if not np.all(np.isfinite(J)):
            raise NonFinite("Jacobian is not finite")
        try:
            if J.shape[0] == J.shape[1]:
                step = np.linalg.solve(J, -r)
            else:
                step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        except np.linalg.LinAlgError:
            step = None
        if step is None or not np.all(np.isfinite(step)):
            # exactly singular (e.g. a variable the residual ignores): take the
            # minimum-norm Gauss-Newton step with a whisper of Tikhonov damping
            tau = 1e-12 * max(1.0, float(np.sum(J * J)))
            try:
                step = np.linalg.solve(J.T @ J + tau * np.eye(J.shape[1]), -J.T @ r)
            except np.linalg.LinAlgError as exc:
                raise SingularJacobian(str(exc)) from exc
            if not np.all(np.isfinite(step)):
                raise SingularJacobian("linear solve produced non-finite step")
        lam = 1.0
        accepted = False
        for _ in range(max_halvings):
            x_try = x + lam * step
            try:
                r_try = np.asarray(fn(x_try), dtype=float)
            except (ArithmeticError, ValueError):
                r_try = None
            if r_try is not None and np.all(np.isfinite(r_try)):
                rnorm_try = np.linalg.norm(r_try)
                if rnorm_try < rnorm or rnorm_try <= tol:
                    x, r, rnorm = x_try, r_try, rnorm_try
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            raise NoConvergence(f"line search stalled at residual norm {rnorm:.3e}")
    if rnorm <= tol:
        return x
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {rnorm:.3e})")


def thread_count() -> int:
    raw = os.environ.get("TSVAR_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def multi_start(
    fn: Callable[[np.ndarray], np.ndarray],
    n_unknowns: int,
    config: Optional[SolverConfig] = None,
) -> list:
    """Run Newton from seeded random starts; return deduplicated solutions.

    Results keep start order (first found wins a dedup tie) so output is
    deterministic for a fixed seed.  Raises SingularJacobian if every start
    failed and at least one hit a singular Jacobian, NoConvergence if every
    start simply failed to converge.
    """
    cfg = config or SolverConfig()
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.box
    starts = rng.uniform(lo, hi, size=(cfg.starts, n_unknowns))

    def attempt(x0):
        try:
            return newton_solve(fn, x0, tol=cfg.tol, max_iter=cfg.max_iter,
                                max_halvings=cfg.max_halvings)
        except SingularJacobian:
            return "singular"
        except (NoConvergence, NonFinite):
            return None
        except (ArithmeticError, ValueError):
            return None

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, starts))
    else:
        outcomes = [attempt(x0) for x0 in starts]

    solutions = []
    saw_singular = False
    for out in outcomes:
        if out is None:
            continue
        if isinstance(out, str):
            saw_singular = True
            continue
        if any(np.max(np.abs(out - s)) < cfg.dedup_tol for s in solutions):
            continue
        solutions.append(out)
    if not solutions:
        if saw_singular:
            raise SingularJacobian("all starts failed; at least one Jacobian was singular")
        raise NoConvergence("no start converged")
    return solutions


# ---------------------------------------------------------------------------
# Quadrature and inversion (used by the continuous reference solutions)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 50) -> float:
    """Adaptive Simpson integration of a smooth scalar function."""
    if a == b:
        return 0.0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def rec(x0, x2, f0, f1, f2, whole, eps, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = f(xl)
        fr = f(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps or (x2 - x0) < 1e-14:
            return left + right + delta / 15.0
        if depth <= 0:
            raise QuadratureFailure(f"adaptive Simpson recursion exhausted on [{x0}, {x2}]")
        return (rec(x0, xm, f0, fl, f1, left, eps / 2.0, depth - 1)
                + rec(xm, x2, f1, fr, f2, right, eps / 2.0, depth - 1))

    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return sign * rec(a, b, fa, fm, fb, whole, tol, max_depth)


def invert_increasing(G: Callable[[float], float], target: float,
                      lo: float = 0.0, tol: float = 1e-13) -> float:
    """Solve G(x) = target for increasing G on [lo, inf)."""
    g_lo = G(lo)
    if g_lo > target + 1e-15:
        raise RootNotBracketed(f"G({lo}) = {g_lo} already exceeds target {target}")
    if abs(g_lo - target) <= tol * max(1.0, abs(target)):
        return lo
    span = 1.0
    hi = lo + span
    for _ in range(200):
        if G(hi) >= target:
            break
        span *= 2.0
        hi = lo + span
    else:
        raise RootNotBracketed(f"could not bracket target {target} for inversion")
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if G(mid) < target:
            a = mid
        else:
            b = mid
        if b - a <= tol * max(1.0, abs(b)):
            break
    return 0.5 * (a + b)


def jacobi_eigh(A: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns (eigenvalues ascending, eigenvector columns in matching order).
    """
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 1:
        return np.array([A[0, 0]]), np.array([[1.0]])
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, np.sum(A**2) - np.sum(np.diag(A) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
                A[p, q] = A[q, p] = 0.0
                rot_p = c * V[:, p] - s * V[:, q]
                rot_q = s * V[:, p] + c * V[:, q]
                V[:, p], V[:, q] = rot_p, rot_q
    evals = np.diag(A).copy()
    order = np.argsort(evals)
    return evals[order], V[:, order]
