"""Independent reference solvers and optimality verifiers.

Nothing here shares code with the ADMM path beyond the problem data: the
reference beam solver is accelerated projected gradient, Dykstra's method
provides a second, multiplier-free route to the feasible-set projection,
and the single-constraint QCQP solver follows the multiplier case analysis
with a safeguarded Newton iteration.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .mm import LinearizedEhConstraint
from .numeric import HermitianFactor

__all__ = [
    "KktReport",
    "OracleError",
    "solve_qcqp_1c",
    "qcqp_path",
    "dykstra_project",
    "project_feasible",
    "solve_inner_reference",
    "verify_kkt_f_update",
    "verify_kkt_w_update",
]


class OracleError(RuntimeError):
    pass


@dataclass
class KktReport:
    stationarity_residual: float
    primal_violation: float
    complementarity_residual: float
    multiplier: float

    @property
    def max_residual(self) -> float:
        return max(self.stationarity_residual, self.primal_violation,
                   self.complementarity_residual)


def _cq(M, x):
    return float(np.real(np.vdot(x, M @ x)))


def _constraint(Dbar, dbar, dbar0, x):
    return _cq(Dbar, x) - 2.0 * float(np.real(np.vdot(dbar, x))) + dbar0


def qcqp_path(D, d, Dbar, dbar, s):
    """x(s) = (s*Dbar + D)^{-1} (s*dbar + d)."""
    return HermitianFactor(s * Dbar + D).solve(s * dbar + d)


def _qcqp_kkt(D, d, Dbar, dbar, dbar0, x, s):
    grad = D @ x - d + s * (Dbar @ x - dbar)
    scale = max(1.0, np.linalg.norm(d), np.linalg.norm(D @ x), s * np.linalg.norm(dbar))
    g = _constraint(Dbar, dbar, dbar0, x)
    gscale = max(1.0, abs(dbar0))
    return KktReport(
        stationarity_residual=float(np.linalg.norm(grad) / scale),
        primal_violation=max(0.0, g) / gscale,
        complementarity_residual=abs(s * g) / gscale,
        multiplier=float(s),
    )


def solve_qcqp_1c(D, d, d0, Dbar, dbar, dbar0, tol: float = 1e-12, max_iter: int = 200):
    """Minimize x^H D x - 2Re{d^H x} + d0 s.t. x^H Dbar x - 2Re{dbar^H x} + dbar0 <= 0.

    ``D`` must be positive definite and ``Dbar`` positive semidefinite.
    Returns ``(x, KktReport)``. The multiplier is found by Newton's method on
    the constraint value along x(s), which decreases monotonically in ``s``;
    a step leaving the current bracket falls back to bisection.
    """
    D = np.asarray(D, complex)
    Dbar = np.asarray(Dbar, complex)
    d = np.asarray(d, complex)
    dbar = np.asarray(dbar, complex)
    x = HermitianFactor(D).solve(d)
    if _constraint(Dbar, dbar, dbar0, x) <= 0:
        return x, _qcqp_kkt(D, d, Dbar, dbar, dbar0, x, 0.0)

    def phi(s):
        M = HermitianFactor(s * Dbar + D)
        xs = M.solve(s * dbar + d)
        r = Dbar @ xs - dbar
        # d/ds of the constraint along the path: -2 r^H (sDbar + D)^{-1} r
        dphi = -2.0 * float(np.real(np.vdot(r, M.solve(r))))
        return _constraint(Dbar, dbar, dbar0, xs), dphi, xs

    lo, hi = 0.0, 1.0
    v_hi, _, _ = phi(hi)
    while v_hi > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e200:
            raise OracleError("constraint has no positive root: feasible set is empty")
        v_hi, _, _ = phi(hi)

    s = hi
    gscale = max(1.0, abs(dbar0))
    for _ in range(max_iter):
        v, dv, xs = phi(s)
        if abs(v) <= tol * gscale:
            break
        if v > 0:
            lo = s
        else:
            hi = s
        s_new = s - v / dv if dv < 0 else np.nan
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * hi:
            break
        s = s_new
    else:
        v, dv, xs = phi(s)
    if v > tol * gscale:
        # land on the feasible side of the bracket
        s = hi
        v, dv, xs = phi(s)
    return xs, _qcqp_kkt(D, d, Dbar, dbar, dbar0, xs, s)


def _proj_balls(Y, p_t):
    norms = np.sqrt(np.sum(np.abs(Y) ** 2, axis=0))
    r = np.sqrt(p_t)
    over = norms > r
    out = Y.copy()
    out[:, over] *= r / norms[over]
    return out


def _proj_halfspace(Y, b4, t, b4_sq):
    v = float(np.real(np.vdot(b4, Y)))
    if v >= t or b4_sq == 0:
        return Y
    return Y + ((t - v) / b4_sq) * b4


def dykstra_project(Y, p_t, lin: LinearizedEhConstraint | None, tol: float = 1e-13,
                    max_iter: int = 100_000):
    """Projection onto (per-antenna balls) cap (EH halfspace) by Dykstra's method."""
    if lin is None:
        return _proj_balls(Y, p_t)
    b4 = lin.b4
    t = lin.threshold
    b4_sq = float(np.real(np.vdot(b4, b4)))
    x = _proj_balls(Y, p_t)
    if float(np.real(np.vdot(b4, x))) >= t:
        return x
    x = Y.copy()
    p = np.zeros_like(Y)
    q = np.zeros_like(Y)
    scale = max(1.0, np.linalg.norm(Y))
    for _ in range(max_iter):
        u = _proj_balls(x + p, p_t)
        p = x + p - u
        x_new = _proj_halfspace(u + q, b4, t, b4_sq)
        q = u + q - x_new
        change = np.linalg.norm(x_new - x)
        x = x_new
        if change <= tol * scale:
            ball_gap = np.max(np.sum(np.abs(x) ** 2, axis=0)) - p_t
            if ball_gap <= 1e-12 * p_t:
                return x
    raise OracleError("Dykstra projection did not converge; the constraint sets may not intersect")


def project_feasible(Y, p_t, lin: LinearizedEhConstraint | None, max_iter: int = 200):
    """Exact projection onto (per-antenna balls) cap (EH halfspace).

    The projection is the ball projection of ``Y + lam * b4`` for the
    multiplier ``lam >= 0`` that puts it on the hyperplane; ``lam`` is found
    by Illinois regula falsi on the monotone hyperplane value, always
    returning the feasible end of the bracket.
    """
    x = _proj_balls(Y, p_t)
    if lin is None:
        return x
    b4 = lin.b4
    t = lin.threshold

    def h(lam):
        return float(np.real(np.vdot(b4, _proj_balls(Y + lam * b4, p_t)))) - t

    if h(0.0) >= 0:
        return x
    if np.sqrt(p_t) * np.sum(np.linalg.norm(b4, axis=0)) < t:
        raise OracleError("per-antenna balls do not meet the EH halfspace")
    lo, hi = 0.0, 1.0
    h_lo, h_hi = h(lo), h(hi)
    while h_hi < 0:
        lo, h_lo = hi, h_hi
        hi *= 2.0
        h_hi = h(hi)
    side = 0
    for _ in range(max_iter):
        if hi - lo <= 1e-15 * hi:
            break
        m = hi - h_hi * (hi - lo) / (h_hi - h_lo)
        if not lo < m < hi:
            m = 0.5 * (lo + hi)
        h_m = h(m)
        if h_m >= 0:
            hi, h_hi = m, h_m
            if side == 1:
                h_lo *= 0.5
            side = 1
        else:
            lo, h_lo = m, h_m
            if side == -1:
                h_hi *= 0.5
            side = -1
    return _proj_balls(Y + hi * b4, p_t)


def solve_inner_reference(state, lin: LinearizedEhConstraint | None, p_t: float,
                       x0: np.ndarray | None = None, tol: float = 1e-9,
                       max_iter: int = 100_000, obj_target: float | None = None,
                       method: str = "apg", time_limit: float | None = None):
    """Reference solution of the beam subproblem.

    ``method="apg"``: gradient steps of length 1/L projected exactly onto
    the feasible set (``project_feasible``) with Nesterov momentum, reset
    whenever the objective would increase.
    ``method="pg"``: plain projected gradient with Dykstra projections and
    an exact line search along each projected direction. Slower; kept as
    the textbook baseline for runtime comparisons.

    Both stop when the gradient mapping norm drops below ``tol`` (relative
    to the linear-term scale), when the objective reaches ``obj_target`` or
    after ``time_limit`` seconds, whichever comes first. Returns ``(x, objective, iterations)`` with ``x`` a
    (K+G, N) matrix.
    """
    if method not in ("apg", "pg"):
        raise ValueError(f"unknown method {method!r}")
    deadline = math.inf if time_limit is None else time.perf_counter() + time_limit
    k, g, n = state.k, state.g, state.n
    A = state.a_block
    B3 = state.b3
    lam_max = float(np.linalg.eigvalsh(A)[-1]) if n else 0.0
    step = 1.0 / lam_max if lam_max > 0 else 1.0
    X = np.zeros((k + g, n), complex) if x0 is None else np.asarray(x0, complex).reshape(k + g, n)
    if method == "pg":
        return _solve_pg(state, lin, p_t, X, step, tol, max_iter, obj_target, deadline)
    X = project_feasible(X, p_t, lin)
    f_x = state.objective(X)
    Y = X
    t_k = 1.0
    gscale = max(1.0, np.linalg.norm(B3))
    it = 0
    for it in range(1, max_iter + 1):
        Z = project_feasible(Y - step * (Y @ A.T - B3), p_t, lin)
        f_z = state.objective(Z)
        if f_z > f_x:
            if t_k == 1.0:
                # a plain projected step failed to descend: rounding floor
                break
            Y, t_k = X, 1.0
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        Y = Z + ((t_k - 1.0) / t_next) * (Z - X)
        gm = np.linalg.norm(Z - X) / step
        X, f_x, t_k = Z, f_z, t_next
        if gm <= tol * gscale:
            break
        if obj_target is not None and f_x <= obj_target:
            break
        if time.perf_counter() > deadline:
            break
    return X, f_x, it


def _solve_pg(state, lin, p_t, X, step, tol, max_iter, obj_target, deadline=math.inf):
    A = state.a_block
    B3 = state.b3
    X = dykstra_project(X, p_t, lin)
    gscale = max(1.0, np.linalg.norm(B3))
    it = 0
    for it in range(1, max_iter + 1):
        G = X @ A.T - B3
        Z = dykstra_project(X - step * G, p_t, lin)
        Dir = Z - X
        if np.linalg.norm(Dir) / step <= tol * gscale:
            X = Z
            break
        slope = float(np.real(np.vdot(G, Dir)))
        curv = float(np.real(np.sum(Dir.conj() * (Dir @ A.T))))
        s = 1.0 if curv <= 0 else min(1.0, max(0.0, -slope / curv))
        if s == 0.0 or slope >= 0:
            # no descent left at working precision
            break
        X = X + s * Dir
        if obj_target is not None and state.objective(X) <= obj_target:
            break
        if time.perf_counter() > deadline:
            break
    return X, state.objective(X), it


def verify_kkt_f_update(x, bbar, bbar3, lin: LinearizedEhConstraint, active_tol: float = 1e-9):
    """KKT residuals of the f-subproblem at ``x``.

    The multiplier is recovered by least squares from stationarity,
    ``Bbar x - bbar3 = kappa b4``, or set to zero when the constraint is
    strictly inactive. Residuals are relative to the natural scale of each
    condition.
    """
    X = np.asarray(x, complex).reshape(lin.b4.shape)
    r0 = X @ np.asarray(bbar).T - bbar3
    b4 = lin.b4
    b4_sq = float(np.real(np.vdot(b4, b4)))
    g = lin.value(X)
    gscale = max(1.0, abs(lin.c3))
    if g < -active_tol * gscale or b4_sq == 0:
        kappa = 0.0
    else:
        kappa = float(np.real(np.vdot(b4, r0))) / b4_sq
    r = r0 - max(kappa, 0.0) * b4
    scale = max(1.0, np.linalg.norm(bbar3), np.linalg.norm(X @ np.asarray(bbar).T))
    return KktReport(
        stationarity_residual=float(np.linalg.norm(r) / scale),
        primal_violation=max(0.0, g) / gscale,
        complementarity_residual=abs(kappa * g) / gscale,
        multiplier=kappa,
    )


def verify_kkt_w_update(w_n, b6n, p_t: float):
    """KKT residuals of the per-antenna ball subproblem."""
    w_n = np.asarray(w_n, complex)
    b6n = np.asarray(b6n, complex)
    mu = max(0.0, float(np.linalg.norm(b6n)) / np.sqrt(p_t) - 1.0)
    gap = float(np.real(np.vdot(w_n, w_n))) - p_t
    scale = max(1.0, float(np.linalg.norm(b6n)))
    return KktReport(
        stationarity_residual=float(np.linalg.norm((1.0 + mu) * w_n - b6n)) / scale,
        primal_violation=max(0.0, gap) / p_t,
        complementarity_residual=abs(mu * gap) / p_t,
        multiplier=mu,
    )
