"""ADMM solver for the convexified beam subproblem.

    min  x^H B9 x - 2 Re{b3^H x} - c2
    s.t. -2 Re{b4^H x} - c3 <= 0            (linearized EH constraint)
         ||x_n||^2 <= P_t  for every antenna n

The splitting x = w puts the EH halfspace on x and the per-antenna balls on
w. All vectors are handled as (K+G, N) matrices whose rows are beams, so the
per-antenna sub-vector x_n is column n and the stride-N gather of the
stacked formulation is free.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .mm import LinearizedEhConstraint
from .numeric import HermitianFactor
from .wmmse import SurrogateState

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "AdmmResult",
    "InfeasibleSubproblemError",
    "FSubproblem",
    "project_balls",
    "update_w",
    "update_dual",
    "project_power_eh",
    "solve_inner",
]

log = logging.getLogger(__name__)

# with an objective target, polished candidates are tried once ||f - w||^2 is this small
_TARGET_POLISH_RESID = 1e-6


class InfeasibleSubproblemError(ValueError):
    pass


@dataclass
class AdmmConfig:
    rho: float = 1.0
    max_iter: int = 300
    primal_tol: float = 1e-6
    step_tol: float = 1e-8
    record_trace: bool = True
    polish: bool = True
    # optional early exit once w is feasible with objective at or below this value
    obj_target: float | None = None

    def __post_init__(self):
        for name in ("rho", "max_iter", "primal_tol", "step_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class AdmmState:
    f_ie: np.ndarray
    w: np.ndarray
    tau: np.ndarray
    rho: float
    iter: int = 0
    residuals: list = field(default_factory=list)


@dataclass
class AdmmResult:
    x: np.ndarray
    state: AdmmState
    converged: bool
    iterations: int
    trace: list
    polished: bool = False


class FSubproblem:
    """Closed-form minimizer of the f-block of the augmented Lagrangian.

    B9 + (rho/2) I is factored once; every call then costs one batched
    triangular solve over the K+G beams.
    """

    def __init__(self, state: SurrogateState, lin: LinearizedEhConstraint, rho: float):
        self.state = state
        self.lin = lin
        self.rho = rho
        n = state.n
        self.bbar = state.a_block + 0.5 * rho * np.eye(n)
        self.factor = HermitianFactor(self.bbar)
        self.b3 = state.b3
        self.b4 = lin.b4
        # B9bar^{-1} b4 and b4^H B9bar^{-1} b4 are fixed for the whole solve
        self.y4 = self._solve(self.b4)
        self.b4_y4 = float(np.real(np.vdot(self.b4, self.y4)))

    def _solve(self, R: np.ndarray) -> np.ndarray:
        return self.factor.solve(R.T).T

    def bbar3(self, w: np.ndarray, tau: np.ndarray) -> np.ndarray:
        return self.b3 - 0.5 * tau + 0.5 * self.rho * w

    def minimize(self, bbar3: np.ndarray):
        """Return (x, kappa) solving the EH-constrained f-subproblem."""
        x0 = self._solve(bbar3)
        g0 = self.lin.value(x0)
        if g0 <= 0:
            return x0, 0.0
        if self.b4_y4 <= 0:
            raise InfeasibleSubproblemError(
                "linearized EH constraint is violated and b4 vanishes; Q_t is unreachable")
        # constraint is affine in kappa: g(x0 + kappa*y4) = g0 - 2*kappa*b4^H y4
        kappa = g0 / (2.0 * self.b4_y4)
        return x0 + kappa * self.y4, kappa

    def update_f(self, st: AdmmState) -> np.ndarray:
        x, _ = self.minimize(self.bbar3(st.w, st.tau))
        return x


def project_balls(Y: np.ndarray, p_t: float) -> np.ndarray:
    """Project every antenna column of ``Y`` onto the radius-sqrt(p_t) ball."""
    norms = np.sqrt((Y.real ** 2 + Y.imag ** 2).sum(axis=0))
    radius = np.sqrt(p_t)
    scale = np.where(norms > radius, radius / np.where(norms > 0, norms, 1.0), 1.0)
    return Y * scale


def update_w(st: AdmmState, p_t: float) -> np.ndarray:
    b6 = st.f_ie + st.tau / st.rho
    return project_balls(b6, p_t)


def update_dual(st: AdmmState) -> np.ndarray:
    return st.tau + st.rho * (st.f_ie - st.w)


def project_power_eh(Y: np.ndarray, p_t: float, lin: LinearizedEhConstraint,
                     rel_tol: float = 1e-15) -> np.ndarray:
    """Euclidean projection onto the per-antenna balls intersected with the EH halfspace.

    The solution is ``project_balls(Y + lam * b4)`` for the smallest
    ``lam >= 0`` meeting the halfspace, found by bracketing and bisection.
    The returned point is always on the feasible side of the halfspace.
    """
    t = lin.threshold
    b4 = lin.b4

    def h(lam):
        X = project_balls(Y + lam * b4, p_t)
        return X, float(np.real(np.vdot(b4, X)))

    X, v = h(0.0)
    if v >= t:
        return X
    best = np.sqrt(p_t) * np.sum(np.sqrt(np.sum(np.abs(b4) ** 2, axis=0)))
    if best < t:
        raise InfeasibleSubproblemError("per-antenna balls do not meet the EH halfspace")
    lo, hi = 0.0, 1.0
    X_hi, v_hi = h(hi)
    while v_hi < t:
        lo, hi = hi, 2 * hi
        X_hi, v_hi = h(hi)
        if hi > 1e300:
            raise InfeasibleSubproblemError("EH halfspace only reachable at the ball boundary")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        X_mid, v_mid = h(mid)
        if v_mid >= t:
            hi, X_hi = mid, X_mid
        else:
            lo = mid
    return X_hi


def solve_inner(state: SurrogateState, lin: LinearizedEhConstraint, p_t: float,
                config: AdmmConfig | None = None, warm_start: np.ndarray | None = None,
                ) -> AdmmResult:
    """Run ADMM until both residuals meet their tolerances or ``max_iter``.

    Returns the per-antenna-feasible iterate ``w``. With ``config.polish``
    a ``w`` that misses the linearized EH constraint is replaced by its
    projection onto the full feasible set, which moves it by O(||f - w||).
    """
    config = config or AdmmConfig()
    shape = (state.k + state.g, state.n)
    sub = FSubproblem(state, lin, config.rho)
    if warm_start is None:
        x0 = np.zeros(shape, complex)
    else:
        x0 = np.asarray(warm_start, dtype=np.complex128).reshape(shape)
    st = AdmmState(f_ie=x0.copy(), w=x0.copy(), tau=np.zeros(shape, complex), rho=config.rho)

    trace = []
    converged = False
    for it in range(1, config.max_iter + 1):
        f_prev = st.f_ie
        st.f_ie = sub.update_f(st)
        st.w = update_w(st, p_t)
        st.tau = update_dual(st)
        st.iter = it
        df = st.f_ie - f_prev
        dr = st.f_ie - st.w
        step = float(np.vdot(df, df).real)
        primal = float(np.vdot(dr, dr).real)
        st.residuals.append((primal, step))
        if config.record_trace:
            trace.append((it, step, primal, state.objective(st.f_ie)))
        if primal <= config.primal_tol and step <= config.step_tol:
            converged = True
            break
        if config.obj_target is not None:
            # judge the point that would be returned; polishing is only tried near consensus
            eh_ok = lin.value(st.w) <= 0
            if eh_ok or (config.polish and primal <= _TARGET_POLISH_RESID):
                x, polished = _output(st.w, p_t, lin, config.polish)
                if state.objective(x) <= config.obj_target:
                    return AdmmResult(x=x, state=st, converged=True, iterations=it,
                                      trace=trace, polished=polished)
    if not converged:
        log.debug("ADMM hit max_iter=%d (primal %.3g, step %.3g)", config.max_iter, primal, step)

    x, polished = _output(st.w, p_t, lin, config.polish)
    return AdmmResult(x=x, state=st, converged=converged, iterations=st.iter,
                      trace=trace, polished=polished)


def _output(w, p_t, lin, polish):
    if polish and lin.value(w) > 0:
        return project_power_eh(w, p_t, lin), True
    return w.copy(), False
