"""Low-dimensional similarity kernels, their gradients, and the (a, b) fit.

Two families over squared embedding distance s = ||y_i - y_j||^2:

    cauchy_ab:  phi(s) = (1 + a * s^b)^{-1}
    gaussian:   phi(s) = exp(-s / (2 * tau))

The heavy-tailed form is written in squared distance so the hot loop never
takes a square root (||y||^{2b} == s^b). The repulsive gradient of
log(1 - phi) diverges as s -> 0; the optimizer uses a surrogate in which the
singular 1/s factor is replaced by 1/(s + eps). For the cauchy family the
surrogate is itself the exact gradient of

    b*log(s + eps) - log(1 + a*s^b) + log(a)

which ``log_one_minus_phi`` evaluates, so finite differences can validate
the analytic form at any eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, KernelFitError

FIT_GRID_STEP = 0.01
FIT_GRID_MAX = 3.0
FIT_MAX_ITERS = 200
FIT_STEP_TOL = 1e-10


@dataclass(frozen=True)
class KernelParams:
    """Kernel family selector plus its shape parameters."""

    family: str
    a: float = 1.0
    b: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if self.family not in ("cauchy_ab", "gaussian"):
            raise ConfigurationError(f"unknown kernel family {self.family!r}")
        if self.family == "cauchy_ab" and (self.a <= 0 or self.b <= 0):
            raise ConfigurationError("cauchy_ab requires a > 0 and b > 0")
        if self.family == "gaussian" and self.tau <= 0:
            raise ConfigurationError("gaussian requires tau > 0")

    @classmethod
    def cauchy(cls, a: float = 1.0, b: float = 1.0) -> "KernelParams":
        return cls(family="cauchy_ab", a=a, b=b)

    @classmethod
    def gaussian(cls, tau: float = 1.0) -> "KernelParams":
        return cls(family="gaussian", tau=tau)


def phi(sq_dist, p: KernelParams):
    """Kernel similarity in (0, 1] as a function of squared distance."""
    s = np.asarray(sq_dist, dtype=np.float64)
    if p.family == "gaussian":
        out = np.exp(-s / (2.0 * p.tau))
    else:
        out = 1.0 / (1.0 + p.a * s**p.b)
    return out if out.ndim else float(out)


def one_minus_phi(sq_dist, p: KernelParams):
    """1 - phi computed without cancellation for small distances."""
    s = np.asarray(sq_dist, dtype=np.float64)
    if p.family == "gaussian":
        out = -np.expm1(-s / (2.0 * p.tau))
    else:
        t = p.a * s**p.b
        out = t / (1.0 + t)
    return out if out.ndim else float(out)


def log_phi(sq_dist, p: KernelParams):
    """log phi(s); the attraction integrand."""
    s = np.asarray(sq_dist, dtype=np.float64)
    if p.family == "gaussian":
        out = -s / (2.0 * p.tau)
    else:
        out = -np.log1p(p.a * s**p.b)
    return out if out.ndim else float(out)


def log_one_minus_phi(sq_dist, p: KernelParams, eps: float = 0.0):
    """log(1 - phi(s)), with the cauchy singular term shifted by eps.

    At eps = 0 this is exactly log(1 - phi). For the cauchy family and
    eps > 0 it is the surrogate objective whose gradient the optimizer
    follows; the gaussian family has no closed-form surrogate and ignores
    eps here.
    """
    s = np.asarray(sq_dist, dtype=np.float64)
    if p.family == "gaussian":
        out = np.log(-np.expm1(-s / (2.0 * p.tau)))
    else:
        out = np.log(p.a) + p.b * np.log(s + eps) - np.log1p(p.a * s**p.b)
    return out if out.ndim else float(out)


def _sq_norm(v: np.ndarray) -> float:
    return float(v @ v)


def grad_log_phi(y_a: np.ndarray, y_b: np.ndarray, p: KernelParams) -> np.ndarray:
    """Gradient of log phi(||y_a - y_b||^2) with respect to y_a (attraction).

    Coincident points return the zero vector: the stationary point for
    b >= 1 and the documented removable-singularity policy for b < 1.
    """
    diff = np.asarray(y_a, dtype=np.float64) - np.asarray(y_b, dtype=np.float64)
    if p.family == "gaussian":
        return -diff / p.tau
    s = _sq_norm(diff)
    if s == 0.0:
        return np.zeros_like(diff)
    coef = -2.0 * p.a * p.b * s ** (p.b - 1.0) / (1.0 + p.a * s**p.b)
    return coef * diff


def grad_log_one_minus_phi(
    y_a: np.ndarray, y_c: np.ndarray, p: KernelParams, eps: float = 1e-3
) -> np.ndarray:
    """Gradient of the repulsion term with the 1/s factor softened to 1/(s+eps).

    cauchy_ab: 2b * (y_a - y_c) * [1/(s+eps) - a s^{b-1} / (1 + a s^b)]
    gaussian:  2  * (y_a - y_c) * q(u) / (s+eps),  q(u) = u / (e^u - 1), u = s/(2 tau)

    Exactly coincident points have no push direction and return zero.
    """
    if eps < 0:
        raise ConfigurationError("eps must be nonnegative")
    diff = np.asarray(y_a, dtype=np.float64) - np.asarray(y_c, dtype=np.float64)
    s = _sq_norm(diff)
    if s == 0.0:
        return np.zeros_like(diff)
    if p.family == "gaussian":
        u = s / (2.0 * p.tau)
        coef = 2.0 * (u / np.expm1(u)) / (s + eps)
    else:
        coef = 2.0 * p.b * (1.0 / (s + eps) - p.a * s ** (p.b - 1.0) / (1.0 + p.a * s**p.b))
    return coef * diff


@dataclass(frozen=True)
class MinDistFit:
    """Result of fitting (a, b) against the min-dist target curve."""

    min_dist: float
    fitted_a: float
    fitted_b: float
    fit_rmse: float


def target_curve(dist: np.ndarray, min_dist: float) -> np.ndarray:
    """Desired similarity profile: flat 1 out to min_dist, then exponential decay."""
    return np.where(dist <= min_dist, 1.0, np.exp(-(dist - min_dist)))


def fit_ab(min_dist: float) -> MinDistFit:
    """Least-squares fit of (1 + a d^{2b})^{-1} to the min-dist target curve.

    Gauss-Newton from (a, b) = (1, 1) with step halving, on the distance grid
    {0.00, 0.01, ..., 3.00}; converged when the step norm drops below 1e-10.
    """
    if not (0.0 <= min_dist < FIT_GRID_MAX):
        raise ConfigurationError(f"min_dist must be in [0, {FIT_GRID_MAX})")

    grid = np.arange(0.0, FIT_GRID_MAX + FIT_GRID_STEP / 2, FIT_GRID_STEP)
    y = target_curve(grid, min_dist)
    pos = grid > 0.0
    log_grid = np.zeros_like(grid)
    log_grid[pos] = np.log(grid[pos])

    def model(a: float, b: float) -> np.ndarray:
        return 1.0 / (1.0 + a * grid ** (2.0 * b))

    def sse(a: float, b: float) -> float:
        r = model(a, b) - y
        return float(r @ r)

    a, b = 1.0, 1.0
    err = sse(a, b)
    trace = [err]
    converged = False
    for _ in range(FIT_MAX_ITERS):
        f = model(a, b)
        r = f - y
        pw = grid ** (2.0 * b)
        # d phi / da = -pw * phi^2 ; d phi / db = -2a * pw * log(d) * phi^2
        J = np.column_stack([-pw * f**2, -2.0 * a * pw * log_grid * f**2])
        g = J.T @ r
        H = J.T @ J
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = -g
        # backtrack until the residual decreases and parameters stay positive
        scale = 1.0
        for _ in range(60):
            na, nb = a + scale * step[0], b + scale * step[1]
            if na > 0 and nb > 0 and sse(na, nb) <= err:
                break
            scale *= 0.5
        else:
            converged = True  # no descent direction left: at a minimum
            break
        a, b = a + scale * step[0], b + scale * step[1]
        err = sse(a, b)
        trace.append(err)
        if scale * float(np.hypot(step[0], step[1])) < FIT_STEP_TOL:
            converged = True
            break

    if not converged:
        raise KernelFitError(
            f"fit did not converge in {FIT_MAX_ITERS} iterations; "
            f"residual trace tail: {[f'{e:.3e}' for e in trace[-5:]]}"
        )
    rmse = float(np.sqrt(err / grid.size))
    return MinDistFit(min_dist=min_dist, fitted_a=a, fitted_b=b, fit_rmse=rmse)
