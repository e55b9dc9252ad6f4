"""Riemannian conjugate-gradient ascent on the complex circle manifold.

Points are complex vectors with unit-modulus entries.  Euclidean gradients
follow the real inner product ``Re<g, v>``: for a real objective ``f`` the
first-order model is ``f(z + t v) = f(z) + t Re(vdot(g, v)) + O(t^2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class DegenerateRetraction(ValueError):
    """Raised when ``z + step`` has an entry too close to zero to renormalise."""


@dataclass(frozen=True)
class RcgSettings:
    tolerance: float = 1e-4
    max_iterations: int = 200
    armijo_slope: float = 1e-4
    armijo_contraction: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 60

    def __post_init__(self):
        if self.tolerance <= 0 or self.max_iterations < 0 or self.initial_step <= 0:
            raise ValueError("RCG settings must be positive")
        if not (0 < self.armijo_slope < 1 and 0 < self.armijo_contraction < 1):
            raise ValueError("Armijo constants must lie in (0, 1)")


@dataclass
class RcgProblem:
    objective: Callable[[np.ndarray], float]
    euclidean_gradient: Callable[[np.ndarray], np.ndarray]
    # optional fused evaluation, returns (value, gradient)
    value_and_gradient: Callable[[np.ndarray], tuple] | None = None

    def both(self, z):
        if self.value_and_gradient is not None:
            return self.value_and_gradient(z)
        return self.objective(z), self.euclidean_gradient(z)


@dataclass
class RcgResult:
    z: np.ndarray
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    grad_norm: float = float("nan")


def _check_lengths(a, b):
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")


def project_tangent(z: np.ndarray, v: np.ndarray) -> np.ndarray:
    _check_lengths(z, v)
    return v - np.real(v * z.conj()) * z


def riemannian_gradient(z: np.ndarray, egrad: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space at ``z``."""
    return project_tangent(z, egrad)


def transport(z_new: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Vector transport by projection onto the tangent space at ``z_new``."""
    return project_tangent(z_new, eta)


def retract(z: np.ndarray, step: np.ndarray) -> np.ndarray:
    _check_lengths(z, step)
    y = z + step
    mag = np.abs(y)
    if np.any(mag < 1e-14):
        raise DegenerateRetraction("retraction hit a (numerically) zero entry")
    return y / mag


def inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


def polak_ribiere(grad_new: np.ndarray, grad_old: np.ndarray,
                  transported_grad_old: np.ndarray) -> float:
    """PR+ coefficient; 0 when the old gradient vanishes."""
    denom = inner(grad_old, grad_old)
    if denom == 0.0:
        return 0.0
    return max(0.0, inner(grad_new, grad_new - transported_grad_old) / denom)


def random_circle_point(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))


def rcg_maximize(problem: RcgProblem, z0: np.ndarray,
                 settings: RcgSettings = RcgSettings()) -> RcgResult:
    """Maximise ``problem.objective`` over unit-modulus vectors starting from ``z0``.

    Conjugate directions use PR+ with projection transport; steps come from
    Armijo backtracking.  Hitting ``max_iterations`` is reported through
    ``converged=False`` rather than raised.
    """
    z = np.asarray(z0, dtype=complex)
    f, eg = problem.both(z)
    g = riemannian_gradient(z, eg)
    gnorm = np.sqrt(inner(g, g))
    res = RcgResult(z=z, trace=[float(f)], grad_norm=gnorm)
    if gnorm <= settings.tolerance:
        res.converged = True
        return res

    eta = g.copy()
    for it in range(settings.max_iterations):
        slope = inner(g, eta)
        if slope <= 0.0:
            eta = g.copy()
            slope = gnorm ** 2

        step = settings.initial_step
        accepted = False
        for _ in range(settings.max_backtracks):
            try:
                z_try = retract(z, step * eta)
            except DegenerateRetraction:
                step *= settings.armijo_contraction
                continue
            f_try, eg_try = problem.both(z_try)
            if f_try >= f + settings.armijo_slope * step * slope:
                accepted = True
                break
            step *= settings.armijo_contraction
        if not accepted:
            # no ascent step found at machine precision: stationary for practical purposes
            res.iterations = it
            break

        g_new = riemannian_gradient(z_try, eg_try)
        g_t = transport(z_try, g)
        beta = polak_ribiere(g_new, g, g_t)
        eta = g_new + beta * transport(z_try, eta)

        z, f, g = z_try, f_try, g_new
        gnorm = np.sqrt(inner(g, g))
        res.trace.append(float(f))
        res.iterations = it + 1
        if gnorm <= settings.tolerance:
            res.converged = True
            break

    res.z = z
    res.grad_norm = gnorm
    return res
