"""Element-by-element design of the RIS reflection phases for fixed analog beamformers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .manifold import RcgProblem, RcgSettings, rcg_maximize

LN2 = np.log(2.0)
GRID_POINTS = 360


class DegenerateElement(ArithmeticError):
    """``1 + phi * delta`` vanished, so the log objective is singular."""


@dataclass
class RmState:
    """RIS phases plus the per-SU factors ``R_m = W_m^H H_IS,m`` and ``T_m = H_CI F_m``."""

    phases: np.ndarray
    r_mats: list[np.ndarray]
    t_mats: list[np.ndarray]
    status: dict = field(default_factory=dict)

    def effective(self, m: int) -> np.ndarray:
        """``R_m diag(phi) T_m`` (M_r x M_r)."""
        return (self.r_mats[m] * self.phases[None, :]) @ self.t_mats[m]


def build_rm_state(phases, combiners, precoders, h_is, h_ci) -> RmState:
    """Assemble an :class:`RmState` from per-SU combiners ``W_m`` and precoders ``F_m``."""
    r = [w.conj().T @ h for w, h in zip(combiners, h_is)]
    t = [h_ci @ f for f in precoders]
    return RmState(np.asarray(phases, dtype=complex).copy(), r, t)


def default_alpha(state: RmState, m: int) -> float:
    s = np.linalg.svd(state.effective(m), compute_uv=False)
    return 1e-3 * float(np.mean(s))


def _delta_from_total(total, r, t_row, phi_n, alpha) -> complex:
    excl = total - phi_n * np.outer(r, t_row)
    inner = alpha * np.eye(total.shape[0], dtype=complex) + excl
    return complex(t_row @ np.linalg.solve(inner, r))


def compute_delta(state: RmState, su: int, element: int, alpha_reg: float) -> complex:
    """``t_n^H (alpha I + sum_{i != n} phi_i r_i t_i^H)^{-1} r_n`` for SU ``su``."""
    if alpha_reg <= 0:
        raise ValueError("alpha_reg must be positive")
    r = state.r_mats[su][:, element]
    t_row = state.t_mats[su][element, :]
    try:
        return _delta_from_total(state.effective(su), r, t_row, state.phases[element], alpha_reg)
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError("singular regularised matrix in compute_delta") from exc


def element_objective_and_gradient(phi_n, deltas) -> tuple[float, complex]:
    """``sum_m log2|1 + phi delta_m|`` and its Euclidean gradient in ``phi``."""
    deltas = np.asarray(deltas, dtype=complex)
    phi = complex(np.ravel(phi_n)[0]) if np.ndim(phi_n) else complex(phi_n)
    a = 1.0 + phi * deltas
    mag2 = np.abs(a) ** 2
    if np.any(mag2 == 0.0):
        raise DegenerateElement("1 + phi*delta = 0")
    value = float(np.sum(np.log2(mag2)) / 2.0)
    grad = complex(np.sum(np.conj(deltas) * a / mag2) / LN2)
    return value, grad


def _grid_values(deltas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    grid = np.exp(2j * np.pi * np.arange(GRID_POINTS) / GRID_POINTS)
    mag = np.abs(1.0 + grid[:, None] * deltas[None, :])
    with np.errstate(divide="ignore"):
        vals = np.sum(np.log2(mag), axis=1)
    return grid, vals


def maximize_element(phi_n: complex, deltas, settings: RcgSettings) -> tuple[complex, float, float]:
    """Best phase for one element: RCG started from the better of ``phi_n`` and a phase grid.

    Returns ``(new_phase, value_before, value_after)``.
    """
    deltas = np.asarray(deltas, dtype=complex)
    before = element_objective_and_gradient(phi_n, deltas)[0]
    grid, vals = _grid_values(deltas)
    k = int(np.argmax(vals))
    start = grid[k] if vals[k] > before else phi_n

    def both(z):
        try:
            v, g = element_objective_and_gradient(z[0], deltas)
        except DegenerateElement:
            return -np.inf, np.zeros(1, dtype=complex)
        return v, np.array([g])

    problem = RcgProblem(lambda z: both(z)[0], lambda z: both(z)[1], both)
    res = rcg_maximize(problem, np.array([start], dtype=complex), settings)
    return complex(res.z[0]), before, res.trace[-1]


def optimize_rm(state: RmState, settings: RcgSettings = RcgSettings(),
                alpha_reg: float | None = None) -> RmState:
    """One successive sweep over the RIS elements ``n = 0..N-1``.

    ``status[n]`` holds ``(value_before, value_after)`` of the per-element
    surrogate, or ``"degenerate"`` when the element was skipped.
    """
    out = RmState(state.phases.copy(), state.r_mats, state.t_mats)
    n_su = len(out.r_mats)
    alphas = [default_alpha(out, m) if alpha_reg is None else alpha_reg for m in range(n_su)]
    totals = [out.effective(m) for m in range(n_su)]
    for n in range(out.phases.shape[0]):
        phi_old = out.phases[n]
        deltas = np.zeros(n_su, dtype=complex)
        for m in range(n_su):
            if alphas[m] <= 0:
                continue
            deltas[m] = _delta_from_total(totals[m], out.r_mats[m][:, n],
                                          out.t_mats[m][n, :], phi_old, alphas[m])
        try:
            phi_new, before, after = maximize_element(phi_old, deltas, settings)
        except DegenerateElement:
            out.status[n] = "degenerate"
            continue
        out.status[n] = (before, after)
        if phi_new != phi_old:
            for m in range(n_su):
                totals[m] = totals[m] + (phi_new - phi_old) * np.outer(
                    out.r_mats[m][:, n], out.t_mats[m][n, :])
            out.phases[n] = phi_new
    return out
