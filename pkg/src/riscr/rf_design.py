"""Successive design of the analog precoder/combiner column pairs (SRCG).

For each SU ``m`` and column ``l`` the pair ``(w_{m,l}, f_{m,l})`` is
stacked into one unit-modulus vector and ``|w^H Q_{m,l} f|`` is maximised on
the circle manifold, where ``Q_{m,l}`` folds in the other ``M_r - 1``
columns through the matrix determinant lemma.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .manifold import RcgProblem, RcgSettings, random_circle_point, rcg_maximize


@dataclass
class TruncatedSvd:
    u_hat: np.ndarray
    sigma_hat: np.ndarray
    v_hat: np.ndarray

    @property
    def rank(self) -> int:
        return self.sigma_hat.shape[0]

    def matrix(self) -> np.ndarray:
        return (self.u_hat * self.sigma_hat) @ self.v_hat.conj().T


@dataclass
class RfSolution:
    """Analog beamformers: ``f_rf`` is N_t x (M M_r) with SU ``m`` owning block ``m``."""

    f_rf: np.ndarray
    w_rf: list[np.ndarray]
    status: dict = field(default_factory=dict)

    @property
    def n_su(self) -> int:
        return len(self.w_rf)

    @property
    def m_r(self) -> int:
        return self.w_rf[0].shape[1]

    def f_block(self, m: int) -> np.ndarray:
        k = self.m_r
        return self.f_rf[:, m * k:(m + 1) * k]

    def copy(self) -> "RfSolution":
        return RfSolution(self.f_rf.copy(), [w.copy() for w in self.w_rf], dict(self.status))

    @classmethod
    def random(cls, rng: np.random.Generator, n_t: int, n_r: int, n_su: int, m_r: int):
        f = random_circle_point(rng, n_t * n_su * m_r).reshape(n_t, n_su * m_r)
        w = [random_circle_point(rng, n_r * m_r).reshape(n_r, m_r) for _ in range(n_su)]
        return cls(f, w)


def truncate_svd(h: np.ndarray, rank: int) -> TruncatedSvd:
    if rank > min(h.shape):
        raise ValueError(f"rank {rank} exceeds min{h.shape}")
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    return TruncatedSvd(u[:, :rank], s[:rank], vh[:rank].conj().T)


def default_alpha(svd: TruncatedSvd) -> float:
    return 1e-3 * float(np.mean(svd.sigma_hat))


def compute_q(svd: TruncatedSvd, f_excl: np.ndarray, w_excl: np.ndarray,
              alpha_reg: float) -> np.ndarray:
    """``U (alpha I + S V^H F_excl W_excl^H U)^{-1} S V^H`` (N_r x N_t)."""
    if alpha_reg <= 0:
        raise ValueError("alpha_reg must be positive")
    sv = svd.sigma_hat[:, None] * svd.v_hat.conj().T          # M_r x N_t
    inner = alpha_reg * np.eye(svd.rank, dtype=complex)
    if f_excl.shape[1]:
        inner = inner + sv @ f_excl @ (w_excl.conj().T @ svd.u_hat)
    try:
        x = np.linalg.solve(inner, sv)
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError("singular regularised inner matrix in compute_q") from exc
    return svd.u_hat @ x


def pair_objective_and_gradient(z: np.ndarray, q_set) -> tuple[float, np.ndarray]:
    """Value and Euclidean gradient of ``sum_m |w^H Q_m f|`` with ``z = [w; f]``."""
    n_r = q_set[0].shape[0]
    w, f = z[:n_r], z[n_r:]
    value = 0.0
    gw = np.zeros(n_r, dtype=complex)
    gf = np.zeros(z.shape[0] - n_r, dtype=complex)
    for q in q_set:
        qf = q @ f
        s = np.vdot(w, qf)
        mag = abs(s)
        value += mag
        if mag == 0.0:
            continue  # subgradient 0 at the kink
        ph = s / mag
        gw += np.conj(ph) * qf
        gf += ph * (q.conj().T @ w)
    return value, np.concatenate([gw, gf])


def _exclude(mat: np.ndarray, l: int) -> np.ndarray:
    return np.delete(mat, l, axis=1)


def srcg_rf_design(channels, init: RfSolution, settings: RcgSettings = RcgSettings(),
                   alpha_reg: float | None = None, svds=None) -> RfSolution:
    """One SRCG sweep over all SUs and columns, warm-started from ``init``.

    ``channels`` are the per-SU cascaded matrices.  ``status[(m, l)]`` records
    ``(converged, iterations, value_before, value_after)``.
    """
    sol = init.copy()
    sol.status = {}
    m_r = sol.m_r
    n_r = sol.w_rf[0].shape[0]
    for m, h in enumerate(channels):
        svd = svds[m] if svds is not None else truncate_svd(h, m_r)
        alpha = default_alpha(svd) if alpha_reg is None else alpha_reg
        k0 = m * m_r
        for l in range(m_r):
            w_blk = sol.w_rf[m]
            f_blk = sol.f_rf[:, k0:k0 + m_r]
            z0 = np.concatenate([w_blk[:, l], f_blk[:, l]])
            if alpha <= 0:
                # all-zero channel: nothing to optimise
                sol.status[(m, l)] = (True, 0, 0.0, 0.0)
                continue
            q = compute_q(svd, _exclude(f_blk, l), _exclude(w_blk, l), alpha)
            qs = (q,)
            problem = RcgProblem(
                objective=lambda z, qs=qs: pair_objective_and_gradient(z, qs)[0],
                euclidean_gradient=lambda z, qs=qs: pair_objective_and_gradient(z, qs)[1],
                value_and_gradient=lambda z, qs=qs: pair_objective_and_gradient(z, qs),
            )
            res = rcg_maximize(problem, z0, settings)
            sol.w_rf[m][:, l] = res.z[:n_r]
            sol.f_rf[:, k0 + l] = res.z[n_r:]
            sol.status[(m, l)] = (res.converged, res.iterations, res.trace[0], res.trace[-1])
    return sol
