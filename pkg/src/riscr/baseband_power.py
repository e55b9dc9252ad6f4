"""Digital baseband stage: SVD-based precoders/combiners, ZF across users and power allocation.

Two target subspaces are supported: the dominant singular vectors of each
SU's cascaded channel (``"dsvd"``) and of the channel projected onto the null
space of the PU channel (``"psvd"``).  Power allocation is a weighted
water-filling under a total-power and (optionally) an interference-power
constraint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .rf_design import TruncatedSvd, truncate_svd

ZF_COND_LIMIT = 1e10
NULLSPACE_RTOL = 1e-10
NEGLIGIBLE_SNR = 1e-12


@dataclass
class BasebandSolution:
    f_bb1: np.ndarray                 # M_t x (M N_s), columns grouped per SU
    f_bb2: list[np.ndarray]           # per SU: (M N_s) x N_s column block of the ZF inverse
    f_bb: list[np.ndarray]            # per SU: normalised composite, M_t x N_s
    w_bb: list[np.ndarray]            # per SU: M_r x N_s
    method: str
    sigma: np.ndarray                 # M x N_s singular values of the target channels
    scale: np.ndarray                 # per SU Frobenius norm removed by normalisation
    status: dict = field(default_factory=dict)

    @property
    def n_streams(self) -> int:
        return self.f_bb[0].shape[1]

    def own_block(self, m: int) -> np.ndarray:
        """Normalised ZF block acting on SU ``m``'s own streams (N_s x N_s)."""
        ns = self.n_streams
        return self.f_bb2[m][m * ns:(m + 1) * ns, :] / self.scale[m]


@dataclass
class StreamGains:
    upsilon: np.ndarray
    zeta: np.ndarray
    t: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.ones_like(self.upsilon)


@dataclass
class PowerAllocation:
    p: np.ndarray
    lam: float = 0.0
    tau: float = 0.0
    tp_binding: bool = False
    ip_binding: bool = False
    status: str = "ok"


def _least_squares(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, bool]:
    """``(A^H A)^{-1} A^H B`` via an SVD solve; flags rank deficiency."""
    x, _, rank, _ = np.linalg.lstsq(a, b, rcond=NULLSPACE_RTOL)
    return x, rank < a.shape[1]


def zf_stage(h_bar: np.ndarray) -> tuple[np.ndarray, str]:
    """Inverse of the stacked square effective channel, Tikhonov-regularised if ill-conditioned."""
    if h_bar.shape[0] != h_bar.shape[1]:
        raise ValueError(f"stacked effective channel must be square, got {h_bar.shape}")
    s = np.linalg.svd(h_bar, compute_uv=False)
    if s[-1] > 0 and s[0] / s[-1] <= ZF_COND_LIMIT:
        return np.linalg.inv(h_bar), "ok"
    eps = (s[0] ** 2) / ZF_COND_LIMIT if s[0] > 0 else 1.0
    hh = h_bar.conj().T
    return hh @ np.linalg.inv(h_bar @ hh + eps * np.eye(h_bar.shape[0])), "regularized"


def psvd_project(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Remove the row space of ``g`` from ``h``: ``H (I - V_g V_g^H)``."""
    if h.shape[1] != g.shape[1]:
        raise ValueError("channel and PU channel must share the transmit dimension")
    _, s, vh = np.linalg.svd(g, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return h.copy()
    v_g = vh[s > NULLSPACE_RTOL * s[0]].conj().T
    return h - (h @ v_g) @ v_g.conj().T


def two_stage_baseband(f_rf: np.ndarray, w_rf: list[np.ndarray], channels: list[np.ndarray],
                       targets: list[TruncatedSvd], n_streams: int, method: str) -> BasebandSolution:
    """Fit F1/W_BB to the target singular vectors, then zero-force across users."""
    status = {}
    f1_blocks, w_bb = [], []
    for m, svd in enumerate(targets):
        f1, bad_f = _least_squares(f_rf, svd.v_hat[:, :n_streams])
        wb, bad_w = _least_squares(w_rf[m], svd.u_hat[:, :n_streams])
        if bad_f or bad_w:
            status[f"gram_{m}"] = "rank_deficient"
        f1_blocks.append(f1)
        w_bb.append(wb)
    f_bb1 = np.hstack(f1_blocks)
    x = f_rf @ f_bb1
    h_bar = np.vstack([(w_rf[m] @ w_bb[m]).conj().T @ h @ x for m, h in enumerate(channels)])
    f2, status["zf"] = zf_stage(h_bar)

    ns = n_streams
    f2_blocks, f_bb, scale = [], [], []
    for m in range(len(channels)):
        blk = f2[:, m * ns:(m + 1) * ns]
        comp = f_bb1 @ blk
        c = np.linalg.norm(f_rf @ comp)
        if c == 0.0:
            c = 1.0
            status[f"norm_{m}"] = "zero"
        f2_blocks.append(blk)
        f_bb.append(comp / c)
        scale.append(c)
    sigma = np.array([svd.sigma_hat[:ns] for svd in targets])
    return BasebandSolution(f_bb1, f2_blocks, f_bb, w_bb, method, sigma, np.array(scale), status)


def dsvd_baseband(f_rf, w_rf, channels, n_streams: int, m_r: int | None = None) -> BasebandSolution:
    m_r = m_r or w_rf[0].shape[1]
    targets = [truncate_svd(h, m_r) for h in channels]
    return two_stage_baseband(f_rf, w_rf, channels, targets, n_streams, "dsvd")


def psvd_baseband(f_rf, w_rf, channels, g, n_streams: int, m_r: int | None = None) -> BasebandSolution:
    m_r = m_r or w_rf[0].shape[1]
    targets = [truncate_svd(psvd_project(h, g), m_r) for h in channels]
    return two_stage_baseband(f_rf, w_rf, channels, targets, n_streams, "psvd")


def stream_gains(bb: BasebandSolution, f_rf: np.ndarray, g: np.ndarray,
                 weights: np.ndarray | None = None) -> StreamGains:
    """Per-stream gain, PU-interference and transmit-power coefficients."""
    n_su = len(bb.f_bb)
    ups, zeta, t = [], [], []
    for m in range(n_su):
        own = bb.own_block(m)
        ups.append(bb.sigma[m] ** 2 * np.sum(np.abs(own) ** 2, axis=0))
        x = f_rf @ bb.f_bb[m]
        t.append(np.sum(np.abs(x) ** 2, axis=0))
        zeta.append(np.sum(np.abs(g @ x) ** 2, axis=0))
    ups = np.array(ups)
    w = np.ones_like(ups) if weights is None else np.broadcast_to(weights, ups.shape).astype(float)
    return StreamGains(ups, np.array(zeta), np.array(t), w)


def weighted_rate(gains: StreamGains, p: np.ndarray, sigma2: float) -> float:
    """``sum w log2(1 + upsilon p / sigma^2)`` (diagonal approximation)."""
    return float(np.sum(gains.weights * np.log2(1.0 + gains.upsilon * p / sigma2)))


# the same objective serves both baseband methods; the D-SVD name is kept for callers
weighted_rate_dsvd = weighted_rate


def _alloc(w, a, zeta, t, lam, tau):
    with np.errstate(divide="ignore", invalid="ignore"):
        p = w / (lam * zeta + tau * t) - 1.0 / a
    p = np.where(a > 0, p, 0.0)
    return np.maximum(np.nan_to_num(p, nan=0.0, posinf=np.inf), 0.0)


def _tp_only(w, a, t, p_t):
    """Exact water-filling with only the power constraint, in budget fractions.

    With ``s_i = t_i p_i / P_T`` and ``g_i = a_i P_T / t_i`` the level solves
    ``sum_S (w_i/nu - 1/g_i) = 1``; ``s_i`` is evaluated as
    ``[w_i + sum_S (w_i/g_j - w_j/g_i)] / W_S`` so that a lone active stream gets
    exactly the whole budget even when ``1/g`` dwarfs it.
    """
    g = a * p_t / t
    order = np.argsort(-(w * g), kind="stable")
    active: list[int] = []
    s_best = None
    for k in order:
        if g[k] <= 0:
            break
        cand = active + [k]
        gs, ws = g[cand], w[cand]
        s = (ws + np.sum(ws[:, None] / gs[None, :] - ws[None, :] / gs[:, None], axis=1)) / ws.sum()
        if np.any(s <= 0):
            break
        active, s_best = cand, s
    p = np.zeros_like(a)
    p[active] = s_best * p_t / t[active]
    nu = w[active].sum() / (1.0 + np.sum(1.0 / g[active]))
    return p, nu / p_t


def waterfill(gains: StreamGains, sigma2: float, p_t: float, i_th: float | None = None,
              mode: str = "dsvd") -> PowerAllocation:
    """Weighted water-filling ``p = max(0, w/(lam zeta + tau t) - sigma^2/upsilon)``.

    ``mode="dsvd"`` enforces both the TP and IP constraints; ``"psvd"``
    (or ``i_th=None``) drops the IP constraint, i.e. ``lam = 0``.  The
    1/ln2 factor of the log-base is absorbed into the dual variables.
    """
    if sigma2 <= 0 or p_t <= 0:
        raise ValueError("sigma2 and p_t must be positive")
    shape = gains.upsilon.shape
    w = gains.weights.ravel().astype(float)
    a = gains.upsilon.ravel() / sigma2
    zeta = gains.zeta.ravel()
    t = gains.t.ravel()
    # streams whose full-budget SNR is below 1e-12 carry < 2e-12 bit; leaving them
    # out avoids 1/a terms that swamp the budget in floating point
    a = np.where((t > 0) & (a * p_t > NEGLIGIBLE_SNR * np.where(t > 0, t, 1.0)), a, 0.0)
    if not np.any(a > 0):
        return PowerAllocation(np.zeros(shape), status="no_gain")

    use_ip = mode == "dsvd" and i_th is not None
    if use_ip and i_th <= 0:
        raise ValueError("i_th must be positive")

    def tp(lam, tau):
        return float(np.sum(t * _alloc(w, a, zeta, t, lam, tau)))

    def ip(lam, tau):
        return float(np.sum(zeta * _alloc(w, a, zeta, t, lam, tau)))

    p, tau0 = _tp_only(w, a, t, p_t)
    if not use_ip or float(np.sum(zeta * p)) <= i_th:
        return _finish(p, shape, t, zeta, p_t, i_th if use_ip else None, 0.0, tau0)

    with np.errstate(divide="ignore", invalid="ignore"):
        tau_max = float(np.max(np.where(a > 0, w * a / t, 0.0)))

    def tau_of(lam):
        if tp(lam, 0.0) <= p_t:
            return 0.0
        hi = tau_max
        lo = hi
        while tp(lam, lo) <= p_t:
            lo *= 0.1
        return brentq(lambda x: tp(lam, x) - p_t, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=500)

    def ip_gap(lam):
        return ip(lam, tau_of(lam)) - i_th

    lam_hi = tau0 * float(np.mean(t[a > 0])) / max(float(np.mean(zeta[a > 0])), 1e-300)
    while ip_gap(lam_hi) > 0:
        lam_hi *= 10.0
    lam = brentq(ip_gap, 0.0, lam_hi, xtol=1e-300, rtol=1e-14, maxiter=500)
    tau = tau_of(lam)
    return _finish(_alloc(w, a, zeta, t, lam, tau), shape, t, zeta, p_t, i_th, lam, tau)


def _finish(p, shape, t, zeta, p_t, i_th, lam, tau) -> PowerAllocation:
    used = float(np.sum(t * p))
    if used > p_t:
        p = p * (p_t / used)
    if i_th is not None:
        inter = float(np.sum(zeta * p))
        if inter > i_th:
            p = p * (i_th / inter)
    tp_b = abs(float(np.sum(t * p)) - p_t) <= 1e-6 * p_t
    ip_b = i_th is not None and abs(float(np.sum(zeta * p)) - i_th) <= 1e-6 * i_th
    return PowerAllocation(p.reshape(shape), lam, tau, tp_b, ip_b)


def equal_power(gains: StreamGains, p_t: float, i_th: float | None) -> PowerAllocation:
    """Same power on every stream, as large as both constraints allow."""
    level = p_t / float(np.sum(gains.t))
    if i_th is not None and np.sum(gains.zeta) > 0:
        level = min(level, i_th / float(np.sum(gains.zeta)))
    p = np.full(gains.upsilon.shape, level)
    tp_b = abs(float(np.sum(gains.t * p)) - p_t) <= 1e-9 * p_t
    ip_b = i_th is not None and abs(float(np.sum(gains.zeta * p)) - i_th) <= 1e-9 * i_th
    return PowerAllocation(p, tp_binding=tp_b, ip_binding=ip_b, status="equal")
