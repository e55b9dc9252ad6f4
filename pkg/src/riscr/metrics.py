"""Exact per-SU SINR matrices, sum spectral efficiency and PU interference."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet


@dataclass
class BeamformerSet:
    f_rf: np.ndarray
    w_rf: list[np.ndarray]
    phi: np.ndarray
    f_bb: list[np.ndarray]
    w_bb: list[np.ndarray]
    p: np.ndarray                     # M x N_s stream powers

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        m = len(self.f_bb)
        if len(self.w_rf) != m or len(self.w_bb) != m or self.p.shape[0] != m:
            raise ValueError("per-SU lists and power rows must have the same length")
        if np.any(self.p < 0):
            raise ValueError("stream powers must be nonnegative")
        for fb, wb, w in zip(self.f_bb, self.w_bb, self.w_rf):
            if fb.shape[0] != self.f_rf.shape[1] or wb.shape[0] != w.shape[1]:
                raise ValueError("baseband and analog dimensions disagree")

    @property
    def n_su(self) -> int:
        return len(self.f_bb)

    def transmit_block(self, m: int) -> np.ndarray:
        """``F_RF F_BB,m D(sqrt(p_m))``."""
        return (self.f_rf @ self.f_bb[m]) * np.sqrt(self.p[m])[None, :]

    def combiner(self, m: int) -> np.ndarray:
        return self.w_rf[m] @ self.w_bb[m]


@dataclass
class LinkReport:
    per_su_se: np.ndarray
    sum_se: float
    i_pu: float
    tp_used: float
    tp_slack: float
    ip_slack: float
    status: dict = field(default_factory=dict)


def _sinr_parts(bf: BeamformerSet, h: np.ndarray, m: int, sigma2: float):
    w = bf.combiner(m)
    wh_h = w.conj().T @ h
    a = [wh_h @ bf.transmit_block(k) for k in range(bf.n_su)]
    signal = a[m] @ a[m].conj().T
    denom = sigma2 * (w.conj().T @ w)
    for k in range(bf.n_su):
        if k != m:
            denom = denom + a[k] @ a[k].conj().T
    return signal, denom


def _inverse(mat: np.ndarray) -> tuple[np.ndarray, str]:
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size and s[-1] > 1e-12 * s[0]:
        return np.linalg.inv(mat), "ok"
    return np.linalg.pinv(mat), "pinv"


def sinr_matrix(bf: BeamformerSet, channels: ChannelSet, su: int, sigma2: float,
                status: dict | None = None) -> np.ndarray:
    """``Gamma_m = (MUI + noise)^{-1} (desired signal)`` for SU ``su``."""
    h = channels.cascaded(bf.phi)[su]
    signal, denom = _sinr_parts(bf, h, su, sigma2)
    inv, st = _inverse(denom)
    if status is not None and st != "ok":
        status[f"sinr_{su}"] = st
    return inv @ signal


def _se_from_parts(signal, denom) -> tuple[float, str]:
    # det(I + D^{-1} S) = det(I + D^{-1/2} S D^{-1/2}); the whitened form is Hermitian
    vals, vecs = np.linalg.eigh((denom + denom.conj().T) / 2)
    keep = vals > 1e-12 * max(vals.max(), 0.0)
    st = "ok" if np.all(keep) else "pinv"
    if not np.any(keep):
        return 0.0, "pinv"
    wh = vecs[:, keep] / np.sqrt(vals[keep])[None, :]
    g = wh.conj().T @ signal @ wh
    g = (g + g.conj().T) / 2
    ev = np.clip(np.linalg.eigvalsh(g), 0.0, None)
    return float(np.sum(np.log2(1.0 + ev))), st


def per_su_se(bf: BeamformerSet, channels: ChannelSet, sigma2: float,
              status: dict | None = None) -> np.ndarray:
    out = []
    for m, h in enumerate(channels.cascaded(bf.phi)):
        se, st = _se_from_parts(*_sinr_parts(bf, h, m, sigma2))
        if status is not None and st != "ok":
            status[f"sinr_{m}"] = st
        out.append(se)
    return np.array(out)


def sum_se(bf: BeamformerSet, channels: ChannelSet, sigma2: float) -> float:
    """``sum_m log2 det(I + Gamma_m)``."""
    return float(np.sum(per_su_se(bf, channels, sigma2)))


def interference_power(bf: BeamformerSet, g: np.ndarray) -> float:
    """``sum_m ||G F_RF F_BB,m D(sqrt(p_m))||_F^2``."""
    return float(sum(np.linalg.norm(g @ bf.transmit_block(m)) ** 2 for m in range(bf.n_su)))


def transmit_power(bf: BeamformerSet) -> float:
    return float(sum(np.linalg.norm(bf.transmit_block(m)) ** 2 for m in range(bf.n_su)))


def link_report(bf: BeamformerSet, channels: ChannelSet, sigma2: float, p_t: float,
                i_th: float | None) -> LinkReport:
    status = {}
    se = per_su_se(bf, channels, sigma2, status)
    i_pu = interference_power(bf, channels.pu_channel(bf.phi))
    tp = transmit_power(bf)
    ip_slack = float("nan") if i_th is None else i_th - i_pu
    return LinkReport(se, float(np.sum(se)), i_pu, tp, p_t - tp, ip_slack, status)
