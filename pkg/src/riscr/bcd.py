"""Alternating (BCD) design of the analog beamformers and the RIS phases."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet
from .manifold import RcgSettings, random_circle_point
from .rf_design import RfSolution, srcg_rf_design, truncate_svd
from .ris_design import build_rm_state, optimize_rm


@dataclass(frozen=True)
class BcdSettings:
    max_outer_iterations: int = 20
    relative_tolerance: float = 1e-3
    rcg: RcgSettings = field(default_factory=RcgSettings)

    def __post_init__(self):
        if self.max_outer_iterations < 1 or self.relative_tolerance <= 0:
            raise ValueError("BCD settings must be positive")


@dataclass
class BcdTrace:
    initial_objective: float = float("nan")
    objective: list[float] = field(default_factory=list)
    rf_iterations: list[int] = field(default_factory=list)
    rm_iterations: list[int] = field(default_factory=list)
    rf_unconverged: list[int] = field(default_factory=list)
    converged: bool = False

    @property
    def outer_iterations(self) -> int:
        return len(self.objective)

    def as_dict(self) -> dict:
        return {
            "initial_objective": self.initial_objective,
            "objective": list(self.objective),
            "rf_iterations": list(self.rf_iterations),
            "rm_iterations": list(self.rm_iterations),
            "rf_unconverged": list(self.rf_unconverged),
            "converged": self.converged,
        }


def surrogate_objective(rf: RfSolution, phi: np.ndarray, channels: ChannelSet) -> float:
    """``sum_m log2 |det(W_m^H H_IS,m diag(phi) H_CI F_m)|``; ``-inf`` if any determinant is 0."""
    total = 0.0
    for m, h in enumerate(channels.cascaded(phi)):
        d = abs(np.linalg.det(rf.w_rf[m].conj().T @ h @ rf.f_block(m)))
        if d == 0.0:
            return float("-inf")
        total += np.log2(d)
    return float(total)


def _relative_change(new: float, old: float) -> float:
    if new == old:
        return 0.0
    if not (np.isfinite(new) and np.isfinite(old)):
        return np.inf
    return abs(new - old) / max(abs(old), 1e-12)


def bcd_srcg(channels: ChannelSet, m_r: int, settings: BcdSettings,
             rng: np.random.Generator, *, phi0: np.ndarray | None = None,
             rf0: RfSolution | None = None,
             optimize_ris: bool = True) -> tuple[RfSolution, np.ndarray, BcdTrace]:
    """Alternate SRCG (analog pairs) and successive RIS-element updates.

    Random unit-modulus initialisations are drawn from ``rng`` when ``phi0`` /
    ``rf0`` are not supplied; later outer iterations warm-start from the
    previous iterate.  With ``optimize_ris=False`` the RIS phases stay at
    ``phi0`` and only the analog stage is repeated.
    """
    n_t = channels.h_ci.shape[1]
    n_ris = channels.h_ci.shape[0]
    n_r = channels.h_is[0].shape[0]
    n_su = channels.n_su
    phi = random_circle_point(rng, n_ris) if phi0 is None else np.asarray(phi0, complex).copy()
    rf = RfSolution.random(rng, n_t, n_r, n_su, m_r) if rf0 is None else rf0.copy()

    trace = BcdTrace(initial_objective=surrogate_objective(rf, phi, channels))
    prev = trace.initial_objective
    for _ in range(settings.max_outer_iterations):
        cascaded = channels.cascaded(phi)
        svds = [truncate_svd(h, m_r) for h in cascaded]
        rf = srcg_rf_design(cascaded, rf, settings.rcg, svds=svds)
        trace.rf_iterations.append(sum(s[1] for s in rf.status.values()))
        trace.rf_unconverged.append(sum(1 for s in rf.status.values() if not s[0]))

        if optimize_ris:
            state = build_rm_state(phi, rf.w_rf, [rf.f_block(m) for m in range(n_su)],
                                   channels.h_is, channels.h_ci)
            state = optimize_rm(state, settings.rcg)
            phi = state.phases
            trace.rm_iterations.append(len(state.status))
        else:
            trace.rm_iterations.append(0)

        cur = surrogate_objective(rf, phi, channels)
        trace.objective.append(cur)
        if _relative_change(cur, prev) < settings.relative_tolerance:
            trace.converged = True
            break
        prev = cur
    return rf, phi, trace
