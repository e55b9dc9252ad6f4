"""Geometric Saleh-Valenzuela mmWave channels with UPA steering vectors.

All randomness comes from an explicit ``numpy.random.Generator`` so that
Monte Carlo workers can own independent streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class UpaGeometry:
    """Uniform planar array with ``n_horizontal x n_vertical`` elements.

    ``element_spacing`` is in wavelengths (0.5 = half-wavelength).
    """

    n_horizontal: int
    n_vertical: int
    element_spacing: float = 0.5

    def __post_init__(self):
        if self.n_horizontal < 1 or self.n_vertical < 1:
            raise ValueError(f"UPA needs at least one element per axis, got "
                             f"{self.n_horizontal}x{self.n_vertical}")

    @property
    def n_elements(self) -> int:
        return self.n_horizontal * self.n_vertical

    @classmethod
    def square_ish(cls, n: int, element_spacing: float = 0.5) -> "UpaGeometry":
        """Factor ``n`` as ``a x b`` with ``a <= b`` and ``a`` as close to sqrt(n) as possible.

        128 -> 8x16, 8 -> 2x4, 16 -> 4x4, 32 -> 4x8.
        """
        if n < 1:
            raise ValueError("n must be positive")
        a = int(math.isqrt(n))
        while n % a:
            a -= 1
        return cls(a, n // a, element_spacing)


@dataclass(frozen=True)
class PathLossParams:
    alpha: float = 61.4
    beta: float = 2.0
    sigma_shadow: float = 5.8

    def __post_init__(self):
        # beta == 0 is allowed: it gives a distance-free model used in tests
        if self.beta < 0:
            raise ValueError("path-loss exponent must be non-negative")
        if self.sigma_shadow < 0:
            raise ValueError("shadowing std must be non-negative")


@dataclass(frozen=True)
class ChannelSpec:
    """Parameters of one point-to-point link.

    Angles are radians; ``angular_spread`` is the Laplacian scale of the
    per-path offsets around the mean angles.  ``shadow_db`` is the shadowing
    realisation for this link (0 for deterministic runs).
    """

    n_paths: int
    mean_azimuth_tx: float
    mean_elevation_tx: float
    mean_azimuth_rx: float
    mean_elevation_rx: float
    angular_spread: float
    distance: float
    tx_geometry: UpaGeometry
    rx_geometry: UpaGeometry
    path_loss: PathLossParams = field(default_factory=PathLossParams)
    shadow_db: float = 0.0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.angular_spread <= 0:
            raise ValueError("angular_spread must be > 0")
        if self.distance <= 0:
            raise ValueError("distance must be > 0")


@dataclass
class ChannelSet:
    """CBS->RIS, RIS->SU (one per SU) and RIS->PU channel matrices."""

    h_ci: np.ndarray
    h_is: list[np.ndarray]
    h_ip: np.ndarray
    positions: dict = field(default_factory=dict)
    distances: dict = field(default_factory=dict)

    @property
    def n_su(self) -> int:
        return len(self.h_is)

    def cascaded(self, phi: np.ndarray) -> list[np.ndarray]:
        """Per-SU cascaded channels H_IS,m diag(phi) H_CI."""
        return [cascade(h, phi, self.h_ci) for h in self.h_is]

    def pu_channel(self, phi: np.ndarray) -> np.ndarray:
        return cascade(self.h_ip, phi, self.h_ci)


def array_response(azimuth: float, elevation: float, geometry: UpaGeometry) -> np.ndarray:
    """Unit-norm UPA steering vector, element (o, p) stored at ``o * n_vertical + p``."""
    o = np.arange(geometry.n_horizontal)[:, None]
    p = np.arange(geometry.n_vertical)[None, :]
    k = 2.0 * np.pi * geometry.element_spacing
    phase = k * (o * np.sin(azimuth) * np.sin(elevation) + p * np.cos(elevation))
    return np.exp(1j * phase).ravel() / np.sqrt(geometry.n_elements)


def path_loss_db(distance: float, params: PathLossParams, shadow_draw: float = 0.0) -> float:
    """Log-distance path loss ``alpha + 10 beta log10(d) + shadow`` in dB."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return params.alpha + 10.0 * params.beta * math.log10(distance) + shadow_draw


def _laplace_angles(rng: np.random.Generator, mean: float, spread: float, n: int,
                    lo: float, hi: float) -> np.ndarray:
    return np.clip(mean + rng.laplace(0.0, spread, size=n), lo, hi)


def draw_channel(spec: ChannelSpec, rng: np.random.Generator,
                 gains: np.ndarray | None = None) -> np.ndarray:
    """Draw ``H = sum_l alpha_l a_r a_t^H`` for one link.

    Path gains are CN(0, gamma^2 10^{-PL/10}) with gamma^2 = rows*cols/n_paths,
    so that E||H||_F^2 = rows*cols*10^{-PL/10}.  Passing ``gains`` overrides
    the random complex gains (used for deterministic single-path checks).
    """
    n_rx = spec.rx_geometry.n_elements
    n_tx = spec.tx_geometry.n_elements
    n_p = spec.n_paths

    az_t = _laplace_angles(rng, spec.mean_azimuth_tx, spec.angular_spread, n_p, -np.pi, np.pi)
    el_t = _laplace_angles(rng, spec.mean_elevation_tx, spec.angular_spread, n_p, 0.0, np.pi)
    az_r = _laplace_angles(rng, spec.mean_azimuth_rx, spec.angular_spread, n_p, -np.pi, np.pi)
    el_r = _laplace_angles(rng, spec.mean_elevation_rx, spec.angular_spread, n_p, 0.0, np.pi)

    if gains is None:
        pl = path_loss_db(spec.distance, spec.path_loss, spec.shadow_db)
        var = n_rx * n_tx / n_p * 10.0 ** (-0.1 * pl)
        gains = np.sqrt(var / 2.0) * (rng.standard_normal(n_p) + 1j * rng.standard_normal(n_p))
    else:
        gains = np.asarray(gains, dtype=complex)
        if gains.shape != (n_p,):
            raise ValueError(f"expected {n_p} path gains, got shape {gains.shape}")

    a_r = np.stack([array_response(az_r[i], el_r[i], spec.rx_geometry) for i in range(n_p)], axis=1)
    a_t = np.stack([array_response(az_t[i], el_t[i], spec.tx_geometry) for i in range(n_p)], axis=1)
    return (a_r * gains) @ a_t.conj().T


def cascade(h_is: np.ndarray, phi: np.ndarray, h_ci: np.ndarray) -> np.ndarray:
    """``H_IS diag(phi) H_CI``; ``phi`` may be the diagonal vector or the full matrix."""
    phi = np.asarray(phi)
    if phi.ndim == 2:
        phi = np.diag(phi)
    if h_is.shape[1] != phi.shape[0] or h_ci.shape[0] != phi.shape[0]:
        raise ValueError(f"dimension mismatch: H_IS {h_is.shape}, phi {phi.shape}, "
                         f"H_CI {h_ci.shape}")
    return (h_is * phi[None, :]) @ h_ci


def _uniform_in_disc(rng: np.random.Generator, center, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2.0 * np.pi)
    return np.asarray(center, dtype=float) + r * np.array([np.cos(theta), np.sin(theta)])


def _random_link(rng, distance, tx_geom, rx_geom, config) -> ChannelSpec:
    spread = np.deg2rad(config.angular_spread_deg)
    params = PathLossParams(config.pl_alpha - config.link_gain_offset_db,
                            config.pl_beta, config.pl_sigma_shadow)
    shadow = rng.normal(0.0, params.sigma_shadow) if config.shadowing else 0.0
    return ChannelSpec(
        n_paths=config.n_paths,
        mean_azimuth_tx=rng.uniform(-np.pi, np.pi),
        mean_elevation_tx=rng.uniform(0.0, np.pi),
        mean_azimuth_rx=rng.uniform(-np.pi, np.pi),
        mean_elevation_rx=rng.uniform(0.0, np.pi),
        angular_spread=spread,
        distance=distance,
        tx_geometry=tx_geom,
        rx_geometry=rx_geom,
        path_loss=params,
        shadow_db=shadow,
    )


def build_scenario(config, rng: np.random.Generator) -> ChannelSet:
    """Place the nodes of the 2-D layout and draw all M+2 channels.

    CBS at the origin, SUs uniform in a disc around ``su_center``, PU at
    ``pu_position`` and the RIS at ``(d_ris, ris_height)``.  ``config`` is a
    :class:`riscr.config.ScenarioConfig` (duck-typed to avoid an import cycle).
    """
    cbs = np.zeros(2)
    ris = np.array([config.d_ris, config.ris_y])
    pu = np.asarray(config.pu_position, dtype=float)
    sus = [_uniform_in_disc(rng, config.su_center, config.su_radius) for _ in range(config.M)]

    g_cbs = UpaGeometry.square_ish(config.N_t)
    g_ris = UpaGeometry.square_ish(config.N)
    g_ue = UpaGeometry.square_ish(config.N_r)

    d_ci = float(np.linalg.norm(ris - cbs))
    d_is = [float(np.linalg.norm(s - ris)) for s in sus]
    d_ip = float(np.linalg.norm(pu - ris))

    h_ci = draw_channel(_random_link(rng, d_ci, g_cbs, g_ris, config), rng)
    h_is = [draw_channel(_random_link(rng, d, g_ris, g_ue, config), rng) for d in d_is]
    h_ip = draw_channel(_random_link(rng, d_ip, g_ris, g_ue, config), rng)

    return ChannelSet(
        h_ci=h_ci, h_is=h_is, h_ip=h_ip,
        positions={"cbs": cbs, "ris": ris, "pu": pu, "su": sus},
        distances={"ci": d_ci, "is": d_is, "ip": d_ip},
    )
