"""Scenario configuration: defaults, INI loading and command-line overrides.

The INI layout groups keys by section::

    [system]      N_t, N_r, N, M, N_s, M_t, M_r
    [link]        noise_power_dbm, snr_db, gamma_db
    [geometry]    d_ris, ris_y, su_center_x, su_center_y, su_radius, pu_x, pu_y
    [channel]     n_paths, angular_spread_deg, pl_alpha, pl_beta, pl_sigma_shadow,
                  shadowing, link_gain_offset_db
    [run]         trials, seed, schemes, weights
    [solver]      max_outer_iterations, relative_tolerance, rcg_tolerance,
                  rcg_max_iterations, armijo_slope, armijo_contraction, initial_step
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bcd import BcdSettings
from .manifold import RcgSettings

ALL_SCHEMES = (
    "hbf_bcd_dsvd",
    "hbf_bcd_psvd",
    "fdb_no_ip",
    "hbf_random_phase",
    "hbf_white_spectrum",
)

# dB of extra gain applied to every link; see README ("Link-gain normalisation")
DEFAULT_LINK_GAIN_OFFSET_DB = 95.0


def db_to_linear(x_db: float) -> float:
    return float(10.0 ** (x_db / 10.0))


@dataclass
class ScenarioConfig:
    N_t: int = 128
    N_r: int = 8
    N: int = 16
    M: int = 4
    N_s: int = 2
    M_t: int = 8
    M_r: int = 2

    noise_power_dbm: float = -91.0
    snr_db: float = 0.0
    gamma_db: float = 0.0

    d_ris: float = 20.0
    ris_y: float = 20.0
    su_center: tuple[float, float] = (100.0, 0.0)
    su_radius: float = 10.0
    pu_position: tuple[float, float] = (-100.0, 0.0)

    n_paths: int = 10
    angular_spread_deg: float = 10.0
    pl_alpha: float = 61.4
    pl_beta: float = 2.0
    pl_sigma_shadow: float = 5.8
    shadowing: bool = True
    link_gain_offset_db: float = DEFAULT_LINK_GAIN_OFFSET_DB

    trials: int = 50
    seed: int = 2024
    schemes: tuple[str, ...] = ALL_SCHEMES
    weights: tuple[float, ...] | None = None

    bcd: BcdSettings = field(default_factory=BcdSettings)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.M_t != self.M * self.M_r:
            raise ValueError(f"M_t must equal M*M_r ({self.M * self.M_r}), got {self.M_t}")
        if self.N_s > self.M_r:
            raise ValueError("N_s must not exceed M_r")
        if self.M * self.N_s > self.M_t:
            raise ValueError("M*N_s must not exceed M_t")
        if self.M_r > min(self.N_r, self.N):
            raise ValueError("M_r exceeds the rank the cascaded channel can support")
        if self.M_t > self.N_t:
            raise ValueError("M_t must not exceed N_t")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        unknown = set(self.schemes) - set(ALL_SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")
        if self.weights is not None and len(self.weights) != self.M:
            raise ValueError("one weight per SU is required")

    @property
    def sigma2(self) -> float:
        """Noise power in W."""
        return db_to_linear(self.noise_power_dbm - 30.0)

    @property
    def p_t(self) -> float:
        return db_to_linear(self.snr_db) * self.sigma2

    @property
    def i_th(self) -> float:
        return db_to_linear(self.gamma_db) * self.sigma2

    def weight_matrix(self) -> np.ndarray:
        w = np.ones(self.M) if self.weights is None else np.asarray(self.weights, float)
        return np.repeat(w[:, None], self.N_s, axis=1)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def with_sweep_value(self, variable: str, value: float) -> "ScenarioConfig":
        """Copy with one sweep variable set; keeps M_t = M*M_r when M changes."""
        if variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {variable!r}")
        key = SWEEP_VARIABLES[variable]
        if key in ("snr_db", "gamma_db", "d_ris"):
            return self.replace(**{key: float(value)})
        n = int(round(value))
        if key == "M":
            return self.replace(M=n, M_t=n * self.M_r)
        return self.replace(**{key: n})


SWEEP_VARIABLES = {
    "N": "N",
    "snr": "snr_db",
    "gamma": "gamma_db",
    "Nr": "N_r",
    "M": "M",
    "dris": "d_ris",
    "Nt": "N_t",
}

_INT_KEYS = {"N_t", "N_r", "N", "M", "N_s", "M_t", "M_r", "n_paths", "trials", "seed"}
_FLOAT_KEYS = {"noise_power_dbm", "snr_db", "gamma_db", "d_ris", "ris_y", "su_radius",
               "angular_spread_deg", "pl_alpha", "pl_beta", "pl_sigma_shadow",
               "link_gain_offset_db"}
_BCD_KEYS = {"max_outer_iterations": int, "relative_tolerance": float}
_RCG_KEYS = {"rcg_tolerance": ("tolerance", float), "rcg_max_iterations": ("max_iterations", int),
             "armijo_slope": ("armijo_slope", float),
             "armijo_contraction": ("armijo_contraction", float),
             "initial_step": ("initial_step", float)}


def _split(text: str) -> list[str]:
    return [s for s in text.replace(",", " ").split() if s]


def parse_settings(flat: dict[str, str], base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Apply ``key -> string value`` pairs on top of ``base`` (defaults if omitted)."""
    base = base or ScenarioConfig()
    changes: dict = {}
    bcd_changes: dict = {}
    rcg_changes: dict = {}
    pairs = {}
    for key, raw in flat.items():
        if key in _INT_KEYS:
            changes[key] = int(raw)
        elif key in _FLOAT_KEYS:
            changes[key] = float(raw)
        elif key == "shadowing":
            changes[key] = str(raw).strip().lower() in ("1", "true", "yes", "on")
        elif key == "schemes":
            changes[key] = tuple(_split(raw))
        elif key == "weights":
            changes[key] = tuple(float(v) for v in _split(raw)) or None
        elif key in ("su_center_x", "su_center_y", "pu_x", "pu_y"):
            pairs[key] = float(raw)
        elif key in _BCD_KEYS:
            bcd_changes[key] = _BCD_KEYS[key](raw)
        elif key in _RCG_KEYS:
            name, cast = _RCG_KEYS[key]
            rcg_changes[name] = cast(raw)
        else:
            raise KeyError(f"unknown configuration key {key!r}")
    if "su_center_x" in pairs or "su_center_y" in pairs:
        changes["su_center"] = (pairs.get("su_center_x", base.su_center[0]),
                                pairs.get("su_center_y", base.su_center[1]))
    if "pu_x" in pairs or "pu_y" in pairs:
        changes["pu_position"] = (pairs.get("pu_x", base.pu_position[0]),
                                  pairs.get("pu_y", base.pu_position[1]))
    if bcd_changes or rcg_changes:
        rcg = dataclasses.replace(base.bcd.rcg, **rcg_changes)
        changes["bcd"] = dataclasses.replace(base.bcd, rcg=rcg, **bcd_changes)
    if "M" in changes and "M_t" not in changes:
        changes["M_t"] = changes["M"] * changes.get("M_r", base.M_r)
    return base.replace(**changes)


def load_config(path: str | Path) -> ScenarioConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case sensitive (N vs n_paths)
    with open(path) as fh:
        parser.read_file(fh)
    flat = {}
    for section in parser.sections():
        flat.update(parser[section])
    return parse_settings(flat)


def dump_config(config: ScenarioConfig) -> str:
    """INI text that :func:`load_config` maps back to ``config``."""
    c = config
    sections = {
        "system": {k: getattr(c, k) for k in ("N_t", "N_r", "N", "M", "N_s", "M_t", "M_r")},
        "link": {k: getattr(c, k) for k in ("noise_power_dbm", "snr_db", "gamma_db")},
        "geometry": {"d_ris": c.d_ris, "ris_y": c.ris_y, "su_center_x": c.su_center[0],
                     "su_center_y": c.su_center[1], "su_radius": c.su_radius,
                     "pu_x": c.pu_position[0], "pu_y": c.pu_position[1]},
        "channel": {k: getattr(c, k) for k in ("n_paths", "angular_spread_deg", "pl_alpha",
                                               "pl_beta", "pl_sigma_shadow", "shadowing",
                                               "link_gain_offset_db")},
        "run": {"trials": c.trials, "seed": c.seed, "schemes": ", ".join(c.schemes)},
        "solver": {"max_outer_iterations": c.bcd.max_outer_iterations,
                   "relative_tolerance": c.bcd.relative_tolerance,
                   "rcg_tolerance": c.bcd.rcg.tolerance,
                   "rcg_max_iterations": c.bcd.rcg.max_iterations,
                   "armijo_slope": c.bcd.rcg.armijo_slope,
                   "armijo_contraction": c.bcd.rcg.armijo_contraction,
                   "initial_step": c.bcd.rcg.initial_step},
    }
    if c.weights is not None:
        sections["run"]["weights"] = ", ".join(repr(w) for w in c.weights)
    lines = []
    for name, kv in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}" for k, v in kv.items())
        lines.append("")
    return "\n".join(lines)
