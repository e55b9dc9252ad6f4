"""Monte Carlo driver: per-trial scheme evaluation, parameter sweeps and CSV output."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path

import numpy as np

from .baseband_power import (
    dsvd_baseband,
    equal_power,
    psvd_baseband,
    stream_gains,
    waterfill,
    two_stage_baseband,
)
from .bcd import BcdTrace, _relative_change, bcd_srcg
from .channel import ChannelSet, build_scenario
from .config import SWEEP_VARIABLES, ScenarioConfig, dump_config
from .manifold import random_circle_point
from .metrics import BeamformerSet, LinkReport, link_report
from .rf_design import RfSolution, truncate_svd
from .ris_design import build_rm_state, optimize_rm


class Scheme(str, Enum):
    HBF_BCD_DSVD = "hbf_bcd_dsvd"
    HBF_BCD_PSVD = "hbf_bcd_psvd"
    FDB_NO_IP = "fdb_no_ip"
    HBF_RANDOM_PHASE = "hbf_random_phase"
    HBF_WHITE_SPECTRUM = "hbf_white_spectrum"


BCD_SCHEMES = {Scheme.HBF_BCD_DSVD, Scheme.HBF_BCD_PSVD, Scheme.HBF_WHITE_SPECTRUM}


@dataclass
class Design:
    """Beamforming stage that does not depend on SNR or the interference threshold."""

    rf: RfSolution
    phi: np.ndarray
    trace: BcdTrace


@dataclass
class TrialStreams:
    """Independent generators of one trial, all derived from its seed."""

    seed: int
    channel: np.random.Generator
    bcd: np.random.Generator
    random_phase: np.random.Generator
    fdb: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "TrialStreams":
        kids = np.random.SeedSequence(seed).spawn(4)
        return cls(seed, *(np.random.default_rng(k) for k in kids))


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed of trial ``trial``; independent of the sweep value (common random numbers)."""
    ss = np.random.SeedSequence([master_seed, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _design_key(config: ScenarioConfig) -> str:
    neutral = config.replace(snr_db=0.0, gamma_db=0.0, noise_power_dbm=0.0, trials=1,
                             seed=0, weights=None)
    return dump_config(neutral)


def _bcd_design(channels, config, rng) -> Design:
    rf, phi, trace = bcd_srcg(channels, config.M_r, config.bcd, rng)
    return Design(rf, phi, trace)


def _random_phase_design(channels, config, rng) -> Design:
    phi0 = random_circle_point(rng, config.N)
    rf, phi, trace = bcd_srcg(channels, config.M_r, config.bcd, rng, phi0=phi0,
                              optimize_ris=False)
    return Design(rf, phi, trace)


def _fdb_design(channels: ChannelSet, config: ScenarioConfig, rng) -> Design:
    """Fully digital SVD beamformers with the RIS phases alternated against them."""
    n_s = config.N_s
    phi = random_circle_point(rng, config.N)
    trace = BcdTrace()
    prev = None
    for _ in range(config.bcd.max_outer_iterations):
        svds = [truncate_svd(h, n_s) for h in channels.cascaded(phi)]
        if prev is None:
            prev = _fdb_objective(svds, phi, channels)
            trace.initial_objective = prev
        state = build_rm_state(phi, [s.u_hat for s in svds], [s.v_hat for s in svds],
                               channels.h_is, channels.h_ci)
        phi = optimize_rm(state, config.bcd.rcg).phases
        cur = _fdb_objective([truncate_svd(h, n_s) for h in channels.cascaded(phi)], phi,
                             channels)
        trace.objective.append(cur)
        trace.rm_iterations.append(config.N)
        if _relative_change(cur, prev) < config.bcd.relative_tolerance:
            trace.converged = True
            break
        prev = cur
    rf = RfSolution(np.eye(config.N_t, dtype=complex),
                    [np.eye(config.N_r, dtype=complex) for _ in range(config.M)])
    return Design(rf, phi, trace)


def _fdb_objective(svds, phi, channels) -> float:
    return float(sum(np.sum(np.log2(s.sigma_hat)) for s in svds))


def make_designs(channels: ChannelSet, config: ScenarioConfig, streams: TrialStreams,
                 schemes) -> dict[str, Design]:
    schemes = {Scheme(s) for s in schemes}
    out = {}
    if schemes & BCD_SCHEMES:
        out["bcd"] = _bcd_design(channels, config, streams.bcd)
    if Scheme.HBF_RANDOM_PHASE in schemes:
        out["random_phase"] = _random_phase_design(channels, config, streams.random_phase)
    if Scheme.FDB_NO_IP in schemes:
        out["fdb"] = _fdb_design(channels, config, streams.fdb)
    return out


@dataclass
class SchemeOutcome:
    beamformers: BeamformerSet
    report: LinkReport
    approx_se: float
    outer_iters: int
    status: str


def _design_for(scheme: Scheme) -> str:
    if scheme in BCD_SCHEMES:
        return "bcd"
    return "random_phase" if scheme is Scheme.HBF_RANDOM_PHASE else "fdb"


def run_scheme(scheme, channels: ChannelSet, config: ScenarioConfig,
               design: Design) -> SchemeOutcome:
    """Baseband, power allocation and exact evaluation of one scheme on a fixed design."""
    scheme = Scheme(scheme)
    rf, phi = design.rf, design.phi
    cascaded = channels.cascaded(phi)
    g = channels.pu_channel(phi)
    sigma2, p_t, i_th = config.sigma2, config.p_t, config.i_th

    if scheme is Scheme.FDB_NO_IP:
        targets = [truncate_svd(h, config.N_s) for h in cascaded]
        bb = two_stage_baseband(rf.f_rf, rf.w_rf, cascaded, targets, config.N_s, "fdb")
    elif scheme is Scheme.HBF_BCD_PSVD:
        bb = psvd_baseband(rf.f_rf, rf.w_rf, cascaded, g, config.N_s)
    else:
        bb = dsvd_baseband(rf.f_rf, rf.w_rf, cascaded, config.N_s)

    gains = stream_gains(bb, rf.f_rf, g, config.weight_matrix())
    if scheme is Scheme.HBF_WHITE_SPECTRUM:
        alloc = equal_power(gains, p_t, i_th)
    elif scheme in (Scheme.FDB_NO_IP, Scheme.HBF_BCD_PSVD):
        alloc = waterfill(gains, sigma2, p_t, None, mode="psvd")
    else:
        alloc = waterfill(gains, sigma2, p_t, i_th, mode="dsvd")

    bf = BeamformerSet(rf.f_rf, rf.w_rf, phi, bb.f_bb, bb.w_bb, alloc.p)
    report = link_report(bf, channels, sigma2, p_t, i_th)
    approx = float(np.sum(np.log2(1.0 + gains.upsilon * alloc.p / sigma2)))
    flags = [f"{k}={v}" for k, v in sorted(bb.status.items()) if v != "ok"]
    flags += [f"{k}={v}" for k, v in sorted(report.status.items())]
    if alloc.status not in ("ok", "equal"):
        flags.append(f"power={alloc.status}")
    return SchemeOutcome(bf, report, approx, design.trace.outer_iterations,
                         ";".join(flags) or "ok")


@dataclass
class SweepRow:
    sweep_variable: str
    value: float
    scheme: str
    trial: int
    seed: int
    sum_se: float
    per_su_se: tuple
    i_pu: float
    tp_used: float
    i_th: float
    p_t: float
    approx_se: float
    outer_iters: int
    status: str
    wall_time: float = float("nan")


CSV_COLUMNS = [f.name for f in fields(SweepRow)]


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def select(self, scheme=None, value=None) -> list[SweepRow]:
        return [r for r in self.rows
                if (scheme is None or r.scheme == Scheme(scheme).value)
                and (value is None or math.isclose(r.value, value))]

    def mean(self, column: str, scheme, value) -> float:
        vals = [getattr(r, column) for r in self.select(scheme, value)]
        return float(np.mean(vals)) if vals else float("nan")


_DESIGN_CACHE: dict = {}


def clear_design_cache():
    _DESIGN_CACHE.clear()


def run_trial(configs: list[ScenarioConfig], values: list[float], variable: str, trial: int,
              use_cache: bool = False) -> list[SweepRow]:
    """One channel realisation evaluated at every config in ``configs``.

    All configs must share their design-relevant parameters (only SNR / the
    interference threshold may differ); the RF/RIS designs are then computed
    once and reused.  Per-scheme failures become rows with ``status=error:...``.
    """
    base = configs[0]
    seed = trial_seed(base.seed, trial)
    key = (seed, _design_key(base))
    t0 = time.perf_counter()
    cached = _DESIGN_CACHE.get(key) if use_cache else None
    if cached is None:
        streams = TrialStreams.from_seed(seed)
        channels = build_scenario(base, streams.channel)
        designs = make_designs(channels, base, streams, base.schemes)
        if use_cache:
            _DESIGN_CACHE[key] = (channels, designs)
    else:
        channels, designs = cached
        missing = [s for s in base.schemes if _design_for(Scheme(s)) not in designs]
        if missing:
            streams = TrialStreams.from_seed(seed)
            build_scenario(base, streams.channel)  # advance nothing shared; keeps streams aligned
            designs.update(make_designs(channels, base, streams, missing))
    design_time = time.perf_counter() - t0

    rows = []
    for cfg, value in zip(configs, values):
        for name in cfg.schemes:
            scheme = Scheme(name)
            t1 = time.perf_counter()
            try:
                out = run_scheme(scheme, channels, cfg, designs[_design_for(scheme)])
                rep = out.report
                row = SweepRow(variable, float(value), scheme.value, trial, seed, rep.sum_se,
                               tuple(rep.per_su_se), rep.i_pu, rep.tp_used, cfg.i_th, cfg.p_t,
                               out.approx_se, out.outer_iters, out.status)
            except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
                nan = float("nan")
                row = SweepRow(variable, float(value), scheme.value, trial, seed, nan,
                               (), nan, nan, cfg.i_th, cfg.p_t, nan, 0,
                               f"error:{type(exc).__name__}")
            row.wall_time = time.perf_counter() - t1 + design_time / len(configs)
            rows.append(row)
    return rows


def _trial_task(args):
    return run_trial(*args)


def sweep_tasks(config: ScenarioConfig, variable: str, values, trials: int | None = None,
                use_cache: bool = False):
    if variable not in SWEEP_VARIABLES:
        raise ValueError(f"unknown sweep variable {variable!r}; choose from {sorted(SWEEP_VARIABLES)}")
    trials = config.trials if trials is None else trials
    values = [float(v) for v in values]
    cfgs = [config.with_sweep_value(variable, v) for v in values]
    if variable in ("snr", "gamma"):
        # the design is independent of SNR and I_th, so one task covers every value
        return [(cfgs, values, variable, t, use_cache) for t in range(trials)]
    return [([c], [v], variable, t, use_cache) for c, v in zip(cfgs, values) for t in range(trials)]


def run_sweep(config: ScenarioConfig, variable: str, values, trials: int | None = None,
              workers: int = 1, use_cache: bool = False) -> SweepResult:
    """Seeded Monte Carlo sweep; rows ordered by (value, trial, scheme) whatever ``workers`` is."""
    tasks = sweep_tasks(config, variable, values, trials, use_cache)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_trial_task, tasks))
    else:
        chunks = [_trial_task(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    order = {s: i for i, s in enumerate(config.schemes)}
    rows.sort(key=lambda r: (r.value, r.trial, order[r.scheme]))
    return SweepResult(rows)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    if isinstance(x, tuple):
        return ";".join(_fmt(v) for v in x)
    return str(x)


def emit_csv(result: SweepResult, path, timing: bool = False) -> Path:
    """Header plus one row per record, floats at 9 significant digits.

    ``wall_time`` is only written with ``timing=True`` so that repeated runs
    produce byte-identical files.
    """
    cols = CSV_COLUMNS if timing else [c for c in CSV_COLUMNS if c != "wall_time"]
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in result.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in cols])
    return path


def read_csv(path) -> SweepResult:
    """Parse a file written by :func:`emit_csv` back into rows."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            per = tuple(float(v) for v in rec["per_su_se"].split(";") if v)
            rows.append(SweepRow(
                rec["sweep_variable"], float(rec["value"]), rec["scheme"], int(rec["trial"]),
                int(rec["seed"]), float(rec["sum_se"]), per, float(rec["i_pu"]),
                float(rec["tp_used"]), float(rec["i_th"]), float(rec["p_t"]),
                float(rec["approx_se"]), int(rec["outer_iters"]), rec["status"],
                float(rec.get("wall_time", "nan")),
            ))
    return SweepResult(rows)
