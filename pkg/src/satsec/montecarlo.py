"""Deterministic Monte Carlo harness for the secrecy-rate sweeps.

Every trial draws one channel set per sweep point from its own generator,
seeded by ``(master_seed, trial_index)``, and all requested schemes are
evaluated on that same draw. Trials may run in worker processes; results are
reassembled in trial-index order before any reduction, so the output does not
depend on the worker count.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import platform
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .channel_gen import RNG_ALGORITHM, FadingParams, SystemConfig, draw_scenario, trial_rng
from .conv_scheme import EQUAL_TIMES, beam_stack, optimize_beta, uplink_secrecy_constants
from .link_budget import GroundChannelParams, LinkBudget
from .rates import TimeAllocation
from .xor_scheme import (CASE_BOTH, SearchConfig, branch_of, broadcast_sdp, design_beamformer_xor,
                         optimize_time_xor, rl_secrecy_rates)

XOR_ETA, XOR_OTA, CON_ETA, CON_OTA = "XOR-ETA", "XOR-OTA", "Con-ETA", "Con-OTA"
XOR_FIXED, CON_FIXED = "XOR-FIXED", "Con-FIXED"
MAIN_SCHEMES = (XOR_ETA, XOR_OTA, CON_ETA, CON_OTA)
ALL_SCHEMES = MAIN_SCHEMES + (XOR_FIXED, CON_FIXED)
# pairs (optimized, equal) whose per-trial ordering is checked inline
DOMINANCE_PAIRS = ((XOR_OTA, XOR_ETA), (CON_OTA, CON_ETA))

SWEEPS = ("feeds", "t1", "t1t2", "fl_power_dbw", "eve_distance_m")
TIME_SWEEPS = ("t1", "t1t2")
WORKERS_ENV = "SATSEC_WORKERS"

CSV_COLUMNS = ("sweep_value", "scheme", "mean", "stderr", "trials", "mean_t1", "mean_beta",
               "stderr_t1", "mean_rl_secrecy", "stderr_rl_secrecy")


@dataclass(frozen=True)
class ScenarioConfig:
    """One sweep: which schemes, over which variable, with how many trials.

    ``values`` holds the sweep points: feed counts, uplink fractions t1,
    ``(t1, t2)`` pairs, forward-link powers in dBW or eavesdropper
    distances in metres. The fixed-time schemes read their time split from
    the sweep value and are only valid for the time sweeps.
    """

    name: str
    sweep: str
    values: tuple
    schemes: tuple[str, ...] = MAIN_SCHEMES
    trials: int = 2000
    master_seed: int = 2023
    n_feeds: int = 5
    link_budget: LinkBudget = field(default_factory=LinkBudget)
    fading: FadingParams = field(default_factory=FadingParams)
    ground: GroundChannelParams = field(default_factory=GroundChannelParams)
    search: SearchConfig = field(default_factory=SearchConfig)
    eve_distance_m: float | None = None  # fixed distance outside distance sweeps

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ValueError(f"unknown sweep {self.sweep!r}; expected one of {SWEEPS}")
        if not self.schemes or any(s not in ALL_SCHEMES for s in self.schemes):
            raise ValueError(f"schemes must be a non-empty subset of {ALL_SCHEMES}, got {self.schemes}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("duplicate scheme names")
        if self.sweep not in TIME_SWEEPS and any(s in (XOR_FIXED, CON_FIXED) for s in self.schemes):
            raise ValueError("fixed-time schemes need a t1 or t1t2 sweep")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ValueError("master_seed must be a non-negative integer")
        if not self.values:
            raise ValueError("at least one sweep value is required")
        object.__setattr__(self, "values", tuple(self._check_value(v) for v in self.values))
        if self.sweep == "t1t2" and XOR_FIXED in self.schemes:
            raise ValueError("XOR-FIXED has no (t1, t2) reading; use a t1 sweep")
        if self.sweep != "feeds":
            SystemConfig(n_feeds=self.n_feeds)
        if self.eve_distance_m is not None and not self.eve_distance_m > 0:
            raise ValueError("eavesdropper distance must be positive")

    def _check_value(self, v):
        sweep = self.sweep
        if sweep == "feeds":
            if isinstance(v, bool) or int(v) != v or not 2 <= v <= 64:
                raise ValueError(f"feed count must be an integer in [2, 64], got {v}")
            return int(v)
        if sweep == "t1t2":
            t1, t2 = (float(x) for x in v)
            if not (0 < t1 < 1 and 0 <= t2 and t1 + t2 <= 1 + 1e-12):
                raise ValueError(f"(t1, t2) must satisfy 0 < t1 < 1, t2 >= 0, t1 + t2 <= 1; got {v}")
            return (t1, t2)
        v = float(v)
        if sweep == "t1" and not 0 < v < 1:
            raise ValueError(f"t1 must lie in (0, 1), got {v}")
        if sweep == "fl_power_dbw" and not (math.isfinite(v) and v <= self.link_budget.total_sat_power_dbw):
            raise ValueError(f"forward-link power {v} dBW exceeds the satellite total")
        if sweep == "eve_distance_m" and not (math.isfinite(v) and v > 0):
            raise ValueError(f"eavesdropper distance must be positive, got {v}")
        return v

    def point_system(self, value) -> SystemConfig:
        """Channel-model configuration for one sweep point."""
        n, lb, dist = self.n_feeds, self.link_budget, self.eve_distance_m
        if self.sweep == "feeds":
            n = value
        elif self.sweep == "fl_power_dbw":
            lb = dataclasses.replace(lb, fl_tx_power_dbw=value)
        elif self.sweep == "eve_distance_m":
            dist = value
        return SystemConfig(n_feeds=n, link_budget=lb, fading=self.fading, ground=self.ground,
                            eve_distance_m=dist)

    def fixed_times(self, value) -> tuple[TimeAllocation | None, TimeAllocation | None]:
        """(XOR split, conventional split) held fixed at a time-sweep point.

        A t1 sweep gives the conventional scheme equal forward slots; a
        (t1, t2) point has no XOR reading since XOR uses a single forward slot.
        """
        if self.sweep == "t1":
            half = (1.0 - value) / 2.0
            return TimeAllocation(value, 1.0 - value, 0.0), TimeAllocation(value, half, half)
        if self.sweep == "t1t2":
            t1, t2 = value
            return None, TimeAllocation(t1, t2, max(0.0, 1.0 - t1 - t2))
        return None, None

    def to_dict(self) -> dict:
        return json.loads(json.dumps(dataclasses.asdict(self)))

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SummaryRow:
    sweep_value: object
    scheme: str
    mean: float
    stderr: float
    trials: int
    mean_t1: float
    mean_beta: float  # nan for the XOR schemes
    stderr_t1: float
    mean_rl_secrecy: float
    stderr_rl_secrecy: float

    def __post_init__(self):
        if self.mean < 0 or self.stderr < 0:
            raise ValueError("means and standard errors must be non-negative")


@dataclass(frozen=True)
class SecrecySummary:
    """Per sweep point and scheme statistics, plus the inline check tally."""

    config: ScenarioConfig
    rows: tuple[SummaryRow, ...]
    dominance_violations: int

    def row(self, sweep_value, scheme: str) -> SummaryRow:
        for r in self.rows:
            if r.scheme == scheme and r.sweep_value == sweep_value:
                return r
        raise KeyError((sweep_value, scheme))

    def series(self, scheme: str, attr: str = "mean") -> np.ndarray:
        """``attr`` of ``scheme`` across the sweep, in sweep order."""
        return np.array([getattr(self.row(v, scheme), attr) for v in self.config.values])

    def to_csv_text(self) -> str:
        cfg = self.config
        lines = [f"# scenario={cfg.name} sweep={cfg.sweep} rng={RNG_ALGORITHM} master_seed={cfg.master_seed}",
                 f"# config_sha256={cfg.config_hash()}",
                 ",".join(CSV_COLUMNS)]
        for r in self.rows:
            lines.append(",".join([_fmt_sweep(r.sweep_value), r.scheme, _fmt(r.mean), _fmt(r.stderr),
                                   str(r.trials), _fmt(r.mean_t1), _fmt(r.mean_beta), _fmt(r.stderr_t1),
                                   _fmt(r.mean_rl_secrecy), _fmt(r.stderr_rl_secrecy)]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> Path:
        return atomic_write_text(path, self.to_csv_text())

    def manifest(self) -> dict:
        return {
            "scenario": self.config.name,
            "master_seed": self.config.master_seed,
            "rng": RNG_ALGORITHM,
            "config_sha256": self.config.config_hash(),
            "config": self.config.to_dict(),
            "csv_sha256": hashlib.sha256(self.to_csv_text().encode()).hexdigest(),
            "dominance_violations": self.dominance_violations,
            "versions": {"satsec": __version__, "numpy": np.__version__,
                         "python": platform.python_version()},
        }

    def write_manifest(self, path) -> Path:
        return atomic_write_text(path, json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_sweep(v) -> str:
    if isinstance(v, tuple):
        return ":".join(_fmt(x) for x in v)
    if isinstance(v, int):
        return str(v)
    return _fmt(v)


def atomic_write_text(path, text: str) -> Path:
    """Write via a temporary sibling file and rename, so readers never see a
    partial file."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise OSError(f"cannot create output in {directory}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def evaluate_schemes(ch, system: SystemConfig, schemes, search: SearchConfig,
                     xor_times: TimeAllocation | None = None,
                     con_times: TimeAllocation | None = None) -> np.ndarray:
    """Evaluate each scheme on one channel draw.

    Returns an array of shape (len(schemes), 3) holding sum secrecy, the
    uplink fraction t1 and beta (nan for the XOR schemes).
    """
    lb = system.link_budget
    noise, p_s = lb.noise_model(), lb.fl_power_w
    p_users = (lb.user_power_w, lb.user_power_w)
    out = np.full((len(schemes), 3), np.nan)
    sdp = beams = None
    if any(s.startswith("XOR") for s in schemes):
        if branch_of(*rl_secrecy_rates(ch, noise, 0.5, p_users)) == CASE_BOTH:
            sdp = broadcast_sdp(ch, noise, p_s)
    if any(s.startswith("Con") for s in schemes):
        beams = beam_stack(ch, noise, search.beta_grid(), p_s)
    for k, s in enumerate(schemes):
        if s == XOR_ETA:
            sol = design_beamformer_xor(ch, noise, 0.5, 0.5, p_s, p_users=p_users, sdp=sdp)
        elif s == XOR_OTA:
            sol = optimize_time_xor(ch, noise, p_s, search, p_users=p_users, sdp=sdp)
        elif s == XOR_FIXED:
            if xor_times is None:
                raise ValueError("XOR-FIXED needs a time split")
            sol = design_beamformer_xor(ch, noise, xor_times.t1, xor_times.t2, p_s, p_users=p_users, sdp=sdp)
        elif s == CON_ETA:
            sol = optimize_beta(ch, noise, p_s, search, p_users=p_users, times=EQUAL_TIMES, beams=beams)
        elif s == CON_OTA:
            sol = optimize_beta(ch, noise, p_s, search, p_users=p_users, beams=beams)
        else:
            if con_times is None:
                raise ValueError("Con-FIXED needs a time split")
            sol = optimize_beta(ch, noise, p_s, search, p_users=p_users, times=con_times, beams=beams)
        out[k, 0] = sol.sum_secrecy
        out[k, 1] = sol.time.t1
        if s.startswith("Con"):
            out[k, 2] = sol.beta
    return out


def run_trials(config: ScenarioConfig, start: int, stop: int):
    """Raw results for trials ``start..stop-1``.

    Returns ``(values, rl)`` with shapes (trials, points, schemes, 3) and
    (trials, points); ``rl`` is the per-unit-time sum of uplink secrecy rates.
    """
    systems = [config.point_system(v) for v in config.values]
    times = [config.fixed_times(v) for v in config.values]
    n = stop - start
    values = np.empty((n, len(systems), len(config.schemes), 3))
    rl = np.empty((n, len(systems)))
    for i, trial in enumerate(range(start, stop)):
        for j, (system, (xt, ct)) in enumerate(zip(systems, times)):
            ch = draw_scenario(trial_rng(config.master_seed, trial), system)
            lb = system.link_budget
            c, d = uplink_secrecy_constants(ch, lb.noise_model(), (lb.user_power_w, lb.user_power_w))
            rl[i, j] = max(0.0, c) + max(0.0, d)
            values[i, j] = evaluate_schemes(ch, system, config.schemes, config.search, xt, ct)
    return values, rl


def _chunks(trials: int, workers: int):
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(a, min(a + size, trials)) for a in range(0, trials, size)]


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def collect_trials(config: ScenarioConfig, workers: int | None = None):
    """All trial results in trial-index order, however many workers ran them."""
    workers = resolve_workers(workers)
    if workers == 1:
        return run_trials(config, 0, config.trials)
    bounds = _chunks(config.trials, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run_trials, [config] * len(bounds), *zip(*bounds)))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def count_dominance_violations(values: np.ndarray, schemes) -> int:
    """Trials and sweep points where an optimized scheme fell below its
    equal-time counterpart."""
    bad = 0
    for hi, lo in DOMINANCE_PAIRS:
        if hi in schemes and lo in schemes:
            a = values[:, :, schemes.index(hi), 0]
            b = values[:, :, schemes.index(lo), 0]
            bad += int(np.sum(a < b))
    return bad


def _mean_se(x: np.ndarray):
    n = x.shape[0]
    se = np.std(x, axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(x.shape[1:])
    return np.mean(x, axis=0), se


def summarize(config: ScenarioConfig, values: np.ndarray, rl: np.ndarray) -> SecrecySummary:
    mean, se = _mean_se(values)
    rl_mean, rl_se = _mean_se(rl)
    n = values.shape[0]
    rows = []
    for j, v in enumerate(config.values):
        for k, s in enumerate(config.schemes):
            rows.append(SummaryRow(v, s, float(mean[j, k, 0]), float(se[j, k, 0]), n,
                                   float(mean[j, k, 1]), float(mean[j, k, 2]), float(se[j, k, 1]),
                                   float(rl_mean[j]), float(rl_se[j])))
    return SecrecySummary(config, tuple(rows), count_dominance_violations(values, list(config.schemes)))


def run_experiment(config: ScenarioConfig, workers: int | None = None) -> SecrecySummary:
    """Run every trial of ``config`` and reduce to per-point statistics."""
    values, rl = collect_trials(config, workers)
    return summarize(config, values, rl)


# ---- scenario builders ----------------------------------------------------

def scenario_fig2(trials: int = 2000, master_seed: int = 2023, feeds=range(3, 11), **kw) -> ScenarioConfig:
    """Sum secrecy against the number of satellite feeds."""
    return ScenarioConfig("fig2", "feeds", tuple(feeds), MAIN_SCHEMES, trials, master_seed, **kw)


def scenario_fig3(trials: int = 2000, master_seed: int = 2023, n_feeds: int = 5, t1_values=None,
                  **kw) -> ScenarioConfig:
    """XOR sum secrecy against a fixed uplink fraction t1."""
    if t1_values is None:
        t1_values = np.round(np.arange(1, 20) * 0.05, 10)
    return ScenarioConfig("fig3", "t1", tuple(float(t) for t in t1_values), (XOR_FIXED,), trials, master_seed,
                          n_feeds=n_feeds, **kw)


def scenario_fig4(trials: int = 2000, master_seed: int = 2023, n_feeds: int = 5, step: float = 0.1,
                  **kw) -> ScenarioConfig:
    """Conventional sum secrecy over a grid of fixed (t1, t2), with t3 = 1 - t1 - t2."""
    m = int(round(1.0 / step))
    pts = tuple((round(i * step, 10), round(j * step, 10)) for i in range(1, m) for j in range(0, m - i + 1))
    return ScenarioConfig("fig4", "t1t2", pts, (CON_FIXED,), trials, master_seed, n_feeds=n_feeds, **kw)


def scenario_fig5(trials: int = 2000, master_seed: int = 2023, powers_dbw=None, **kw) -> ScenarioConfig:
    """Sum secrecy against the forward-link power. The mean optimal t1 of
    the OTA rows is the time profile across power."""
    if powers_dbw is None:
        powers_dbw = tuple(7.65 + 3.0 * k for k in range(-4, 4))
    return ScenarioConfig("fig5", "fl_power_dbw", tuple(powers_dbw), MAIN_SCHEMES, trials, master_seed, **kw)


def scenario_fig7(trials: int = 2000, master_seed: int = 2023, distances_m=None, **kw) -> ScenarioConfig:
    """Sum secrecy against a fixed user-to-eavesdropper distance. The mean
    optimal t1 of the OTA rows is the time profile across distance."""
    if distances_m is None:
        distances_m = (250.0, 500.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0)
    return ScenarioConfig("fig7", "eve_distance_m", tuple(distances_m), MAIN_SCHEMES, trials, master_seed, **kw)


SCENARIOS = {
    "fig2": scenario_fig2,
    "fig3": scenario_fig3,
    "fig4": scenario_fig4,
    "fig5": scenario_fig5,
    "fig6": scenario_fig5,
    "fig7": scenario_fig7,
    "fig8": scenario_fig7,
}


def build_scenario(name: str, **kw) -> ScenarioConfig:
    try:
        builder = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    cfg = builder(**kw)
    return dataclasses.replace(cfg, name=name) if cfg.name != name else cfg
