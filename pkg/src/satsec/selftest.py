"""Invariant checks run by ``satsec selftest``.

Each check returns a ``CheckResult``; none of them depend on the
brute-force oracles, so the self-test is quick.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_gen import SystemConfig, draw_scenario, trial_rng
from .conv_scheme import optimize_beta, theorem1_monotonicity_check
from .montecarlo import ScenarioConfig, run_experiment
from .xor_scheme import SearchConfig


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_power_activity(trials: int = 50, seed: int = 0, rtol: float = 1e-9) -> CheckResult:
    """Conventional beams use their whole power share."""
    system = SystemConfig()
    lb = system.link_budget
    noise, p_s = lb.noise_model(), lb.fl_power_w
    worst = 0.0
    for i in range(trials):
        sol = optimize_beta(draw_scenario(trial_rng(seed, i), system), noise, p_s)
        e1 = abs(np.linalg.norm(sol.w1) ** 2 / (sol.beta * p_s) - 1.0)
        e2 = abs(np.linalg.norm(sol.w2) ** 2 / ((1.0 - sol.beta) * p_s) - 1.0)
        worst = max(worst, e1, e2)
    return CheckResult("power activity", bool(worst <= rtol), f"max relative power error {worst:.2e}")


def check_monotonicity(trials: int = 50, seed: int = 0) -> CheckResult:
    """Scaling a conventional beam toward full power never lowers its secrecy term."""
    system = SystemConfig()
    lb = system.link_budget
    noise, p_s = lb.noise_model(), lb.fl_power_w
    outcomes = []
    for i in range(trials):
        ch = draw_scenario(trial_rng(seed, i), system)
        for beta in (0.25, 0.5, 0.75):
            outcomes.append(theorem1_monotonicity_check(ch, noise, beta, p_s))
    checked = [o for o in outcomes if o is not None]
    ok = bool(all(checked))
    return CheckResult("power monotonicity", ok, f"{sum(checked)}/{len(checked)} instances pass")


def check_dominance_and_determinism(trials: int = 20, seed: int = 0) -> CheckResult:
    """Optimized time never loses to equal time, and reruns are identical."""
    cfg = ScenarioConfig("selftest", "feeds", (3, 6), trials=trials, master_seed=seed,
                         search=SearchConfig(time_bins=30, beta_bins=30))
    a, b = run_experiment(cfg, workers=1), run_experiment(cfg, workers=1)
    same = a.to_csv_text() == b.to_csv_text()
    ok = bool(same and a.dominance_violations == 0)
    return CheckResult("dominance and determinism", ok,
                       f"violations={a.dominance_violations}, identical reruns={same}")


def run_selftest(trials: int = 50, seed: int = 0) -> list[CheckResult]:
    return [check_power_activity(trials, seed), check_monotonicity(trials, seed),
            check_dominance_and_determinism(max(1, trials // 2), seed)]
