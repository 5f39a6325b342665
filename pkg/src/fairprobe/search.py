"""Directed discriminatory-input search.

A run has two phases: a global phase that samples the domain uniformly to
seed discriminatory regions, and a local phase that random-walks around each
seed, perturbing one non-protected parameter per step. Two probability
vectors drive the walk: sigma_pr (which parameter to perturb) and sigma_v
(probability of stepping -1 rather than +1). Strategies differ only in how
those vectors are updated after each tested input:

  aequitas_random   never updates either vector
  semi_directed     updates sigma_v only
  fully_directed    updates sigma_v, and sigma_pr on every finding
  baseline_random   pure uniform sampling, no local phase at all
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import InputDomain, PointInput, sample_uniform
from .errors import ContractError, InvariantError
from .fairness import DiscriminationConfig, Finding, check_discriminatory, perturb

STRATEGIES = (
    "aequitas_random",
    "semi_directed",
    "fully_directed",
    "baseline_random",
)

# Increasing sophistication; the order used by comparison tables.
COMPARE_ORDER = (
    "baseline_random",
    "aequitas_random",
    "semi_directed",
    "fully_directed",
)


@dataclass(frozen=True)
class SearchConfig:
    """All knobs that affect a search run's results."""

    gamma: DiscriminationConfig = DiscriminationConfig(0.0)
    global_trials: int = 1000
    local_trials: int = 1000
    delta_v: float = 0.001
    delta_pr: float = 0.001
    strategy: str = "fully_directed"
    seed: int = 0
    max_findings: int | None = None
    time_budget: float | None = None
    max_inputs: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.delta_v < 1.0:
            raise ContractError(f"delta_v must be in (0,1), got {self.delta_v}")
        if self.delta_pr <= 0.0:
            raise ContractError(f"delta_pr must be positive, got {self.delta_pr}")
        if self.strategy not in STRATEGIES:
            raise ContractError(
                f"strategy must be one of {STRATEGIES}, got {self.strategy!r}"
            )
        if self.global_trials < 0 or self.local_trials < 0:
            raise ContractError("trial counts must be non-negative")


class ProbabilityState:
    """Selection and direction probabilities over non-protected parameters.

    sigma_pr starts uniform (summing to 1) and sigma_v starts at 0.5 for
    every parameter; sigma_v[p] is the probability of choosing delta = -1
    when parameter p is perturbed.
    """

    def __init__(self, domain: InputDomain):
        self.param_indices = domain.free_indices
        k = len(self.param_indices)
        self.sigma_pr = np.full(k, 1.0 / k)
        self.sigma_v = np.full(k, 0.5)
        self._pos = {p: i for i, p in enumerate(self.param_indices)}

    def position(self, param: int) -> int:
        try:
            return self._pos[param]
        except KeyError:
            raise ContractError(
                f"parameter {param} is protected or not in this domain"
            ) from None

    def selection_probability(self, param: int) -> float:
        return float(self.sigma_pr[self.position(param)])

    def down_probability(self, param: int) -> float:
        return float(self.sigma_v[self.position(param)])

    def choose(self, rng: np.random.Generator) -> tuple[int, int]:
        """Draw (parameter, delta): parameter by sigma_pr, delta by sigma_v."""
        r = rng.random()
        acc = 0.0
        pos = len(self.param_indices) - 1
        for i, w in enumerate(self.sigma_pr):
            acc += w
            if r < acc:
                pos = i
                break
        delta = -1 if rng.random() < self.sigma_v[pos] else 1
        return self.param_indices[pos], delta


def update_semi(
    state: ProbabilityState, p: int, found: bool, delta: int, cfg: SearchConfig
) -> ProbabilityState:
    """Shift sigma_v[p] toward the direction that just produced a finding.

    A finding at delta=-1 or a miss at delta=+1 raises the probability of
    stepping -1 (capped at 1); the opposite outcomes lower it (floored at 0).
    sigma_pr is untouched. Mutates and returns the same state.
    """
    if delta not in (-1, 1):
        raise ContractError(f"delta must be -1 or +1, got {delta}")
    i = state.position(p)
    if (found and delta == -1) or (not found and delta == 1):
        state.sigma_v[i] = min(state.sigma_v[i] + cfg.delta_v, 1.0)
    else:
        state.sigma_v[i] = max(state.sigma_v[i] - cfg.delta_v, 0.0)
    return state


def update_full(
    state: ProbabilityState, p: int, found: bool, delta: int, cfg: SearchConfig
) -> ProbabilityState:
    """Apply the sigma_v update, then reward sigma_pr[p] on a finding.

    On a finding, delta_pr is added to sigma_pr[p] and the whole vector is
    renormalized to sum 1. Mutates and returns the same state.
    """
    update_semi(state, p, found, delta, cfg)
    if found:
        i = state.position(p)
        state.sigma_pr[i] += cfg.delta_pr
        total = float(state.sigma_pr.sum())
        if total <= 0.0:
            raise InvariantError("sigma_pr lost all mass; cannot renormalize")
        state.sigma_pr /= total
    return state


@dataclass
class TestSuite:
    """Findings plus the counters a run report needs."""

    __test__ = False  # not a test class, despite the name

    findings: tuple[Finding, ...]
    unique_inputs: tuple[PointInput, ...]
    inputs_generated: int
    findings_count: int
    global_inputs: int = 0
    global_findings: int = 0
    local_inputs: int = 0
    local_findings: int = 0
    baseline_inputs: int = 0
    baseline_findings: int = 0
    wall_time: float = 0.0
    truncated: str | None = None
    probability_state: ProbabilityState | None = field(default=None, repr=False)

    @property
    def percent_discriminatory(self) -> float:
        if self.inputs_generated == 0:
            return 0.0
        return 100.0 * self.findings_count / self.inputs_generated


def _unique_inputs(findings: Sequence[Finding]) -> tuple[PointInput, ...]:
    seen: dict[PointInput, None] = {}
    for f in findings:
        seen.setdefault(f.input)
    return tuple(seen)


class _Budget:
    """Early-exit tracker: finding cap, input cap, and wall-clock deadline.

    The clock is checked once per tested input (one discrimination check,
    i.e. one batch of model evaluations).
    """

    def __init__(self, cfg: SearchConfig):
        self.max_findings = cfg.max_findings
        self.max_inputs = cfg.max_inputs
        self.deadline = (
            time.monotonic() + cfg.time_budget if cfg.time_budget is not None else None
        )
        self.findings = 0
        self.inputs = 0
        self.reason: str | None = None

    def exhausted(self) -> bool:
        if self.max_findings is not None and self.findings >= self.max_findings:
            self.reason = "max_findings"
            return True
        if self.max_inputs is not None and self.inputs >= self.max_inputs:
            self.reason = "max_inputs"
            return True
        if self.deadline is not None and time.monotonic() >= self.deadline:
            self.reason = "time_budget"
            return True
        return False


def _uniform_phase(
    model,
    domain: InputDomain,
    trials: int,
    cfg: SearchConfig,
    rng: np.random.Generator,
    budget: _Budget,
    origin: str,
    dedup: bool,
    step_start: int = 0,
) -> tuple[list[Finding], int]:
    """Uniform sampling phase; returns (findings, inputs tested)."""
    findings: list[Finding] = []
    seen: set[PointInput] = set()
    tested = 0
    for i in range(trials):
        if budget.exhausted():
            break
        values = sample_uniform(domain, rng)
        finding = check_discriminatory(
            model, values, domain, cfg.gamma, origin=origin, step=step_start + i
        )
        tested += 1
        budget.inputs += 1
        if finding is None:
            continue
        if dedup:
            if finding.input in seen:
                continue
            seen.add(finding.input)
        findings.append(finding)
        budget.findings += 1
    return findings, tested


def _local_phase(
    model,
    domain: InputDomain,
    seeds: Sequence[Finding],
    cfg: SearchConfig,
    rng: np.random.Generator,
    budget: _Budget,
    state: ProbabilityState,
    step_start: int = 0,
) -> tuple[list[Finding], int]:
    """Random-walk phase around each seed; returns (findings, inputs tested).

    One probability state spans all seeds. Each walker starts at its seed
    and is perturbed cumulatively; only perturbed inputs are tested, never
    the seed itself. Duplicate discriminatory inputs are recorded raw.
    """
    findings: list[Finding] = []
    tested = 0
    step = step_start
    for seed in seeds:
        walker = seed.input
        for _ in range(cfg.local_trials):
            if budget.exhausted():
                return findings, tested
            p, delta = state.choose(rng)
            walker = perturb(walker, p, delta, domain)
            finding = check_discriminatory(
                model, walker, domain, cfg.gamma, origin="local", step=step
            )
            step += 1
            tested += 1
            budget.inputs += 1
            found = finding is not None
            if found:
                findings.append(finding)
                budget.findings += 1
            if cfg.strategy == "semi_directed":
                update_semi(state, p, found, delta, cfg)
            elif cfg.strategy == "fully_directed":
                update_full(state, p, found, delta, cfg)
            # aequitas_random: probabilities stay at their initial values
    return findings, tested


def global_search(
    model, domain: InputDomain, cfg: SearchConfig, rng: np.random.Generator
) -> list[Finding]:
    """Uniformly sample the domain and keep discriminatory inputs.

    Performs cfg.global_trials independent samples (fewer only under an
    explicit budget); duplicate discriminatory inputs are dropped, first
    occurrence kept, discovery order preserved.
    """
    budget = _Budget(cfg)
    findings, _ = _uniform_phase(
        model, domain, cfg.global_trials, cfg, rng, budget, "global", dedup=True
    )
    return findings


def local_search(
    model,
    domain: InputDomain,
    seeds: Sequence[Finding],
    cfg: SearchConfig,
    rng: np.random.Generator,
) -> TestSuite:
    """Walk the neighbourhood of each seed, adapting probabilities per strategy."""
    if cfg.strategy == "baseline_random":
        raise ContractError("baseline_random has no local phase")
    start = time.perf_counter()
    budget = _Budget(cfg)
    state = ProbabilityState(domain)
    findings, tested = _local_phase(model, domain, seeds, cfg, rng, budget, state)
    return TestSuite(
        findings=tuple(findings),
        unique_inputs=_unique_inputs(findings),
        inputs_generated=tested,
        findings_count=len(findings),
        local_inputs=tested,
        local_findings=len(findings),
        wall_time=time.perf_counter() - start,
        truncated=budget.reason,
        probability_state=state,
    )


def baseline_random(
    model,
    domain: InputDomain,
    trials: int,
    rng: np.random.Generator,
    gamma: DiscriminationConfig = DiscriminationConfig(0.0),
) -> TestSuite:
    """Purely random comparator: uniform samples, no local phase, no state."""
    start = time.perf_counter()
    cfg = SearchConfig(gamma=gamma, global_trials=trials, strategy="baseline_random")
    budget = _Budget(cfg)
    findings, tested = _uniform_phase(
        model, domain, trials, cfg, rng, budget, "baseline", dedup=False
    )
    return TestSuite(
        findings=tuple(findings),
        unique_inputs=_unique_inputs(findings),
        inputs_generated=tested,
        findings_count=len(findings),
        baseline_inputs=tested,
        baseline_findings=len(findings),
        wall_time=time.perf_counter() - start,
        truncated=budget.reason,
    )


def run_audit(
    model, domain: InputDomain, cfg: SearchConfig, rng: np.random.Generator
) -> TestSuite:
    """Full audit: global phase, then (except baseline) the local phase.

    Budgets (max_findings, max_inputs, time_budget) span both phases.
    Deterministic given the rng seed and a native model.
    """
    start = time.perf_counter()
    budget = _Budget(cfg)

    if cfg.strategy == "baseline_random":
        findings, tested = _uniform_phase(
            model, domain, cfg.global_trials, cfg, rng, budget, "baseline", dedup=False
        )
        return TestSuite(
            findings=tuple(findings),
            unique_inputs=_unique_inputs(findings),
            inputs_generated=tested,
            findings_count=len(findings),
            baseline_inputs=tested,
            baseline_findings=len(findings),
            wall_time=time.perf_counter() - start,
            truncated=budget.reason,
        )

    seeds, global_tested = _uniform_phase(
        model, domain, cfg.global_trials, cfg, rng, budget, "global", dedup=True
    )
    state = ProbabilityState(domain)
    local_findings, local_tested = _local_phase(
        model, domain, seeds, cfg, rng, budget, state, step_start=global_tested
    )
    findings = list(seeds) + local_findings
    return TestSuite(
        findings=tuple(findings),
        unique_inputs=_unique_inputs(findings),
        inputs_generated=global_tested + local_tested,
        findings_count=len(findings),
        global_inputs=global_tested,
        global_findings=len(seeds),
        local_inputs=local_tested,
        local_findings=len(local_findings),
        wall_time=time.perf_counter() - start,
        truncated=budget.reason,
        probability_state=state,
    )


def compare_strategies(
    model,
    domain: InputDomain,
    seeds: Sequence[int],
    budget: int,
    gamma: DiscriminationConfig = DiscriminationConfig(0.0),
    global_fraction: float = 0.1,
    local_trials: int | None = None,
) -> list[dict]:
    """Run all four strategies per seed at an equal tested-input budget.

    Directed strategies spend `global_fraction` of the budget on the global
    phase and the rest walking locally; baseline_random spends all of it on
    uniform sampling. `local_trials` bounds each seed's walk (default: the
    whole budget, so the first seed walks until the budget runs out).
    Returns one row per strategy with per-seed details and the median
    discriminatory rate and wall time.
    """
    if budget < 1:
        raise ContractError("budget must be at least 1 input")
    rows = []
    global_trials = max(1, int(budget * global_fraction))
    for strategy in COMPARE_ORDER:
        per_seed = []
        for seed in seeds:
            cfg = SearchConfig(
                gamma=gamma,
                global_trials=budget if strategy == "baseline_random" else global_trials,
                local_trials=budget if local_trials is None else local_trials,
                strategy=strategy,
                seed=seed,
                max_inputs=budget,
            )
            suite = run_audit(model, domain, cfg, np.random.default_rng(seed))
            per_seed.append(
                {
                    "seed": int(seed),
                    "inputs_generated": suite.inputs_generated,
                    "findings": suite.findings_count,
                    "percent_discriminatory": suite.percent_discriminatory,
                    "wall_time": suite.wall_time,
                }
            )
        rows.append(
            {
                "strategy": strategy,
                "median_percent_discriminatory": float(
                    statistics.median(r["percent_discriminatory"] for r in per_seed)
                ),
                "median_wall_time": float(
                    statistics.median(r["wall_time"] for r in per_seed)
                ),
                "per_seed": per_seed,
            }
        )
    return rows
