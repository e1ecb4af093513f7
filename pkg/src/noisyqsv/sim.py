"""Seeded Monte Carlo verification experiments.

Every trial draws from its own stream, ``SeedSequence(seed, spawn_key=(trial,))``,
so results do not depend on how trials are scheduled.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import hypothesis, spectral, worstcase
from .config import MAX_DRAWS, ConfigError, ExperimentConfig, Instance
from .opcore import as_density_matrix, as_hermitian, projector
from .states import worst_case_state

PROB_TOL = 1e-10


class AssemblyError(RuntimeError):
    """A pass probability fell outside [0, 1] by more than rounding allows."""


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _as_rho(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return projector(state)
    return as_density_matrix(state)


def _checked_prob(p: float) -> float:
    if not -PROB_TOL <= p <= 1 + PROB_TOL:
        raise AssemblyError(f"pass probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def pass_probabilities(effects, state) -> np.ndarray:
    """``Tr(E_i rho)`` for each effect, computed once and reused for every shot."""
    rho = _as_rho(state)
    return np.array([_checked_prob(float(np.trace(e @ rho).real)) for e in effects])


def sample_pass(rho, effect, rng: np.random.Generator) -> bool:
    p = _checked_prob(float(np.trace(as_hermitian(effect) @ _as_rho(rho)).real))
    return bool(rng.random() < p)


def _run_rounds(weights, probs, N: int, rng: np.random.Generator) -> int:
    idx = rng.choice(len(weights), size=N, p=weights)
    return int(np.count_nonzero(rng.random(N) < probs[idx]))


@dataclass(frozen=True)
class ProtocolResult:
    passes: int
    N: int
    accept: bool

    @property
    def f(self) -> float:
        return self.passes / self.N

    @property
    def decision(self) -> str:
        return "H0" if self.accept else "H1"


def accepts(passes: int, N: int, f_prime: float) -> bool:
    """Accept H0 iff ``passes / N >= f'``, compared on counts to dodge rounding."""
    return passes >= f_prime * N


def run_protocol(strategy, state, f_prime: float, N: int, rng: np.random.Generator) -> ProtocolResult:
    """One verification run: ``N`` rounds, each a random test applied to a fresh copy of ``state``."""
    if N < 1:
        raise ValueError("N must be positive")
    probs = pass_probabilities(strategy.effects, state)
    weights = np.asarray(strategy.weights, dtype=float)
    passes = _run_rounds(weights, probs, N, rng)
    return ProtocolResult(passes, N, accepts(passes, N, f_prime))


@dataclass(frozen=True, eq=False)
class Setup:
    """Test plan with the two states it separates."""

    plan: hypothesis.TestPlan
    good: np.ndarray
    bad: np.ndarray
    distinguishable: bool


def prepare(config: ExperimentConfig, inst: Instance | None = None) -> Setup:
    """Plan the test and build the target and worst-case states for ``config``.

    Under the distinguishable conditions the bad state is
    ``sqrt(1-eps)|psi> + sqrt(eps)|psi_1>``; otherwise the worst-case solver's
    witness is used with the separated plan (which raises
    :class:`worstcase.NotVerifiableError` below the threshold).
    """
    inst = inst or config.instance()
    report = spectral.analyze(inst.omega, inst.psi)
    eps = config.epsilon
    if report.distinguishable:
        plan = hypothesis.plan(report.lambda0, report.nu, eps, config.delta, config.q_prior, N=config.N)
        psi1 = spectral.second_eigenvector(inst.omega, inst.psi)
        bad = projector(worst_case_state(inst.psi, psi1, eps))
    else:
        plan = worstcase.nondistinguishable_plan(inst.omega, inst.psi, eps, config.delta, config.q_prior)
        if config.N is not None:
            plan = hypothesis.TestPlan(
                plan.lambda0, plan.nu, eps, config.delta, plan.f_prime, config.N, config.q_prior
            )
        bad = worstcase.worst_case_pass_probability(inst.omega, inst.psi, eps).witness
    if config.f_prime is not None:
        plan = dataclasses.replace(plan, f_prime=config.f_prime)
    if plan.N * config.repetitions > MAX_DRAWS:
        raise ConfigError(f"N * repetitions = {plan.N * config.repetitions} exceeds the {MAX_DRAWS} draw guard")
    return Setup(plan, projector(inst.psi), bad, report.distinguishable)


@dataclass(frozen=True, eq=False)
class ExperimentSummary:
    pass_counts: np.ndarray
    truth_h1: np.ndarray
    accept_h0: np.ndarray
    N: int
    f_prime: float
    empirical_type1: float
    empirical_type2: float
    empirical_confidence: float
    theoretical_type1: float
    theoretical_type2: float
    theoretical_p_sym: float
    theoretical_p_ave: float
    distinguishable: bool
    seed: int

    @property
    def decisions(self) -> list[str]:
        return ["H0" if a else "H1" for a in self.accept_h0]

    @property
    def n_h0(self) -> int:
        return int(np.count_nonzero(~self.truth_h1))

    @property
    def n_h1(self) -> int:
        return int(np.count_nonzero(self.truth_h1))

    def to_dict(self, trials: bool = True) -> dict:
        d = {
            "N": self.N,
            "f_prime": self.f_prime,
            "repetitions": int(self.pass_counts.size),
            "n_h0": self.n_h0,
            "n_h1": self.n_h1,
            "empirical_type1": self.empirical_type1,
            "empirical_type2": self.empirical_type2,
            "empirical_confidence": self.empirical_confidence,
            "theoretical_type1": self.theoretical_type1,
            "theoretical_type2": self.theoretical_type2,
            "theoretical_p_sym": self.theoretical_p_sym,
            "theoretical_p_ave": self.theoretical_p_ave,
            "distinguishable": self.distinguishable,
            "seed": self.seed,
        }
        if trials:
            d["pass_counts"] = [int(c) for c in self.pass_counts]
            d["truth"] = ["H1" if t else "H0" for t in self.truth_h1]
            d["decisions"] = self.decisions
        return d


def _rate(mask: np.ndarray, of: np.ndarray) -> float:
    total = int(np.count_nonzero(of))
    return float(np.count_nonzero(mask & of) / total) if total else math.nan


def simulate_confidence(config: ExperimentConfig, inst: Instance | None = None) -> ExperimentSummary:
    inst = inst or config.instance()
    setup = prepare(config, inst)
    plan = setup.plan
    weights = np.asarray(inst.noisy.weights, dtype=float)
    probs_good = pass_probabilities(inst.noisy.effects, setup.good)
    probs_bad = pass_probabilities(inst.noisy.effects, setup.bad)

    reps = config.repetitions
    counts = np.empty(reps, dtype=np.int64)
    truth_h1 = np.empty(reps, dtype=bool)
    for trial in range(reps):
        rng = trial_rng(config.seed, trial)
        h1 = bool(rng.random() >= config.q_prior)
        counts[trial] = _run_rounds(weights, probs_bad if h1 else probs_good, plan.N, rng)
        truth_h1[trial] = h1
    accept = counts >= plan.f_prime * plan.N

    t1, t2 = plan.decision_error_rates()
    correct = accept != truth_h1
    return ExperimentSummary(
        pass_counts=counts,
        truth_h1=truth_h1,
        accept_h0=accept,
        N=plan.N,
        f_prime=plan.f_prime,
        empirical_type1=_rate(~accept, ~truth_h1),
        empirical_type2=_rate(accept, truth_h1),
        empirical_confidence=float(np.mean(correct)),
        theoretical_type1=t1,
        theoretical_type2=t2,
        theoretical_p_sym=(t1 + t2) / 2,
        theoretical_p_ave=config.q_prior * t1 + (1 - config.q_prior) * t2,
        distinguishable=setup.distinguishable,
        seed=config.seed,
    )


@dataclass(frozen=True)
class SweepPoint:
    eta: float
    g: float
    lambda0: float
    summary: ExperimentSummary

    def row(self) -> dict:
        s = self.summary
        return {
            "eta": self.eta,
            "g": self.g,
            "lambda0": self.lambda0,
            "N": s.N,
            "empirical_confidence": s.empirical_confidence,
            "theoretical_confidence": 1 - s.theoretical_p_ave,
            "empirical_type1": s.empirical_type1,
            "empirical_type2": s.empirical_type2,
            "theoretical_type1": s.theoretical_type1,
            "theoretical_type2": s.theoretical_type2,
        }


def noise_sweep(config: ExperimentConfig, etas) -> list[SweepPoint]:
    """Confidence against noise amplitude with the same ``eta`` on every qubit and basis."""
    out = []
    for eta in etas:
        cfg = config.with_(noise={"uniform_eta": float(eta)})
        inst = cfg.instance()
        lam0 = spectral.analyze(inst.omega, inst.psi).lambda0
        out.append(SweepPoint(float(eta), 1 - 2 * float(eta), lam0, simulate_confidence(cfg, inst)))
    return out


@dataclass(frozen=True, eq=False)
class Histogram:
    f_h0: np.ndarray
    f_h1: np.ndarray
    edges: np.ndarray
    counts_h0: np.ndarray
    counts_h1: np.ndarray
    f_prime: float
    N: int

    def rows(self) -> list[dict]:
        return [
            {
                "bin_lo": float(self.edges[i]),
                "bin_hi": float(self.edges[i + 1]),
                "count_h0": int(self.counts_h0[i]),
                "count_h1": int(self.counts_h1[i]),
            }
            for i in range(len(self.counts_h0))
        ]


def integer_bins(counts, N: int, max_bins: int = 200) -> np.ndarray:
    """Edges in frequency units centred on pass counts, each bin holding the same number of counts."""
    counts = np.asarray(counts)
    if N + 1 <= max_bins or counts.size == 0:
        lo, hi = 0, N
    else:
        lo, hi = int(counts.min()), int(counts.max())
    width = max(1, math.ceil((hi - lo + 1) / max_bins))
    nbins = math.ceil((hi - lo + 1) / width)
    return (lo - 0.5 + width * np.arange(nbins + 1)) / N


def histogram(config: ExperimentConfig, inst: Instance | None = None, max_bins: int = 200) -> Histogram:
    """Pass-frequency ensembles for the target (H0) and worst-case (H1) states.

    Trials ``0 .. reps-1`` feed H0 and ``reps .. 2 reps-1`` feed H1. Only raw
    frequencies and binned counts are produced; smoothing is left to the caller.
    """
    inst = inst or config.instance()
    setup = prepare(config, inst)
    N = setup.plan.N
    weights = np.asarray(inst.noisy.weights, dtype=float)
    reps = config.repetitions
    ensembles = []
    for offset, state in ((0, setup.good), (reps, setup.bad)):
        probs = pass_probabilities(inst.noisy.effects, state)
        ensembles.append(
            np.array([_run_rounds(weights, probs, N, trial_rng(config.seed, offset + t)) for t in range(reps)])
        )
    edges = integer_bins(np.concatenate(ensembles), N, max_bins)
    c0, _ = np.histogram(ensembles[0] / N, bins=edges)
    c1, _ = np.histogram(ensembles[1] / N, bins=edges)
    return Histogram(ensembles[0] / N, ensembles[1] / N, edges, c0, c1, setup.plan.f_prime, N)


@dataclass(frozen=True)
class CurveTable:
    rows: list
    slopes: dict

    def to_dict(self) -> dict:
        return {"rows": self.rows, "slopes": {str(k): v for k, v in self.slopes.items()}}


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def n_vs_epsilon_curve(lambda0: float, nu: float, deltas, epsilons) -> CurveTable:
    """``N(eps)`` for each ``delta`` with its fitted log-log slope.

    ``lambda0 = 1`` switches to the noiseless count ``ln(1/delta) / -ln(1 - nu eps)``.
    """
    epsilons = [float(e) for e in epsilons]
    if len(epsilons) < 2:
        raise ValueError("need at least two epsilon values to fit a slope")
    rows, slopes = [], {}
    for delta in deltas:
        delta = float(delta)
        ns = []
        for eps in epsilons:
            if lambda0 >= 1:
                n_exact = hypothesis.noiseless_sample_complexity(nu, eps, delta)
                n_chernoff = None
            else:
                n_exact = hypothesis.sample_complexity(lambda0, nu, eps, delta)
                n_chernoff = hypothesis.chernoff_sample_complexity(lambda0, nu, eps, delta)
            ns.append(n_exact)
            rows.append({"delta": delta, "epsilon": eps, "N": n_exact, "N_chernoff": n_chernoff})
        slopes[delta] = loglog_slope(epsilons, ns)
    return CurveTable(rows, slopes)
