"""JSON experiment configs: target, strategy and noise specs resolved into operators."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import noise as noise_mod
from . import states
from .opcore import parse_pauli

SCHEMA_VERSION = 1
MODES = ("protocol", "confidence", "histogram", "curve")
MAX_DRAWS = 10**9


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Instance:
    """A resolved verification problem: target state, ideal strategy and its noisy version."""

    name: str
    psi: np.ndarray
    strategy: states.Strategy
    noisy: noise_mod.NoisyStrategy

    @property
    def n(self) -> int:
        return self.strategy.n

    @cached_property
    def omega(self) -> np.ndarray:
        return self.noisy.operator


def build_target(spec: dict) -> tuple[str, np.ndarray, states.Strategy]:
    kind = spec.get("type")
    if kind == "stabilizer":
        gens = spec.get("generators")
        group = states.five_qubit_code() if gens is None else states.StabilizerGroup(gens)
        return "stabilizer", states.stabilizer_state(group), states.stabilizer_strategy(group)
    if kind in ("ghz", "w"):
        if "n" not in spec:
            raise ConfigError(f"target type {kind!r} needs 'n'")
        n = int(spec["n"])
        if kind == "ghz":
            return "ghz", states.ghz(n), states.ghz_strategy(n)
        return "w", states.w_state(n), states.w_strategy(n)
    raise ConfigError(f"unknown target type {kind!r}; expected stabilizer, ghz or w")


def build_strategy(spec, default: states.Strategy) -> states.Strategy:
    """``None`` or ``{"type": "default"}`` keeps the target's strategy; ``{"type": "pauli",
    "tests": [[pauli, weight], ...]}`` replaces it with weighted Pauli tests."""
    if spec is None or spec.get("type", "default") == "default":
        return default
    if spec["type"] == "pauli":
        tests = [states.pauli_test(parse_pauli(p), float(w)) for p, w in spec["tests"]]
        strat = states.Strategy(tests, tests[0].n, name="pauli")
        if strat.n != default.n:
            raise ConfigError(f"strategy acts on {strat.n} qubits, target on {default.n}")
        return strat
    raise ConfigError(f"unknown strategy type {spec['type']!r}")


def _complex_matrix(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.shape[-1] != 2:
        raise ConfigError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def build_noise(spec, n: int):
    if not spec:
        return noise_mod.QubitNoiseParams.noiseless(n)
    if len(spec) != 1:
        raise ConfigError(f"noise spec needs exactly one model, got {sorted(spec)}")
    (kind, body), = spec.items()
    if kind == "uniform_eta":
        return noise_mod.QubitNoiseParams.uniform(n, float(body))
    if kind == "per_qubit":
        eta = np.asarray(body["eta"], dtype=float)
        q = np.asarray(body.get("q", eta), dtype=float)
        params = noise_mod.QubitNoiseParams(eta, q)
        if params.n != n:
            raise ConfigError(f"per-qubit noise given for {params.n} qubits, target has {n}")
        return params
    if kind == "random":
        lo, hi = body["range"]
        return noise_mod.random_noise(n, float(lo), float(hi), int(body["seed"]))
    if kind == "general":
        delta = body.get("delta")
        if delta is not None:
            delta = [_complex_matrix(d) for d in delta]
        return noise_mod.OutcomeNoise(np.asarray(body["lambda"], dtype=float), delta)
    raise ConfigError(f"unknown noise model {kind!r}")


def build_instance(target: dict, strategy=None, noise=None) -> Instance:
    name, psi, default = build_target(target)
    strat = build_strategy(strategy, default)
    noisy = noise_mod.noisy_strategy(strat, build_noise(noise, strat.n))
    return Instance(name, psi, strat, noisy)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    target: dict
    strategy: dict | None = None
    noise: dict | None = None
    epsilon: float = 0.01
    N: int | None = None
    repetitions: int = 1000
    seed: int = 0
    q_prior: float = 0.5
    mode: str = "confidence"
    delta: float = 0.05
    # replaces the midpoint threshold, e.g. 1.0 for the all-pass noiseless rule
    f_prime: float | None = None
    # curve mode
    deltas: tuple = (0.01, 0.05, 0.1, 0.2)
    epsilons: tuple = ()
    # g sweep
    sweep_eta: tuple = ()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.epsilon <= 1:
            raise ConfigError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0 <= self.q_prior <= 1:
            raise ConfigError(f"q_prior must lie in [0, 1], got {self.q_prior}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be positive")
        if self.N is not None:
            if self.N < 1:
                raise ConfigError("N must be positive")
            if self.N * self.repetitions > MAX_DRAWS:
                raise ConfigError(
                    f"N * repetitions = {self.N * self.repetitions} exceeds the {MAX_DRAWS} draw guard"
                )
        if self.f_prime is not None and not 0 <= self.f_prime <= 1:
            raise ConfigError(f"f_prime must lie in [0, 1], got {self.f_prime}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a non-negative 64-bit integer")

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        d.pop("schema_version", None)
        known = {k: d.pop(k) for k in list(d) if k in cls.__dataclass_fields__ and k != "extra"}
        if "target" not in known:
            raise ConfigError("config needs a 'target'")
        for key in ("deltas", "epsilons", "sweep_eta"):
            if key in known:
                known[key] = tuple(float(x) for x in known[key])
        return cls(**known, extra=d)

    def with_(self, **changes) -> ExperimentConfig:
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return ExperimentConfig(**fields)

    def instance(self) -> Instance:
        return build_instance(self.target, self.strategy, self.noise)


def load_config(path) -> ExperimentConfig:
    with open(Path(path)) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def dumps(payload: dict) -> str:
    """Deterministic JSON with the schema version stamped in."""
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, sort_keys=True, indent=2) + "\n"
