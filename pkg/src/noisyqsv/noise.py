"""Readout-noise models and noisy-strategy assembly.

Noise acts on the classical outcome bits of each measured qubit. A qubit
measured in basis ``b`` reports the wrong '+'/'-' outcome with probability
``eta[i, b]`` (true '+') or ``q[i, b]`` (true '-').
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .opcore import PauliString, as_hermitian, parse_pauli, pauli_to_matrix
from .states import LocalTest, Strategy, pauli_test

BASES = "XYZ"


class NoiseError(ValueError):
    pass


def flip_channel(eta: float, q: float) -> np.ndarray:
    """Column-stochastic ``L[observed, true]`` for one two-outcome measurement."""
    return np.array([[1 - eta, q], [eta, 1 - q]])


@dataclass(frozen=True, eq=False)
class QubitNoiseParams:
    eta: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        eta = np.array(self.eta, dtype=float)
        q = np.array(self.q, dtype=float)
        if eta.ndim != 2 or eta.shape[1] != 3 or eta.shape != q.shape:
            raise NoiseError(f"eta and q must both have shape (n, 3); got {eta.shape}, {q.shape}")
        for name, arr in (("eta", eta), ("q", q)):
            if np.any(arr < 0) or np.any(arr >= 0.5):
                raise NoiseError(f"{name} entries must lie in [0, 0.5)")
        eta.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "q", q)

    @classmethod
    def symmetric(cls, eta) -> QubitNoiseParams:
        eta = np.asarray(eta, dtype=float)
        return cls(eta, eta)

    @classmethod
    def uniform(cls, n: int, eta: float) -> QubitNoiseParams:
        return cls.symmetric(np.full((n, 3), float(eta)))

    @classmethod
    def noiseless(cls, n: int) -> QubitNoiseParams:
        return cls.uniform(n, 0.0)

    @property
    def n(self) -> int:
        return self.eta.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.eta, self.q))

    @property
    def g(self) -> np.ndarray:
        """Per-qubit, per-basis noise factor ``1 - 2 eta`` (symmetric model)."""
        return 1 - 2 * self.eta

    def channel(self, qubit: int, basis: str) -> np.ndarray:
        b = BASES.index(basis)
        return flip_channel(self.eta[qubit, b], self.q[qubit, b])

    def channels_for(self, test: LocalTest) -> list:
        return [self.channel(i, test.bases[i]) for i in test.measured]

    def pauli_factor(self, p: PauliString) -> float:
        return float(np.prod([self.g[i, BASES.index(p.letters[i])] for i in p.support]))


@dataclass(frozen=True, eq=False)
class OutcomeNoise:
    """General readout noise on a k-outcome POVM: ``Pi~_i = sum_j L_ij Pi_j + Delta_i``."""

    lam: np.ndarray
    delta: tuple = None

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float)
        k = lam.shape[0]
        if lam.shape != (k, k):
            raise NoiseError(f"lambda must be square, got shape {lam.shape}")
        if np.any(lam < 0):
            raise NoiseError("lambda has negative entries")
        if not np.allclose(lam.sum(axis=0), 1, atol=1e-12, rtol=0):
            raise NoiseError("lambda columns must sum to 1 (left-stochastic)")
        object.__setattr__(self, "lam", lam)
        if self.delta is not None:
            delta = tuple(as_hermitian(d) for d in self.delta)
            if len(delta) != k:
                raise NoiseError(f"expected {k} residual operators, got {len(delta)}")
            total = sum(delta)
            if np.max(np.abs(total)) > 1e-12:
                raise NoiseError("residual operators must sum to zero")
            object.__setattr__(self, "delta", delta)

    @property
    def k(self) -> int:
        return self.lam.shape[0]


def apply_outcome_noise(effects, noise: OutcomeNoise, atol: float = 1e-10) -> list:
    effects = [np.asarray(e, dtype=complex) for e in effects]
    if len(effects) != noise.k:
        raise NoiseError(f"{len(effects)} effects but lambda is {noise.k}x{noise.k}")
    out = []
    for i in range(noise.k):
        e = sum(noise.lam[i, j] * effects[j] for j in range(noise.k))
        if noise.delta is not None:
            if noise.delta[i].shape != e.shape:
                raise NoiseError(
                    f"residual operator shape {noise.delta[i].shape} does not match {e.shape}"
                )
            e = e + noise.delta[i]
        lo = np.linalg.eigvalsh(as_hermitian(e))[0]
        if lo < -atol:
            raise NoiseError(f"noisy effect {i} is not PSD: minimum eigenvalue {lo:.3e}")
        out.append(e)
    return out


def noisy_pauli_test(p: PauliString | str, params: QubitNoiseParams) -> np.ndarray:
    """Noisy effect of the +1 projector of ``p``; ``(1 + g P)/2`` under symmetric noise."""
    if isinstance(p, str):
        p = parse_pauli(p)
    test = pauli_test(p, 1.0)
    if not params.is_symmetric:
        return test.effect(params.channels_for(test))
    d = 2**p.n
    return (np.eye(d) + params.pauli_factor(p) * pauli_to_matrix(p)) / 2


@dataclass(frozen=True, eq=False)
class NoisyStrategy:
    weights: tuple
    effects: tuple
    n: int
    name: str = ""

    @property
    def operator(self) -> np.ndarray:
        return sum(w * e for w, e in zip(self.weights, self.effects))


def _test_povm(test: LocalTest, k: int) -> tuple[list, list]:
    """POVM of a test with k outcomes plus the indices counted as 'pass'."""
    if k == 2:
        e = test.effect()
        return [e, np.eye(e.shape[0]) - e], [0]
    m = len(test.measured)
    if k != 2**m:
        raise NoiseError(f"lambda of size {k} fits neither the pass/fail POVM nor {2**m} outcomes")
    povm = []
    for s in range(k):
        table = np.zeros(k, dtype=bool)
        table[s] = True
        povm.append(LocalTest(test.bases, table, 1.0).effect())
    return povm, [int(s) for s in np.flatnonzero(test.pass_table)]


def noisy_strategy(strategy: Strategy, noise) -> NoisyStrategy:
    """Attach readout noise to every test of ``strategy``.

    ``noise`` is either a :class:`QubitNoiseParams` (per-qubit flip channels),
    a single :class:`OutcomeNoise` applied to every test, or a list of
    :class:`OutcomeNoise`, one per test.
    """
    if isinstance(noise, QubitNoiseParams):
        if noise.n != strategy.n:
            raise NoiseError(f"noise is for {noise.n} qubits, strategy has {strategy.n}")
        effects = [t.effect(noise.channels_for(t)) for t in strategy.tests]
    else:
        per_test = [noise] * len(strategy.tests) if isinstance(noise, OutcomeNoise) else list(noise)
        if len(per_test) != len(strategy.tests):
            raise NoiseError(f"{len(per_test)} noise models for {len(strategy.tests)} tests")
        effects = []
        for test, nz in zip(strategy.tests, per_test):
            povm, passing = _test_povm(test, nz.k)
            noisy = apply_outcome_noise(povm, nz)
            effects.append(sum(noisy[i] for i in passing))
    for i, e in enumerate(effects):
        top = np.linalg.eigvalsh(as_hermitian(e))[-1]
        if top > 1 + 1e-10:
            raise NoiseError(f"noisy effect of test {i} exceeds identity: max eigenvalue {top:.6f}")
    return NoisyStrategy(
        tuple(t.weight for t in strategy.tests), tuple(effects), strategy.n, strategy.name
    )


def random_noise(n: int, lo: float, hi: float, seed) -> QubitNoiseParams:
    """Independent uniform draws of eta then q, each shaped ``(n, 3)`` over X, Y, Z."""
    if not 0 <= lo <= hi < 0.5:
        raise NoiseError(f"range must satisfy 0 <= lo <= hi < 0.5, got [{lo}, {hi}]")
    rng = np.random.default_rng(seed)
    eta = rng.uniform(lo, hi, size=(n, 3))
    q = rng.uniform(lo, hi, size=(n, 3))
    return QubitNoiseParams(eta, q)
