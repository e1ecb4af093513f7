"""Target states and the published verification strategies built from local tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np

from .opcore import (
    I2,
    PauliString,
    check_qubits,
    kron_all,
    normalize,
    parse_pauli,
    pauli_product,
    pauli_to_matrix,
)

SQRT_HALF = 1 / np.sqrt(2)

# columns are the '+' (bit 0) and '-' (bit 1) eigenvectors of each basis
BASIS_CHANGE = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF,
    "Y": np.array([[1, 1], [1j, -1j]], dtype=complex) * SQRT_HALF,
    "Z": np.eye(2, dtype=complex),
    "I": I2,
}


class InvalidStabilizerGroup(ValueError):
    pass


def _check_range(n: int, lo: int) -> int:
    if not lo <= n <= 12:
        raise ValueError(f"n must be in [{lo}, 12], got {n}")
    return n


def basis_state(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def ghz(n: int) -> np.ndarray:
    _check_range(n, 2)
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = SQRT_HALF
    return v


def w_state(n: int) -> np.ndarray:
    _check_range(n, 2)
    v = np.zeros(2**n, dtype=complex)
    v[[1 << k for k in range(n)]] = 1 / np.sqrt(n)
    return v


def worst_case_state(psi, psi_perp, eps: float) -> np.ndarray:
    """``sqrt(1-eps)|psi> + sqrt(eps)|psi_perp>`` for orthogonal unit vectors."""
    if not 0 <= eps <= 1:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    psi = np.asarray(psi, dtype=complex)
    psi_perp = np.asarray(psi_perp, dtype=complex)
    overlap = abs(np.vdot(psi, psi_perp))
    if overlap > 1e-10:
        raise ValueError(f"states are not orthogonal: |<psi|psi_perp>| = {overlap:.3e}")
    return normalize(np.sqrt(1 - eps) * psi + np.sqrt(eps) * psi_perp)


class StabilizerGroup:
    """Abelian Pauli group given by ``n`` independent generators on ``n`` qubits.

    Element ``y`` (an integer in ``[0, 2**n)``) is the ordered product of the
    generators ``S_j`` with bit ``j`` of ``y`` set.
    """

    def __init__(self, generators):
        gens = [parse_pauli(g) if isinstance(g, str) else g for g in generators]
        if not gens:
            raise InvalidStabilizerGroup("no generators given")
        n = gens[0].n
        if any(g.n != n for g in gens):
            raise InvalidStabilizerGroup("generators act on different numbers of qubits")
        if len(gens) != n:
            raise InvalidStabilizerGroup(
                f"{len(gens)} generators on {n} qubits; a stabilizer state needs exactly {n}"
            )
        check_qubits(n)
        for a, b in itertools.combinations(gens, 2):
            if not a.commutes_with(b):
                raise InvalidStabilizerGroup(f"generators {a} and {b} anticommute")
        self.n = n
        self.generators = tuple(gens)
        elements = [PauliString("I" * n)]
        for y in range(1, 2**n):
            j = y.bit_length() - 1
            phase, letters = pauli_product(elements[y ^ (1 << j)], gens[j])
            if phase.imag != 0:
                raise InvalidStabilizerGroup(f"non-Hermitian element at index {y}")
            elem = PauliString(letters, int(phase.real))
            if elem.is_identity():
                if elem.sign < 0:
                    raise InvalidStabilizerGroup("-I is generated; the group stabilizes nothing")
                raise InvalidStabilizerGroup("generators are not independent")
            elements.append(elem)
        self.elements = tuple(elements)
        proj = self.basis_projector(0)
        rank = round(np.trace(proj).real)
        if rank != 1:
            raise InvalidStabilizerGroup(f"common +1 eigenspace has dimension {rank}, expected 1")

    def __len__(self):
        return len(self.elements)

    def nonidentity(self):
        """Pairs ``(k, G_k)`` for the ``2**n - 1`` non-identity elements."""
        return list(enumerate(self.elements))[1:]

    def basis_projector(self, w: int) -> np.ndarray:
        """Projector onto the joint eigenspace with ``S_j = (-1)**w_j``."""
        d = 2**self.n
        proj = np.eye(d, dtype=complex)
        for j, g in enumerate(self.generators):
            s = -1 if (w >> j) & 1 else 1
            proj = proj @ (np.eye(d) + s * pauli_to_matrix(g)) / 2
        return proj


def five_qubit_code() -> StabilizerGroup:
    return StabilizerGroup(["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ", "ZZZZZ"])


def _top_column(proj: np.ndarray) -> np.ndarray:
    col = proj[:, int(np.argmax(np.linalg.norm(proj, axis=0)))]
    v = normalize(col)
    idx = int(np.argmax(np.abs(v) > 1e-10))
    return v * (abs(v[idx]) / v[idx])


def stabilizer_state(group: StabilizerGroup) -> np.ndarray:
    return _top_column(group.basis_projector(0))


def stabilizer_basis_state(group: StabilizerGroup, w: int) -> np.ndarray:
    return _top_column(group.basis_projector(w))


@dataclass(frozen=True, eq=False)
class LocalTest:
    """A two-outcome test realized by single-qubit measurements.

    ``bases`` has one letter per qubit from ``X``, ``Y``, ``Z`` or ``I`` (not
    measured). ``pass_table`` is a boolean vector over outcome strings of the
    measured qubits, indexed with the lowest-numbered measured qubit as the
    most significant bit and outcome bit 0 meaning the '+' eigenvalue.
    """

    bases: str
    pass_table: np.ndarray
    weight: float
    label: str = ""

    def __post_init__(self):
        for pos, b in enumerate(self.bases):
            if b not in BASIS_CHANGE:
                raise ValueError(f"invalid basis {b!r} at qubit {pos}")
        table = np.asarray(self.pass_table, dtype=bool).reshape(-1)
        if table.size != 2 ** len(self.measured):
            raise ValueError(
                f"pass table has {table.size} entries, expected {2 ** len(self.measured)}"
            )
        table.setflags(write=False)
        object.__setattr__(self, "pass_table", table)
        if not 0 < self.weight <= 1:
            raise ValueError(f"test weight must lie in (0, 1], got {self.weight}")

    @property
    def n(self) -> int:
        return len(self.bases)

    @cached_property
    def measured(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bases) if b != "I")

    def pass_probabilities(self, channels=None) -> np.ndarray:
        """Pass probability for every true outcome string of the measured qubits.

        ``channels`` optionally gives one 2x2 column-stochastic matrix per
        measured qubit, ``L[observed, true]``, applied to the outcome bits
        before the pass rule.
        """
        m = len(self.measured)
        arr = self.pass_table.astype(float).reshape((2,) * m)
        if channels is not None:
            if len(channels) != m:
                raise ValueError(f"expected {m} channels, got {len(channels)}")
            for axis, lam in enumerate(channels):
                lam = np.asarray(lam, dtype=float)
                arr = np.moveaxis(np.tensordot(lam.T, arr, axes=([1], [axis])), 0, axis)
        return arr.reshape(-1)

    def effect(self, channels=None) -> np.ndarray:
        """Effect operator ``sum_s passprob(s) * Pi_s`` of the (possibly noisy) test."""
        n = self.n
        probs = self.pass_probabilities(channels)
        shape = [2 if b != "I" else 1 for b in self.bases]
        diag = np.broadcast_to(probs.reshape(shape), (2,) * n).reshape(-1)
        u = kron_all(BASIS_CHANGE[b] for b in self.bases)
        return (u * diag) @ u.conj().T


@dataclass(frozen=True, eq=False)
class Strategy:
    tests: tuple
    n: int
    name: str = ""
    _operator: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tests", tuple(self.tests))
        if not self.tests:
            raise ValueError("a strategy needs at least one test")
        total = sum(t.weight for t in self.tests)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"test weights sum to {total!r}, expected 1")
        if any(t.n != self.n for t in self.tests):
            raise ValueError("all tests must act on the strategy's qubits")

    @property
    def weights(self) -> np.ndarray:
        return np.array([t.weight for t in self.tests])

    def effects(self) -> list:
        return [t.effect() for t in self.tests]

    def operator(self) -> np.ndarray:
        if self._operator is None:
            op = sum(t.weight * e for t, e in zip(self.tests, self.effects()))
            object.__setattr__(self, "_operator", op)
        return self._operator


def _parity_table(m: int, odd: bool) -> np.ndarray:
    parity = np.array([bin(s).count("1") % 2 for s in range(2**m)])
    return parity == int(odd)


def pauli_test(p: PauliString, weight: float) -> LocalTest:
    """Test projecting onto the +1 eigenspace of a signed Pauli string."""
    table = _parity_table(p.weight, odd=p.sign < 0)
    return LocalTest(p.letters, table, weight, label=str(p))


def stabilizer_strategy(group: StabilizerGroup) -> Strategy:
    w = 1 / (2**group.n - 1)
    tests = [pauli_test(g, w) for _, g in group.nonidentity()]
    return Strategy(tests, group.n, name="stabilizer")


def ghz_subsets(n: int) -> list[tuple[int, ...]]:
    """All even-size subsets of the qubits, ordered by bitmask."""
    out = []
    for mask in range(2**n):
        if bin(mask).count("1") % 2 == 0:
            out.append(tuple(i for i in range(n) if (mask >> i) & 1))
    return out


def ghz_y_pauli(n: int, subset) -> PauliString:
    """``(-1)^t prod_Y Y prod_rest X`` with ``t = |subset|/2 mod 2``; GHZ has eigenvalue +1."""
    letters = "".join("Y" if i in subset else "X" for i in range(n))
    sign = -1 if (len(subset) // 2) % 2 else 1
    return PauliString(letters, sign)


def ghz_strategy(n: int) -> Strategy:
    _check_range(n, 3)
    table0 = np.zeros(2**n, dtype=bool)
    table0[[0, -1]] = True
    tests = [LocalTest("Z" * n, table0, 1 / 3, label="P0")]
    w = 1 / (3 * 2 ** (n - 2))
    for subset in ghz_subsets(n):
        tests.append(pauli_test(ghz_y_pauli(n, subset), w))
    return Strategy(tests, n, name="ghz")


def w_strategy(n: int) -> Strategy:
    _check_range(n, 3)
    popcount = np.array([bin(s).count("1") for s in range(2**n)])
    tests = [LocalTest("Z" * n, popcount == 1, 1 / 2, label="Z1")]
    w = 1 / (2 * comb(n, 2))
    for i, j in itertools.combinations(range(n), 2):
        bases = "".join("X" if k in (i, j) else "Z" for k in range(n))
        bit_i = (np.arange(2**n) >> (n - 1 - i)) & 1
        bit_j = (np.arange(2**n) >> (n - 1 - j)) & 1
        others = popcount - bit_i - bit_j
        table = ((others == 0) & (bit_i == bit_j)) | (others == 1)
        tests.append(LocalTest(bases, table, w, label=f"O{i}{j}"))
    return Strategy(tests, n, name="w")
