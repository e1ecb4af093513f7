"""Dense complex linear algebra for small qubit registers.

Operators are plain ``numpy`` arrays of shape ``(d, d)`` with ``d = 2**n``.
Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
computational-basis index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 12

HERMITIAN_ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}

# single-letter products: (a, b) -> (phase, letter) with a @ b = phase * letter
_LETTER_PRODUCT = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"),
    ("Z", "Y"): (-1j, "X"),
    ("X", "Z"): (-1j, "Y"),
}


class NonHermitianError(ValueError):
    pass


class PauliParseError(ValueError):
    def __init__(self, text: str, position: int, char: str):
        self.text = text
        self.position = position
        self.char = char
        super().__init__(
            f"invalid character {char!r} at position {position} in Pauli string {text!r}"
        )


@dataclass(frozen=True)
class PauliString:
    """A signed tensor product of single-qubit Paulis, e.g. ``-XZZXI``."""

    letters: str
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        for pos, ch in enumerate(self.letters):
            if ch not in PAULI_MATRICES:
                raise PauliParseError(self.letters, pos, ch)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.letters) if ch != "I")

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_identity(self) -> bool:
        return self.weight == 0

    def commutes_with(self, other: PauliString) -> bool:
        clashes = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0

    def __mul__(self, other: PauliString) -> PauliString:
        phase, letters = pauli_product(self, other)
        if phase.imag != 0:
            raise ValueError(f"{self} and {other} anticommute; product is not Hermitian")
        return PauliString(letters, int(phase.real))

    def __str__(self):
        return ("-" if self.sign < 0 else "") + self.letters


def parse_pauli(text: str) -> PauliString:
    """Parse ``"XZZXI"`` or ``"-XX"`` (an optional leading ``+`` is accepted)."""
    body = text.strip()
    offset = len(text) - len(text.lstrip())
    sign = 1
    if body and body[0] in "+-":
        sign = -1 if body[0] == "-" else 1
        body = body[1:]
        offset += 1
    if not body:
        raise PauliParseError(text, offset, "")
    for pos, ch in enumerate(body):
        if ch not in PAULI_MATRICES:
            raise PauliParseError(text, pos + offset, ch)
    return PauliString(body, sign)


def pauli_product(a: PauliString, b: PauliString) -> tuple[complex, str]:
    """Exact product ``a @ b`` as (phase in {±1, ±i}, letters)."""
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    phase = complex(a.sign * b.sign)
    out = []
    for p, q in zip(a.letters, b.letters):
        if p == "I":
            out.append(q)
        elif q == "I":
            out.append(p)
        elif p == q:
            out.append("I")
        else:
            ph, r = _LETTER_PRODUCT[(p, q)]
            phase *= ph
            out.append(r)
    return phase, "".join(out)


def check_qubits(n: int) -> int:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    return n


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return check_qubits(n)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_to_matrix(p: PauliString | str) -> np.ndarray:
    if isinstance(p, str):
        p = parse_pauli(p)
    check_qubits(p.n)
    return p.sign * kron_all(PAULI_MATRICES[ch] for ch in p.letters)


def as_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``(m + m^†)/2``; asymmetry above ``atol`` is an error, not repaired."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if asym > atol:
        raise NonHermitianError(f"matrix is not Hermitian: max |M - M^dag| = {asym:.3e}")
    return (m + m.conj().T) / 2


def _fix_phase(vecs: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    # first component with |v_i| > atol made real positive
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = int(np.argmax(np.abs(col) > atol))
        c = col[idx]
        if abs(c) > 0:
            vecs[:, j] = col * (abs(c) / c)
    return vecs


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns.

    Each eigenvector's first non-negligible component is made real positive so
    the output is deterministic for a given input.
    """
    h = as_hermitian(m)
    vals, vecs = np.linalg.eigh(h)
    order = np.argsort(-vals, kind="stable")
    return vals[order], _fix_phase(vecs[:, order])


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def as_state(v, atol: float = 1e-12) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1) > atol:
        raise ValueError(f"state vector is not normalized: |v| = {norm!r}")
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def complement_basis(psi) -> np.ndarray:
    """Orthonormal columns spanning the orthogonal complement of ``psi``."""
    psi = normalize(psi)
    _, _, vh = np.linalg.svd(psi.conj()[None, :])
    return vh[1:].conj().T


def as_density_matrix(rho, atol: float = 1e-10) -> np.ndarray:
    rho = as_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1) > atol:
        raise ValueError(f"density matrix trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -atol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def expectation(op: np.ndarray, psi: np.ndarray) -> float:
    val = np.vdot(psi, op @ psi)
    return float(val.real)


def fidelity(rho, psi) -> float:
    """Overlap ``<psi| rho |psi>`` of a density matrix with a pure state."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs psi {psi.size}")
    val = np.vdot(psi, rho @ psi)
    if abs(val.imag) > 1e-12:
        raise NonHermitianError(f"fidelity has imaginary part {val.imag:.3e}")
    return float(val.real)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))
