"""Spectral analysis of noisy strategies and closed-form spectra for the
stabilizer and GHZ constructions."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .noise import BASES, QubitNoiseParams
from .opcore import as_hermitian, complement_basis, hermitian_eig
from .states import StabilizerGroup, ghz_subsets, ghz_y_pauli

DEFAULT_TOL = 1e-9
CLAMP_TOL = 1e-10


class SpectrumError(ValueError):
    pass


class GhzConditionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectralReport:
    lambda0: float
    lambda1: float
    nu: float
    lambda_prime: float
    target_is_dominant: bool
    residual: float
    distinguishable: bool
    tol: float

    def to_dict(self) -> dict:
        return asdict(self)


def spectrum(omega) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a strategy operator with its spectrum checked to lie in [0, 1]."""
    vals, vecs = hermitian_eig(omega)
    if vals[-1] < -CLAMP_TOL or vals[0] > 1 + CLAMP_TOL:
        raise SpectrumError(
            f"strategy spectrum [{vals[-1]:.3e}, {vals[0]:.12f}] leaves [0, 1]; assembly bug"
        )
    return np.clip(vals, 0, None), vecs


def analyze(omega, psi, tol: float = DEFAULT_TOL) -> SpectralReport:
    omega = as_hermitian(omega)
    psi = np.asarray(psi, dtype=complex)
    vals, _ = spectrum(omega)
    lam0, lam1 = float(vals[0]), float(vals[1])
    residual = float(np.linalg.norm(omega @ psi - lam0 * psi))
    lam_prime = float(np.vdot(psi, omega @ psi).real)
    dominant = residual <= tol
    nu = lam0 - lam1
    return SpectralReport(
        lambda0=lam0,
        lambda1=lam1,
        nu=nu,
        lambda_prime=lam_prime,
        target_is_dominant=dominant,
        residual=residual,
        distinguishable=dominant and nu > tol,
        tol=tol,
    )


def second_eigenvector(omega, psi) -> np.ndarray:
    """Top eigenvector of ``omega`` restricted to the complement of ``psi``.

    Under the distinguishable conditions this is an eigenvector for the
    second-largest eigenvalue.
    """
    omega = as_hermitian(omega)
    basis = complement_basis(psi)
    _, vecs = hermitian_eig(basis.conj().T @ omega @ basis)
    v = basis @ vecs[:, 0]
    idx = int(np.argmax(np.abs(v) > 1e-10))
    return v * (abs(v[idx]) / v[idx])


class AnalyticSpectrum(NamedTuple):
    p_w: np.ndarray
    lambda0: float
    lambda1: float


def stabilizer_noise_factors(group: StabilizerGroup, params: QubitNoiseParams) -> np.ndarray:
    """``g_k`` for every non-identity group element, in element order."""
    if not params.is_symmetric:
        raise ValueError("noise factors are defined only for the symmetric model (eta == q)")
    return np.array([params.pauli_factor(g) for _, g in group.nonidentity()])


def stabilizer_analytic_spectrum(group: StabilizerGroup, factors) -> AnalyticSpectrum:
    """Eigenvalue ``p_w`` of the noisy stabilizer strategy on each stabilizer basis state."""
    factors = np.asarray(factors, dtype=float)
    n = group.n
    if factors.shape != (2**n - 1,):
        raise ValueError(f"expected {2**n - 1} noise factors, got {factors.size}")
    k = np.arange(1, 2**n)
    w = np.arange(2**n)
    dots = np.array([[bin(int(a) & int(b)).count("1") & 1 for b in k] for a in w])
    signs = 1 - 2 * dots
    p_w = (0.5 * (1 + signs * factors)).sum(axis=1) / (2**n - 1)
    return AnalyticSpectrum(p_w, float(p_w[0]), float(p_w[1:].max()))


def ghz_noise_factors(n: int, params: QubitNoiseParams) -> np.ndarray:
    """``g_Y`` for every even subset, ordered as the tests of ``ghz_strategy``."""
    if not params.is_symmetric:
        raise ValueError("noise factors are defined only for the symmetric model (eta == q)")
    return np.array([params.pauli_factor(ghz_y_pauli(n, s)) for s in ghz_subsets(n)])


def ghz_z_eta(params: QubitNoiseParams) -> np.ndarray:
    return params.eta[:, BASES.index("Z")]


def check_eq53(eta_z) -> bool:
    """Whether the noisy all-Z test keeps GHZ's eigenvalue uniquely largest.

    Checks ``(prod_{not A}(1-eta) - prod_{not A} eta) * (prod_A(1-eta) - prod_A eta) > 0``
    for every proper non-empty qubit subset ``A``.
    """
    eta = np.asarray(eta_z, dtype=float)
    n = eta.size
    for r in range(1, n):
        for subset in itertools.combinations(range(n), r):
            mask = np.zeros(n, dtype=bool)
            mask[list(subset)] = True
            inside = np.prod(1 - eta[mask]) - np.prod(eta[mask])
            outside = np.prod(1 - eta[~mask]) - np.prod(eta[~mask])
            if not inside * outside > 0:
                return False
    return True


def ghz_analytic_lambda0(eta_z, g_y) -> float:
    """Dominant eigenvalue of the noisy GHZ strategy from its closed form.

    Emits :class:`GhzConditionWarning` when the all-Z condition fails; the value
    is still returned.
    """
    eta = np.asarray(eta_z, dtype=float)
    g_y = np.asarray(g_y, dtype=float)
    n = eta.size
    if g_y.size != 2 ** (n - 1):
        raise ValueError(f"expected {2 ** (n - 1)} subset factors, got {g_y.size}")
    if not check_eq53(eta):
        warnings.warn(
            "all-Z readout noise breaks GHZ dominance; closed form may not be the top eigenvalue",
            GhzConditionWarning,
            stacklevel=2,
        )
    p0 = np.prod(1 - eta) + np.prod(eta)
    return float(p0 / 3 + np.sum(0.5 * (g_y + 1)) / (3 * 2 ** (n - 2)))


def trace_condition(omega, lambda_prime: float, n: int) -> bool:
    """Necessary condition ``Tr(omega) < 2**n * lambda'`` for an infidelity threshold."""
    return bool(np.trace(np.asarray(omega)).real < 2**n * lambda_prime)
