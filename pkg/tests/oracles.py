"""Independent reference implementations used only by the tests."""

import math
from fractions import Fraction

import gmpy2
import numpy as np


def exact_binom_tail(lo: int, hi: int, N: int, p: float) -> float:
    """``sum_{i=lo}^{hi} C(N,i) p^i (1-p)^(N-i)`` in exact integer arithmetic.

    A double is a dyadic rational ``a / 2^e``, so every term shares the
    denominator ``2^(e N)`` and the whole sum is one big-integer ratio.
    """
    lo, hi = max(lo, 0), min(hi, N)
    if lo > hi:
        return 0.0
    frac = Fraction(p)
    e = frac.denominator.bit_length() - 1
    a = gmpy2.mpz(frac.numerator)
    b = gmpy2.mpz(frac.denominator) - a
    b_pows = [gmpy2.mpz(1)]
    for _ in range(N - lo):
        b_pows.append(b_pows[-1] * b)
    total = gmpy2.mpz(0)
    a_pow = a**lo
    comb = gmpy2.comb(N, lo)
    for i in range(lo, hi + 1):
        total += comb * a_pow * b_pows[N - i]
        a_pow *= a
        comb = comb * (N - i) // (i + 1)
    return float(gmpy2.mpq(total, gmpy2.mpz(2) ** (e * N)))


def exact_left(k: float, N: int, p: float) -> float:
    return exact_binom_tail(0, math.floor(k), N, p)


def exact_right(k: float, N: int, p: float) -> float:
    return exact_binom_tail(math.ceil(k), N, N, p)


def grid_worst_case(omega: np.ndarray, psi: np.ndarray, eps: float, points: int = 200_000) -> float:
    """Max of ``Tr(rho omega)`` over qubit states with ``<psi|rho|psi> <= 1 - eps``.

    In Bloch coordinates aligned with ``psi`` the feasible set is a spherical
    cap plus its convex hull; a linear objective peaks either at the
    unconstrained optimum (if feasible) or on the cap's boundary circle, which
    is scanned on a uniform grid.
    """
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    # rotate so psi sits at the north pole
    perp = np.array([-np.conj(psi[1]), np.conj(psi[0])])
    u = np.column_stack([psi, perp])
    om = u.conj().T @ omega @ u
    c0 = np.trace(om).real / 2
    r = np.array([np.trace(om @ s).real / 2 for s in (sx, sy, sz)])
    best = -np.inf
    # unconstrained optimum: Bloch vector along r
    norm = np.linalg.norm(r)
    top = r / norm if norm > 0 else np.array([0, 0, 1.0])
    if (1 + top[2]) / 2 <= 1 - eps + 1e-15:
        best = c0 + norm
    z = 1 - 2 * eps
    rho = math.sqrt(max(0.0, 1 - z * z))
    phi = np.linspace(0, 2 * np.pi, points, endpoint=False)
    vals = c0 + r[0] * rho * np.cos(phi) + r[1] * rho * np.sin(phi) + r[2] * z
    return float(max(best, vals.max()))




def mp_binom_tail(lo: int, hi: int, N: int, p: float) -> float:
    """Same sum in 1024-bit floating point via the term ratio recurrence.

    Accumulated relative rounding error is below ``8 N 2^-1024``, so the
    result is exact to double precision; far cheaper than the integer form.
    """
    lo, hi = max(lo, 0), min(hi, N)
    if lo > hi:
        return 0.0
    if p == 0 or p == 1:
        return exact_binom_tail(lo, hi, N, p)
    with gmpy2.context(precision=1024):
        mp_p = gmpy2.mpfr(p)
        mp_q = 1 - mp_p
        ratio = mp_p / mp_q
        term = gmpy2.mpfr(gmpy2.comb(N, lo)) * mp_p**lo * mp_q ** (N - lo)
        total = gmpy2.mpfr(0)
        for i in range(lo, hi + 1):
            total += term
            term = term * (N - i) / (i + 1) * ratio
        return float(total)


def mp_left(k: float, N: int, p: float) -> float:
    return mp_binom_tail(0, math.floor(k), N, p)


def mp_right(k: float, N: int, p: float) -> float:
    return mp_binom_tail(math.ceil(k), N, N, p)
