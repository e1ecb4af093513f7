"""Worst-case pass probability over states with bounded fidelity.

``p(eps) = max Tr(rho Omega)`` subject to ``<psi|rho|psi> <= 1 - eps``. With a
single scalar constraint, strong duality gives

    p(eps) = min_{mu >= 0} lambda_max(Omega - mu |psi><psi|) + mu (1 - eps),

a convex 1-D problem solved here by golden-section search. A primal witness is
rebuilt from the top eigenspace at the optimum so every answer carries a
duality-gap certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from . import hypothesis
from .opcore import as_hermitian, complement_basis, projector
from .spectral import trace_condition

GAP_TOL = 1e-7
DEGENERACY_TOL = 1e-8
_INVPHI = (math.sqrt(5) - 1) / 2


class SolverError(RuntimeError):
    pass


class NotVerifiableError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WorstCaseResult:
    epsilon: float
    p_eps: float
    mu_star: float
    witness: np.ndarray
    duality_gap: float
    primal_value: float
    witness_fidelity: float

    @property
    def converged(self) -> bool:
        return self.duality_gap <= GAP_TOL

    def row(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "p_eps": self.p_eps,
            "mu_star": self.mu_star,
            "gap": self.duality_gap,
        }


@dataclass(frozen=True)
class ThresholdResult:
    epsilon_th: float | None
    lambda_prime: float
    exists_check: bool
    p_one: float

    def to_dict(self) -> dict:
        return {
            "epsilon_th": self.epsilon_th,
            "lambda_prime": self.lambda_prime,
            "exists_check": self.exists_check,
            "p_one": self.p_one,
        }


def _top(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(a)
    return vals[::-1], vecs[:, ::-1]


def _space_candidates(vals, vecs, psi) -> list[np.ndarray]:
    """Max- and min-fidelity unit vectors of the (near-)degenerate top eigenspace."""
    top = vals[0]
    k = int(np.sum(vals >= top - DEGENERACY_TOL))
    space = vecs[:, :k]
    amps = space.conj().T @ psi
    v = space @ amps
    norm = math.sqrt(float(np.vdot(v, v).real))
    out = [v / norm if norm > 1e-150 else space[:, 0]]
    if k > 1:
        # directions of the space orthogonal to the projection of psi have zero overlap
        out.append(space @ null_space(amps.conj()[None, :])[:, 0])
    return out


def _best_feasible(candidates, omega, psi, cap) -> np.ndarray:
    """Best single candidate or two-point mixture with fidelity at most ``cap``."""
    fids = [float(abs(np.vdot(psi, c)) ** 2) for c in candidates]
    vals = [float(np.vdot(c, omega @ c).real) for c in candidates]
    best, best_val = None, -math.inf
    for i, (f, v) in enumerate(zip(fids, vals)):
        if f <= cap and v > best_val:
            best, best_val = projector(candidates[i]), v
    for i, (fi, vi) in enumerate(zip(fids, vals)):
        for j, (fj, vj) in enumerate(zip(fids, vals)):
            if fi > cap >= fj:
                t = (cap - fj) / (fi - fj)
                val = t * vi + (1 - t) * vj
                if val > best_val:
                    best = t * projector(candidates[i]) + (1 - t) * projector(candidates[j])
                    best_val = val
    if best is None:
        raise SolverError("no feasible witness among the candidate states")
    return best


def worst_case_pass_probability(omega, psi, epsilon: float, tol: float = 1e-13) -> WorstCaseResult:
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    omega = as_hermitian(omega)
    psi = np.asarray(psi, dtype=complex)
    if omega.shape != (psi.size, psi.size):
        raise ValueError(f"operator shape {omega.shape} does not match state dimension {psi.size}")
    pp = projector(psi)
    cap = 1 - epsilon

    def dual(mu):
        vals, vecs = _top(omega - mu * pp)
        return vals[0] + mu * cap, vals, vecs

    def slope(vals, vecs):
        # subgradient of the dual at mu, using the overlap of the leading eigenvector
        return cap - abs(np.vdot(psi, vecs[:, 0])) ** 2

    lam_max = float(np.linalg.eigvalsh(omega)[-1])
    mu_limit = 1e6 * max(abs(lam_max), 1.0)

    if epsilon == 1:
        # infimum reached only as mu -> inf: top eigenvalue on the complement of psi
        basis = complement_basis(psi)
        vals, vecs = _top(basis.conj().T @ omega @ basis)
        w = projector(basis @ vecs[:, 0])
        val = float(np.trace(w @ omega).real)
        fid = float(np.vdot(psi, w @ psi).real)
        return WorstCaseResult(1.0, float(vals[0]), math.inf, w, float(vals[0]) - val, val, fid)

    g0, vals0, vecs0 = dual(0.0)
    if slope(vals0, vecs0) >= 0 or cap >= 1:
        mu_star, best = 0.0, g0
        vals, vecs = vals0, vecs0
        ends = []
    else:
        lo, hi = 0.0, 1.0
        _, vh, wh = dual(hi)
        while slope(vh, wh) < 0:
            lo, hi = hi, 2 * hi
            if hi > mu_limit:
                raise SolverError(f"dual bracket expansion passed mu = {mu_limit:.3g}")
            _, vh, wh = dual(hi)
        s_lo, s_hi = lo, hi
        a, b = lo, hi
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        gc, gd = dual(c)[0], dual(d)[0]
        while b - a > tol * (1 + b):
            if gc <= gd:
                b, d, gd = d, c, gc
                c = b - _INVPHI * (b - a)
                gc = dual(c)[0]
            else:
                a, c, gc = c, d, gd
                d = a + _INVPHI * (b - a)
                gd = dual(d)[0]
        mu_star = (a + b) / 2
        best, vals, vecs = dual(mu_star)
        for cand in (a, b):
            gv = dual(cand)
            if gv[0] < best:
                mu_star, (best, vals, vecs) = cand, gv
        # witness ends: leading eigenvectors just either side of the subgradient sign change
        for _ in range(200):
            if s_hi - s_lo <= tol * (1 + s_hi):
                break
            mid = (s_lo + s_hi) / 2
            _, vm, wm = dual(mid)
            if slope(vm, wm) < 0:
                s_lo = mid
            else:
                s_hi = mid
        ends = [dual(m)[2][:, 0] for m in (s_lo, s_hi)]

    witness = _best_feasible(_space_candidates(vals, vecs, psi) + ends, omega, psi, cap)
    primal = float(np.trace(witness @ omega).real)
    fid = float(np.vdot(psi, witness @ psi).real)
    return WorstCaseResult(
        epsilon=float(epsilon),
        p_eps=float(best),
        mu_star=float(mu_star),
        witness=witness,
        duality_gap=float(best - primal),
        primal_value=primal,
        witness_fidelity=fid,
    )


def p_curve(omega, psi, epsilons) -> list[WorstCaseResult]:
    return [worst_case_pass_probability(omega, psi, float(e)) for e in epsilons]


def infidelity_threshold(omega, psi, tol: float = 1e-6) -> ThresholdResult:
    """Largest ``eps`` with ``p(eps) >= lambda'``, or ``None`` when no crossing exists."""
    omega = as_hermitian(omega)
    psi = np.asarray(psi, dtype=complex)
    n = int(round(math.log2(len(psi))))
    lam_prime = float(np.vdot(psi, omega @ psi).real)
    exists = trace_condition(omega, lam_prime, n)
    p_one = worst_case_pass_probability(omega, psi, 1.0).p_eps
    if not exists or p_one >= lam_prime:
        return ThresholdResult(None, lam_prime, exists, p_one)
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if worst_case_pass_probability(omega, psi, mid).p_eps >= lam_prime:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(lo, lam_prime, exists, p_one)


def nondistinguishable_plan(
    omega, psi, epsilon: float, delta: float, q_prior: float = 0.5, min_separation: float = 1e-6
) -> hypothesis.TestPlan:
    """Test plan separating the target (pass rate ``lambda'``) from the worst case ``p(eps)``."""
    omega = as_hermitian(omega)
    psi = np.asarray(psi, dtype=complex)
    lam_prime = float(np.vdot(psi, omega @ psi).real)
    p_eps = worst_case_pass_probability(omega, psi, epsilon).p_eps
    sep = lam_prime - p_eps
    if sep <= min_separation:
        raise NotVerifiableError(
            f"not verifiable at epsilon={epsilon}: worst-case pass probability {p_eps:.9f} "
            f"is not below the target's {lam_prime:.9f}"
        )
    N = hypothesis.separated_sample_complexity(lam_prime, p_eps, delta)
    return hypothesis.TestPlan(
        lambda0=lam_prime,
        nu=sep / epsilon,
        epsilon=epsilon,
        delta=delta,
        f_prime=(lam_prime + p_eps) / 2,
        N=N,
        q_prior=q_prior,
    )
