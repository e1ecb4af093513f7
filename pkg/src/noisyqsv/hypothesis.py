"""Binomial error rates and sample complexity for symmetric hypothesis testing.

H0: each round passes with probability ``lambda0``; H1: with probability
``lambda0 - nu * epsilon``. H0 is accepted when the pass frequency reaches the
threshold ``f'``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

N_CAP = 10**8
SCAN_WINDOW = 200
_LOG_CUTOFF = 60.0


class InfeasibleError(RuntimeError):
    """No sample count up to the cap reaches the requested error rate."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"no N <= {cap} achieves the requested error rate")


def _check_binom(N: int, p: float):
    if N < 1 or int(N) != N:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def _logpmf(i: np.ndarray, N: int, p: float) -> np.ndarray:
    # binom.logpmf goes through gammaln and loses ~1e-12 at N ~ 1e3; log(pmf) does not
    try:
        pmf = binom.pmf(i, N, p)
    except OverflowError:
        # boost overflows for extreme p (e.g. near the smallest normal double)
        return binom.logpmf(i, N, p)
    with np.errstate(divide="ignore"):
        out = np.log(pmf)
    tiny = pmf < 1e-300
    if tiny.any():
        out[tiny] = binom.logpmf(i[tiny], N, p)
    return out


def _log_tail(lo: int, hi: int, N: int, p: float) -> float:
    """``log sum_{i=lo}^{hi} pmf(i)``, walking outward from the cut in chunks.

    Chunks start at the end nearer the mode; summation stops
    once a chunk lying entirely past the mode falls ``_LOG_CUTOFF`` below the
    running total, since the remaining terms decrease monotonically from there.
    """
    if lo > hi:
        return -math.inf
    mode = math.floor((N + 1) * p)
    chunk = int(4 * math.sqrt(N * p * (1 - p))) + 64
    parts = []
    total = -math.inf
    if abs(hi - mode) <= abs(lo - mode):
        start = hi
        while start >= lo:
            stop = max(lo, start - chunk + 1)
            vals = _logpmf(np.arange(stop, start + 1), N, p)
            s = float(logsumexp(vals))
            parts.append(s)
            total = float(logsumexp(parts))
            if start < mode and s < total - _LOG_CUTOFF:
                break
            start = stop - 1
    else:
        start = lo
        while start <= hi:
            stop = min(hi, start + chunk - 1)
            vals = _logpmf(np.arange(start, stop + 1), N, p)
            s = float(logsumexp(vals))
            parts.append(s)
            total = float(logsumexp(parts))
            if start > mode and s < total - _LOG_CUTOFF:
                break
            start = stop + 1
    return total


def binom_cdf_left(k: float, N: int, p: float) -> float:
    """``Pr(X <= floor(k))`` for ``X ~ Bin(N, p)``, summed in log space."""
    _check_binom(N, p)
    hi = min(math.floor(k), N)
    if hi < 0:
        return 0.0
    return min(1.0, math.exp(_log_tail(0, hi, N, p)))


def binom_cdf_right(k: float, N: int, p: float) -> float:
    """``Pr(X >= ceil(k))`` for ``X ~ Bin(N, p)``, summed in log space."""
    _check_binom(N, p)
    lo = max(math.ceil(k), 0)
    if lo > N:
        return 0.0
    return min(1.0, math.exp(_log_tail(lo, N, N, p)))


def threshold_frequency(lambda0: float, nu: float, epsilon: float) -> float:
    return lambda0 - nu * epsilon / 2


def error_rates(f_prime: float, N: int, p_target: float, p_bad: float) -> tuple[float, float]:
    """(type I, type II) rates at threshold ``f'``: ``F<-(f'N; N, p_target)``, ``F->(f'N; N, p_bad)``."""
    k = f_prime * N
    if not 0 <= k <= N:
        raise ValueError(f"f'N = {k} lies outside [0, {N}]")
    return binom_cdf_left(k, N, p_target), binom_cdf_right(k, N, p_bad)


def decision_error_rates(f_prime: float, N: int, p_target: float, p_bad: float) -> tuple[float, float]:
    """Error rates of the rule "accept iff passes >= f'N".

    Equal to :func:`error_rates` unless ``f'N`` is an integer, where the left
    tail there counts the boundary mass even though the rule accepts it.
    """
    k = f_prime * N
    if not 0 <= k <= N:
        raise ValueError(f"f'N = {k} lies outside [0, {N}]")
    need = math.ceil(k)
    return binom_cdf_left(need - 1, N, p_target), binom_cdf_right(need, N, p_bad)


def p_ave(f_prime, N, lambda0, nu, epsilon, q: float = 0.5) -> float:
    if not 0 <= q <= 1:
        raise ValueError(f"prior q must lie in [0, 1], got {q}")
    t1, t2 = error_rates(f_prime, N, lambda0, lambda0 - nu * epsilon)
    return q * t1 + (1 - q) * t2


def p_sym(f_prime, N, lambda0, nu, epsilon) -> float:
    return p_ave(f_prime, N, lambda0, nu, epsilon, 0.5)


def kl_divergence(f: float, p: float) -> float:
    """Bernoulli relative entropy ``D(f || p)`` with ``0 ln 0 = 0``."""
    if not (0 <= f <= 1 and 0 <= p <= 1):
        raise ValueError(f"arguments must lie in [0, 1], got f={f}, p={p}")

    def term(a, b):
        if a == 0:
            return 0.0
        if b == 0:
            return math.inf
        return a * math.log(a / b)

    return term(f, p) + term(1 - f, 1 - p)


def asymmetric_error(N: int, f: float, nu: float, epsilon: float) -> float:
    """Single-sided error ``exp(-N D(f || 1 - nu eps))`` used by noiseless experiments."""
    return math.exp(-N * kl_divergence(f, 1 - nu * epsilon))


def chernoff_bound(k: float, N: int, p: float) -> float:
    """Chernoff upper bound on ``Pr(X <= k)``, valid for ``k/N <= p``."""
    return math.exp(-N * kl_divergence(k / N, p))


def chernoff_sample_complexity(lambda0, nu, epsilon, delta) -> int:
    """Second-order Chernoff estimate ``ceil(8 (1-lambda0) lambda0 ln(1/delta) / (nu eps)^2)``.

    The prefactor vanishes as ``lambda0 -> 1``; the estimate is then useless
    and a warning is raised.
    """
    _check_plan(lambda0, nu, epsilon, delta)
    if lambda0 >= 1:
        warnings.warn("lambda0 = 1: Chernoff estimate degenerates to 0", RuntimeWarning, stacklevel=2)
    return math.ceil(8 * (1 - lambda0) * lambda0 * math.log(1 / delta) / (nu * epsilon) ** 2)


def noiseless_sample_complexity(nu, epsilon, delta) -> int:
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if not 0 < nu * epsilon < 1:
        raise ValueError(f"nu * epsilon must lie in (0, 1), got {nu * epsilon}")
    return max(1, math.ceil(math.log(1 / delta) / -math.log1p(-nu * epsilon)))


def _check_plan(lambda0, nu, epsilon, delta):
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not nu > 0:
        raise ValueError(f"spectral gap must be positive, got {nu}")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0 < lambda0 - nu * epsilon:
        raise ValueError("lambda0 - nu * epsilon must be positive")
    if lambda0 > 1:
        raise ValueError(f"lambda0 must not exceed 1, got {lambda0}")


def separated_sample_complexity(p_target: float, p_bad: float, delta: float, cap: int = N_CAP) -> int:
    """Smallest ``N`` with mean error ``(type I + type II)/2 <= delta`` at ``f' = (p_target + p_bad)/2``.

    Search: seed from the Chernoff estimate, bracket by doubling, bisect, then
    scan ``SCAN_WINDOW`` values below the result because the discrete tails are
    not monotone in ``N``.
    """
    if not p_target > p_bad:
        raise ValueError(f"target pass probability {p_target} must exceed {p_bad}")
    f_prime = (p_target + p_bad) / 2

    def ok(N):
        t1, t2 = error_rates(f_prime, N, p_target, p_bad)
        return (t1 + t2) / 2 <= delta

    gap = p_target - p_bad
    seed = 8 * (1 - p_target) * p_target * math.log(1 / delta) / gap**2
    if seed < 1:
        seed = math.log(1 / delta) / gap
    seed = int(min(max(seed, 1), cap))

    if ok(seed):
        hi = seed
        lo = hi // 2
        while lo >= 1 and ok(lo):
            hi, lo = lo, lo // 2
    else:
        lo = seed
        hi = min(2 * seed, cap)
        while not ok(hi):
            if hi >= cap:
                raise InfeasibleError(cap)
            lo, hi = hi, min(2 * hi, cap)
    # invariant: ok(hi), and lo == 0 or not ok(lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    best = hi
    for N in range(hi - 1, max(hi - 1 - SCAN_WINDOW, 0), -1):
        if ok(N):
            best = N
    return best


def sample_complexity(lambda0, nu, epsilon, delta, cap: int = N_CAP) -> int:
    _check_plan(lambda0, nu, epsilon, delta)
    return separated_sample_complexity(lambda0, lambda0 - nu * epsilon, delta, cap)


@dataclass(frozen=True)
class TestPlan:
    lambda0: float
    nu: float
    epsilon: float
    delta: float
    f_prime: float
    N: int
    q_prior: float = 0.5

    __test__ = False  # not a pytest class

    @property
    def p_target(self) -> float:
        return self.lambda0

    @property
    def p_bad(self) -> float:
        return self.lambda0 - self.nu * self.epsilon

    def error_rates(self) -> tuple[float, float]:
        return error_rates(self.f_prime, self.N, self.p_target, self.p_bad)

    def decision_error_rates(self) -> tuple[float, float]:
        return decision_error_rates(self.f_prime, self.N, self.p_target, self.p_bad)

    def p_ave(self) -> float:
        t1, t2 = self.error_rates()
        return self.q_prior * t1 + (1 - self.q_prior) * t2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p_target"] = self.p_target
        d["p_bad"] = self.p_bad
        d["type1"], d["type2"] = self.error_rates()
        d["p_ave"] = self.p_ave()
        return d


def plan(lambda0, nu, epsilon, delta, q_prior: float = 0.5, N: int | None = None) -> TestPlan:
    """Threshold and sample count for the distinguishable case; ``N`` may be fixed by the caller."""
    _check_plan(lambda0, nu, epsilon, delta)
    if N is None:
        N = sample_complexity(lambda0, nu, epsilon, delta)
    return TestPlan(lambda0, nu, epsilon, delta, threshold_frequency(lambda0, nu, epsilon), N, q_prior)
