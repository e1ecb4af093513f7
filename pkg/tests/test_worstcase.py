import numpy as np
import pytest

from noisyqsv import hypothesis, opcore, spectral, states
from noisyqsv import worstcase as wc
from oracles import grid_worst_case


@pytest.mark.parametrize("eps", [1e-3, 1e-2, 1e-1])
def test_distinguishable_linear_law(code5_noisy, eps):
    psi, om = code5_noisy
    r = spectral.analyze(om, psi)
    res = wc.worst_case_pass_probability(om, psi, eps)
    assert res.p_eps == pytest.approx(r.lambda0 - r.nu * eps, abs=1e-8)
    assert res.converged
    assert res.witness_fidelity <= 1 - eps + 1e-9


def test_eps_zero_is_lambda0(w3_instance):
    psi, om = w3_instance
    res = wc.worst_case_pass_probability(om, psi, 0.0)
    assert res.p_eps == pytest.approx(spectral.analyze(om, psi).lambda0, abs=1e-12)


def test_eps_one_projected_operator(w3_instance):
    psi, om = w3_instance
    q = np.eye(8) - opcore.projector(psi)
    expected = np.linalg.eigvalsh(q @ om @ q)[-1]
    res = wc.worst_case_pass_probability(om, psi, 1.0)
    assert res.p_eps == pytest.approx(expected, abs=1e-12)
    assert res.witness_fidelity == pytest.approx(0, abs=1e-12)


def test_witness_is_feasible_state(w3_instance):
    psi, om = w3_instance
    for eps in (0.05, 0.3, 0.7):
        res = wc.worst_case_pass_probability(om, psi, eps)
        rho = opcore.as_density_matrix(res.witness)
        assert opcore.fidelity(rho, psi) <= 1 - eps + 1e-9
        assert res.primal_value == pytest.approx(res.p_eps, abs=1e-7)


def test_random_instances_close_duality_gap():
    rng = np.random.default_rng(2024)
    for i in range(40):
        d = 4 if i % 2 else 8
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        om = a @ a.conj().T
        om /= np.linalg.eigvalsh(om)[-1]
        res = wc.worst_case_pass_probability(om, opcore.random_state(d, rng), float(rng.uniform()))
        assert abs(res.duality_gap) <= wc.GAP_TOL


def test_degenerate_top_eigenspace():
    # the target sits inside a degenerate top eigenspace, so the blend witness is needed
    om = np.diag([1.0, 1.0, 0.2, 0.1])
    psi = np.array([1, 0, 0, 0], dtype=complex)
    res = wc.worst_case_pass_probability(om, psi, 0.3)
    assert res.p_eps == pytest.approx(1.0, abs=1e-9)
    assert res.witness_fidelity <= 0.7 + 1e-9


def test_qubit_grid_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        om = a @ a.conj().T
        om /= np.linalg.eigvalsh(om)[-1]
        psi = opcore.random_state(2, rng)
        eps = float(rng.uniform())
        got = wc.worst_case_pass_probability(om, psi, eps).p_eps
        assert got == pytest.approx(grid_worst_case(om, psi, eps), abs=1e-6)


def test_curve_non_increasing(w3_instance):
    psi, om = w3_instance
    ps = [r.p_eps for r in wc.p_curve(om, psi, np.linspace(0, 1, 41))]
    assert all(b <= a + 1e-10 for a, b in zip(ps, ps[1:]))


def test_epsilon_range_checked(w3_instance):
    psi, om = w3_instance
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            wc.worst_case_pass_probability(om, psi, bad)


def test_shape_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        wc.worst_case_pass_probability(np.eye(4), np.array([1, 0]), 0.1)


def test_threshold_noiseless_is_zero(code5):
    om = states.stabilizer_strategy(code5).operator()
    res = wc.infidelity_threshold(om, states.stabilizer_state(code5))
    assert res.epsilon_th == pytest.approx(0, abs=1e-6)


def test_threshold_flat_operator_is_none():
    res = wc.infidelity_threshold(np.eye(4) / 2, states.ghz(2))
    assert res.epsilon_th is None
    assert not res.exists_check


def test_w3_threshold(w3_instance):
    psi, om = w3_instance
    res = wc.infidelity_threshold(om, psi)
    assert 0 < res.epsilon_th < 0.3
    assert res.exists_check
    lo = wc.worst_case_pass_probability(om, psi, res.epsilon_th - 1e-3).p_eps
    hi = wc.worst_case_pass_probability(om, psi, res.epsilon_th + 1e-3).p_eps
    assert lo > res.lambda_prime > hi


def test_nondistinguishable_plan_w3(w3_instance):
    psi, om = w3_instance
    plan = wc.nondistinguishable_plan(om, psi, 0.1, 0.05)
    lam_prime = spectral.analyze(om, psi).lambda_prime
    p01 = wc.worst_case_pass_probability(om, psi, 0.1).p_eps
    assert lam_prime > p01
    assert plan.p_bad == pytest.approx(p01)
    assert 1 <= plan.N < hypothesis.N_CAP
    assert plan.p_ave() <= 0.05


def test_nondistinguishable_plan_below_threshold(w3_instance):
    psi, om = w3_instance
    eps_th = wc.infidelity_threshold(om, psi).epsilon_th
    with pytest.raises(wc.NotVerifiableError):
        wc.nondistinguishable_plan(om, psi, eps_th, 0.05)
    with pytest.raises(wc.NotVerifiableError):
        wc.nondistinguishable_plan(om, psi, eps_th / 2, 0.05)


def test_nondistinguishable_plan_reduces_to_standard(code5_noisy):
    psi, om = code5_noisy
    r = spectral.analyze(om, psi)
    a = wc.nondistinguishable_plan(om, psi, 0.05, 0.05)
    b = hypothesis.plan(r.lambda0, r.nu, 0.05, 0.05)
    assert a.f_prime == pytest.approx(b.f_prime, abs=1e-9)
    assert a.nu == pytest.approx(b.nu, abs=1e-7)
    assert a.N == b.N


def test_result_rows(w3_instance):
    psi, om = w3_instance
    row = wc.worst_case_pass_probability(om, psi, 0.2).row()
    assert set(row) == {"epsilon", "p_eps", "mu_star", "gap"}
