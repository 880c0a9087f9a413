import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from queue_persuasion import incentives, lp_builder, simplex
from queue_persuasion.model import ModelConfig, Policy, RewardFn, reference_config
from queue_persuasion.stationary import stationary_distribution


def test_small_lp_dimensions():
    p = lp_builder.build_lp(reference_config(x_max=1))
    assert p.n_vars == 9 == lp_builder.n_variables(1)
    labels = p.eq_labels
    assert sum(l.startswith("flow") for l in labels) == 1
    assert labels.count("closure") == 1
    assert sum(l.startswith("type") for l in labels) == 4
    assert labels[-1] == "mass"
    assert p.n_eq == 7


def test_mass_row_covers_every_gamma():
    p = lp_builder.build_lp(reference_config(x_max=4))
    row = p.A_eq[p.eq_labels.index("mass")]
    assert np.array_equal(row, np.r_[np.ones(20), 0.0])
    assert p.b_eq[p.eq_labels.index("mass")] == 1.0


def test_var_index_layout():
    N = 3
    seen = {lp_builder.var_index(s, i, x, N) for s in (0, 1) for i in (1, 2) for x in range(N + 1)}
    assert seen == set(range(4 * (N + 1)))
    p = lp_builder.build_lp(reference_config(x_max=N))
    assert p.names[lp_builder.var_index(1, 2, 3, N)] == "g[1,2,3]"


def test_non_uniform_prior_rejected():
    cfg = ModelConfig(lam=1.2, price=0.0, reward=RewardFn.quadratic(50), type_prior=0.3)
    with pytest.raises(lp_builder.UnsupportedConfigError):
        lp_builder.build_lp(cfg)


def test_recover_policy_examples():
    g = np.zeros((2, 2, 3))
    g[1, 0, 0] = g[0, 0, 0] = 0.25
    g[1, 1, 0] = 0.5
    g[1, 0, 1] = 0.0
    pol, unreachable = lp_builder.recover_policy(lp_builder.OccupationMeasure(g))
    assert pol.admit[0, 0] == 0.5 and pol.admit[1, 0] == 1.0
    assert unreachable == [1, 2]
    assert np.all(pol.admit[:, 1:] == 0)


def _feasible_point(data):
    x_max = data.draw(st.integers(2, 40))
    cut = data.draw(st.integers(0, x_max))
    lam = data.draw(st.floats(0.2, 2.0))
    price = data.draw(st.floats(0.0, 1.0))
    cfg = ModelConfig(lam=lam, price=price, reward=RewardFn.quadratic(data.draw(st.floats(2, 60))),
                      x_max=x_max)
    pol = Policy.threshold(x_max, cut)
    mu = stationary_distribution(pol, lam, reward=cfg.reward)
    q1, _ = incentives.allocations(pol, mu, cfg.reward)
    u = max(mu.vbar - price, 2 * mu.vbar - q1 - price, 0.0, -q1) + data.draw(st.floats(0, 0.5))
    return cfg, pol, mu, -u


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_embedded_policies_are_feasible_and_round_trip(data):
    cfg, pol, mu, t0 = _feasible_point(data)
    p = lp_builder.build_lp(cfg)
    z = lp_builder.embed(pol, mu, t0)
    assert simplex.check_solution(p, z).max_residual < 1e-12
    gamma, t0_back = lp_builder.split_values(z, cfg.x_max)
    assert t0_back == pytest.approx(t0)
    back, _ = lp_builder.recover_policy(gamma)
    reach = mu.mu > 1e-8
    assert np.allclose(back.admit[:, reach], pol.admit[:, reach], atol=1e-9)
    marg = lp_builder.recover_marginals(gamma, cfg.lam, back)
    assert np.max(np.abs(marg.mu - mu.mu)) < 1e-12
    # LP objective equals lam * (t0 + q2) for the embedded mechanism
    q1, q2 = incentives.allocations(pol, mu, cfg.reward)
    expect = incentives.revenue(incentives.build_taxes(t0, q1, q2), cfg.lam)
    assert p.c @ z == pytest.approx(expect, abs=1e-12)


def test_recover_marginals_flags_inconsistent_measure():
    g = np.zeros((2, 2, 3))
    g[:, :, 0] = 0.125
    g[:, :, 2] = 0.125  # mass at 2 with nothing at 1
    gamma = lp_builder.OccupationMeasure(g)
    pol, _ = lp_builder.recover_policy(gamma)
    with pytest.raises(lp_builder.InconsistentSolutionError):
        lp_builder.recover_marginals(gamma, 1.0, pol)


def test_export_tableau(tmp_path):
    p = lp_builder.build_lp(reference_config(x_max=3))
    path = tmp_path / "lp.txt"
    lp_builder.export_tableau(p, path)
    q = simplex.loads_tableau(path.read_text())
    assert np.array_equal(q.A_eq, p.A_eq) and q.names == p.names


def test_small_instance_is_solved():
    sol = lp_builder.solve_design(reference_config(0.2, x_max=30))
    assert sol.incentives.ok
    assert sol.diagnostics["max_residual"] < 1e-8


def test_reference_solutions_are_consistent(reference_solution):
    sol = reference_solution
    assert sol.truncation_ok
    assert sol.diagnostics["max_residual"] < 1e-8
    assert sol.diagnostics["recursion_residual"] < 1e-8
    assert sol.objective_value == pytest.approx(sol.diagnostics["lp_objective"], abs=1e-7)
    assert sol.revenue == pytest.approx(
        incentives.revenue(sol.taxes, sol.config.lam), abs=1e-9)
    redo = stationary_distribution(sol.policy, sol.config.lam, reward=sol.config.reward)
    assert np.max(np.abs(redo.mu - sol.mu.mu)) < 1e-7
