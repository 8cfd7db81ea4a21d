import numpy as np
import pytest

from gamedyn import (DomainError, FeedbackBlock,
                     IntegrationDivergedError, LearningParams, Trajectory,
                     expected_payoff_vector, first_order_field,
                     higher_order_field, induced_strategy_field, integrate,
                     preset, profile_jacobian, rest_point,
                     revision_protocol_field, score_bound, score_bound_excess,
                     seeded_initial_scores, simulate_first_order,
                     simulate_higher_order, softmax, verify_feedback_block,
                     write_trajectory_csv)


def test_learning_params_validation():
    with pytest.raises(DomainError):
        LearningParams(gamma=0.0, eps=1.0)
    with pytest.raises(DomainError):
        LearningParams(gamma=1.0, eps=-0.5)
    params = LearningParams(gamma=2.0, eps=0.5)
    assert params.gamma == 2.0 and params.eps == 0.5


def test_high_pass_block_shapes():
    block = FeedbackBlock.high_pass(2.0, 0.5, (3, 3))
    assert block.dim == 6
    np.testing.assert_allclose(block.a_mat, -0.5 * np.eye(6))
    np.testing.assert_allclose(block.b_mat, -0.5 * np.eye(6))
    np.testing.assert_allclose(block.c_mat, 2.0 * np.eye(6))
    np.testing.assert_allclose(block.d_mat, 2.0 * np.eye(6))
    assert block.spectral_abscissa() == pytest.approx(-0.5)
    assert np.linalg.norm(block.dc_gain()) == pytest.approx(0.0, abs=1e-12)


def test_high_pass_parameter_validation():
    with pytest.raises(DomainError):
        FeedbackBlock.high_pass(1.0, 0.0, (3,))
    with pytest.raises(DomainError):
        FeedbackBlock.high_pass(-1.0, 1.0, (3,))


def test_verify_feedback_block_pass_and_fail():
    good = verify_feedback_block(FeedbackBlock.high_pass(1.0, 1.0, (3,)))
    assert good.passed
    assert good.hurwitz_ok and good.zero_dc_ok and good.grid_positive_real_ok

    eye = np.eye(3)
    unstable = FeedbackBlock(a_mat=eye, b_mat=-eye, c_mat=eye, d_mat=eye)
    rep = verify_feedback_block(unstable)
    assert not rep.hurwitz_ok and not rep.passed

    leaky = FeedbackBlock(a_mat=-eye, b_mat=-eye, c_mat=eye,
                          d_mat=np.zeros((3, 3)))
    rep = verify_feedback_block(leaky)
    assert not rep.zero_dc_ok and not rep.passed


def test_equilibrium_filter_state_cancels_input():
    game = preset("rps", {"l": 5.0})
    block = FeedbackBlock.high_pass(1.0, 1.0, (3,))
    solved = rest_point(game, 1.0)
    xi_star = block.equilibrium_filter_state(solved.x_star)
    np.testing.assert_allclose(xi_star, -solved.x_star, atol=1e-12)
    state = np.concatenate([solved.z_star, xi_star])
    field = higher_order_field(state, game, LearningParams(1.0, 1.0), block)
    np.testing.assert_allclose(field, 0.0, atol=1e-10)


def test_first_order_field_forms(rng):
    game = preset("rps", {"l": 2.5})
    z = rng.uniform(-1, 1, 3)
    x = softmax(z, 1.0, (3,))
    u = expected_payoff_vector(game, x)
    np.testing.assert_allclose(first_order_field(z, game, LearningParams(1.0, 1.0)),
                               u - z, atol=1e-14)
    np.testing.assert_allclose(first_order_field(z, game, LearningParams(4.0, 1.0)),
                               4.0 * (u - z), atol=1e-14)
    undisc = LearningParams(1.0, 1.0, undiscounted=True)
    np.testing.assert_allclose(first_order_field(z, game, undisc), u, atol=1e-14)


def test_zero_gain_filter_recovers_first_order(rng):
    game = preset("matching_pennies")
    block = FeedbackBlock.high_pass(0.0, 1.0, (2, 2))
    params = LearningParams(1.0, 1.0)
    z = rng.uniform(-1, 1, 4)
    xi = rng.uniform(-1, 1, 4)
    field = higher_order_field(np.concatenate([z, xi]), game, params, block)
    np.testing.assert_allclose(field[:4], first_order_field(z, game, params),
                               atol=1e-14)


def test_chain_rule_links_score_and_strategy_fields(rng):
    for name, params in (("rps", {"l": 2.5}), ("shapley", None),
                         ("jordan_mp", None)):
        game = preset(name, params)
        lp = LearningParams(1.3, 0.8)
        for _ in range(25):
            z = rng.uniform(-2, 2, game.total_actions)
            zdot = first_order_field(z, game, lp)
            xdot = induced_strategy_field(z, game, lp)
            chained = profile_jacobian(z, lp.eps, game.action_counts) @ zdot
            np.testing.assert_allclose(xdot, chained, atol=1e-10)


def test_revision_protocol_matches_induced_field(rng):
    game = preset("modified_rps_Abar")
    lp = LearningParams(1.0, 1.0)
    for _ in range(25):
        z = rng.uniform(-2, 2, 3)
        x = softmax(z, lp.eps, (3,))
        np.testing.assert_allclose(revision_protocol_field(x, z, game, lp),
                                   induced_strategy_field(z, game, lp),
                                   atol=1e-10)


def test_rk4_accuracy_on_rotation():
    omega = np.array([[0.0, -1.0], [1.0, 0.0]])
    traj = integrate(lambda s: s @ omega.T, np.array([1.0, 0.0]),
                     dt=0.01, t_end=1.0)
    expect = np.array([np.cos(1.0), np.sin(1.0)])
    np.testing.assert_allclose(traj.states[-1], expect, atol=1e-9)
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(1.0)


def test_integrate_batch_matches_single():
    game = preset("rps", {"l": 2.5})
    params = LearningParams(1.0, 1.0)
    z0 = np.stack([seeded_initial_scores(3, s) for s in (0, 1)])
    batched = simulate_first_order(game, params, z0, dt=0.05, t_end=5.0)
    single = simulate_first_order(game, params, z0[1], dt=0.05, t_end=5.0)
    np.testing.assert_allclose(batched[1].states, single.states, atol=1e-13)


def test_record_every_and_final_sample():
    traj = integrate(lambda s: -s, np.ones(2), dt=0.1, t_end=1.0,
                     record_every=3)
    # samples at step multiples of 3 plus the final step
    np.testing.assert_allclose(traj.times, [0.0, 0.3, 0.6, 0.9, 1.0],
                               atol=1e-12)


def test_divergence_reports_last_good_time():
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(IntegrationDivergedError) as err:
            integrate(lambda s: s ** 3, np.array([5.0]), dt=0.5, t_end=40.0,
                      record_every=1)
    assert err.value.last_good_time is not None
    assert err.value.last_good_time >= 0.0


def test_trajectory_time_monotonicity():
    with pytest.raises(DomainError):
        Trajectory(np.array([0.0, 0.0, 1.0]), np.zeros((3, 2)))


def test_seeded_scores_deterministic_and_bounded():
    a = seeded_initial_scores(6, 42)
    b = seeded_initial_scores(6, 42)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 1.0)
    assert not np.array_equal(a, seeded_initial_scores(6, 43))


def test_simulate_first_order_standard_rps_settles():
    game = preset("rps", {"l": 1.0})
    traj = simulate_first_order(game, LearningParams(1.0, 1.0),
                                seeded_initial_scores(3, 0), dt=0.01,
                                t_end=60.0, record_every=10)
    np.testing.assert_allclose(traj.states[-1], 0.0, atol=1e-8)
    np.testing.assert_allclose(traj.strategies[-1], 1.0 / 3.0, atol=1e-8)


def test_higher_order_state_layout():
    game = preset("rps", {"l": 5.0})
    block = FeedbackBlock.high_pass(1.0, 1.0, (3,))
    traj = simulate_higher_order(game, LearningParams(1.0, 1.0), block,
                                 seeded_initial_scores(3, 1), dt=0.01,
                                 t_end=30.0, record_every=10)
    assert traj.states.shape[1] == 6
    # filter state starts at zero
    np.testing.assert_allclose(traj.states[0, 3:], 0.0, atol=1e-15)
    solved = rest_point(game, 1.0)
    np.testing.assert_allclose(traj.strategies[-1], solved.x_star, atol=1e-6)


def test_score_bound_invariance():
    game = preset("rps", {"l": 8.0})
    z0 = seeded_initial_scores(3, 0)
    traj = simulate_first_order(game, LearningParams(1.0, 1.0), z0, dt=0.01,
                                t_end=100.0, record_every=10)
    assert score_bound_excess(traj, game) <= 0.0
    bound = score_bound(game, z0)
    assert np.all(bound >= game.max_abs_payoff() - 1e-12)

    block = FeedbackBlock.high_pass(1.0, 1.0, (3,))
    traj_ho = simulate_higher_order(game, LearningParams(1.0, 1.0), block, z0,
                                    dt=0.01, t_end=100.0, record_every=10)
    assert score_bound_excess(traj_ho, game, block=block) <= 0.0
    assert np.all(score_bound(game, z0, block=block) >= bound)


def test_trajectory_csv_layout(tmp_path):
    game = preset("shapley")
    traj = simulate_first_order(game, LearningParams(1.0, 1.0),
                                seeded_initial_scores(6, 0), dt=0.05,
                                t_end=2.0, record_every=4)
    path = tmp_path / "run.csv"
    write_trajectory_csv(path, traj, game.action_counts, ternary=True)
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "t"
    assert sum(1 for h in header if h.startswith("z_")) == 6
    assert sum(1 for h in header if h.startswith("x_")) == 6
    assert sum(1 for h in header if h.startswith("tern")) == 4
    assert len(lines) == len(traj.times) + 1
