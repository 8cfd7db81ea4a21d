import numpy as np
import pytest

from gamedyn import (DomainError, GameSpec, MixedProfile, expected_payoff_vector,
                     game_from_dict, game_to_dict, linear_game_map, load_game,
                     payoff_jacobian, preset, pure_payoff, save_game,
                     tangent_basis)


def test_action_count_validation():
    with pytest.raises(DomainError):
        GameSpec((1,), (np.zeros((1, 1)),), matching=True)
    with pytest.raises(DomainError):
        GameSpec((2, 2), (np.zeros((2, 2)),))
    with pytest.raises(DomainError):
        GameSpec((2, 2), (np.zeros((2, 3)), np.zeros((2, 2))))


def test_matching_needs_single_population():
    with pytest.raises(DomainError):
        GameSpec((2, 2), (np.zeros((2, 2)), np.zeros((2, 2))), matching=True)
    with pytest.raises(DomainError):
        GameSpec((3,), (np.zeros((3, 2)),), matching=True)


def test_linear_map_shape_checked():
    with pytest.raises(DomainError):
        GameSpec((2, 2), (np.zeros((2, 2)), np.zeros((2, 2))),
                 linear_map=np.zeros((3, 3)))


def test_pure_payoff_matching_pennies():
    game = preset("matching_pennies")
    # (H, H): row player wins 1, column player loses 1
    assert pure_payoff(game, (0, 0)) == [1.0, -1.0]
    assert pure_payoff(game, (0, 1)) == [-1.0, 1.0]


def test_expected_payoff_linear_vs_tensor():
    game = preset("two_player_rps", {"l": 5.0})
    phi = linear_game_map(game)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = MixedProfile.random(game.action_counts, rng).vector
        np.testing.assert_allclose(expected_payoff_vector(game, x), phi @ x,
                                   atol=1e-12)


def test_expected_payoff_batched_matches_loop():
    game = preset("jordan_mp")
    rng = np.random.default_rng(1)
    xs = np.stack([MixedProfile.random(game.action_counts, rng).vector
                   for _ in range(7)])
    batched = expected_payoff_vector(game, xs)
    for i in range(7):
        np.testing.assert_allclose(batched[i],
                                   expected_payoff_vector(game, xs[i]),
                                   atol=1e-12)


def test_jordan_payoffs_reduce_to_linear_map():
    # the three-player pennies tensor collapses to a linear map on the simplex
    game = preset("jordan_mp")
    phi = np.zeros((6, 6))
    phi[0, 2], phi[0, 3] = 1.0, -1.0
    phi[1, 2], phi[1, 3] = -1.0, 1.0
    phi[2, 4], phi[2, 5] = 1.0, -1.0
    phi[3, 4], phi[3, 5] = -1.0, 1.0
    phi[4, 0], phi[4, 1] = -1.0, 1.0
    phi[5, 0], phi[5, 1] = 1.0, -1.0
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = MixedProfile.random(game.action_counts, rng).vector
        np.testing.assert_allclose(expected_payoff_vector(game, x), phi @ x,
                                   atol=1e-12)


def test_matching_payoff_is_matrix_product():
    game = preset("rps", {"l": 2.5})
    rng = np.random.default_rng(3)
    x = MixedProfile.random(game.action_counts, rng).vector
    np.testing.assert_allclose(expected_payoff_vector(game, x),
                               game.payoff_tensors[0] @ x, atol=1e-12)


def test_tangent_basis_properties():
    for counts in ((3,), (2, 2), (3, 3), (2, 2, 2)):
        basis = tangent_basis(counts)
        e_mat = basis.matrix
        n = sum(counts)
        assert e_mat.shape == (n, n - len(counts))
        np.testing.assert_allclose(e_mat.T @ e_mat, np.eye(n - len(counts)),
                                   atol=1e-12)
        start = 0
        for c in counts:
            np.testing.assert_allclose(e_mat[start:start + c].sum(axis=0),
                                       0.0, atol=1e-12)
            start += c


def test_mixed_profile_validation():
    with pytest.raises(DomainError):
        MixedProfile(np.array([0.5, 0.6]), (2,))
    with pytest.raises(DomainError):
        MixedProfile(np.array([-0.1, 1.1]), (2,))
    centroid = MixedProfile.centroid((3, 2))
    np.testing.assert_allclose(centroid.vector,
                               [1 / 3, 1 / 3, 1 / 3, 0.5, 0.5])


def test_random_profile_in_simplex(rng):
    profile = MixedProfile.random((3, 4), rng)
    blocks = profile.blocks
    assert len(blocks) == 2
    for block in blocks:
        assert np.all(block >= 0)
        assert abs(block.sum() - 1.0) < 1e-9


def test_json_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(4)
    for name, params in (("two_player_rps", {"l": 5.0}), ("jordan_mp", None),
                         ("rps", {"l": 8.0})):
        game = preset(name, params)
        clone = game_from_dict(game_to_dict(game))
        assert clone.matching == game.matching
        assert clone.action_counts == game.action_counts
        for _ in range(10):
            x = MixedProfile.random(game.action_counts, rng).vector
            lhs = expected_payoff_vector(game, x)
            rhs = expected_payoff_vector(clone, x)
            assert np.array_equal(lhs, rhs)
        path = tmp_path / f"{name}.json"
        save_game(path, game)
        loaded = load_game(path)
        x = MixedProfile.random(game.action_counts, rng).vector
        assert np.array_equal(expected_payoff_vector(game, x),
                              expected_payoff_vector(loaded, x))


def test_payoff_jacobian_matches_linear_map():
    game = preset("shapley")
    phi = linear_game_map(game)
    x = MixedProfile.centroid(game.action_counts).vector
    np.testing.assert_allclose(payoff_jacobian(game, x), phi, atol=1e-8)


def test_preset_parameter_errors():
    from gamedyn import UsageError
    with pytest.raises(UsageError):
        preset("rps")
    with pytest.raises(UsageError):
        preset("nonexistent_game")
