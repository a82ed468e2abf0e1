import math
import warnings

import numpy as np
import pytest

from d2dcap.analysis import (
    ResistanceExpr,
    ResistanceTerm,
    TransitionKernel,
    _in_trees,
    brute_force_optimum,
    edge_resistances,
    empirical_resistance,
    enumerate_profiles,
    exact_transition_matrix,
    game_resistance_kernel,
    gibbs_distribution,
    min_resistance_tree_check,
    res_add,
    res_inv,
    res_mul,
    res_of_const,
    res_of_exp,
    res_sub,
    stationary_direct,
    stationary_tree,
    stochastically_stable_states,
    transition_resistance,
)
from d2dcap.game import AssignmentProfile
from d2dcap.learning import acceptance_probability

from test_game import seeded_game


def random_chain(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.dirichlet(np.ones(n) * 2.0, size=n)
    return TransitionKernel(states=list(range(n)), matrix=m, tau=None)


# ----------------------------------------------------------------------
# enumeration and brute force


def test_enumerate_profiles_order():
    game = seeded_game(1, 2, 3, seed=5)
    profiles = enumerate_profiles(game)
    assert len(profiles) == 9
    keys = [p.key() for p in profiles]
    assert keys[0] == (0, 0, 0)
    assert keys[1] == (0, 1, 0)  # lowest active index varies fastest
    assert keys[3] == (0, 0, 1)
    assert len(set(keys)) == 9


def test_enumerate_size_guard():
    game = seeded_game(0, 13, 3, seed=5)  # 3^13 > 1e6
    with pytest.raises(ValueError):
        enumerate_profiles(game)


def test_brute_force_matches_manual_scan():
    game = seeded_game(0, 3, 2, seed=11)
    result = brute_force_optimum(game)
    values = {p.key(): game.potential_exact(p) for p in enumerate_profiles(game)}
    best = max(values.values())
    manual = {k for k, v in values.items() if best - v <= 1e-12 * game.phi_max}
    assert result.keys() == manual
    assert result.phi_star == pytest.approx(best, rel=1e-15)
    assert result.num_evaluated == 8
    assert 0.0 < result.normalized_phi_star <= 1.0


def test_brute_force_reports_relabeling_ties():
    # free channels make the optimal set a full relabeling orbit
    game = seeded_game(0, 4, 3, seed=25)
    result = brute_force_optimum(game)
    assert len(result.profiles) == 6
    base = result.profiles[0].key()
    perms = {tuple(p[c] for c in base)
             for p in ((0, 1, 2), (0, 2, 1), (1, 0, 2),
                       (1, 2, 0), (2, 0, 1), (2, 1, 0))}
    assert result.keys() == perms


# ----------------------------------------------------------------------
# transition kernel


def test_kernel_validation():
    with pytest.raises(ValueError):
        TransitionKernel(states=[0, 1], matrix=np.array([[0.5, 0.4],
                                                         [0.5, 0.5]]))
    with pytest.raises(ValueError):
        TransitionKernel(states=[0, 1], matrix=np.array([[1.2, -0.2],
                                                         [0.0, 1.0]]))


def test_exact_kernel_matches_hand_values():
    game = seeded_game(0, 2, 2, seed=25)
    tau = 0.1
    kernel = exact_transition_matrix(game, tau)
    profiles = enumerate_profiles(game)
    idx = {p.key(): i for i, p in enumerate(profiles)}
    for a in profiles:
        for player in (0, 1):
            b = a.with_channel(player, 1 - int(a.channels[player]))
            du = game.utility_exact(a, player) - game.utility_exact(b, player)
            want = 0.5 * 0.5 * acceptance_probability(du, tau)
            got = kernel.matrix[idx[a.key()], idx[b.key()]]
            assert got == pytest.approx(want, rel=1e-12)
    assert np.allclose(kernel.matrix.sum(axis=1), 1.0, atol=1e-14)
    # high temperature: every move accepted with probability ~1/2
    hot = exact_transition_matrix(game, 1e9).matrix
    off = hot[~np.eye(4, dtype=bool)]
    assert np.all(np.abs(off[off > 0] - 0.125) < 1e-9)


def test_kernel_satisfies_detailed_balance():
    game = seeded_game(0, 3, 2, seed=11)
    tau = 0.1
    kernel = exact_transition_matrix(game, tau)
    pi = gibbs_distribution(game, tau).probs
    m = kernel.matrix
    for i in range(len(pi)):
        for j in range(len(pi)):
            if i != j and m[i, j] > 0:
                assert pi[i] * m[i, j] == pytest.approx(pi[j] * m[j, i],
                                                        rel=1e-12)


# ----------------------------------------------------------------------
# stationary distributions


def test_direct_solve_symmetric_two_state():
    k = TransitionKernel(states=["a", "b"],
                         matrix=np.array([[0.7, 0.3], [0.3, 0.7]]))
    pi = stationary_direct(k)
    assert np.allclose(pi.probs, [0.5, 0.5], atol=1e-15)
    assert pi.prob_of("a") == pi.probs[0]


def test_direct_solve_matches_gibbs():
    game = seeded_game(0, 3, 3, seed=12)
    for tau in (0.5, 0.1, 0.02):
        kernel = exact_transition_matrix(game, tau)
        pd = stationary_direct(kernel).probs
        pg = gibbs_distribution(game, tau).probs
        assert float(np.abs(pd - pg).max()) <= 1e-9
        assert float(np.abs(pd @ kernel.matrix - pd).max()) <= 1e-10


def test_direct_solve_refuses_frozen_chains():
    game = seeded_game(0, 2, 2, seed=25)
    with pytest.raises(ValueError):
        stationary_direct(exact_transition_matrix(game, 0.01))
    # the Gibbs form still answers there
    pg = gibbs_distribution(game, 0.01)
    assert pg.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_gibbs_two_point_ratio():
    game = seeded_game(0, 2, 2, seed=25)
    tau = 0.07
    pi = gibbs_distribution(game, tau)
    profiles = enumerate_profiles(game)
    a, b = profiles[0], profiles[3]
    want = math.exp((game.normalized_potential(a)
                     - game.normalized_potential(b)) / tau)
    assert pi.probs[0] / pi.probs[3] == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        gibbs_distribution(game, 0.0)


def test_tree_theorem_two_state_closed_form():
    k = TransitionKernel(states=[0, 1],
                         matrix=np.array([[0.9, 0.1], [0.4, 0.6]]))
    pi = stationary_tree(k)
    assert np.allclose(pi.probs, [0.8, 0.2], atol=1e-15)


def test_tree_matches_direct_on_random_chains():
    for n, seed in ((3, 1), (4, 2), (5, 3)):
        k = random_chain(n, seed)
        gap = np.abs(stationary_tree(k).probs - stationary_direct(k).probs)
        assert float(gap.max()) <= 1e-12


def test_tree_star_chain():
    # hub-and-spoke: only the hub connects the spokes
    m = np.array([[0.4, 0.2, 0.2, 0.2],
                  [0.5, 0.5, 0.0, 0.0],
                  [0.3, 0.0, 0.7, 0.0],
                  [0.1, 0.0, 0.0, 0.9]])
    k = TransitionKernel(states=list(range(4)), matrix=m)
    gap = np.abs(stationary_tree(k).probs - stationary_direct(k).probs)
    assert float(gap.max()) <= 1e-12


def test_tree_state_cap():
    with pytest.raises(ValueError):
        stationary_tree(random_chain(9, 0))


def test_in_tree_enumeration_count():
    # rooted spanning in-trees of the complete digraph: n^(n-2) per root
    assert sum(1 for _ in _in_trees(4, 0)) == 16
    assert sum(1 for _ in _in_trees(3, 2)) == 3


# ----------------------------------------------------------------------
# stochastic stability


def test_stable_states_equal_brute_force():
    game = seeded_game(1, 4, 3, seed=35)
    stable = stochastically_stable_states(game, (0.1, 0.05, 0.02, 0.01))
    assert {p.key() for p in stable} == brute_force_optimum(game).keys()
    assert len(stable) == 2  # symmetric pair of relabelings


def test_stable_states_grid_guards():
    game = seeded_game(0, 2, 2, seed=25)
    with pytest.raises(ValueError):
        stochastically_stable_states(game, (0.05, 0.1))
    with pytest.raises(ValueError):
        stochastically_stable_states(game, ())


# ----------------------------------------------------------------------
# resistances


def test_transition_resistance():
    assert transition_resistance(0.3) == 0.3
    assert transition_resistance(-0.3) == 0.0
    assert transition_resistance(0.0) == 0.0


def test_edge_resistances_complementarity():
    game = seeded_game(0, 2, 2, seed=25)
    res = edge_resistances(game)
    for (ka, kb), r in res.items():
        back = res[(kb, ka)]
        assert min(r, back) == 0.0
        assert r >= 0.0
    # spot value
    a = AssignmentProfile(channels=[0, 0], passive=[False, False])
    b = a.with_channel(0, 1)
    du = game.utility_exact(a, 0) - game.utility_exact(b, 0)
    assert res[(a.key(), b.key())] == max(0.0, du)


def test_min_resistance_tree_check_on_game():
    game = seeded_game(0, 2, 2, seed=25)
    keys, res, adj = game_resistance_kernel(game)
    assert res.shape == (4, 4)
    assert not adj[0, 3]  # two-coordinate moves are not adjacent
    report = min_resistance_tree_check(res, adj)
    assert report.passes
    assert report.min_resistance >= 0.0
    assert report.num_min_trees >= 1
    assert any(r <= 1e-12 for _, _, r in report.witness_edges)


def test_min_resistance_tree_check_synthetic_failure():
    res = np.array([[np.inf, 0.5], [0.5, np.inf]])
    report = min_resistance_tree_check(res)
    assert not report.passes
    assert report.min_resistance == pytest.approx(0.5)


def test_min_resistance_tree_check_guards():
    with pytest.raises(ValueError):
        min_resistance_tree_check(np.full((9, 9), 1.0))
    with pytest.raises(ValueError):
        min_resistance_tree_check(np.full((3, 3), np.inf))


# ----------------------------------------------------------------------
# resistance algebra


def test_algebra_basic_rules():
    c = res_of_const()
    e2 = res_of_exp(2.0)
    e5 = res_of_exp(5.0)
    assert c.resistance == 0.0
    assert e2.resistance == 2.0
    assert res_add(e2, e5).resistance == 2.0
    assert res_add(c, e2).resistance == 0.0
    assert res_mul(e2, e5).resistance == 7.0
    assert res_mul(c, e2).resistance == 2.0
    assert res_sub(e2, e5).resistance == 2.0
    assert res_inv(e2).resistance == -2.0
    assert res_mul(e5, res_inv(e2)).resistance == 3.0


def test_algebra_error_rules():
    e2 = res_of_exp(2.0)
    e5 = res_of_exp(5.0)
    with pytest.raises(ValueError):
        res_sub(e5, e2)  # minuend decays faster
    with pytest.raises(ValueError):
        res_sub(e2, res_of_exp(2.0))  # equal rates are indeterminate
    with pytest.raises(ValueError):
        res_inv(res_of_const())  # zero resistance
    with pytest.raises(ValueError):
        res_inv(res_add(e2, e5))  # multi-term
    with pytest.raises(ValueError):
        ResistanceExpr(terms=())
    with pytest.raises(ValueError):
        ResistanceTerm(tag="x", resistance=math.inf)


def test_empirical_resistance_recovers_rates():
    grid = np.linspace(0.02, 0.1, 6)
    assert empirical_resistance(lambda t: math.exp(-0.7 / t), grid) \
        == pytest.approx(0.7, abs=1e-10)
    assert empirical_resistance(lambda t: 3.0, grid) \
        == pytest.approx(0.0, abs=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        got = empirical_resistance(lambda t: t * t * math.exp(-0.4 / t), grid)
    # the t^2 factor biases the intercept by O(t ln t) on this grid
    assert got == pytest.approx(0.4, abs=0.15)


def test_empirical_resistance_guards_and_warning():
    grid = np.linspace(0.05, 0.2, 5)
    with pytest.raises(ValueError):
        empirical_resistance(lambda t: -1.0, grid)
    with pytest.raises(ValueError):
        empirical_resistance(lambda t: 1.0, [0.1])
    with pytest.warns(UserWarning):
        empirical_resistance(lambda t: t ** 5 * math.exp(-0.3 / t), grid)
