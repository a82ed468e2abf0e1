"""Exact small-instance analysis: profile enumeration, brute-force optimum,
the one-slot transition kernel with its stationary distributions (direct
solve, Gibbs form, tree theorem), stochastic-stability checks, and a small
resistance calculus for tau -> 0 asymptotics.

Everything here operates on deterministic-mode games where utilities are
exact, so the chain over assignment profiles is a concrete finite Markov
chain that can be solved and cross-checked three independent ways.

Profile indexing: profiles are enumerated mixed-radix over the active
players' channels with the lowest active player index as the least
significant digit; passive channels stay fixed.  Index k therefore decodes
as a_active[j] = (k // num_channels**j) % num_channels.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .game import AssignmentProfile, CapGame
from .learning import acceptance_probability

__all__ = [
    "enumerate_profiles",
    "BruteForceResult",
    "brute_force_optimum",
    "TransitionKernel",
    "exact_transition_matrix",
    "StationaryDistribution",
    "stationary_direct",
    "gibbs_distribution",
    "stationary_tree",
    "stochastically_stable_states",
    "transition_resistance",
    "edge_resistances",
    "MinTreeReport",
    "min_resistance_tree_check",
    "game_resistance_kernel",
    "ResistanceTerm",
    "ResistanceExpr",
    "res_of_const",
    "res_of_exp",
    "res_add",
    "res_sub",
    "res_mul",
    "res_inv",
    "empirical_resistance",
]

_SPACE_GUARD = 10 ** 6
_TREE_STATE_CAP = 8


def _require_deterministic(game: CapGame) -> None:
    if game.mode != "deterministic":
        raise ValueError("exact analysis requires a deterministic-mode game")


# ----------------------------------------------------------------------
# profile space


def enumerate_profiles(game: CapGame) -> list[AssignmentProfile]:
    """All valid profiles, mixed-radix order (see module docstring)."""
    base = game.initial_profile()
    active = game.active_players
    size = game.num_channels ** len(active)
    if size > _SPACE_GUARD:
        raise ValueError(f"profile space of size {size} exceeds the "
                         f"{_SPACE_GUARD} guard")
    out = []
    for k in range(size):
        ch = base.channels.copy()
        rem = k
        for player in active:
            ch[player] = rem % game.num_channels
            rem //= game.num_channels
        out.append(AssignmentProfile(channels=ch, passive=base.passive))
    return out


@dataclass
class BruteForceResult:
    """Exhaustive-search optimum with all ties kept."""

    profiles: list            # maximizing AssignmentProfiles
    phi_star: float           # bits/s
    normalized_phi_star: float
    num_evaluated: int

    def keys(self) -> set:
        return {p.key() for p in self.profiles}


def brute_force_optimum(game: CapGame, tie_tol: float = 1e-12
                        ) -> BruteForceResult:
    """Scan every profile; ties within ``tie_tol`` of the best normalized
    sum rate are all returned."""
    _require_deterministic(game)
    profiles = enumerate_profiles(game)
    values = np.array([game.normalized_potential(p) for p in profiles])
    best = float(values.max())
    winners = [p for p, v in zip(profiles, values) if best - v <= tie_tol]
    return BruteForceResult(profiles=winners, phi_star=best * game.phi_max,
                            normalized_phi_star=best,
                            num_evaluated=len(profiles))


# ----------------------------------------------------------------------
# exact one-slot kernel


@dataclass
class TransitionKernel:
    """Row-stochastic one-slot transition matrix over an enumerated state
    space.  ``states`` are hashable labels (channel-vector tuples for game
    kernels; anything for synthetic chains)."""

    states: list
    matrix: np.ndarray
    tau: float | None = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        n = len(self.states)
        if self.matrix.shape != (n, n):
            raise ValueError("matrix shape must match the state count")
        if np.any(self.matrix < 0):
            raise ValueError("transition probabilities must be non-negative")
        rows = self.matrix.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > 1e-12:
            raise ValueError("rows must sum to 1 within 1e-12")

    @property
    def num_states(self) -> int:
        return len(self.states)

    def index_of(self, state) -> int:
        return self.states.index(state)


def exact_transition_matrix(game: CapGame, tau: float) -> TransitionKernel:
    """One-slot chain over profiles under exact utilities.

    Off-diagonal mass exists only between single-active-coordinate
    neighbors: pick player (1/#active), pick that channel (1/#channels),
    accept with probability 1/(1 + exp(dU/tau)).  The diagonal absorbs
    everything else, including self-trials.
    """
    _require_deterministic(game)
    if not tau > 0:
        raise ValueError("tau must be positive")
    profiles = enumerate_profiles(game)
    index = {p.key(): k for k, p in enumerate(profiles)}
    n_active = len(game.active_players)
    if n_active == 0:
        raise ValueError("at least one active player is required")
    pick = 1.0 / (n_active * game.num_channels)

    util_cache: dict = {}

    def util(profile: AssignmentProfile, player: int) -> float:
        key = (profile.key(), player)
        val = util_cache.get(key)
        if val is None:
            val = game.utility_exact(profile, player)
            util_cache[key] = val
        return val

    n = len(profiles)
    mat = np.zeros((n, n))
    for ia, prof in enumerate(profiles):
        for player in game.active_players:
            current = int(prof.channels[player])
            for c in range(game.num_channels):
                if c == current:
                    continue
                target = prof.with_channel(player, c)
                ib = index[target.key()]
                delta = util(prof, player) - util(target, player)
                mat[ia, ib] = pick * acceptance_probability(delta, tau)
        mat[ia, ia] = 1.0 - mat[ia].sum()
    return TransitionKernel(states=[p.key() for p in profiles], matrix=mat,
                            tau=tau)


# ----------------------------------------------------------------------
# stationary distributions, three ways


@dataclass
class StationaryDistribution:
    """Stationary probabilities over an enumerated state space."""

    states: list
    probs: np.ndarray
    tau: float | None
    method: str  # direct | gibbs | tree

    def prob_of(self, state) -> float:
        return float(self.probs[self.states.index(state)])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("state_index,state,probability\n")
            for k, (s, p) in enumerate(zip(self.states, self.probs)):
                label = "|".join(str(x) for x in s) if isinstance(s, tuple) \
                    else str(s)
                fh.write(f"{k},{label},{float(p)!r}\n")


def stationary_direct(kernel: TransitionKernel) -> StationaryDistribution:
    """Solve pi P = pi, sum(pi) = 1 by direct elimination.

    Uses state-by-state elimination in the Grassmann-Taksar-Heyman form:
    every update adds nonnegative quantities, so the result keeps full
    entrywise relative accuracy even when the chain mixes slowly.  Raises
    when transition probabilities have decayed below unit roundoff (very
    small tau); the Gibbs form or the tree method handle those chains.
    """
    n = kernel.num_states
    off = kernel.matrix[~np.eye(n, dtype=bool)]
    pos = off[off > 0]
    if len(pos) and float(pos.min()) < 1e-15:
        # edges below unit roundoff make the chain numerically reducible:
        # quasi-stationary mixtures also pass the residual check, so the
        # solve cannot certify uniqueness
        raise ValueError("some transition probabilities are below unit "
                         "roundoff (tau too small?); use stationary_tree "
                         "or the Gibbs form")
    a = kernel.matrix.astype(np.float64, copy=True)
    for k in range(n - 1, 0, -1):
        s = float(a[k, :k].sum())
        if s <= 0.0:
            raise ValueError("reducible chain: eliminated state has no "
                             "path back; use stationary_tree")
        a[:k, k] /= s
        a[:k, :k] += np.outer(a[:k, k], a[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ a[:k, k]
    pi /= pi.sum()
    residual = float(np.max(np.abs(pi @ kernel.matrix - pi)))
    if residual > 1e-10:
        raise ValueError(f"stationary solve residual {residual:.3e} "
                         "exceeds tolerance; use stationary_tree")
    return StationaryDistribution(states=list(kernel.states), probs=pi,
                                  tau=kernel.tau, method="direct")


def gibbs_distribution(game: CapGame, tau: float) -> StationaryDistribution:
    """pi(a) proportional to exp(phi(a)/tau) on the normalized potential
    scale (the scale utilities live on), computed with a max shift.

    This closed form is the exact stationary law of the one-slot kernel:
    proposals are symmetric and the acceptance ratio gives detailed balance.
    """
    _require_deterministic(game)
    if not tau > 0:
        raise ValueError("tau must be positive")
    profiles = enumerate_profiles(game)
    phi = np.array([game.normalized_potential(p) for p in profiles])
    x = phi / tau
    x -= x.max()
    w = np.exp(x)
    return StationaryDistribution(states=[p.key() for p in profiles],
                                  probs=w / w.sum(), tau=tau, method="gibbs")


def _in_trees(n: int, root: int):
    """Yield parent maps of spanning trees directed toward ``root``.

    A parent map assigns every non-root node its next hop; acyclic maps are
    exactly the in-trees.  Enumeration is factorial, hence the state cap.
    """
    nodes = [v for v in range(n) if v != root]
    choices = [[p for p in range(n) if p != v] for v in nodes]
    for combo in itertools.product(*choices):
        parent = dict(zip(nodes, combo))
        ok = True
        for v in nodes:
            seen = set()
            cur = v
            while cur != root:
                if cur in seen:
                    ok = False
                    break
                seen.add(cur)
                cur = parent[cur]
            if not ok:
                break
        if ok:
            yield parent
    return


def stationary_tree(kernel: TransitionKernel) -> StationaryDistribution:
    """Markov-chain tree theorem: pi_c proportional to the sum over
    in-trees rooted at c of the product of edge probabilities.

    Exponential-cost cross-check oracle; rejects chains beyond
    8 states.
    """
    n = kernel.num_states
    if n > _TREE_STATE_CAP:
        raise ValueError(f"tree enumeration capped at {_TREE_STATE_CAP} "
                         f"states, got {n}")
    p = kernel.matrix
    weights = np.zeros(n)
    for root in range(n):
        total = 0.0
        for parent in _in_trees(n, root):
            prod = 1.0
            for v, pa in parent.items():
                prod *= p[v, pa]
                if prod == 0.0:
                    break
            total += prod
        weights[root] = total
    s = weights.sum()
    if s <= 0:
        raise ValueError("all spanning trees have zero weight; "
                         "chain is not irreducible")
    return StationaryDistribution(states=list(kernel.states),
                                  probs=weights / s, tau=kernel.tau,
                                  method="tree")


# ----------------------------------------------------------------------
# stochastic stability


def stochastically_stable_states(game: CapGame, tau_grid) -> list:
    """States keeping non-vanishing stationary mass along a decreasing
    temperature grid.

    Threshold: mass at the smallest tau at least 0.5 / (brute-force optimum
    count).  Warns when a selected state's mass is not non-decreasing along
    the grid (grid likely too coarse).  Returns AssignmentProfiles.
    """
    _require_deterministic(game)
    taus = [float(t) for t in tau_grid]
    if len(taus) < 1:
        raise ValueError("tau_grid must be non-empty")
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau_grid must be strictly decreasing")
    optimum = brute_force_optimum(game)
    threshold = 0.5 / len(optimum.profiles)
    profiles = enumerate_profiles(game)
    masses = np.stack([gibbs_distribution(game, t).probs for t in taus])
    last = masses[-1]
    selected = [k for k in range(len(profiles)) if last[k] >= threshold]
    for k in selected:
        col = masses[:, k]
        if np.any(np.diff(col) < -1e-12):
            warnings.warn(f"stable-state mass for state {k} is not "
                          "monotone along the grid; consider a finer "
                          "tau_grid", stacklevel=2)
    return [profiles[k] for k in selected]


# ----------------------------------------------------------------------
# resistances


def transition_resistance(delta: float) -> float:
    """Exponential cost of accepting a move with utility drop ``delta``."""
    return max(0.0, delta)


def edge_resistances(game: CapGame) -> dict:
    """Resistance of every single-coordinate transition, keyed by
    (from_key, to_key)."""
    _require_deterministic(game)
    out = {}
    for prof in enumerate_profiles(game):
        for player in game.active_players:
            current = int(prof.channels[player])
            for c in range(game.num_channels):
                if c == current:
                    continue
                target = prof.with_channel(player, c)
                delta = game.utility_exact(prof, player) \
                    - game.utility_exact(target, player)
                out[(prof.key(), target.key())] = transition_resistance(delta)
    return out


def game_resistance_kernel(game: CapGame):
    """(states, resistance matrix, adjacency mask) for the profile chain.

    Non-adjacent pairs get resistance +inf and adjacency False.
    """
    profiles = enumerate_profiles(game)
    keys = [p.key() for p in profiles]
    index = {k: i for i, k in enumerate(keys)}
    n = len(keys)
    res = np.full((n, n), np.inf)
    adj = np.zeros((n, n), dtype=bool)
    for (ka, kb), r in edge_resistances(game).items():
        res[index[ka], index[kb]] = r
        adj[index[ka], index[kb]] = True
    return keys, res, adj


@dataclass
class MinTreeReport:
    """Outcome of the minimum-resistance in-tree scan."""

    passes: bool              # every minimum tree has a zero-resistance edge
    min_resistance: float
    min_roots: list           # roots achieving the minimum
    witness_root: int
    witness_edges: list       # (from_state, to_state, resistance) triples
    num_min_trees: int


def min_resistance_tree_check(resistances: np.ndarray,
                              adjacency: np.ndarray | None = None,
                              zero_tol: float = 1e-12) -> MinTreeReport:
    """Enumerate all rooted spanning in-trees over the resistance graph,
    find the minimum total resistance, and verify every minimizing tree
    contains at least one (near-)zero-resistance edge."""
    res = np.asarray(resistances, dtype=np.float64)
    n = res.shape[0]
    if res.shape != (n, n):
        raise ValueError("resistance matrix must be square")
    if n > _TREE_STATE_CAP:
        raise ValueError(f"tree enumeration capped at {_TREE_STATE_CAP} "
                         f"states, got {n}")
    adj = np.isfinite(res) if adjacency is None else np.asarray(adjacency)

    best = math.inf
    min_trees = []  # (root, parent map)
    for root in range(n):
        for parent in _in_trees(n, root):
            if not all(adj[v, pa] for v, pa in parent.items()):
                continue
            total = sum(res[v, pa] for v, pa in parent.items())
            if total < best - 1e-12:
                best = total
                min_trees = [(root, dict(parent))]
            elif abs(total - best) <= 1e-12:
                min_trees.append((root, dict(parent)))
    if not min_trees:
        raise ValueError("no spanning in-tree exists on the given adjacency")

    passes = True
    for _, parent in min_trees:
        if not any(res[v, pa] <= zero_tol for v, pa in parent.items()):
            passes = False
            break
    w_root, w_parent = min_trees[0]
    edges = [(v, pa, float(res[v, pa])) for v, pa in sorted(w_parent.items())]
    roots = sorted({r for r, _ in min_trees})
    return MinTreeReport(passes=passes, min_resistance=float(best),
                         min_roots=roots, witness_root=w_root,
                         witness_edges=edges, num_min_trees=len(min_trees))


# ----------------------------------------------------------------------
# resistance algebra
#
# A positive function of tau is modeled as a finite sum of terms
# g(tau) * exp(-R/tau) with sub-exponential g.  Only the tags and the
# R values are tracked; g is never evaluated.


@dataclass(frozen=True)
class ResistanceTerm:
    tag: str          # opaque label for the sub-exponential factor
    resistance: float

    def __post_init__(self):
        if not math.isfinite(self.resistance):
            raise ValueError("term resistance must be finite")


@dataclass(frozen=True)
class ResistanceExpr:
    terms: tuple

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("expression needs at least one term")

    @property
    def resistance(self) -> float:
        """Slowest decay rate wins: min over term resistances."""
        return min(t.resistance for t in self.terms)


def res_of_const(tag: str = "c") -> ResistanceExpr:
    """A positive constant (or any sub-exponential factor): resistance 0."""
    return ResistanceExpr(terms=(ResistanceTerm(tag=tag, resistance=0.0),))


def res_of_exp(kappa: float, tag: str | None = None) -> ResistanceExpr:
    """exp(-kappa/tau): resistance kappa."""
    label = tag if tag is not None else f"e^(-{kappa}/tau)"
    return ResistanceExpr(terms=(ResistanceTerm(tag=label,
                                                resistance=float(kappa)),))


def res_add(e1: ResistanceExpr, e2: ResistanceExpr) -> ResistanceExpr:
    return ResistanceExpr(terms=e1.terms + e2.terms)


def res_sub(e1: ResistanceExpr, e2: ResistanceExpr) -> ResistanceExpr:
    """f1 - f2 keeps f1's decay rate only when f1 dominates; otherwise the
    difference's sign and rate are indeterminate at this level."""
    if not e1.resistance < e2.resistance:
        raise ValueError("difference resistance is undefined unless the "
                         "minuend decays strictly slower "
                         f"({e1.resistance} vs {e2.resistance})")
    tag = f"({'+'.join(t.tag for t in e1.terms)})-" \
          f"({'+'.join(t.tag for t in e2.terms)})"
    return ResistanceExpr(terms=(ResistanceTerm(tag=tag,
                                                resistance=e1.resistance),))


def res_mul(e1: ResistanceExpr, e2: ResistanceExpr) -> ResistanceExpr:
    terms = tuple(ResistanceTerm(tag=f"{a.tag}*{b.tag}",
                                 resistance=a.resistance + b.resistance)
                  for a in e1.terms for b in e2.terms)
    return ResistanceExpr(terms=terms)


def res_inv(e: ResistanceExpr) -> ResistanceExpr:
    """1/f for a single-term f with nonzero resistance."""
    if len(e.terms) != 1:
        raise ValueError("inverse is defined for single-term expressions only")
    t = e.terms[0]
    if t.resistance == 0.0:
        raise ValueError("inverse requires a nonzero resistance")
    return ResistanceExpr(terms=(ResistanceTerm(tag=f"1/({t.tag})",
                                                resistance=-t.resistance),))


def empirical_resistance(f, tau_grid, residual_tol: float = 5e-2) -> float:
    """Estimate the decay rate of a positive function from samples.

    Fits -tau * ln f(tau) linearly in tau and reports the tau -> 0
    intercept.  A large fit residual means the sub-exponential factor still
    dominates on the given grid; that triggers a warning, not an error.
    """
    taus = np.asarray(sorted(float(t) for t in tau_grid))
    if len(taus) < 2:
        raise ValueError("tau_grid needs at least two points")
    vals = np.array([float(f(t)) for t in taus])
    if np.any(vals <= 0):
        raise ValueError("f must be positive on the grid")
    y = -taus * np.log(vals)
    slope, intercept = np.polyfit(taus, y, 1)
    resid = float(np.max(np.abs(intercept + slope * taus - y)))
    if resid > residual_tol:
        warnings.warn(f"empirical resistance fit residual {resid:.3e} "
                      "exceeds tolerance; grid may be too coarse for the "
                      "sub-exponential factor", stacklevel=2)
    return float(intercept)
