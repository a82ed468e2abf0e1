"""The channel assignment game: profiles, marginal-contribution utilities,
and the sum-rate potential.

Each link (UE) is a player whose action is a channel index.  A player's
utility is the sum rate of its co-channel set with the player transmitting
minus the same sum with the player's transmitter silenced, normalized by an
analytic upper bound on the network sum rate.  With that definition the
expected sum rate is an exact potential of the game.

Utility evaluation has two modes.  In ``deterministic`` mode all fading
coefficients are frozen to 1 and utilities are exact (float64); this is the
regime the exact analysis tools operate in.  In ``noisy`` mode utilities are
sample means over freshly drawn Rayleigh fading; the sampling pipeline runs
in float32 for throughput, which is far below the estimation noise floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radio import (FadingRealization, RadioParams, Topology, link_tx_powers,
                    sample_fading_block)

__all__ = [
    "AssignmentProfile",
    "CapGame",
    "UtilityEstimate",
    "cochannel_set",
    "utility_sample",
    "utility_mean",
    "potential",
    "verify_potential_identity",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class AssignmentProfile:
    """A channel assignment vector plus passive-player flags.

    Passive players (UECs) keep fixed dedicated channels; active players
    (UEDs) may change theirs.
    """

    channels: np.ndarray   # (L,) channel index per link
    passive: np.ndarray    # (L,) True for passive links

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.int16).copy()
        pv = np.asarray(self.passive, dtype=bool).copy()
        if ch.shape != pv.shape:
            raise ValueError("channels and passive must have equal length")
        ch.setflags(write=False)
        pv.setflags(write=False)
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "passive", pv)

    @property
    def num_players(self) -> int:
        return len(self.channels)

    def active_indices(self) -> np.ndarray:
        return np.nonzero(~self.passive)[0]

    def validate(self, num_channels: int) -> None:
        if self.num_players and (self.channels.min() < 0
                                 or self.channels.max() >= num_channels):
            raise ValueError("channel index out of range")
        passive_ch = self.channels[self.passive]
        if len(passive_ch) != len(set(passive_ch.tolist())):
            raise ValueError("passive players must hold distinct channels")

    def with_channel(self, player: int, channel: int) -> "AssignmentProfile":
        """Copy of the profile with one active player's channel replaced."""
        if self.passive[player]:
            raise ValueError(f"player {player} is passive; its channel is fixed")
        ch = self.channels.copy()
        ch[player] = channel
        return AssignmentProfile(channels=ch, passive=self.passive)

    def key(self) -> tuple:
        """Hashable identity of the assignment."""
        return tuple(self.channels.tolist())


@dataclass
class UtilityEstimate:
    """Sample-mean utility with its sample count."""

    mean: float
    n_samples: int
    samples: np.ndarray | None = None  # retained per-sample values, optional


class CapGame:
    """Binds a topology and radio parameters into the assignment game.

    Immutable after construction; utility evaluation is a pure function of
    (profile, fading or seed).
    """

    def __init__(self, topology: Topology, params: RadioParams,
                 mode: str = "noisy"):
        if mode not in ("noisy", "deterministic"):
            raise ValueError("mode must be 'noisy' or 'deterministic'")
        self.topology = topology
        self.params = params
        self.mode = mode
        self.num_channels = params.num_channels
        self.num_players = topology.num_links
        self.passive_mask = topology.is_uec_link()
        self.active_players = np.nonzero(~self.passive_mask)[0]

        # Received-power matrix: recv_power[j, i] = P_j * G[j, i].
        powers = link_tx_powers(topology, params)
        self._recv_power = powers[:, None] * topology.mean_gain_matrix \
            if self.num_players else np.zeros((0, 0))
        self._recv_power32 = self._recv_power.astype(np.float32)
        self._noise_w = params.noise_power_w
        self._lo = params.sinr_min
        self._hi = params.sinr_max
        # Certified upper bound on any profile's sum rate, bits/s.
        self.phi_max = self.num_players * params.max_rate_per_ue
        # bits/s per unit of natural-log rate sum.
        self._bits_scale = params.bandwidth_hz / _LN2
        self._util_scale = self._bits_scale / self.phi_max \
            if self.num_players else 0.0

    # ------------------------------------------------------------------
    # profiles

    def initial_profile(self, rng: np.random.Generator | None = None
                        ) -> AssignmentProfile:
        """Starting assignment: UEC k holds channel k; active players random
        (uniform) when an rng is given, channel 0 otherwise."""
        ch = np.zeros(self.num_players, dtype=np.int16)
        n_uec = int(self.passive_mask.sum())
        ch[:n_uec] = np.arange(n_uec)
        if rng is not None and len(self.active_players):
            ch[self.active_players] = rng.integers(
                0, self.num_channels, size=len(self.active_players))
        return AssignmentProfile(channels=ch, passive=self.passive_mask)

    # ------------------------------------------------------------------
    # exact (frozen-fading) evaluation, float64

    def _channel_rate_list(self, members: np.ndarray,
                           silenced: int | None = None) -> np.ndarray:
        """Exact bits/s rates of the member links of one channel.

        ``silenced`` removes that link's transmit power from the
        interference sums (its own rate is not reported).
        """
        m = len(members)
        if m == 0:
            return np.zeros(0)
        w = self._recv_power[np.ix_(members, members)]
        sig = np.diag(w).copy()
        wz = w.copy()
        np.fill_diagonal(wz, 0.0)
        if silenced is not None:
            pos = int(np.nonzero(members == silenced)[0][0])
            wz[pos, :] = 0.0
            sig[pos] = 0.0  # silenced link reports no rate
        q = sig / (wz.sum(axis=0) + self._noise_w)
        np.clip(q, self._lo, self._hi, out=q)
        rates = self.params.bandwidth_hz * np.log2(1.0 + q)
        if silenced is not None:
            rates[pos] = 0.0
        return rates

    def potential_exact(self, profile: AssignmentProfile) -> float:
        """Frozen-fading sum rate over all links, bits/s."""
        total = 0.0
        for c in np.unique(profile.channels):
            members = np.nonzero(profile.channels == c)[0]
            total += float(self._channel_rate_list(members).sum())
        return total

    def normalized_potential(self, profile: AssignmentProfile) -> float:
        """Frozen-fading sum rate divided by the phi_max bound, in [0, 1]."""
        if self.num_players == 0:
            return 0.0
        return self.potential_exact(profile) / self.phi_max

    def utility_exact(self, profile: AssignmentProfile, player: int) -> float:
        """Exact normalized marginal-contribution utility (deterministic)."""
        members = cochannel_set(profile, int(profile.channels[player]))
        with_i = self._channel_rate_list(members).sum()
        without_i = self._channel_rate_list(members, silenced=player).sum()
        return float((with_i - without_i) / self.phi_max)

    # ------------------------------------------------------------------
    # sampled evaluation (Rayleigh fading), float32 pipeline

    def _utility_acc(self, members: np.ndarray, player: int,
                     f: np.ndarray) -> np.ndarray:
        """Per-sample rate-sum differences (natural-log units, unscaled).

        ``f`` has shape (m, m, n); entry [k, j, :] multiplies the mean gain
        from member k's transmitter to member j's receiver.  Arithmetic
        follows the block's dtype.
        """
        m = len(members)
        n = f.shape[2]
        dtype = f.dtype
        w = self._recv_power[np.ix_(members, members)].astype(dtype)
        wz = w.copy()
        np.fill_diagonal(wz, 0.0)
        i_pos = int(np.nonzero(members == player)[0][0])
        wz_wo = wz.copy()
        wz_wo[i_pos, :] = 0.0  # interference sums with the player silenced
        p0 = dtype.type(self._noise_w)
        lo = dtype.type(self._lo)
        hi = dtype.type(self._hi)

        acc = np.zeros(n, dtype=dtype)
        for j in range(m):
            fj = f[:, j, :]                      # (m, n)
            sig = w[j, j] * fj[j]
            q = sig / (wz[:, j] @ fj + p0)
            np.clip(q, lo, hi, out=q)
            np.log1p(q, out=q)
            acc += q
            if j != i_pos:
                q2 = sig / (wz_wo[:, j] @ fj + p0)
                np.clip(q2, lo, hi, out=q2)
                np.log1p(q2, out=q2)
                acc -= q2
        return acc

    def _sampled_utilities(self, members: np.ndarray, player: int,
                           fading_block: np.ndarray) -> np.ndarray:
        """Per-sample utilities for ``player`` within its co-channel set."""
        f = np.asarray(fading_block)
        one = f.ndim == 2
        if one:
            f = f[:, :, None]
        out = self._utility_acc(members, player, f).astype(np.float64) \
            * self._util_scale
        return out[0] if one else out

    def _sampled_utility_mean(self, members: np.ndarray, player: int,
                              n_samples: int, rng: np.random.Generator,
                              retain: bool = False):
        """Draw fresh fading and return (mean, samples or None)."""
        m = len(members)
        block = sample_fading_block(rng, (m, m, n_samples), np.float32)
        if retain:
            samples = self._sampled_utilities(members, player, block)
            return float(samples.mean()), samples
        acc = self._utility_acc(members, player, block)
        mean = float(acc.sum(dtype=np.float64)) / n_samples * self._util_scale
        return mean, None

    def _sampled_channel_rate_sums(self, members: np.ndarray,
                                   fading_block: np.ndarray) -> np.ndarray:
        """Per-sample natural-log rate sums of one channel's members."""
        m = len(members)
        f = fading_block
        n = f.shape[2]
        dtype = f.dtype
        w = self._recv_power[np.ix_(members, members)].astype(dtype)
        wz = w.copy()
        np.fill_diagonal(wz, 0.0)
        p0 = dtype.type(self._noise_w)
        lo = dtype.type(self._lo)
        hi = dtype.type(self._hi)
        acc = np.zeros(n, dtype=dtype)
        for j in range(m):
            fj = f[:, j, :]
            q = (w[j, j] * fj[j]) / (wz[:, j] @ fj + p0)
            np.clip(q, lo, hi, out=q)
            np.log1p(q, out=q)
            acc += q
        return acc


# ----------------------------------------------------------------------
# module-level operations


def cochannel_set(profile: AssignmentProfile, channel: int) -> np.ndarray:
    """Indices of the UEs assigned to ``channel``, ascending."""
    return np.nonzero(np.asarray(profile.channels) == channel)[0]


def utility_sample(game: CapGame, profile: AssignmentProfile, player: int,
                   fading: FadingRealization) -> float:
    """One sampled utility of an active player under explicit fading.

    The value depends only on the fading coefficients among the player's
    co-channel set.  Arithmetic follows the coefficient dtype, so float64
    fading gives a full-precision reference evaluation.
    """
    if profile.passive[player]:
        raise ValueError("utility is defined for active players only")
    members = cochannel_set(profile, int(profile.channels[player]))
    block = np.asarray(fading.coefficients)[np.ix_(members, members)]
    return float(game._sampled_utilities(members, player, block))


def utility_mean(game: CapGame, profile: AssignmentProfile, player: int,
                 n_samples: int, rng_seed,
                 retain_samples: bool = False) -> UtilityEstimate:
    """Mean of ``n_samples`` independent utility samples (fresh fading each).

    In deterministic mode the exact utility is returned unchanged for any
    sample count.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if profile.passive[player]:
        raise ValueError("utility is defined for active players only")
    if game.mode == "deterministic":
        value = game.utility_exact(profile, player)
        samples = np.full(n_samples, value) if retain_samples else None
        return UtilityEstimate(mean=value, n_samples=n_samples, samples=samples)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    members = cochannel_set(profile, int(profile.channels[player]))
    mean, samples = game._sampled_utility_mean(members, player, n_samples,
                                               rng, retain=retain_samples)
    return UtilityEstimate(mean=mean, n_samples=n_samples, samples=samples)


def potential(game: CapGame, profile: AssignmentProfile, num_mc: int = 1,
              rng_seed=None) -> float:
    """Network sum rate phi(profile) in bits/s.

    Deterministic mode returns the exact frozen-fading value; noisy mode
    returns a Monte Carlo mean over ``num_mc`` full fading draws.
    """
    if game.mode == "deterministic":
        return game.potential_exact(profile)
    if num_mc < 1:
        raise ValueError("num_mc must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    total = np.zeros(num_mc, dtype=np.float64)
    for c in np.unique(profile.channels):
        members = np.nonzero(profile.channels == c)[0]
        block = sample_fading_block(rng, (len(members), len(members), num_mc),
                                    np.float32)
        total += game._sampled_channel_rate_sums(members, block)
    return float(total.mean() * game._bits_scale)


def verify_potential_identity(game: CapGame, player: int, chan_a: int,
                              chan_b: int, profile: AssignmentProfile) -> float:
    """Residual |dU - dphi| for one unilateral channel switch, both sides
    normalized by phi_max.  Exact-potential games give ~0.

    Only valid in deterministic mode, where utilities are exact.
    """
    if game.mode != "deterministic":
        raise ValueError("potential identity requires deterministic mode; "
                         "in noisy mode it holds only in expectation")
    prof_a = profile.with_channel(player, chan_a) \
        if profile.channels[player] != chan_a else profile
    prof_b = profile.with_channel(player, chan_b)
    du = game.utility_exact(prof_a, player) - game.utility_exact(prof_b, player)
    dphi = game.normalized_potential(prof_a) - game.normalized_potential(prof_b)
    return abs(du - dphi)
