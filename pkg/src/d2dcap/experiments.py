"""Experiment driver: flat-text configs, seeded multi-realization runs,
parameter sweeps with paired seeds, and deterministic table emitters.

Configs carry radio quantities in dBm/dB and convert to linear units when
the radio layer is built, so files stay human-auditable.  Every emitted
table is reproducible byte for byte from (config, seeds): no timestamps, no
environment-dependent content.
"""

from __future__ import annotations

import ast
import dataclasses
import hashlib
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import analysis
from .game import CapGame
from .learning import (BoundedNoise, FixedTemperature,
                       LogDecreasingTemperature, Trajectory,
                       UnboundedMgfNoise, run_blla, run_br)
from .radio import (RadioParams, Topology, dbm_to_watts, generate_topology,
                    thermal_noise_watts, watts_to_dbm)

__all__ = [
    "ExperimentConfig",
    "PointResult",
    "SweepResult",
    "run_experiment",
    "sweep_channels",
    "sweep_ues",
    "StationaryReport",
    "analyze_stationary",
]

_ALGORITHMS = ("blla", "br")
_SCHEDULES = ("fixed", "log_decreasing")
_NOISE_MODELS = ("bounded", "gaussian", "none")

_DEFAULT_NOISE_DBM = float(watts_to_dbm(thermal_noise_watts(180e3)))


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a run, in one flat record."""

    # instance; the default cell is desk-scale dense so that co-channel
    # interference is material with few UEs (200 m cells with 4 links are
    # interference-free and make every assignment equivalent)
    num_uec: int = 1
    num_ued: int = 4
    num_channels: int = 3
    topology_seed: int = 35
    shared_topology: bool = True   # one layout for all realizations
    # radio, config-layer units: dBm / dB
    cell_radius_m: float = 60.0
    d2d_radius_m: float = 20.0
    bandwidth_hz: float = 180e3
    ue_power_dbm: float = 25.0
    bs_power_dbm: float = 46.0
    noise_dbm: float = _DEFAULT_NOISE_DBM  # thermal floor for 180 kHz
    pathloss_exponent: float = 3.5
    shadowing_sigma_db: float = 6.0
    sinr_min_db: float = -10.0
    sinr_max_db: float = 23.0
    # algorithm
    algorithm: str = "blla"        # blla | br
    schedule: str = "fixed"        # fixed | log_decreasing
    tau: float = 0.05              # fixed-schedule temperature
    tau_scale: float = 0.1         # log_decreasing: tau(t) = scale/ln(1+t)
    noise_model: str = "bounded"   # bounded | gaussian | none
    noise_width: float = 1.0       # bounded: estimation-noise interval width
    noise_sigma: float = 1.0       # gaussian: noise std dev
    xi: float = 1e-5               # estimation failure budget
    br_samples: int = 1            # better-response per-phase sample budget
    # run
    horizon: int = 500
    realizations: int = 100
    base_seed: int = 1000
    track_optimum: bool = True     # brute-force optimum and occupancy
    out_dir: str = ""              # empty: compute only, write nothing

    # -- validation ----------------------------------------------------

    def validate(self) -> None:
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"algorithm must be one of {_ALGORITHMS}")
        if self.schedule not in _SCHEDULES:
            raise ValueError(f"schedule must be one of {_SCHEDULES}")
        if self.noise_model not in _NOISE_MODELS:
            raise ValueError(f"noise_model must be one of {_NOISE_MODELS}")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.num_uec > self.num_channels:
            raise ValueError("num_uec must not exceed num_channels")
        if self.num_uec < 0 or self.num_ued < 0:
            raise ValueError("counts must be non-negative")
        self.radio_params()  # nested invariants

    # -- construction of the underlying objects -------------------------

    def radio_params(self) -> RadioParams:
        return RadioParams(
            cell_radius_m=self.cell_radius_m,
            d2d_radius_m=self.d2d_radius_m,
            num_channels=self.num_channels,
            bandwidth_hz=self.bandwidth_hz,
            tx_power_ue_w=float(dbm_to_watts(self.ue_power_dbm)),
            tx_power_bs_w=float(dbm_to_watts(self.bs_power_dbm)),
            noise_power_w=float(dbm_to_watts(self.noise_dbm)),
            pathloss_exponent=self.pathloss_exponent,
            shadowing_sigma_db=self.shadowing_sigma_db,
            sinr_min_db=self.sinr_min_db,
            sinr_max_db=self.sinr_max_db,
        )

    def topology(self, realization: int = 0) -> Topology:
        seed = self.topology_seed if self.shared_topology \
            else self.topology_seed + realization
        return generate_topology(self.radio_params(), self.num_uec,
                                 self.num_ued, seed)

    def game(self, topology: Topology, mode: str = "noisy") -> CapGame:
        return CapGame(topology, self.radio_params(), mode=mode)

    def schedule_obj(self):
        if self.schedule == "fixed":
            return FixedTemperature(tau=self.tau)
        return LogDecreasingTemperature(scale=self.tau_scale)

    def noise_obj(self):
        if self.noise_model == "bounded":
            return BoundedNoise(interval_width=self.noise_width)
        if self.noise_model == "gaussian":
            return UnboundedMgfNoise.gaussian(sigma=self.noise_sigma)
        return None

    # -- flat text form --------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno} is not key = value: "
                                 f"{raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ValueError(f"unknown config key {key!r} on line {lineno}")
            try:
                kwargs[key] = ast.literal_eval(value)
            except (ValueError, SyntaxError):
                kwargs[key] = value  # bare string
        return cls(**kwargs)

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def config_hash(self) -> str:
        """Stable short digest of the full configuration."""
        canon = "\n".join(sorted(self.to_text().splitlines()))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


# ----------------------------------------------------------------------
# results


@dataclass
class PointResult:
    """Aggregated outcome of one experiment point."""

    param: str                 # swept parameter name, "" for single runs
    value: object              # swept value, None for single runs
    config: ExperimentConfig
    config_hash: str
    seed_range: tuple          # (first, last) learning seeds
    window_slots: int          # final-window length used for statistics
    mean_trace: np.ndarray     # (T,) per-slot sum rate, mean over realizations
    per_realization_final: np.ndarray  # (R,) final-window mean sum rates
    final_profiles: np.ndarray         # (R, L) final channel vectors
    final_window_mean: float
    final_window_se: float     # sample std over realizations / sqrt(R)
    mean_occupancy: float | None = None  # of the optimal set, if tracked
    phi_star: float | None = None        # brute-force optimum, bits/s
    optimum_keys: tuple | None = None

    def label(self) -> str:
        return "run" if not self.param else f"{self.param}_{self.value}"


@dataclass
class SweepResult:
    """One or more experiment points sharing a base config and seeds."""

    points: list
    base_config: ExperimentConfig
    config_hash: str

    def write(self, out_dir: str) -> list:
        return _write_sweep(self, out_dir)


# ----------------------------------------------------------------------
# running


def _constant_trajectory(game: CapGame, horizon: int, seed) -> Trajectory:
    """Degenerate run used when there are no active players."""
    profile = game.initial_profile()
    rate = game.potential_exact(profile)
    t = np.arange(1, horizon + 1, dtype=np.int64)
    return Trajectory(initial_channels=profile.channels.copy(),
                      profiles=np.tile(profile.channels, (horizon, 1)),
                      t=t, tau=np.full(horizon, math.nan),
                      n_samples=np.zeros(horizon, dtype=np.int64),
                      player=np.full(horizon, -1, dtype=np.int32),
                      trial=np.full(horizon, -1, dtype=np.int32),
                      accepted=np.zeros(horizon, dtype=bool),
                      delta_hat=np.full(horizon, math.nan),
                      sum_rate=np.full(horizon, rate), seed=seed)


def _run_one(config: ExperimentConfig, topology: Topology,
             seed: int) -> Trajectory:
    mode = "deterministic" if config.noise_model == "none" else "noisy"
    game = config.game(topology, mode=mode)
    if len(game.active_players) == 0:
        return _constant_trajectory(game, config.horizon, seed)
    if config.algorithm == "blla":
        return run_blla(game, config.schedule_obj(), config.noise_obj(),
                        config.xi, config.horizon, seed)
    return run_br(game, config.br_samples, config.horizon, seed)


def _point_result(config: ExperimentConfig, param: str = "",
                  value=None) -> PointResult:
    config.validate()
    horizon = config.horizon
    reals = config.realizations
    window = max(1, horizon - int(math.floor(horizon * 0.75)))

    shared_topo = config.topology(0) if config.shared_topology else None
    optimum_cache: dict = {}

    def optimum_for(topo: Topology):
        key = id(topo)
        if key not in optimum_cache:
            optimum_cache[key] = analysis.brute_force_optimum(
                config.game(topo, mode="deterministic"))
        return optimum_cache[key]

    trace_sum = np.zeros(horizon)
    finals = np.zeros(reals)
    occupancies = np.zeros(reals) if config.track_optimum else None
    final_profiles = None
    phi_star = None
    opt_keys: tuple | None = None

    for k in range(reals):
        topo = shared_topo if shared_topo is not None else config.topology(k)
        seed = config.base_seed + k
        traj = _run_one(config, topo, seed)
        if traj.horizon != horizon:
            raise RuntimeError(f"realization {k} (seed {seed}) returned "
                               f"{traj.horizon} slots, expected {horizon}")
        trace_sum += traj.sum_rate
        finals[k] = traj.final_window_mean_sum_rate()
        if final_profiles is None:
            final_profiles = np.zeros((reals, len(traj.initial_channels)),
                                      dtype=np.int16)
        final_profiles[k] = traj.profiles[-1] if horizon else \
            traj.initial_channels
        if config.track_optimum:
            opt = optimum_for(topo)
            occupancies[k] = traj.occupancy(opt.keys())
            if shared_topo is not None:
                phi_star = opt.phi_star
                opt_keys = tuple(sorted(opt.keys()))

    se = float(finals.std(ddof=1) / math.sqrt(reals)) if reals > 1 else 0.0
    return PointResult(
        param=param, value=value, config=replace(config),
        config_hash=config.config_hash(),
        seed_range=(config.base_seed, config.base_seed + reals - 1),
        window_slots=window, mean_trace=trace_sum / reals,
        per_realization_final=finals, final_profiles=final_profiles,
        final_window_mean=float(finals.mean()), final_window_se=se,
        mean_occupancy=float(occupancies.mean())
        if occupancies is not None else None,
        phi_star=phi_star, optimum_keys=opt_keys)


def run_experiment(config: ExperimentConfig) -> SweepResult:
    """Run ``config.realizations`` seeded trajectories and aggregate them.

    Writes the standard tables under ``config.out_dir`` when that is set.
    """
    point = _point_result(config)
    result = SweepResult(points=[point], base_config=replace(config),
                         config_hash=config.config_hash())
    if config.out_dir:
        result.write(config.out_dir)
    return result


def _sweep(config: ExperimentConfig, param: str, values,
           make_config) -> SweepResult:
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    points = []
    for v in values:
        cfg = make_config(v)
        cfg.out_dir = ""  # points share the sweep's output directory
        points.append(_point_result(cfg, param=param, value=v))
    result = SweepResult(points=points, base_config=replace(config),
                         config_hash=config.config_hash())
    if config.out_dir:
        result.write(config.out_dir)
    return result


def sweep_channels(config: ExperimentConfig, channel_counts) -> SweepResult:
    """One point per channel count; realization k reuses seed base+k at
    every point, so point differences are attributable to the count."""
    for c in channel_counts:
        if c < config.num_uec:
            raise ValueError(f"channel count {c} is below num_uec="
                             f"{config.num_uec}")
    return _sweep(config, "channels", channel_counts,
                  lambda c: replace(config, num_channels=int(c)))


def sweep_ues(config: ExperimentConfig, ued_counts) -> SweepResult:
    """One point per D2D pair count, paired seeds as in sweep_channels."""
    for c in ued_counts:
        if c < 0:
            raise ValueError("UED counts must be non-negative")
    return _sweep(config, "ueds", ued_counts,
                  lambda c: replace(config, num_ued=int(c)))


# ----------------------------------------------------------------------
# emitters (all output deterministic byte for byte)


def _write_lines(path: str, lines) -> None:
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def _provenance(result: SweepResult, point: PointResult) -> list:
    lo, hi = point.seed_range
    return [f"# config_hash={result.config_hash}",
            f"# seeds={lo}..{hi}",
            f"# window_slots={point.window_slots}"]


def _write_sweep(result: SweepResult, out_dir: str) -> list:
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def emit(name: str, lines) -> None:
        _write_lines(os.path.join(out_dir, name), lines)
        written.append(name)

    emit("config.txt", result.base_config.to_text().splitlines())

    summary = _provenance(result, result.points[0]) + [
        "param,value,realizations,horizon,window_slots,final_window_mean,"
        "final_window_se,mean_occupancy,phi_star"]
    for p in result.points:
        occ = "" if p.mean_occupancy is None else repr(p.mean_occupancy)
        phi = "" if p.phi_star is None else repr(p.phi_star)
        summary.append(f"{p.param},{p.value},{p.config.realizations},"
                       f"{p.config.horizon},{p.window_slots},"
                       f"{p.final_window_mean!r},{p.final_window_se!r},"
                       f"{occ},{phi}")
    emit("summary.csv", summary)

    for p in result.points:
        head = _provenance(result, p)
        trace = head + ["t,mean_sum_rate"]
        trace += [f"{t + 1},{float(v)!r}" for t, v in enumerate(p.mean_trace)]
        emit(f"{p.label()}_trace.csv", trace)

        rows = head + ["realization,seed,final_window_mean,channels"]
        lo = p.seed_range[0]
        for k in range(len(p.per_realization_final)):
            ch = "|".join(str(int(c)) for c in p.final_profiles[k])
            rows.append(f"{k},{lo + k},"
                        f"{float(p.per_realization_final[k])!r},{ch}")
        emit(f"{p.label()}_final_profiles.csv", rows)

    manifest = [f"config_hash {result.config_hash}"]
    manifest += [f"file {name}" for name in sorted(written)]
    _write_lines(os.path.join(out_dir, "manifest.txt"), manifest)
    written.append("manifest.txt")
    return written


# ----------------------------------------------------------------------
# exact-analysis report


@dataclass
class StationaryReport:
    """Distributions per temperature plus the stability verdict."""

    states: list               # channel-vector tuples, enumeration order
    taus: list
    pi_direct: np.ndarray      # (num_taus, num_states); NaN rows: solve failed
    pi_gibbs: np.ndarray
    pi_tree: np.ndarray | None  # None when the state space exceeds the cap
    stable_keys: tuple | None  # None for single-tau grids
    optimum_keys: tuple
    verdict: bool | None       # stable set == brute-force optimum set
    max_direct_gibbs_gap: float
    direct_failed_taus: tuple = ()  # too cold for a certified direct solve

    def to_csv_lines(self) -> list:
        lines = ["tau,state,pi_direct,pi_gibbs,pi_tree"]
        for i, tau in enumerate(self.taus):
            for j, s in enumerate(self.states):
                label = "|".join(str(x) for x in s)
                tree = "" if self.pi_tree is None \
                    else repr(float(self.pi_tree[i, j]))
                lines.append(f"{tau!r},{label},"
                             f"{float(self.pi_direct[i, j])!r},"
                             f"{float(self.pi_gibbs[i, j])!r},{tree}")
        return lines


def analyze_stationary(config: ExperimentConfig, tau_grid) -> StationaryReport:
    """Exact stationary analysis of the configured instance.

    Computes the one-slot kernel's stationary law per grid temperature by
    direct solve and Gibbs form (and the tree theorem when the state space
    is small enough), plus the stochastic-stability verdict for grids of
    length >= 2.
    """
    config.validate()
    taus = [float(t) for t in tau_grid]
    if not taus:
        raise ValueError("tau_grid must be non-empty")
    game = config.game(config.topology(0), mode="deterministic")
    profiles = analysis.enumerate_profiles(game)  # size guard runs here
    states = [p.key() for p in profiles]
    n = len(states)

    pi_direct = np.zeros((len(taus), n))
    pi_gibbs = np.zeros((len(taus), n))
    use_tree = n <= 8
    pi_tree = np.zeros((len(taus), n)) if use_tree else None
    direct_failed = []
    for i, tau in enumerate(taus):
        kernel = analysis.exact_transition_matrix(game, tau)
        try:
            pi_direct[i] = analysis.stationary_direct(kernel).probs
        except ValueError:
            # very cold chains defeat the dense solve's residual contract;
            # the Gibbs form stays exact
            pi_direct[i] = math.nan
            direct_failed.append(tau)
        pi_gibbs[i] = analysis.gibbs_distribution(game, tau).probs
        if use_tree:
            pi_tree[i] = analysis.stationary_tree(kernel).probs

    optimum = analysis.brute_force_optimum(game)
    opt_keys = tuple(sorted(optimum.keys()))
    stable_keys = None
    verdict = None
    if len(taus) >= 2:
        stable = analysis.stochastically_stable_states(game, taus)
        stable_keys = tuple(sorted(p.key() for p in stable))
        verdict = stable_keys == opt_keys

    solved = ~np.isnan(pi_direct).any(axis=1)
    gap = float(np.max(np.abs(pi_direct[solved] - pi_gibbs[solved]))) \
        if solved.any() else math.nan
    report = StationaryReport(
        states=states, taus=taus, pi_direct=pi_direct, pi_gibbs=pi_gibbs,
        pi_tree=pi_tree, stable_keys=stable_keys, optimum_keys=opt_keys,
        verdict=verdict, max_direct_gibbs_gap=gap,
        direct_failed_taus=tuple(direct_failed))
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        lines = [f"# config_hash={config.config_hash()}"]
        lines += report.to_csv_lines()
        _write_lines(os.path.join(config.out_dir, "stationary.csv"), lines)
    return report
