"""Score dynamics: continuous-time fields, a fixed-step RK4 integrator,
and discrete/stochastic recursions.

The first-order flow keeps an exponentially discounted score per action,

    zdot = gamma * (U(sigma(z)) - z),        x = sigma(z),

with the undiscounted variant zdot = U(sigma(z)) behind a flag.  The
higher-order flow passes the payoff through a strictly-proper feedback
filter (A, B, C, D) with zero DC gain before it reaches the score:

    zdot  = gamma * (U(x) - z - v),  xidot = A xi + B x,  v = C xi + D x.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .choice import softmax
from .errors import ConfigurationError, DomainError, IntegrationDivergedError
from .games import GameSpec, expected_payoff_vector, pure_payoff


@dataclass(frozen=True)
class LearningParams:
    """Learning rate gamma, soft-max temperature eps, and the discount switch."""

    gamma: float = 1.0
    eps: float = 1.0
    undiscounted: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0.0):
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")
        if not (np.isfinite(self.eps) and self.eps > 0.0):
            raise DomainError(f"eps must be positive, got {self.eps!r}")


@dataclass
class FeedbackBlock:
    """State-space payoff filter H(s) = C (sI - A)^-1 B + D, stored as full
    block-diagonal matrices over all score coordinates."""

    a_mat: np.ndarray
    b_mat: np.ndarray
    c_mat: np.ndarray
    d_mat: np.ndarray

    def __post_init__(self):
        mats = []
        for m in (self.a_mat, self.b_mat, self.c_mat, self.d_mat):
            m = np.ascontiguousarray(m, dtype=float)
            mats.append(m)
        shapes = {m.shape for m in mats}
        if len(shapes) != 1 or mats[0].ndim != 2 or mats[0].shape[0] != mats[0].shape[1]:
            raise DomainError("feedback block matrices must be square and equally sized")
        self.a_mat, self.b_mat, self.c_mat, self.d_mat = mats
        self._valid: bool | None = None

    @classmethod
    def high_pass(cls, gain: float, cutoff: float, action_counts: Sequence[int]) -> "FeedbackBlock":
        """First-order high-pass filter K s / (s + a) applied per coordinate."""
        gain = float(gain)
        cutoff = float(cutoff)
        if cutoff <= 0.0:
            raise DomainError(f"cutoff must be positive, got {cutoff!r}")
        if gain < 0.0:
            raise DomainError(f"gain must be nonnegative, got {gain!r}")
        n = int(sum(action_counts))
        eye = np.eye(n)
        return cls(-cutoff * eye, -cutoff * eye, gain * eye, gain * eye)

    @property
    def dim(self) -> int:
        return self.a_mat.shape[0]

    def spectral_abscissa(self) -> float:
        return float(np.linalg.eigvals(self.a_mat).real.max())

    def dc_gain(self) -> np.ndarray:
        """H(0) = -C A^-1 B + D; raises ConfigurationError when A is singular."""
        try:
            inv_b = np.linalg.solve(self.a_mat, self.b_mat)
        except np.linalg.LinAlgError as exc:
            raise ConfigurationError("feedback block has singular A matrix") from exc
        return -self.c_mat @ inv_b + self.d_mat

    def ensure_valid(self, dc_tol: float = 1e-10) -> None:
        """Check A Hurwitz and zero DC gain once, then cache the verdict."""
        if self._valid is True:
            return
        if self.spectral_abscissa() >= 0.0:
            raise ConfigurationError("feedback block A matrix is not Hurwitz")
        dc = float(np.abs(self.dc_gain()).max())
        if dc > dc_tol:
            raise ConfigurationError(f"feedback block DC gain {dc:.3e} exceeds {dc_tol:.1e}")
        self._valid = True

    def equilibrium_filter_state(self, x_star: np.ndarray) -> np.ndarray:
        """xi* = -A^-1 B x*, the filter state at a rest point with strategy x*."""
        return np.linalg.solve(self.a_mat, -self.b_mat @ np.asarray(x_star, dtype=float))


@dataclass
class FeedbackBlockReport:
    """Certification result for a feedback block."""

    hurwitz_ok: bool
    spectral_abscissa: float
    zero_dc_ok: bool
    dc_gain_norm: float
    grid_positive_real_ok: bool
    min_hermitian_eigenvalue: float
    frequencies: np.ndarray

    @property
    def passed(self) -> bool:
        return self.hurwitz_ok and self.zero_dc_ok and self.grid_positive_real_ok

    def to_dict(self) -> dict:
        return {
            "hurwitz_ok": self.hurwitz_ok,
            "spectral_abscissa": self.spectral_abscissa,
            "zero_dc_ok": self.zero_dc_ok,
            "dc_gain_norm": self.dc_gain_norm,
            "grid_positive_real_ok": self.grid_positive_real_ok,
            "min_hermitian_eigenvalue": self.min_hermitian_eigenvalue,
            "frequency_range": [float(self.frequencies[0]), float(self.frequencies[-1])],
            "n_frequencies": int(len(self.frequencies)),
            "passed": self.passed,
        }


def verify_feedback_block(block: FeedbackBlock, freqs: np.ndarray | None = None,
                          dc_tol: float = 1e-10) -> FeedbackBlockReport:
    """Certify a feedback block: A Hurwitz, H(0) = 0, and positive realness
    of H(jw) on a logarithmic frequency grid (default 1e-3..1e3 rad/s,
    200 points, minimum eigenvalue of the Hermitian part)."""
    if freqs is None:
        freqs = np.logspace(-3.0, 3.0, 200)
    freqs = np.asarray(freqs, dtype=float)
    abscissa = block.spectral_abscissa()
    dc_norm = float(np.abs(block.dc_gain()).max())
    n = block.dim
    eye = np.eye(n)
    min_eig = np.inf
    for w in freqs:
        h = block.c_mat @ np.linalg.solve(1j * w * eye - block.a_mat, block.b_mat) + block.d_mat
        herm = 0.5 * (h + h.conj().T)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(herm).min()))
    return FeedbackBlockReport(
        hurwitz_ok=abscissa < 0.0,
        spectral_abscissa=abscissa,
        zero_dc_ok=dc_norm <= dc_tol,
        dc_gain_norm=dc_norm,
        grid_positive_real_ok=min_eig > 0.0,
        min_hermitian_eigenvalue=float(min_eig),
        frequencies=freqs,
    )


# ---------------------------------------------------------------- vector fields

def first_order_field(z, game: GameSpec, params: LearningParams) -> np.ndarray:
    """zdot = gamma (U(sigma(z)) - z), or U(sigma(z)) when undiscounted."""
    z = np.asarray(z, dtype=float)
    x = softmax(z, params.eps, game.action_counts)
    u = expected_payoff_vector(game, x)
    if params.undiscounted:
        return u
    return params.gamma * (u - z)


def higher_order_field(state, game: GameSpec, params: LearningParams,
                       block: FeedbackBlock) -> np.ndarray:
    """Combined (z, xi) field of the filtered score dynamics."""
    block.ensure_valid()
    state = np.asarray(state, dtype=float)
    n = game.total_actions
    if state.shape[-1] != 2 * n:
        raise DomainError(f"state has length {state.shape[-1]}, expected {2 * n}")
    z = state[..., :n]
    xi = state[..., n:]
    x = softmax(z, params.eps, game.action_counts)
    u = expected_payoff_vector(game, x)
    v = xi @ block.c_mat.T + x @ block.d_mat.T
    dz = params.gamma * (u - z - v)
    dxi = xi @ block.a_mat.T + x @ block.b_mat.T
    return np.concatenate([dz, dxi], axis=-1)


def induced_strategy_field(z, game: GameSpec, params: LearningParams) -> np.ndarray:
    """Strategy-space image of the first-order flow at x = sigma(z):

        xdot_i = (gamma/eps) x_i [ (u_i - x.u) - (z_i - x.z) ]   per block."""
    z = np.asarray(z, dtype=float)
    x = softmax(z, params.eps, game.action_counts)
    u = expected_payoff_vector(game, x)
    scale = params.gamma / params.eps
    out = np.empty_like(x)
    for sl in game.block_slices:
        xb, ub, zb = x[..., sl], u[..., sl], z[..., sl]
        mean_u = (xb * ub).sum(axis=-1, keepdims=True)
        mean_z = (xb * zb).sum(axis=-1, keepdims=True)
        out[..., sl] = scale * xb * ((ub - mean_u) - (zb - mean_z))
    return out


def revision_protocol_field(x, z, game: GameSpec, params: LearningParams,
                            adjustment: np.ndarray | None = None) -> np.ndarray:
    """Mean dynamics of the pairwise revision protocol whose switch rate to
    action j is (gamma/eps) x_j (u_j - adj_j - z_j), evaluated literally as
    inflow minus outflow.  Equals induced_strategy_field when x = sigma(z)
    and adjustment is None; pass the filter output v to get the
    higher-order variant."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.shape != (game.total_actions,):
        raise DomainError("x and z must be single profiles of matching length")
    u = expected_payoff_vector(game, x)
    if adjustment is not None:
        u = u - np.asarray(adjustment, dtype=float)
    scale = params.gamma / params.eps
    out = np.empty_like(x)
    for sl in game.block_slices:
        xb, ub, zb = x[sl], u[sl], z[sl]
        c = xb.size
        # rho[i, j]: switch rate from action i to action j.
        rho = scale * np.tile(xb * (ub - zb), (c, 1))
        inflow = xb @ rho
        outflow = xb * rho.sum(axis=1)
        out[sl] = inflow - outflow
    return out


# ------------------------------------------------------------------ integration

@dataclass
class Trajectory:
    """Sampled solution: times (m,), states (m, d), strategies (m, n)."""

    times: np.ndarray
    states: np.ndarray
    strategies: np.ndarray | None = None
    lyapunov: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise DomainError("times and states must align")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0.0):
            raise DomainError("times must be strictly increasing")
        if self.strategies is not None:
            self.strategies = np.asarray(self.strategies, dtype=float)


def integrate(field: Callable[[np.ndarray], np.ndarray], state0, dt: float,
              t_end: float, record_every: int = 1,
              strategy_fn: Callable[[np.ndarray], np.ndarray] | None = None):
    """Classical fixed-step RK4.

    state0 of shape (d,) yields one Trajectory; shape (b, d) integrates a
    batch in lockstep and yields a list of Trajectories.  Samples are taken
    every record_every steps plus the final step; a non-finite sample stops
    integration with IntegrationDivergedError carrying the last good time.
    """
    dt = float(dt)
    t_end = float(t_end)
    record_every = int(record_every)
    if dt <= 0.0 or t_end <= 0.0 or record_every < 1:
        raise DomainError("dt, t_end must be positive and record_every >= 1")
    s = np.array(state0, dtype=float)
    batched = s.ndim == 2
    if s.ndim not in (1, 2):
        raise DomainError("state0 must be a vector or a batch of vectors")
    n_steps = max(1, int(round(t_end / dt)))
    rec_states = [s.copy()]
    rec_steps = [0]
    sixth = dt / 6.0
    for k in range(n_steps):
        k1 = field(s)
        k2 = field(s + 0.5 * dt * k1)
        k3 = field(s + 0.5 * dt * k2)
        k4 = field(s + dt * k3)
        s = s + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        step = k + 1
        if step % record_every == 0 or step == n_steps:
            if not np.all(np.isfinite(s)):
                raise IntegrationDivergedError(
                    f"non-finite state at t={step * dt:.6g}",
                    last_good_time=rec_steps[-1] * dt)
            rec_states.append(s.copy())
            rec_steps.append(step)
    times = np.asarray(rec_steps, dtype=float) * dt
    stacked = np.stack(rec_states)
    if not batched:
        strategies = strategy_fn(stacked) if strategy_fn is not None else None
        return Trajectory(times, stacked, strategies)
    trajs = []
    for b in range(s.shape[0]):
        states_b = stacked[:, b, :]
        strategies = strategy_fn(states_b) if strategy_fn is not None else None
        trajs.append(Trajectory(times.copy(), states_b.copy(), strategies))
    return trajs


def seeded_initial_scores(n: int, seed: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Deterministic initial score draw, uniform per coordinate."""
    return np.random.default_rng(int(seed)).uniform(low, high, int(n))


def simulate_first_order(game: GameSpec, params: LearningParams, z0,
                         dt: float = 0.01, t_end: float = 500.0,
                         record_every: int = 10):
    """Integrate the first-order score flow from z0 ((n,) or batch (b, n))."""
    counts = game.action_counts

    def field(z: np.ndarray) -> np.ndarray:
        return first_order_field(z, game, params)

    def strat(zs: np.ndarray) -> np.ndarray:
        return softmax(zs, params.eps, counts)

    return integrate(field, z0, dt, t_end, record_every, strat)


def simulate_higher_order(game: GameSpec, params: LearningParams,
                          block: FeedbackBlock, z0, xi0=None,
                          dt: float = 0.01, t_end: float = 500.0,
                          record_every: int = 10):
    """Integrate the filtered score flow; the filter starts at rest (xi0 = 0)."""
    block.ensure_valid()
    n = game.total_actions
    z0 = np.asarray(z0, dtype=float)
    if xi0 is None:
        xi0 = np.zeros_like(z0)
    else:
        xi0 = np.asarray(xi0, dtype=float)
        if xi0.shape != z0.shape:
            raise DomainError("xi0 must match the shape of z0")
    state0 = np.concatenate([z0, xi0], axis=-1)
    counts = game.action_counts

    def field(state: np.ndarray) -> np.ndarray:
        return higher_order_field(state, game, params, block)

    def strat(states: np.ndarray) -> np.ndarray:
        return softmax(states[..., :n], params.eps, counts)

    return integrate(field, state0, dt, t_end, record_every, strat)


# ------------------------------------------------- discrete-time recursions

def euler_step(z, game: GameSpec, params: LearningParams, alpha: float):
    """One explicit Euler step Z+ = Z + alpha gamma (U(sigma(Z)) - Z).

    Returns (Z+, sigma(Z+)).  With alpha * gamma = 1 this is the exact
    best-scored update Z+ = U(sigma(Z)).
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"step size must lie in [0, 1], got {alpha!r}")
    z = np.asarray(z, dtype=float)
    x = softmax(z, params.eps, game.action_counts)
    u = expected_payoff_vector(game, x)
    z_next = z + alpha * params.gamma * (u - z)
    return z_next, softmax(z_next, params.eps, game.action_counts)


def sample_joint_actions(game: GameSpec, x, rng, size: int | None = None) -> np.ndarray:
    """Sample pure actions from a mixed profile, one column per player.

    Matching games return two columns (own draw, opponent draw from the same
    population).  With size=None a single (columns,) vector is returned.
    """
    rng = np.random.default_rng(rng)
    x = np.asarray(getattr(x, "vector", x), dtype=float)
    single = size is None
    m = 1 if single else int(size)
    if game.matching:
        blocks = [x, x]
    else:
        blocks = game.split(x)
    cols = []
    for xb in blocks:
        cum = np.cumsum(xb)
        cum[-1] = 1.0
        draws = np.searchsorted(cum, rng.random(m), side="right")
        cols.append(np.minimum(draws, len(xb) - 1))
    acts = np.column_stack(cols)
    return acts[0] if single else acts


def payoff_estimate(game: GameSpec, x, rng, mode: str = "full-info",
                    size: int | None = None):
    """Unbiased one-shot payoff estimate from realized pure actions.

    full-info: every entry of the own block is the pure payoff against the
    opponents' realized actions.  bandit: only the realized own action gets
    its realized payoff divided by its probability; all other entries are 0.

    Returns (u_hat, actions, realized_payoffs); with integer size the first
    axis of each output enumerates independent draws.
    """
    if mode not in ("full-info", "bandit"):
        raise DomainError(f"unknown estimator mode {mode!r}")
    rng = np.random.default_rng(rng)
    x = np.asarray(getattr(x, "vector", x), dtype=float)
    single = size is None
    m = 1 if single else int(size)
    acts = sample_joint_actions(game, x, rng, size=m)
    n = game.total_actions
    u_hat = np.zeros((m, n))
    if game.matching:
        a_mat = game.payoff_tensors[0]
        own, opp = acts[:, 0], acts[:, 1]
        realized = a_mat[own, opp][:, None]
        if mode == "full-info":
            u_hat = a_mat[:, opp].T.copy()
        else:
            u_hat[np.arange(m), own] = realized[:, 0] / x[own]
    else:
        realized = np.empty((m, game.player_count))
        for p, tensor in enumerate(game.payoff_tensors):
            idx = tuple(acts[:, q] for q in range(game.player_count))
            realized[:, p] = tensor[idx]
        if mode == "full-info":
            for p, (tensor, sl) in enumerate(zip(game.payoff_tensors, game.block_slices)):
                # own axis first so the draw axis lands in a fixed position
                swapped = np.moveaxis(tensor, p, 0)
                idx = tuple(acts[:, q] for q in range(game.player_count) if q != p)
                u_hat[:, sl] = swapped[(slice(None),) + idx].T
        else:
            for p, sl in enumerate(game.block_slices):
                own = acts[:, p]
                u_hat[np.arange(m), sl.start + own] = realized[:, p] / x[sl][own]
    if single:
        return u_hat[0], acts[0], realized[0]
    return u_hat, acts, realized


def stochastic_step(z, game: GameSpec, params: LearningParams, alpha: float,
                    rng, mode: str = "full-info"):
    """One stochastic-approximation step Z+ = Z + alpha gamma (u_hat - Z).

    Returns (Z+, sigma(Z+), actions, realized_payoffs).  alpha = 0 leaves
    the scores unchanged.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"step size must lie in [0, 1], got {alpha!r}")
    z = np.asarray(z, dtype=float)
    x = softmax(z, params.eps, game.action_counts)
    u_hat, acts, realized = payoff_estimate(game, x, rng, mode=mode)
    z_next = z + alpha * params.gamma * (u_hat - z)
    return z_next, softmax(z_next, params.eps, game.action_counts), acts, realized


def run_discrete(game: GameSpec, params: LearningParams, z0, alpha: float,
                 steps: int, record_every: int = 1):
    """Iterate euler_step; returns (ks, Z samples, X samples)."""
    z = np.asarray(z0, dtype=float)
    ks = [0]
    zs = [z.copy()]
    for k in range(int(steps)):
        z, _ = euler_step(z, game, params, alpha)
        if (k + 1) % record_every == 0 or k + 1 == steps:
            ks.append(k + 1)
            zs.append(z.copy())
    zs = np.stack(zs)
    xs = softmax(zs, params.eps, game.action_counts)
    return np.asarray(ks), zs, xs


def harmonic_schedule(k: int) -> float:
    """Diminishing step sequence alpha_k = 1 / (k + 1)."""
    return 1.0 / (k + 1.0)


def run_stochastic(game: GameSpec, params: LearningParams, z0, steps: int,
                   rng, mode: str = "full-info",
                   alpha_schedule: Callable[[int], float] = harmonic_schedule,
                   record_every: int = 1):
    """Iterate stochastic_step with a step-size schedule.

    Returns a dict with sampled ks, Z, X, realized joint actions and
    realized payoffs (aligned with the post-step sample index).
    """
    rng = np.random.default_rng(rng)
    z = np.asarray(z0, dtype=float)
    x = softmax(z, params.eps, game.action_counts)
    ks = [0]
    zs = [z.copy()]
    acts_log = [None]
    pay_log = [None]
    for k in range(int(steps)):
        z, x, acts, realized = stochastic_step(z, game, params,
                                               alpha_schedule(k), rng, mode)
        if (k + 1) % record_every == 0 or k + 1 == steps:
            ks.append(k + 1)
            zs.append(z.copy())
            acts_log.append(np.array(acts))
            pay_log.append(np.array(realized))
    zs = np.stack(zs)
    xs = softmax(zs, params.eps, game.action_counts)
    return {"ks": np.asarray(ks), "z": zs, "x": xs,
            "actions": acts_log, "payoffs": pay_log}


# ------------------------------------------------------------------- CSV output

def ternary_coordinates(x_block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Planar coordinates of 3-simplex points for plotting triangular orbits."""
    x_block = np.asarray(x_block, dtype=float)
    u = x_block[..., 1] + 0.5 * x_block[..., 2]
    v = (np.sqrt(3.0) / 2.0) * x_block[..., 2]
    return u, v


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_trajectory_csv(path: str | Path, traj: Trajectory,
                         action_counts: Sequence[int], ternary: bool = False) -> None:
    """One row per sample: t, scores, strategies, optional filter state,
    optional Lyapunov value, optional ternary projections."""
    counts = tuple(int(c) for c in action_counts)
    n = sum(counts)
    d = traj.states.shape[1]
    header = ["t"] + [f"z_{i + 1}" for i in range(n)] + [f"x_{i + 1}" for i in range(n)]
    has_filter = d == 2 * n
    if has_filter:
        header += [f"xi_{i + 1}" for i in range(n)]
    if traj.lyapunov is not None:
        header.append("V")
    tern_blocks = []
    if ternary:
        start = 0
        for p, c in enumerate(counts):
            if c == 3:
                tern_blocks.append((p, slice(start, start + 3)))
                header += [f"tern{p + 1}_u", f"tern{p + 1}_v"]
            start += c
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, t in enumerate(traj.times):
            row = [_fmt(t)]
            row += [_fmt(v) for v in traj.states[i, :n]]
            row += [_fmt(v) for v in traj.strategies[i]]
            if has_filter:
                row += [_fmt(v) for v in traj.states[i, n:]]
            if traj.lyapunov is not None:
                row.append(_fmt(traj.lyapunov[i]))
            for _, sl in tern_blocks:
                u, v = ternary_coordinates(traj.strategies[i, sl])
                row += [_fmt(float(u)), _fmt(float(v))]
            writer.writerow(row)


def write_stochastic_csv(path: str | Path, record: dict,
                         action_counts: Sequence[int], matching: bool = False) -> None:
    """Rows k, Z, X plus the realized joint action and per-player payoff."""
    counts = tuple(int(c) for c in action_counts)
    n = sum(counts)
    n_cols = 2 if matching else len(counts)
    act_names = (["action_own", "action_opp"] if matching
                 else [f"action_{p + 1}" for p in range(n_cols)])
    pay_names = (["payoff"] if matching
                 else [f"payoff_{p + 1}" for p in range(len(counts))])
    header = (["k"] + [f"z_{i + 1}" for i in range(n)]
              + [f"x_{i + 1}" for i in range(n)] + act_names + pay_names)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, k in enumerate(record["ks"]):
            row = [str(int(k))]
            row += [_fmt(v) for v in record["z"][i]]
            row += [_fmt(v) for v in record["x"][i]]
            acts = record["actions"][i]
            pays = record["payoffs"][i]
            if acts is None:
                row += [""] * (n_cols + len(pay_names))
            else:
                row += [str(int(a)) for a in np.atleast_1d(acts)]
                row += [_fmt(float(p)) for p in np.atleast_1d(pays)[:len(pay_names)]]
            writer.writerow(row)
