"""Game classification, rest-point solving, linearization, bifurcation
search, Lyapunov monitoring, and trajectory verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_continuous_lyapunov
from scipy.optimize import minimize_scalar

from .choice import bregman_lse, profile_jacobian, softmax
from .dynamics import (FeedbackBlock, LearningParams, Trajectory,
                       first_order_field, higher_order_field)
from .errors import ConfigurationError, DomainError, NumericsError, UsageError
from .games import (GameSpec, expected_payoff_vector, linear_game_map,
                    payoff_jacobian, tangent_basis)


# --------------------------------------------------------------- classification

@dataclass
class ClassificationReport:
    """Monotonicity analysis of the payoff map.

    tangent_eigenvalues is the spectrum of E^T (Phi + Phi^T) E with E the
    orthonormal tangent basis; mu = max(0, lambda_max / 2) is the
    hypo-monotonicity modulus certified on the whole tangent space.
    aligned_eigenvalues lists eigenvalues of Phi + Phi^T whose computed
    eigenvectors lie inside the tangent space (a diagnostic that can be
    coarser than the compressed spectrum when the two disagree), with
    mu_aligned the corresponding modulus.
    """

    tangent_eigenvalues: np.ndarray
    lambda_max: float
    mu: float
    monotonicity_class: str
    exact: bool
    full_eigenvalues: np.ndarray | None = None
    aligned_eigenvalues: np.ndarray | None = None
    mu_aligned: float | None = None
    sample_argmax: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.tangent_eigenvalues],
            "lambda_max": self.lambda_max,
            "mu": self.mu,
            "class": self.monotonicity_class,
            "exact": self.exact,
            "full_eigenvalues": (None if self.full_eigenvalues is None
                                 else [float(v) for v in self.full_eigenvalues]),
            "aligned_eigenvalues": (None if self.aligned_eigenvalues is None
                                    else [float(v) for v in self.aligned_eigenvalues]),
            "mu_aligned": self.mu_aligned,
        }


def _class_of(lambda_max: float, tol: float) -> str:
    if lambda_max < -tol:
        return "strictly-monotone"
    if lambda_max <= tol:
        return "null-monotone"
    return "hypo-monotone"


def classify(game: GameSpec, sample_count: int = 200, seed: int = 0,
             step: float = 1e-5, tol: float = 1e-9,
             alignment_tol: float = 1e-8) -> ClassificationReport:
    """Classify the game as strictly-/null-/hypo-monotone.

    With a linear game map the tangent spectrum is exact; otherwise the payoff
    Jacobian is sampled at random interior profiles and the worst case over
    samples is reported as an estimate.
    """
    basis = tangent_basis(game.action_counts)
    e_mat = basis.matrix
    phi = linear_game_map(game)
    if phi is not None:
        sym = phi + phi.T
        tangent_eigs = np.linalg.eigvalsh(e_mat.T @ sym @ e_mat)
        full_eigs, vecs = np.linalg.eigh(sym)
        proj = e_mat @ e_mat.T
        in_tangent = np.linalg.norm(vecs - proj @ vecs, axis=0) <= alignment_tol
        aligned = full_eigs[in_tangent]
        lambda_max = float(tangent_eigs.max())
        mu_aligned = float(max(0.0, aligned.max() / 2.0)) if aligned.size else None
        return ClassificationReport(
            tangent_eigenvalues=tangent_eigs,
            lambda_max=lambda_max,
            mu=max(0.0, lambda_max / 2.0),
            monotonicity_class=_class_of(lambda_max, tol),
            exact=True,
            full_eigenvalues=full_eigs,
            aligned_eigenvalues=aligned if aligned.size else None,
            mu_aligned=mu_aligned,
        )
    rng = np.random.default_rng(seed)
    best_eigs = None
    best_lambda = -np.inf
    best_x = None
    for _ in range(int(sample_count)):
        x = np.concatenate([rng.dirichlet(np.ones(c)) for c in game.action_counts])
        du = payoff_jacobian(game, x, step=step)
        eigs = np.linalg.eigvalsh(e_mat.T @ (du + du.T) @ e_mat)
        if eigs[-1] > best_lambda:
            best_lambda = float(eigs[-1])
            best_eigs = eigs
            best_x = x
    return ClassificationReport(
        tangent_eigenvalues=best_eigs,
        lambda_max=best_lambda,
        mu=max(0.0, best_lambda / 2.0),
        monotonicity_class=_class_of(best_lambda, tol),
        exact=False,
        sample_argmax=best_x,
    )


# ------------------------------------------------------------------ rest points

@dataclass
class RestPointResult:
    """Solution of z = U(sigma(z)) with residual in the max norm."""

    z_star: np.ndarray
    x_star: np.ndarray
    residual: float
    iterations: int
    method: str
    status: str
    eps: float

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self) -> dict:
        return {
            "z": [float(v) for v in self.z_star],
            "x": [float(v) for v in self.x_star],
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method,
            "status": self.status,
            "eps": self.eps,
        }


def _score_map(game: GameSpec, eps: float, z: np.ndarray) -> np.ndarray:
    return expected_payoff_vector(game, softmax(z, eps, game.action_counts))


def rest_point(game: GameSpec, eps: float, z0=None, beta: float = 0.5,
               fp_tol: float = 1e-8, newton_tol: float = 1e-12,
               max_fp_iter: int = 100000, max_newton_iter: int = 50,
               success_tol: float = 1e-10) -> RestPointResult:
    """Locate a rest point by damped fixed-point iteration with a Newton polish.

    The damped stage z <- (1-beta) z + beta U(sigma(z)) runs until the
    residual falls below fp_tol or stagnates (it need not contract near
    unstable rest points); Newton with a halving line search then drives the
    best iterate to newton_tol.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    n = game.total_actions
    z = np.zeros(n) if z0 is None else np.asarray(z0, dtype=float).copy()
    if z.shape != (n,):
        raise DomainError(f"z0 has shape {z.shape}, expected ({n},)")

    def residual_of(v: np.ndarray) -> float:
        return float(np.abs(_score_map(game, eps, v) - v).max())

    best_z = z.copy()
    best_res = residual_of(z)
    iters = 0
    since_improve = 0
    while iters < max_fp_iter and best_res > fp_tol:
        z = (1.0 - beta) * z + beta * _score_map(game, eps, z)
        iters += 1
        res = residual_of(z)
        if res < 0.99 * best_res:
            best_res = res
            best_z = z.copy()
            since_improve = 0
        else:
            since_improve += 1
            # The damped map does not contract near unstable rest points;
            # hand the best iterate to Newton once progress stalls.
            if since_improve >= 500:
                break
    z = best_z
    res = best_res
    method = "damped"
    if res > newton_tol:
        method = "damped+newton"
        eye = np.eye(n)
        for _ in range(max_newton_iter):
            if res <= newton_tol:
                break
            x = softmax(z, eps, game.action_counts)
            f_val = expected_payoff_vector(game, x) - z
            jac = payoff_jacobian(game, x) @ profile_jacobian(z, eps, game.action_counts) - eye
            try:
                step_dir = np.linalg.solve(jac, -f_val)
            except np.linalg.LinAlgError:
                break
            t = 1.0
            improved = False
            for _ in range(30):
                cand = z + t * step_dir
                cand_res = residual_of(cand)
                if cand_res < res:
                    z, res = cand, cand_res
                    improved = True
                    break
                t *= 0.5
            iters += 1
            if not improved:
                break
    status = "converged" if res <= success_tol else "not-found"
    return RestPointResult(z_star=z, x_star=softmax(z, eps, game.action_counts),
                           residual=res, iterations=iters, method=method,
                           status=status, eps=eps)


def multi_start_rest_points(game: GameSpec, eps: float, n_starts: int = 20,
                            seed: int = 0, dedup_tol: float = 1e-6,
                            **solver_kwargs) -> list[RestPointResult]:
    """Solve from zero plus seeded random initializations, deduplicated."""
    rng = np.random.default_rng(seed)
    bound = game.max_abs_payoff() + 1.0
    n = game.total_actions
    found: list[RestPointResult] = []
    starts = [np.zeros(n)]
    starts += [rng.uniform(-bound, bound, n) for _ in range(int(n_starts) - 1)]
    for z0 in starts:
        result = rest_point(game, eps, z0=z0, **solver_kwargs)
        if not result.converged:
            continue
        if any(np.abs(result.z_star - prev.z_star).max() <= dedup_tol for prev in found):
            continue
        found.append(result)
    return found


# ---------------------------------------------------------------- linearization

def numeric_jacobian(func, x0: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a vector map."""
    x0 = np.asarray(x0, dtype=float)
    f0 = np.asarray(func(x0), dtype=float)
    jac = np.empty((f0.size, x0.size))
    for j in range(x0.size):
        delta = np.zeros_like(x0)
        delta[j] = step
        jac[:, j] = (np.asarray(func(x0 + delta)) - np.asarray(func(x0 - delta))) / (2.0 * step)
    return jac


def dynamics_jacobian(z_star: np.ndarray, game: GameSpec, params: LearningParams,
                      block: FeedbackBlock | None = None, fd_check: bool = True,
                      fd_tol: float = 1e-6, fd_step: float = 1e-6) -> np.ndarray:
    """Linearization of the score flow at a rest point.

    First order: J = gamma (DU Dsigma - I).  With a feedback block the
    2n x 2n matrix of the (z, xi) field is assembled at
    xi* = -A^-1 B sigma(z*).  A central-difference Jacobian of the actual
    field cross-checks the closed form unless fd_check is disabled.
    """
    z_star = np.asarray(z_star, dtype=float)
    n = game.total_actions
    if z_star.shape != (n,):
        raise DomainError(f"z_star has shape {z_star.shape}, expected ({n},)")
    x = softmax(z_star, params.eps, game.action_counts)
    d_sigma = profile_jacobian(z_star, params.eps, game.action_counts)
    du = payoff_jacobian(game, x)
    gamma = params.gamma
    eye = np.eye(n)
    if block is None:
        jac = gamma * (du @ d_sigma - eye)
        if fd_check:
            fd = numeric_jacobian(lambda z: first_order_field(z, game, params),
                                  z_star, step=fd_step)
            err = float(np.abs(jac - fd).max())
            if err > fd_tol:
                raise NumericsError(
                    f"analytic Jacobian differs from finite differences by {err:.3e}")
        return jac
    block.ensure_valid()
    xi_star = block.equilibrium_filter_state(x)
    top = np.hstack([gamma * ((du - block.d_mat) @ d_sigma - eye), -gamma * block.c_mat])
    bottom = np.hstack([block.b_mat @ d_sigma, block.a_mat])
    jac = np.vstack([top, bottom])
    if fd_check:
        state = np.concatenate([z_star, xi_star])
        fd = numeric_jacobian(lambda s: higher_order_field(s, game, params, block),
                              state, step=fd_step)
        err = float(np.abs(jac - fd).max())
        if err > fd_tol:
            raise NumericsError(
                f"analytic Jacobian differs from finite differences by {err:.3e}")
    return jac


def tangent_mode_abscissa(jac: np.ndarray, action_counts: Sequence[int],
                          proj_tol: float = 1e-8) -> float:
    """Largest real part over eigenvalues whose eigenvector has a nonzero
    score component in the tangent space (per-block zero-sum directions).

    The soft-max shift invariance pins one structural mode per player along
    the block ones direction; those modes never cross and are excluded.
    """
    counts = tuple(int(c) for c in action_counts)
    n = sum(counts)
    eigvals, eigvecs = np.linalg.eig(jac)
    best = -np.inf
    start = 0
    slices = []
    for c in counts:
        slices.append(slice(start, start + c))
        start += c
    for lam, vec in zip(eigvals, eigvecs.T):
        z_part = vec[:n]
        tangential = z_part.copy()
        for sl in slices:
            tangential[sl] -= tangential[sl].mean()
        if np.linalg.norm(tangential) > proj_tol:
            best = max(best, float(lam.real))
    return best


@dataclass
class BifurcationResult:
    """Outcome of the bisection for the critical temperature."""

    eps_star: float | None
    status: str
    iterations: int
    bracket: tuple[float, float]
    abscissa_low: float
    abscissa_high: float

    def to_dict(self) -> dict:
        return {
            "eps_star": self.eps_star,
            "status": self.status,
            "iterations": self.iterations,
            "bracket": [self.bracket[0], self.bracket[1]],
            "abscissa_low": self.abscissa_low,
            "abscissa_high": self.abscissa_high,
        }


def bifurcation_epsilon(game: GameSpec, params: LearningParams,
                        block: FeedbackBlock | None = None,
                        eps_range: tuple[float, float] = (0.05, 5.0),
                        tol: float = 1e-4, proj_tol: float = 1e-8) -> BifurcationResult:
    """Bisect for the temperature where the tangent-mode spectral abscissa
    of the linearization (at the eps-dependent rest point) crosses zero."""
    lo, hi = float(eps_range[0]), float(eps_range[1])
    if not (0.0 < lo < hi):
        raise DomainError(f"invalid eps range {eps_range!r}")
    warm = {"z": None}

    def abscissa(eps: float) -> float:
        result = rest_point(game, eps, z0=warm["z"])
        if not result.converged:
            for attempt in multi_start_rest_points(game, eps, n_starts=10, seed=7):
                result = attempt
                break
            if not result.converged:
                raise NumericsError(f"no rest point found at eps={eps:.6g}")
        warm["z"] = result.z_star
        params_eps = LearningParams(gamma=params.gamma, eps=eps,
                                    undiscounted=params.undiscounted)
        jac = dynamics_jacobian(result.z_star, game, params_eps, block=block,
                                fd_check=False)
        return tangent_mode_abscissa(jac, game.action_counts, proj_tol)

    f_lo = abscissa(lo)
    f_hi = abscissa(hi)
    if f_lo == 0.0 or f_hi == 0.0 or (f_lo > 0.0) == (f_hi > 0.0):
        return BifurcationResult(None, "no-bifurcation-in-range", 0, (lo, hi),
                                 f_lo, f_hi)
    iterations = 0
    a, b, f_a = lo, hi, f_lo
    while b - a > tol:
        mid = 0.5 * (a + b)
        f_mid = abscissa(mid)
        iterations += 1
        if (f_mid > 0.0) == (f_a > 0.0):
            a, f_a = mid, f_mid
        else:
            b = mid
    return BifurcationResult(0.5 * (a + b), "found", iterations, (a, b), f_lo, f_hi)


# ------------------------------------------------------------ Lyapunov monitors

def lyapunov_trace(traj: Trajectory, z_star: np.ndarray, eps: float,
                   action_counts: Sequence[int],
                   increase_tol: float = 1e-9) -> tuple[np.ndarray, str]:
    """Bregman storage V at each sample plus a monotonicity verdict."""
    z_star = np.asarray(z_star, dtype=float)
    n = z_star.size
    scores = traj.states[:, :n]
    values = bregman_lse(scores, z_star, eps, action_counts)
    verdict = "non-increasing" if np.all(np.diff(values) <= increase_tol) else "increased"
    return values, verdict


def storage_matrix(block: FeedbackBlock, p_scale: float | None = None,
                   certify_tol: float = 1e-8) -> np.ndarray:
    """Quadratic storage matrix P for the feedback block.

    Solves A^T P0 + P0 A = -I, then scales it.  With p_scale None the scale
    is chosen to minimize the largest eigenvalue of the passivity matrix
    [[A^T P + P A, P B - C^T], [B^T P - C, -(D + D^T)]]; the scaled P then
    certifies v_a-to-x passivity whenever a scalar multiple of P0 can.
    """
    p0 = solve_continuous_lyapunov(block.a_mat.T, -np.eye(block.dim))
    p0 = 0.5 * (p0 + p0.T)
    if p_scale is not None:
        return float(p_scale) * p0

    def worst_eigenvalue(log_s: float) -> float:
        s = 10.0 ** log_s
        p = s * p0
        top = np.hstack([block.a_mat.T @ p + p @ block.a_mat, p @ block.b_mat - block.c_mat.T])
        bottom = np.hstack([block.b_mat.T @ p - block.c_mat, -(block.d_mat + block.d_mat.T)])
        return float(np.linalg.eigvalsh(np.vstack([top, bottom])).max())

    opt = minimize_scalar(worst_eigenvalue, bounds=(-6.0, 6.0), method="bounded",
                          options={"xatol": 1e-10})
    scale = 10.0 ** float(opt.x) if opt.fun <= certify_tol else 1.0
    return scale * p0


def composite_lyapunov_trace(traj: Trajectory, z_star: np.ndarray,
                             xi_star: np.ndarray, eps: float,
                             block: FeedbackBlock, action_counts: Sequence[int],
                             gamma: float = 1.0, p_mat: np.ndarray | None = None,
                             p_scale: float | None = None,
                             increase_tol: float = 1e-9) -> tuple[np.ndarray, str]:
    """Composite storage W = V + (gamma/2) (xi - xi*)^T P (xi - xi*) per sample."""
    z_star = np.asarray(z_star, dtype=float)
    xi_star = np.asarray(xi_star, dtype=float)
    n = z_star.size
    if traj.states.shape[1] != 2 * n:
        raise DomainError("trajectory does not carry a filter state")
    p_mat = storage_matrix(block, p_scale) if p_mat is None else np.asarray(p_mat, dtype=float)
    if np.abs(p_mat - p_mat.T).max() > 1e-12 or np.linalg.eigvalsh(p_mat).min() <= 0.0:
        raise ConfigurationError("storage matrix P must be symmetric positive definite")
    scores = traj.states[:, :n]
    xi_dev = traj.states[:, n:] - xi_star
    values = bregman_lse(scores, z_star, eps, action_counts)
    values = values + 0.5 * gamma * np.einsum("ti,ij,tj->t", xi_dev, p_mat, xi_dev)
    verdict = "non-increasing" if np.all(np.diff(values) <= increase_tol) else "increased"
    return values, verdict


# ----------------------------------------------------------- trajectory verdicts

@dataclass
class ConvergenceReport:
    """Verdict over the final window of a trajectory."""

    status: str
    amplitude: float
    amplitude_first_half: float
    amplitude_second_half: float
    terminal_distance: float | None
    window_start_time: float

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "amplitude": self.amplitude,
            "amplitude_first_half": self.amplitude_first_half,
            "amplitude_second_half": self.amplitude_second_half,
            "terminal_distance": self.terminal_distance,
            "window_start_time": self.window_start_time,
        }


def convergence_report(traj: Trajectory, x_star: np.ndarray | None = None,
                       window: float = 0.2, converged_amp: float = 1e-6,
                       terminal_tol: float = 1e-4, cycle_amp: float = 1e-3,
                       drift_tol: float = 0.1) -> ConvergenceReport:
    """Classify the tail of a trajectory as converged, limit-cycle, or
    undetermined from the per-coordinate strategy oscillation amplitude."""
    if traj.strategies is None:
        raise UsageError("trajectory carries no strategies to analyze")
    times = traj.times
    t_cut = times[-1] - window * (times[-1] - times[0])
    idx = np.nonzero(times >= t_cut)[0]
    if idx.size < 4:
        raise UsageError("trajectory is shorter than the analysis window")
    window_x = traj.strategies[idx]

    def amp(samples: np.ndarray) -> float:
        return float((samples.max(axis=0) - samples.min(axis=0)).max())

    half = idx.size // 2
    amplitude = amp(window_x)
    amp_first = amp(window_x[:half])
    amp_second = amp(window_x[half:])
    terminal = None
    if x_star is not None:
        terminal = float(np.abs(traj.strategies[-1] - np.asarray(x_star, dtype=float)).max())
    if amplitude < converged_amp and (terminal is None or terminal < terminal_tol):
        status = "converged"
    elif amplitude > cycle_amp and abs(amp_second - amp_first) <= drift_tol * max(amp_first, 1e-300):
        status = "limit-cycle"
    else:
        status = "undetermined"
    return ConvergenceReport(status, amplitude, amp_first, amp_second, terminal,
                             float(t_cut))


def time_to_tolerance(traj: Trajectory, x_star: np.ndarray,
                      tol: float = 1e-3) -> float | None:
    """First sample time after which the strategy stays within tol of x_star
    in the max norm; None when the trajectory never settles."""
    if traj.strategies is None:
        raise UsageError("trajectory carries no strategies to analyze")
    dist = np.abs(traj.strategies - np.asarray(x_star, dtype=float)).max(axis=1)
    inside = dist < tol
    if not inside[-1]:
        return None
    outside = np.nonzero(~inside)[0]
    first = 0 if outside.size == 0 else int(outside[-1]) + 1
    return float(traj.times[first])


def score_bound(game: GameSpec, z0: np.ndarray,
                block: FeedbackBlock | None = None) -> np.ndarray:
    """Per-coordinate invariant bound max{|z_i(0)|, M} on simulated scores,
    where M bounds the (filter-adjusted) payoff magnitude."""
    m_payoff = game.max_abs_payoff()
    if block is not None:
        # |v_a| <= ||C||_inf sup|xi| + ||D||_inf with sup|xi| <= ||A^-1 B||_inf
        # for xi(0) = 0 and strategies bounded by 1.
        gain = float(np.abs(np.linalg.solve(block.a_mat, block.b_mat)).sum(axis=1).max())
        m_payoff += float(np.abs(block.c_mat).sum(axis=1).max()) * gain
        m_payoff += float(np.abs(block.d_mat).sum(axis=1).max())
    z0 = np.asarray(z0, dtype=float)
    return np.maximum(np.abs(z0), m_payoff)


def score_bound_excess(traj: Trajectory, game: GameSpec,
                       block: FeedbackBlock | None = None,
                       slack: float = 1e-6) -> float:
    """Worst violation of the score bound along a trajectory; <= 0 when the
    bound holds with the given slack."""
    n = game.total_actions
    scores = traj.states[:, :n]
    bound = score_bound(game, scores[0], block=block) + slack
    return float((np.abs(scores) - bound).max())
