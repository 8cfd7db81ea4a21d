"""Finite normal-form games.

Payoff storage, expected-payoff evaluation, linear game maps, simplex
tangent bases, and a JSON file format.

Two payoff mechanisms are supported:

* multi-player tensor games, where player ``p`` holds a dense array over
  the joint action set and the payoff vector at a mixed profile is the
  multilinear expectation with player ``p`` pinned to each action in turn;
* single-population matching games (``matching=True``), where one
  population is randomly matched against itself in a symmetric two-sided
  contest with matrix ``A``, so the payoff vector at state ``x`` is ``A x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, UsageError

_AXES = "abcdefgh"


def as_profile_vector(x) -> np.ndarray:
    """Coerce a MixedProfile or array-like to a float array (batch dims allowed)."""
    return np.asarray(getattr(x, "vector", x), dtype=float)


@dataclass(frozen=True)
class GameSpec:
    """A finite game in normal form.

    action_counts: actions per player, n^p >= 2.
    payoff_tensors: one dense float64 array per player.  Shape is the joint
        action set, except for matching games where the single tensor is the
        (n, n) contest matrix indexed (own action, opponent action).
    linear_map: optional matrix Phi with U(x) = Phi x exactly.
    matching: single-population random-matching payoff mechanism.
    """

    action_counts: tuple[int, ...]
    payoff_tensors: tuple[np.ndarray, ...]
    linear_map: np.ndarray | None = None
    matching: bool = False
    name: str = ""

    def __post_init__(self):
        counts = tuple(int(c) for c in self.action_counts)
        if not counts or any(c < 2 for c in counts):
            raise DomainError("every player needs at least two actions")
        tensors = tuple(np.ascontiguousarray(t, dtype=float) for t in self.payoff_tensors)
        if len(tensors) != len(counts):
            raise DomainError("one payoff tensor per player is required")
        if self.matching:
            if len(counts) != 1:
                raise DomainError("matching games have a single population")
            n = counts[0]
            if tensors[0].shape != (n, n):
                raise DomainError(f"matching payoff matrix must be {n}x{n}, got {tensors[0].shape}")
        else:
            for p, t in enumerate(tensors):
                if t.shape != counts:
                    raise DomainError(f"player {p} tensor has shape {t.shape}, expected {counts}")
        n_total = sum(counts)
        lin = self.linear_map
        if lin is None and self.matching:
            lin = tensors[0]
        if lin is not None:
            lin = np.ascontiguousarray(lin, dtype=float)
            if lin.shape != (n_total, n_total):
                raise DomainError(f"linear map must be {n_total}x{n_total}, got {lin.shape}")
            lin.setflags(write=False)
        for t in tensors:
            t.setflags(write=False)
        starts = [0]
        for c in counts:
            starts.append(starts[-1] + c)
        object.__setattr__(self, "action_counts", counts)
        object.__setattr__(self, "payoff_tensors", tensors)
        object.__setattr__(self, "linear_map", lin)
        object.__setattr__(self, "_slices", tuple(slice(a, b) for a, b in zip(starts[:-1], starts[1:])))

    @property
    def player_count(self) -> int:
        return len(self.action_counts)

    @property
    def total_actions(self) -> int:
        return sum(self.action_counts)

    @property
    def block_slices(self) -> tuple[slice, ...]:
        return self._slices  # type: ignore[attr-defined]

    def max_abs_payoff(self) -> float:
        return max(float(np.abs(t).max()) for t in self.payoff_tensors)

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        """Split a concatenated profile (batch dims allowed) into player blocks."""
        return [x[..., sl] for sl in self.block_slices]


@dataclass(frozen=True)
class MixedProfile:
    """Concatenated per-player strategy blocks, each a simplex point."""

    vector: np.ndarray
    action_counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.action_counts)
        v = np.ascontiguousarray(self.vector, dtype=float)
        if v.shape != (sum(counts),):
            raise DomainError(f"profile has shape {v.shape}, expected ({sum(counts)},)")
        if np.any(v < -1e-12):
            raise DomainError("negative strategy weight")
        start = 0
        for c in counts:
            s = float(v[start:start + c].sum())
            if abs(s - 1.0) > 1e-9:
                raise DomainError(f"strategy block sums to {s!r}, not 1")
            start += c
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "action_counts", counts)

    @property
    def blocks(self) -> list[np.ndarray]:
        starts = [0]
        for c in self.action_counts:
            starts.append(starts[-1] + c)
        return [self.vector[a:b] for a, b in zip(starts[:-1], starts[1:])]

    @classmethod
    def from_blocks(cls, blocks: Iterable[np.ndarray]) -> "MixedProfile":
        blocks = [np.asarray(b, dtype=float) for b in blocks]
        return cls(np.concatenate(blocks), tuple(len(b) for b in blocks))

    @classmethod
    def centroid(cls, action_counts: Sequence[int]) -> "MixedProfile":
        return cls.from_blocks([np.full(c, 1.0 / c) for c in action_counts])

    @classmethod
    def random(cls, action_counts: Sequence[int], rng: np.random.Generator) -> "MixedProfile":
        return cls.from_blocks([rng.dirichlet(np.ones(c)) for c in action_counts])


@dataclass(frozen=True)
class TangentBasis:
    """Orthonormal per-player bases of the simplex tangent spaces.

    blocks[p] has shape (n^p, n^p - 1) with columns orthonormal and summing
    to zero; matrix is their block-diagonal stack of shape (n, n - N).
    """

    blocks: tuple[np.ndarray, ...]
    matrix: np.ndarray


def tangent_basis(action_counts: Sequence[int]) -> TangentBasis:
    """Gram-Schmidt on the difference vectors e1-e2, e1-e3, ... per player."""
    counts = tuple(int(c) for c in action_counts)
    blocks = []
    for c in counts:
        cols = []
        for k in range(1, c):
            v = np.zeros(c)
            v[0], v[k] = 1.0, -1.0
            for q in cols:
                v = v - (q @ v) * q
            v = v / np.linalg.norm(v)
            cols.append(v)
        blocks.append(np.column_stack(cols))
    n = sum(counts)
    full = np.zeros((n, n - len(counts)))
    row = col = 0
    for b in blocks:
        full[row:row + b.shape[0], col:col + b.shape[1]] = b
        row += b.shape[0]
        col += b.shape[1]
    for b in blocks:
        b.setflags(write=False)
    full.setflags(write=False)
    return TangentBasis(tuple(blocks), full)


def pure_payoff(game: GameSpec, profile: Sequence[int]) -> list[float]:
    """Payoffs at a joint pure-action profile, one float per player.

    For a matching game the single index is the monomorphic population
    action, so the payoff is the self-match value A[i, i].
    """
    idx = tuple(int(i) for i in profile)
    if len(idx) != game.player_count:
        raise DomainError(f"profile has {len(idx)} entries for {game.player_count} players")
    for p, (i, c) in enumerate(zip(idx, game.action_counts)):
        if not 0 <= i < c:
            raise DomainError(f"action {i} out of range for player {p} with {c} actions")
    if game.matching:
        i = idx[0]
        return [float(game.payoff_tensors[0][i, i])]
    return [float(t[idx]) for t in game.payoff_tensors]


def expected_payoff_vector(game: GameSpec, x) -> np.ndarray:
    """Payoff vector U(x): entry i of block p is the expected payoff to
    player p for playing action i against the others' mixed strategies.

    Accepts a concatenated profile of shape (..., n); batch dims broadcast.
    """
    x = as_profile_vector(x)
    n = game.total_actions
    if x.shape[-1] != n:
        raise DomainError(f"profile has length {x.shape[-1]}, expected {n}")
    if game.matching:
        return x @ game.payoff_tensors[0].T
    n_players = game.player_count
    blocks = game.split(x)
    outs = []
    for p, tensor in enumerate(game.payoff_tensors):
        if n_players == 1:
            outs.append(np.broadcast_to(tensor, x.shape[:-1] + tensor.shape).copy())
            continue
        lhs = _AXES[:n_players]
        rest = ",".join("..." + _AXES[q] for q in range(n_players) if q != p)
        sub = f"{lhs},{rest}->...{_AXES[p]}"
        others = [blocks[q] for q in range(n_players) if q != p]
        outs.append(np.einsum(sub, tensor, *others))
    return np.concatenate(outs, axis=-1)


def linear_game_map(game: GameSpec) -> np.ndarray | None:
    """The matrix Phi with U(x) = Phi x, when the game map is exactly linear.

    Stored maps are returned as-is.  Two-player games are assembled as
    [[0, A], [B^T, 0]] from the payoff tensors, where A[i, j] and B[i, j]
    are the row and column player's payoffs at the pure profile (i, j).
    Returns None when no exact linear map is available.
    """
    if game.linear_map is not None:
        return game.linear_map
    if game.player_count == 2:
        a_mat, b_mat = game.payoff_tensors
        n1, n2 = game.action_counts
        phi = np.zeros((n1 + n2, n1 + n2))
        phi[:n1, n1:] = a_mat
        phi[n1:, :n1] = b_mat.T
        return phi
    return None


def payoff_jacobian(game: GameSpec, x, step: float = 1e-5) -> np.ndarray:
    """Jacobian DU(x) of the payoff vector map, from the linear map when
    available and by central differences otherwise."""
    phi = linear_game_map(game)
    if phi is not None:
        return np.array(phi)
    x = as_profile_vector(x)
    n = game.total_actions
    jac = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        jac[:, j] = (expected_payoff_vector(game, x + e)
                     - expected_payoff_vector(game, x - e)) / (2.0 * step)
    return jac


def game_to_dict(game: GameSpec) -> dict:
    """JSON-ready description of a game."""
    doc = {
        "players": game.player_count,
        "action_counts": list(game.action_counts),
        "payoffs": [t.ravel().tolist() for t in game.payoff_tensors],
    }
    if game.linear_map is not None:
        doc["linear_map"] = game.linear_map.ravel().tolist()
    if game.matching:
        doc["matching"] = True
    if game.name:
        doc["name"] = game.name
    return doc


def game_from_dict(doc: dict) -> GameSpec:
    try:
        players = int(doc["players"])
        counts = tuple(int(c) for c in doc["action_counts"])
        payoffs = doc["payoffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed game document: {exc}") from exc
    if players != len(counts):
        raise UsageError("players and action_counts disagree")
    matching = bool(doc.get("matching", False))
    if matching:
        shapes = [(counts[0], counts[0])]
    else:
        shapes = [counts] * players
    if len(payoffs) != players:
        raise UsageError("payoffs must hold one flat array per player")
    tensors = []
    for flat, shape in zip(payoffs, shapes):
        arr = np.asarray(flat, dtype=float)
        if arr.size != int(np.prod(shape)):
            raise UsageError(f"payoff array has {arr.size} entries, expected {int(np.prod(shape))}")
        tensors.append(arr.reshape(shape))
    lin = doc.get("linear_map")
    n = sum(counts)
    if lin is not None:
        lin = np.asarray(lin, dtype=float)
        if lin.size != n * n:
            raise UsageError(f"linear_map has {lin.size} entries, expected {n * n}")
        lin = lin.reshape((n, n))
    return GameSpec(counts, tuple(tensors), linear_map=lin, matching=matching,
                    name=str(doc.get("name", "")))


def save_game(path: str | Path, game: GameSpec) -> None:
    Path(path).write_text(json.dumps(game_to_dict(game), indent=2) + "\n")


def load_game(path: str | Path) -> GameSpec:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"game file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"game file is not valid JSON: {exc}") from exc
    return game_from_dict(doc)
