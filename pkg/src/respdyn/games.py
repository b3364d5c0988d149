"""Random two-player ordinal games and their response structure.

Payoffs are stored as rank matrices: each player's K*K entries form a
permutation of 1..K**2, larger rank meaning larger payoff.  Ranks carry the
full ordinal content of i.i.d. continuous payoff draws while being immune to
ties and float-equality hazards.  A demonstration mode with uniform float
draws exists (`uniform_payoff_game`), but ranks are canonical.

Strategies are 1-based everywhere: a profile is a pair (s1, s2) with both
coordinates in [1, K].
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

Profile = tuple[int, int]


@dataclass(frozen=True, eq=False)
class Game:
    """Two-player game on [1,K] x [1,K] with per-player payoff matrices.

    ``p1[r-1, c-1]`` and ``p2[r-1, c-1]`` are the payoffs of players 1 and 2
    at profile (r, c).  Only the within-column order of p1 and the
    within-row order of p2 is ever consumed downstream; full matrices are
    stored for simplicity.
    """

    K: int
    p1: np.ndarray
    p2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p1", np.asarray(self.p1))
        object.__setattr__(self, "p2", np.asarray(self.p2))
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        shape = (self.K, self.K)
        if self.p1.shape != shape or self.p2.shape != shape:
            raise ValueError(
                f"payoff matrices must have shape {shape}, "
                f"got {self.p1.shape} and {self.p2.shape}"
            )

    def payoff(self, player: int, profile: Profile):
        r, c = profile
        m = self.p1 if player == 1 else self.p2
        return m[r - 1, c - 1]

    @cached_property
    def fingerprint(self) -> bytes:
        """Stable digest of (K, payoffs); used to pair games with derived structures."""
        h = hashlib.blake2b(digest_size=16)
        h.update(self.K.to_bytes(8, "little"))
        h.update(np.ascontiguousarray(self.p1).tobytes())
        h.update(np.ascontiguousarray(self.p2).tobytes())
        return h.digest()

    def check(self) -> None:
        """Validate payoff invariants; raises ValueError on violation.

        Integer games must hold a permutation of 1..K**2 per player; float
        games (demonstration mode) must hold pairwise distinct values.
        """
        for name, m in (("p1", self.p1), ("p2", self.p2)):
            flat = np.sort(m.ravel())
            if np.issubdtype(m.dtype, np.integer):
                if not np.array_equal(flat, np.arange(1, self.K * self.K + 1)):
                    raise ValueError(f"{name} is not a permutation of 1..K^2")
            else:
                if np.unique(flat).size != flat.size:
                    raise ValueError(f"{name} contains tied payoffs")

    def to_dict(self) -> dict:
        return {"K": self.K, "p1": self.p1.tolist(), "p2": self.p2.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "Game":
        game = cls(int(obj["K"]), np.asarray(obj["p1"]), np.asarray(obj["p2"]))
        game.check()
        return game

    @classmethod
    def from_json(cls, text: str) -> "Game":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ResponseSets:
    """Strict-improvement set and best-response set of one player at a profile."""

    profile: Profile
    player: int
    better: frozenset[Profile]
    best: frozenset[Profile]


def generate_game(K: int, rng: np.random.Generator) -> Game:
    """Draw a game whose rank matrices are independent uniform permutations.

    The ordinal law is identical to i.i.d. continuous payoffs.  Deterministic
    given the generator state.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    p1 = rng.permutation(K * K).reshape(K, K).astype(np.int64) + 1
    p2 = rng.permutation(K * K).reshape(K, K).astype(np.int64) + 1
    return Game(K, p1, p2)


def uniform_payoff_game(K: int, rng: np.random.Generator) -> Game:
    """Demonstration mode: uniform float payoffs, redrawn until tie-free."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    while True:
        p1 = rng.uniform(size=(K, K))
        p2 = rng.uniform(size=(K, K))
        if np.unique(p1).size == K * K and np.unique(p2).size == K * K:
            return Game(K, p1, p2)


def _check_profile(game: Game, profile: Profile) -> Profile:
    r, c = profile
    if not (1 <= r <= game.K and 1 <= c <= game.K):
        raise ValueError(f"profile {profile} out of range for K={game.K}")
    return int(r), int(c)


def _check_player(player: int) -> int:
    if player not in (1, 2):
        raise ValueError(f"player must be 1 or 2, got {player}")
    return player


def better_responses(game: Game, profile: Profile, player: int) -> set[Profile]:
    """Profiles the player strictly prefers among own-coordinate deviations."""
    r, c = _check_profile(game, profile)
    _check_player(player)
    if player == 1:
        col = game.p1[:, c - 1]
        return {(int(i) + 1, c) for i in np.flatnonzero(col > col[r - 1])}
    row = game.p2[r - 1, :]
    return {(r, int(j) + 1) for j in np.flatnonzero(row > row[c - 1])}


def best_response(game: Game, profile: Profile, player: int) -> Profile | None:
    """The unique payoff-maximizing deviation, or None when none improves."""
    r, c = _check_profile(game, profile)
    _check_player(player)
    if player == 1:
        target = (int(game.p1[:, c - 1].argmax()) + 1, c)
    else:
        target = (r, int(game.p2[r - 1, :].argmax()) + 1)
    return None if target == (r, c) else target


def response_sets(game: Game, profile: Profile, player: int) -> ResponseSets:
    better = better_responses(game, profile, player)
    best = best_response(game, profile, player)
    return ResponseSets(
        profile=profile,
        player=player,
        better=frozenset(better),
        best=frozenset(() if best is None else (best,)),
    )


def is_pne(game: Game, profile: Profile) -> bool:
    """True iff neither player has a strictly improving deviation."""
    r, c = _check_profile(game, profile)
    return (
        int(game.p1[:, c - 1].argmax()) == r - 1
        and int(game.p2[r - 1, :].argmax()) == c - 1
    )


def enumerate_pne(game: Game) -> set[Profile]:
    """All pure Nash equilibria of the game."""
    col_top = game.p1.argmax(axis=0)
    row_top = game.p2.argmax(axis=1)
    cols = np.flatnonzero(row_top[col_top] == np.arange(game.K))
    return {(int(col_top[c]) + 1, int(c) + 1) for c in cols}


def count_pne(game: Game) -> int:
    col_top = game.p1.argmax(axis=0)
    row_top = game.p2.argmax(axis=1)
    return int(np.sum(row_top[col_top] == np.arange(game.K)))
