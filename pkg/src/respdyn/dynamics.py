"""Discrete-time best- and better-response processes and their outcomes.

Both processes draw a player uniformly at each step; the drawn player jumps
to an improving deviation (the unique best one, or a uniformly random
strictly better one), falling back to the other player when stuck.  A run
ends either at a pure Nash equilibrium or inside a trap.

Best-response runs are classified online: the walk alternates between rows
and columns, each visited line is "used up" by its best response, so
re-entering a previously visited row or column without landing on an
equilibrium forces the walk onto its own past path forever.  Better-response
runs cannot be classified from a finite prefix alone, so they are stopped
the moment they enter a sink component of the better-response graph, which
determines the outcome with probability one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .games import Game, Profile, _check_profile, is_pne

CONVERGED = "converged"
TRAPPED = "trapped"


@dataclass
class Trajectory:
    """Visited profiles and the player that produced each transition.

    ``movers[i]`` moved the process from ``steps[i]`` to ``steps[i+1]``.
    Recording stops at the length cap; classification never depends on it.
    """

    steps: list[Profile] = field(default_factory=list)
    movers: list[int] = field(default_factory=list)
    truncated: bool = False

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "s1", "s2", "mover"])
            for i, (s1, s2) in enumerate(self.steps):
                w.writerow([i, s1, s2, self.movers[i - 1] if i > 0 else ""])


@dataclass(frozen=True)
class RunOutcome:
    kind: str  # CONVERGED | TRAPPED
    detection_step: int
    pne: Profile | None = None
    trap_id: int | None = None


class _Recorder:
    def __init__(self, start: Profile, cap: int):
        self.traj = Trajectory(steps=[start])
        self.cap = cap

    def add(self, profile: Profile, mover: int) -> None:
        if len(self.traj.movers) < self.cap:
            self.traj.steps.append(profile)
            self.traj.movers.append(mover)
        else:
            self.traj.truncated = True


def _improving(game: Game, s: Profile, player: int) -> np.ndarray:
    """1-based coordinate values of the player's strictly better deviations."""
    r, c = s
    if player == 1:
        col = game.p1[:, c - 1]
        return np.flatnonzero(col > col[r - 1]) + 1
    row = game.p2[r - 1, :]
    return np.flatnonzero(row > row[c - 1]) + 1


def better_response_step(
    game: Game, s: Profile, rng: np.random.Generator
) -> tuple[Profile, int | None]:
    """One better-response transition: (next profile, mover or None at a PNE)."""
    first = 1 + int(rng.integers(2))
    for player in (first, 3 - first):
        cand = _improving(game, s, player)
        if cand.size:
            coord = int(cand[rng.integers(cand.size)]) if cand.size > 1 else int(cand[0])
            t = (coord, s[1]) if player == 1 else (s[0], coord)
            return t, player
    return s, None


def best_response_step(
    game: Game, s: Profile, rng: np.random.Generator
) -> tuple[Profile, int | None]:
    """One best-response transition; the target is the drawn player's unique best."""
    r, c = s
    first = 1 + int(rng.integers(2))
    for player in (first, 3 - first):
        if player == 1:
            top = int(game.p1[:, c - 1].argmax()) + 1
            if top != r:
                return (top, c), 1
        else:
            top = int(game.p2[r - 1, :].argmax()) + 1
            if top != c:
                return (r, top), 2
    return s, None


def run_best_response(
    game: Game,
    rng: np.random.Generator,
    start: Profile = (1, 1),
    trap_detection: str = "revisit",
    max_recorded_steps: int | None = None,
) -> tuple[RunOutcome, Trajectory]:
    """Run the best-response process until it converges or is trapped.

    ``trap_detection="revisit"`` stops at the first transition that re-enters
    a previously visited row or column without converging; this happens
    within 2K-2 transitions plus at most one initial adjustment step.
    ``trap_detection="cycle"`` is a debugging mode that instead keeps walking
    until a profile repeats, confirming periodicity; both modes classify
    identically on every game.
    """
    start = _check_profile(game, start)
    if trap_detection not in ("revisit", "cycle"):
        raise ValueError(f"unknown trap_detection mode {trap_detection!r}")
    cap = 4 * game.K if max_recorded_steps is None else max_recorded_steps
    rec = _Recorder(start, cap)
    if is_pne(game, start):
        return RunOutcome(CONVERGED, 0, pne=start), rec.traj

    if trap_detection == "cycle":
        return _run_best_by_cycle(game, rng, start, rec)

    # Visited rows/columns only count once the walk sits on a best response:
    # when the start improves for both players, the first transition is an
    # adjustment step and the visited sets are seeded from its landing.
    col = game.p1[:, start[1] - 1]
    row = game.p2[start[0] - 1, :]
    seeded = int(col.argmax()) == start[0] - 1 or int(row.argmax()) == start[1] - 1
    rows_seen = {start[0]} if seeded else set()
    cols_seen = {start[1]} if seeded else set()

    s = start
    n = 0
    limit = 2 * game.K + 4
    while True:
        s, mover = best_response_step(game, s, rng)
        n += 1
        rec.add(s, mover)
        if not seeded:
            rows_seen, cols_seen = {s[0]}, {s[1]}
            seeded = True
            if is_pne(game, s):
                return RunOutcome(CONVERGED, n, pne=s), rec.traj
            continue
        if is_pne(game, s):
            return RunOutcome(CONVERGED, n, pne=s), rec.traj
        if mover == 1:
            if s[0] in rows_seen:
                return RunOutcome(TRAPPED, n), rec.traj
            rows_seen.add(s[0])
        else:
            if s[1] in cols_seen:
                return RunOutcome(TRAPPED, n), rec.traj
            cols_seen.add(s[1])
        if n > limit:  # provably unreachable; guards against kernel bugs
            raise RuntimeError("best-response walk exceeded its step bound")


def _run_best_by_cycle(game, rng, start, rec):
    seen = {start}
    s = start
    n = 0
    limit = 2 * game.K * game.K + 8
    while True:
        s, mover = best_response_step(game, s, rng)
        n += 1
        rec.add(s, mover)
        if is_pne(game, s):
            return RunOutcome(CONVERGED, n, pne=s), rec.traj
        if s in seen:
            return RunOutcome(TRAPPED, n), rec.traj
        seen.add(s)
        if n > limit:
            raise RuntimeError("best-response cycle walk exceeded its step bound")


def run_better_response(
    game: Game,
    rng: np.random.Generator,
    sinks=None,
    start: Profile = (1, 1),
    max_recorded_steps: int | None = None,
) -> tuple[RunOutcome, Trajectory]:
    """Run the better-response process until it enters a sink component.

    ``sinks`` is the sink decomposition of the game's better-response graph
    (computed on the fly when omitted).  Entering a singleton sink means a
    pure Nash equilibrium was reached; entering any larger sink component
    means the walk will cycle in it forever.
    """
    from .graphs import decompose_game  # local import to avoid a cycle

    start = _check_profile(game, start)
    if sinks is None:
        sinks = decompose_game(game, "better")
    else:
        if sinks.kind != "better":
            raise ValueError("sink decomposition must be of the better-response graph")
        if sinks.game_key != game.fingerprint:
            raise ValueError("sink decomposition does not belong to this game")

    cap = 4 * game.K if max_recorded_steps is None else max_recorded_steps
    rec = _Recorder(start, cap)
    labels, sink_flags, sizes = sinks.labels, sinks.sink, sinks.sizes
    K = game.K

    s = start
    n = 0
    limit = 50_000 + 5_000 * K  # defensive only; absorption is a.s. fast
    while True:
        comp = int(labels[(s[0] - 1) * K + (s[1] - 1)])
        if sink_flags[comp]:
            if sizes[comp] == 1:
                return RunOutcome(CONVERGED, n, pne=s), rec.traj
            return RunOutcome(TRAPPED, n, trap_id=comp), rec.traj
        s, mover = better_response_step(game, s, rng)
        n += 1
        rec.add(s, mover)
        if n > limit:
            raise RuntimeError("better-response walk failed to reach a sink component")
