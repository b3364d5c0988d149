"""Response digraphs, sink components, traps, and absorption analysis.

Two structural facts keep this module exact at scale:

* Sink strongly connected components realize the dynamical notion of a
  trap.  Under the uniform random improvement kernel, a closed strongly
  connected class is visited in its entirety, infinitely often, with
  probability one, so "set the walk cycles in forever" and "sink component
  of size >= 2" coincide.

* The SCC partition and sink flags of the full better-response graph equal
  those of its next-better-step skeleton, where each profile points only at
  the immediately better profile within its row and within its column.
  Improvement within a line is a total order, so every better-response edge
  is realized by a chain of next-step edges; the transitive closures agree
  while the edge count drops from O(K^3) to at most 2K^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapacityError
from .games import Game, Profile, _check_profile
from .dynamics import _improving

_SMALL_NODES = 400  # below this, a pure-python Tarjan beats sparse-matrix setup

MAX_GRAPH_EDGES = 50_000_000


@dataclass(frozen=True, eq=False)
class ResponseGraph:
    """Directed improvement graph over all K^2 profiles, in CSR form.

    kind "better" holds every strict-improvement edge of both players;
    kind "best" holds at most one edge per player per profile.  A node has
    out-degree 0 exactly when it is a pure Nash equilibrium.
    """

    kind: str
    K: int
    indptr: np.ndarray
    indices: np.ndarray
    game_key: bytes

    @property
    def n_nodes(self) -> int:
        return self.K * self.K

    @property
    def n_edges(self) -> int:
        return int(self.indices.size)

    def node(self, profile: Profile) -> int:
        r, c = profile
        return (r - 1) * self.K + (c - 1)

    def profile(self, node: int) -> Profile:
        return (node // self.K + 1, node % self.K + 1)

    def out_edges(self, profile: Profile) -> list[Profile]:
        n = self.node(profile)
        return [self.profile(int(t)) for t in self.indices[self.indptr[n]:self.indptr[n + 1]]]

    def out_degree(self, profile: Profile) -> int:
        n = self.node(profile)
        return int(self.indptr[n + 1] - self.indptr[n])


def _better_edge_arrays(game: Game) -> tuple[np.ndarray, np.ndarray]:
    K = game.K
    ii, jj = np.triu_indices(K, k=1)  # ascending-rank position pairs
    cols = np.arange(K)
    o1 = np.argsort(game.p1, axis=0)
    nodes1 = o1 * K + cols  # node ids ordered by payoff within each column
    src1 = nodes1[ii, :].ravel()
    dst1 = nodes1[jj, :].ravel()
    o2 = np.argsort(game.p2, axis=1)
    nodes2 = np.arange(K)[:, None] * K + o2
    src2 = nodes2[:, ii].ravel()
    dst2 = nodes2[:, jj].ravel()
    return np.concatenate([src1, src2]), np.concatenate([dst1, dst2])


def _best_edge_arrays(game: Game) -> tuple[np.ndarray, np.ndarray]:
    K = game.K
    nodes = np.arange(K * K)
    r, c = nodes // K, nodes % K
    col_top = game.p1.argmax(axis=0)
    row_top = game.p2.argmax(axis=1)
    m1 = col_top[c] != r
    m2 = row_top[r] != c
    src = np.concatenate([nodes[m1], nodes[m2]])
    dst = np.concatenate([col_top[c[m1]] * K + c[m1], r[m2] * K + row_top[r[m2]]])
    return src, dst


def _skeleton_edge_arrays(game: Game) -> tuple[np.ndarray, np.ndarray]:
    K = game.K
    cols = np.arange(K)
    o1 = np.argsort(game.p1, axis=0)
    src1 = (o1[:-1, :] * K + cols).ravel()
    dst1 = (o1[1:, :] * K + cols).ravel()
    o2 = np.argsort(game.p2, axis=1)
    rows = np.arange(K)[:, None] * K
    src2 = (rows + o2[:, :-1]).ravel()
    dst2 = (rows + o2[:, 1:]).ravel()
    return np.concatenate([src1, src2]), np.concatenate([dst1, dst2])


def build_response_graph(game: Game, kind: str, max_edges: int = MAX_GRAPH_EDGES) -> ResponseGraph:
    """Materialize the full improvement graph of the given kind."""
    K = game.K
    if kind == "better":
        estimate = K * K * (K - 1)
        if estimate > max_edges:
            raise CapacityError(
                f"better-response graph for K={K} needs ~{estimate} edges, "
                f"above the cap of {max_edges}"
            )
        src, dst = _better_edge_arrays(game)
    elif kind == "best":
        src, dst = _best_edge_arrays(game)
    else:
        raise ValueError(f"graph kind must be 'better' or 'best', got {kind!r}")
    n = K * K
    m = csr_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
    return ResponseGraph(kind, K, m.indptr, m.indices, game.fingerprint)


@dataclass(eq=False)
class SinkDecomposition:
    """SCC partition of a response graph with per-component sink flags."""

    K: int
    kind: str
    labels: np.ndarray  # component index per node id
    sink: np.ndarray  # bool per component
    sizes: np.ndarray  # member count per component
    game_key: bytes

    def __post_init__(self):
        self._order = None
        self._starts = None

    @property
    def n_components(self) -> int:
        return int(self.sink.size)

    def component_of(self, profile: Profile) -> int:
        r, c = profile
        return int(self.labels[(r - 1) * self.K + (c - 1)])

    def is_sink(self, component: int) -> bool:
        return bool(self.sink[component])

    def _index(self):
        if self._order is None:
            self._order = np.argsort(self.labels, kind="stable")
            self._starts = np.searchsorted(
                self.labels[self._order], np.arange(self.n_components + 1)
            )
        return self._order, self._starts

    def member_nodes(self, component: int) -> np.ndarray:
        order, starts = self._index()
        return order[starts[component]:starts[component + 1]]

    def members(self, component: int) -> list[Profile]:
        K = self.K
        return [(int(n) // K + 1, int(n) % K + 1) for n in self.member_nodes(component)]

    def singleton_sinks(self) -> set[Profile]:
        comps = np.flatnonzero(self.sink & (self.sizes == 1))
        out = set()
        for comp in comps:
            out.update(self.members(int(comp)))
        return out

    def trap_ids(self) -> list[int]:
        comps = np.flatnonzero(self.sink & (self.sizes >= 2))
        return sorted(int(c) for c in comps)

    @property
    def has_trap(self) -> bool:
        return bool(np.any(self.sink & (self.sizes >= 2)))


def _tarjan(adj: list[list[int]]) -> tuple[int, list[int]]:
    """Iterative Tarjan SCC; returns (component count, label per node)."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp = [-1] * n
    ncomp = 0
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            edges = adj[v]
            for i in range(pos, len(edges)):
                w = edges[i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return ncomp, comp


def _decompose_edges(
    K: int, kind: str, src: np.ndarray, dst: np.ndarray, game_key: bytes
) -> SinkDecomposition:
    n = K * K
    if n <= _SMALL_NODES:
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in zip(src.tolist(), dst.tolist()):
            adj[a].append(b)
        ncomp, comp = _tarjan(adj)
        labels = np.asarray(comp, dtype=np.int64)
    else:
        m = csr_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
        ncomp, labels = connected_components(m, directed=True, connection="strong")
    sink = np.ones(ncomp, dtype=bool)
    cross = labels[src] != labels[dst]
    sink[labels[src[cross]]] = False
    sizes = np.bincount(labels, minlength=ncomp)
    return SinkDecomposition(K, kind, labels, sink, sizes, game_key)


def sink_decomposition(graph: ResponseGraph) -> SinkDecomposition:
    """SCC condensation of an explicit response graph."""
    n = graph.n_nodes
    src = np.repeat(np.arange(n), np.diff(graph.indptr))
    return _decompose_edges(graph.K, graph.kind, src, graph.indices, graph.game_key)


def decompose_game(
    game: Game, kind: str, max_nodes: int = 4_200_000
) -> SinkDecomposition:
    """Sink decomposition straight from a game.

    For the better kind this uses the next-better-step skeleton, which has the
    same SCC partition and sink flags as the full graph at a fraction of the
    size (see module docstring).
    """
    if game.K * game.K > max_nodes:
        raise CapacityError(
            f"response graph for K={game.K} has {game.K * game.K} nodes, "
            f"above the cap of {max_nodes}"
        )
    if kind == "better":
        src, dst = _skeleton_edge_arrays(game)
    elif kind == "best":
        src, dst = _best_edge_arrays(game)
    else:
        raise ValueError(f"graph kind must be 'better' or 'best', got {kind!r}")
    return _decompose_edges(game.K, kind, src, dst, game.fingerprint)


@dataclass(frozen=True)
class TrapReport:
    """A sink component of size >= 2 with its row/column occupancy vectors."""

    profiles: frozenset[Profile]
    row_counts: tuple[int, ...]
    col_counts: tuple[int, ...]
    component: int

    @property
    def size(self) -> int:
        return len(self.profiles)

    @property
    def K(self) -> int:
        return len(self.row_counts)


def find_traps(game: Game, sinks: SinkDecomposition | None = None) -> list[TrapReport]:
    """All traps of the better-response dynamics, smallest member first."""
    if sinks is None:
        sinks = decompose_game(game, "better")
    K = game.K
    reports = []
    for comp in sinks.trap_ids():
        nodes = sinks.member_nodes(comp)
        rows = np.bincount(nodes // K, minlength=K)
        cols = np.bincount(nodes % K, minlength=K)
        profiles = frozenset((int(n) // K + 1, int(n) % K + 1) for n in nodes)
        reports.append(
            TrapReport(profiles, tuple(int(x) for x in rows), tuple(int(x) for x in cols), comp)
        )
    reports.sort(key=lambda t: min((r - 1) * K + (c - 1) for r, c in t.profiles))
    return reports


def classify_trap(trap: TrapReport, alpha: float) -> str:
    """Label a trap A1 (a heavy row or column), A2 (large but spread), or Small."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    K = trap.K
    if max(max(trap.row_counts), max(trap.col_counts)) >= K ** (alpha / 2):
        return "A1"
    if trap.size > K**alpha:
        return "A2"
    return "Small"


def delta_event_occurs(game: Game, sigma: float) -> bool:
    """Whether some row dominates another on the columns of its own top payoffs.

    Checks player 2's matrix for a pair of distinct rows i, j such that, on
    every column holding one of row i's ceil(K^sigma) largest payoffs, row i
    strictly exceeds row j.
    """
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must be in (0,1), got {sigma}")
    K = game.K
    u = math.ceil(K**sigma)
    p2 = game.p2
    order = np.argsort(p2, axis=1)
    top = order[:, K - u:]
    for i in range(K):
        cols = top[i]
        dominated = (p2[i, cols][None, :] > p2[:, cols]).all(axis=1)
        dominated[i] = False
        if dominated.any():
            return True
    return False


@dataclass(frozen=True)
class AbsorptionResult:
    """Exact absorption probabilities of a run, keyed by sink component."""

    process: str
    start: Profile
    probabilities: dict[frozenset[Profile], float | Fraction]

    @property
    def converge_probability(self):
        """Total mass on singleton sinks, i.e. on pure Nash equilibria."""
        return sum(p for members, p in self.probabilities.items() if len(members) == 1)


def _successor_dist(game: Game, s: Profile, process: str, exact: bool):
    """Transition distribution of the chosen process at s; None when absorbing."""
    if process == "better":
        cand1 = [(int(v), s[1]) for v in _improving(game, s, 1)]
        cand2 = [(s[0], int(v)) for v in _improving(game, s, 2)]
    else:
        r, c = s
        top1 = int(game.p1[:, c - 1].argmax()) + 1
        top2 = int(game.p2[r - 1, :].argmax()) + 1
        cand1 = [(top1, c)] if top1 != r else []
        cand2 = [(r, top2)] if top2 != c else []
    if not cand1 and not cand2:
        return None
    half = Fraction(1, 2) if exact else 0.5
    one = Fraction(1) if exact else 1.0
    dist: dict[Profile, object] = {}
    if cand1 and cand2:
        for t in cand1:
            dist[t] = dist.get(t, 0) + half / len(cand1)
        for t in cand2:
            dist[t] = dist.get(t, 0) + half / len(cand2)
    else:
        cand = cand1 or cand2
        for t in cand:
            dist[t] = dist.get(t, 0) + one / len(cand)
    return dist


def _solve_gauss_exact(A: list[list[Fraction]], B: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(A)
    m = len(B[0]) if B else 0
    M = [arow[:] + brow[:] for arow, brow in zip(A, B)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pe = M[col][col]
        if pe != 1:
            M[col] = [v / pe for v in M[col]]
        prow = M[col]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], prow)]
    return [row[n:n + m] for row in M]


def absorption_probabilities(
    game: Game, process: str, start: Profile = (1, 1), exact: bool = False
) -> AbsorptionResult:
    """Solve the linear absorption system of the chosen process from a start.

    The chain is restricted to the set reachable from the start, decomposed
    into SCCs, and the (I - Q) system over transient states is solved with
    one right-hand side per sink class.  Float solutions are verified to
    residual 1e-10; exact mode uses rational arithmetic throughout.
    """
    if process not in ("better", "best"):
        raise ValueError(f"process must be 'better' or 'best', got {process!r}")
    start = _check_profile(game, start)

    # breadth-first closure of the kernel support
    dists: dict[Profile, dict | None] = {}
    order: list[Profile] = [start]
    seen = {start}
    qi = 0
    while qi < len(order):
        s = order[qi]
        qi += 1
        d = _successor_dist(game, s, process, exact)
        dists[s] = d
        if d:
            for t in d:
                if t not in seen:
                    seen.add(t)
                    order.append(t)

    idx = {s: i for i, s in enumerate(order)}
    adj = [[idx[t] for t in (dists[s] or ())] for s in order]
    ncomp, labels = _tarjan(adj)
    is_sink = [True] * ncomp
    for v, targets in enumerate(adj):
        for w in targets:
            if labels[w] != labels[v]:
                is_sink[labels[v]] = False
    sink_classes = [k for k in range(ncomp) if is_sink[k]]
    class_members: dict[int, list[int]] = {k: [] for k in sink_classes}
    transient = []
    for v in range(len(order)):
        if is_sink[labels[v]]:
            class_members[labels[v]].append(v)
        else:
            transient.append(v)

    def key_of(k: int) -> frozenset[Profile]:
        return frozenset(order[v] for v in class_members[k])

    start_label = labels[idx[start]]
    if is_sink[start_label]:
        one = Fraction(1) if exact else 1.0
        return AbsorptionResult(process, start, {key_of(start_label): one})

    tindex = {v: i for i, v in enumerate(transient)}
    nt = len(transient)
    cindex = {k: j for j, k in enumerate(sink_classes)}
    nc = len(sink_classes)

    if exact:
        if nt > 2000:
            raise CapacityError(f"exact absorption limited to 2000 transient states, got {nt}")
        A = [[Fraction(0)] * nt for _ in range(nt)]
        B = [[Fraction(0)] * nc for _ in range(nt)]
        for v in transient:
            i = tindex[v]
            A[i][i] = Fraction(1)
            for t, p in dists[order[v]].items():
                w = idx[t]
                if is_sink[labels[w]]:
                    B[i][cindex[labels[w]]] += p
                else:
                    A[i][tindex[w]] -= p
        X = _solve_gauss_exact(A, B)
        row = X[tindex[idx[start]]]
        probs = {key_of(k): row[cindex[k]] for k in sink_classes}
        total = sum(probs.values())
        if total != 1:
            raise RuntimeError(f"exact absorption probabilities sum to {total}, not 1")
    else:
        rows, cols, vals = list(range(nt)), list(range(nt)), [1.0] * nt
        B = np.zeros((nt, nc))
        for v in transient:
            i = tindex[v]
            for t, p in dists[order[v]].items():
                w = idx[t]
                if is_sink[labels[w]]:
                    B[i, cindex[labels[w]]] += p
                else:
                    rows.append(i)
                    cols.append(tindex[w])
                    vals.append(-p)
        A = csr_matrix((vals, (rows, cols)), shape=(nt, nt))
        if nt <= 600:
            X = np.linalg.solve(A.toarray(), B)
        else:
            from scipy.sparse.linalg import spsolve

            X = spsolve(A.tocsc(), B)
            X = np.atleast_2d(X)
            if X.shape != (nt, nc):
                X = X.reshape(nt, nc)
        resid = np.abs(A @ X - B).max()
        if resid > 1e-10:
            raise RuntimeError(f"absorption solve residual {resid} above 1e-10")
        row = X[tindex[idx[start]]]
        probs = {key_of(k): float(row[cindex[k]]) for k in sink_classes}
        total = sum(probs.values())
        if abs(total - 1.0) > 1e-10:
            raise RuntimeError(f"absorption probabilities sum to {total}, not 1")
    return AbsorptionResult(process, start, probs)
