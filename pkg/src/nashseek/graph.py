"""Communication topology and the spectral constants derived from it.

Matrices are dense: at desk scale the lifted Laplacian is a few hundred
rows at most, and dense eigendecompositions give exact spectral norms.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraph, InvalidGraph

CONNECTIVITY_TOL = 1e-10


@dataclass(frozen=True)
class Graph:
    """Weighted communication graph over ``n_agents`` nodes.

    Undirected graphs must have a symmetric weight matrix. Directed graphs
    must be weight-balanced (row sums equal column sums); no other digraph
    class is accepted.
    """

    weights: np.ndarray
    directed: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise InvalidGraph(f"weights must be a square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidGraph("weights must be finite")
        if np.any(w < 0):
            raise InvalidGraph("edge weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise InvalidGraph("self-loops are not allowed (a_ii must be 0)")
        if not self.directed and not np.array_equal(w, w.T):
            raise InvalidGraph("undirected graph requires a symmetric weight matrix")
        if self.directed and not np.allclose(w.sum(axis=1), w.sum(axis=0), rtol=0, atol=1e-12):
            raise InvalidGraph("directed graph must be weight-balanced")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_agents(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.weights[i] > 0)


def cycle(n: int, weight: float = 1.0) -> Graph:
    w = np.zeros((n, n))
    if n > 1:
        for i in range(n):
            j = (i + 1) % n
            if i != j:
                w[i, j] = w[j, i] = weight
    return Graph(w)


def path(n: int, weight: float = 1.0) -> Graph:
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = weight
    return Graph(w)


def complete(n: int, weight: float = 1.0) -> Graph:
    w = weight * (np.ones((n, n)) - np.eye(n))
    return Graph(w)


def directed_cycle(n: int, weight: float = 1.0) -> Graph:
    """Directed ring i -> i+1; every node has in- and out-weight ``weight``."""
    w = np.zeros((n, n))
    for i in range(n):
        w[i, (i + 1) % n] = weight
    return Graph(w, directed=True)


PRESETS = {"cycle": cycle, "path": path, "complete": complete, "directed_cycle": directed_cycle}


def laplacian(g: Graph) -> np.ndarray:
    """Return ``L = D - A`` with ``D`` the diagonal of row sums."""
    return np.diag(g.degrees) - g.weights


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability from node 0.

    For digraphs the traversal runs both along and against the edges and
    both must cover every node (strong connectivity).
    """
    adj = g.weights > 0

    def reaches_all(mask):
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(mask[u]):
                if v not in seen:
                    seen.add(int(v))
                    queue.append(int(v))
        return len(seen) == g.n_agents

    if not g.directed:
        return reaches_all(adj)
    return reaches_all(adj) and reaches_all(adj.T)


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value via the symmetric eigendecomposition of MᵀM."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return 0.0
    ev = np.linalg.eigvalsh(m.T @ m)
    return float(np.sqrt(max(ev[-1], 0.0)))


def selection_matrices(n_agents: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Stacked block-diagonal selectors over the estimate vector.

    Returns ``(R, S)`` where ``R`` (Nn x N²n) picks each agent's own block out
    of its estimate vector and ``S`` (N(N-1)n x N²n) picks the remaining blocks.
    """
    N, n = n_agents, dim
    R = np.zeros((N * n, N * N * n))
    S = np.zeros((N * (N - 1) * n, N * N * n))
    eye = np.eye(n)
    row = 0
    for i in range(N):
        base = i * N * n
        R[i * n:(i + 1) * n, base + i * n:base + (i + 1) * n] = eye
        for j in range(N):
            if j == i:
                continue
            S[row:row + n, base + j * n:base + (j + 1) * n] = eye
            row += n
    return R, S


@dataclass(frozen=True)
class GraphConstants:
    lambda2: float
    lap_norm: float
    rl_norm: float
    stsl_norm: float
    degrees: np.ndarray
    directed: bool = False
    # dense operators kept for inspection and tests
    lifted_laplacian: np.ndarray = field(default=None, repr=False, compare=False)
    R: np.ndarray = field(default=None, repr=False, compare=False)
    S: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def max_degree(self) -> float:
        return float(np.max(self.degrees))


def algebraic_connectivity(g: Graph) -> float:
    """Second-smallest eigenvalue of L, or of (L+Lᵀ)/2 for digraphs."""
    L = laplacian(g)
    sym = 0.5 * (L + L.T)
    ev = np.linalg.eigvalsh(sym)
    return float(ev[1]) if len(ev) > 1 else 0.0


def constants(g: Graph, n: int = 1, tol: float = CONNECTIVITY_TOL) -> GraphConstants:
    """Materialize the lifted operators and return their spectral constants.

    Parameters
    ----------
    g : Graph
        Connected undirected graph, or strongly connected weight-balanced
        digraph.
    n : int
        Per-agent strategy dimension.
    tol : float
        Connectivity threshold on the algebraic connectivity.

    Raises
    ------
    DisconnectedGraph
        If the algebraic connectivity does not exceed ``tol``.
    """
    if n < 1:
        raise ValueError("strategy dimension must be >= 1")
    lam2 = algebraic_connectivity(g)
    if lam2 <= tol or not is_connected(g):
        raise DisconnectedGraph(f"algebraic connectivity {lam2:.3e} <= {tol:g}; graph is not connected")
    N = g.n_agents
    L = laplacian(g)
    Lbig = np.kron(L, np.eye(N * n))
    R, S = selection_matrices(N, n)
    return GraphConstants(
        lambda2=lam2,
        lap_norm=spectral_norm(Lbig),
        rl_norm=spectral_norm(R @ Lbig),
        stsl_norm=spectral_norm(S.T @ S @ Lbig),
        degrees=g.degrees.copy(),
        directed=g.directed,
        lifted_laplacian=Lbig,
        R=R,
        S=S,
    )
