"""Communication topologies with doubly stochastic mixing weights."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSpectrum, DisconnectedGraph, NonStochasticWeights

TOPOLOGIES = ("ring", "complete", "star", "edges")
WEIGHT_RULES = ("metropolis", "uniform-neighbor")

STOCHASTIC_TOL = 1e-12
ZERO_EIG_TOL = 1e-10


@dataclass(frozen=True)
class Network:
    """Undirected graph with mixing matrix ``weights`` and Laplacian ``I - A``-style.

    ``rho_L`` is the second-smallest Laplacian eigenvalue, or ``None`` for a
    single node (no positive eigenvalue exists).
    """

    n: int
    edges: frozenset
    weights: np.ndarray
    laplacian: np.ndarray
    rho_L: float | None
    eigenvalues: np.ndarray = field(repr=False)

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def neighbors(self, i: int) -> list[int]:
        return [j for j in range(self.n) if self.weights[i, j] > 0]


def jacobi_eigenvalues(
    sym: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for a small symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` sorted ascending; column ``k`` of
    the eigenvector matrix pairs with ``eigenvalues[k]``. Iteration stops once
    the off-diagonal Frobenius norm drops below ``tol``.
    """
    a = np.array(sym, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    v = np.eye(n)

    def off_norm(m):
        off = m - np.diag(np.diag(m))
        return np.sqrt(np.sum(off**2))

    for _ in range(max_sweeps):
        if off_norm(a) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-300 * max(abs(diff), 1.0):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _is_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(u) for u in range(n)}) == 1


def _topology_edges(n: int, topology: str, edges: Sequence[Sequence[int]] | None) -> set[tuple[int, int]]:
    if topology == "ring":
        if n == 2:
            return {(0, 1)}
        return {tuple(sorted((i, (i + 1) % n))) for i in range(n)} if n > 2 else set()
    if topology == "complete":
        return {(i, j) for i in range(n) for j in range(i + 1, n)}
    if topology == "star":
        return {(0, j) for j in range(1, n)}
    if topology == "edges":
        if edges is None:
            raise ValueError("edge-list topology requires explicit edges")
        out = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                continue  # self-loops are implicit
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge {e!r} references a node outside [0, {n})")
            out.add((min(i, j), max(i, j)))
        return out
    raise ValueError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


def metropolis_weights(n: int, edges: Iterable[tuple[int, int]]) -> np.ndarray:
    edges = list(edges)
    deg = np.zeros(n, dtype=int)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    a = np.zeros((n, n))
    for i, j in edges:
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        a[i, j] = a[j, i] = w
    a[np.diag_indices(n)] = 1.0 - a.sum(axis=1)
    return a


def uniform_neighbor_weights(n: int, edges: Iterable[tuple[int, int]]) -> np.ndarray:
    """Row i puts weight 1/(deg_i + 1) on itself and each neighbour."""
    edges = list(edges)
    deg = np.zeros(n, dtype=int)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    a = np.zeros((n, n))
    for i, j in edges:
        a[i, j] = 1.0 / (deg[i] + 1)
        a[j, i] = 1.0 / (deg[j] + 1)
    a[np.diag_indices(n)] = 1.0 / (deg + 1)
    return a


def network_from_weights(weights: np.ndarray, check_spectrum: bool = True) -> Network:
    """Validate a mixing matrix and wrap it in a :class:`Network`."""
    a = np.asarray(weights, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or n < 1:
        raise ValueError("weights must be a non-empty square matrix")
    if np.any(a < 0) or not np.array_equal(a, a.T):
        raise NonStochasticWeights("weights must be symmetric and entrywise nonnegative")
    ones = np.ones(n)
    if np.max(np.abs(a @ ones - ones)) > STOCHASTIC_TOL or np.max(np.abs(ones @ a - ones)) > STOCHASTIC_TOL:
        raise NonStochasticWeights("row and column sums of the weight matrix must equal 1")
    edges = frozenset((i, j) for i in range(n) for j in range(i + 1, n) if a[i, j] > 0)
    if not _is_connected(n, edges):
        raise DisconnectedGraph(f"graph on {n} nodes is not connected")

    lap = np.diag(a @ ones) - a
    eigvals, _ = jacobi_eigenvalues(lap)
    positive = eigvals[eigvals > ZERO_EIG_TOL]
    rho = float(positive[0]) if positive.size else None
    if check_spectrum and rho is None:
        raise DegenerateSpectrum("Laplacian has no positive eigenvalue")
    return Network(n=n, edges=edges, weights=a, laplacian=lap, rho_L=rho, eigenvalues=eigvals)


def build_network(
    n: int,
    topology: str = "ring",
    weight_rule: str = "metropolis",
    edges: Sequence[Sequence[int]] | None = None,
    check_spectrum: bool = True,
) -> Network:
    """Build a connected topology with doubly stochastic weights.

    ``check_spectrum=False`` admits the single-node network, whose Laplacian
    is identically zero; its ``rho_L`` is then ``None``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if weight_rule not in WEIGHT_RULES:
        raise ValueError(f"unknown weight rule {weight_rule!r}; expected one of {WEIGHT_RULES}")
    edge_set = _topology_edges(n, topology, edges)
    if not _is_connected(n, edge_set):
        raise DisconnectedGraph(f"{topology} graph on {n} nodes is not connected")
    if weight_rule == "metropolis":
        a = metropolis_weights(n, edge_set)
    else:
        a = uniform_neighbor_weights(n, edge_set)
    return network_from_weights(a, check_spectrum=check_spectrum)


def algebraic_connectivity(net: Network) -> float:
    """Second-smallest eigenvalue of the Laplacian of ``net``."""
    if net.n < 2:
        raise DegenerateSpectrum("algebraic connectivity needs at least two nodes")
    eigvals, _ = jacobi_eigenvalues(net.laplacian)
    if eigvals[0] > ZERO_EIG_TOL or eigvals[0] < -ZERO_EIG_TOL:
        raise DegenerateSpectrum(f"smallest Laplacian eigenvalue {eigvals[0]:.3e} is not zero")
    if eigvals[1] <= ZERO_EIG_TOL:
        raise DegenerateSpectrum("zero eigenvalue is repeated; graph is disconnected")
    return float(eigvals[1])


def laplacian_spectrum(weights: np.ndarray) -> np.ndarray:
    """Ascending Laplacian eigenvalues of an arbitrary symmetric weight matrix.

    Unlike :func:`network_from_weights` this performs no validation, so it can
    be used to inspect disconnected graphs.
    """
    a = np.asarray(weights, dtype=float)
    lap = np.diag(a.sum(axis=1)) - a
    return jacobi_eigenvalues(lap)[0]
