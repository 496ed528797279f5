"""Builders for the standard catalog of networked systems.

All scalar builders produce weight matrices with zero row sums (the
consensus-family structural invariant), so the all-ones direction is
always in the kernel of W acting on agent indices.

Graph edges are (i, j, weight) triples meaning "agent i receives from
agent j"; undirected graphs store each edge once and imply the reverse
direction.  Agent indices are 0-based.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError
from .system import CoupledSystem, CouplingKind, CouplingSpec


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple
    directed: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one vertex, got n={self.n}")
        norm = []
        for e in self.edges:
            if len(e) == 2:
                i, j = e
                w = 1.0
            else:
                i, j, w = e
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j:
                raise ValueError(f"self-loop on vertex {i} is not allowed")
            if not math.isfinite(w):
                raise ValueError(f"edge ({i}, {j}) has non-finite weight")
            norm.append((i, j, w))
        object.__setattr__(self, "edges", tuple(norm))

    @classmethod
    def path(cls, n: int, weight: float = 1.0) -> "Graph":
        return cls(n=n, edges=tuple((i, i + 1, weight) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> "Graph":
        return cls(n=n, edges=tuple(
            (i, j, weight) for i in range(n) for j in range(i + 1, n)
        ))

    def weight_map(self) -> dict:
        """(i, j) -> weight for every directed pair with an edge."""
        wmap: dict = {}
        for i, j, w in self.edges:
            wmap[(i, j)] = wmap.get((i, j), 0.0) + w
            if not self.directed:
                wmap[(j, i)] = wmap.get((j, i), 0.0) + w
        return wmap

    def neighbor_sets(self) -> list:
        nbrs = [set() for _ in range(self.n)]
        for (i, j) in self.weight_map():
            nbrs[i].add(j)
        return nbrs


def _laplacian_style_spec(kind: CouplingKind, n: int, d: int,
                          weight: Callable[[int, int, float, np.ndarray], float],
                          wmap: dict) -> CouplingSpec:
    """Spec with w_ij = weight(i,j) on edges and w_ii = -sum_j w_ij."""
    rows = [sorted(j for (i2, j) in wmap if i2 == i) for i in range(n)]

    def evaluator(i, j, t, X):
        if i == j:
            return -sum(weight(i, k, t, X) for k in rows[i])
        if (i, j) in wmap:
            return weight(i, j, t, X)
        return 0.0

    return CouplingSpec(kind=kind, n=n, d=d, evaluator=evaluator)


def consensus(graph: Graph, d: int,
              modulation: Callable[[float], float] | None = None) -> CoupledSystem:
    """Consensus dynamics: each agent moves toward its neighbors.

    w_ij = a_ij on edges and w_ii = -sum of the row, so rows sum to zero.
    ``modulation(t)`` optionally scales every weight, giving time-varying
    couplings a_ij * modulation(t).
    """
    wmap = graph.weight_map()
    for (i, j), w in wmap.items():
        if w < 0:
            raise ValueError(f"consensus weights must be >= 0, edge ({i}, {j}) has {w}")
    if modulation is None:
        kind = CouplingKind.SCALAR_CONSTANT
        weight = lambda i, j, t, X: wmap[(i, j)]
    else:
        kind = CouplingKind.SCALAR_TIME_VARYING
        weight = lambda i, j, t, X: wmap[(i, j)] * modulation(t)
    spec = _laplacian_style_spec(kind, graph.n, d, weight, wmap)
    return CoupledSystem(spec=spec, label=f"consensus(n={graph.n}, d={d})")


@dataclass(frozen=True)
class FormationTarget:
    """Desired inter-agent distances plus the gain applied to the error.

    ``distances`` maps an undirected edge (i, j) to the positive desired
    distance.  ``gain`` maps the squared-distance error e to the coupling
    weight; None means the quadratic-potential gain g(e) = e.  Custom
    gains must be continuous with g(0) = 0 (checked at e = 0), so target
    shapes are equilibria.
    """

    distances: dict
    gain: Callable[[float], float] | None = None

    def __post_init__(self):
        norm = {}
        for (i, j), dist in self.distances.items():
            dist = float(dist)
            if dist <= 0:
                raise ValueError(f"desired distance for ({i}, {j}) must be positive")
            norm[(min(i, j), max(i, j))] = dist
        object.__setattr__(self, "distances", norm)
        if self.gain is not None and abs(self.gain(0.0)) > 1e-12:
            raise ValueError("formation gain must satisfy g(0) = 0")

    @classmethod
    def from_edge_list(cls, graph: Graph, distances,
                       gain: Callable[[float], float] | None = None) -> "FormationTarget":
        if len(distances) != len(graph.edges):
            raise ValueError(
                f"got {len(distances)} distances for {len(graph.edges)} edges"
            )
        mapping = {(i, j): dist for (i, j, _), dist in zip(graph.edges, distances)}
        return cls(distances=mapping, gain=gain)

    def gain_value(self, e: float) -> float:
        return e if self.gain is None else float(self.gain(e))

    def distance(self, i: int, j: int) -> float:
        return self.distances[(min(i, j), max(i, j))]


def distance_formation(graph: Graph, target: FormationTarget, d: int) -> CoupledSystem:
    """Distance-based formation control on an undirected graph.

    Agents in the plane or in 3-D space drive the squared distance errors
    e_ij = ||x_i - x_j||^2 - d_ij^2 to zero: the coupling weight is
    w_ij = g(e_ij) on edges and w_ii = -sum_j g(e_ij), which makes each
    agent's velocity -sum_j g(e_ij) (x_i - x_j).  With the quadratic gain
    this is the negative gradient of (1/4) sum e_ij^2.
    """
    if graph.directed:
        raise ValueError("distance formation needs an undirected graph")
    if d not in (2, 3):
        raise DimensionMismatchError(f"formation dimension must be 2 or 3, got {d}")
    for (i, j, _) in graph.edges:
        if (min(i, j), max(i, j)) not in target.distances:
            raise ValueError(f"no desired distance for edge ({i}, {j})")
    wmap = graph.weight_map()

    def weight(i, j, t, X):
        diff = X[:, i] - X[:, j]
        e = float(diff @ diff) - target.distance(i, j) ** 2
        return target.gain_value(e)

    spec = _laplacian_style_spec(
        CouplingKind.SCALAR_STATE_DEPENDENT, graph.n, d, weight, wmap
    )
    return CoupledSystem(spec=spec, label=f"distance_formation(n={graph.n}, d={d})")


def affine_coordination(graph: Graph, d: int,
                        u: Callable[[int, int, float, np.ndarray], float]) -> CoupledSystem:
    """Coordination dynamics with edge gains u(i, j, t, X).

    Generalizes consensus: w_ij = u(i, j, t, X) on edges with the usual
    zero-row-sum diagonal.  u must be continuous (caller contract).
    """
    wmap = graph.weight_map()
    spec = _laplacian_style_spec(
        CouplingKind.SCALAR_STATE_DEPENDENT, graph.n, d,
        lambda i, j, t, X: float(u(i, j, t, X)), wmap,
    )
    return CoupledSystem(spec=spec, label=f"affine_coordination(n={graph.n}, d={d})")


def _edge_block_map(graph: Graph, blocks, d: int | None) -> tuple[dict, int]:
    """Normalize per-edge blocks (dict or edge-aligned list) to a dict."""
    if isinstance(blocks, dict):
        items = {(min(i, j), max(i, j)): np.asarray(Q, dtype=float)
                 for (i, j), Q in blocks.items()}
    else:
        if len(blocks) != len(graph.edges):
            raise ValueError(
                f"got {len(blocks)} blocks for {len(graph.edges)} edges"
            )
        items = {(min(i, j), max(i, j)): np.asarray(Q, dtype=float)
                 for (i, j, _), Q in zip(graph.edges, blocks)}
    if d is None:
        first = next(iter(items.values()))
        if first.ndim != 2 or first.shape[0] != first.shape[1]:
            raise DimensionMismatchError(f"edge block has shape {first.shape}")
        d = first.shape[0]
    for key, Q in items.items():
        if Q.shape != (d, d):
            raise DimensionMismatchError(
                f"edge block {key} has shape {Q.shape}, expected ({d}, {d})"
            )
    return items, d


def matrix_weighted_consensus(graph: Graph, blocks, d: int | None = None) -> CoupledSystem:
    """Consensus with a d-by-d weight block per undirected edge.

    W_ij = Q_ij on edges (the same block both directions) and
    W_ii = -sum_j Q_ij.  Reduces to scalar consensus when every block is
    q * I.
    """
    if graph.directed:
        raise ValueError("matrix-weighted consensus needs an undirected graph")
    qmap, d = _edge_block_map(graph, blocks, d)
    nbrs = graph.neighbor_sets()
    zero = np.zeros((d, d))

    def evaluator(i, j, t, X):
        if i == j:
            acc = zero.copy()
            for k in nbrs[i]:
                acc -= qmap[(min(i, k), max(i, k))]
            return acc
        if j in nbrs[i]:
            return qmap[(min(i, j), max(i, j))]
        return zero

    spec = CouplingSpec(kind=CouplingKind.MATRIX_CONSTANT, n=graph.n, d=d,
                        evaluator=evaluator)
    return CoupledSystem(spec=spec, label=f"matrix_weighted_consensus(n={graph.n}, d={d})")


def _per_agent_drifts(A, n: int, d: int | None) -> tuple[list, int]:
    A = np.asarray(A, dtype=float)
    if A.ndim == 2:
        drifts = [A] * n
    elif A.ndim == 3 and A.shape[0] == n:
        drifts = [A[i] for i in range(n)]
    else:
        raise DimensionMismatchError(
            f"drift must be one (d, d) matrix or n of them, got shape {A.shape}"
        )
    if d is None:
        d = drifts[0].shape[0]
    for Ai in drifts:
        if Ai.shape != (d, d):
            raise DimensionMismatchError(
                f"agent drift has shape {Ai.shape}, expected ({d}, {d})"
            )
    return drifts, d


def linear_sync_type1(graph: Graph, A, b, d: int | None = None) -> CoupledSystem:
    """Networked linear agents with per-agent drift and scalar edge gains.

    Agent i runs dx_i/dt = A_i x_i - sum_j b_ij (x_i - x_j), i.e.
    W_ij = b_ij * I and W_ii = A_i - (sum_j b_ij) * I.  ``b`` holds one
    scalar (or callable of t) per edge, used in both directions on
    undirected graphs.  With identical drifts the rank-preserving
    structure check passes; drifts differing by anything other than a
    scalar multiple of the identity break it.
    """
    drifts, d = _per_agent_drifts(A, graph.n, d)
    if len(b) != len(graph.edges):
        raise ValueError(f"got {len(b)} edge gains for {len(graph.edges)} edges")
    gain_map: dict = {}
    time_varying = False
    for (i, j, _), gain in zip(graph.edges, b):
        time_varying = time_varying or callable(gain)
        key = (min(i, j), max(i, j))
        gain_map[key] = gain
    nbrs = graph.neighbor_sets()
    eye = np.eye(d)

    def gain_at(i, j, t):
        g = gain_map[(min(i, j), max(i, j))]
        return float(g(t)) if callable(g) else float(g)

    def evaluator(i, j, t, X):
        if i == j:
            total = sum(gain_at(i, k, t) for k in nbrs[i])
            return drifts[i] - total * eye
        if j in nbrs[i]:
            return gain_at(i, j, t) * eye
        return np.zeros((d, d))

    kind = CouplingKind.MATRIX_TIME_VARYING if time_varying else CouplingKind.MATRIX_CONSTANT
    spec = CouplingSpec(kind=kind, n=graph.n, d=d, evaluator=evaluator)
    return CoupledSystem(spec=spec, label=f"linear_sync_type1(n={graph.n}, d={d})")


def linear_sync_type2(graph: Graph, A, blocks, d: int | None = None) -> CoupledSystem:
    """Networked linear agents with matrix edge gains.

    Agent i runs dx_i/dt = A_i x_i - sum_j B_ij (x_i - x_j), i.e.
    W_ij = B_ij and W_ii = A_i - sum_j B_ij.  Generic edge blocks violate
    the rank-preserving structure; B_ij = b * I recovers type 1.
    """
    drifts, d = _per_agent_drifts(A, graph.n, d)
    bmap, d = _edge_block_map(graph, blocks, d)
    nbrs = graph.neighbor_sets()

    def evaluator(i, j, t, X):
        if i == j:
            acc = drifts[i].copy()
            for k in nbrs[i]:
                acc -= bmap[(min(i, k), max(i, k))]
            return acc
        if j in nbrs[i]:
            return bmap[(min(i, j), max(i, j))]
        return np.zeros((d, d))

    spec = CouplingSpec(kind=CouplingKind.MATRIX_CONSTANT, n=graph.n, d=d,
                        evaluator=evaluator)
    return CoupledSystem(spec=spec, label=f"linear_sync_type2(n={graph.n}, d={d})")


def collinear_general(blocks) -> CoupledSystem:
    """Fully general constant matrix couplings: W_ij = A_ij verbatim.

    ``blocks`` is the complete (n, n, d, d) grid.
    """
    blocks = np.array(blocks, dtype=float)
    if blocks.ndim != 4 or blocks.shape[0] != blocks.shape[1] \
            or blocks.shape[2] != blocks.shape[3]:
        raise DimensionMismatchError(
            f"blocks must have shape (n, n, d, d), got {blocks.shape}"
        )
    n, _, d, _ = blocks.shape
    spec = CouplingSpec(
        kind=CouplingKind.MATRIX_CONSTANT, n=n, d=d,
        evaluator=lambda i, j, t, X: blocks[i, j],
    )
    return CoupledSystem(spec=spec, label=f"collinear_general(n={n}, d={d})")
