"""Links of codimension-2 cells, the common bipartite link graph, and
Garland-style local-to-global gap estimates.

Every link of a (k-2)-cell of a balanced Cayley complex is isomorphic to one
bipartite graph on two copies of the group, with an edge {(1,x),(2,y)}
whenever x*y lies in the generator set. The local identity

    |d_{k-1} phi|^2 = sum_links |d_0 phi_link|^2 - |A| (k-1) |phi|^2

turns the second smallest link-Laplacian eigenvalue into the lower bound
k*lambda - (k-1)*|A| on the degree-(k-1) spectral gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexes import ComplexHandle
from .errors import ComputationError, NotACell, SizeCap
from .fourier import fourier_norm
from .groups import GroupTable, normalize_subset

_DENSE_CAP = 3000


@dataclass
class BipartiteGraph:
    """Bipartite graph on parts (1, x) and (2, y), x and y over the group."""

    n: int
    biadjacency: np.ndarray  # bool (n, n); [x, y] True iff {(1,x),(2,y)} is an edge

    @property
    def num_edges(self) -> int:
        return int(self.biadjacency.sum())

    def degrees(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            self.biadjacency.sum(axis=1).astype(np.int64),
            self.biadjacency.sum(axis=0).astype(np.int64),
        )

    def is_biregular(self, degree: int) -> bool:
        d1, d2 = self.degrees()
        return bool((d1 == degree).all() and (d2 == degree).all())

    def laplacian(self) -> np.ndarray:
        n = self.n
        L = np.zeros((2 * n, 2 * n))
        d1, d2 = self.degrees()
        L[:n, :n] = np.diag(d1.astype(float))
        L[n:, n:] = np.diag(d2.astype(float))
        B = self.biadjacency.astype(float)
        L[:n, n:] = -B
        L[n:, :n] = -B.T
        return L

    def lambda2(self) -> float:
        """Second smallest eigenvalue of the (unreduced) graph Laplacian."""
        if 2 * self.n > _DENSE_CAP:
            raise SizeCap(f"dense eigensolve on {2 * self.n} vertices exceeds {_DENSE_CAP}")
        eigs = np.linalg.eigvalsh(self.laplacian())
        return float(eigs[1])

    def component_count(self) -> int:
        n = self.n
        parent = list(range(2 * n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for x, y in zip(*np.nonzero(self.biadjacency)):
            rx, ry = find(int(x)), find(int(y) + n)
            if rx != ry:
                parent[rx] = ry
        return len({find(v) for v in range(2 * n)})


def bipartite_link_graph(G: GroupTable, gen_set: Sequence[int]) -> BipartiteGraph:
    """The common link graph: edge {(1,x),(2,y)} iff x*y is in the generator set."""
    A = normalize_subset(G, gen_set)
    mask = np.isin(G.mul, np.array(A, dtype=G.mul.dtype))
    return BipartiteGraph(n=G.n, biadjacency=mask)


def link_graph_gap(G: GroupTable, gen_set: Sequence[int]) -> float:
    """lambda_2 of the common link graph."""
    return bipartite_link_graph(G, gen_set).lambda2()


def check_link_gap_bound(
    G: GroupTable, gen_set: Sequence[int], tol: float = 1e-8
) -> tuple[bool, float]:
    """Check lambda_2 >= |A| - nu(A); returns (holds, slack)."""
    A = normalize_subset(G, gen_set)
    lam = link_graph_gap(G, A)
    bound = len(A) - fourier_norm(G, A).nu
    return bool(lam >= bound - tol), float(lam - bound)


def _link_context(handle: ComplexHandle, tau_index: int):
    """Missing parts (i1 < i2) and the three partial products around them."""
    k = handle.k
    if k < 2 and tau_index != 0:
        raise NotACell("links are taken over (k-2)-cells")
    parts, elems = handle.unrank_skeleton_cell(k - 2, tau_index)
    missing = [i for i in range(k + 1) if i not in parts]
    i1, i2 = missing
    G = handle.group
    z1 = G.product(e for p, e in zip(parts, elems) if p < i1)
    z2 = G.product(e for p, e in zip(parts, elems) if i1 < p < i2)
    z3 = G.product(e for p, e in zip(parts, elems) if p > i2)
    return parts, elems, i1, i2, z1, z2, z3


def link_edges(handle: ComplexHandle, tau_index: int) -> tuple[int, int, np.ndarray]:
    """(i1, i2, biadjacency) of the link of the given (k-2)-cell.

    The link vertex (i1, x) connects to (i2, y) iff completing the cell with x
    and y at the two missing parts gives a top cell.
    """
    _, _, i1, i2, z1, z2, z3 = _link_context(handle, tau_index)
    G = handle.group
    n = G.n
    A = handle.gen_set
    x = np.arange(n)
    w = G.mul[G.mul[z1, x], z2]              # z1 * x * z2 for each x
    biadj = np.zeros((n, n), dtype=bool)
    inv_z3 = G.inv[z3]
    for a in A:
        target = G.mul[a, inv_z3]
        y = G.mul[G.inv[w], target]          # solves z1 x z2 * y * z3 = a
        biadj[x, y] = True
    return i1, i2, biadj


@dataclass
class LinkReport:
    """Result of verifying one link against the common link graph."""

    tau_index: int
    i1: int
    i2: int
    map_first: np.ndarray   # x at part i1 -> first-part vertex of the common graph
    map_second: np.ndarray  # y at part i2 -> second-part vertex
    edges_match: bool
    lambda2: float


def link_isomorphism(handle: ComplexHandle, tau_index: int) -> LinkReport:
    """Build the explicit vertex bijection from a link onto the common link
    graph and verify exact edge-set equality.

    The map sends (i1, x) to (1, z1*x*z2) and (i2, y) to (2, y*z3) where the
    z's are the partial products of the cell before, between, and after the
    missing parts.
    """
    _, _, i1, i2, z1, z2, z3 = _link_context(handle, tau_index)
    G = handle.group
    n = G.n
    x = np.arange(n)
    map_first = G.mul[G.mul[z1, x], z2]
    map_second = G.mul[x, z3]
    _, _, biadj = link_edges(handle, tau_index)
    mapped = np.zeros((n, n), dtype=bool)
    mapped[np.repeat(map_first, n), np.tile(map_second, n)] = biadj.ravel()
    reference = bipartite_link_graph(G, handle.gen_set).biadjacency
    graph = BipartiteGraph(n=n, biadjacency=biadj)
    return LinkReport(
        tau_index=tau_index,
        i1=i1,
        i2=i2,
        map_first=map_first,
        map_second=map_second,
        edges_match=bool(np.array_equal(mapped, reference)),
        lambda2=graph.lambda2(),
    )


def _link_cochain_values(
    handle: ComplexHandle, tau_index: int, phi: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Restrictions of a (k-1)-cochain to the link of a (k-2)-cell.

    Returns (values at (i1, x), values at (i2, y), biadjacency). The value at
    a link vertex v is phi evaluated on the cell v joined with tau, written
    with v first, so it picks up the sign of moving v to its sorted position.
    """
    parts, elems, i1, i2, z1, z2, z3 = _link_context(handle, tau_index)
    G = handle.group
    n = G.n
    k = handle.k

    def values_at(part: int) -> np.ndarray:
        new_parts = tuple(sorted(parts + (part,)))
        pos = new_parts.index(part)
        sign = (-1) ** pos
        base_elems = list(elems)
        base_elems.insert(pos, 0)
        base_rank = handle.rank_skeleton_cell(new_parts, tuple(base_elems))
        stride = n ** (k - 1 - pos)          # weight of the inserted coordinate
        ranks = base_rank + np.arange(n) * stride
        return sign * phi[ranks]

    _, _, biadj = link_edges(handle, tau_index)
    return values_at(i1), values_at(i2), biadj


def garland_identity_defect(handle: ComplexHandle, phi: np.ndarray) -> float:
    """Absolute defect of the local energy identity on a (k-1)-cochain:
    coboundary energy vs link energies minus |A|(k-1) times the norm."""
    k = handle.k
    G = handle.group
    up = handle.coboundary(k - 1).real_matrix()
    lhs = float(np.sum((up @ phi) ** 2))
    total = 0.0
    for tau_index in range(handle.num_cells(k - 2)):
        v1, v2, biadj = _link_cochain_values(handle, tau_index, phi)
        xs, ys = np.nonzero(biadj)
        total += float(np.sum((v2[ys] - v1[xs]) ** 2))
    m = len(handle.gen_set)
    rhs = total - m * (k - 1) * float(np.sum(phi**2))
    return abs(lhs - rhs)


def garland_bound(
    handle: ComplexHandle, spot_checks: int = 5, seed: int = 0, tol: float = 1e-8
) -> float:
    """k * lambda - (k-1) * |A| where lambda is the worst link gap.

    All links are isomorphic to the common link graph, so lambda is computed
    once there; a few randomly chosen links are re-solved directly as a guard
    on the isomorphism itself.
    """
    G = handle.group
    lam = link_graph_gap(G, handle.gen_set)
    count = handle.num_cells(handle.k - 2)
    rng = np.random.default_rng(seed)
    sample = rng.choice(count, size=min(spot_checks, count), replace=False)
    for tau_index in sample:
        _, _, biadj = link_edges(handle, int(tau_index))
        lam_tau = BipartiteGraph(n=G.n, biadjacency=biadj).lambda2()
        if abs(lam_tau - lam) > tol:
            raise ComputationError(
                f"link {int(tau_index)} gap {lam_tau} differs from common value {lam}"
            )
    m = len(handle.gen_set)
    return handle.k * lam - (handle.k - 1) * m
