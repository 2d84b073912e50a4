"""Cell enumeration and signed coboundary matrices for balanced Cayley complexes.

The complex on a group G of order n with dimension k and generator set A has
vertex parts {i} x G for the k+1 parts i. Every cell of dimension j < k exists
(the full skeleton of the join); the k-cells are the part-transversal tuples
whose left-to-right product lies in A.

Cells of dimension j < k are indexed by (part-subset, element tuple); the
part subset contributes a combinatorial rank and the elements a mixed-radix
value. k-cells are indexed by (free prefix in G^k, target element of A), the
last coordinate being solved from the product constraint.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import NotACell, SizeCap, UnsupportedParameter
from .groups import GroupTable, normalize_subset

_COCHAIN_CAP = 200_000


@dataclass(frozen=True)
class SparseIncidence:
    """Signed sparse matrix of a coboundary operator.

    Rows index (j+1)-cells and columns index j-cells; every row has exactly
    j+2 entries with alternating signs +1, -1, ...
    """

    rows: int
    cols: int
    csr: sp.csr_matrix

    def triples(self) -> Iterator[tuple[int, int, int]]:
        """(row, col, sign) entries in row-major order."""
        m = self.csr
        for r in range(self.rows):
            for ptr in range(m.indptr[r], m.indptr[r + 1]):
                yield r, int(m.indices[ptr]), int(m.data[ptr])

    @property
    def nnz(self) -> int:
        return int(self.csr.nnz)

    def real_matrix(self) -> sp.csr_matrix:
        return self.csr.astype(np.float64)

    def dump(self, path: str) -> None:
        """Write 'ROWS COLS NNZ' then one 'row col sign' line per entry, 0-based."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.rows} {self.cols} {self.nnz}\n")
            for r, c, s in self.triples():
                fh.write(f"{r} {c} {s}\n")


def _tuple_digits(n: int, t: int) -> np.ndarray:
    """All tuples in G^t as an (n**t, t) digit array in mixed-radix order."""
    if t == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices((n,) * t).reshape(t, -1).T.astype(np.int64)


def _radix(n: int, t: int) -> np.ndarray:
    return n ** np.arange(t - 1, -1, -1, dtype=np.int64)


class ComplexHandle:
    """Immutable realization of a balanced Cayley complex.

    Coboundary matrices are built lazily and cached; the handle is safe to
    share across threads.
    """

    def __init__(self, G: GroupTable, k: int, gen_set: Sequence[int]):
        if k < 1:
            raise UnsupportedParameter(f"complex dimension must be >= 1, got {k}")
        A = normalize_subset(G, gen_set)
        n = G.n
        if (k + 1) * n**k > _COCHAIN_CAP:
            raise SizeCap(
                f"(k+1) * n**k = {(k + 1) * n ** k} exceeds the cochain cap {_COCHAIN_CAP}"
            )
        self.group = G
        self.k = k
        self.gen_set = A
        self._gen_pos = {a: i for i, a in enumerate(A)}
        self._parts: dict[int, list[tuple[int, ...]]] = {}
        self._part_rank: dict[int, dict[tuple[int, ...], int]] = {}
        for size in range(1, k + 2):
            subsets = list(itertools.combinations(range(k + 1), size))
            self._parts[size] = subsets
            self._part_rank[size] = {s: i for i, s in enumerate(subsets)}
        self._cache: dict[int, SparseIncidence] = {}
        self._lock = threading.Lock()

    # ---- counting and indexing -------------------------------------------------

    def num_cells(self, j: int) -> int:
        n, k = self.group.n, self.k
        if j == -1:
            return 1
        if 0 <= j < k:
            return comb(k + 1, j + 1) * n ** (j + 1)
        if j == k:
            return len(self.gen_set) * n**k
        raise NotACell(f"dimension {j} out of range [-1, {k}]")

    def cells_per_dim(self) -> list[int]:
        return [self.num_cells(j) for j in range(self.k + 1)]

    def rank_skeleton_cell(self, parts: tuple[int, ...], elems: tuple[int, ...]) -> int:
        """Index of a cell of dimension < k given its sorted parts and elements."""
        n = self.group.n
        size = len(parts)
        rs = self._part_rank[size][parts]
        mr = 0
        for x in elems:
            mr = mr * n + int(x)
        return rs * n**size + mr

    def unrank_skeleton_cell(self, j: int, idx: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(parts, elems) of the idx-th cell of dimension j < k (or j == -1)."""
        if j == -1:
            if idx != 0:
                raise NotACell("the empty cell has index 0")
            return (), ()
        if not 0 <= j < self.k:
            raise NotACell(f"unrank_skeleton_cell needs -1 <= j < k, got {j}")
        n = self.group.n
        size = j + 1
        rs, mr = divmod(idx, n**size)
        if not 0 <= rs < len(self._parts[size]):
            raise NotACell(f"cell index {idx} out of range in dimension {j}")
        elems = []
        for _ in range(size):
            mr, d = divmod(mr, n)
            elems.append(int(d))
        elems.reverse()
        return self._parts[size][rs], tuple(elems)

    def unrank_top_cell(self, idx: int) -> tuple[tuple[int, ...], int]:
        """(full element tuple x_1..x_{k+1}, target a) of the idx-th k-cell."""
        G, k = self.group, self.k
        if not 0 <= idx < self.num_cells(k):
            raise NotACell(f"top cell index {idx} out of range")
        mr, apos = divmod(idx, len(self.gen_set))
        elems = []
        for _ in range(k):
            mr, d = divmod(mr, G.n)
            elems.append(int(d))
        elems.reverse()
        a = self.gen_set[apos]
        last = int(G.mul[G.inv[G.product(elems)], a])
        return tuple(elems) + (last,), a

    # ---- coboundary matrices ---------------------------------------------------

    def coboundary(self, j: int) -> SparseIncidence:
        """Signed matrix of the degree-j coboundary, for -1 <= j <= k-1."""
        if not -1 <= j <= self.k - 1:
            raise NotACell(f"coboundary defined for -1 <= j <= k-1, got {j}")
        with self._lock:
            if j not in self._cache:
                self._cache[j] = self._build_coboundary(j)
            return self._cache[j]

    def _build_coboundary(self, j: int) -> SparseIncidence:
        n, k = self.group.n, self.k
        n_rows = self.num_cells(j + 1)
        n_cols = self.num_cells(j)
        if j == -1:
            ones = sp.csr_matrix(np.ones((n_rows, 1), dtype=np.int8))
            return SparseIncidence(rows=n_rows, cols=n_cols, csr=ones)
        if j + 1 < k:
            rows, cols, signs = self._skeleton_entries(j)
        else:
            rows, cols, signs = self._top_entries()
        m = sp.csr_matrix((signs, (rows, cols)), shape=(n_rows, n_cols), dtype=np.int8)
        m.sort_indices()
        return SparseIncidence(rows=n_rows, cols=n_cols, csr=m)

    def _skeleton_entries(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n, k = self.group.n, self.k
        size = j + 2
        count = n**size
        digits = _tuple_digits(n, size)
        rad = _radix(n, size - 1)
        rows_out, cols_out, signs_out = [], [], []
        for S in self._parts[size]:
            rs = self._part_rank[size][S]
            row_idx = rs * count + np.arange(count, dtype=np.int64)
            for i in range(size):
                face = S[:i] + S[i + 1 :]
                fr = self._part_rank[size - 1][face]
                keep = [t for t in range(size) if t != i]
                mr = digits[:, keep] @ rad
                cols = fr * n ** (size - 1) + mr
                rows_out.append(row_idx)
                cols_out.append(cols)
                signs_out.append(np.full(count, (-1) ** i, dtype=np.int8))
        return (
            np.concatenate(rows_out),
            np.concatenate(cols_out),
            np.concatenate(signs_out),
        )

    def _top_entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        G, k = self.group, self.k
        n = G.n
        nA = len(self.gen_set)
        free = _tuple_digits(n, k)
        prefix = free[:, 0].copy()
        for t in range(1, k):
            prefix = G.mul[prefix, free[:, t]]
        rad = _radix(n, k)
        rows_out, cols_out, signs_out = [], [], []
        all_parts = tuple(range(k + 1))
        for apos, a in enumerate(self.gen_set):
            last = G.mul[G.inv[prefix], a].astype(np.int64)
            full = np.hstack([free, last[:, None]])
            row_idx = np.arange(n**k, dtype=np.int64) * nA + apos
            for i in range(k + 1):
                face_parts = all_parts[:i] + all_parts[i + 1 :]
                fr = self._part_rank[k][face_parts]
                keep = [t for t in range(k + 1) if t != i]
                mr = full[:, keep] @ rad
                cols = fr * n**k + mr
                rows_out.append(row_idx)
                cols_out.append(cols)
                signs_out.append(np.full(n**k, (-1) ** i, dtype=np.int8))
        return (
            np.concatenate(rows_out),
            np.concatenate(cols_out),
            np.concatenate(signs_out),
        )

    # ---- verification helpers ----------------------------------------------------

    def chain_identity_ok(self) -> bool:
        """d_{j+1} d_j = 0 exactly (integer arithmetic) for all consecutive pairs."""
        for j in range(-1, self.k - 1):
            lo = self.coboundary(j).csr.astype(np.int64)
            hi = self.coboundary(j + 1).csr.astype(np.int64)
            prod = hi @ lo
            if prod.nnz and np.abs(prod.data).max() != 0:
                return False
        return True

    def degree_check(self) -> tuple[bool, int | None]:
        """Every (k-1)-cell lies in exactly |A| k-cells; returns first violation."""
        d = self.coboundary(self.k - 1).csr
        counts = np.asarray(np.abs(d).sum(axis=0)).ravel()
        bad = np.flatnonzero(counts != len(self.gen_set))
        if len(bad):
            return False, int(bad[0])
        return True, None


def build_complex(G: GroupTable, k: int, gen_set: Sequence[int]) -> ComplexHandle:
    """Construct and index the balanced Cayley complex for (G, k, A)."""
    return ComplexHandle(G, k, gen_set)
