"""Finite groups as validated multiplication tables with 0-based element indices.

The identity is always element 0. Constructors cover cyclic groups, direct
products, dihedral and symmetric groups, PSL(2, q) for small odd primes, and
tables loaded from JSON files.
"""

from __future__ import annotations

import itertools
import json
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    NotAGroup,
    OrderTooLarge,
    ParseError,
    UnsupportedParameter,
)

_MAX_ORDER = 10_000
_FULL_ASSOC_LIMIT = 256


class GroupTable:
    """A finite group of order n given by its n-by-n multiplication table.

    Element 0 is the identity. Tables are immutable after construction and
    safe to share across threads.
    """

    __slots__ = ("name", "n", "mul", "inv", "cyclic_factors")

    def __init__(
        self,
        name: str,
        mul: np.ndarray,
        inv: np.ndarray,
        cyclic_factors: tuple[int, ...] | None = None,
    ):
        self.name = name
        self.n = int(mul.shape[0])
        self.mul = mul
        self.inv = inv
        self.cyclic_factors = cyclic_factors
        mul.setflags(write=False)
        inv.setflags(write=False)

    def __repr__(self) -> str:
        return f"GroupTable({self.name!r}, n={self.n})"

    def multiply(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def elements(self) -> range:
        return range(self.n)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def product(self, elems: Iterable[int]) -> int:
        """Left-to-right product of a sequence of elements (empty product = identity)."""
        out = 0
        for x in elems:
            out = int(self.mul[out, x])
        return out

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "mul": self.mul.tolist(),
            "inv": self.inv.tolist(),
            "id": 0,
        }


def _inverses_from_mul(mul: np.ndarray) -> np.ndarray:
    n = mul.shape[0]
    inv = np.argmax(mul == 0, axis=1)
    bad = mul[np.arange(n), inv] != 0
    if bad.any():
        x = int(np.flatnonzero(bad)[0])
        raise NotAGroup(f"element {x} has no right inverse")
    return inv.astype(np.int32)


def _finish(name: str, mul: np.ndarray, factors: tuple[int, ...] | None = None) -> GroupTable:
    mul = np.ascontiguousarray(mul, dtype=np.int32)
    return GroupTable(name, mul, _inverses_from_mul(mul), factors)


def validate_group(G: GroupTable, rng_seed: int = 12345) -> None:
    """Check all group axioms on a table; raise NotAGroup with the first violation.

    Associativity is checked exhaustively for n <= 256 and on 10*n**2 random
    triples above that.
    """
    n, mul = G.n, G.mul
    if mul.shape != (n, n):
        raise NotAGroup(f"mul has shape {mul.shape}, expected ({n}, {n})")
    if mul.min() < 0 or mul.max() >= n:
        raise NotAGroup("mul entries out of range")
    idx = np.arange(n)
    if not np.array_equal(mul[0], idx):
        x = int(np.flatnonzero(mul[0] != idx)[0])
        raise NotAGroup(f"identity fails: mul[0][{x}] = {int(mul[0, x])} != {x}")
    if not np.array_equal(mul[:, 0], idx):
        x = int(np.flatnonzero(mul[:, 0] != idx)[0])
        raise NotAGroup(f"identity fails: mul[{x}][0] = {int(mul[x, 0])} != {x}")
    rows_ok = (np.sort(mul, axis=1) == idx[None, :]).all(axis=1)
    if not rows_ok.all():
        r = int(np.flatnonzero(~rows_ok)[0])
        raise NotAGroup(f"row {r} of mul is not a permutation")
    cols_ok = (np.sort(mul, axis=0) == idx[:, None]).all(axis=0)
    if not cols_ok.all():
        c = int(np.flatnonzero(~cols_ok)[0])
        raise NotAGroup(f"column {c} of mul is not a permutation")
    if mul[idx, G.inv].any() or mul[G.inv, idx].any():
        x = int(np.flatnonzero(mul[idx, G.inv] | mul[G.inv, idx])[0])
        raise NotAGroup(f"inv[{x}] = {int(G.inv[x])} is not a two-sided inverse")
    if n <= _FULL_ASSOC_LIMIT:
        lhs = mul[mul, :]          # lhs[x,y,z] = (xy)z
        rhs = mul[:, mul]          # rhs[x,y,z] = x(yz)
        if not np.array_equal(lhs, rhs):
            x, y, z = (int(v[0]) for v in np.nonzero(lhs != rhs))
            raise NotAGroup(
                f"associativity fails at ({x},{y},{z}): "
                f"{int(lhs[x, y, z])} != {int(rhs[x, y, z])}"
            )
    else:
        rng = np.random.default_rng(rng_seed)
        remaining = 10 * n * n
        chunk = 1 << 20
        while remaining > 0:
            b = min(chunk, remaining)
            x, y, z = rng.integers(0, n, size=(3, b))
            bad = mul[mul[x, y], z] != mul[x, mul[y, z]]
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise NotAGroup(
                    f"associativity fails at ({int(x[i])},{int(y[i])},{int(z[i])})"
                )
            remaining -= b


def make_cyclic(n: int) -> GroupTable:
    """Cyclic group of order n with mul[x][y] = (x + y) mod n."""
    if n < 1:
        raise UnsupportedParameter(f"cyclic group order must be >= 1, got {n}")
    idx = np.arange(n, dtype=np.int64)
    mul = (idx[:, None] + idx[None, :]) % n
    return _finish(f"Z{n}", mul, factors=(n,))


def make_product(factors: Sequence[GroupTable]) -> GroupTable:
    """Direct product with mixed-radix element indexing (first factor most significant)."""
    if not factors:
        raise UnsupportedParameter("product needs at least one factor")
    total = 1
    for f in factors:
        total *= f.n
    if total > _MAX_ORDER:
        raise OrderTooLarge(f"product order {total} exceeds cap {_MAX_ORDER}")
    acc = factors[0]
    mul = acc.mul.astype(np.int64)
    cyc: list[int] | None = list(acc.cyclic_factors) if acc.cyclic_factors else None
    name = acc.name
    for f in factors[1:]:
        n1, n2 = mul.shape[0], f.n
        N = n1 * n2
        x1 = np.arange(N, dtype=np.int64) // n2
        x2 = np.arange(N, dtype=np.int64) % n2
        mul = mul[np.ix_(x1, x1)] * n2 + f.mul.astype(np.int64)[np.ix_(x2, x2)]
        if cyc is not None and f.cyclic_factors is not None:
            cyc.extend(f.cyclic_factors)
        else:
            cyc = None
        name = f"{name}x{f.name}"
    return _finish(name, mul, factors=tuple(cyc) if cyc else None)


def make_dihedral(m: int) -> GroupTable:
    """Dihedral group of order 2m; indices 0..m-1 are rotations, m..2m-1 reflections."""
    if m < 2:
        raise UnsupportedParameter(f"dihedral parameter must be >= 2, got {m}")
    n = 2 * m
    f, i = np.divmod(np.arange(n, dtype=np.int64), m)
    # element f*m + i represents r^i s^f; (r^i s^f)(r^j s^g) = r^(i +/- j) s^(f+g)
    ii, jj = i[:, None], i[None, :]
    ff, gg = f[:, None], f[None, :]
    rot = np.where(ff == 0, ii + jj, ii - jj) % m
    mul = ((ff + gg) % 2) * m + rot
    return _finish(f"D{m}", mul)


def make_symmetric(m: int) -> GroupTable:
    """Symmetric group on m letters (m <= 6), elements ranked lexicographically."""
    if not 1 <= m <= 6:
        raise UnsupportedParameter(f"symmetric group supported for 1 <= m <= 6, got {m}")
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
    N = len(perms)
    radix = m ** np.arange(m - 1, -1, -1, dtype=np.int64)
    keys = perms @ radix
    order = np.argsort(keys)            # already sorted for lex enumeration
    keys_sorted = keys[order]
    # composed[i,j] = p_i applied after p_j: (p_i . p_j)(t) = p_i[p_j[t]]
    composed = perms[np.arange(N)[:, None, None], perms[None, :, :]]
    comp_keys = composed.reshape(N * N, m) @ radix
    mul = order[np.searchsorted(keys_sorted, comp_keys)].reshape(N, N)
    return _finish(f"S{m}", mul)


def make_psl2(q: int) -> GroupTable:
    """PSL(2, F_q) for an odd prime q <= 13, via determinant-1 matrices modulo +/-I.

    Elements are canonicalized by forcing the first nonzero entry of (a, b, c, d)
    into {1..(q-1)/2}; the identity is relabeled to index 0.
    """
    if q not in (3, 5, 7, 11, 13):
        raise UnsupportedParameter(f"PSL2 supported for odd primes q <= 13, got {q}")
    half = (q - 1) // 2
    grid = np.indices((q, q, q, q)).reshape(4, -1).T.astype(np.int64)
    det = (grid[:, 0] * grid[:, 3] - grid[:, 1] * grid[:, 2]) % q
    sl2 = grid[det == 1]

    def canonical(mats: np.ndarray) -> np.ndarray:
        first = np.argmax(mats != 0, axis=1)
        lead = mats[np.arange(len(mats)), first]
        flip = lead > half
        out = mats.copy()
        out[flip] = (-out[flip]) % q
        return out

    canon = canonical(sl2)
    packed = ((canon[:, 0] * q + canon[:, 1]) * q + canon[:, 2]) * q + canon[:, 3]
    uniq = np.unique(packed)
    ident = ((1 * q + 0) * q + 0) * q + 1
    uniq = np.concatenate(([ident], uniq[uniq != ident]))
    pos = {int(v): i for i, v in enumerate(uniq)}
    N = len(uniq)
    assert N == q * (q * q - 1) // 2

    d3, r = np.divmod(uniq, q)
    d2, c = np.divmod(d3, q)
    a, b = np.divmod(d2, q)
    mats = np.stack([a, b, c, r], axis=1)

    lookup_keys = np.sort(uniq)
    lookup_perm = np.argsort(uniq)

    def index_of(mats_: np.ndarray) -> np.ndarray:
        canon_ = canonical(mats_ % q)
        keys = ((canon_[:, 0] * q + canon_[:, 1]) * q + canon_[:, 2]) * q + canon_[:, 3]
        return lookup_perm[np.searchsorted(lookup_keys, keys)]

    mul = np.empty((N, N), dtype=np.int64)
    A0, B0, C0, D0 = (mats[:, t] for t in range(4))
    for i in range(N):
        a1, b1, c1, d1 = (int(mats[i, t]) for t in range(4))
        prod = np.stack(
            [
                a1 * A0 + b1 * C0,
                a1 * B0 + b1 * D0,
                c1 * A0 + d1 * C0,
                c1 * B0 + d1 * D0,
            ],
            axis=1,
        )
        mul[i] = index_of(prod)
    return _finish(f"PSL2-{q}", mul)


def from_table(path: str | Path) -> GroupTable:
    """Load and fully validate a Cayley table from a JSON file.

    Expected schema: {"name": str, "n": int, "mul": [[int; n]; n]} with optional
    "inv" and "id" fields that are validated if present. The identity is
    relabeled to index 0 when necessary.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "mul" not in data:
        raise ParseError(f"{path}: expected an object with a 'mul' field")
    name = str(data.get("name", Path(path).stem))
    try:
        mul = np.array(data["mul"], dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: 'mul' is not a rectangular integer table") from exc
    if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
        raise ParseError(f"{path}: 'mul' must be a nonempty square table")
    n = mul.shape[0]
    if "n" in data and int(data["n"]) != n:
        raise ParseError(f"{path}: declared n={data['n']} but table is {n}x{n}")
    if n > _MAX_ORDER:
        raise OrderTooLarge(f"table order {n} exceeds cap {_MAX_ORDER}")
    if mul.min() < 0 or mul.max() >= n:
        raise NotAGroup("mul entries out of range [0, n)")

    idx = np.arange(n)
    is_id = (mul == idx[None, :]).all(axis=1) & (mul.T == idx[None, :]).all(axis=1)
    ids = np.flatnonzero(is_id)
    if len(ids) == 0:
        raise NotAGroup("no two-sided identity element")
    e = int(ids[0])
    if "id" in data and int(data["id"]) != e:
        raise NotAGroup(f"declared identity {data['id']} but table identity is {e}")
    if e != 0:
        perm = idx.copy()
        perm[0], perm[e] = e, 0          # swap labels 0 <-> e
        new = np.empty_like(mul)
        new[perm[:, None], perm[None, :]] = perm[mul]
        mul = new
    G = _finish(name, mul)
    if "inv" in data:
        declared = np.array(data["inv"], dtype=np.int64)
        if e != 0 and len(declared) == n:
            perm = idx.copy()
            perm[0], perm[e] = e, 0
            declared = perm[declared[perm]]
        if len(declared) != n or not np.array_equal(declared, G.inv):
            raise NotAGroup("declared 'inv' table is inconsistent with mul")
    validate_group(G)
    return G


def conjugacy_classes(G: GroupTable) -> list[list[int]]:
    """Partition of {0..n-1} into conjugacy classes, sorted by smallest member."""
    n = G.n
    g = np.arange(n)
    seen = np.zeros(n, dtype=bool)
    classes = []
    for x in range(n):
        if seen[x]:
            continue
        orbit = np.unique(G.mul[G.mul[g, x], G.inv])
        seen[orbit] = True
        classes.append([int(v) for v in orbit])
    return classes


def subgroup_closure(G: GroupTable, elements: Sequence[int]) -> tuple[int, ...]:
    """Smallest subgroup containing the given nonempty set of elements."""
    A = normalize_subset(G, elements)
    cur = np.unique(np.array(A, dtype=np.int64))
    while True:
        prod = np.unique(G.mul[np.ix_(cur, cur)])
        nxt = np.union1d(cur, prod)
        if len(nxt) == len(cur):
            return tuple(int(v) for v in cur)
        cur = nxt


def normalize_subset(G: GroupTable, elements: Sequence[int]) -> tuple[int, ...]:
    """Sorted duplicate-free tuple of element indices, validated against G."""
    elems = sorted({int(x) for x in elements})
    if not elems:
        raise UnsupportedParameter("subset must be nonempty")
    if elems[0] < 0 or elems[-1] >= G.n:
        raise UnsupportedParameter(f"subset element out of range for group of order {G.n}")
    return tuple(elems)


_Z_RE = re.compile(r"^Z(\d+)$")
_ZPROD_RE = re.compile(r"^Z\d+(?:xZ\d+)+$")
_D_RE = re.compile(r"^D(\d+)$")
_S_RE = re.compile(r"^S(\d+)$")
_PSL_RE = re.compile(r"^PSL2-(\d+)$")


def group_from_spec(spec: str) -> GroupTable:
    """Build a group from a spec string.

    Grammar: "Z<n>", "Z<a>xZ<b>[x...]", "D<m>" (order 2m), "S<m>",
    "PSL2-<q>", or "file:<path>".
    """
    spec = spec.strip()
    if spec.startswith("file:"):
        return from_table(spec[len("file:"):])
    m = _Z_RE.match(spec)
    if m:
        return make_cyclic(int(m.group(1)))
    if _ZPROD_RE.match(spec):
        orders = [int(part[1:]) for part in spec.split("x")]
        return make_product([make_cyclic(o) for o in orders])
    m = _D_RE.match(spec)
    if m:
        return make_dihedral(int(m.group(1)))
    m = _S_RE.match(spec)
    if m:
        return make_symmetric(int(m.group(1)))
    m = _PSL_RE.match(spec)
    if m:
        return make_psl2(int(m.group(1)))
    raise ParseError(
        f"unrecognized group spec {spec!r}; expected Z<n>, Z<a>xZ<b>, D<m>, "
        f"S<m>, PSL2-<q>, or file:<path>"
    )
