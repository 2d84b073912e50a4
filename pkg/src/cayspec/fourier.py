"""Group Fourier analysis through the regular representation.

Everything here avoids explicit irreducible representations: the convolution
operator of a weight function block-diagonalizes over the isotypic components
of the regular representation, so operator norms, degree sums, and Parseval
identities are all readable off n-by-n matrices built from the multiplication
table.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InconsistentSamples, NoConvergence, NotAbelian, SizeCap
from .groups import GroupTable, conjugacy_classes, normalize_subset

_DENSE_LIMIT = 512


class ConvolutionOperator:
    """Right-convolution by a weight vector w: (T psi)(x) = sum_y w(y^-1 x) psi(y).

    Constants are always invariant: T 1 = (sum w) 1. When w(x^-1) = conj(w(x))
    the operator is Hermitian.
    """

    def __init__(self, G: GroupTable, weights: np.ndarray):
        if len(weights) != G.n:
            raise ValueError("weight vector length must equal the group order")
        self.G = G
        self.weights = np.asarray(weights)

    def dense(self) -> np.ndarray:
        # T[x, y] = w(y^-1 x); row y of mul[inv] lists y^-1 x over x
        idx = self.G.mul[self.G.inv, :]
        return self.weights[idx].T

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros(self.G.n, dtype=np.result_type(self.weights, psi))
        support = np.flatnonzero(self.weights)
        for a in support:
            # (psi * w)(x) picks up w(a) from y = x a^-1
            out += self.weights[a] * psi[self.G.mul[:, self.G.inv[a]]]
        return out

    def apply_adjoint(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros(self.G.n, dtype=np.result_type(self.weights, psi))
        support = np.flatnonzero(self.weights)
        for a in support:
            out += np.conj(self.weights[a]) * psi[self.G.mul[:, a]]
        return out


@dataclass
class FourierReport:
    """Result of a largest-nontrivial-Fourier-coefficient computation."""

    nu: float
    method: str
    iterations: int
    residual: float


def fourier_norm(
    G: GroupTable,
    subset: Sequence[int],
    tol: float = 1e-9,
    method: str = "auto",
    seed: int = 0,
) -> FourierReport:
    """Largest spectral norm of the indicator's Fourier transform over
    nontrivial irreducible representations.

    Computed as the top singular value of T - (|A|/n) J, where T is the
    convolution operator of the indicator of the subset and J is the all-ones
    matrix: deflating the trivial isotypic component leaves every nontrivial
    block, each of which appears in the regular representation.
    """
    A = normalize_subset(G, subset)
    n, m = G.n, len(A)
    if method == "auto":
        method = "dense" if n <= _DENSE_LIMIT else "power"
    if method == "dense":
        w = np.zeros(n)
        w[list(A)] = 1.0
        M = ConvolutionOperator(G, w).dense() - (m / n)
        sv = np.linalg.svd(M, compute_uv=False)
        return FourierReport(nu=float(sv[0]), method="regular", iterations=0, residual=0.0)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")

    inv_cols = [G.mul[:, G.inv[a]] for a in A]
    fwd_cols = [G.mul[:, a] for a in A]

    def apply_M(v: np.ndarray) -> np.ndarray:
        out = -(m / n) * v.sum() * np.ones(n)
        for col in inv_cols:
            out += v[col]
        return out

    def apply_Mt(v: np.ndarray) -> np.ndarray:
        out = -(m / n) * v.sum() * np.ones(n)
        for col in fwd_cols:
            out += v[col]
        return out

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    cap = 10 * n
    theta = 0.0
    resid = math.inf
    for it in range(1, cap + 1):
        u = apply_Mt(apply_M(v))
        theta = float(v @ u)
        resid = float(np.linalg.norm(u - theta * v))
        rel = resid / max(theta, 1e-300)
        if theta <= n * 1e-24 or rel <= tol:
            return FourierReport(
                nu=math.sqrt(max(theta, 0.0)), method="regular", iterations=it, residual=rel
            )
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            return FourierReport(nu=0.0, method="regular", iterations=it, residual=0.0)
        v = u / nrm
    raise NoConvergence(
        f"power iteration did not reach tol={tol} in {cap} iterations",
        residual=resid / max(theta, 1e-300),
        iterations=cap,
    )


def abelian_characters(G: GroupTable) -> np.ndarray:
    """All n characters of an abelian group as an (n, n) complex array.

    Built by extending characters subgroup-by-subgroup: adjoining a generator g
    with g^r the first power landing in the current subgroup multiplies the
    character count by r, choosing each r-th root for the value at g.
    """
    if not G.is_abelian():
        raise NotAbelian(f"{G.name} is not abelian")
    n = G.n
    members: dict[int, int] = {0: 0}          # element -> position in value rows
    elems: list[int] = [0]
    chars: list[list[complex]] = [[1.0 + 0.0j]]
    for g in range(n):
        if g in members:
            continue
        # order of g relative to the current subgroup
        r = 1
        p = g
        while p not in members:
            r += 1
            p = G.mul[p, g]
        base_pos = members[p]
        powers = [0] * r                       # g^0 .. g^(r-1)
        q = 0
        for t in range(1, r):
            q = int(G.mul[q, g])
            powers[t] = q
        new_elems = list(elems)
        new_members = dict(members)
        for t in range(1, r):
            for h in elems:
                gh = int(G.mul[powers[t], h])
                new_members[gh] = len(new_elems)
                new_elems.append(gh)
        new_chars: list[list[complex]] = []
        for row in chars:
            w = row[base_pos]
            ang = cmath.phase(w)
            for t_root in range(r):
                zeta = cmath.exp(1j * (ang + 2 * math.pi * t_root) / r)
                ext = list(row)
                for t in range(1, r):
                    zt = zeta**t
                    ext.extend(zt * row[members[h_pos]] for h_pos in elems)
                new_chars.append(ext)
        # re-index: ext above was built in new_elems order already
        elems = new_elems
        members = new_members
        chars = new_chars
        if len(elems) == n:
            break
    table = np.empty((n, n), dtype=np.complex128)
    for ci, row in enumerate(chars):
        for pos, e in enumerate(elems):
            table[ci, e] = row[pos]
    return table


def fourier_norm_abelian(G: GroupTable, subset: Sequence[int]) -> float:
    """Max over nontrivial characters of |sum over the subset| for abelian groups.

    Uses a multidimensional DFT when the group carries an explicit cyclic
    factorization, and the generic character table otherwise.
    """
    if not G.is_abelian():
        raise NotAbelian(f"{G.name} is not abelian")
    A = normalize_subset(G, subset)
    n = G.n
    if n == 1:
        return 0.0
    ind = np.zeros(n)
    ind[list(A)] = 1.0
    if G.cyclic_factors:
        spec = np.fft.fftn(ind.reshape(G.cyclic_factors))
        mags = np.abs(spec).ravel()
        mags[0] = -1.0                       # trivial character sits at frequency 0
        return float(mags.max())
    table = abelian_characters(G)
    sums = table @ ind
    trivial = np.flatnonzero(np.all(np.abs(table - 1.0) < 1e-9, axis=1))
    mags = np.abs(sums)
    mags[trivial] = -1.0
    return float(mags.max())


@dataclass
class DegreeSumReport:
    """Sum of irreducible degrees with supporting evidence."""

    dsum: int
    classes: int
    degree_vector: tuple[int, ...] | None
    sample_counts: tuple[int, ...]


def _distinct_eigenvalue_count(eigs: np.ndarray, scale: float) -> int:
    tau = 1e-6 * max(scale, 1.0)
    eigs = np.sort(eigs)
    return 1 + int(np.count_nonzero(np.diff(eigs) > tau))


def _degree_vector(classes: int, total: int, sum_sq: int) -> tuple[int, ...] | None:
    """Non-increasing positive integers with the given count, sum, and sum of squares."""

    def rec(parts: int, s: int, q: int, dmax: int) -> list[int] | None:
        if parts == 0:
            return [] if (s == 0 and q == 0) else None
        hi = min(dmax, s - (parts - 1), math.isqrt(max(q - (parts - 1), 0)))
        for d in range(hi, 0, -1):
            rest = rec(parts - 1, s - d, q - d * d, d)
            if rest is not None:
                return [d] + rest
        return None

    out = rec(classes, total, sum_sq, total)
    return tuple(out) if out is not None else None


def degree_sum(G: GroupTable, seed: int = 0, draws: int = 3) -> DegreeSumReport:
    """Sum of the degrees of the complex irreducible representations.

    For abelian groups this is the order. Otherwise it is the number of
    distinct eigenvalues of the convolution operator of a random
    Hermitian-symmetric complex weight vector: each irreducible of degree d
    generically contributes d distinct eigenvalues (each of multiplicity d).
    The maximum count over independent draws is cross-checked against the
    existence of a feasible degree vector.
    """
    n = G.n
    c = len(conjugacy_classes(G))
    if G.is_abelian():
        return DegreeSumReport(dsum=n, classes=c, degree_vector=(1,) * n, sample_counts=())
    if n > _DENSE_LIMIT:
        raise SizeCap(f"degree sum needs a dense eigensolve; order {n} > {_DENSE_LIMIT}")
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(draws):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = (z + np.conj(z[G.inv])) / 2.0       # enforces w(x^-1) = conj(w(x))
        T = ConvolutionOperator(G, w).dense()
        eigs = np.linalg.eigvalsh(T)
        counts.append(_distinct_eigenvalue_count(eigs, float(np.abs(eigs).max())))
    D = max(counts)
    vec = _degree_vector(c, D, n)
    if vec is None or not (math.isqrt(n - 1) + 1 <= D <= n):
        raise InconsistentSamples(
            f"distinct-eigenvalue counts {counts} admit no degree vector with "
            f"{c} classes, sum {D}, sum of squares {n}"
        )
    return DegreeSumReport(dsum=D, classes=c, degree_vector=vec, sample_counts=tuple(counts))


def parseval_defect(G: GroupTable, phi: np.ndarray, psi: np.ndarray) -> float:
    """|<phi, psi> - (1/n) tr(T_phi T_psi^*)|.

    The trace form is the Fourier-side inner product summed over the regular
    representation, where each irreducible block appears with multiplicity
    equal to its degree.
    """
    phi = np.asarray(phi, dtype=np.complex128)
    psi = np.asarray(psi, dtype=np.complex128)
    lhs = complex(np.sum(phi * np.conj(psi)))
    Tp = ConvolutionOperator(G, phi).dense()
    Tq = ConvolutionOperator(G, psi).dense()
    rhs = complex(np.sum(Tp * np.conj(Tq))) / G.n
    return abs(lhs - rhs)
