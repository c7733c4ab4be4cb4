"""Integer lattice helpers: kernels of a gamma vector, M-matrices and kappa-vectors."""

from __future__ import annotations

from typing import Sequence

from sympy import Matrix, ZZ
from sympy.polys.matrices import DomainMatrix

from .._arith import bezout, gcd_all

__all__ = [
    "GcdNotOneError",
    "build_m_kappa",
    "complete_to_unimodular",
    "is_saturated_kernel_basis",
    "kernel_basis",
    "lll_rows",
]


class GcdNotOneError(ValueError):
    """The entries share a factor; use the gcd cover construction instead."""


def _column_reduce(v: Sequence[int]) -> tuple[int, list[list[int]]]:
    """Unimodular V with v . V = (g, 0, ..., 0); returns g and V (rows of a list)."""
    n = len(v)
    row = list(v)
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(dst, src, k):
        # column dst -= k * column src
        row[dst] -= k * row[src]
        for r in V:
            r[dst] -= k * r[src]

    def swap(a, b):
        row[a], row[b] = row[b], row[a]
        for r in V:
            r[a], r[b] = r[b], r[a]

    while True:
        nz = [i for i in range(n) if row[i]]
        if len(nz) <= 1:
            break
        piv = min(nz, key=lambda i: abs(row[i]))
        for i in nz:
            if i != piv:
                colop(i, piv, row[i] // row[piv])
    nz = [i for i in range(n) if row[i]]
    if nz and nz[0] != 0:
        swap(0, nz[0])
    if row[0] < 0:
        row[0] = -row[0]
        for r in V:
            r[0] = -r[0]
    return row[0], V


def kernel_basis(v: Sequence[int]) -> list[list[int]]:
    """A basis (as rows) of the saturated lattice {x in Z^n : v . x = 0}."""
    _, V = _column_reduce(v)
    n = len(v)
    return [[V[i][j] for i in range(n)] for j in range(1, n)]


def complete_to_unimodular(c: Sequence[int]) -> list[list[int]]:
    """A unimodular integer matrix whose first row is the primitive vector c."""
    g, W = _column_reduce(c)
    if g != 1:
        raise ValueError(f"{list(c)} is not primitive")
    inv = Matrix(W).inv()
    return [[int(x) for x in inv.row(i)] for i in range(len(c))]


def lll_rows(rows: list[list[int]]) -> list[list[int]]:
    if not rows:
        return rows
    dm = DomainMatrix([[ZZ(x) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    red = dm.lll()
    return [[int(x) for x in r] for r in red.to_Matrix().tolist()]


def _solve_in_basis(basis: list[list[int]], target: Sequence[int]) -> list[int]:
    B = Matrix(basis).T
    sol = B.pinv() * Matrix(list(target)) if B.shape[0] != B.shape[1] else B.inv() * Matrix(list(target))
    out = [int(x) for x in sol]
    if list(B * Matrix(out)) != list(target):
        raise ArithmeticError("target not in the lattice")
    return out


def _reduce_mod_e(rows: list[list[int]]) -> list[list[int]]:
    """Shift each row by a multiple of e towards small entries (span with e unchanged)."""
    out = []
    for r in rows:
        vals = sorted(r)
        shift = vals[len(vals) // 2]
        out.append([x - shift for x in r])
    return out


def build_m_kappa(g: Sequence[int], reduce: bool = True) -> tuple[list[list[int]], list[int]]:
    """An M-matrix (d x l) and kappa-vector for a gamma vector with coprime entries.

    Rows of M together with e = (1, ..., 1) form a basis of ker(g); kappa . g = 1.
    """
    g = [int(x) for x in g]
    if gcd_all(g) != 1:
        raise GcdNotOneError(f"entries of {g} have gcd {gcd_all(g)}")
    l = len(g)
    K = kernel_basis(g)
    e = [1] * l
    c = _solve_in_basis(K, e)
    U = complete_to_unimodular(c)
    rows = [[sum(U[i][k] * K[k][j] for k in range(l - 1)) for j in range(l)] for i in range(l - 1)]
    M = rows[1:]
    if reduce and M:
        M = _reduce_mod_e(lll_rows(M))
    kappa = _small_kappa(g)
    return M, kappa


def _small_kappa(g: Sequence[int]) -> list[int]:
    for target in (1, -1):
        for j, x in enumerate(g):
            if x == target:
                k = [0] * len(g)
                k[j] = target
                return k
    return bezout(list(g))


def is_saturated_kernel_basis(M: list[list[int]], g: Sequence[int]) -> bool:
    """Rows of M plus e span ker(g) exactly (checked via the gcd of maximal minors)."""
    l = len(g)
    if any(sum(a * b for a, b in zip(r, g)) for r in M):
        return False
    A = Matrix(M + [[1] * l])
    if A.rank() != l - 1:
        return False
    # the rows span a saturated sublattice iff the maximal minors are coprime;
    # it lies in ker(g) of rank l - 1, and a saturated rank-(l-1) sublattice equals it
    return _minors_gcd(A) == 1


def _minors_gcd(A: Matrix) -> int:
    # Smith normal form: product of invariant factors is the gcd of maximal minors
    from sympy.matrices.normalforms import smith_normal_form

    S = smith_normal_form(A, domain=ZZ)
    prod = 1
    for i in range(min(S.shape)):
        prod *= int(S[i, i])
    return abs(prod)
