"""Hessian of the fiber over t = 1 at its double point.

In the chart F(x) = sum_j g_j x^{m_j}, the point x = (1, ..., 1) is z = g in
homogeneous coordinates, which lies on the fiber over t = 1 and is singular
there. The Hessian is M diag(g) M^T; its determinant is compared with
-prod(g) up to a rational square.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, prod
from typing import Iterable

import mpmath
from sympy import Matrix

from ..gamma import GammaVector
from .lattice import build_m_kappa

__all__ = ["HessianDegenerateError", "HessianWitness", "exact_hessian", "hessian_check", "is_rational_square"]

MAX_DIM = 12
CONDITION_LIMIT = mpmath.mpf(10) ** 12
RESIDUAL_LIMIT = mpmath.mpf(10) ** -20


class HessianDegenerateError(ArithmeticError):
    pass


def is_rational_square(x: Fraction) -> bool:
    if x <= 0:
        return False
    n, d = x.numerator, x.denominator
    return isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def exact_hessian(g: Iterable[int], M: list[list[int]] | None = None) -> list[list[int]]:
    g = list(GammaVector(g))
    if M is None:
        M, _ = build_m_kappa(g)
    H = Matrix(M) * Matrix.diag(*g) * Matrix(M).T
    return [[int(x) for x in H.row(i)] for i in range(H.rows)]


@dataclass(frozen=True)
class HessianWitness:
    gamma: tuple[int, ...]
    hessian: tuple[tuple[int, ...], ...]
    det: int
    ratio: Fraction
    numeric_det: str
    residual: float

    @property
    def ok(self) -> bool:
        return is_rational_square(self.ratio)

    def to_json(self) -> dict:
        return {"gamma": list(self.gamma), "det": self.det, "ratio": str(self.ratio),
                "square": self.ok, "numeric_det": self.numeric_det, "residual": self.residual}


def _numeric_hessian(g, M, dps: int):
    d = len(M)
    cols = [[M[i][j] for i in range(d)] for j in range(len(g))]

    def F(*x):
        return mpmath.fsum(gj * mpmath.fprod(xi ** e for xi, e in zip(x, col)) for gj, col in zip(g, cols))

    pt = [mpmath.mpf(1)] * d
    H = mpmath.matrix(d, d)
    for i in range(d):
        for k in range(i, d):
            orders = [0] * d
            orders[i] += 1
            orders[k] += 1
            H[i, k] = H[k, i] = mpmath.diff(F, pt, tuple(orders))
    return H


def hessian_check(g: Iterable[int], dps: int = 40) -> HessianWitness:
    """det(H) / (-prod g) at the double point, reconstructed from numerics and checked exactly."""
    g = list(GammaVector(g))
    M, _ = build_m_kappa(g)
    d = len(M)
    if d > MAX_DIM:
        raise ValueError(f"ambient dimension {d} exceeds {MAX_DIM}")
    dps = max(dps, 30)
    target = -prod(g)
    with mpmath.workdps(dps):
        H = _numeric_hessian(g, M, dps)
        det = mpmath.det(H)
        if det == 0:
            raise HessianDegenerateError("singular Hessian")
        cond = mpmath.mnorm(H, 1) * mpmath.mnorm(H ** -1, 1)
        if cond > CONDITION_LIMIT:
            raise HessianDegenerateError(f"condition number {mpmath.nstr(cond, 5)} too large")
        ratio_num = det / target
        ratio = Fraction(mpmath.nstr(ratio_num, dps - 5)).limit_denominator(10 ** 12)
        residual = abs(ratio_num - mpmath.mpf(ratio.numerator) / ratio.denominator)
        if residual > RESIDUAL_LIMIT:
            raise HessianDegenerateError(f"reconstruction residual {mpmath.nstr(residual, 3)}")
        numeric = mpmath.nstr(det, 25)
    exact = exact_hessian(g, M)
    det_exact = int(Matrix(exact).det())
    if Fraction(det_exact, target) != ratio:
        raise HessianDegenerateError(f"numeric ratio {ratio} disagrees with exact {Fraction(det_exact, target)}")
    if not is_rational_square(ratio):
        raise HessianDegenerateError(f"det(H) / (-prod g) = {ratio} is not a square")
    return HessianWitness(tuple(g), tuple(tuple(r) for r in exact), det_exact, ratio, numeric, float(residual))
