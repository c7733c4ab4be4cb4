"""Quadratic invariants of the conifold fibre at t = 1."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ._arith import fundamental_discriminant, kronecker
from .gamma import GammaVector, m0

__all__ = [
    "QuadInvariants",
    "disc_field",
    "disc_radicand",
    "quad_invariants",
    "sigma",
    "sign_rule",
    "twist_disc",
    "twist_radicand",
]


def _as_gamma(g) -> GammaVector:
    return g if isinstance(g, GammaVector) else GammaVector(g)


def disc_radicand(g) -> int:
    """-(-1)^(d/2) * prod(g), with d = l - 2."""
    g = _as_gamma(g)
    if len(g) % 2:
        raise ValueError(f"odd length {len(g)}: no ordinary double point quadric of even dimension")
    return -((-1) ** (g.d // 2)) * g.product()


def disc_field(g) -> int:
    return fundamental_discriminant(disc_radicand(g))


def twist_radicand(g, t=1) -> Fraction:
    """(-1)^(l_o/2) * M0 * t."""
    g = _as_gamma(g)
    return (-1) ** (g.l_o // 2) * m0(g) * Fraction(t)


def twist_disc(g) -> int:
    return fundamental_discriminant(twist_radicand(g))


def sign_rule(g) -> int:
    """(-1)^(r(r-1)/2), r = #negative - #positive entries."""
    r = _as_gamma(g).r
    return (-1) ** ((r * (r - 1) // 2) % 2)


def sigma(D: int, p: int) -> int:
    return kronecker(D, p)


@dataclass(frozen=True)
class QuadInvariants:
    D: int
    E: int
    r: int


def quad_invariants(g) -> QuadInvariants:
    g = _as_gamma(g)
    return QuadInvariants(disc_field(g), twist_disc(g), g.r)
