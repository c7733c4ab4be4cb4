"""Hypergeometric parameters (alpha, beta) and their cyclotomic profiles.

Entries are kept as reduced Fractions in [0, 1) and each multiset is stored
sorted, so two parameter objects compare equal exactly when their multisets
agree.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from ._arith import as_fraction, euler_phi

__all__ = [
    "CYCLOTOMIC_INDICES",
    "CycloProfile",
    "HGParams",
    "NotRationalError",
    "galois_orbit",
    "is_defined_over_Q",
    "is_irreducible",
    "is_mum",
    "total_twist_params",
]

# Cyclotomic indices n with phi(n) <= 4.
CYCLOTOMIC_INDICES = (1, 2, 3, 4, 5, 6, 8, 10, 12)


class NotRationalError(ValueError):
    """Raised when a parameter multiset is not a union of full Galois orbits."""


def _mod1(x) -> Fraction:
    x = as_fraction(x)
    return x - (x.numerator // x.denominator)


def galois_orbit(n: int) -> tuple[Fraction, ...]:
    """The exponents k/n (0 <= k < n, gcd(k, n) = 1) of the roots of Phi_n."""
    if n == 1:
        return (Fraction(0),)
    return tuple(Fraction(k, n) for k in range(1, n) if gcd(k, n) == 1)


@dataclass(frozen=True)
class HGParams:
    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]

    def __init__(self, alpha: Iterable, beta: Iterable):
        a = tuple(sorted(as_fraction(x) for x in alpha))
        b = tuple(sorted(as_fraction(x) for x in beta))
        if len(a) != len(b):
            raise ValueError(f"|alpha| = {len(a)} differs from |beta| = {len(b)}")
        if not a:
            raise ValueError("empty parameter multisets")
        for x in a + b:
            if not 0 <= x < 1:
                raise ValueError(f"parameter {x} not in [0, 1)")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def rank(self) -> int:
        return len(self.alpha)

    def swap(self) -> "HGParams":
        """Exchange alpha and beta (pullback along t -> 1/t)."""
        return HGParams(self.beta, self.alpha)

    def unordered_key(self) -> tuple:
        return tuple(sorted([self.alpha, self.beta]))

    def equivalent(self, other: "HGParams") -> bool:
        return self.unordered_key() == other.unordered_key()

    def profile(self) -> "CycloProfile":
        return CycloProfile.from_params(self)

    def to_json(self) -> dict:
        return {"alpha": [_frac_str(x) for x in self.alpha],
                "beta": [_frac_str(x) for x in self.beta]}

    @classmethod
    def from_json(cls, data: dict) -> "HGParams":
        return cls(data["alpha"], data["beta"])

    def __str__(self) -> str:
        a = ", ".join(str(x) for x in self.alpha)
        b = ", ".join(str(x) for x in self.beta)
        return f"alpha=({a}) beta=({b})"


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _orders(entries: Sequence[Fraction]) -> tuple[int, ...]:
    """Group entries into Galois orbits; raise if some orbit is incomplete."""
    left = Counter(entries)
    out: list[int] = []
    for x in sorted(left, key=lambda f: (f.denominator, f.numerator)):
        while left[x] > 0:
            n = x.denominator
            orbit = galois_orbit(n)
            if any(left[y] <= 0 for y in orbit):
                raise NotRationalError(f"incomplete Galois orbit of {x}")
            for y in orbit:
                left[y] -= 1
            out.append(n)
    return tuple(sorted(out))


@dataclass(frozen=True)
class CycloProfile:
    """Cyclotomic indices of q_inf (numerator) and q_0 (denominator), with multiplicity."""

    numerator_orders: tuple[int, ...]
    denominator_orders: tuple[int, ...]

    def __post_init__(self):
        na = sum(euler_phi(n) for n in self.numerator_orders)
        nb = sum(euler_phi(n) for n in self.denominator_orders)
        if na != nb:
            raise ValueError(f"degree mismatch {na} != {nb}")
        object.__setattr__(self, "numerator_orders", tuple(sorted(self.numerator_orders)))
        object.__setattr__(self, "denominator_orders", tuple(sorted(self.denominator_orders)))

    @property
    def rank(self) -> int:
        return sum(euler_phi(n) for n in self.numerator_orders)

    @property
    def is_irreducible(self) -> bool:
        return not set(self.numerator_orders) & set(self.denominator_orders)

    @classmethod
    def from_params(cls, p: HGParams) -> "CycloProfile":
        return cls(_orders(p.alpha), _orders(p.beta))

    def to_params(self) -> HGParams:
        a = [x for n in self.numerator_orders for x in galois_orbit(n)]
        b = [x for n in self.denominator_orders for x in galois_orbit(n)]
        return HGParams(a, b)


def is_defined_over_Q(p: HGParams) -> bool:
    try:
        CycloProfile.from_params(p)
    except NotRationalError:
        return False
    return True


def is_irreducible(p: HGParams) -> bool:
    # entries live in [0, 1), so equality mod Z is plain equality
    return not set(p.alpha) & set(p.beta)


def total_twist_params(p: HGParams) -> HGParams:
    half = Fraction(1, 2)
    return HGParams([_mod1(x + half) for x in p.alpha], [_mod1(x + half) for x in p.beta])


def is_mum(p: HGParams) -> bool:
    """MUM at 0 or, after exchanging alpha and beta, at infinity."""
    return all(x == 0 for x in p.beta) or all(x == 0 for x in p.alpha)
