"""Small exact number-theory helpers shared across the package."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Sequence

from sympy import factorint, primerange
from sympy.functions.combinatorial.numbers import jacobi_symbol, mobius, totient
from sympy.ntheory import primitive_root

__all__ = [
    "as_fraction",
    "bezout",
    "euler_phi",
    "fundamental_discriminant",
    "is_square_rational",
    "kronecker",
    "mobius",
    "mod_p",
    "primes_upto",
    "squarefree_kernel",
]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip().replace("−", "-"))
    return Fraction(x)


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    return int(totient(n))


def primes_upto(bound: int) -> list[int]:
    return [int(p) for p in primerange(2, bound + 1)]


def squarefree_kernel(n: int) -> int:
    """Signed squarefree part of a nonzero integer: n = kernel * square."""
    if n == 0:
        raise ValueError("squarefree kernel of 0 is undefined")
    sign = -1 if n < 0 else 1
    k = 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            k *= p
    return sign * k


def fundamental_discriminant(x) -> int:
    """Discriminant of Q(sqrt(x)) for a nonzero rational x; 1 when x is a square."""
    x = as_fraction(x)
    if x == 0:
        raise ValueError("zero radicand")
    m = squarefree_kernel(x.numerator * x.denominator)
    if m == 1:
        return 1
    return m if m % 4 == 1 else 4 * m


def is_square_rational(x) -> bool:
    x = as_fraction(x)
    if x < 0:
        return False
    n, d = x.numerator, x.denominator
    return isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D | n) for n a positive prime (or any positive n)."""
    if n <= 0:
        raise ValueError("kronecker symbol needs n > 0")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        result *= 1 if D % 8 in (1, 7) else -1
    if n == 1:
        return result
    if gcd(D, n) != 1:
        return 0
    return result * int(jacobi_symbol(D % n, n))


def mod_p(x, p: int) -> int:
    """Reduce a rational with denominator prime to p into Z/p."""
    x = as_fraction(x)
    if x.denominator % p == 0:
        raise ZeroDivisionError(f"denominator of {x} not invertible mod {p}")
    return x.numerator * pow(x.denominator, -1, p) % p


def bezout(values: Sequence[int]) -> list[int]:
    """Integers a_i with sum(a_i * v_i) = gcd(values)."""
    coeffs = [0] * len(values)
    if not values:
        return coeffs
    g, coeffs[0] = values[0], 1
    if g < 0:
        g, coeffs[0] = -g, -1
    for i in range(1, len(values)):
        v = values[i]
        # extended Euclid on (g, v)
        old_r, r = g, v
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coeffs = [c * old_s for c in coeffs[:i]] + [old_t] + coeffs[i + 1:]
        g = old_r
    return coeffs


def generator_mod(p: int) -> int:
    return int(primitive_root(p))


def gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g
