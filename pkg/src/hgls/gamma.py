"""Gamma vectors.

A gamma vector encodes the family parameter as
``Q(x) = prod_i (x^|g_i| - 1)^(-sign g_i)``: negative entries carry the
numerator q_inf (the alpha side), positive ones the denominator q_0.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from sympy import divisors

from ._arith import gcd_all, mobius
from .params import CycloProfile, HGParams

__all__ = [
    "GammaVector",
    "NotAGammaVector",
    "ReducedGammaVector",
    "Splitting",
    "format_gamma",
    "gamma_from_params",
    "m0",
    "params_from_gamma",
    "parse_gamma",
    "reduce",
    "splittings",
    "total_twist_gamma",
]


class NotAGammaVector(ValueError):
    pass


def _pairs_exhaust(entries: Sequence[int]) -> bool:
    c = Counter(entries)
    return all(c[n] == c[-n] for n in c)


class GammaVector(tuple):
    """Weakly increasing tuple of nonzero integers with zero sum."""

    def __new__(cls, entries: Iterable[int]):
        ent = sorted(int(x) for x in entries)
        if not ent:
            raise NotAGammaVector("empty vector")
        if any(x == 0 for x in ent):
            raise NotAGammaVector(f"zero entry in {ent}")
        if sum(ent) != 0:
            raise NotAGammaVector(f"entries of {ent} do not sum to zero")
        if _pairs_exhaust(ent):
            raise NotAGammaVector(f"{ent} is exhausted by (-n, n) pairs")
        return super().__new__(cls, ent)

    @property
    def length(self) -> int:
        return len(self)

    @property
    def d(self) -> int:
        return len(self) - 2

    @property
    def l_o(self) -> int:
        return sum(1 for x in self if x % 2)

    @property
    def L_o(self) -> int:
        return sum(x for x in self if x % 2)

    @property
    def L_e(self) -> int:
        return sum(x for x in self if x % 2 == 0)

    @property
    def gcd(self) -> int:
        return gcd_all(self)

    @property
    def r(self) -> int:
        """#negative entries minus #positive entries."""
        return sum(1 for x in self if x < 0) - sum(1 for x in self if x > 0)

    @property
    def is_reduced(self) -> bool:
        s = set(self)
        return not any(-x in s for x in s)

    def product(self) -> int:
        out = 1
        for x in self:
            out *= x
        return out

    def with_pair(self, n: int) -> "GammaVector":
        return GammaVector(list(self) + [-abs(n), abs(n)])

    def divided(self) -> "GammaVector":
        g = self.gcd
        return GammaVector(x // g for x in self)

    def to_json(self) -> list[int]:
        return list(self)

    def display(self) -> str:
        return format_gamma(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self)})"


class ReducedGammaVector(GammaVector):
    """A gamma vector with no two entries summing to zero."""

    def __new__(cls, entries: Iterable[int]):
        self = super().__new__(cls, entries)
        if not self.is_reduced:
            raise NotAGammaVector(f"{list(self)} is not reduced")
        return self


def reduce(entries: Iterable[int]) -> ReducedGammaVector:
    """Cancel (-n, n) pairs until none is left."""
    ent = [int(x) for x in entries]
    if any(x == 0 for x in ent) or sum(ent) != 0:
        raise NotAGammaVector(f"{ent} is not a zero-sum vector of nonzero integers")
    c = Counter(ent)
    out: list[int] = []
    for n in sorted(set(abs(x) for x in ent)):
        k = c[n] - c[-n]
        out += [n if k > 0 else -n] * abs(k)
    if not out:
        raise NotAGammaVector(f"{sorted(ent)} cancels completely")
    return ReducedGammaVector(out)


def gamma_from_params(p: HGParams) -> ReducedGammaVector:
    """The reduced gamma vector of a rational parameter pair (Moebius inversion)."""
    prof = CycloProfile.from_params(p)  # raises NotRationalError
    exps: Counter[int] = Counter()
    for n in prof.numerator_orders:
        exps[n] += 1
    for n in prof.denominator_orders:
        exps[n] -= 1
    # Phi_n = prod_{d | n} (x^d - 1)^mu(n/d)
    c: Counter[int] = Counter()
    for n, e in exps.items():
        if e:
            for d in divisors(n):
                c[int(d)] += e * int(mobius(n // d))
    out: list[int] = []
    for d, e in c.items():
        out += [-d if e > 0 else d] * abs(e)
    return ReducedGammaVector(out)


def params_from_gamma(g: Iterable[int]) -> HGParams:
    ent = list(g)
    e: Counter[int] = Counter()
    for x in ent:
        for d in divisors(abs(x)):
            e[int(d)] += -1 if x > 0 else 1
    num = [n for n, k in e.items() if k > 0 for _ in range(k)]
    den = [n for n, k in e.items() if k < 0 for _ in range(-k)]
    return CycloProfile(tuple(num), tuple(den)).to_params()


def total_twist_gamma(g: Iterable[int]) -> GammaVector:
    out: list[int] = []
    for x in g:
        if x % 2:
            out += [2 * x, -x]
        else:
            out.append(x)
    return GammaVector(out)


def m0(g: Iterable[int]) -> Fraction:
    """prod_j g_j^g_j as an exact rational."""
    out = Fraction(1)
    for x in g:
        out *= Fraction(x) ** x
    return out


_TOKEN = re.compile(r"^([+-]?\d+)(?:\^(\d+))?$")


def parse_gamma(text: str) -> GammaVector:
    """Parse "-2^4 1^8", "(-2^4, 1^8)" or "[-2,-2,1,1,1,1]"."""
    s = text.replace("−", "-").strip().strip("()[]")
    out: list[int] = []
    for tok in re.split(r"[,\s]+", s):
        if not tok:
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad gamma token {tok!r}")
        out += [int(m.group(1))] * int(m.group(2) or 1)
    return GammaVector(out)


def format_gamma(g: Iterable[int]) -> str:
    c = Counter(g)
    parts = []
    for x in sorted(c):
        parts.append(f"{x}^{c[x]}" if c[x] > 1 else str(x))
    return " ".join(parts)


@dataclass(frozen=True)
class Splitting:
    parts: tuple[GammaVector, ...]

    @property
    def gcds(self) -> tuple[int, ...]:
        return tuple(p.gcd for p in self.parts)

    @property
    def coprime(self) -> bool:
        return all(d == 1 for d in self.gcds)

    @property
    def s(self) -> int:
        return len(self.parts)

    def __str__(self) -> str:
        return " | ".join(f"({', '.join(map(str, p))})" for p in self.parts)


def _valid_part(entries: Sequence[int]) -> bool:
    return bool(entries) and sum(entries) == 0 and not _pairs_exhaust(entries)


def _sub_multisets(counts: dict[int, int], first: int):
    """Sub-multisets of ``counts`` containing at least one copy of ``first``."""
    keys = sorted(counts)
    ranges = [range(1 if k == first else 0, counts[k] + 1) for k in keys]
    for choice in product(*ranges):
        yield {k: c for k, c in zip(keys, choice) if c}


def _partitions(counts: dict[int, int]):
    if not counts:
        yield ()
        return
    first = min(counts)
    for sub in _sub_multisets(counts, first):
        part = [k for k, c in sorted(sub.items()) for _ in range(c)]
        if not _valid_part(part):
            continue
        rest = {k: counts[k] - sub.get(k, 0) for k in counts if counts[k] - sub.get(k, 0)}
        if rest and sum(k * c for k, c in rest.items()) != 0:
            continue
        for tail in _partitions(rest):
            yield (tuple(part),) + tail


def splittings(g: Iterable[int], min_parts: int = 2, max_parts: int | None = None) -> list[Splitting]:
    """All partitions of the entries into >= ``min_parts`` gamma vectors."""
    counts = dict(Counter(int(x) for x in g))
    seen: set[tuple] = set()
    out: list[Splitting] = []
    for parts in _partitions(counts):
        if len(parts) < min_parts or (max_parts is not None and len(parts) > max_parts):
            continue
        key = tuple(sorted(parts))
        if key in seen:
            continue
        seen.add(key)
        out.append(Splitting(tuple(GammaVector(p) for p in key)))
    out.sort(key=lambda sp: (-sp.s, [tuple(p) for p in sp.parts]))
    return out
