"""Hodge numbers of a rational hypergeometric system by the interlacing count."""

from __future__ import annotations

from dataclasses import dataclass

from .params import HGParams, NotRationalError, is_defined_over_Q, is_irreducible

__all__ = ["HodgeVector", "hodge_vector"]


@dataclass(frozen=True)
class HodgeVector:
    h: tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.h) - 1

    @property
    def rank(self) -> int:
        return sum(self.h)

    @property
    def is_symmetric(self) -> bool:
        return self.h == self.h[::-1]

    def __iter__(self):
        return iter(self.h)

    def __eq__(self, other):
        if isinstance(other, HodgeVector):
            return self.h == other.h
        if isinstance(other, (tuple, list)):
            return self.h == tuple(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.h)


def hodge_vector(p: HGParams) -> HodgeVector:
    """Walk alpha and beta in increasing order: +1 at an alpha, -1 at a beta.

    h^k counts the alphas at which the running level (taken just after the
    step) equals k, with levels shifted so the lowest alpha level is 0.
    """
    if not is_defined_over_Q(p):
        raise NotRationalError(f"{p} is not defined over Q")
    if not is_irreducible(p):
        raise ValueError(f"{p} is reducible")
    events = sorted([(x, 0) for x in p.alpha] + [(x, 1) for x in p.beta])
    level = 0
    levels = []
    for _, is_beta in events:
        if is_beta:
            level -= 1
        else:
            level += 1
            levels.append(level)
    lo = min(levels)
    h = [0] * (max(levels) - lo + 1)
    for v in levels:
        h[v - lo] += 1
    return HodgeVector(tuple(h))
