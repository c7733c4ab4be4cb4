"""Search for a family of threefolds realizing a gamma vector.

Each candidate plan splits the vector into parts with pairwise coprime gcds
and realizes every part by a canonical pair, a gcd cover, or a double cover
of the canonical pair of its twist partner (when that vector is shorter).
The total space must have dimension 4, so fibers are threefolds.

Plans are ranked by tier, then by a descriptor, so the choice is
deterministic:

1. every part has coprime entries and none is twisted (one system);
2. some part has a common factor, none twisted (one system);
3. some parts twisted (product of pairs);
4. the whole vector through its twist partner, then a double cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable

from ..gamma import GammaVector, reduce as reduce_gamma, splittings, total_twist_gamma
from .family import (
    FamilyPair,
    canonical_model,
    gcd_pair,
    general_split_pair,
    product_of,
    product_pair,
    twist_double_cover,
)

__all__ = ["NoPlanError", "Plan", "PartPlan", "candidate_plans", "plan_threefold", "reduce_to_threefold"]

TARGET_TOTAL_DIM = 4


class NoPlanError(LookupError):
    pass


@dataclass(frozen=True)
class PartPlan:
    gamma: tuple[int, ...]
    kind: str  # "canonical", "gcd-cover" or "twist-double-cover"
    source: tuple[int, ...]  # the vector whose canonical pair is used

    @property
    def dim(self) -> int:
        return len(self.source) - 2

    def build(self) -> FamilyPair:
        if self.kind == "twist-double-cover":
            return twist_double_cover(canonical_model(self.source))
        if self.kind == "gcd-cover":
            return gcd_pair(self.gamma)
        return canonical_model(self.gamma)


@dataclass(frozen=True)
class Plan:
    gamma: tuple[int, ...]
    tier: int
    parts: tuple[PartPlan, ...]
    via_twist: tuple[int, ...] | None = None

    @property
    def descriptor(self) -> tuple:
        n_twist = sum(p.kind == "twist-double-cover" for p in self.parts)
        n_gcd = sum(p.kind == "gcd-cover" for p in self.parts)
        return (self.tier, n_twist, n_gcd, -len(self.parts), tuple(p.gamma for p in self.parts))

    @property
    def total_dim(self) -> int:
        return sum(p.dim for p in self.parts)

    def describe(self) -> str:
        bits = []
        for p in self.parts:
            g = "(" + ",".join(str(x) for x in p.gamma) + ")"
            if p.kind == "twist-double-cover":
                src = "(" + ",".join(str(x) for x in p.source) + ")"
                bits.append(f"{g} [double cover of {src}]")
            elif p.kind == "gcd-cover":
                bits.append(f"{g} [gcd {GammaVector(p.gamma).gcd} cover]")
            else:
                bits.append(g)
        head = {1: "coprime split", 2: "split with gcd parts", 3: "split with twisted parts",
                4: "double cover of the twist partner"}[self.tier]
        return f"{head}: " + " x ".join(bits)

    def to_json(self) -> dict:
        return {"gamma": list(self.gamma), "tier": self.tier, "description": self.describe(),
                "via_twist": list(self.via_twist) if self.via_twist else None,
                "parts": [{"gamma": list(p.gamma), "kind": p.kind, "source": list(p.source)}
                          for p in self.parts]}

    def build(self) -> FamilyPair:
        if self.tier == 4:
            inner = Plan(self.via_twist, 1, self.parts).build()
            f = twist_double_cover(inner)
            prov = dict(f.provenance, plan=self.to_json())
            return FamilyPair(f.variables, f.equations, f.map_coeff, f.map_exps, prov)
        if self.tier in (1, 2):
            f = product_pair([p.gamma for p in self.parts]) if self.tier == 1 \
                else general_split_pair([p.gamma for p in self.parts])
        else:
            f = product_of([p.build() for p in self.parts])
        prov = dict(f.provenance, plan=self.to_json())
        return FamilyPair(f.variables, f.equations, f.map_coeff, f.map_exps, prov, f.factors)


def _twist_source(part: GammaVector) -> GammaVector | None:
    tau = reduce_gamma(total_twist_gamma(part))
    if tau.gcd != 1 or len(tau) >= len(part):
        return None
    if tuple(sorted(reduce_gamma(total_twist_gamma(tau)))) != tuple(sorted(part)):
        return None
    return tau


def _div(p: GammaVector) -> tuple[int, ...]:
    return tuple(x // p.gcd for x in p)


def _coprime_gcds(parts: Iterable[GammaVector]) -> bool:
    ds = [p.gcd for p in parts if p.gcd > 1]
    return all(gcd(a, b) == 1 for i, a in enumerate(ds) for b in ds[i + 1:])


def _split_plans(g: GammaVector, allow_twist: bool) -> list[Plan]:
    plans = []
    l = len(g)
    for sp in splittings(g, min_parts=1):
        parts = [GammaVector(p) for p in sp.parts]
        if not _coprime_gcds(parts):
            continue
        plain = l - 2 * len(parts)
        if plain == TARGET_TOTAL_DIM:
            pp = tuple(PartPlan(tuple(p), "canonical" if p.gcd == 1 else "gcd-cover", _div(p))
                       for p in parts)
            tier = 1 if all(p.gcd == 1 for p in parts) else 2
            plans.append(Plan(tuple(g), tier, pp))
        if allow_twist and plain > TARGET_TOTAL_DIM:
            options = []
            for p in parts:
                base = PartPlan(tuple(p), "canonical" if p.gcd == 1 else "gcd-cover", _div(p))
                opts = [base]
                tau = _twist_source(p)
                if tau is not None:
                    opts.append(PartPlan(tuple(p), "twist-double-cover", tuple(tau)))
                options.append(opts)
            for choice in _choices(options):
                if sum(c.dim for c in choice) == TARGET_TOTAL_DIM:
                    plans.append(Plan(tuple(g), 3, tuple(choice)))
    return plans


def _choices(options):
    if not options:
        yield ()
        return
    for head in options[0]:
        for rest in _choices(options[1:]):
            yield (head,) + rest


def candidate_plans(g: Iterable[int]) -> list[Plan]:
    g = GammaVector(sorted(g))
    plans = _split_plans(g, allow_twist=True)
    tau = reduce_gamma(total_twist_gamma(g))
    if tau.gcd == 1 and tuple(sorted(tau)) != tuple(g):
        for p in _split_plans(GammaVector(sorted(tau)), allow_twist=False):
            if p.tier == 1:
                plans.append(Plan(tuple(g), 4, p.parts, via_twist=tuple(sorted(tau))))
    return sorted(plans, key=lambda p: p.descriptor)


def plan_threefold(g: Iterable[int]) -> Plan:
    plans = candidate_plans(g)
    if not plans:
        raise NoPlanError(f"no threefold plan for {list(g)}")
    return plans[0]


def reduce_to_threefold(g: Iterable[int]) -> FamilyPair:
    """A family whose fibers are threefolds, realizing the local system of g."""
    f = plan_threefold(g).build()
    if f.fiber_dim != 3:
        raise NoPlanError(f"plan produced fiber dimension {f.fiber_dim}")
    return f
