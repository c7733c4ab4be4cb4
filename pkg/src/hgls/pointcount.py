"""Exact F_q point counts of fibers of FamilyPair models, for prime q.

All counts are on the open torus. Variables take values g^i (g a primitive
root, 0 <= i < q - 1), so monomials are evaluated through discrete logs.

The counter eliminates variables that do not enter the fibration map one by
one (summing products of equation indicators, smallest scope first). What is
left is a weight over the map variables, turned into a histogram of
dlog(map monomial); the count over t is one entry of the cyclic convolution of
those histograms, so all t for a given q come from a single pass.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ._arith import generator_mod, mod_p
from .finite import hgm_sum, hgm_sum_at
from .gamma import GammaVector, m0
from .toric.family import FamilyPair, canonical_model

__all__ = [
    "BudgetExceededError",
    "CountResult",
    "DEFAULT_BUDGET",
    "SumIdentityError",
    "SumIdentityReport",
    "count_all",
    "count_homogeneous",
    "count_points",
    "count_points_naive",
    "fiber_histogram",
    "verify_sum_identity",
]

DEFAULT_BUDGET = 10 ** 8


class BudgetExceededError(RuntimeError):
    pass


class SumIdentityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CountResult:
    q: int
    t: int
    count: int
    model_id: str
    conifold: bool = False

    def to_json(self) -> dict:
        return {"q": self.q, "t": self.t, "count": self.count, "model": self.model_id,
                "conifold": self.conifold}


@lru_cache(maxsize=32)
def _tables(q: int) -> tuple[np.ndarray, np.ndarray]:
    if q < 3 or any(q % d == 0 for d in range(2, math.isqrt(q) + 1)):
        raise ValueError(f"q = {q} must be an odd prime")
    g = generator_mod(q)
    pw = np.empty(q - 1, dtype=np.int64)
    x = 1
    for i in range(q - 1):
        pw[i] = x
        x = x * g % q
    dlog = np.zeros(q, dtype=np.int64)
    dlog[pw] = np.arange(q - 1)
    return pw, dlog


def _residue(c: Fraction, q: int) -> int:
    if c.denominator % q == 0:
        raise ZeroDivisionError(f"coefficient {c} is not integral at q = {q}")
    return mod_p(c, q)


# internal system: equations are lists of (coefficient mod q, exps) pairs
_Sys = list[list[tuple[int, tuple[tuple[str, int], ...]]]]

MEMORY_CAP = 4 * 10 ** 6


def _prepare(f: FamilyPair, q: int) -> _Sys:
    out = []
    for eq in f.equations:
        terms = [(_residue(t.coeff, q), t.exps) for t in eq]
        out.append([(c, e) for c, e in terms if c])
    return out


def _scope(eq) -> tuple[str, ...]:
    return tuple(sorted({v for _, e in eq for v, _ in e}))


def _indicator(eq, scope: Sequence[str], q: int) -> np.ndarray:
    """1 where the equation vanishes, over the grid of dlogs of ``scope``."""
    n = q - 1
    pw, _ = _tables(q)
    k = len(scope)
    axes = [np.arange(n).reshape([-1 if a == i else 1 for a in range(k)]) for i in range(k)]
    where = {v: i for i, v in enumerate(scope)}
    total = np.zeros([n] * k, dtype=np.int64)
    for c, exps in eq:
        e = np.zeros([1] * k, dtype=np.int64)
        for v, x in exps:
            e = e + (x % n) * axes[where[v]]
        total = (total + c * pw[e % n]) % q
    return (total == 0).astype(np.int64)


def _plan(scopes: list[set], mapvars: set[str]) -> tuple[list[str], int]:
    """Greedy elimination order of non-map variables and the widest scope reached."""
    scopes = [set(s) for s in scopes]
    pending = {v for s in scopes for v in s} - mapvars
    order = []
    widest = max((len(s) for s in scopes), default=0)
    while pending:
        def width(v):
            return len(set().union(*(s for s in scopes if v in s)))
        v = min(sorted(pending), key=width)
        touching = [s for s in scopes if v in s]
        merged = set().union(*touching) - {v}
        widest = max(widest, len(merged) + 1)
        scopes = [s for s in scopes if v not in s] + [merged]
        order.append(v)
        pending.discard(v)
    # blocks over map variables
    blocks: list[set] = []
    for s in scopes:
        if not s:
            continue
        hit = [b for b in blocks if b & s]
        for b in hit:
            blocks.remove(b)
        blocks.append(s.union(*hit) if hit else set(s))
    widest = max([widest] + [len(b) for b in blocks])
    return order, widest


def _substitute(sys_: _Sys, v: str, i: int, q: int) -> _Sys | None:
    """Set v = g^i; None if some equation became a nonzero constant."""
    pw, _ = _tables(q)
    n = q - 1
    out = []
    for eq in sys_:
        new = []
        const = 0
        for c, exps in eq:
            d = dict(exps)
            if v in d:
                c = c * int(pw[(d.pop(v) * i) % n]) % q
            if d:
                new.append((c, tuple(sorted(d.items()))))
            else:
                const = (const + c) % q
        if not new:
            if const:
                return None
            continue
        if const:
            new.append((const, ()))
        out.append(new)
    return out


def _histogram(variables: Sequence[str], sys_: _Sys, exps: dict[str, int], q: int) -> np.ndarray:
    n = q - 1
    scopes = [set(_scope(eq)) for eq in sys_]
    mapvars = set(exps)
    _, widest = _plan(scopes, mapvars)
    if n ** widest > MEMORY_CAP:
        # condition on the most shared variable of the widest equation
        counts: dict[str, int] = {}
        for s in scopes:
            for v in s:
                counts[v] = counts.get(v, 0) + 1
        v = max(sorted(counts), key=lambda w: counts[w])
        rest = [w for w in variables if w != v]
        sub_exps = {w: e for w, e in exps.items() if w != v}
        out = np.zeros(n, dtype=np.int64)
        for i in range(n):
            s2 = _substitute(sys_, v, i, q)
            if s2 is None:
                continue
            h = _histogram(rest, s2, sub_exps, q)
            out += np.roll(h, (exps.get(v, 0) * i) % n)
        return out

    factors = [(_scope(eq), _indicator(eq, _scope(eq), q)) for eq in sys_ if _scope(eq)]
    used = {v for s, _ in factors for v in s}
    free = [v for v in variables if v not in used and v not in mapvars]
    scale = n ** len(free)
    order, _ = _plan([set(s) for s, _ in factors], mapvars)
    for v in order:
        factors = _contract(factors, v)
    hist = np.zeros(n, dtype=np.int64)
    hist[0] = 1
    for s, a in factors:
        if not s:
            scale *= int(a)
    blocks: list[tuple[set, list]] = []
    for s, a in factors:
        if not s:
            continue
        merged = [b for b in blocks if b[0] & set(s)]
        for b in merged:
            blocks.remove(b)
        vs = set(s).union(*(b[0] for b in merged)) if merged else set(s)
        blocks.append((vs, [(s, a)] + [x for b in merged for x in b[1]]))
    covered = set().union(*(b[0] for b in blocks)) if blocks else set()
    for v in sorted(mapvars - covered):
        blocks.append(({v}, [((v,), np.ones(n, dtype=np.int64))]))
    for vs, fs in blocks:
        scope = sorted(vs)
        letters = {w: chr(97 + i) for i, w in enumerate(scope)}
        subscripts = ",".join("".join(letters[w] for w in s) for s, _ in fs) + "->" + "".join(letters[w] for w in scope)
        weight = np.einsum(subscripts, *[a for _, a in fs], optimize=True).astype(np.int64)
        k = len(scope)
        acc = np.zeros([1] * k, dtype=np.int64)
        for i, w in enumerate(scope):
            acc = acc + (exps.get(w, 0) % n) * np.arange(n).reshape([-1 if a == i else 1 for a in range(k)])
        acc = np.broadcast_to(acc % n, weight.shape)
        h = np.bincount(acc.ravel(), weights=weight.ravel(), minlength=n)
        hist = _cyclic_convolve(hist, np.rint(h).astype(np.int64))
    return hist * scale


def _contract(factors, v: str):
    """Multiply the factors mentioning v and sum v out."""
    touching = [f for f in factors if v in f[0]]
    rest = [f for f in factors if v not in f[0]]
    scope = sorted({w for s, _ in touching for w in s})
    letters = {w: chr(97 + i) for i, w in enumerate(scope)}
    out_scope = [w for w in scope if w != v]
    subscripts = ",".join("".join(letters[w] for w in s) for s, _ in touching)
    subscripts += "->" + "".join(letters[w] for w in out_scope)
    arr = np.einsum(subscripts, *[a for _, a in touching], optimize=True)
    return rest + [(tuple(out_scope), np.asarray(arr, dtype=np.int64))]


def _cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(len(a), dtype=np.int64)
    for i in np.nonzero(a)[0]:
        out += a[i] * np.roll(b, int(i))
    return out


def _check_budget(f: FamilyPair, q: int, budget: int, fixed: int = 0):
    scopes = [set(_scope([(1, t.exps) for t in eq])) for eq in f.equations]
    _, widest = _plan(scopes, {v for v, _ in f.map_exps})
    work = (q - 1) ** max(widest - fixed, 0)
    if work > budget:
        raise BudgetExceededError(
            f"about (q-1)^{widest - fixed} = {work} evaluations at q = {q} exceeds the budget {budget}")


def fiber_histogram(f: FamilyPair, q: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """h[a] = number of torus points on all equations with dlog(monomial of the map) = a."""
    _tables(q)
    _check_budget(f, q, budget)
    return _histogram(f.variables, _prepare(f, q), dict(f.map_exps), q)


def _target_index(f: FamilyPair, t, q: int) -> int:
    _, dlog = _tables(q)
    tv = mod_p(Fraction(t), q)
    if tv == 0:
        raise ValueError(f"t = {t} vanishes mod {q}")
    c = _residue(f.map_coeff, q)
    if c == 0:
        raise ZeroDivisionError(f"map coefficient {f.map_coeff} vanishes mod {q}")
    return int((dlog[tv] - dlog[c]) % (q - 1))


def count_points(f: FamilyPair, t, q: int, budget: int = DEFAULT_BUDGET) -> CountResult:
    """Exact number of torus points of the fiber over t."""
    _tables(q)
    idx = _target_index(f, t, q)
    tv = mod_p(Fraction(t), q)
    base = f.base_variable
    n = q - 1
    if base is None:
        hist = fiber_histogram(f, q, budget)
        return CountResult(q, tv, int(hist[idx]), _model_id(f), conifold=(tv == 1))
    # map = c * v^k: only the roots v = g^i with k i = idx contribute
    _check_budget(f, q, budget, fixed=1)
    k = f.map_exps[0][1]
    sys_ = _prepare(f, q)
    rest = [v for v in f.variables if v != base]
    total = 0
    for i in range(n):
        if (k * i - idx) % n:
            continue
        s2 = _substitute(sys_, base, i, q)
        if s2 is None:
            continue
        total += int(_histogram(rest, s2, {}, q)[0])
    return CountResult(q, tv, total, _model_id(f), conifold=(tv == 1))


def count_all(f: FamilyPair, q: int, budget: int = DEFAULT_BUDGET) -> dict[int, int]:
    """Counts for every t in F_q^x from one histogram."""
    hist = fiber_histogram(f, q, budget)
    return {t: int(hist[_target_index(f, t, q)]) for t in range(1, q)}


def _model_id(f: FamilyPair) -> str:
    p = f.provenance
    kind = p.get("kind", "model")
    g = p.get("gamma") or p.get("parts")
    return f"{kind}:{g}" if g else kind


def count_points_naive(f: FamilyPair, t, q: int, budget: int = 10 ** 6) -> int:
    """Plain enumeration over every torus variable; only for tiny models."""
    nv = len(f.variables)
    if (q - 1) ** nv > budget:
        raise BudgetExceededError(f"{nv} variables at q = {q}")
    tv = mod_p(Fraction(t), q)
    eqs = [[(_residue(tm.coeff, q), tm.exps) for tm in eq] for eq in f.equations]
    c = _residue(f.map_coeff, q)

    def ev(exps, pt):
        val = 1
        for v, e in exps:
            val = val * pow(pt[v], e, q) % q
        return val

    n = 0
    for vals in itertools.product(range(1, q), repeat=nv):
        pt = dict(zip(f.variables, vals))
        if c * ev(f.map_exps, pt) % q != tv:
            continue
        if all(sum(a * ev(e, pt) for a, e in eq) % q == 0 for eq in eqs):
            n += 1
    return n


def count_homogeneous(g: Iterable[int], t, q: int, budget: int = DEFAULT_BUDGET) -> int:
    """#{z in (F_q^x)^l / scaling : sum z = 0, z^g = M0 t}, straight from the definition.

    Fix z_l = 1 and solve sum z = 0 for z_{l-1}.
    """
    g = list(GammaVector(g))
    l = len(g)
    n = q - 1
    if n ** (l - 2) > budget:
        raise BudgetExceededError(f"{l - 2} free coordinates at q = {q}")
    pw, dlog = _tables(q)
    target = mod_p(m0(g) * Fraction(t), q)
    if target == 0:
        raise ValueError("M0 t vanishes mod q")
    want = dlog[target]
    free = l - 2
    if free == 0:
        zsum = np.array([0])
        logsum = np.array([0])
    else:
        grids = np.indices([n] * free).reshape(free, -1)
        zsum = pw[grids].sum(axis=0) % q
        logsum = (np.asarray(g[:free])[:, None] * grids).sum(axis=0)
    last = (-(1 + zsum)) % q
    ok = last != 0
    lg = (logsum[ok] + g[l - 2] * dlog[last[ok]]) % n
    return int(np.count_nonzero(lg == want))


@dataclass(frozen=True)
class SumIdentityReport:
    gamma: tuple[int, ...]
    p: int
    parameter: str  # "t", or "lambda" (= M0 t) when M0 is not a p-unit
    samples: tuple[int, ...]
    A: Fraction
    coefficient: int
    residuals: tuple[Fraction, ...]
    counts: tuple[int, ...] = field(default=())
    sums: tuple[Fraction, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return all(r == 0 for r in self.residuals)

    def to_json(self) -> dict:
        return {"gamma": list(self.gamma), "p": self.p, "parameter": self.parameter,
                "samples": list(self.samples), "A": str(self.A), "coefficient": self.coefficient,
                "counts": list(self.counts), "sums": [str(h) for h in self.sums],
                "residuals": [str(r) for r in self.residuals], "ok": self.ok}


def sample_parameters(p: int, k: int = 5, seed: int = 0, exclude: Iterable[int] = ()) -> list[int]:
    """k distinct units mod p (all of them when there are fewer)."""
    excluded = set(exclude)
    pool = [t for t in range(1, p) if t not in excluded]
    rng = random.Random(seed * 1009 + p)
    return sorted(rng.sample(pool, min(k, len(pool))))


def verify_sum_identity(g: Iterable[int], p: int, samples: Sequence[int] | None = None,
                        seed: int = 0) -> SumIdentityReport:
    """Fit count(t) = A + c * H_p(g | t) with one constant A and c = +-p^k over the samples.

    Counts come from the canonical model. If p divides an entry of g, M0 is
    not a p-unit and both sides are taken in the variable lambda = M0 t.
    """
    g = GammaVector(g)
    mu = m0(g)
    by_lambda = mu.numerator % p == 0 or mu.denominator % p == 0
    f = canonical_model(g)
    if by_lambda:
        f = FamilyPair(f.variables, f.equations, Fraction(1), f.map_exps, f.provenance)
    if samples is None:
        samples = sample_parameters(p, 5, seed)
    samples = [int(t) % p for t in samples]
    hist = fiber_histogram(f, p)
    counts = [int(hist[_target_index(f, t, p)]) for t in samples]
    sums = [hgm_sum_at(g, t, p) if by_lambda else hgm_sum(g, t, p) for t in samples]
    param = "lambda" if by_lambda else "t"
    for k in range(len(g) + 1):
        for sign in (1, -1):
            c = sign * p ** k
            shifted = [Fraction(n) - c * h for n, h in zip(counts, sums)]
            A = shifted[0]
            res = tuple(x - A for x in shifted)
            if all(r == 0 for r in res):
                return SumIdentityReport(tuple(g), p, param, tuple(samples), A, c, res,
                                         tuple(counts), tuple(sums))
    raise SumIdentityError(f"no affine fit of counts {counts} against sums {sums} at p = {p}")
