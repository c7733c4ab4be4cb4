"""Laurent systems over a torus with a monomial fibration map, and the constructions
that build them from gamma vectors.

A ``FamilyPair`` is a list of Laurent polynomials in named torus variables and a
map ``w = map_coeff * prod v^e``. The fiber over t is the set of torus points
where every equation vanishes and w = t. Treating the base coordinate (``u``) as
one more torus variable keeps point counting uniform.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

from .._arith import bezout
from ..gamma import GammaVector, m0, total_twist_gamma
from .lattice import GcdNotOneError, build_m_kappa

__all__ = [
    "CoprimalityError",
    "FamilyPair",
    "Term",
    "ToricModel",
    "cayley_model",
    "family_from_strings",
    "parse_laurent",
    "canonical_model",
    "gcd_pair",
    "general_split_pair",
    "product_of",
    "product_pair",
    "quadric_bundle_twist",
    "toric_model",
    "twist_double_cover",
    "delta_monomial",
    "random_unimodular",
    "substitute_monomials",
]


class CoprimalityError(ValueError):
    """Part gcds (and the pair entry n) must be pairwise coprime."""


Exps = tuple[tuple[str, int], ...]


def _exps(d: Mapping[str, int]) -> Exps:
    return tuple(sorted((v, int(e)) for v, e in d.items() if e))


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    exps: Exps

    def degree_in(self, var: str) -> int:
        return dict(self.exps).get(var, 0)


Poly = tuple[Term, ...]


class _Mono:
    """coefficient * monomial, used while assembling terms."""

    __slots__ = ("c", "e")

    def __init__(self, c=1, e: Mapping[str, int] | None = None):
        self.c = Fraction(c)
        self.e = {k: v for k, v in (e or {}).items() if v}

    def __mul__(self, other: "_Mono") -> "_Mono":
        e = dict(self.e)
        for k, v in other.e.items():
            e[k] = e.get(k, 0) + v
        return _Mono(self.c * other.c, e)

    def __pow__(self, k: int) -> "_Mono":
        if k == 0:
            return _Mono()
        if self.c == 0 and k < 0:
            raise ZeroDivisionError("negative power of zero coefficient")
        return _Mono(self.c ** k, {v: x * k for v, x in self.e.items()})

    def term(self) -> Term:
        return Term(self.c, _exps(self.e))


def _var(name: str, power: int = 1) -> _Mono:
    return _Mono(1, {name: power})


def _poly(monos: Iterable[_Mono]) -> Poly:
    acc: dict[Exps, Fraction] = {}
    for m in monos:
        t = m.term()
        acc[t.exps] = acc.get(t.exps, Fraction(0)) + t.coeff
    return tuple(Term(c, e) for e, c in acc.items() if c)


@dataclass(frozen=True)
class ToricModel:
    gamma: GammaVector
    M: tuple[tuple[int, ...], ...]
    kappa: tuple[int, ...]
    m0: Fraction

    @property
    def ambient_dim(self) -> int:
        return len(self.M)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.M)

    def terms(self, base: _Mono, xs: Sequence[str]) -> list[_Mono]:
        """base^kappa_j * x^m_j for each entry j."""
        out = []
        for j, k in enumerate(self.kappa):
            m = base ** k
            for name, e in zip(xs, self.column(j)):
                m = m * _var(name, e)
            out.append(m)
        return out


def toric_model(g: Iterable[int]) -> ToricModel:
    g = GammaVector(g)
    M, kappa = build_m_kappa(list(g))
    return ToricModel(g, tuple(tuple(r) for r in M), tuple(kappa), m0(g))


@dataclass(frozen=True)
class FamilyPair:
    variables: tuple[str, ...]
    equations: tuple[Poly, ...]
    map_coeff: Fraction
    map_exps: Exps
    provenance: dict = field(default_factory=dict, compare=False, hash=False)
    factors: tuple["FamilyPair", ...] = field(default=(), compare=False, hash=False)

    def __post_init__(self):
        if self.map_coeff == 0:
            raise ValueError("map coefficient must be nonzero")
        names = set(self.variables)
        if len(names) != len(self.variables):
            raise ValueError("duplicate variable names")
        for eq in self.equations:
            for t in eq:
                for v, _ in t.exps:
                    if v not in names:
                        raise ValueError(f"unknown variable {v}")
        for v, _ in self.map_exps:
            if v not in names:
                raise ValueError(f"unknown map variable {v}")

    @property
    def total_dim(self) -> int:
        """Dimension of the total space: torus variables minus equations."""
        return len(self.variables) - len(self.equations)

    @property
    def fiber_dim(self) -> int:
        return self.total_dim - 1

    @property
    def map_scale(self) -> Fraction:
        """The denominator in w = monomial / scale."""
        return 1 / self.map_coeff

    @property
    def base_variable(self) -> str | None:
        """The variable v when the map is map_coeff * v^k, else None."""
        if len(self.map_exps) == 1:
            return self.map_exps[0][0]
        return None

    def renamed(self, mapping: Mapping[str, str]) -> "FamilyPair":
        ren = lambda v: mapping.get(v, v)
        eqs = tuple(tuple(Term(t.coeff, _exps({ren(v): e for v, e in t.exps})) for t in eq)
                    for eq in self.equations)
        return FamilyPair(tuple(ren(v) for v in self.variables), eqs, self.map_coeff,
                          _exps({ren(v): e for v, e in self.map_exps}), self.provenance, self.factors)

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "equations": [[{"coeff": str(t.coeff), "exps": dict(t.exps)} for t in eq]
                          for eq in self.equations],
            "map": {"coeff": str(self.map_coeff), "exps": dict(self.map_exps)},
            "total_dim": self.total_dim,
            "fiber_dim": self.fiber_dim,
            "provenance": self.provenance,
        }

    def to_latex(self) -> str:
        return _latex_pair(self)

    def __str__(self) -> str:
        return json.dumps(self.to_json())


def _require_gcd_one(g: GammaVector):
    if g.gcd != 1:
        raise GcdNotOneError(f"entries of {list(g)} have gcd {g.gcd}; use gcd_pair")


def canonical_model(g: Iterable[int], x: str = "x", u: str = "u") -> FamilyPair:
    """Sum_j u^kappa_j x^m_j = 0 in T^d x C^*, with map u / M0."""
    g = GammaVector(g)
    _require_gcd_one(g)
    tm = toric_model(g)
    xs = [f"{x}{i + 1}" for i in range(tm.ambient_dim)]
    eq = _poly(tm.terms(_var(u), xs))
    return FamilyPair(tuple(xs) + (u,), (eq,), 1 / tm.m0, ((u, 1),),
                      {"kind": "canonical", "gamma": list(g)})


def gcd_pair(g: Iterable[int], x: str = "x", u: str = "u") -> FamilyPair:
    """The pair built from g / D with map u^D / M0(g), realizing the D:1 pushforward."""
    g = GammaVector(g)
    D = g.gcd
    if D == 1:
        raise ValueError(f"{list(g)} has coprime entries; use canonical_model")
    base = canonical_model([v // D for v in g], x=x, u=u)
    return FamilyPair(base.variables, base.equations, 1 / m0(g), ((u, D),),
                      {"kind": "gcd-cover", "gamma": list(g), "D": D})


def _part_pair(g: GammaVector, x: str, u: str) -> FamilyPair:
    return canonical_model(g, x, u) if g.gcd == 1 else gcd_pair(g, x, u)


def _sparse_bezout(values: Sequence[int]) -> list[int]:
    for i, v in enumerate(values):
        if v == 1:
            return [int(j == i) for j in range(len(values))]
    return bezout(list(values))


def _check_pairwise_coprime(values: Sequence[int]):
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if gcd(values[i], values[j]) != 1:
                raise CoprimalityError(f"entries {values[i]} and {values[j]} share a factor")


def general_split_pair(parts: Sequence[Iterable[int]], n: int | None = None) -> FamilyPair:
    """The system F_0 = ... = F_s = 0 for g = parts[0] u ... u parts[s-1] u (-n, n).

    Part gcds D_i (and n) must be pairwise coprime. Without n the last
    equation is dropped and u_s = 1.
    """
    parts = [GammaVector(p) for p in parts]
    if not parts:
        raise ValueError("need at least one part")
    Ds = [p.gcd for p in parts]
    _check_pairwise_coprime(Ds + ([n] if n else []))
    a = _sparse_bezout(Ds + ([n] if n else []))
    b = a[-1] if n else 0
    s = len(parts)
    models = [toric_model([v // D for v in p]) for p, D in zip(parts, Ds)]
    xs, nxt = [], 1
    for tm in models:
        xs.append([f"x{nxt + i}" for i in range(tm.ambient_dim)])
        nxt += tm.ambient_dim
    us = [f"u{k}" for k in range(1, s)]
    us_pair = f"u{s}" if n else None

    base0 = _var("u", a[0])
    if n:
        base0 = base0 * _var(us_pair, n)
    for k in range(1, s):
        base0 = base0 * _var(us[k - 1], -Ds[k])
    eqs = [_poly(models[0].terms(base0, xs[0]))]
    for k in range(1, s):
        base = _var("u", a[k]) * _var(us[k - 1], Ds[0])
        eqs.append(_poly(models[k].terms(base, xs[k])))
    if n:
        eqs.append(_poly([_var(us_pair, Ds[0]), _var("u", b)]))

    whole = [v for p in parts for v in p] + ([-n, n] if n else [])
    variables = tuple(v for block in xs for v in block) + tuple(us) + ((us_pair,) if n else ()) + ("u",)
    kind = "product-split" if all(D == 1 for D in Ds) and not n else "general-split"
    prov = {"kind": kind, "parts": [list(p) for p in parts], "gcds": Ds,
            "bezout": a, "children": [{"kind": "canonical" if D == 1 else "gcd-cover",
                                        "gamma": list(p)} for p, D in zip(parts, Ds)]}
    if n:
        prov["pair"] = n
    return FamilyPair(variables, tuple(eqs), 1 / m0(whole), (("u", 1),), prov)


def product_pair(parts: Sequence[Iterable[int]]) -> FamilyPair:
    """F_0 = ... = F_{s-1} = 0 with u_0 = u / prod u_i; all parts need coprime entries."""
    parts = [GammaVector(p) for p in parts]
    for p in parts:
        _require_gcd_one(p)
    if len(parts) == 1:
        return canonical_model(parts[0])
    return general_split_pair(parts)


def product_of(pairs: Sequence[FamilyPair], names: Sequence[str] | None = None) -> FamilyPair:
    """Fiberwise product over the torus: (Y_0 x ... x Y_k, w_0 * ... * w_k)."""
    if not pairs:
        raise ValueError("empty product")
    variables: list[str] = []
    eqs: list[Poly] = []
    coeff = Fraction(1)
    mexps: dict[str, int] = {}
    for k, f in enumerate(pairs):
        tag = names[k] if names else str(k)
        mapping = {v: f"{v}_{tag}" for v in f.variables}
        g = f.renamed(mapping)
        variables.extend(g.variables)
        eqs.extend(g.equations)
        coeff *= g.map_coeff
        for v, e in g.map_exps:
            mexps[v] = mexps.get(v, 0) + e
    prov = {"kind": "product", "children": [f.provenance for f in pairs]}
    return FamilyPair(tuple(variables), tuple(eqs), coeff, _exps(mexps), prov, tuple(pairs))


def twist_double_cover(f: FamilyPair, s: str = "s") -> FamilyPair:
    """Substitute base = s^2: the pullback along the double cover branched at 0 and infinity.

    The fiber over t has two copies of the fiber of f when t / map_coeff is a
    square, and is empty otherwise.
    """
    base = f.base_variable
    if base is None:
        raise ValueError("double cover needs a map of the form c * v^k")
    if s in f.variables:
        raise ValueError(f"variable {s} already in use")

    def sub(exps: Exps) -> Exps:
        d = dict(exps)
        if base in d:
            d[s] = 2 * d.pop(base)
        return _exps(d)

    eqs = tuple(_merge([Term(t.coeff, sub(t.exps)) for t in eq]) for eq in f.equations)
    variables = tuple(s if v == base else v for v in f.variables)
    prov = {"kind": "twist-double-cover", "children": [f.provenance]}
    return FamilyPair(variables, eqs, f.map_coeff, sub(f.map_exps), prov)


def _merge(terms: Iterable[Term]) -> Poly:
    acc: dict[Exps, Fraction] = {}
    for t in terms:
        acc[t.exps] = acc.get(t.exps, Fraction(0)) + t.coeff
    return tuple(Term(c, e) for e, c in acc.items() if c)


def quadric_bundle_twist(g: Iterable[int]) -> FamilyPair:
    """Toric model of the canonical pair of the total twist, as a quadric bundle over T^d.

    Each odd entry j carries a factor (2 y_j - y_j^2); the base is ut with
    u = 4^{L_e} ut and the map is ut / (4^{L_o} M0).
    """
    g = GammaVector(g)
    _require_gcd_one(g)
    tm = toric_model(g)
    xs = [f"x{i + 1}" for i in range(tm.ambient_dim)]
    base = _Mono(Fraction(4) ** g.L_e, {"ut": 1})
    monos = []
    y_idx = 0
    for j, mono in enumerate(tm.terms(base, xs)):
        if g[j] % 2:
            y_idx += 1
            y = f"y{y_idx}"
            monos.append(mono * _Mono(2, {y: 1}))
            monos.append(mono * _Mono(-1, {y: 2}))
        else:
            monos.append(mono)
    ys = [f"y{i + 1}" for i in range(y_idx)]
    mt = Fraction(4) ** g.L_o * tm.m0
    return FamilyPair(tuple(xs) + tuple(ys) + ("ut",), (_poly(monos),), 1 / mt, (("ut", 1),),
                      {"kind": "quadric-bundle", "gamma": list(g),
                       "twisted_gamma": list(total_twist_gamma(g))})


def cayley_model(f: FamilyPair) -> FamilyPair:
    """Join a system F_0 = ... = F_k = 0 into the single hypersurface F_0 + sum w_i F_i = 0."""
    if len(f.equations) == 1:
        return f
    ws = [f"w{i}" for i in range(1, len(f.equations))]
    terms = list(f.equations[0])
    for w, eq in zip(ws, f.equations[1:]):
        terms.extend(Term(t.coeff, _exps({**dict(t.exps), w: 1})) for t in eq)
    prov = {"kind": "cayley", "children": [f.provenance]}
    return FamilyPair(f.variables + tuple(ws), (_merge(terms),), f.map_coeff, f.map_exps, prov)


def substitute_monomials(f: FamilyPair, variables: Sequence[str], U: Sequence[Sequence[int]]) -> FamilyPair:
    """Change coordinates by v_i = prod_j v_j'^U[i][j] on the listed variables.

    U must be unimodular for the result to be isomorphic to f.
    """
    k = len(variables)
    if any(len(r) != k for r in U) or len(U) != k:
        raise ValueError("U must be square of the size of the variable list")
    idx = {v: i for i, v in enumerate(variables)}

    def sub(exps: Exps) -> Exps:
        d = dict(exps)
        new: dict[str, int] = {v: e for v, e in d.items() if v not in idx}
        for v, e in d.items():
            if v in idx:
                for j, w in enumerate(variables):
                    new[w] = new.get(w, 0) + e * U[idx[v]][j]
        return _exps(new)

    eqs = tuple(_merge([Term(t.coeff, sub(t.exps)) for t in eq]) for eq in f.equations)
    prov = {"kind": "substituted", "children": [f.provenance]}
    return FamilyPair(f.variables, eqs, f.map_coeff, sub(f.map_exps), prov, f.factors)


def random_unimodular(k: int, rng, steps: int = 12, size: int = 2) -> list[list[int]]:
    U = [[int(i == j) for j in range(k)] for i in range(k)]
    if k < 2:
        return [[rng.choice((1, -1))]] if k else U
    for _ in range(steps):
        i, j = rng.sample(range(k), 2)
        c = rng.choice([x for x in range(-size, size + 1) if x])
        for r in range(k):
            U[r][i] += c * U[r][j]
    return U


def delta_monomial(g: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """(u-exponent, x-exponents) of the product of the odd-entry terms."""
    g = GammaVector(g)
    tm = toric_model(g)
    k = sum(tm.kappa[j] for j in range(len(g)) if g[j] % 2)
    m = tuple(sum(tm.M[i][j] for j in range(len(g)) if g[j] % 2) for i in range(tm.ambient_dim))
    return k, m


_FACTOR = r"(?:\d+(?:/\d+)?|[A-Za-z]\w*(?:\^-?\d+)?)"
_BODY = rf"{_FACTOR}(?:\*{_FACTOR})*"
_POLY = re.compile(rf"[+-]?{_BODY}(?:[+-]{_BODY})*")
_TERM = re.compile(rf"([+-]?)({_BODY})")


def parse_laurent(text: str) -> Poly:
    """Parse sums of terms like ``-4/27*u*x1^2*x2^-1``."""
    # spaces are allowed around operators only, so "x1 x2" is rejected
    s = re.sub(r"\s*([-+*^/])\s*", r"\1", text.strip())
    if not _POLY.fullmatch(s):
        raise ValueError(f"cannot parse Laurent polynomial {text!r}")
    monos = []
    for sign, body in _TERM.findall(s):
        mono = _Mono(-1 if sign == "-" else 1)
        for factor in body.split("*"):
            if factor[0].isdigit():
                mono = mono * _Mono(Fraction(factor))
            else:
                name, _, e = factor.partition("^")
                mono = mono * _var(name, int(e) if e else 1)
        monos.append(mono)
    return _poly(monos)


def family_from_strings(equations: Sequence[str], map_: str, variables: Sequence[str] | None = None,
                        provenance: dict | None = None) -> FamilyPair:
    """Build a FamilyPair from written-out equations and a monomial map such as ``-4/27*u``."""
    eqs = tuple(parse_laurent(e) for e in equations)
    mp = parse_laurent(map_)
    if len(mp) != 1:
        raise ValueError("the map must be a single monomial")
    if variables is None:
        seen = []
        for eq in eqs + (mp,):
            for t in eq:
                for v, _ in t.exps:
                    if v not in seen:
                        seen.append(v)
        variables = seen
    return FamilyPair(tuple(variables), eqs, mp[0].coeff, mp[0].exps, provenance or {"kind": "given"})


# LaTeX rendering

_NAME = re.compile(r"^([a-z]+)(\d*)(?:_(\w+))?$")


def _latex_var(v: str) -> str:
    m = _NAME.match(v)
    if not m:
        return v
    letter, idx, tag = m.groups()
    letter = {"ut": r"\widetilde{u}"}.get(letter, letter)
    out = letter + (f"_{{{idx}}}" if idx else "")
    if tag:
        out += f"^{{({tag})}}"
    return out


def _latex_mono(exps: Exps) -> tuple[str, str]:
    num, den = [], []
    for v, e in exps:
        base = _latex_var(v)
        target = num if e > 0 else den
        a = abs(e)
        if a != 1 and "^" in base:
            base = "{" + base + "}"
        target.append(base if a == 1 else f"{base}^{{{a}}}")
    return " ".join(num), " ".join(den)


def _latex_term(t: Term, first: bool) -> str:
    c = t.coeff
    sign = "-" if c < 0 else ("" if first else "+")
    c = abs(c)
    num, den = _latex_mono(t.exps)
    cn, cd = c.numerator, c.denominator
    top = " ".join(x for x in ((str(cn) if cn != 1 else ""), num) if x)
    bottom = " ".join(x for x in ((str(cd) if cd != 1 else ""), den) if x)
    if not top:
        top = "1"
    body = f"\\frac{{{top}}}{{{bottom}}}" if bottom else top
    return f"{sign} {body}".strip() if not first else f"{sign}{body}"


def latex_poly(eq: Poly) -> str:
    if not eq:
        return "0"
    return " ".join(_latex_term(t, i == 0) for i, t in enumerate(eq))


def _latex_map(f: FamilyPair) -> str:
    return latex_poly((Term(f.map_coeff, f.map_exps),))


def _latex_pair(f: FamilyPair) -> str:
    if f.factors and f.provenance.get("kind") == "product":
        body = r" \times ".join(f"({_latex_pair(g)})" for g in f.factors)
        return body
    eqs = " = ".join(latex_poly(eq) for eq in f.equations)
    base = f.base_variable
    n = len(f.variables) - (1 if base else 0)
    amb = f"\\mathbb{{T}}^{{{n}}}" + (r" \times \mathbb{C}^\times" if base else "")
    return f"\\left( {eqs} = 0 \\right) \\subset {amb} \\quad \\text{{with}} \\quad w = {_latex_map(f)}"
