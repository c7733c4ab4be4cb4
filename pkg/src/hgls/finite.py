"""Finite hypergeometric sums over F_p and the Euler factor at the conifold.

For a gamma vector g, a prime p and t in F_p^x, with q = p and omega a
generator of the character group of F_p^x::

    H(g | t) = (-1)^l / (1 - q) * q^(-s(0)) *
               sum_{m=0}^{q-2} q^s(m) * prod_i G(-m g_i) * omega(M0 t)^m

where G(m) = sum_x omega(x)^m zeta_p^x and s(m) counts, for k the order of
omega^m, the smaller of #{g_i < 0 : k | g_i} and #{g_i > 0 : k | g_i}.
The inner sum is an integer N, so H = (-1)^l N / ((1 - q) q^s(0)) exactly.
H itself is only rational; the integer Frobenius trace on the rank-r motive
is T = q^((r - z)/2) H with z the number of zero parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

from ._arith import generator_mod, kronecker, mod_p, primes_upto
from .conifold import disc_field, sigma as sigma_char, twist_disc, twist_radicand
from .gamma import GammaVector, m0, params_from_gamma

__all__ = [
    "BadPrimeError",
    "CALIBRATION",
    "EulerFactorData",
    "FpContext",
    "NonIntegralSumError",
    "WeilBoundError",
    "ap_series",
    "calibrate",
    "euler_factor_conifold",
    "frobenius_trace",
    "fp_context",
    "hgm_sum",
    "hgm_sum_at",
    "is_good_prime",
    "TwistCheck",
    "twist_character",
    "twist_relation",
    "working_precision",
]

# (s, c0) in a_p = s * (T(1) - c0 * sigma(p) * p), fitted once on case 1.
CALIBRATION: tuple[int, int] = (1, 1)

REJECT_TOL = 1e-6


class BadPrimeError(ValueError):
    pass


class NonIntegralSumError(ArithmeticError):
    pass


class WeilBoundError(ArithmeticError):
    pass


class FpContext:
    """Discrete logs and complex Gauss sums for F_p, at a fixed precision."""

    def __init__(self, p: int, dps: int = 30):
        if p < 3 or p % 2 == 0:
            raise BadPrimeError(f"p = {p} must be an odd prime")
        self.p = p
        self.q = p
        self.dps = dps
        self.generator = generator_mod(p)
        self.dlog = [0] * p
        x = 1
        for k in range(p - 1):
            self.dlog[x] = k
            x = x * self.generator % p
        with mpmath.workdps(dps):
            n = p - 1
            self._zq = [mpmath.expjpi(mpmath.mpf(2 * k) / n) for k in range(n)]
            zp = [mpmath.expjpi(mpmath.mpf(2 * k) / p) for k in range(p)]
            self.gauss = []
            for m in range(n):
                s = mpmath.mpc(0)
                for xv in range(1, p):
                    s += self._zq[(m * self.dlog[xv]) % n] * zp[xv]
                self.gauss.append(s)

    def omega_power(self, x: int, m: int):
        """omega(x)^m for x a nonzero residue."""
        return self._zq[(m * self.dlog[x % self.p]) % (self.p - 1)]

    def g(self, m: int):
        return self.gauss[m % (self.p - 1)]


@lru_cache(maxsize=64)
def fp_context(p: int, dps: int = 30) -> FpContext:
    return FpContext(p, dps)


def _s(g: Sequence[int], k: int) -> int:
    neg = sum(1 for x in g if x < 0 and x % k == 0)
    pos = sum(1 for x in g if x > 0 and x % k == 0)
    return min(neg, pos)


def working_precision(g: Sequence[int], p: int, floor: int = 15) -> int:
    """Digits needed so the rounded integer sum is reliable."""
    smax = _s(g, 1)
    return max(floor, 15 + math.ceil(math.log10(p) * (len(g) / 2 + smax + 1)))


def _check_prime(g: Sequence[int], p: int):
    if p < 3 or p % 2 == 0:
        raise BadPrimeError(f"p = {p} is not an odd prime")
    if any(x % p == 0 for x in g):
        raise BadPrimeError(f"p = {p} divides an entry of {list(g)}")


def _inner_sum(g: Sequence[int], lam: int, p: int, dps: int | None) -> int:
    dps = max(dps or 0, working_precision(g, p))
    ctx = fp_context(p, dps)
    n = p - 1
    with mpmath.workdps(dps):
        total = mpmath.mpc(0)
        for m in range(n):
            k = n // math.gcd(m, n)
            term = mpmath.mpf(p) ** _s(g, k)
            for x in g:
                term *= ctx.g(-m * x)
            total += term * ctx.omega_power(lam, m)
        re = mpmath.nint(total.real)
        err = max(abs(total.real - re), abs(total.imag))
        if err > REJECT_TOL:
            raise NonIntegralSumError(f"sum off an integer by {mpmath.nstr(err, 3)} at p = {p}")
        return int(re)


def hgm_sum(g: Iterable[int], t, p: int, dps: int | None = None) -> Fraction:
    """The finite hypergeometric sum H_p(g | t) as an exact rational."""
    g = list(g)
    _check_prime(g, p)
    t = Fraction(t)
    if t.numerator % p == 0 or t.denominator % p == 0:
        raise BadPrimeError(f"t = {t} is not a unit at p = {p}")
    return hgm_sum_at(g, mod_p(m0(g) * t, p), p, dps)


def hgm_sum_at(g: Iterable[int], lam: int, p: int, dps: int | None = None) -> Fraction:
    """The same sum in the variable lam = M0 t.

    This form needs only lam to be a unit, so it also makes sense when p
    divides an entry of g (where M0 itself is not a p-unit).
    """
    g = list(g)
    if p < 3 or p % 2 == 0:
        raise BadPrimeError(f"p = {p} is not an odd prime")
    lam %= p
    if lam == 0:
        raise BadPrimeError("lambda must be a unit")
    N = _inner_sum(g, lam, p, dps)
    return Fraction((-1) ** len(g) * N, (1 - p) * p ** _s(g, 1))


def _zero_parameters(g: Sequence[int]) -> int:
    neg = sum(1 for x in g if x < 0)
    return abs(neg - (len(g) - neg))


def _rank(g: Sequence[int]) -> int:
    return params_from_gamma(g).rank


def frobenius_trace(g: Iterable[int], t, p: int, dps: int | None = None) -> int:
    """T = p^((rank - z)/2) * H, the trace of Frobenius of the motive at t."""
    g = list(g)
    H = hgm_sum(g, t, p, dps)
    e = _rank(g) - _zero_parameters(g)
    if e % 2:
        raise NonIntegralSumError(f"odd exponent rank - z = {e} for {g}")
    val = H * p ** (e // 2)
    if val.denominator != 1:
        raise NonIntegralSumError(f"trace {val} not integral for {g} at p = {p}")
    return int(val)


def twist_character(g: Iterable[int], t, p: int) -> int:
    """Quadratic character of (-1)^(l_o/2) * M0 * t at p."""
    c = twist_radicand(GammaVector(g), t)
    return kronecker(c.numerator * c.denominator, p)


def is_good_prime(g: Iterable[int], p: int, t=1) -> tuple[bool, str]:
    g = GammaVector(g)
    if p == 2:
        return False, "p = 2"
    if any(x % p == 0 for x in g):
        return False, "p divides a gamma entry"
    t = Fraction(t)
    if t.numerator % p == 0 or t.denominator % p == 0:
        return False, "t is not a p-unit"
    if t == 1 and len(g) % 2 == 0 and (disc_field(g) * twist_disc(g)) % p == 0:
        return False, "p divides D*E"
    return True, ""


@dataclass(frozen=True)
class EulerFactorData:
    p: int
    sigma_p: int
    a_p: int | None
    good: bool
    trace: int | None = None
    reason: str = ""

    def factor(self) -> tuple[list[int], list[int]] | None:
        """Coefficients of (1 - sigma p T) and (1 - a_p T + p^3 T^2)."""
        if not self.good:
            return None
        return [1, -self.sigma_p * self.p], [1, -self.a_p, self.p ** 3]

    def to_json(self) -> dict:
        return {"p": self.p, "sigma": self.sigma_p, "a_p": self.a_p, "good": self.good,
                "trace": self.trace, "reason": self.reason}


def _gamma_of(case) -> GammaVector:
    return GammaVector(case.gamma_red if hasattr(case, "gamma_red") else case)


def euler_factor_conifold(case, p: int, calibration: tuple[int, int] = CALIBRATION,
                          check_weil: bool = True) -> EulerFactorData:
    g = _gamma_of(case)
    good, why = is_good_prime(g, p)
    if not good:
        raise BadPrimeError(f"p = {p}: {why}")
    D = disc_field(g)
    sp = sigma_char(D, p)
    T = frobenius_trace(g, 1, p)
    s, c0 = calibration
    ap = s * (T - c0 * sp * p)
    if check_weil and ap * ap > 4 * p ** 3:
        raise WeilBoundError(f"|a_{p}| = {abs(ap)} exceeds 2 p^(3/2)")
    return EulerFactorData(p, sp, ap, True, T)


def ap_series(case, primes: int | Iterable[int] = 50, calibration: tuple[int, int] = CALIBRATION) -> list[EulerFactorData]:
    """Euler factor data at each prime; bad primes are kept with a reason and no a_p."""
    g = _gamma_of(case)
    plist = primes_upto(primes) if isinstance(primes, int) else list(primes)
    out = []
    for p in plist:
        good, why = is_good_prime(g, p)
        if not good:
            out.append(EulerFactorData(p, sigma_char(disc_field(g), p), None, False, None, why))
            continue
        out.append(euler_factor_conifold(g, p, calibration))
    return out


def calibrate(g: Iterable[int], coefficients: dict[int, int], primes: Iterable[int] = (3, 5, 7, 11, 13)) -> list[tuple[int, int]]:
    """All (s, c0) with s in {1, -1}, c0 in {-1, 0, 1} fitting the given a_p."""
    g = GammaVector(g)
    data = {}
    for p in primes:
        data[p] = (frobenius_trace(g, 1, p), sigma_char(disc_field(g), p))
    fits = []
    for s in (1, -1):
        for c0 in (-1, 0, 1):
            if all(s * (T - c0 * sp * p) == coefficients[p] for p, (T, sp) in data.items()):
                fits.append((s, c0))
    return fits


@dataclass(frozen=True)
class TwistCheck:
    p: int
    t: int
    trace: int
    twisted_trace: int
    character: int

    @property
    def ok(self) -> bool:
        return self.twisted_trace == self.character * self.trace


def twist_relation(g: Iterable[int], g_twisted: Iterable[int], max_prime: int = 30) -> list[TwistCheck]:
    """T_twisted(t) against chi((-1)^(l_o/2) M0 t) T(t) at every good p and every unit t."""
    g, h = list(g), list(g_twisted)
    out = []
    for p in primes_upto(max_prime):
        if p == 2 or any(x % p == 0 for x in g + h):
            continue
        for t in range(1, p):
            out.append(TwistCheck(p, t, frobenius_trace(g, t, p), frobenius_trace(h, t, p),
                                  twist_character(g, t, p)))
    return out
