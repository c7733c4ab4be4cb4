"""Enumerate rational hypergeometric systems with a given Hodge vector.

Classes are unordered pairs {alpha, beta} (the inversion t -> 1/t swaps
them). Rows are numbered as follows:

1. MUM classes, oriented with beta = 0, sorted by the cyclotomic key of alpha;
2. total twists of those, in the same order, oriented by the +1/2 shift;
3. one base per remaining twist orbit, the orientation minimising
   (key(alpha), key(beta)), sorted by that key;
4. twists of the non-self-twist bases, in base order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

from ._arith import euler_phi
from .conifold import disc_field, twist_disc
from .gamma import ReducedGammaVector, format_gamma, gamma_from_params, m0
from .hodge import hodge_vector
from .params import CYCLOTOMIC_INDICES, CycloProfile, HGParams, is_mum, total_twist_params

__all__ = [
    "CaseRecord",
    "ClassificationError",
    "classify_all",
    "compare_to_reference",
    "cyclotomic_multisets",
    "emit_tables",
    "enumerate_candidates",
    "load_reference_tables",
    "record_schema",
]

EXPECTED_CASES = 47
EXPECTED_MUM = 14


class ClassificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CaseRecord:
    index: int
    params: HGParams
    gamma_red: ReducedGammaVector
    is_mum: bool
    D: int
    E: int
    twist_partner: int
    form_label: str | None = None

    @property
    def m0(self) -> Fraction:
        return m0(self.gamma_red)

    @property
    def self_twist(self) -> bool:
        return self.twist_partner == self.index

    @property
    def twist_of(self) -> int | None:
        """The earlier case this row is the total twist of (marked "n (~m)" in the tables)."""
        return self.twist_partner if self.twist_partner < self.index else None

    def with_label(self, label: str | None) -> "CaseRecord":
        return replace(self, form_label=label)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "alpha": self.params.to_json()["alpha"],
            "beta": self.params.to_json()["beta"],
            "gamma_red": list(self.gamma_red),
            "mum": self.is_mum,
            "D": self.D,
            "E": self.E,
            "twist_partner": self.twist_partner,
            "form_label": self.form_label,
        }


def cyclotomic_multisets(rank: int, indices: Iterable[int] = CYCLOTOMIC_INDICES) -> list[tuple[int, ...]]:
    """Multisets of cyclotomic indices whose phi-degrees add up to ``rank``."""
    usable = sorted(n for n in set(indices) if euler_phi(n) <= rank)
    out = []
    for k in range(1, rank + 1):
        for combo in combinations_with_replacement(usable, k):
            if sum(euler_phi(n) for n in combo) == rank:
                out.append(combo)
    return out


def _key(orders: Sequence[int], rank: int) -> tuple:
    return (max(euler_phi(n) for n in orders) == rank, tuple(sorted(orders)))


def _orient(p: HGParams) -> HGParams:
    """Representative of {alpha, beta}: beta = 0 if possible, else the smaller key first."""
    if all(x == 0 for x in p.alpha):
        return p.swap()
    if all(x == 0 for x in p.beta):
        return p
    return min(p, p.swap(), key=_pair_key)


def _pair_key(p: HGParams) -> tuple:
    prof = CycloProfile.from_params(p)
    return (_key(prof.numerator_orders, p.rank), _key(prof.denominator_orders, p.rank))


def enumerate_candidates(rank: int = 4, indices: Iterable[int] = CYCLOTOMIC_INDICES) -> list[HGParams]:
    """Irreducible rational parameter pairs of the given rank, one per {alpha, beta}."""
    ms = cyclotomic_multisets(rank, indices)
    seen = set()
    out = []
    for a in ms:
        for b in ms:
            if set(a) & set(b):
                continue
            p = _orient(CycloProfile(a, b).to_params())
            k = p.unordered_key()
            if k not in seen:
                seen.add(k)
                out.append(p)
    return out


def _classes(rank: int, hodge: tuple[int, ...], indices) -> list[HGParams]:
    return [p for p in enumerate_candidates(rank, indices) if hodge_vector(p) == hodge]


def classify_all(rank: int = 4, hodge: Sequence[int] = (1, 1, 1, 1),
                 indices: Iterable[int] = CYCLOTOMIC_INDICES,
                 check_count: bool | None = None) -> list[CaseRecord]:
    hodge = tuple(hodge)
    classes = _classes(rank, hodge, indices)
    by_key = {p.unordered_key(): p for p in classes}

    def twist_of(p: HGParams) -> HGParams:
        return by_key[total_twist_params(p).unordered_key()]

    ordered: list[HGParams] = []
    placed: set = set()

    def place(p: HGParams):
        ordered.append(p)
        placed.add(p.unordered_key())

    mums = sorted((_orient(p) for p in classes if is_mum(p)), key=_pair_key)
    for p in mums:
        place(p)
    for p in mums:
        t = total_twist_params(p)
        if t.unordered_key() not in placed:
            place(t)

    bases = []
    for p in classes:
        if p.unordered_key() in placed:
            continue
        orbit = [p, p.swap(), twist_of(p), twist_of(p).swap()]
        base = min(orbit, key=_pair_key)
        if base.unordered_key() not in {b.unordered_key() for b in bases}:
            bases.append(base)
    bases.sort(key=_pair_key)
    for b in bases:
        place(b)
    for b in bases:
        t = total_twist_params(b)
        if t.unordered_key() not in placed:
            place(t)

    index_of = {p.unordered_key(): i + 1 for i, p in enumerate(ordered)}
    records = []
    for i, p in enumerate(ordered, start=1):
        g = gamma_from_params(p)
        records.append(CaseRecord(
            index=i,
            params=p,
            gamma_red=g,
            is_mum=is_mum(p),
            D=disc_field(g) if len(g) % 2 == 0 else 0,
            E=twist_disc(g),
            twist_partner=index_of[total_twist_params(p).unordered_key()],
        ))

    if check_count is None:
        check_count = rank == 4 and hodge == (1, 1, 1, 1)
    if check_count:
        n_mum = sum(r.is_mum for r in records)
        if len(records) != EXPECTED_CASES or n_mum != EXPECTED_MUM:
            raise ClassificationError(
                f"found {len(records)} classes ({n_mum} MUM), expected "
                f"{EXPECTED_CASES} ({EXPECTED_MUM} MUM); "
                f"{len(enumerate_candidates(rank, indices))} candidates before the Hodge filter")
    return records


def record_schema() -> dict:
    return json.loads(resources.files("hgls.data").joinpath("case_schema.json").read_text())


def load_reference_tables() -> list[dict]:
    """The bundled reference rows (alpha, beta, gamma_red, D, E, form label, twist marks)."""
    return json.loads(resources.files("hgls.data").joinpath("tables.json").read_text())


def _fmt_params(xs: Sequence[Fraction]) -> str:
    return "(" + ", ".join(str(x) for x in xs) + ")"


def emit_tables(records: Sequence[CaseRecord], fmt: str = "md") -> str:
    if fmt == "json":
        return json.dumps([r.to_json() for r in records], indent=2, ensure_ascii=False) + "\n"
    header = ["n", "alpha", "beta", "gamma_red", "D", "f", "E"]
    rows = []
    for r in records:
        n = str(r.index) if r.twist_of is None else f"{r.index} (~{r.twist_of})"
        rows.append([n, _fmt_params(r.params.alpha), _fmt_params(r.params.beta),
                     format_gamma(r.gamma_red), str(r.D), r.form_label or "", str(r.E)])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "md":
        out = []
        mum = [row for row, r in zip(rows, records) if r.is_mum]
        rest = [row for row, r in zip(rows, records) if not r.is_mum]
        for title, block in (("MUM cases", mum), ("Cases without a MUM point", rest)):
            out.append(f"### {title} ({len(block)})\n")
            out.append("| " + " | ".join(header) + " |")
            out.append("|" + "---|" * len(header))
            for row in block:
                out.append("| " + " | ".join(row) + " |")
            out.append("")
        return "\n".join(out)
    raise ValueError(f"unknown format {fmt!r}")


def _sorted_fracs(xs) -> list[Fraction]:
    return sorted(Fraction(x) for x in xs)


def compare_to_reference(records: Sequence[CaseRecord], reference: Sequence[dict] | None = None,
                         labels: bool = False) -> list[str]:
    """Differences between computed rows and reference rows; empty when they agree."""
    reference = load_reference_tables() if reference is None else reference
    problems = []
    if len(records) != len(reference):
        problems.append(f"{len(records)} rows computed, {len(reference)} in the reference")
    ref = {int(r["index"]): r for r in reference}
    for rec in records:
        row = ref.get(rec.index)
        if row is None:
            problems.append(f"case {rec.index}: missing from the reference")
            continue
        mine = rec.to_json()
        checks = [
            ("alpha", _sorted_fracs(mine["alpha"]), _sorted_fracs(row["alpha"])),
            ("beta", _sorted_fracs(mine["beta"]), _sorted_fracs(row["beta"])),
            ("gamma_red", sorted(mine["gamma_red"]), sorted(row["gamma_red"])),
            ("D", mine["D"], row["D"]),
            ("E", mine["E"], row["E"]),
            ("twist_of", rec.twist_of, row.get("twist_of")),
        ]
        if labels:
            checks.append(("form_label", mine["form_label"], row.get("form_label")))
        for name, a, b in checks:
            if a != b:
                problems.append(f"case {rec.index}: {name} {a} != {b}")
    return problems
