"""The property suite behind ``hgls verify``.

Each check returns a dict with ``name``, ``ok``, ``summary`` and ``details``.
Randomized parts draw from ``random.Random(seed)`` only, so a seed
reproduces a run exactly.
"""

from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Sequence

from .classify import classify_all, compare_to_reference, load_reference_tables
from .gamma import m0, reduce, total_twist_gamma

log = logging.getLogger(__name__)

SELF_TWIST = (1, 30, 37)
TWIST_PAIRS = ((2, 15), (11, 24), (28, 39), (5, 18), (36, 46))
SUM_VECTORS = ((-2, 1, 1), (-3, 1, 2), (-5, 1, 1, 1, 1, 1))
SUM_PRIMES = (5, 7, 11, 13)
MUM_LABELED = (1, 5, 8, 11)
REFERENCE_CASES = (28, 30, 41)


def _result(name: str, ok: bool, summary: str, details=None, started: float | None = None) -> dict:
    out = {"name": name, "ok": bool(ok), "summary": summary, "details": details or []}
    if started is not None:
        log.info("%s took %.1fs", name, time.monotonic() - started)
    return out


def expected_twist_partner(i: int) -> int:
    if i in SELF_TWIST:
        return i
    if 2 <= i <= 14:
        return i + 13
    if 15 <= i <= 27:
        return i - 13
    if 28 <= i <= 38:
        return 39 + [j for j in range(28, 39) if j not in SELF_TWIST].index(i)
    return [j for j in range(28, 39) if j not in SELF_TWIST][i - 39]


def check_classify(**_) -> dict:
    t0 = time.monotonic()
    recs = classify_all()
    problems = compare_to_reference(recs)
    n_mum = sum(r.is_mum for r in recs)
    if len(recs) != 47 or n_mum != 14:
        problems.append(f"{len(recs)} cases, {n_mum} MUM")
    return _result("classify", not problems,
                   f"{len(recs)} cases ({n_mum} MUM); {len(problems)} mismatches against the bundled tables",
                   problems, t0)


def check_twist_structure(**_) -> dict:
    recs = classify_all()
    bad = [f"case {r.index}: partner {r.twist_partner}, expected {expected_twist_partner(r.index)}"
           for r in recs if r.twist_partner != expected_twist_partner(r.index)]
    pairs = {tuple(sorted((r.index, r.twist_partner))) for r in recs}
    if len(pairs) != 25:
        bad.append(f"{len(pairs)} twist classes, expected 25")
    return _result("twist-structure", not bad, f"{len(pairs)} twist classes", bad)


def check_gamma(seed: int = 0, **_) -> dict:
    bad = []
    if tuple(reduce((-6, -3, -2, 1, 2, 2, 6))) != (-3, 1, 2):
        bad.append("reduce((-6,-3,-2,1,2,2,6))")
    if tuple(total_twist_gamma((-6, -1, 2, 2, 3))) != (-6, -3, -2, 1, 2, 2, 6):
        bad.append("twist((-6,-1,2,2,3))")
    case28 = classify_all()[27].gamma_red
    if m0(case28) != Fraction(-27, 4):
        bad.append(f"M0(case 28) = {m0(case28)}")
    rng = random.Random(seed)
    vectors = [r.gamma_red for r in rng.sample(classify_all(), 10)]
    for g in vectors:
        if m0(total_twist_gamma(g)) != Fraction(4) ** g.L_o * m0(g):
            bad.append(f"twisted M0 of {list(g)}")
    return _result("gamma", not bad, f"reduce, twist and M0 examples; twisted M0 on {len(vectors)} vectors", bad)


def check_hessian(**_) -> dict:
    from .toric.hessian import MAX_DIM, HessianDegenerateError, hessian_check

    t0 = time.monotonic()
    details, passed = [], 0
    for r in classify_all():
        if r.gamma_red.d > MAX_DIM:
            details.append({"case": r.index, "skipped": f"d = {r.gamma_red.d} > {MAX_DIM}"})
            continue
        try:
            w = hessian_check(r.gamma_red)
        except HessianDegenerateError as exc:
            details.append({"case": r.index, "error": str(exc)})
            continue
        passed += w.ok
        details.append({"case": r.index, **w.to_json()})
    failed = [d for d in details if "error" in d or d.get("square") is False]
    return _result("hessian", passed >= 10 and not failed,
                   f"{passed} cases with det(H) / (-prod g) a rational square", details, t0)


def check_sums(seed: int = 0, **_) -> dict:
    from .pointcount import SumIdentityError, verify_sum_identity

    t0 = time.monotonic()
    details, ok = [], True
    for g in SUM_VECTORS:
        for p in SUM_PRIMES:
            try:
                rep = verify_sum_identity(g, p, seed=seed)
            except SumIdentityError as exc:
                ok = False
                details.append({"gamma": list(g), "p": p, "error": str(exc)})
                continue
            ok &= rep.ok
            details.append(rep.to_json())
    return _result("sums", ok, f"{len(details)} (gamma, p) fits with zero residual" if ok
                   else "sum identity failed", details, t0)


def _reference_counts(q_values=(5, 7, 11)) -> list[dict]:
    from .pointcount import count_points
    from .toric import load_reference_models, reduce_to_threefold

    refs = load_reference_models()
    recs = classify_all()
    out = []
    for i in REFERENCE_CASES:
        ours = reduce_to_threefold(recs[i - 1].gamma_red)
        ref = refs[i]
        shape = (len(ours.equations), len(ours.variables), str(ours.map_coeff))
        ref_shape = (len(ref.equations), len(ref.variables), str(ref.map_coeff))
        counts = []
        for q in q_values:
            for t in (2, 3, q - 1):
                a = count_points(ours, t, q).count
                b = count_points(ref, t, q).count
                counts.append({"q": q, "t": t, "ours": a, "reference": b})
        out.append({"case": i, "shape": shape, "reference_shape": ref_shape,
                    "factors": len(ours.factors), "reference_factors": len(ref.factors),
                    "counts": counts,
                    "ok": shape == ref_shape and len(ours.factors) == len(ref.factors)
                    and all(c["ours"] == c["reference"] for c in counts)})
    return out


def _equivalences(seed: int) -> list[dict]:
    """Point-count equalities between constructions on small vectors."""
    from ._arith import kronecker
    from .pointcount import count_homogeneous, count_points
    from .toric.family import (canonical_model, cayley_model, general_split_pair, quadric_bundle_twist,
                               random_unimodular, substitute_monomials, twist_double_cover)

    rng = random.Random(seed)
    out = []
    q = 7
    ts = sorted(rng.sample(range(1, q), 3))
    for g in ((-2, 1, 1), (-3, 1, 2), (-4, 1, 1, 2), (-6, 1, 2, 3)):
        f = canonical_model(g)
        xs = [v for v in f.variables if v != f.base_variable]
        U = random_unimodular(len(xs), rng)
        h = substitute_monomials(f, xs, U)
        for t in ts:
            a, b = count_points(f, t, q).count, count_points(h, t, q).count
            out.append({"property": "unimodular", "gamma": list(g), "t": t, "ok": a == b})
            a, b = count_points(quadric_bundle_twist(g), t, q).count, count_homogeneous(total_twist_gamma(g), t, q)
            out.append({"property": "quadric-twist", "gamma": list(g), "t": t, "ok": a == b})
            cover = count_points(twist_double_cover(f), t, q).count
            c = m0(g) * t
            chi = kronecker(c.numerator * c.denominator, q)
            out.append({"property": "double-cover", "gamma": list(g), "t": t,
                        "ok": cover == (1 + chi) * count_points(f, t, q).count})
    for parts in (((-2, 1, 1), (-2, 1, 1)), ((-3, 1, 2), (-2, 1, 1))):
        f = general_split_pair(parts)
        whole = canonical_model([x for p in parts for x in p])
        for t in ts:
            ok = count_points(cayley_model(f), t, q).count == count_points(whole, t, q).count
            out.append({"property": "cayley", "parts": [list(p) for p in parts], "t": t, "ok": ok})
    return out


def check_models(seed: int = 0, **_) -> dict:
    from .toric import reduce_to_threefold

    t0 = time.monotonic()
    dims = {}
    for r in classify_all():
        try:
            dims[r.index] = reduce_to_threefold(r.gamma_red).fiber_dim
        except Exception as exc:  # reported, not raised
            dims[r.index] = str(exc)
    bad_dims = {i: d for i, d in dims.items() if d != 3}
    refs = _reference_counts()
    eq = _equivalences(seed)
    ok = not bad_dims and all(r["ok"] for r in refs) and all(e["ok"] for e in eq)
    summary = (f"{len(dims) - len(bad_dims)}/47 threefold families; reference models "
               f"{sum(r['ok'] for r in refs)}/{len(refs)}; equivalences {sum(e['ok'] for e in eq)}/{len(eq)}")
    return _result("models", ok, summary,
                   {"bad_dims": bad_dims, "reference": refs, "equivalences": eq}, t0)


def check_twist_relation(**_) -> dict:
    from .finite import twist_relation

    t0 = time.monotonic()
    recs = classify_all()
    details, ok = [], True
    for a, b in TWIST_PAIRS:
        checks = twist_relation(recs[a - 1].gamma_red, recs[b - 1].gamma_red, 30)
        n_bad = sum(not c.ok for c in checks)
        ok &= n_bad == 0 and bool(checks)
        details.append({"pair": [a, b], "checks": len(checks), "failures": n_bad})
    return _result("twist", ok, f"{sum(d['checks'] for d in details)} character relations", details, t0)


def check_ap(client=None, **_) -> dict:
    from .finite import WeilBoundError, ap_series
    from .lmfdb import LmfdbClient, parse_label

    t0 = time.monotonic()
    client = client or LmfdbClient(offline=True)
    ref = {r["index"]: r for r in load_reference_tables()}
    details, ok = [], True
    for r in classify_all():
        try:
            series = ap_series(r.gamma_red, 50)
        except WeilBoundError as exc:
            ok = False
            details.append({"case": r.index, "error": str(exc)})
            continue
        entry = {"case": r.index, "good_primes": [e.p for e in series if e.good]}
        if r.index in MUM_LABELED:
            label = ref[r.index]["form_label"]
            level = parse_label(label)[0]
            form = next(f for f in client.fetch_newforms(4, level) if f.label == label)
            wrong = [e.p for e in series if e.good and form.coefficients.get(e.p) != e.a_p]
            entry.update(label=label, mismatches=wrong)
            ok &= not wrong
        details.append(entry)
    return _result("ap", ok, "Weil bound at all good p <= 50; MUM fixture coefficients "
                   + ("match" if ok else "disagree"), details, t0)


def check_labels(client=None, **_) -> dict:
    from .lmfdb import AmbiguousMatchError, LmfdbClient, match_case

    t0 = time.monotonic()
    client = client or LmfdbClient(offline=True)
    ref = {r["index"]: r for r in load_reference_tables()}
    details, n_ok = [], 0
    for r in classify_all():
        expected = ref[r.index]["form_label"]
        try:
            found = match_case(r, client)
            label = found.label if found else None
        except AmbiguousMatchError as exc:
            label = f"ambiguous {exc}"
        # a table label ending in "." or "?" is truncated; compare its known prefix
        stem = expected.rstrip("?.") if expected else None
        if expected and "?" in expected:
            good = label is None
        else:
            good = (label is None and expected is None) or bool(label and stem and label.startswith(stem))
        n_ok += good
        details.append({"case": r.index, "expected": expected, "found": label, "ok": good})
    return _result("labels", n_ok == len(details), f"{n_ok}/{len(details)} labels reproduced",
                   details, t0)


CHECKS: dict[str, Callable[..., dict]] = {
    "classify": check_classify,
    "twist-structure": check_twist_structure,
    "gamma": check_gamma,
    "hessian": check_hessian,
    "sums": check_sums,
    "models": check_models,
    "twist": check_twist_relation,
    "ap": check_ap,
    "labels": check_labels,
}


def _run_one(name: str, seed: int, budget: int) -> dict:
    return CHECKS[name](seed=seed, budget=budget)


def run_checks(names: Sequence[str] | None = None, seed: int = 0, budget: int | None = None,
               client=None, workers: int = 1) -> dict:
    names = list(names or CHECKS)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_one, names, [seed] * len(names), [budget] * len(names)))
    else:
        results = [CHECKS[n](seed=seed, budget=budget, client=client) for n in names]
    return {"seed": seed, "ok": all(r["ok"] for r in results), "checks": results}
