"""Command-line front end: ``hgls <command> ...``.

Exit codes: 0 success, 1 bad input, 2 verification failure, 3 network needed
but unavailable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .classify import ClassificationError, classify_all, compare_to_reference, emit_tables
from .gamma import GammaVector, format_gamma, parse_gamma, splittings
from .lmfdb import LmfdbClient, NetworkUnavailableError

log = logging.getLogger("hgls")

EXIT_OK, EXIT_FAIL, EXIT_NETWORK = 0, 2, 3


@dataclass
class Config:
    cache_dir: str | None = None
    lmfdb_url: str | None = None
    precision_digits: int = 30
    enumeration_budget: int = 10 ** 8
    offline: bool = False
    workers: int = 1

    def validate(self):
        if self.enumeration_budget <= 0:
            raise ValueError("enumeration_budget must be positive")
        if self.precision_digits < 15:
            raise ValueError("precision_digits must be at least 15")


_ENV = {
    "HGLS_CACHE_DIR": ("cache_dir", str),
    "HGLS_LMFDB_URL": ("lmfdb_url", str),
    "HGLS_PRECISION": ("precision_digits", int),
    "HGLS_BUDGET": ("enumeration_budget", int),
    "HGLS_OFFLINE": ("offline", lambda s: s not in ("", "0", "false")),
    "HGLS_WORKERS": ("workers", int),
}


def load_config(path: str | os.PathLike | None = None, env: dict | None = None) -> Config:
    """JSON config file (keys are Config fields), then HGLS_* environment overrides."""
    cfg = Config()
    env = os.environ if env is None else env
    path = path or env.get("HGLS_CONFIG")
    if path:
        data = json.loads(Path(path).read_text())
        unknown = set(data) - set(asdict(cfg))
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for var, (name, conv) in _ENV.items():
        if var in env:
            setattr(cfg, name, conv(env[var]))
    cfg.validate()
    return cfg


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


_RECORDS = None


def _records():
    global _RECORDS
    if _RECORDS is None:
        _RECORDS = classify_all()
    return _RECORDS


def _case(arg: str):
    """A case index (1..47) or a literal gamma vector."""
    arg = arg.strip()
    if arg.isdigit():
        i = int(arg)
        recs = _records()
        if not 1 <= i <= len(recs):
            raise SystemExit(f"unknown case {i}: expected 1..{len(recs)}")
        return recs[i - 1], recs[i - 1].gamma_red
    return None, parse_gamma(arg)


def _client(cfg: Config, offline: bool | None = None) -> LmfdbClient:
    return LmfdbClient(base_url=cfg.lmfdb_url, cache_dir=cfg.cache_dir,
                       offline=cfg.offline if offline is None else offline)


# commands


def cmd_classify(args, cfg: Config) -> int:
    try:
        recs = classify_all()
    except ClassificationError as exc:
        print(exc, file=sys.stderr)
        return EXIT_FAIL
    if args.labels:
        from .lmfdb import label_records

        try:
            recs = label_records(recs, _client(cfg))
        except NetworkUnavailableError as exc:
            print(exc, file=sys.stderr)
            return EXIT_NETWORK
    out = emit_tables(recs, args.format)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    if args.verify_against:
        ref = json.loads(Path(args.verify_against).read_text())
        problems = compare_to_reference(recs, ref, labels=args.labels)
        for p in problems:
            print(p, file=sys.stderr)
        if problems:
            return EXIT_FAIL
        print(f"verified {len(recs)} rows against {args.verify_against}", file=sys.stderr)
    return EXIT_OK


def case_info(rec) -> dict:
    from .toric.planner import candidate_plans

    g = rec.gamma_red
    sp = splittings(g, min_parts=2)
    max_s = max((s.s for s in sp), default=1)
    plans = candidate_plans(g)
    info = {
        "index": rec.index,
        "alpha": [str(x) for x in rec.params.alpha],
        "beta": [str(x) for x in rec.params.beta],
        "gamma_red": format_gamma(g),
        "mum": rec.is_mum,
        "D": rec.D,
        "E": rec.E,
        "M0": str(rec.m0),
        "twist_partner": rec.twist_partner,
        "self_twist": rec.self_twist,
        "splittings": len(sp),
        "max_parts": max_s,
        "threefold_plan": plans[0].describe() if plans else None,
    }
    return info


def cmd_info(args, cfg: Config) -> int:
    rec, g = _case(args.case)
    if rec is None:
        raise SystemExit("info takes a case index")
    info = case_info(rec)
    if args.json:
        sys.stdout.write(_dump(info))
        return EXIT_OK
    lines = [
        f"case {info['index']}" + (" (MUM)" if info["mum"] else ""),
        f"  alpha = ({', '.join(info['alpha'])})",
        f"  beta  = ({', '.join(info['beta'])})",
        f"  gamma_red = {info['gamma_red']}",
        f"  M0 = {info['M0']}",
        f"  D = {info['D']}, E = {info['E']}",
        "  self-twist" if info["self_twist"] else f"  twist partner: case {info['twist_partner']}",
        f"  splittings: {info['splittings']}; largest has s = {info['max_parts']}"
        + (f" (no {info['max_parts'] + 1}-part splitting)" if info["splittings"] else ""),
        f"  threefold plan: {info['threefold_plan']}",
    ]
    print("\n".join(lines))
    return EXIT_OK


def _build_model(g: GammaVector, kind: str):
    from .toric import canonical_model, gcd_pair, quadric_bundle_twist, reduce_to_threefold

    if kind == "reduced":
        return reduce_to_threefold(g)
    if kind == "quadric":
        return quadric_bundle_twist(g)
    return canonical_model(g) if g.gcd == 1 else gcd_pair(g)


def cmd_model(args, cfg: Config) -> int:
    _, g = _case(args.case)
    kind = "reduced" if args.reduce_to else args.model
    if args.reduce_to and args.reduce_to != 3:
        raise SystemExit("only --reduce-to 3 is supported")
    f = _build_model(g, kind)
    if args.format == "latex":
        print(f.to_latex())
    else:
        sys.stdout.write(_dump(f.to_json()))
    return EXIT_OK


def cmd_count(args, cfg: Config) -> int:
    from .pointcount import BudgetExceededError, count_points

    _, g = _case(args.case)
    f = _build_model(g, args.model)
    try:
        res = count_points(f, args.t, args.q, budget=cfg.enumeration_budget)
    except BudgetExceededError as exc:
        print(exc, file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        sys.stdout.write(_dump(res.to_json()))
    else:
        flag = " (conifold)" if res.conifold else ""
        print(f"q = {res.q}, t = {res.t}{flag}: {res.count} points on {res.model_id}")
    return EXIT_OK


def cmd_ap(args, cfg: Config) -> int:
    from ._arith import primes_upto
    from .finite import BadPrimeError, ap_series, frobenius_trace, is_good_prime

    _, g = _case(args.case)
    if args.t != 1:
        rows = []
        for p in primes_upto(args.primes):
            good, why = is_good_prime(g, p, args.t)
            try:
                tr = frobenius_trace(g, args.t, p) if good else None
            except BadPrimeError as exc:
                tr, why = None, str(exc)
            rows.append({"p": p, "trace": tr, "good": tr is not None, "reason": why})
        if args.json:
            sys.stdout.write(_dump(rows))
        else:
            for r in rows:
                print(f"p = {r['p']:>3}: " + (str(r["trace"]) if r["good"] else f"bad ({r['reason']})"))
        return EXIT_OK
    series = ap_series(g, args.primes)
    if args.json:
        sys.stdout.write(_dump([e.to_json() for e in series]))
    else:
        for e in series:
            if e.good:
                print(f"p = {e.p:>3}: a_p = {e.a_p:>8}, sigma = {e.sigma_p:+d}")
            else:
                print(f"p = {e.p:>3}: bad ({e.reason})")
    return EXIT_OK


def cmd_match(args, cfg: Config) -> int:
    from .lmfdb import AmbiguousMatchError, match_case

    _, g = _case(args.case)
    client = _client(cfg, offline=True if args.offline else None)
    try:
        rec = match_case(g, client, max_prime=args.max_prime, bound=args.bound)
    except NetworkUnavailableError as exc:
        print(exc, file=sys.stderr)
        return EXIT_NETWORK
    except AmbiguousMatchError as exc:
        print(exc, file=sys.stderr)
        return EXIT_FAIL
    out = {"gamma": list(g), "label": rec.label if rec else None}
    if args.json:
        sys.stdout.write(_dump(out))
    else:
        print(out["label"] or f"no rational weight-4 newform of level <= {args.bound} matches")
    return EXIT_OK


def cmd_verify(args, cfg: Config) -> int:
    from .verify import CHECKS, run_checks

    names = args.only or list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise SystemExit(f"unknown check(s) {unknown}; choose from {sorted(CHECKS)}")
    results = run_checks(names, seed=args.seed, budget=cfg.enumeration_budget,
                         client=_client(cfg, offline=True), workers=cfg.workers)
    if args.json:
        sys.stdout.write(_dump(results))
    else:
        for r in results["checks"]:
            print(f"{'PASS' if r['ok'] else 'FAIL'} {r['name']}: {r['summary']}")
    return EXIT_OK if results["ok"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hgls", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--workers", type=int, help="worker processes for verify")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="the 47 rank-4 cases")
    p.add_argument("--format", choices=("md", "csv", "json"), default="md")
    p.add_argument("--out")
    p.add_argument("--verify-against", metavar="TABLES_JSON")
    p.add_argument("--labels", action="store_true", help="attach newform labels (uses the cache/fixtures)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("info", help="invariants of one case")
    p.add_argument("case")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("model", help="toric model of a case or gamma vector")
    p.add_argument("case")
    p.add_argument("--reduce-to", type=int)
    p.add_argument("--model", choices=("canonical", "reduced", "quadric"), default="canonical")
    p.add_argument("--format", choices=("latex", "json"), default="json")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("count", help="F_q points of a fiber")
    p.add_argument("case")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--model", choices=("canonical", "reduced", "quadric"), default="canonical")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("ap", help="conifold a_p (or traces at another t)")
    p.add_argument("case")
    p.add_argument("--primes", type=int, default=50, help="largest prime")
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ap)

    p = sub.add_parser("match", help="find the newform with the conifold a_p")
    p.add_argument("case")
    p.add_argument("--max-prime", type=int, default=50)
    p.add_argument("--bound", type=int, default=2000, help="largest level searched")
    p.add_argument("--offline", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("verify", help="run the property checks")
    p.add_argument("--only", action="append", help="restrict to a check (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    if args.workers:
        cfg.workers = args.workers
    try:
        return args.func(args, cfg)
    except (ValueError, ArithmeticError, LookupError) as exc:
        print(f"hgls: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
