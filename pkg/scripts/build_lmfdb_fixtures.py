"""Regenerate the offline newform fixtures with PARI/GP.

For each 5-smooth level N <= bound, compute the rational weight-4 newforms
of trivial character, label the Galois orbits the way the database does
(dimension first, then the trace sequence lexicographically, so rational
forms take the first letters), and write one response file per level in
the client's cache format.

Requires the optional ``cypari`` dependency:  pip install cypari
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from cypari import pari

from hgls.lmfdb import COEFF_BOUND, ENDPOINT, cache_key, candidate_levels, fixture_dir, level_query


def orbit_letters(n: int) -> str:
    """0 -> a, 25 -> z, 26 -> ba (base 26 with a = 0)."""
    s = ""
    while True:
        s = chr(ord("a") + n % 26) + s
        n //= 26
        if n == 0:
            return s


def rational_newforms(N: int, weight: int = 4) -> list[list[int]]:
    mf = pari(f"mfinit([{N},{weight}],0)")
    if int(pari.mfdim(mf)) == 0:
        return []
    fields = pari.mffields(mf)
    basis = pari.mfeigenbasis(mf)
    out = []
    for f, P in zip(basis, fields):
        if int(pari.poldegree(P)) == 1:
            out.append([int(c) for c in pari.mfcoefs(f, COEFF_BOUND)][1:])
    out.sort()
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bound", type=int, default=2000)
    ap.add_argument("--out", type=Path, default=fixture_dir())
    ap.add_argument("--stack", type=int, default=4 * 10**9, help="PARI stack size in bytes")
    args = ap.parse_args(argv)

    pari.allocatemem(args.stack)
    args.out.mkdir(parents=True, exist_ok=True)
    index = {}
    for N in candidate_levels((2, 3, 5), args.bound):
        t0 = time.time()
        forms = rational_newforms(N)
        rows = [{"label": f"{N}.4.a.{orbit_letters(i)}", "level": N, "weight": 4,
                 "char_orbit_label": "a", "dim": 1, "traces": tr}
                for i, tr in enumerate(forms)]
        key = cache_key(ENDPOINT, level_query(N))
        (args.out / f"{key}.json").write_text(json.dumps({"data": rows}, sort_keys=True))
        index[N] = {"key": key, "labels": [r["label"] for r in rows]}
        print(f"level {N}: {len(rows)} rational forms ({time.time() - t0:.1f}s)", file=sys.stderr)
    (args.out / "index.json").write_text(json.dumps(
        {"source": "PARI/GP " + str(pari.version()), "levels": index}, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
