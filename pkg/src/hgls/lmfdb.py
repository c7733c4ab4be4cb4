"""Client for weight-4 rational newforms, with a content-addressed disk cache.

Responses are stored as JSON files named by a hash of (endpoint, query).
The bundled fixtures use the same format, so a fixture directory can serve
as a read-only cache and the matching code never needs the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ._arith import primes_upto

__all__ = [
    "AmbiguousMatchError",
    "DEFAULT_BASE_URL",
    "DEFAULT_LEVEL_BOUND",
    "LmfdbClient",
    "MalformedResponseError",
    "NetworkUnavailableError",
    "NewformRecord",
    "cache_key",
    "candidate_levels",
    "fixture_dir",
    "label_records",
    "level_primes",
    "match_case",
    "match_form",
    "parse_label",
]

log = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://www.lmfdb.org"
DEFAULT_LEVEL_BOUND = 2000
ENDPOINT = "/api/mf_newforms/"
FIELDS = "label,level,weight,char_orbit_label,dim,traces"
COEFF_BOUND = 100

_LABEL = re.compile(r"^(\d+)\.(\d+)\.([a-z]+)\.([a-z]+)$")


class NetworkUnavailableError(ConnectionError):
    pass


class MalformedResponseError(ValueError):
    pass


class AmbiguousMatchError(LookupError):
    def __init__(self, labels: Sequence[str]):
        super().__init__(f"several newforms fit: {', '.join(labels)}")
        self.labels = list(labels)


def parse_label(label: str) -> tuple[int, int, str, str]:
    m = _LABEL.match(label)
    if not m:
        raise ValueError(f"bad newform label {label!r}")
    return int(m.group(1)), int(m.group(2)), m.group(3), m.group(4)


@dataclass(frozen=True)
class NewformRecord:
    label: str
    level: int
    weight: int
    coefficients: dict[int, int] = field(hash=False, compare=False)

    def __post_init__(self):
        N, k, _, _ = parse_label(self.label)
        if N != self.level or k != self.weight:
            raise MalformedResponseError(f"label {self.label} disagrees with level/weight")

    def ap(self, p: int) -> int:
        return self.coefficients[p]

    @classmethod
    def from_api(cls, row: dict) -> "NewformRecord":
        try:
            traces = row["traces"]
            # traces[n - 1] is the trace of a_n; dimension-1 forms give a_n itself
            coeffs = {p: int(traces[p - 1]) for p in primes_upto(min(len(traces), COEFF_BOUND))}
            return cls(row["label"], int(row["level"]), int(row["weight"]), coeffs)
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise MalformedResponseError(f"bad newform row: {exc}") from exc


def cache_key(endpoint: str, query: dict) -> str:
    blob = json.dumps({"endpoint": endpoint, "query": query}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def fixture_dir() -> Path:
    return Path(str(resources.files("hgls.data").joinpath("lmfdb_fixtures")))


def level_query(level: int, weight: int = 4) -> dict:
    return {"level": str(level), "weight": str(weight), "char_order": "1", "dim": "1",
            "_format": "json", "_fields": FIELDS, "_limit": "1000"}


class LmfdbClient:
    """Sequential, cached access to the newform API.

    Lookups try the cache directory, then the fixture directories, then the
    network (unless ``offline``). Network calls are serialized by a lock and
    spaced by ``delay`` seconds, with one retry.
    """

    def __init__(self, base_url: str | None = None, cache_dir: str | os.PathLike | None = None,
                 fixture_dirs: Iterable[str | os.PathLike] | None = None,
                 delay: float | None = None, offline: bool | None = None, timeout: float = 30.0):
        env = os.environ
        self.base_url = (base_url or env.get("HGLS_LMFDB_URL") or DEFAULT_BASE_URL).rstrip("/")
        cache = cache_dir or env.get("HGLS_CACHE_DIR")
        self.cache_dir = Path(cache) if cache else None
        self.fixture_dirs = [Path(d) for d in fixture_dirs] if fixture_dirs is not None else [fixture_dir()]
        self.delay = float(env.get("HGLS_LMFDB_DELAY", 1.0)) if delay is None else delay
        if offline is None:
            offline = env.get("HGLS_OFFLINE", "") not in ("", "0")
        self.offline = offline
        self.timeout = timeout
        self.network_requests = 0
        self._lock = threading.Lock()
        self._last = 0.0
        self._memo: dict[str, dict] = {}

    def _read(self, key: str) -> dict | None:
        if key in self._memo:
            return self._memo[key]
        dirs = ([self.cache_dir] if self.cache_dir else []) + self.fixture_dirs
        for d in dirs:
            path = d / f"{key}.json"
            if path.is_file():
                data = json.loads(path.read_text())
                self._memo[key] = data
                return data
        return None

    def _write(self, key: str, data: dict):
        self._memo[key] = data
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            tmp = self.cache_dir / f".{key}.tmp"
            tmp.write_text(json.dumps(data, sort_keys=True))
            tmp.replace(self.cache_dir / f"{key}.json")

    def _fetch(self, endpoint: str, query: dict) -> dict:
        if self.offline:
            raise NetworkUnavailableError(f"no cached response for {endpoint} {query} and offline mode is on")
        import requests

        url = self.base_url + endpoint
        with self._lock:
            last_exc: Exception | None = None
            for attempt in range(2):
                wait = self._last + self.delay - time.monotonic()
                if wait > 0:
                    time.sleep(wait)
                try:
                    self.network_requests += 1
                    resp = requests.get(url, params=query, timeout=self.timeout)
                    self._last = time.monotonic()
                    resp.raise_for_status()
                    return resp.json()
                except requests.exceptions.JSONDecodeError as exc:
                    raise MalformedResponseError(f"non-JSON reply from {url}") from exc
                except requests.exceptions.RequestException as exc:
                    log.warning("request %s failed (attempt %d): %s", url, attempt + 1, exc)
                    last_exc = exc
                    self._last = time.monotonic()
            raise NetworkUnavailableError(f"could not reach {url}: {last_exc}") from last_exc

    def get(self, endpoint: str, query: dict) -> dict:
        key = cache_key(endpoint, query)
        data = self._read(key)
        if data is None:
            data = self._fetch(endpoint, query)
            self._write(key, data)
        return data

    def fetch_newforms(self, weight: int = 4, level: int | Iterable[int] = 1) -> list[NewformRecord]:
        levels = [level] if isinstance(level, int) else list(level)
        out: list[NewformRecord] = []
        for N in levels:
            data = self.get(ENDPOINT, level_query(N, weight))
            rows = data.get("data") if isinstance(data, dict) else None
            if rows is None:
                raise MalformedResponseError(f"response for level {N} has no 'data' list")
            out.extend(NewformRecord.from_api(r) for r in rows)
        return out


def candidate_levels(primes: Iterable[int], bound: int = DEFAULT_LEVEL_BOUND) -> list[int]:
    """All levels <= bound whose prime factors lie in ``primes``."""
    levels = {1}
    for p in sorted(set(primes)):
        grown = set(levels)
        for n in levels:
            m = n * p
            while m <= bound:
                grown.add(m)
                m *= p
        levels = grown
    return sorted(levels)


def _coefficients_of(aps) -> dict[int, int]:
    if isinstance(aps, dict):
        return {int(p): int(a) for p, a in aps.items()}
    out = {}
    for e in aps:
        if getattr(e, "good", True) and e.a_p is not None:
            out[e.p] = e.a_p
    return out


def match_form(aps, client: LmfdbClient | None = None, primes: Iterable[int] | None = None,
               bound: int = DEFAULT_LEVEL_BOUND, min_primes: int = 5) -> NewformRecord | None:
    """The unique rational weight-4 newform agreeing with ``aps`` at every supplied prime.

    ``primes`` are the primes allowed in the level (default: those below 6).
    Returns None when nothing fits; raises AmbiguousMatchError on several fits.
    """
    coeffs = _coefficients_of(aps)
    if len(coeffs) < min_primes:
        raise ValueError(f"need at least {min_primes} good-prime coefficients, got {len(coeffs)}")
    client = client or LmfdbClient()
    levels = candidate_levels(primes or (2, 3, 5), bound)
    hits = []
    for f in client.fetch_newforms(4, levels):
        if all(p in f.coefficients and f.coefficients[p] == a for p, a in coeffs.items()):
            hits.append(f)
    if not hits:
        return None
    if len(hits) > 1:
        raise AmbiguousMatchError([f.label for f in hits])
    return hits[0]


def level_primes(g: Iterable[int]) -> list[int]:
    """Primes dividing some entry of the gamma vector; the level is assumed supported on them."""
    from sympy import primefactors

    return sorted({p for x in g for p in primefactors(abs(int(x)))})


def match_case(case, client: LmfdbClient | None = None, max_prime: int = 50,
               bound: int = DEFAULT_LEVEL_BOUND) -> NewformRecord | None:
    """Compute a_p at the conifold for a case and look up the matching newform."""
    from .finite import ap_series

    g = case.gamma_red if hasattr(case, "gamma_red") else case
    series = ap_series(g, max_prime)
    return match_form(series, client, primes=level_primes(g), bound=bound)


def label_records(records, client: LmfdbClient | None = None, max_prime: int = 50,
                  bound: int = DEFAULT_LEVEL_BOUND) -> list:
    """Copies of the case records with ``form_label`` filled in (None when no form fits)."""
    client = client or LmfdbClient()
    out = []
    for r in records:
        try:
            f = match_case(r, client, max_prime, bound)
        except AmbiguousMatchError:
            f = None
        out.append(r.with_label(f.label if f else None))
    return out
