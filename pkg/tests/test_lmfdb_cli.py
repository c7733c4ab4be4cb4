import json
import subprocess
import sys

import pytest
import requests

from hgls import cli
from hgls.lmfdb import (
    ENDPOINT,
    AmbiguousMatchError,
    LmfdbClient,
    MalformedResponseError,
    NetworkUnavailableError,
    NewformRecord,
    cache_key,
    candidate_levels,
    level_primes,
    level_query,
    match_form,
    parse_label,
)


def _row(label, traces):
    N, k, _, _ = parse_label(label)
    return {"label": label, "level": N, "weight": k, "char_orbit_label": "a", "dim": 1, "traces": traces}


class _Resp:
    def __init__(self, payload, status=200):
        self.payload, self.status_code = payload, status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.exceptions.HTTPError(str(self.status_code))

    def json(self):
        return self.payload


def test_parse_label():
    assert parse_label("27.4.a.a") == (27, 4, "a", "a")
    with pytest.raises(ValueError):
        parse_label("27.4.a")


def test_newform_record_from_api():
    rec = NewformRecord.from_api(_row("8.4.a.a", [1, 0, -4, 0, -2, 0, 24]))
    assert rec.coefficients == {2: 0, 3: -4, 5: -2, 7: 24}
    with pytest.raises(MalformedResponseError):
        NewformRecord.from_api({"label": "8.4.a.a"})
    with pytest.raises(MalformedResponseError):
        NewformRecord.from_api(dict(_row("8.4.a.a", [1, 0]), level=9))


def test_cache_key_is_stable():
    assert cache_key("/x", {"a": 1, "b": 2}) == cache_key("/x", {"b": 2, "a": 1})
    assert cache_key("/x", {"a": 1}) != cache_key("/y", {"a": 1})


def test_candidate_levels():
    levels = candidate_levels([2, 3], 50)
    assert levels == sorted(levels)
    assert 48 in levels and 10 not in levels and 64 not in levels


def test_level_primes():
    assert level_primes([-6, -1, 2, 5]) == [2, 3, 5]


def test_offline_without_cache_raises(tmp_path):
    c = LmfdbClient(cache_dir=tmp_path, fixture_dirs=[], offline=True)
    with pytest.raises(NetworkUnavailableError):
        c.fetch_newforms(4, 8)


def test_network_fetch_is_cached(tmp_path, monkeypatch):
    calls = []

    def fake_get(url, params, timeout):
        calls.append(params)
        return _Resp({"data": [_row("8.4.a.a", [1, 0, -4, 0, -2, 0, 24])]})

    monkeypatch.setattr(requests, "get", fake_get)
    c = LmfdbClient(base_url="http://example.invalid", cache_dir=tmp_path, fixture_dirs=[], delay=0, offline=False)
    forms = c.fetch_newforms(4, 8)
    assert [f.label for f in forms] == ["8.4.a.a"]
    again = LmfdbClient(cache_dir=tmp_path, fixture_dirs=[], offline=True).fetch_newforms(4, 8)
    assert again == forms and len(calls) == 1 and c.network_requests == 1


def test_network_failure_retries_then_raises(tmp_path, monkeypatch):
    n = []

    def boom(url, params, timeout):
        n.append(1)
        raise requests.exceptions.ConnectionError("down")

    monkeypatch.setattr(requests, "get", boom)
    c = LmfdbClient(cache_dir=tmp_path, fixture_dirs=[], delay=0, offline=False)
    with pytest.raises(NetworkUnavailableError):
        c.fetch_newforms(4, 8)
    assert len(n) == 2


def test_malformed_payload(tmp_path, monkeypatch):
    monkeypatch.setattr(requests, "get", lambda url, params, timeout: _Resp({"nope": 1}))
    c = LmfdbClient(cache_dir=tmp_path, fixture_dirs=[], delay=0, offline=False)
    with pytest.raises(MalformedResponseError):
        c.fetch_newforms(4, 8)


def test_match_form_unique_none_and_ambiguous(tmp_path):
    forms = [_row("2.4.a.a", [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13]),
             _row("4.4.a.a", [1, 0, 3, 0, 5, 0, 7, 0, 0, 0, 11, 0, 13])]
    for level, rows in ((1, []), (2, forms[:1]), (4, forms[1:])):
        key = cache_key(ENDPOINT, level_query(level))
        (tmp_path / f"{key}.json").write_text(json.dumps({"data": rows}))
    c = LmfdbClient(fixture_dirs=[tmp_path], offline=True)
    aps = {3: 3, 5: 5, 7: 7, 11: 11, 13: 13}
    with pytest.raises(AmbiguousMatchError):
        match_form(aps, c, primes=[2], bound=4)
    assert match_form({**aps, 3: 4}, c, primes=[2], bound=4) is None
    assert match_form(aps, c, primes=[2], bound=2).label == "2.4.a.a"
    with pytest.raises(ValueError):
        match_form({3: 3}, c, primes=[2], bound=4)


# command line


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_formats(capsys, tmp_path):
    code, out, _ = run(capsys, "classify", "--format", "md")
    assert code == 0 and sum(line.startswith("| ") for line in out.splitlines()) == 47 + 2
    code, out, _ = run(capsys, "classify", "--format", "json")
    assert code == 0 and len(json.loads(out)) == 47
    target = tmp_path / "t.csv"
    code, _, _ = run(capsys, "classify", "--format", "csv", "--out", str(target))
    assert code == 0 and len(target.read_text().splitlines()) == 48


def test_classify_verify_against(capsys, tmp_path):
    from importlib import resources

    ref = json.loads(resources.files("hgls.data").joinpath("tables.json").read_text())
    good = tmp_path / "tables.json"
    good.write_text(json.dumps(ref))
    assert run(capsys, "classify", "--verify-against", str(good))[0] == 0
    ref[0]["E"] = 5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(ref))
    code, _, err = run(capsys, "classify", "--verify-against", str(bad))
    assert code == 2 and "case 1" in err


def test_classify_with_labels(capsys):
    code, out, _ = run(capsys, "classify", "--format", "json", "--labels")
    assert code == 0
    labels = {r["index"]: r["form_label"] for r in json.loads(out)}
    assert labels[1] == "8.4.a.a" and labels[38] is None


def test_info(capsys):
    code, out, _ = run(capsys, "info", "28")
    assert code == 0 and "M0 = -27/4" in out
    assert "no 5-part splitting" in run(capsys, "info", "41")[1]
    assert "self-twist" in run(capsys, "info", "1")[1]
    info = json.loads(run(capsys, "info", "30", "--json")[1])
    assert info["self_twist"] and info["threefold_plan"]
    with pytest.raises(SystemExit):
        cli.main(["info", "48"])


def test_model_and_count(capsys):
    code, out, _ = run(capsys, "model", "28", "--reduce-to", "3", "--format", "latex")
    assert code == 0 and "\\frac{4 u}{27}" in out
    code, out, _ = run(capsys, "model", "-3 1 2", "--format", "json")
    assert code == 0 and json.loads(out)["provenance"]["kind"] == "canonical"
    code, out, _ = run(capsys, "count", "-2 1 1", "--q", "7", "--t", "3", "--json")
    assert code == 0 and json.loads(out)["count"] >= 0
    code, out, _ = run(capsys, "count", "28", "--q", "5", "--t", "2", "--model", "reduced")
    assert code == 0 and "points" in out


def test_count_budget(capsys, monkeypatch):
    monkeypatch.setenv("HGLS_BUDGET", "10")
    assert run(capsys, "count", "-5 1 1 1 1 1", "--q", "13", "--t", "2")[0] == 2


def test_ap(capsys):
    code, out, _ = run(capsys, "ap", "1", "--primes", "13", "--json")
    rows = json.loads(out)
    assert code == 0 and {r["p"]: r["a_p"] for r in rows if r["good"]} == {3: -4, 5: -2, 7: 24, 11: -44, 13: 22}
    code, out, _ = run(capsys, "ap", "1", "--primes", "7", "--t", "2")
    assert code == 0 and "p =   3" in out


def test_match(capsys, monkeypatch):
    code, out, _ = run(capsys, "match", "5", "--json")
    assert code == 0 and json.loads(out)["label"] == "27.4.a.a"
    assert run(capsys, "match", "47")[0] == 0

    def no_fixtures(self, *a, **k):
        raise NetworkUnavailableError("offline")

    monkeypatch.setattr(LmfdbClient, "fetch_newforms", no_fixtures)
    assert run(capsys, "match", "5", "--offline")[0] == 3


def test_bad_input_exit_code(capsys):
    code, _, err = run(capsys, "match", "-7 1 1 1 1 1 1 1")
    assert code == 1 and "error" in err


def test_verify_only_and_seed(capsys):
    code, out, _ = run(capsys, "verify", "--only", "gamma", "--only", "hessian", "--json", "--seed", "2")
    doc = json.loads(out)
    assert code == 0 and [c["name"] for c in doc["checks"]] == ["gamma", "hessian"]
    assert run(capsys, "verify", "--only", "gamma", "--json", "--seed", "2")[1] == \
        run(capsys, "verify", "--only", "gamma", "--json", "--seed", "2")[1]
    with pytest.raises(SystemExit):
        cli.main(["verify", "--only", "nope"])


def test_verify_failure_exit_code(capsys, monkeypatch):
    from hgls import verify

    monkeypatch.setitem(verify.CHECKS, "gamma", lambda **_: {"name": "gamma", "ok": False, "summary": "x",
                                                            "details": []})
    assert run(capsys, "verify", "--only", "gamma")[0] == 2


def test_config_file_and_env(tmp_path, monkeypatch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"precision_digits": 40, "enumeration_budget": 1000}))
    cfg = cli.load_config(path, env={})
    assert (cfg.precision_digits, cfg.enumeration_budget) == (40, 1000)
    cfg = cli.load_config(path, env={"HGLS_BUDGET": "7", "HGLS_OFFLINE": "1"})
    assert cfg.enumeration_budget == 7 and cfg.offline
    with pytest.raises(ValueError):
        cli.load_config(None, env={"HGLS_PRECISION": "10"})
    path.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ValueError):
        cli.load_config(path, env={})


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hgls", "info", "1", "--json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["self_twist"] is True
