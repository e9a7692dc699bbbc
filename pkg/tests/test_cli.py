import csv
import json

import pytest

from fundnet import build_network, write_snapshot
from fundnet.cli import main
from fundnet.synth import SynthSpec, generate

HOLDINGS = """fund_class_id,report_date,asset_id,market_value
C1a,2006-04-10,A1,999
C1a,2006-05-20,A1,30
C1b,2006-05-20,A1,70
C1b,2006-05-20,A2,100
C2,2006-06-01,A2,50
C3,2006-01-15,A3,10
"""


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture
def holdings(tmp_path):
    (tmp_path / "h.csv").write_text(HOLDINGS)
    (tmp_path / "map.csv").write_text("fund_class_id,fund_id\nC1a,F1\nC1b,F1\n")
    return tmp_path


def snapshot(tmp_path, records, name="snap.csv"):
    path = tmp_path / name
    write_snapshot(build_network(records, "2006Q2"), path)
    return path


def test_ingest(holdings, capsys):
    out = holdings / "out"
    assert run("ingest", holdings / "h.csv", "--class-map", holdings / "map.csv",
               "--quarter", "2006Q2", "--out-dir", out) == 0
    stats = json.loads((out / "2006Q2.json").read_text())
    # F1 = {A1: 100, A2: 100}; C2 = {A2: 50}; C3 reports only in Q1.
    assert stats == {"quarter": "2006Q2", "n_funds": 2, "n_assets": 2, "e": 3, "rho": 0.75,
                     "kbar": 1.5, "s_tot": 250.0}
    rows = read_csv(out / "2006Q2.csv")
    assert rows[0] == ["fund_id", "asset_id", "market_value"]
    assert ["F1", "A1", "100.0"] in rows
    manifest = json.loads((out / "ingest.manifest.json").read_text())
    assert set(manifest["outputs"]) == {"2006Q2.csv", "2006Q2.json"}


def test_ingest_empty_quarter(holdings):
    assert run("ingest", holdings / "h.csv", "--quarter", "2007Q1",
               "--out-dir", holdings / "o") == 2


def test_ingest_bad_row(tmp_path):
    (tmp_path / "h.csv").write_text(HOLDINGS + "C9,2006-05-01,A1,-5\n")
    assert run("ingest", tmp_path / "h.csv", "--quarter", "2006Q2", "--out-dir", tmp_path) == 2


def test_stats(tmp_path, capsys):
    snap = snapshot(tmp_path, [("F1", "A1", 60), ("F1", "A2", 40), ("F2", "A2", 100)])
    assert run("stats", snap, "--out-dir", tmp_path / "o") == 0
    assert json.loads(capsys.readouterr().out)["rho"] == 0.75


def test_metrics_toy(tmp_path):
    snap = snapshot(tmp_path, [("F1", "A1", 1), ("F2", "A1", 1), ("F3", "A2", 1)])
    out = tmp_path / "o"
    assert run("metrics", snap, "--pairs", "--out-dir", out) == 0
    means = json.loads((out / "means.json").read_text())
    assert means["jbar"] == pytest.approx(1 / 3)
    assert read_csv(out / "pairs.csv") == [["fund_i", "fund_j", "jaccard", "similarity"],
                                           ["F1", "F2", "1.0", "1.0"]]
    assert read_csv(out / "ccdf_jaccard.csv")[1:] == [["0.0", "1.0"], ["1.0", repr(1 / 3)]]
    for name in ("ccdf_fund_degree", "ccdf_asset_degree", "pdf_fund_degree", "ccdf_h"):
        assert read_csv(out / f"{name}.csv")[0] == ["value", "probability"]


def test_metrics_pairs_gated(tmp_path):
    snap = snapshot(tmp_path, [("F1", "A1", 1), ("F2", "A1", 1)])
    assert run("metrics", snap, "--out-dir", tmp_path / "o") == 0
    assert not (tmp_path / "o" / "pairs.csv").exists()


def test_metrics_single_fund_refused(tmp_path):
    snap = snapshot(tmp_path, [("F1", "A1", 1), ("F1", "A2", 1)])
    assert run("metrics", snap, "--out-dir", tmp_path / "o") == 2


def test_metrics_identical_funds(tmp_path):
    snap = snapshot(tmp_path, [(f, a, 2.0) for f in ("F1", "F2", "F3") for a in ("A", "B")])
    assert run("metrics", snap, "--out-dir", tmp_path / "o") == 0
    assert json.loads((tmp_path / "o" / "means.json").read_text())["sbar"] == pytest.approx(1)


@pytest.fixture
def synth_snap(tmp_path):
    path = tmp_path / "synth.csv"
    write_snapshot(generate(SynthSpec(60, 150, 12, styles=3, kappa=0.5, seed=1)), path)
    return path


def test_randomize_deterministic(tmp_path, synth_snap):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("randomize", synth_snap, "rnd2:42", "--out-dir", a) == 0
    assert run("randomize", synth_snap, "rnd2:42", "--out-dir", b) == 0
    for name in ("rnd2_42.csv", "rnd2_42.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert run("verify", synth_snap, a / "rnd2_42.csv", "--model", "rnd2",
               "--out-dir", a) == 0


def test_randomize_rnd1_verified(tmp_path, synth_snap, capsys):
    assert run("randomize", synth_snap, "rnd1:7", "--out-dir", tmp_path) == 0
    assert run("verify", synth_snap, tmp_path / "rnd1_7.csv", "--model", "rnd1",
               "--out-dir", tmp_path) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["ok"] and report["checks"]["weight_multiset"]


def test_verify_detects_violation(tmp_path, synth_snap):
    assert run("randomize", synth_snap, "rnd1:7", "--out-dir", tmp_path) == 0
    # rnd1 does not keep per-fund degrees.
    assert run("verify", synth_snap, tmp_path / "rnd1_7.csv", "--model", "rnd2",
               "--out-dir", tmp_path) == 1


@pytest.mark.parametrize("spec", ["rnd3:1", "rnd1", "foo"])
def test_randomize_invalid_spec(tmp_path, synth_snap, spec):
    assert run("randomize", synth_snap, spec, "--out-dir", tmp_path) == 2


def test_shock_single_fund(tmp_path):
    snap = snapshot(tmp_path, [("F", "A", 100.0)])
    out = tmp_path / "o"
    assert run("shock", snap, "--asset", "A", "--delta0", "0.5", "--steps", "2",
               "--out-dir", out) == 0
    assert read_csv(out / "trajectory.csv") == [["t", "damage"], ["1", "0.75"], ["2", "0.9375"]]


def test_shock_zero(tmp_path, synth_snap):
    assert run("shock", synth_snap, "--delta0", "0", "--quantile", "0.9", "--per-asset",
               "--price-loss", "--out-dir", tmp_path) == 0
    rows = read_csv(tmp_path / "trajectory.csv")[1:]
    assert len(rows) == 10 and all(float(d) == 0 for _, d in rows)
    per = read_csv(tmp_path / "trajectory_per_asset.csv")
    assert per[0] == ["asset_id", "t", "damage"] and len(per) > 1
    assert (tmp_path / "price_loss.csv").exists()


def test_shock_empty_top_set(tmp_path, capsys):
    snap = snapshot(tmp_path, [("F", f"A{k}", 5.0) for k in range(10)])
    assert run("shock", snap, "--quantile", "0.999", "--out-dir", tmp_path / "o") == 2
    assert "lower quantile" in capsys.readouterr().err


def test_compare(tmp_path, synth_snap):
    out = tmp_path / "o"
    assert run("compare", synth_snap, "--n-seeds", "1", "--quantile", "0.95",
               "--out-dir", out) == 0
    rows = read_csv(out / "compare.csv")
    assert {r[0] for r in rows[1:]} == {"original", "rnd1", "rnd2"}
    assert read_csv(out / "compare_mean.csv")[0] == ["t", "original", "rnd1", "rnd2"]
    assert run("compare", synth_snap, "--n-seeds", "0", "--out-dir", out) == 2


def test_synth_and_byte_identical_reruns(tmp_path):
    args = ["synth", "--n-funds", "40", "--n-assets", "90", "--mean-degree", "8",
            "--kappa", "0.5", "--styles", "3", "--seed", "5"]
    assert run(*args, "--out-dir", tmp_path / "a") == 0
    assert run(*args, "--out-dir", tmp_path / "a2") == 0
    for name in ("synth.csv", "synth.json", "synth_spec.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "a2" / name).read_bytes()
    m1 = json.loads((tmp_path / "a" / "synth.manifest.json").read_text())
    m2 = json.loads((tmp_path / "a2" / "synth.manifest.json").read_text())
    assert m1["outputs"] == m2["outputs"] and m1["seeds"] == [5]


def test_synth_from_spec_file(tmp_path):
    (tmp_path / "spec.json").write_text(json.dumps({"n_funds": 20, "n_assets": 50,
                                                    "mean_degree": 5, "seed": 3}))
    assert run("synth", "--spec", tmp_path / "spec.json", "--out-dir", tmp_path) == 0
    assert run("synth", "--out-dir", tmp_path) == 2
    (tmp_path / "bad.json").write_text(json.dumps({"n_funds": 20, "bogus": 1}))
    assert run("synth", "--spec", tmp_path / "bad.json", "--out-dir", tmp_path) == 2


def test_missing_snapshot(tmp_path):
    assert run("stats", tmp_path / "nope.csv") == 2


def test_manifest_reproduces_run(tmp_path, synth_snap):
    out = tmp_path / "o"
    assert run("metrics", synth_snap, "--out-dir", out) == 0
    manifest = json.loads((out / "metrics.manifest.json").read_text())
    echo = manifest["argv"]
    assert echo["snapshot"] == str(synth_snap) and echo["bins"] == 20
    assert manifest["inputs"][str(synth_snap)]
