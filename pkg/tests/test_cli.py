import json
import subprocess
import sys

import pytest

from conftest import gamble_model
from ltlplan.cli import main
from ltlplan.dra import dump_dra, load_fixture
from ltlplan.model import save_model


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def grid_file(tmp_path):
    path = tmp_path / "surv.json"
    assert run("gen-grid", "--preset", "surveillance", "-o", path) == 0
    return path


def test_gen_grid(tmp_path, capsys):
    path = tmp_path / "g.json"
    assert run("gen-grid", "--width", 5, "--height", 5, "-o", path) == 0
    info = json.loads(capsys.readouterr().out)
    assert (info["states"], info["edges"]) == (100, 816)
    assert json.loads(path.read_text())["format_version"] == 1


def test_gen_grid_needs_size(tmp_path):
    assert run("gen-grid", "--width", 5, "-o", tmp_path / "g.json") == 3


def test_synth_and_simulate(grid_file, tmp_path, capsys):
    pol = tmp_path / "pol.json"
    assert run("synth", "--model", grid_file, "--task", "surveillance", "--gamma", 0, "--beta", 0.5, "-o", pol) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "ok" and report["mode"] == "amec"
    assert report["product"]["states"] == 493
    out = tmp_path / "sim.json"
    hist = tmp_path / "h.csv"
    trace = tmp_path / "trace.jsonl"
    assert run("simulate", "--model", grid_file, "--policy", pol, "--runs", 50, "--steps", 200,
               "--seed", 7, "-o", out, "--histogram", hist, "--trace", trace) == 0
    doc = json.loads(out.read_text())
    assert doc["outcomes"]["failures"] == 0
    assert sum(doc["outcomes"].values()) == 50
    assert hist.read_text().startswith("bin_low,bin_high,count")
    assert len(trace.read_text().splitlines()) == 200


def test_toy_synth_goes_relaxed(tmp_path, capsys):
    from ltlplan.grid import toy_model

    model = tmp_path / "toy.json"
    save_model(toy_model(), model)
    dra = tmp_path / "toy.dra"
    dra.write_text(dump_dra(load_fixture("toy")))
    pol = tmp_path / "pol.json"
    assert run("synth", "--model", model, "--dra", dra, "-o", pol) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mode"] == "relaxed"
    assert report["objective"]["gamma_sufx"] == pytest.approx(0.01)
    assert run("simulate", "--model", model, "--policy", pol, "--runs", 20, "--steps", 50) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["risk_bound"][0]["cycles"] == 0


def test_degenerate_parameters(grid_file, tmp_path):
    assert run("synth", "--model", grid_file, "--task", "surveillance", "--gamma", 1, "--beta", 1,
               "-o", tmp_path / "p.json", "--report", tmp_path / "r.json") == 0
    assert json.loads((tmp_path / "r.json").read_text())["status"] == "ok"


def test_infeasible_exit_code(tmp_path, capsys):
    model = tmp_path / "gamble.json"
    save_model(gamble_model(0.5), model)
    assert run("synth", "--model", model, "--task", "toy", "--gamma", 0.1, "-o", tmp_path / "p.json") == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "infeasible"
    assert doc["min_achievable_risk"] == pytest.approx(0.5)
    assert not (tmp_path / "p.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["synth", "--model", "missing.json", "--task", "toy", "-o", "p.json"],
        ["synth", "--model", "{grid}", "--task", "toy", "--gamma", "1.5", "-o", "p.json"],
        ["synth", "--model", "{grid}", "-o", "p.json"],
        ["synth", "--model", "{grid}", "--dra", "{bad}", "-o", "p.json"],
        ["simulate", "--model", "{grid}", "--policy", "{bad}"],
        ["simulate", "--model", "{grid}", "--policy", "{grid}", "--runs", "0"],
        ["nonsense"],
    ],
)
def test_input_errors_exit_3(argv, grid_file, tmp_path, capsys):
    bad = tmp_path / "bad.dra"
    bad.write_text("not an automaton\n")
    argv = [a.format(grid=grid_file, bad=bad) for a in argv]
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == 3


def test_policy_for_other_model_is_rejected(grid_file, tmp_path, capsys):
    pol = tmp_path / "pol.json"
    assert run("synth", "--model", grid_file, "--task", "surveillance", "-o", pol) == 0
    other = tmp_path / "other.json"
    run("gen-grid", "--preset", "clustered", "-o", other)
    assert run("simulate", "--model", other, "--policy", pol) == 3
    assert "fingerprint" in capsys.readouterr().err


def test_reruns_are_byte_identical(grid_file, tmp_path):
    outs = []
    for i in range(2):
        pol, rep, sim = (tmp_path / f"{n}{i}.json" for n in ("pol", "rep", "sim"))
        assert run("synth", "--model", grid_file, "--task", "surveillance", "-o", pol, "--report", rep) == 0
        assert run("simulate", "--model", grid_file, "--policy", pol, "--runs", 100, "--steps", 100,
                   "--seed", 3, "-o", sim) == 0
        outs.append([p.read_bytes() for p in (pol, rep, sim)])
    assert outs[0] == outs[1]


def test_inspect_and_exports(grid_file, tmp_path, capsys):
    assert run("inspect", "--model", grid_file, "--task", "surveillance",
               "--export", "dot", "--export", "prism", "--export-dir", tmp_path) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["product"]["states"] == 493 and doc["amecs"] == [348]
    assert (tmp_path / "product.dot").read_text().startswith("digraph product {")
    prism = (tmp_path / "product.prism").read_text()
    assert "mdp" in prism.splitlines() and 'rewards "cost"' in prism
    assert run("inspect", "--model", grid_file, "--task", "surveillance", "--empty-goal") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["partition"]["goal"] == 0 and doc["partition"]["normal"] == 0
    assert run("inspect", "--model", grid_file, "--task", "surveillance", "--export", "lp",
               "--export-dir", tmp_path) == 3


def test_synth_lp_export(grid_file, tmp_path, capsys):
    assert run("synth", "--model", grid_file, "--task", "surveillance", "-o", tmp_path / "p.json",
               "--export", "lp", "--export-dir", tmp_path, "--timings") == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["timings_s"]) == {"load", "product", "components", "synthesis"}
    text = (tmp_path / "combined.lp").read_text()
    assert text.splitlines()[1] == "Minimize" and " reach: " in text


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "ltlplan.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
