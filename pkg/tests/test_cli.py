"""Command line surface: outputs, exit codes, config handling, determinism."""
import json
import subprocess

import pytest

from ektlab.cli import main


def run(*argv):
    return main(list(argv))


def test_helicoid_umbrella_report(tmp_path):
    out = tmp_path / "o"
    assert run("helicoid", "--mu", "0", "--out", str(out)) == 0
    rep = json.loads((out / "helicoid_mu_0.json").read_text())
    assert rep["special"] == "umbrella"
    assert rep["t_mu"] == "inf"
    assert rep["minimality_residual"] < 1e-6
    csv = (out / "helicoid_mu_0.csv").read_text().splitlines()
    assert csv[0].startswith("# mu=")
    assert "v,f,h" in csv[:5]


def test_helicoid_horizontal_member_has_no_first_integral(tmp_path):
    out = tmp_path / "o"
    assert run("helicoid", "--mu", "0.5", "--out", str(out)) == 0
    rep = json.loads((out / "helicoid_mu_0.5.json").read_text())
    assert rep["special"] == "invariant surface"
    assert rep["c"] is None
    assert rep["first_integral_residual"] is None


def test_helicoid_obj_export(tmp_path):
    out = tmp_path / "o"
    assert run("helicoid", "--mu", "1", "--obj", "--out", str(out)) == 0
    obj = (out / "helicoid_mu_1.obj").read_text().splitlines()
    assert obj[0].startswith("# mu=")
    n_v = sum(1 for l in obj if l.startswith("v "))
    n_f = sum(1 for l in obj if l.startswith("f "))
    assert n_v > 500 and n_f > 500
    # faces index into the vertex list
    worst = max(int(p) for l in obj if l.startswith("f ")
                for p in l.split()[1:])
    assert worst <= n_v


def test_solve_report_fields(tmp_path):
    out = tmp_path / "o"
    assert run("solve", "--a", "2", "--b", "2", "--H", "0.25", "--M", "2",
               "--M", "4", "--target-h", "0.05", "--out", str(out)) == 0
    rep = json.loads((out / "solution_a2_b2_k2_H0.25.json").read_text())
    assert rep["a"] == 2.0 and rep["b"] == 2.0 and rep["k"] == 2
    assert rep["H"] == 0.25 and rep["M"] == 4.0
    # the domain reaches past metric distance 1 from the far side, so the
    # divergence indicator is populated
    assert rep["cauchy_indicator"] is not None
    assert rep["cauchy_indicator"] >= 0.0
    assert 0.0 < rep["d_estimate"] < 2.0
    csv = (out / "solution_a2_b2_k2_H0.25.csv").read_text().splitlines()
    assert "x,y,u,nu,tag" in csv[:5]


def test_solve_accepts_inf_literal(tmp_path):
    out = tmp_path / "o"
    assert run("solve", "--a", "inf", "--b", "1", "--H", "0.5", "--M", "2",
               "--target-h", "0.05", "--out", str(out)) == 0
    rep = json.loads((out / "solution_ainf_b1_k2_H0.5.json").read_text())
    assert rep["a"] == "inf"


@pytest.mark.parametrize("argv", [
    ("solve", "--a", "1", "--b", "1", "--H", "0.7", "--M", "2"),
    ("solve", "--a", "inf", "--b", "inf", "--H", "0.5", "--M", "2"),
    ("solve", "--a", "1", "--b", "1", "--H", "0.25", "--M", "4", "--M", "2"),
    ("solve", "--a", "1", "--b", "1", "--H", "0.25", "--M", "2", "--k", "1"),
    ("figure", "catenoid-domains", "--mu", "0.3"),
    ("figure", "noid-domain", "--H", "0.5"),
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert run(*argv, "--out", str(tmp_path / "o")) == 2


def test_missing_out_parent_exits_2(tmp_path):
    assert run("helicoid", "--mu", "0",
               "--out", str(tmp_path / "no" / "such" / "dir")) == 2


def test_out_collides_with_file_exits_2(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("x")
    assert run("helicoid", "--mu", "0", "--out", str(blocker)) == 2


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\nmu=-1\n")
    out = tmp_path / "o"
    assert run("helicoid", "--mu", "3", "--config", str(cfg),
               "--out", str(out)) == 0
    rep = json.loads((out / "helicoid_mu_-1.json").read_text())
    assert rep["mu"] == -1.0


def test_config_unknown_key_exits_2(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mysterious=1\n")
    assert run("helicoid", "--mu", "1", "--config", str(cfg),
               "--out", str(tmp_path / "o")) == 2


def test_config_missing_file_exits_2(tmp_path):
    assert run("helicoid", "--mu", "1", "--config", str(tmp_path / "nope"),
               "--out", str(tmp_path / "o")) == 2


def test_audit_clean_run(tmp_path):
    out = tmp_path / "o"
    assert run("audit", "--out", str(out)) == 0
    text = (out / "audit.txt").read_text()
    assert text.count("PASS") == 14
    assert "FAIL" not in text
    assert "all 14 checks passed" in text


def test_audit_fault_injection_flips_one_row(tmp_path):
    out = tmp_path / "o"
    assert run("audit", "--fault-inject", "1e-3", "--out", str(out)) == 1
    lines = (out / "audit.txt").read_text().splitlines()
    failed = [l for l in lines if "FAIL" in l]
    assert len(failed) == 1
    assert "helicoid-residuals-mu-quarter" in failed[0]


def test_catenoid_figure_verdicts(tmp_path):
    out = tmp_path / "o"
    assert run("figure", "catenoid-domains", "--mu", "-3", "--mu", "3",
               "--step", "2e-3", "--out", str(out)) == 0
    rep = json.loads((out / "catenoid_domains.json").read_text())
    verdicts = rep["verdicts"]
    assert verdicts["-3"]["embedded"] is True
    assert verdicts["-3"]["crossings"] == 0
    assert verdicts["3"]["embedded"] is False
    assert verdicts["3"]["multiplicity_2_area"] > 0.0
    svg = (out / "catenoid_domains.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")


def test_sweep_is_deterministic_across_workers(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("a_grid=0.5,1\nb_grid=0.5,1\nM=2,4\ntarget_h=0.05\n")
    outs = {}
    for label, workers in (("serial", "1"), ("pool", "2")):
        out = tmp_path / label
        assert run("figure", "sweep-d", "--config", str(cfg),
                   "--workers", workers, "--out", str(out)) == 0
        outs[label] = (out / "sweep_d.csv").read_bytes()
    assert outs["serial"] == outs["pool"]
    rep = json.loads((tmp_path / "serial" / "sweep_d.json").read_text())
    assert rep["monotone_in_a"] is True
    assert rep["monotone_in_b"] is True
    assert rep["max_d"] <= rep["max_d_over_schedule"] + 1e-12


def test_noid_domain_report(tmp_path):
    out = tmp_path / "o"
    assert run("figure", "noid-domain", "--H", "0.45", "--target-h", "0.05",
               "--out", str(out)) == 0
    rep = json.loads((out / "noid_domain.json").read_text())
    assert rep["verdict"]["b_star"] == 0.0  # k=2 threshold
    lo, hi = rep["verdict"]["resolved_s_range"]
    assert lo >= 0.0 and hi > lo
    assert (out / "noid_domain.svg").exists()


def test_console_entry_point(tmp_path):
    out = tmp_path / "o"
    proc = subprocess.run(["ektlab", "helicoid", "--mu", "0.5",
                           "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert (out / "helicoid_mu_0.5.json").exists()


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
