"""End-to-end command line checks run in process via cli.main."""

import json
import math

import pytest

from platform_auctions import __version__, cli


def _run_json(capsys, argv):
    rc = cli.main(argv)
    out = capsys.readouterr().out
    return rc, json.loads(out)


def test_benchmark_examples(capsys):
    rc, payload = _run_json(capsys, ["benchmark", "--profile", "1,1,0,0",
                                     "--k", "1"])
    assert rc == 0
    assert payload["command"] == "benchmark"
    assert payload["version"] == __version__
    assert payload["config"]["profile"] == "1,1,0,0"
    assert payload["result"]["value"] == pytest.approx(1.0)
    assert payload["result"]["argmax_p"] == 0.0
    assert payload["result"]["argmax_q"] == 0.0

    rc, payload = _run_json(capsys, ["benchmark", "--profile", "10,1", "--k", "1"])
    assert rc == 0
    assert payload["result"]["value"] == pytest.approx(9.5)
    assert payload["result"]["argmax_p"] == 1.0
    assert payload["result"]["argmax_q"] == 0.0


def test_benchmark_empty_profile_is_usage_error(capsys):
    rc = cli.main(["benchmark", "--profile", "", "--k", "1"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_mech_eval_two_level(capsys):
    spec = '{"type": "two_level_lottery", "k": 2, "p": 3, "q": 1}'
    rc, payload = _run_json(capsys, ["mech-eval", "--mechanism", spec,
                                     "--profile", "5,4,3,2,1"])
    assert rc == 0
    res = payload["result"]
    assert res["alloc"] == pytest.approx([1.0, 1.0, 0.0, 0.0, 0.0])
    assert res["payment"][:2] == pytest.approx([7.0 / 3.0] * 2)
    assert res["objective_value"] == pytest.approx(13.0 / 3.0)


def test_mech_eval_bad_specs(capsys):
    missing = '{"type": "two_level_lottery", "k": 2, "p": 3}'
    assert cli.main(["mech-eval", "--mechanism", missing,
                     "--profile", "2,1"]) == 2
    capsys.readouterr()
    nested = '{"type": "two_level_lottery", "params": {"k": 2, "p": 3, "q": 1}}'
    assert cli.main(["mech-eval", "--mechanism", nested,
                     "--profile", "2,1"]) == 2
    capsys.readouterr()
    assert cli.main(["mech-eval", "--mechanism", "not json",
                     "--profile", "2,1"]) == 2


def test_ratio_sweep_csv_to_env_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PLATFORM_AUCTIONS_OUT", str(tmp_path))
    rc = cli.main(["ratio-sweep", "--mechanism", '{"type": "vickrey"}',
                   "--k", "1", "--grid-size", "5", "--vmax", "2.0",
                   "--output", "sweep.csv"])
    assert rc == 0
    text = (tmp_path / "sweep.csv").read_text()
    lines = text.splitlines()
    assert lines[0] == f"# command=ratio-sweep version={__version__}"
    assert lines[1].startswith("# config=")
    config = json.loads(lines[1][len("# config="):])
    assert config["grid_size"] == 5
    assert lines[2] == "v1,v2,mechanism,benchmark,ratio"
    # ties leave no surplus, so tied cells report an infinite ratio
    assert "0.5,0.5,0,0.5,inf" in lines
    assert "# worst_ratio=inf" in lines
    assert any(line.startswith("# argmax_profile=") for line in lines)


def test_ratio_sweep_twelve_digit_summary(capsys):
    rc = cli.main(["ratio-sweep", "--mechanism", '{"type": "ratio_auction"}',
                   "--k", "1", "--grid-size", "50", "--vmax", "4.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "# worst_ratio=1.33333333333" in out


def test_adoption(capsys):
    rc, payload = _run_json(capsys, [
        "adoption", "--mechanism", '{"type": "ratio_auction"}',
        "--distribution", '{"type": "uniform", "lo": 0, "hi": 1}',
        "--n", "2", "--k", "1", "--samples", "2000", "--seed", "3",
    ])
    assert rc == 0
    assert payload["result"]["advantage"] == pytest.approx(4.0 / 3.0, rel=1e-9)


def test_rsol_proof_checks(capsys):
    rc, payload = _run_json(capsys, ["rsol", "--profile", "4,2,1", "--k", "1"])
    assert rc == 0
    res = payload["result"]
    assert res["balanced_count"] == 2
    assert res["step1_avg"] == pytest.approx(1.75)
    assert res["step1_ok"] and res["step2_ok"]


def test_rsol_sweep_csv(capsys):
    rc = cli.main(["rsol", "--n-list", "2,3", "--k-list", "1",
                   "--families", "geometric", "--trials", "128"])
    assert rc == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[2] == "family,n,k,mechanism,benchmark,ratio,method"
    assert any(line.startswith("geometric,2,1,") and line.endswith(",exact")
               for line in lines)
    assert any(line.startswith("# worst_ratio=") for line in lines)


def test_monopoly_mean(capsys):
    rc, payload = _run_json(capsys, ["monopoly", "--h", "10", "--curve", "mean",
                                     "--samples", "20000", "--seed", "1"])
    assert rc == 0
    res = payload["result"]
    assert res["target"] == pytest.approx(1.0 + math.log(10.0))
    assert res["estimate"]["mean"] == pytest.approx(res["target"], abs=0.2)


def test_monopoly_curves_csv(capsys):
    rc = cli.main(["monopoly", "--h", "10", "--curve", "posting",
                   "--points", "3", "--samples", "3000", "--seed", "1"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[2] == "h,v,mean,stderr,exact"
    assert len(lines) == 6
    rc = cli.main(["monopoly", "--h", "10", "--curve", "revenue",
                   "--points", "3", "--samples", "3000", "--seed", "1"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[2] == "h,price,revenue,stderr"
    assert cli.main(["monopoly", "--h", "1", "--curve", "mean"]) == 2


def test_balanced(capsys):
    rc, payload = _run_json(capsys, ["balanced", "--n", "2",
                                     "--trials", "4096", "--seed", "5"])
    assert rc == 0
    res = payload["result"]
    assert res["above_floor"] is True
    assert res["ruin"]["root"] == pytest.approx(0.5436890126920764, abs=1e-9)
    assert res["probability"]["mean"] == pytest.approx(0.25, abs=0.03)


def test_lowerbound(capsys):
    rc, payload = _run_json(capsys, ["lowerbound", "--beta", "2", "--n", "55",
                                     "--trials", "4000", "--seed", "2"])
    assert rc == 0
    assert payload["result"]["claim_a_ok"] is True
    assert payload["result"]["threshold"] == 0.5
    capsys.readouterr()
    assert cli.main(["lowerbound", "--beta", "1"]) == 2


def test_profit_checks(capsys):
    rc, payload = _run_json(capsys, ["profit-checks", "--profile", "3,2,2",
                                     "--k", "2"])
    assert rc == 0
    res = payload["result"]
    assert res["bm"] == 6.0
    assert res["bm2"] == 6.0
    assert res["ofs"] == 4.0
    assert res["truncated"] == [2.0, 2.0, 2.0]


def test_ironing_dump(capsys):
    rc, payload = _run_json(capsys, [
        "ironing-dump",
        "--distribution", '{"pieces": [{"start": 0, "rate": 1}]}',
    ])
    assert rc == 0
    res = payload["result"]
    assert res["breakpoints"] == pytest.approx([0.0, 1.0])
    assert res["slopes"] == pytest.approx([1.0])


def test_reproduce_all_single_criterion(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PLATFORM_AUCTIONS_OUT", str(tmp_path))
    rc = cli.main(["reproduce-all", "--only", "ratio-auction",
                   "--output", "manifest.json"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS  ratio-auction:" in out
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["all_passed"] is True
    assert manifest["criteria"][0]["name"] == "ratio-auction"
    assert manifest["version"] == __version__


def test_reproduce_all_unknown_criterion(capsys):
    assert cli.main(["reproduce-all", "--only", "bogus"]) == 2
    assert "unknown criteria" in capsys.readouterr().err


def test_bad_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == __version__
