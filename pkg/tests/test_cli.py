import json
import subprocess
import sys

import pytest

from rrobin.chain import load_chain
from rrobin.cli.config import ConfigFileError, load_run_config, parse_run_config
from rrobin.cli.main import main

SMALL_NET = ["--n", "10", "--endorsers", "10", "--quorum", "6", "--rounds", "20"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_bfs(capsys):
    code, out, _ = run(["analyze", "pr-bfs", "--ne", "100", "--q", "54", "--alpha", "0.33", "--beta", "0.05"], capsys)
    assert code == 0
    assert out.strip() == "pr-bfs 8.334e-04"


def test_analyze_csv_and_tiny_values(capsys):
    code, out, _ = run(["analyze", "pr-blv", "--ne", "100", "--q", "54", "--beta", "0.05", "--csv"], capsys)
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "formula,value,log10"
    name, value, log10 = row.split(",")
    assert name == "pr-blv" and value.startswith("6.964e-33")


def test_analyze_throughput(capsys):
    code, out, _ = run(["analyze", "throughput", "--tr", "5", "--block", "2000000", "--ne", "100"], capsys)
    assert code == 0
    assert "tps=1566.5" in out and "tx_fraction=0.9791" in out


def test_analyze_missing_flag_is_usage_error(capsys):
    code, _, err = run(["analyze", "pr-alv", "--ne", "100"], capsys)
    assert code == 2
    assert "usage:" in err and "--q" in err


def test_analyze_domain_error(capsys):
    code, _, err = run(["analyze", "pr-bfs", "--ne", "100", "--q", "200", "--alpha", "0.3", "--beta", "0"], capsys)
    assert code == 2 and "error" in err


def test_sweep_strict_rule_recommends_54(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, err = run(["sweep", "--afs-max", "1e-12", "--alv-max", "1e-6", "--pick", "largest",
                        "--q-min", "40", "--q-max", "70", "--out", str(out)], capsys)
    assert code == 0
    assert "recommended_q=54" in err
    lines = out.read_text().splitlines()
    assert lines[0] == "n_e,alpha,beta,d,s,q,pr_afs,pr_alv_s,recommended"
    assert len(lines) == 32
    assert [l.split(",")[5] for l in lines[1:] if l.endswith(",1")] == ["54"]


def test_sweep_parallel_matches_serial(tmp_path, capsys):
    args = ["sweep", "--ne", "50", "100", "--alpha", "0.2", "0.33", "--q-min", "20", "--q-max", "60"]
    run(args + ["--out", str(tmp_path / "a.csv")], capsys)
    run(args + ["--jobs", "2", "--out", str(tmp_path / "b.csv")], capsys)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_simulate_writes_outputs_and_is_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        code, out, _ = run(["simulate", *SMALL_NET, "--seed", "3", "--out-dir", str(tmp_path), "--prefix", name,
                            "--dump"], capsys)
        assert code == 0 and "blocks=20" in out
    for ext in (".csv", ".json", ".chain.json", ".chain.blocks"):
        assert (tmp_path / f"a{ext}").read_bytes() == (tmp_path / f"b{ext}").read_bytes(), ext
    report = json.loads((tmp_path / "a.json").read_text())
    assert report["summary"]["blocks"] == 20
    assert "output" not in report["config"]
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "round,leader,weight,forked,skipped,msgs"
    assert len(load_chain(tmp_path / "a.chain").blocks) == 20


def test_verify_valid_and_tampered(tmp_path, capsys):
    run(["simulate", *SMALL_NET, "--out-dir", str(tmp_path), "--dump"], capsys)
    code, out, _ = run(["verify", str(tmp_path / "run.chain.json")], capsys)
    assert code == 0 and out.strip() == "valid: 20 blocks"
    blocks = tmp_path / "run.chain.blocks"
    data = bytearray(blocks.read_bytes())
    data[-5] ^= 0x01
    blocks.write_bytes(bytes(data))
    code, out, _ = run(["verify", str(tmp_path / "run.chain")], capsys)
    assert code == 1 and out.startswith("invalid: bad-signature at height 20")


def test_env_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RROBIN_OUTPUT_DIR", str(tmp_path / "env"))
    code, _, _ = run(["simulate", *SMALL_NET], capsys)
    assert code == 0
    assert (tmp_path / "env" / "run.csv").exists()


def test_attack_requires_strategy(capsys):
    code, _, err = run(["attack", *SMALL_NET], capsys)
    assert code == 2 and "strategy" in err


def test_attack_runs(tmp_path, capsys):
    code, out, _ = run(["attack", *SMALL_NET, "--alpha", "0.3", "--strategy", "withhold-confirm",
                        "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and "targeted_skip_rate" in out
    assert json.loads((tmp_path / "run.json").read_text())["summary"]["adversary_strategy"] == "withhold-confirm"


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = {
        "params": {"n_candidates": 3, "n_endorsers": 10, "quorum": 6},
        "net": {"n": 10, "latency": {"kind": "uniform", "lo": 5, "hi": 80}},
        "rounds": 15,
        "seed": 4,
        "output": {"dir": str(tmp_path), "prefix": "cfg"},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg, indent=1))
    code, out, _ = run(["simulate", "--config", str(path), "--rounds", "12"], capsys)
    assert code == 0 and "blocks=12" in out
    report = json.loads((tmp_path / "cfg.json").read_text())
    assert report["config"]["rounds"] == 12 and report["config"]["net"]["latency"]["hi"] == 80


def test_config_errors_name_the_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "net": {"n": "ten"}\n}\n')
    with pytest.raises(ConfigFileError) as exc:
        load_run_config(path)
    assert exc.value.line == 2
    code, _, err = run(["simulate", "--config", str(path)], capsys)
    assert code == 2 and f"{path}:2:" in err


@pytest.mark.parametrize(
    "text, needle",
    [
        ('{"bogus": 1}', "unknown section"),
        ('{"params": {"quorum": 500}}', "quorum"),
        ('{"rounds": 0}', "rounds"),
        ('{"net": {"beta": 2}}', "beta"),
        ('{"adversary": {"strategy": "nope"}}', "strategy"),
        ('{"output": {"colour": "red"}}', "colour"),
        ("[1, 2]", "object"),
        ('{\n  "rounds": 5,\n  oops\n}', "invalid JSON"),
    ],
)
def test_config_rejections(tmp_path, text, needle):
    path = tmp_path / "c.json"
    path.write_text(text)
    with pytest.raises(ConfigFileError) as exc:
        load_run_config(path)
    assert needle in str(exc.value)


def test_parse_accepts_readme_example():
    cfg = parse_run_config({
        "params": {"n_candidates": 5, "n_endorsers": 100, "quorum": 54, "confirm_depth": 12},
        "net": {"n": 100, "beta": 0.05, "latency": {"kind": "uniform", "lo": 20, "hi": 200}},
        "adversary": {"alpha": 0.33, "strategy": "equivocate"},
        "rounds": 1000,
        "seed": 7,
        "output": {"dir": "out", "prefix": "eq", "dump": False},
    })
    assert cfg.adversary.strategy == "equivocate" and cfg.net.latency.hi == 200 and cfg.output.prefix == "eq"


def test_bias_demo(tmp_path, capsys):
    out = tmp_path / "bias.csv"
    code, _, err = run(["bias-demo", "--runs", "3", "--final", "2000", "--out", str(out)], capsys)
    assert code == 0 and "final stake share" in err
    lines = out.read_text().splitlines()
    assert lines[0] == "total_stake,adv_stake_share,adv_block_share"
    assert len(lines) == 11
    code, _, _ = run(["bias-demo", "--runs", "3", "--final", "2000", "--control", "--out", str(tmp_path / "c.csv")],
                     capsys)
    assert code == 0


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "rrobin", "analyze", "pr-alv", "--ne", "100", "--q", "54",
                          "--alpha", "0.33", "--beta", "0.05"], capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "pr-alv 6.229e-02"
