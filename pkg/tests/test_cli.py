import json
import os

import yaml

from solscout.cli import main

from conftest import fixture_path
from helpers import replay_config, write_transcript
from test_pipeline import first_deposit_answers


def prep_first_deposit_transcript(tmp_path):
    root = fixture_path("first_deposit")
    transcript_path = str(tmp_path / "first_deposit.jsonl")
    config = replay_config(root, transcript_path, project_name="first_deposit")
    write_transcript(config, first_deposit_answers(), transcript_path)
    return root, transcript_path


def test_scan_first_deposit_replay_exit_code_and_reports(tmp_path, capsys):
    root, transcript = prep_first_deposit_transcript(tmp_path)
    out_dir = str(tmp_path / "out")
    code = main([
        "scan", root, "--mode", "replay", "--transcript", transcript,
        "--out", out_dir, "--project-name", "first_deposit",
    ])
    assert code == 1  # confirmed findings
    captured = capsys.readouterr().out
    assert "1 confirmed" in captured
    assert "risky-first-deposit" in captured
    report = json.loads(open(os.path.join(out_dir, "scan-report.json")).read())
    assert report["counts"]["confirmed"] == 1
    assert os.path.exists(os.path.join(out_dir, "scan-report.md"))


def test_scan_empty_project_exits_clean(tmp_path, capsys):
    root = tmp_path / "empty"
    root.mkdir()
    transcript = tmp_path / "t.jsonl"
    transcript.write_text("", encoding="utf-8")
    out_dir = str(tmp_path / "out")
    code = main([
        "scan", str(root), "--mode", "replay", "--transcript", str(transcript),
        "--out", out_dir,
    ])
    assert code == 0
    report = json.loads(open(os.path.join(out_dir, "scan-report.json")).read())
    assert report["findings"] == []


def test_scan_replay_without_transcript_is_config_error(tmp_path, capsys):
    root = fixture_path("first_deposit")
    code = main(["scan", root, "--mode", "replay", "--out", str(tmp_path / "o")])
    assert code == 2
    assert "transcript" in capsys.readouterr().err


def test_scan_live_without_key_is_config_error(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("SOLSCOUT_API_KEY", raising=False)
    code = main(["scan", fixture_path("first_deposit"), "--mode", "live",
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_score_first_deposit_report_against_truth(tmp_path, capsys):
    root, transcript = prep_first_deposit_transcript(tmp_path)
    out_dir = str(tmp_path / "out")
    main(["scan", root, "--mode", "replay", "--transcript", transcript,
          "--out", out_dir, "--project-name", "first_deposit"])
    capsys.readouterr()

    truth_path = tmp_path / "truth.yaml"
    truth_path.write_text(yaml.safe_dump({
        "projects": [{
            "name": "first_deposit",
            "tested": ["risky-first-deposit", "wrong-checkpoint-order", "slippage",
                       "front-running", "unauthorized-transfer"],
            "vulnerabilities": [{
                "rule": "risky-first-deposit",
                "function": "contracts/Vault.sol:YaxisVault.deposit",
            }],
        }],
    }), encoding="utf-8")
    code = main(["score", os.path.join(out_dir, "scan-report.json"), str(truth_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "TP=1 TN=4 FP=0 FN=0 (sum 5)" in out
    assert "precision=100.00%" in out
    assert "recall=100.00%" in out


def test_score_prints_expected_rates_from_raw_counts(tmp_path, capsys):
    """A 232-pair fixture engineered to TP=40 TN=154 FP=30 FN=8."""
    types = [f"t{i}" for i in range(232)]
    truth_entries = [
        {"rule": f"t{i}", "function": f"f{i}.sol:C.v{i}"} for i in range(48)
    ]
    truth_path = tmp_path / "truth.yaml"
    truth_path.write_text(yaml.safe_dump({
        "projects": [{"name": "w3b", "tested": types, "vulnerabilities": truth_entries}],
    }), encoding="utf-8")

    findings = []
    for i in range(40):  # match the first 40 ground-truth functions -> TP
        findings.append({
            "rule_id": f"t{i}", "project": "w3b", "file": f"f{i}.sol",
            "function_id": f"C.v{i}", "contract": "C", "function": f"v{i}",
            "span": [1, 2], "verdict": "confirmed",
        })
    for i in range(48, 78):  # 30 findings on truth-free types -> FP
        findings.append({
            "rule_id": f"t{i}", "project": "w3b", "file": "x.sol",
            "function_id": "C.x", "contract": "C", "function": "x",
            "span": [1, 2], "verdict": "confirmed",
        })
    report_path = tmp_path / "report.json"
    report_path.write_text(json.dumps({"findings": findings}), encoding="utf-8")

    assert main(["score", str(report_path), str(truth_path)]) == 0
    out = capsys.readouterr().out
    assert "TP=40 TN=154 FP=30 FN=8 (sum 232)" in out
    assert "precision=57.14%" in out
    assert "recall=83.33%" in out
    assert "f1=67.80%" in out


def test_score_empty_all_tn(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    report_path.write_text(json.dumps({"findings": []}), encoding="utf-8")
    truth_path = tmp_path / "truth.yaml"
    truth_path.write_text(yaml.safe_dump({
        "projects": [{"name": "p", "tested": ["a", "b"], "vulnerabilities": []}],
    }), encoding="utf-8")
    assert main(["score", str(report_path), str(truth_path)]) == 0
    assert "TP=0 TN=2 FP=0 FN=0" in capsys.readouterr().out


def test_score_malformed_truth_exits_2(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    report_path.write_text(json.dumps({"findings": []}), encoding="utf-8")
    truth_path = tmp_path / "truth.yaml"
    truth_path.write_text("projects: 'not a list'", encoding="utf-8")
    assert main(["score", str(report_path), str(truth_path)]) == 2


def test_rules_check_shipped(capsys):
    assert main(["rules-check"]) == 0
    assert "10 rules OK" in capsys.readouterr().out


def test_rules_check_empty_dir_warns(tmp_path, capsys):
    assert main(["rules-check", "--rules", str(tmp_path)]) == 0
    assert "0 rules" in capsys.readouterr().out


def test_rules_check_bad_rule_exits_2(tmp_path, capsys):
    (tmp_path / "bad.yaml").write_text(yaml.safe_dump({
        "schema": 1, "id": "bad", "scenarios": ["s"], "property": "p",
        "filters": [{"kind": "FCE", "expressions": ["x"]}],
        "recognition": [{"slot": "A", "question": "q?"}],
        "checks": [{"kind": "VC", "between": ["Z"], "expectation": "present"}],
    }), encoding="utf-8")
    assert main(["rules-check", "--rules", str(tmp_path)]) == 2
    assert "Z" in capsys.readouterr().err


def test_graph_dump(capsys):
    assert main(["graph-dump", fixture_path("first_deposit")]) == 0
    dot = capsys.readouterr().out
    assert '"YaxisVault.deposit" -> "YaxisVault.balance";' in dot
