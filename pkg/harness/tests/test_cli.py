import json
import sys

from conftest import generate_composites
from coimg_harness.cli import main


class TestEvaluateCommand:
    def test_end_to_end_report(self, tmp_path, capsys):
        baseline_manifest, gen_manifest = generate_composites(tmp_path, per_class=40)
        out = tmp_path / "report.json"
        code = main([
            "evaluate",
            "--baseline", str(baseline_manifest),
            "--composite", str(gen_manifest),
            "--seed", "3",
            "--epochs", "2",
            "--image-size", "16",
            "--out", str(out),
        ])
        assert code == 0
        printed = capsys.readouterr().out
        assert "baseline:" in printed and "composite:" in printed
        assert "accuracy" in printed and "delta" in printed

        doc = json.loads(out.read_text())
        assert set(doc) == {"baseline", "composite", "comparison"}
        assert doc["baseline"]["classes"] == ["bluc", "grnc", "redc"]
        acc_row = next(r for r in doc["comparison"] if r["metric"] == "accuracy")
        assert abs(
            acc_row["delta"]
            - (doc["composite"]["accuracy"] - doc["baseline"]["accuracy"])
        ) < 1e-12

    def test_missing_manifest_exits_2(self, tmp_path, capsys):
        code = main([
            "evaluate",
            "--baseline", str(tmp_path / "nope.json"),
            "--composite", str(tmp_path / "nope.jsonl"),
            "--seed", "1",
        ])
        assert code == 2
        err = capsys.readouterr().err
        assert json.loads(err.splitlines()[-1])["error"] == "FileNotFoundError"
